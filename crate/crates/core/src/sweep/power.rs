use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ResonatorParams;
use crate::units::{self, PLANCK};

/// Capacitive drive line feeding the resonator harmonic that carries Ω_d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceGeometry {
    pub coupling_capacitance_ff: f64,
    pub resonator_capacitance_pf: f64,
    pub line_impedance_ohm: f64,
    /// κ_d/2π of the drive mode.
    pub drive_mode_decay_mhz: f64,
    /// g_d/2π to the drive mode.
    pub drive_coupling_mhz: f64,
    /// Multiplies the amplitude formula; see [`DeviceGeometry::calibrate_to`].
    pub calibration: f64,
}

impl DeviceGeometry {
    /// C_c = 5 fF, C_r = 0.4 pF, Z = 50 Ω, κ_d = hω_r/Q, g_d = h^{1.5} g with h the harmonic.
    pub fn nominal(resonator: &ResonatorParams) -> Self {
        let h = resonator.drive_harmonic() as f64;
        Self {
            coupling_capacitance_ff: 5.0,
            resonator_capacitance_pf: 0.4,
            line_impedance_ohm: 50.0,
            drive_mode_decay_mhz: units::to_mhz(
                resonator.drive_frequency() / resonator.quality_factor(),
            ),
            drive_coupling_mhz: h.powf(1.5) * units::to_mhz(resonator.coupling()),
            calibration: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coupling_capacitance_ff", self.coupling_capacitance_ff),
            ("resonator_capacitance_pf", self.resonator_capacitance_pf),
            ("line_impedance_ohm", self.line_impedance_ohm),
            ("drive_mode_decay_mhz", self.drive_mode_decay_mhz),
            ("drive_coupling_mhz", self.drive_coupling_mhz),
            ("calibration", self.calibration),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Rescale `calibration` so that `p_ref_dbm` maps to `omega_ref` (rad/ns).
    pub fn calibrate_to(&self, p_ref_dbm: f64, wd: f64, omega_ref: f64) -> Result<Self> {
        let unit = Self {
            calibration: 1.0,
            ..*self
        };
        let raw = drive_from_power(p_ref_dbm, wd, &unit)?;
        if raw == 0.0 || !raw.is_finite() {
            return Err(Error::DegenerateDenominator("calibrate_to"));
        }
        Ok(Self {
            calibration: omega_ref / raw,
            ..*self
        })
    }
}

/// Ω_d = 4 g_d (1/κ_d)(C_c/2) √(10^{(P−30)/10}/Z) √(hω_d/C_r), times the
/// calibration factor; SI evaluation, result in rad/ns.
pub fn drive_from_power(p_in_dbm: f64, wd: f64, geometry: &DeviceGeometry) -> Result<f64> {
    geometry.validate()?;
    if p_in_dbm.is_nan() || !(wd > 0.0) {
        return Err(Error::invalid(
            "drive_from_power",
            "power must be a number and ω_d positive",
        ));
    }
    let watts = 10f64.powf((p_in_dbm - 30.0) / 10.0);
    let g_d = units::to_rad_per_s(units::mhz(geometry.drive_coupling_mhz));
    let kappa_d = units::to_rad_per_s(units::mhz(geometry.drive_mode_decay_mhz));
    let c_c = geometry.coupling_capacitance_ff * 1e-15;
    let c_r = geometry.resonator_capacitance_pf * 1e-12;
    let wd_si = units::to_rad_per_s(wd);
    let amplitude = 4.0 * g_d / kappa_d
        * (0.5 * c_c)
        * (watts / geometry.line_impedance_ohm).sqrt()
        * (PLANCK * wd_si / c_r).sqrt();
    Ok(units::from_rad_per_s(geometry.calibration * amplitude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ghz;
    use proptest::prelude::*;

    fn geometry() -> DeviceGeometry {
        DeviceGeometry::nominal(&ResonatorParams::new(2.59, 1.2e5, 3.0, 3).unwrap())
    }

    #[test]
    fn nominal_defaults() {
        let g = geometry();
        assert!((g.drive_coupling_mhz - 27f64.sqrt() * 3.0).abs() < 1e-12);
        assert!((g.drive_mode_decay_mhz - 7.77e3 / 1.2e5).abs() < 1e-9);
    }

    #[test]
    fn ten_db_is_sqrt_ten() {
        let g = geometry();
        let a = drive_from_power(-20.0, ghz(7.77), &g).unwrap();
        let b = drive_from_power(-10.0, ghz(7.77), &g).unwrap();
        assert!((b / a - 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn vanishes_at_minus_infinity() {
        assert_eq!(
            drive_from_power(f64::NEG_INFINITY, ghz(7.77), &geometry()).unwrap(),
            0.0
        );
    }

    #[test]
    fn calibration_hits_reference() {
        let g = geometry().calibrate_to(-5.0, ghz(7.77), ghz(3.0)).unwrap();
        let w = drive_from_power(-5.0, ghz(7.77), &g).unwrap();
        assert!((w / ghz(3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_geometry() {
        let g = DeviceGeometry {
            line_impedance_ohm: 0.0,
            ..geometry()
        };
        assert!(drive_from_power(0.0, ghz(7.77), &g).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_power(p in -80.0f64..20.0, dp in 0.01f64..10.0) {
            let g = geometry();
            let a = drive_from_power(p, ghz(7.77), &g).unwrap();
            let b = drive_from_power(p + dp, ghz(7.77), &g).unwrap();
            prop_assert!(b > a);
        }
    }
}
