//! Physical parameters of the qubit, resonator, tones and dissipation, plus the
//! elementary quantities derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{self, FLUX_QUANTUM, PLANCK};

/// Flux qubit described by its tunnel gap and persistent current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    gap: f64,
    persistent_current: f64,
}

impl QubitParams {
    /// `gap_ghz` is Δ/h, `persistent_current_na` is I_p.
    pub fn new(gap_ghz: f64, persistent_current_na: f64) -> Result<Self> {
        if !(gap_ghz > 0.0 && gap_ghz.is_finite()) {
            return Err(Error::invalid(
                "gap",
                format!("must be positive, got {gap_ghz}"),
            ));
        }
        if !(persistent_current_na > 0.0 && persistent_current_na.is_finite()) {
            return Err(Error::invalid(
                "persistent_current",
                format!("must be positive, got {persistent_current_na}"),
            ));
        }
        Ok(Self {
            gap: units::ghz(gap_ghz),
            persistent_current: persistent_current_na * 1e-9,
        })
    }

    /// Δ/ħ in rad/ns.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// I_p in A.
    pub fn persistent_current(&self) -> f64 {
        self.persistent_current
    }
}

/// Operating point of the qubit along its flux axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxBias {
    /// ε/ħ in rad/ns (signed).
    EnergyBias(f64),
    /// Φ_e in units of Φ_0.
    ExternalFlux(f64),
}

impl FluxBias {
    pub fn from_energy_ghz(eps_ghz: f64) -> Self {
        FluxBias::EnergyBias(units::ghz(eps_ghz))
    }

    /// ε/ħ in rad/ns for this bias.
    pub fn energy_bias(&self, q: &QubitParams) -> f64 {
        match *self {
            FluxBias::EnergyBias(eps) => eps,
            FluxBias::ExternalFlux(phi) => bias_from_flux(q, phi),
        }
    }

    /// Φ_e / Φ_0 for this bias.
    pub fn external_flux(&self, q: &QubitParams) -> f64 {
        match *self {
            FluxBias::EnergyBias(eps) => flux_from_bias(q, eps),
            FluxBias::ExternalFlux(phi) => phi,
        }
    }
}

/// ε = 2 I_p (Φ_0/2 − Φ_e), returned as ε/ħ in rad/ns. `flux` is Φ_e/Φ_0.
pub fn bias_from_flux(q: &QubitParams, flux: f64) -> f64 {
    let eps_joule = 2.0 * q.persistent_current * FLUX_QUANTUM * (0.5 - flux);
    // E/h in Hz, then to rad/ns
    units::ghz(eps_joule / PLANCK * 1e-9)
}

/// Inverse of [`bias_from_flux`]: Φ_e/Φ_0 for a given ε/ħ in rad/ns.
pub fn flux_from_bias(q: &QubitParams, eps: f64) -> f64 {
    let eps_joule = units::to_ghz(eps) * 1e9 * PLANCK;
    0.5 - eps_joule / (2.0 * q.persistent_current * FLUX_QUANTUM)
}

/// Qubit splitting ω_q = √(Δ² + ε²) in rad/ns.
pub fn level_splitting(q: &QubitParams, b: &FluxBias) -> f64 {
    q.gap.hypot(b.energy_bias(q))
}

/// Projection factors (Δ/ω_q, ε/ω_q) that weight the transverse and
/// longitudinal couplings.
pub fn projections(q: &QubitParams, b: &FluxBias) -> (f64, f64) {
    let eps = b.energy_bias(q);
    let wq = q.gap.hypot(eps);
    (q.gap / wq, eps / wq)
}

/// Coplanar resonator fundamental mode and its coupling to the qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorParams {
    fundamental: f64,
    quality_factor: f64,
    coupling: f64,
    drive_harmonic: u32,
}

impl ResonatorParams {
    pub fn new(
        fundamental_ghz: f64,
        quality_factor: f64,
        coupling_mhz: f64,
        drive_harmonic: u32,
    ) -> Result<Self> {
        if !(fundamental_ghz > 0.0 && fundamental_ghz.is_finite()) {
            return Err(Error::invalid(
                "fundamental_freq",
                format!("must be positive, got {fundamental_ghz}"),
            ));
        }
        if !(quality_factor > 0.0 && quality_factor.is_finite()) {
            return Err(Error::invalid(
                "quality_factor",
                format!("must be positive, got {quality_factor}"),
            ));
        }
        if !(coupling_mhz >= 0.0 && coupling_mhz.is_finite()) {
            return Err(Error::invalid(
                "coupling",
                format!("must be non-negative, got {coupling_mhz}"),
            ));
        }
        if drive_harmonic == 0 {
            return Err(Error::invalid("drive_harmonic", "must be at least 1"));
        }
        Ok(Self {
            fundamental: units::ghz(fundamental_ghz),
            quality_factor,
            coupling: units::mhz(coupling_mhz),
            drive_harmonic,
        })
    }

    /// ω_r in rad/ns.
    pub fn fundamental(&self) -> f64 {
        self.fundamental
    }

    pub fn quality_factor(&self) -> f64 {
        self.quality_factor
    }

    /// g in rad/ns.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn drive_harmonic(&self) -> u32 {
        self.drive_harmonic
    }

    /// Photon decay rate κ = ω_r / Q in rad/ns.
    pub fn kappa(&self) -> f64 {
        self.fundamental / self.quality_factor
    }

    /// Frequency of the harmonic that carries the drive, rad/ns.
    pub fn drive_frequency(&self) -> f64 {
        self.fundamental * self.drive_harmonic as f64
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_quality_factor(mut self, q: f64) -> Self {
        self.quality_factor = q;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToneRole {
    Probe,
    Drive,
    Spectroscopy,
}

/// One classical tone: amplitude Ω_i and frequency ω_i, both in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub amplitude: f64,
    pub frequency: f64,
    pub role: ToneRole,
}

impl Tone {
    pub fn new(role: ToneRole, amplitude: f64, frequency: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::invalid(
                "tone amplitude",
                format!("must be non-negative, got {amplitude}"),
            ));
        }
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::invalid(
                "tone frequency",
                format!("must be positive, got {frequency}"),
            ));
        }
        Ok(Self {
            amplitude,
            frequency,
            role,
        })
    }

    pub fn is_active(&self) -> bool {
        self.amplitude > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSet {
    pub probe: Tone,
    pub drive: Tone,
    pub spectroscopy: Tone,
}

/// Qubit relaxation Γ_r and pure dephasing γ_φ in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationRates {
    pub relaxation: f64,
    pub pure_dephasing: f64,
}

impl DissipationRates {
    pub fn new(relaxation: f64, pure_dephasing: f64) -> Result<Self> {
        if !(relaxation >= 0.0 && relaxation.is_finite()) {
            return Err(Error::invalid(
                "relaxation",
                format!("must be non-negative, got {relaxation}"),
            ));
        }
        if !(pure_dephasing >= 0.0 && pure_dephasing.is_finite()) {
            return Err(Error::invalid(
                "pure_dephasing",
                format!("must be non-negative, got {pure_dephasing}"),
            ));
        }
        Ok(Self {
            relaxation,
            pure_dephasing,
        })
    }

    pub fn from_mhz(relaxation_mhz: f64, pure_dephasing_mhz: f64) -> Result<Self> {
        Self::new(units::mhz(relaxation_mhz), units::mhz(pure_dephasing_mhz))
    }

    /// Γ_φ = Γ_r/2 + γ_φ.
    pub fn decoherence(&self) -> f64 {
        0.5 * self.relaxation + self.pure_dephasing
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz, to_ghz};
    use proptest::prelude::*;

    fn nominal_qubit() -> QubitParams {
        QubitParams::new(2.97, 160.0).unwrap()
    }

    #[test]
    fn splitting_at_degeneracy_is_gap() {
        let q = nominal_qubit();
        let wq = level_splitting(&q, &FluxBias::from_energy_ghz(0.0));
        assert!((to_ghz(wq) - 2.97).abs() < 1e-14);
    }

    #[test]
    fn splitting_at_symmetric_point() {
        let q = nominal_qubit();
        let wq = level_splitting(&q, &FluxBias::from_energy_ghz(2.97));
        assert!((to_ghz(wq) - 2.97 * 2f64.sqrt()).abs() < 1e-12);
        assert!((to_ghz(wq) - 4.2002).abs() < 1e-4);
    }

    #[test]
    fn half_flux_quantum_is_degeneracy() {
        let q = nominal_qubit();
        assert_eq!(bias_from_flux(&q, 0.5), 0.0);
    }

    #[test]
    fn one_ghz_bias_flux_offset() {
        // δΦ = h (1 GHz) / (2 I_p), evaluated in SI then expressed in Φ_0.
        let q = nominal_qubit();
        let h: f64 = 6.626_070_15e-34;
        let e = 1.602_176_634e-19;
        let dphi_wb = h * 1e9 / (2.0 * 160e-9);
        let dphi = dphi_wb / (h / (2.0 * e));
        assert!((dphi - 1.001_360_396e-3).abs() < 1e-12);
        let eps = bias_from_flux(&q, 0.5 - dphi);
        assert!((to_ghz(eps) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projections_examples() {
        let q = nominal_qubit();
        let (bar, check) = projections(&q, &FluxBias::from_energy_ghz(0.0));
        assert_eq!((bar, check), (1.0, 0.0));

        let (bar, check) = projections(&q, &FluxBias::from_energy_ghz(2.97));
        let r = 0.5f64.sqrt();
        assert!((bar - r).abs() < 1e-15 && (check - r).abs() < 1e-15);

        let (bar, check) = projections(&q, &FluxBias::from_energy_ghz(2.0));
        assert!((bar - 0.829_463_334).abs() < 1e-9);
        assert!((check - 0.558_561_168).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(QubitParams::new(0.0, 160.0).is_err());
        assert!(QubitParams::new(2.97, -1.0).is_err());
        assert!(ResonatorParams::new(2.59, 0.0, 3.0, 3).is_err());
        assert!(ResonatorParams::new(2.59, 1e5, 3.0, 0).is_err());
        assert!(Tone::new(ToneRole::Drive, -1.0, 1.0).is_err());
        assert!(DissipationRates::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn kappa_is_derived() {
        let r = ResonatorParams::new(2.59, 1.2e5, 3.0, 3).unwrap();
        assert!((r.kappa() - ghz(2.59) / 1.2e5).abs() < 1e-18);
        assert!((to_ghz(r.drive_frequency()) - 7.77).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn projections_are_normalized(gap in 0.1f64..20.0, eps in -30.0f64..30.0) {
            let q = QubitParams::new(gap, 160.0).unwrap();
            let (bar, check) = projections(&q, &FluxBias::from_energy_ghz(eps));
            prop_assert!((bar * bar + check * check - 1.0).abs() < 4.0 * f64::EPSILON);
        }

        #[test]
        fn splitting_even_and_monotone(gap in 0.1f64..20.0, eps in 0.0f64..30.0, d in 1e-6f64..5.0) {
            let q = QubitParams::new(gap, 160.0).unwrap();
            let w = |e: f64| level_splitting(&q, &FluxBias::from_energy_ghz(e));
            prop_assert_eq!(w(eps), w(-eps));
            prop_assert!(w(eps + d) > w(eps));
        }

        #[test]
        fn flux_round_trip(ip in 10.0f64..1000.0, phi in 0.3f64..0.7) {
            let q = QubitParams::new(2.97, ip).unwrap();
            let eps = bias_from_flux(&q, phi);
            prop_assert!((flux_from_bias(&q, eps) - phi).abs() < 1e-12);
        }

        #[test]
        fn bias_is_linear_in_flux(phi1 in 0.4f64..0.6, phi2 in 0.4f64..0.6) {
            let q = nominal_qubit();
            let mid = 0.5 * (phi1 + phi2);
            let lhs = bias_from_flux(&q, mid);
            let rhs = 0.5 * (bias_from_flux(&q, phi1) + bias_from_flux(&q, phi2));
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
        }
    }
}
