//! JSON run configuration with unit-suffixed keys and nominal device defaults.
//!
//! Every field is optional in the file. [`RunConfig::resolve`] fills the
//! fields whose default depends on other fields; a resolved configuration
//! resolves to itself.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::auto_fock_dim;
use crate::params::{
    DissipationRates, FluxBias, QubitParams, ResonatorParams, Tone, ToneRole, ToneSet,
};
use crate::steady_state::{CorrectionOrder, OperatingPoint, PhotonMode, ProbeStrength};
use crate::sweep::{Axis, AxisName, DeviceGeometry, Normalization, OrderPolicy};
use crate::units::{ghz, to_ghz};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QubitConfig {
    pub gap_ghz: f64,
    pub persistent_current_na: f64,
}

impl Default for QubitConfig {
    fn default() -> Self {
        Self {
            gap_ghz: 2.97,
            persistent_current_na: 160.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonatorConfig {
    pub frequency_ghz: f64,
    pub quality_factor: f64,
    pub coupling_mhz: f64,
    pub drive_harmonic: u32,
}

impl Default for ResonatorConfig {
    fn default() -> Self {
        Self {
            frequency_ghz: 2.59,
            quality_factor: 1.2e5,
            coupling_mhz: 3.0,
            drive_harmonic: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    pub relaxation_mhz: f64,
    pub pure_dephasing_mhz: f64,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            relaxation_mhz: 10.0,
            pure_dephasing_mhz: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TonesConfig {
    /// Defaults to the resonator frequency.
    pub probe_frequency_ghz: Option<f64>,
    /// Explicit Ω_p; when absent Ω_p = κ√N/2.
    pub probe_amplitude_ghz: Option<f64>,
    /// Defaults to the drive harmonic of the resonator.
    pub drive_frequency_ghz: Option<f64>,
    pub drive_amplitude_ghz: f64,
    pub spectroscopy_frequency_ghz: f64,
    pub spectroscopy_amplitude_ghz: f64,
}

impl Default for TonesConfig {
    fn default() -> Self {
        Self {
            probe_frequency_ghz: None,
            probe_amplitude_ghz: None,
            drive_frequency_ghz: None,
            drive_amplitude_ghz: 0.0,
            spectroscopy_frequency_ghz: 3.5,
            spectroscopy_amplitude_ghz: 0.001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatingConfig {
    pub energy_bias_ghz: f64,
    pub photon_number: f64,
}

impl Default for OperatingConfig {
    fn default() -> Self {
        Self {
            energy_bias_ghz: 0.0,
            photon_number: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationReference {
    pub power_dbm: f64,
    pub drive_amplitude_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub coupling_capacitance_ff: f64,
    pub resonator_capacitance_pf: f64,
    pub line_impedance_ohm: f64,
    /// Defaults to hω_r/Q for drive harmonic h.
    pub drive_mode_decay_mhz: Option<f64>,
    /// Defaults to h^1.5 g.
    pub drive_coupling_mhz: Option<f64>,
    pub calibration: f64,
    /// When present, `calibration` is recomputed so this power gives this amplitude.
    pub calibration_reference: Option<CalibrationReference>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            coupling_capacitance_ff: 5.0,
            resonator_capacitance_pf: 0.4,
            line_impedance_ohm: 50.0,
            drive_mode_decay_mhz: None,
            drive_coupling_mhz: None,
            calibration: 1.0,
            calibration_reference: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl AxisConfig {
    pub const fn new(start: f64, stop: f64, points: usize) -> Self {
        Self {
            start,
            stop,
            points,
        }
    }

    pub fn axis(&self, name: AxisName) -> Result<Axis> {
        Axis::new(name, self.start, self.stop, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub bias_ghz: AxisConfig,
    pub spectroscopy_ghz: AxisConfig,
    pub trace_bias_ghz: AxisConfig,
    pub trace_amplitudes_ghz: Vec<f64>,
    /// When present, bias traces are taken at these powers instead of `trace_amplitudes_ghz`.
    pub trace_powers_dbm: Option<Vec<f64>>,
    pub level_bias_ghz: AxisConfig,
    pub level_amplitudes_ghz: AxisConfig,
    pub calibration_powers_dbm: AxisConfig,
    /// Defaults to ω_r ± 5κ over 11 points, with κ from `oracle.quality_factor`.
    pub probe_ghz: Option<AxisConfig>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            bias_ghz: AxisConfig::new(-6.0, 6.0, 201),
            spectroscopy_ghz: AxisConfig::new(2.0, 6.0, 201),
            trace_bias_ghz: AxisConfig::new(-3.0, 3.0, 1201),
            trace_amplitudes_ghz: vec![0.0, 1.0, 2.0, 2.4, 2.8, 3.0],
            trace_powers_dbm: None,
            level_bias_ghz: AxisConfig::new(-6.0, 6.0, 241),
            level_amplitudes_ghz: AxisConfig::new(0.0, 3.0, 4),
            calibration_powers_dbm: AxisConfig::new(-40.0, 10.0, 51),
            probe_ghz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeConfig {
    pub correction_order: OrderPolicy,
    pub normalization: Normalization,
    pub photon_mode: PhotonMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Defaults to the smallest truncation for the photon number.
    pub fock_dim: Option<usize>,
    /// Defaults to the resonator quality factor.
    pub quality_factor: Option<f64>,
    pub bias_points_ghz: Vec<f64>,
    pub drive_amplitudes_ghz: Vec<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            fock_dim: None,
            quality_factor: None,
            bias_points_ghz: vec![-3.0, -1.0, 0.0, 1.0, 3.0],
            drive_amplitudes_ghz: vec![0.5, 1.0, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub qubit: QubitConfig,
    pub resonator: ResonatorConfig,
    pub rates: RatesConfig,
    pub tones: TonesConfig,
    pub operating_point: OperatingConfig,
    pub geometry: GeometryConfig,
    pub sweep: SweepConfig,
    pub mode: ModeConfig,
    pub oracle: OracleConfig,
    pub output: OutputConfig,
}

/// A resolved configuration and the dotted names of the fields that took a
/// computed default.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: RunConfig,
    pub defaulted: Vec<String>,
}

impl RunConfig {
    /// Strict parse; errors name the offending field and position.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!(
                "at `{path}` (line {}, column {}): {inner}",
                inner.line(),
                inner.column()
            ))
        })?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn resonator_params(&self) -> Result<ResonatorParams> {
        let r = &self.resonator;
        ResonatorParams::new(
            r.frequency_ghz,
            r.quality_factor,
            r.coupling_mhz,
            r.drive_harmonic,
        )
    }

    /// Fill computed defaults and validate every section.
    pub fn resolve(mut self) -> Result<Resolved> {
        let resonator = self.resonator_params()?;
        let mut defaulted = Vec::new();
        let mut fill = |slot: &mut Option<f64>, name: &str, value: f64| {
            if slot.is_none() {
                *slot = Some(value);
                defaulted.push(name.to_string());
            }
        };
        fill(
            &mut self.tones.probe_frequency_ghz,
            "tones.probe_frequency_ghz",
            self.resonator.frequency_ghz,
        );
        fill(
            &mut self.tones.drive_frequency_ghz,
            "tones.drive_frequency_ghz",
            to_ghz(resonator.drive_frequency()),
        );
        let nominal = DeviceGeometry::nominal(&resonator);
        fill(
            &mut self.geometry.drive_mode_decay_mhz,
            "geometry.drive_mode_decay_mhz",
            nominal.drive_mode_decay_mhz,
        );
        fill(
            &mut self.geometry.drive_coupling_mhz,
            "geometry.drive_coupling_mhz",
            nominal.drive_coupling_mhz,
        );
        fill(
            &mut self.oracle.quality_factor,
            "oracle.quality_factor",
            self.resonator.quality_factor,
        );
        if self.oracle.fock_dim.is_none() {
            self.oracle.fock_dim = Some(auto_fock_dim(self.operating_point.photon_number));
            defaulted.push("oracle.fock_dim".into());
        }
        if self.sweep.probe_ghz.is_none() {
            let w = self.resonator.frequency_ghz;
            let q = self
                .oracle
                .quality_factor
                .unwrap_or(self.resonator.quality_factor);
            let k = w / q;
            self.sweep.probe_ghz = Some(AxisConfig::new(w - 5.0 * k, w + 5.0 * k, 11));
            defaulted.push("sweep.probe_ghz".into());
        }
        let geometry = self.device_geometry()?;
        if let Some(r) = self.geometry.calibration_reference {
            let wd = self.operating_point()?.tones.drive.frequency;
            self.geometry.calibration = geometry
                .calibrate_to(r.power_dbm, wd, ghz(r.drive_amplitude_ghz))?
                .calibration;
        }
        self.validate()?;
        Ok(Resolved {
            config: self,
            defaulted,
        })
    }

    fn validate(&self) -> Result<()> {
        self.operating_point()?.validate()?;
        self.device_geometry()?.validate()?;
        let s = &self.sweep;
        for (name, a) in [
            (AxisName::EnergyBias, s.bias_ghz),
            (AxisName::SpectroscopyFrequency, s.spectroscopy_ghz),
            (AxisName::EnergyBias, s.trace_bias_ghz),
            (AxisName::EnergyBias, s.level_bias_ghz),
            (AxisName::DriveAmplitude, s.level_amplitudes_ghz),
            (AxisName::DrivePower, s.calibration_powers_dbm),
        ] {
            a.axis(name)?;
        }
        if let Some(p) = s.probe_ghz {
            p.axis(AxisName::ProbeFrequency)?;
        }
        let finite = |name: &'static str, v: &[f64]| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Error::invalid(name, "values must be finite"))
            }
        };
        finite("sweep.trace_amplitudes_ghz", &s.trace_amplitudes_ghz)?;
        finite(
            "sweep.trace_powers_dbm",
            s.trace_powers_dbm.as_deref().unwrap_or(&[]),
        )?;
        finite("oracle.bias_points_ghz", &self.oracle.bias_points_ghz)?;
        finite(
            "oracle.drive_amplitudes_ghz",
            &self.oracle.drive_amplitudes_ghz,
        )?;
        if let Some(f) = self.oracle.fock_dim {
            if f < 2 {
                return Err(Error::invalid(
                    "oracle.fock_dim",
                    format!("must be at least 2, got {f}"),
                ));
            }
        }
        if let Some(q) = self.oracle.quality_factor {
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::invalid(
                    "oracle.quality_factor",
                    format!("must be positive, got {q}"),
                ));
            }
        }
        Ok(())
    }

    /// Operating-point template; frequencies left unset fall back to their defaults.
    pub fn operating_point(&self) -> Result<OperatingPoint> {
        let resonator = self.resonator_params()?;
        let t = &self.tones;
        let probe_f = t.probe_frequency_ghz.map_or(resonator.fundamental(), ghz);
        let drive_f = t
            .drive_frequency_ghz
            .map_or(resonator.drive_frequency(), ghz);
        let (probe_amp, probe_strength) = match t.probe_amplitude_ghz {
            Some(a) => (ghz(a), ProbeStrength::Explicit),
            None => (0.0, ProbeStrength::FromPhotonNumber),
        };
        let eps = self.operating_point.energy_bias_ghz;
        if !eps.is_finite() {
            return Err(Error::invalid(
                "operating_point.energy_bias_ghz",
                "must be finite",
            ));
        }
        Ok(OperatingPoint {
            qubit: QubitParams::new(self.qubit.gap_ghz, self.qubit.persistent_current_na)?,
            bias: FluxBias::from_energy_ghz(eps),
            resonator,
            tones: ToneSet {
                probe: Tone::new(ToneRole::Probe, probe_amp, probe_f)?,
                drive: Tone::new(ToneRole::Drive, ghz(t.drive_amplitude_ghz), drive_f)?,
                spectroscopy: Tone::new(
                    ToneRole::Spectroscopy,
                    ghz(t.spectroscopy_amplitude_ghz),
                    ghz(t.spectroscopy_frequency_ghz),
                )?,
            },
            rates: DissipationRates::from_mhz(
                self.rates.relaxation_mhz,
                self.rates.pure_dephasing_mhz,
            )?,
            photon_number: self.operating_point.photon_number,
            correction_order: self.mode.correction_order.at(ghz(eps)),
            mode: self.mode.photon_mode,
            probe_strength,
        })
    }

    pub fn device_geometry(&self) -> Result<DeviceGeometry> {
        let resonator = self.resonator_params()?;
        let nominal = DeviceGeometry::nominal(&resonator);
        let g = &self.geometry;
        Ok(DeviceGeometry {
            coupling_capacitance_ff: g.coupling_capacitance_ff,
            resonator_capacitance_pf: g.resonator_capacitance_pf,
            line_impedance_ohm: g.line_impedance_ohm,
            drive_mode_decay_mhz: g
                .drive_mode_decay_mhz
                .unwrap_or(nominal.drive_mode_decay_mhz),
            drive_coupling_mhz: g.drive_coupling_mhz.unwrap_or(nominal.drive_coupling_mhz),
            calibration: g.calibration,
        })
    }

    /// Correction order at the configured bias.
    pub fn correction_order(&self) -> CorrectionOrder {
        self.mode
            .correction_order
            .at(ghz(self.operating_point.energy_bias_ghz))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_nominal_defaults() {
        let c = RunConfig::from_json_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        let op = c.operating_point().unwrap();
        assert!((to_ghz(op.qubit.gap()) - 2.97).abs() < 1e-12);
        assert!((to_ghz(op.tones.drive.frequency) - 7.77).abs() < 1e-12);
        assert_eq!(op.photon_number, 5.0);
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let err = RunConfig::from_json_str("{\n  \"qubit\": {\"gap\": 3.0}\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("qubit"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("gap"), "{msg}");
    }

    #[test]
    fn wrong_type_names_field() {
        let err =
            RunConfig::from_json_str(r#"{"resonator": {"quality_factor": "high"}}"#).unwrap_err();
        assert!(
            err.to_string().contains("resonator.quality_factor"),
            "{err}"
        );
    }

    #[test]
    fn resolve_is_idempotent() {
        let r = RunConfig::default().resolve().unwrap();
        assert!(r
            .defaulted
            .contains(&"geometry.drive_mode_decay_mhz".to_string()));
        let again = r.config.clone().resolve().unwrap();
        assert_eq!(again.config, r.config);
        assert!(again.defaulted.is_empty());
        let text = r.config.to_json_string();
        assert_eq!(RunConfig::from_json_str(&text).unwrap(), r.config);
    }

    #[test]
    fn calibration_reference_applied() {
        let mut c = RunConfig::default();
        c.geometry.calibration_reference = Some(CalibrationReference {
            power_dbm: 0.0,
            drive_amplitude_ghz: 2.0,
        });
        let r = c.resolve().unwrap();
        let g = r.config.device_geometry().unwrap();
        let w = crate::sweep::drive_from_power(0.0, ghz(7.77), &g).unwrap();
        assert!((to_ghz(w) - 2.0).abs() < 1e-9);
        assert_eq!(r.config.clone().resolve().unwrap().config, r.config);
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = RunConfig::default();
        c.sweep.bias_ghz.points = 1;
        assert!(c.resolve().is_err());
        let mut c = RunConfig::default();
        c.qubit.gap_ghz = -1.0;
        assert!(c.resolve().is_err());
        let mut c = RunConfig::default();
        c.operating_point.photon_number = f64::NAN;
        assert!(c.resolve().is_err());
    }

    #[test]
    fn explicit_probe_amplitude() {
        let c = RunConfig::from_json_str(r#"{"tones": {"probe_amplitude_ghz": 1e-5}}"#).unwrap();
        let op = c.operating_point().unwrap();
        assert_eq!(op.probe_strength, ProbeStrength::Explicit);
        assert!((op.probe_amplitude() - ghz(1e-5)).abs() < 1e-15);
    }
}
