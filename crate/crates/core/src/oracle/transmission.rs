use num_complex::Complex64;
use rayon::prelude::*;

use super::evolve::{evolve_to_steady, EvolveConfig};
use super::{TruncatedSystem, TRUNCATION_LIMIT};
use crate::error::{Error, Result};

/// Transmission t = −iκ⟨a⟩_{ω_p}/(2Ω_p) for each probe frequency, which
/// equals −1 for the bare cavity on resonance, like the analytic model.
pub fn transmission_oracle(
    sys: &TruncatedSystem,
    probe_scan: &[f64],
    cfg: &EvolveConfig,
) -> Result<Vec<(f64, Complex64)>> {
    if sys.tones.probe.amplitude <= 0.0 {
        return Err(Error::invalid(
            "probe amplitude",
            "must be positive for a transmission scan",
        ));
    }
    probe_scan
        .par_iter()
        .map(|&wp| {
            let mut s = *sys;
            s.tones.probe.frequency = wp;
            let r = evolve_to_steady(&s, cfg)?;
            if r.top_fock_occupation > TRUNCATION_LIMIT {
                return Err(Error::Truncation {
                    occupation: r.top_fock_occupation,
                    limit: TRUNCATION_LIMIT,
                });
            }
            let a = r.get("a@+wp")?;
            Ok((
                wp,
                Complex64::new(0.0, -0.5 * s.kappa / s.tones.probe.amplitude) * a,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::tests::nominal_system;

    #[test]
    fn bare_lorentzian() {
        let mut sys = nominal_system(10);
        sys.coupling = 0.0;
        sys.tones.drive.amplitude = 0.0;
        sys.tones.spectroscopy.amplitude = 0.0;
        sys.kappa = 0.02;
        sys.tones.probe.amplitude = 0.25 * sys.kappa;
        let wr = sys.cavity_frequency;
        let scan = [wr, wr + 0.5 * sys.kappa];
        let t = transmission_oracle(&sys, &scan, &EvolveConfig::default()).unwrap();
        assert!((t[0].1.norm() - 1.0).abs() < 1e-6);
        let expected = Complex64::new(0.0, 0.5 * sys.kappa)
            / Complex64::new(-0.5 * sys.kappa, -0.5 * sys.kappa);
        assert!((t[1].1 - expected).norm() < 1e-6);
    }

    #[test]
    fn truncation_detected() {
        let mut sys = nominal_system(3);
        sys.coupling = 0.0;
        sys.tones.drive.amplitude = 0.0;
        sys.tones.spectroscopy.amplitude = 0.0;
        sys.kappa = 0.02;
        sys.tones.probe.amplitude = sys.kappa;
        let r = transmission_oracle(&sys, &[sys.cavity_frequency], &EvolveConfig::default());
        assert!(matches!(r, Err(Error::Truncation { .. })));
    }
}
