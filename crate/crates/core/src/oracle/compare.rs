//! Side-by-side analytic vs. brute-force tables.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve_to_steady, floquet_exponents, EvolveConfig};
use super::floquet::FloquetProblem;
use super::transmission::transmission_oracle;
use super::{auto_fock_dim, TruncatedSystem};
use crate::drive_shift::{
    ac_shift_approx, modified_rates, offres_population, sideband_amplitudes, Detunings,
};
use crate::error::{Error, Result};
use crate::params::FluxBias;
use crate::steady_state::{solve, OperatingPoint};
use crate::units::{ghz, to_ghz, to_mhz};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Off-resonant ⟨σ_z⟩ under the drive alone, absolute deviation.
    Population,
    /// ω_ac against the Floquet splitting, relative deviation.
    Shift,
    /// Full-model t(ω_p) against the master equation, relative deviation.
    Transmission,
    /// ⟨σ_+⟩ drive sidebands, relative deviation.
    Sidebands,
    /// Γ̂_r + Γ̂_e and Γ̂_φ against Liouvillian Floquet exponents, relative deviation.
    Rates,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Population => "population",
            Check::Shift => "shift",
            Check::Transmission => "transmission",
            Check::Sidebands => "sidebands",
            Check::Rates => "rates",
        }
    }

    /// Name and unit of the scanned variable.
    pub fn abscissa(self) -> (&'static str, &'static str) {
        match self {
            Check::Population | Check::Sidebands => ("energy_bias", "GHz"),
            Check::Shift | Check::Rates => ("drive_amplitude", "GHz"),
            Check::Transmission => ("probe_frequency", "GHz"),
        }
    }

    pub fn deviation_kind(self) -> &'static str {
        match self {
            Check::Population => "absolute",
            _ => "relative",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub component: String,
    pub analytic: Complex64,
    pub oracle: Complex64,
    pub deviation: f64,
    /// Expected size of the deviation, where one is known.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub check: Check,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.deviation).fold(0.0, f64::max)
    }
}

fn relative(a: Complex64, o: Complex64) -> f64 {
    (a - o).norm() / o.norm()
}

/// Qubit alone: no coupling, no probe, no spectroscopy tone, two Fock levels.
fn bare_qubit(op: &OperatingPoint, eps_ghz: f64) -> TruncatedSystem {
    let mut p = *op;
    p.bias = FluxBias::from_energy_ghz(eps_ghz);
    let mut sys = TruncatedSystem::from_operating_point(&p, 2);
    sys.coupling = 0.0;
    sys.tones.probe.amplitude = 0.0;
    sys.tones.spectroscopy.amplitude = 0.0;
    sys
}

fn bar_drive(sys: &TruncatedSystem) -> f64 {
    sys.projections().0 * sys.tones.drive.amplitude
}

pub fn population_check(
    op: &OperatingPoint,
    biases_ghz: &[f64],
    cfg: &EvolveConfig,
) -> Result<Comparison> {
    let rows = biases_ghz
        .par_iter()
        .map(|&e| {
            let sys = bare_qubit(op, e);
            let (wq, wd) = (sys.qubit_splitting(), sys.tones.drive.frequency);
            let bar = bar_drive(&sys);
            let analytic = offres_population(bar, wq, wd, &sys.rates);
            let oracle = evolve_to_steady(&sys, cfg)?.get("sigma_z")?.re;
            Ok(ComparisonRow {
                x: e,
                component: "sigma_z".into(),
                analytic: analytic.into(),
                oracle: oracle.into(),
                deviation: (analytic - oracle).abs(),
                bound: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        check: Check::Population,
        rows,
    })
}

pub fn sideband_check(
    op: &OperatingPoint,
    biases_ghz: &[f64],
    cfg: &EvolveConfig,
) -> Result<Comparison> {
    let per_bias = biases_ghz
        .par_iter()
        .map(|&e| {
            let sys = bare_qubit(op, e);
            let (wq, wd) = (sys.qubit_splitting(), sys.tones.drive.frequency);
            let r = evolve_to_steady(&sys, cfg)?;
            let sz = r.get("sigma_z")?.re;
            let s = sideband_amplitudes(bar_drive(&sys), wq, wd, sys.rates.decoherence(), sz)?;
            let mut rows = Vec::with_capacity(2);
            for (component, key, analytic) in [
                ("s_plus", "sigma_plus@+wd", s.s_plus),
                ("s_minus", "sigma_plus@-wd", s.s_minus),
            ] {
                let oracle = r.get(key)?;
                rows.push(ComparisonRow {
                    x: e,
                    component: component.into(),
                    analytic,
                    oracle,
                    deviation: relative(analytic, oracle),
                    bound: None,
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        check: Check::Sidebands,
        rows: per_bias.into_iter().flatten().collect(),
    })
}

/// Relative ω_ac error per drive amplitude (GHz); the bound is (Ω̄_d/δ_−)².
pub fn shift_check(op: &OperatingPoint, amplitudes_ghz: &[f64]) -> Result<Comparison> {
    let eps = op.energy_bias();
    let wq = op.qubit.gap().hypot(eps);
    let wd = op.tones.drive.frequency;
    let rows = amplitudes_ghz
        .par_iter()
        .map(|&amp| {
            let bar = op.qubit.gap() / wq * ghz(amp);
            let analytic = ac_shift_approx(bar, wq, wd)?;
            let (_, f) = FloquetProblem::converged(wq, wd, bar)?;
            let oracle = f.splitting - wq;
            if oracle == 0.0 {
                return Err(Error::invalid(
                    "drive amplitude",
                    "shift check needs a nonzero drive",
                ));
            }
            Ok(ComparisonRow {
                x: amp,
                component: "omega_ac_ghz".into(),
                analytic: to_ghz(analytic).into(),
                oracle: to_ghz(oracle).into(),
                deviation: ((analytic - oracle) / oracle).abs(),
                bound: Some(Detunings::new(wq, wd).perturbation_ratio(bar).powi(2)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        check: Check::Shift,
        rows,
    })
}

/// Cavity damping used to push cavity-like exponents away from the qubit ones.
const RATE_CHECK_KAPPA: f64 = 5.0;

/// Population decay and decoherence of the driven qubit, in MHz, per drive amplitude (GHz).
pub fn rate_check(
    op: &OperatingPoint,
    amplitudes_ghz: &[f64],
    cfg: &EvolveConfig,
) -> Result<Comparison> {
    let per_amp = amplitudes_ghz
        .par_iter()
        .map(|&amp| {
            let mut p = *op;
            p.tones.drive.amplitude = ghz(amp);
            let mut sys = bare_qubit(&p, to_ghz(op.energy_bias()));
            sys.kappa = RATE_CHECK_KAPPA;
            let (wq, wd) = (sys.qubit_splitting(), sys.tones.drive.frequency);
            let c = Detunings::new(wq, wd).mixing(bar_drive(&sys));
            let m = modified_rates(&sys.rates, c)?;
            let mu = floquet_exponents(&sys, cfg)?;
            let qubit: Vec<Complex64> = mu
                .into_iter()
                .filter(|m| m.norm() > 1e-9 && -m.re < 0.25 * RATE_CHECK_KAPPA)
                .collect();
            let population = qubit
                .iter()
                .find(|m| m.im.abs() < 1e-6)
                .ok_or_else(|| Error::invalid("rates", "no real qubit exponent"))?;
            let coherence = qubit
                .iter()
                .find(|m| m.im.abs() >= 1e-6)
                .ok_or_else(|| Error::invalid("rates", "no oscillating qubit exponent"))?;
            let mut rows = Vec::with_capacity(2);
            for (component, analytic, exponent) in [
                ("population_decay_mhz", m.population_decay(), population),
                ("decoherence_mhz", m.decoherence_hat(), coherence),
            ] {
                let oracle = -exponent.re;
                rows.push(ComparisonRow {
                    x: amp,
                    component: component.into(),
                    analytic: to_mhz(analytic).into(),
                    oracle: to_mhz(oracle).into(),
                    deviation: ((analytic - oracle) / oracle).abs(),
                    bound: Some(c * c),
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        check: Check::Rates,
        rows: per_amp.into_iter().flatten().collect(),
    })
}

/// t(ω_p) of the full model against the master equation; `fock_dim` defaults
/// to [`auto_fock_dim`] of the operating point's photon number. The spectroscopy
/// tone is switched off for the scan.
pub fn transmission_check(
    op: &OperatingPoint,
    probe_ghz: &[f64],
    fock_dim: Option<usize>,
    cfg: &EvolveConfig,
) -> Result<Comparison> {
    let mut op = *op;
    op.tones.spectroscopy.amplitude = 0.0;
    let op = &op;
    let f = fock_dim.unwrap_or_else(|| auto_fock_dim(op.photon_number));
    let sys = TruncatedSystem::from_operating_point(op, f);
    let scan: Vec<f64> = probe_ghz.iter().map(|&w| ghz(w)).collect();
    let oracle = transmission_oracle(&sys, &scan, cfg)?;
    let rows = probe_ghz
        .iter()
        .zip(oracle)
        .map(|(&w, (_, o))| {
            let mut p = *op;
            p.tones.probe.frequency = ghz(w);
            let a = solve(&p)?.transmission;
            Ok(ComparisonRow {
                x: w,
                component: "t".into(),
                analytic: a,
                oracle: o,
                deviation: relative(a, o),
                bound: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        check: Check::Transmission,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::tests::nominal_template;

    fn nominal_point() -> OperatingPoint {
        nominal_template(0.0)
    }

    #[test]
    fn population_small_drive() {
        let mut op = nominal_point();
        op.tones.drive.amplitude = ghz(0.5);
        let c = population_check(&op, &[0.0, 2.0], &EvolveConfig::default()).unwrap();
        assert!(c.max_deviation() < 1e-3, "{c:?}");
    }

    #[test]
    fn sidebands_small_drive() {
        let mut op = nominal_point();
        op.tones.drive.amplitude = ghz(0.5);
        let c = sideband_check(&op, &[1.0], &EvolveConfig::default()).unwrap();
        assert!(c.max_deviation() < 0.02, "{c:?}");
    }

    #[test]
    fn shift_within_bound() {
        let c = shift_check(&nominal_point(), &[0.5, 1.0]).unwrap();
        for r in &c.rows {
            assert!(r.deviation <= r.bound.unwrap(), "{r:?}");
        }
    }

    #[test]
    fn rates_at_half_ghz() {
        let c = rate_check(&nominal_point(), &[0.5], &EvolveConfig::default()).unwrap();
        assert!(c.max_deviation() < 1e-2, "{c:?}");
    }
}
