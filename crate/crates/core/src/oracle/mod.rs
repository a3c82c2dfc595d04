//! Brute-force reference solvers: the Lindblad master equation of the full
//! qubit ⊗ truncated-cavity Hamiltonian with all tones, and the Floquet
//! quasi-energies of the driven two-level system.

pub mod compare;
pub mod evolve;
pub mod floquet;
pub mod generator;
pub mod integrator;
pub mod transmission;

pub use compare::{Check, Comparison, ComparisonRow};
pub use evolve::{evolve_to_steady, floquet_exponents, EvolutionResult, EvolveConfig, Strategy};
pub use floquet::{floquet_quasienergies, FloquetProblem, FloquetResult};
pub use generator::{build_generator, Generator};
pub use integrator::{Dop853, IntegratorConfig};
pub use transmission::transmission_oracle;

use crate::error::{Error, Result};
use crate::params::{DissipationRates, ToneSet};
use crate::steady_state::OperatingPoint;

/// Largest admissible steady occupation of the top Fock level.
pub const TRUNCATION_LIMIT: f64 = 1e-4;

/// Qubit ⊗ cavity model with explicit tone amplitudes (Ω_p included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSystem {
    pub fock_dim: usize,
    /// Δ, rad/ns.
    pub gap: f64,
    /// ε, rad/ns.
    pub energy_bias: f64,
    pub cavity_frequency: f64,
    pub coupling: f64,
    pub kappa: f64,
    pub rates: DissipationRates,
    pub tones: ToneSet,
}

impl TruncatedSystem {
    /// Same physical point as `op`, with Ω_p resolved from its probe policy.
    pub fn from_operating_point(op: &OperatingPoint, fock_dim: usize) -> Self {
        let mut tones = op.tones;
        tones.probe.amplitude = op.probe_amplitude();
        Self {
            fock_dim,
            gap: op.qubit.gap(),
            energy_bias: op.energy_bias(),
            cavity_frequency: op.resonator.fundamental(),
            coupling: op.resonator.coupling(),
            kappa: op.resonator.kappa(),
            rates: op.rates,
            tones,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fock_dim < 2 {
            return Err(Error::invalid(
                "fock_dim",
                format!("must be at least 2, got {}", self.fock_dim),
            ));
        }
        for (name, v) in [
            ("gap", self.gap),
            ("cavity_frequency", self.cavity_frequency),
            ("coupling", self.coupling),
            ("kappa", self.kappa),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and non-negative, got {v}"),
                ));
            }
        }
        if !self.energy_bias.is_finite() {
            return Err(Error::invalid("energy_bias", "must be finite"));
        }
        if self.qubit_splitting() == 0.0 {
            return Err(Error::invalid("gap", "qubit splitting vanishes"));
        }
        Ok(())
    }

    /// ω_q = √(Δ² + ε²)
    pub fn qubit_splitting(&self) -> f64 {
        self.gap.hypot(self.energy_bias)
    }

    /// (Δ/ω_q, ε/ω_q)
    pub fn projections(&self) -> (f64, f64) {
        let wq = self.qubit_splitting();
        (self.gap / wq, self.energy_bias / wq)
    }

    /// Resonant photon number N = (2Ω_p/κ)² of the bare cavity.
    pub fn bare_photon_number(&self) -> f64 {
        if self.kappa == 0.0 {
            return f64::INFINITY;
        }
        (2.0 * self.tones.probe.amplitude / self.kappa).powi(2)
    }
}

/// Smallest truncation whose coherent-state tail beyond the top level stays
/// below a tenth of [`TRUNCATION_LIMIT`].
pub fn auto_fock_dim(photon_number: f64) -> usize {
    let target = 0.1 * TRUNCATION_LIMIT;
    let n = photon_number.max(0.0);
    let mut p = (-n).exp();
    let mut cdf = 0.0;
    let mut k = 0usize;
    // the top level k = F − 1 must carry less than `target` of the tail
    loop {
        if 1.0 - cdf < target && k >= 1 {
            return (k + 1).max(2);
        }
        cdf += p;
        k += 1;
        p *= n / k as f64;
        if k > 10_000 {
            return k;
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::params::{Tone, ToneRole};
    use crate::units::{ghz, mhz};

    pub(crate) fn nominal_system(fock_dim: usize) -> TruncatedSystem {
        let wr = ghz(2.59);
        TruncatedSystem {
            fock_dim,
            gap: ghz(2.97),
            energy_bias: ghz(0.5),
            cavity_frequency: wr,
            coupling: mhz(3.0),
            kappa: wr / 1.2e5,
            rates: DissipationRates::from_mhz(10.0, 20.0).unwrap(),
            tones: ToneSet {
                probe: Tone::new(ToneRole::Probe, 1e-4, wr).unwrap(),
                drive: Tone::new(ToneRole::Drive, ghz(0.3), 3.0 * wr).unwrap(),
                spectroscopy: Tone::new(ToneRole::Spectroscopy, mhz(1.0), ghz(3.5)).unwrap(),
            },
        }
    }

    #[test]
    fn fock_dim_from_tail() {
        assert_eq!(auto_fock_dim(0.0), 2);
        let f = auto_fock_dim(1.0);
        assert!((8..=11).contains(&f), "{f}");
        let f5 = auto_fock_dim(5.0);
        assert!(f5 > 12, "{f5}");
    }

    #[test]
    fn photon_number_round_trip() {
        let mut s = nominal_system(4);
        s.tones.probe.amplitude = 0.5 * s.kappa * 3f64.sqrt();
        assert!((s.bare_photon_number() - 3.0).abs() < 1e-12);
    }
}
