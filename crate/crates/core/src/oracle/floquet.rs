//! Quasi-energies of H = (ω_q/2)σ_z + Ω̄ cos(ω_d t) σ_x from the extended
//! Floquet matrix, tracked continuously from Ω̄ = 0.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::units;

/// Quasi-energy change allowed when the cutoff grows by 2, rad/ns.
pub const CONVERGENCE_TOL: f64 = 1e-6 * std::f64::consts::TAU;
/// Minimal squared overlap between consecutive homotopy steps.
pub const MIN_TRACKING_OVERLAP: f64 = 0.75;
const HOMOTOPY_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetProblem {
    pub wq: f64,
    pub wd: f64,
    pub bar_drive: f64,
    /// Number of photon blocks on each side of the central one.
    pub harmonic_cutoff: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetResult {
    /// Quasi-energy splitting on the branch connected to ω_q, rad/ns.
    pub splitting: f64,
    /// |splitting(K + 2) − splitting(K)|, rad/ns.
    pub convergence: f64,
}

impl FloquetProblem {
    /// Smallest cutoff ≥ 3 meeting [`CONVERGENCE_TOL`].
    pub fn converged(wq: f64, wd: f64, bar_drive: f64) -> Result<(Self, FloquetResult)> {
        let mut p = Self {
            wq,
            wd,
            bar_drive,
            harmonic_cutoff: 3,
        };
        loop {
            let r = floquet_quasienergies(&p)?;
            if r.convergence < CONVERGENCE_TOL {
                return Ok((p, r));
            }
            if p.harmonic_cutoff > 200 {
                return Err(Error::NonConvergence {
                    what: "Floquet cutoff",
                    iterations: p.harmonic_cutoff,
                    residual: units::to_ghz(r.convergence),
                });
            }
            p.harmonic_cutoff += 2;
        }
    }
}

fn extended_matrix(wq: f64, wd: f64, bar: f64, k: usize) -> DMatrix<f64> {
    let blocks = 2 * k + 1;
    let n = 2 * blocks;
    let mut m = DMatrix::zeros(n, n);
    // index 2b + s, s = 0 ground, s = 1 excited, photon index b − k
    for b in 0..blocks {
        let shift = (b as f64 - k as f64) * wd;
        m[(2 * b, 2 * b)] = -0.5 * wq + shift;
        m[(2 * b + 1, 2 * b + 1)] = 0.5 * wq + shift;
        if b + 1 < blocks {
            for (s, t) in [(0, 1), (1, 0)] {
                m[(2 * b + s, 2 * (b + 1) + t)] = 0.5 * bar;
                m[(2 * (b + 1) + t, 2 * b + s)] = 0.5 * bar;
            }
        }
    }
    m
}

fn tracked_splitting(wq: f64, wd: f64, bar: f64, k: usize) -> Result<f64> {
    let n = 2 * (2 * k + 1);
    let centre = 2 * k;
    let mut tracked: [DVector<f64>; 2] = std::array::from_fn(|s| {
        let mut v = DVector::zeros(n);
        v[centre + s] = 1.0;
        v
    });
    let mut energies = [-0.5 * wq, 0.5 * wq];
    if bar == 0.0 {
        return Ok(wq);
    }
    for step in 1..=HOMOTOPY_STEPS {
        let b = bar * step as f64 / HOMOTOPY_STEPS as f64;
        let eig = SymmetricEigen::new(extended_matrix(wq, wd, b, k));
        for s in 0..2 {
            let (mut best, mut best_ov) = (0usize, -1.0);
            for c in 0..n {
                let ov = eig.eigenvectors.column(c).dot(&tracked[s]).powi(2);
                if ov > best_ov {
                    best_ov = ov;
                    best = c;
                }
            }
            if best_ov < MIN_TRACKING_OVERLAP {
                return Err(Error::ZoneFolding(format!(
                    "overlap {best_ov:.3} at Ω̄/2π = {:.4} GHz (cutoff {k})",
                    units::to_ghz(b)
                )));
            }
            tracked[s] = eig.eigenvectors.column(best).into_owned();
            energies[s] = eig.eigenvalues[best];
        }
    }
    Ok(energies[1] - energies[0])
}

/// Splitting at cutoff K + 2 and its change from cutoff K.
pub fn floquet_quasienergies(p: &FloquetProblem) -> Result<FloquetResult> {
    if p.harmonic_cutoff < 3 {
        return Err(Error::invalid(
            "harmonic_cutoff",
            format!("must be at least 3, got {}", p.harmonic_cutoff),
        ));
    }
    for (name, v) in [("wq", p.wq), ("wd", p.wd)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, format!("must be positive, got {v}")));
        }
    }
    if !p.bar_drive.is_finite() {
        return Err(Error::invalid("bar_drive", "must be finite"));
    }
    let bar = p.bar_drive.abs();
    let low = tracked_splitting(p.wq, p.wd, bar, p.harmonic_cutoff)?;
    let high = tracked_splitting(p.wq, p.wd, bar, p.harmonic_cutoff + 2)?;
    Ok(FloquetResult {
        splitting: high,
        convergence: (high - low).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive_shift::ac_shift_approx;
    use crate::units::{ghz, to_ghz};

    #[test]
    fn undriven_is_exact() {
        let p = FloquetProblem {
            wq: ghz(2.97),
            wd: ghz(7.77),
            bar_drive: 0.0,
            harmonic_cutoff: 3,
        };
        let r = floquet_quasienergies(&p).unwrap();
        assert_eq!(r.splitting, ghz(2.97));
        assert_eq!(r.convergence, 0.0);
    }

    #[test]
    fn even_in_drive() {
        let p = FloquetProblem {
            wq: ghz(2.97),
            wd: ghz(7.77),
            bar_drive: ghz(1.0),
            harmonic_cutoff: 5,
        };
        let m = FloquetProblem {
            bar_drive: -ghz(1.0),
            ..p
        };
        assert_eq!(
            floquet_quasienergies(&p).unwrap(),
            floquet_quasienergies(&m).unwrap()
        );
    }

    #[test]
    fn nominal_point_shift() {
        let (wq, wd, bar) = (ghz(2.97), ghz(7.77), ghz(1.0));
        let (_, r) = FloquetProblem::converged(wq, wd, bar).unwrap();
        let shift = r.splitting - wq;
        let approx = ac_shift_approx(bar, wq, wd).unwrap();
        assert!((to_ghz(shift) + 0.0576).abs() < 2e-3, "{}", to_ghz(shift));
        assert!(((shift - approx) / approx).abs() < (bar / (wq - wd)).powi(2));
    }

    #[test]
    fn small_cutoff_rejected() {
        let p = FloquetProblem {
            wq: 1.0,
            wd: 2.0,
            bar_drive: 0.1,
            harmonic_cutoff: 2,
        };
        assert!(floquet_quasienergies(&p).is_err());
    }

    #[test]
    fn resonant_drive_is_ambiguous() {
        // ω_d = ω_q: the bare levels are degenerate across blocks
        let p = FloquetProblem {
            wq: ghz(3.0),
            wd: ghz(3.0),
            bar_drive: ghz(0.5),
            harmonic_cutoff: 4,
        };
        assert!(matches!(
            floquet_quasienergies(&p),
            Err(Error::ZoneFolding(_))
        ));
    }
}
