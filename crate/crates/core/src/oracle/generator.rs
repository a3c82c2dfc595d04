//! Vectorized Lindblad generator L(t) = S₀ + Σ_k e^{iν_k t} S_k.
//!
//! The cavity is taken in the frame rotating at the probe frequency, the
//! qubit stays in the lab frame. Density matrices are column-stacked:
//! ρ_{ij} ↦ x[i + D·j], with Hilbert index i = q·F + n (q = 0 ground).

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::TruncatedSystem;
use crate::error::{Error, Result};

type Op = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Compressed sparse row matrix with in-place accumulate.
#[derive(Debug, Clone)]
pub struct Csr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl Csr {
    fn from_triplets(n: usize, mut trips: Vec<(usize, usize, Complex64)>) -> Self {
        trips.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(trips.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trips {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        let mut out = Self {
            n,
            indptr,
            indices,
            values,
        };
        out.prune();
        out
    }

    fn prune(&mut self) {
        let mut indptr = vec![0usize; self.n + 1];
        let (mut indices, mut values) = (Vec::new(), Vec::new());
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != Complex64::default() {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// y ← y + s·A x
    pub fn mul_add(&self, s: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = Complex64::default();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yr += s * acc;
        }
    }

    pub fn to_dense(&self) -> Op {
        let mut m = Op::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[k])] += self.values[k];
            }
        }
        m
    }
}

/// Hilbert-space operators of the truncated qubit ⊗ cavity system.
pub struct Operators {
    pub sigma_z: Op,
    pub sigma_x: Op,
    pub sigma_minus: Op,
    pub sigma_plus: Op,
    pub a: Op,
    pub number: Op,
    pub fock_dim: usize,
}

impl Operators {
    pub fn new(fock_dim: usize) -> Self {
        let f = fock_dim;
        let d = 2 * f;
        let mut sigma_z = Op::zeros(d, d);
        let mut sigma_minus = Op::zeros(d, d);
        let mut a = Op::zeros(d, d);
        for n in 0..f {
            sigma_z[(n, n)] = Complex64::from(-1.0);
            sigma_z[(f + n, f + n)] = Complex64::from(1.0);
            sigma_minus[(n, f + n)] = Complex64::from(1.0);
            if n > 0 {
                let s = Complex64::from((n as f64).sqrt());
                a[(n - 1, n)] = s;
                a[(f + n - 1, f + n)] = s;
            }
        }
        let sigma_plus = sigma_minus.adjoint();
        let sigma_x = &sigma_minus + &sigma_plus;
        let number = a.adjoint() * &a;
        Self {
            sigma_z,
            sigma_x,
            sigma_minus,
            sigma_plus,
            a,
            number,
            fock_dim,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim
    }
}

fn nonzeros(m: &Op) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != Complex64::default() {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// Accumulates superoperator triplets for sandwich products A ρ B.
struct SuperBuilder {
    d: usize,
    trips: Vec<(usize, usize, Complex64)>,
}

impl SuperBuilder {
    fn new(d: usize) -> Self {
        Self {
            d,
            trips: Vec::new(),
        }
    }

    /// += s · A ρ B, with None standing for the identity.
    fn sandwich(&mut self, s: Complex64, a: Option<&Op>, b: Option<&Op>) {
        let d = self.d;
        let ident: Vec<(usize, usize, Complex64)> =
            (0..d).map(|i| (i, i, Complex64::from(1.0))).collect();
        let an = a.map(nonzeros).unwrap_or_else(|| ident.clone());
        let bn = b.map(nonzeros).unwrap_or(ident);
        // vec(AρB)[i + D j] = Σ A[i,k] ρ[k,l] B[l,j]
        for &(i, k, av) in &an {
            for &(l, j, bv) in &bn {
                self.trips.push((i + d * j, k + d * l, s * av * bv));
            }
        }
    }

    /// += −i[H, ρ]
    fn commutator(&mut self, h: &Op) {
        self.sandwich(-I, Some(h), None);
        self.sandwich(I, None, Some(h));
    }

    /// += rate · D[L]ρ
    fn dissipator(&mut self, rate: f64, l: &Op) {
        if rate == 0.0 {
            return;
        }
        let ldl = l.adjoint() * l;
        let ld = l.adjoint();
        let r = Complex64::from(rate);
        self.sandwich(r, Some(l), Some(&ld));
        self.sandwich(-0.5 * r, Some(&ldl), None);
        self.sandwich(-0.5 * r, None, Some(&ldl));
    }

    fn finish(self) -> Csr {
        Csr::from_triplets(self.d * self.d, self.trips)
    }
}

pub struct Generator {
    dim: usize,
    static_part: Csr,
    terms: Vec<(f64, Csr)>,
}

impl Generator {
    /// Hilbert-space dimension D; vectors have length D².
    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.terms.iter().map(|(nu, _)| *nu).collect()
    }

    pub fn nnz(&self) -> usize {
        self.static_part.nnz() + self.terms.iter().map(|(_, s)| s.nnz()).sum::<usize>()
    }

    /// y ← L(t) x
    pub fn apply(&self, t: f64, x: &[Complex64], y: &mut [Complex64]) {
        y.fill(Complex64::default());
        self.static_part.mul_add(Complex64::from(1.0), x, y);
        for (nu, s) in &self.terms {
            s.mul_add(Complex64::from_polar(1.0, nu * t), x, y);
        }
    }

    /// Dense ρ̇ for a dense ρ, mainly for inspection.
    pub fn rhs(&self, t: f64, rho: &Op) -> Result<Op> {
        let d = self.dim;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: rho.nrows(),
            });
        }
        let x: Vec<Complex64> = rho.iter().copied().collect();
        let mut y = vec![Complex64::default(); d * d];
        self.apply(t, &x, &mut y);
        Ok(Op::from_column_slice(d, d, &y))
    }

    pub fn static_dense(&self) -> Op {
        self.static_part.to_dense()
    }
}

/// Assemble the generator of ρ̇ = −i[H(t), ρ] + Γ_r D[σ_−] + (γ_φ/2) D[σ_z] + κ D[a].
pub fn build_generator(sys: &TruncatedSystem) -> Result<Generator> {
    sys.validate()?;
    let ops = Operators::new(sys.fock_dim);
    let d = ops.dim();
    let wq = sys.qubit_splitting();
    let (bar, check) = sys.projections();
    // coupling operator (ε/ω_q) σ_z + (Δ/ω_q) σ_x
    let q_op = &ops.sigma_z * Complex64::from(check) + &ops.sigma_x * Complex64::from(bar);
    let adag = ops.a.adjoint();

    let probe = &sys.tones.probe;
    let h0 = &ops.number * Complex64::from(sys.cavity_frequency - probe.frequency)
        + &ops.sigma_z * Complex64::from(0.5 * wq)
        + (&ops.a + &adag) * Complex64::from(probe.amplitude);
    let mut s0 = SuperBuilder::new(d);
    s0.commutator(&h0);
    s0.dissipator(sys.rates.relaxation, &ops.sigma_minus);
    s0.dissipator(0.5 * sys.rates.pure_dephasing, &ops.sigma_z);
    s0.dissipator(sys.kappa, &ops.a);

    let mut timed: Vec<(f64, Op)> = Vec::new();
    let mut push = |nu: f64, h: Op| {
        if let Some((_, acc)) = timed.iter_mut().find(|(m, _)| *m == nu) {
            *acc += h;
        } else {
            timed.push((nu, h));
        }
    };
    for tone in [&sys.tones.drive, &sys.tones.spectroscopy] {
        if tone.is_active() {
            let h = &q_op * Complex64::from(0.5 * tone.amplitude);
            push(tone.frequency, h.clone());
            push(-tone.frequency, h);
        }
    }
    if sys.coupling != 0.0 {
        let g = Complex64::from(sys.coupling);
        push(-probe.frequency, &q_op * &ops.a * g);
        push(probe.frequency, &q_op * &adag * g);
    }
    let terms = timed
        .into_iter()
        .map(|(nu, h)| {
            let mut b = SuperBuilder::new(d);
            b.commutator(&h);
            (nu, b.finish())
        })
        .collect();
    Ok(Generator {
        dim: d,
        static_part: s0.finish(),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::tests::nominal_system;

    fn basis_state(d: usize, i: usize) -> Op {
        let mut m = Op::zeros(d, d);
        m[(i, i)] = Complex64::from(1.0);
        m
    }

    fn expect(op: &Op, rho: &Op) -> Complex64 {
        (op * rho).trace()
    }

    #[test]
    fn ground_state_stationary_without_tones() {
        let mut sys = nominal_system(4);
        sys.tones.probe.amplitude = 0.0;
        sys.tones.drive.amplitude = 0.0;
        sys.tones.spectroscopy.amplitude = 0.0;
        let gen = build_generator(&sys).unwrap();
        let d = gen.hilbert_dim();
        let rhs = gen.rhs(0.37, &basis_state(d, 0)).unwrap();
        // the counter-rotating coupling still links |g,0⟩ to |e,1⟩
        sys.coupling = 0.0;
        let gen0 = build_generator(&sys).unwrap();
        assert!(gen0.rhs(0.37, &basis_state(d, 0)).unwrap().norm() < 1e-15);
        assert!(rhs.norm() > 0.0);
    }

    #[test]
    fn excited_state_relaxes_at_twice_gamma_r() {
        let sys = nominal_system(3);
        let gen = build_generator(&sys).unwrap();
        let ops = Operators::new(3);
        let rho = basis_state(gen.hilbert_dim(), 3);
        let dz = expect(&ops.sigma_z, &gen.rhs(0.0, &rho).unwrap());
        assert!((dz.re + 2.0 * sys.rates.relaxation).abs() < 1e-12);
    }

    #[test]
    fn single_photon_decays_at_kappa() {
        let mut sys = nominal_system(3);
        sys.coupling = 0.0;
        sys.tones.probe.amplitude = 0.0;
        let gen = build_generator(&sys).unwrap();
        let ops = Operators::new(3);
        let rho = basis_state(gen.hilbert_dim(), 1);
        let dn = expect(&ops.number, &gen.rhs(1.0, &rho).unwrap());
        assert!((dn.re + sys.kappa).abs() < 1e-15);
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let sys = nominal_system(4);
        let gen = build_generator(&sys).unwrap();
        let d = gen.hilbert_dim();
        let mut rho = Op::from_fn(d, d, |i, j| {
            Complex64::new((i + 2 * j) as f64, (i as f64) - (j as f64))
        });
        rho = &rho + rho.adjoint();
        for t in [0.0, 0.1, 1.3] {
            let dr = gen.rhs(t, &rho).unwrap();
            assert!(dr.trace().norm() < 1e-9 * dr.norm());
            assert!((&dr - dr.adjoint()).norm() < 1e-12 * dr.norm());
        }
    }

    #[test]
    fn dephasing_decays_coherence_at_gamma_phi() {
        let mut sys = nominal_system(2);
        sys.tones.probe.amplitude = 0.0;
        sys.tones.drive.amplitude = 0.0;
        sys.tones.spectroscopy.amplitude = 0.0;
        sys.coupling = 0.0;
        let gen = build_generator(&sys).unwrap();
        let d = gen.hilbert_dim();
        let mut rho = Op::zeros(d, d);
        rho[(2, 0)] = Complex64::from(1.0);
        let dr = gen.rhs(0.0, &rho).unwrap();
        let expected = Complex64::new(-sys.rates.decoherence(), -sys.qubit_splitting());
        assert!((dr[(2, 0)] - expected).norm() < 1e-12);
    }

    #[test]
    fn term_frequencies() {
        let sys = nominal_system(3);
        let gen = build_generator(&sys).unwrap();
        let mut f = gen.frequencies();
        f.sort_by(f64::total_cmp);
        assert_eq!(f.len(), 6);
        assert!(f.contains(&sys.tones.drive.frequency));
        assert!(f.contains(&-sys.tones.probe.frequency));
    }

    #[test]
    fn rejects_small_truncation() {
        let mut sys = nominal_system(3);
        sys.fock_dim = 1;
        assert!(build_generator(&sys).is_err());
    }
}
