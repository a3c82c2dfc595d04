//! Time-periodic steady state of the master equation and its Fourier content.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::generator::{build_generator, Generator, Operators};
use super::integrator::{Dop853, IntegratorConfig, Stats};
use super::TruncatedSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Monodromy when the tones share a period not longer than
    /// `max_commensurate_period`, relaxation otherwise.
    #[default]
    Auto,
    /// Solve for the fixed point of the one-period propagator.
    Monodromy,
    /// Integrate forward window by window until averages settle.
    Relax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub integrator: IntegratorConfig,
    pub strategy: Strategy,
    /// Largest change of any period-averaged observable between periods.
    pub convergence_tol: f64,
    /// Relaxation budget in averaging windows.
    pub max_periods: usize,
    /// Averaging window for incommensurate tones, in probe periods.
    pub window_probe_periods: usize,
    /// Frequency grid for finding a common period, GHz.
    pub frequency_grid: f64,
    pub max_commensurate_period: f64,
    /// Samples per averaging window; chosen from the tone content if `None`.
    pub samples_per_period: Option<usize>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            strategy: Strategy::Auto,
            convergence_tol: 1e-8,
            max_periods: 100_000,
            window_probe_periods: 200,
            frequency_grid: 1e-6,
            max_commensurate_period: 200.0,
            samples_per_period: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    /// ρ at the start of the averaging period.
    pub steady_density_matrix: DMatrix<Complex64>,
    /// Keys: `sigma_z`, `photon_number`, `a@+wp` (lab-frame ⟨a⟩ component at
    /// e^{−iω_p t}) and `sigma_plus@<ν>` / `sigma_minus@<ν>` for ν ∈
    /// {0, ±wd, ±ws, ±wp}; `@+x` is the coefficient of e^{−i x t}.
    pub period_averaged_expectations: BTreeMap<String, Complex64>,
    /// max |tr ρ − 1| over the sampled period.
    pub trace_drift: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_error: f64,
    /// Largest population of the highest Fock level over the period.
    pub top_fock_occupation: f64,
    pub period: f64,
    pub strategy: Strategy,
    pub stats: Stats,
}

impl EvolutionResult {
    pub fn get(&self, key: &str) -> Result<Complex64> {
        self.period_averaged_expectations
            .get(key)
            .copied()
            .ok_or_else(|| {
                Error::invalid(
                    "observable",
                    format!("`{key}` not computed for this system"),
                )
            })
    }
}

/// Least common period of the given angular frequencies on a grid (GHz).
pub fn common_period(freqs: &[f64], grid: f64) -> Option<f64> {
    if let Some(&w0) = freqs.first() {
        if w0 != 0.0 && freqs.iter().all(|w| w.abs() == w0.abs()) {
            return Some(TAU / w0.abs());
        }
    }
    let mut g: u64 = 0;
    for &w in freqs {
        let x = (w.abs() / TAU) / grid;
        let n = x.round();
        if (x - n).abs() > 1e-6 || !(1.0..=1e15).contains(&n) {
            return None;
        }
        g = gcd(g, n as u64);
    }
    (g > 0).then(|| 1.0 / (g as f64 * grid))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Observable functionals Tr(Oρ) as sparse weights on vec(ρ).
struct Observables {
    d: usize,
    f: usize,
    sigma_z: Vec<(usize, Complex64)>,
    sigma_plus: Vec<(usize, Complex64)>,
    a: Vec<(usize, Complex64)>,
    number: Vec<(usize, Complex64)>,
}

impl Observables {
    fn new(ops: &Operators) -> Self {
        let d = ops.dim();
        let weights = |o: &DMatrix<Complex64>| {
            let mut w = Vec::new();
            for i in 0..d {
                for j in 0..d {
                    // Tr(Oρ) = Σ O[j,i] ρ[i,j]
                    if o[(j, i)] != Complex64::default() {
                        w.push((i + d * j, o[(j, i)]));
                    }
                }
            }
            w
        };
        Self {
            d,
            f: ops.fock_dim,
            sigma_z: weights(&ops.sigma_z),
            sigma_plus: weights(&ops.sigma_plus),
            a: weights(&ops.a),
            number: weights(&ops.number),
        }
    }

    fn eval(w: &[(usize, Complex64)], x: &[Complex64]) -> Complex64 {
        w.iter().map(|&(k, c)| c * x[k]).sum()
    }

    fn trace(&self, x: &[Complex64]) -> Complex64 {
        (0..self.d).map(|i| x[i + self.d * i]).sum()
    }

    fn top_occupation(&self, x: &[Complex64]) -> f64 {
        let top = self.f - 1;
        [top, self.f + top]
            .iter()
            .map(|&i| x[i + self.d * i].re)
            .sum()
    }
}

/// Sampled observables over one averaging window.
struct Window {
    sigma_z: Complex64,
    photon_number: Complex64,
    components: BTreeMap<String, Complex64>,
    trace_drift: f64,
    top: f64,
}

struct Runner<'a> {
    gen: &'a Generator,
    obs: Observables,
    ig: Dop853,
    labels: Vec<(String, f64)>,
}

impl Runner<'_> {
    fn rhs(gen: &Generator) -> impl FnMut(f64, &[Complex64], &mut [Complex64]) + '_ {
        move |t, x, y| gen.apply(t, x, y)
    }

    /// Integrate one window of length `span` from `t0`, sampling `m` points.
    fn window(&mut self, x: &mut [Complex64], t0: f64, span: f64, m: usize) -> Result<Window> {
        let mut acc: Vec<Complex64> = vec![Complex64::default(); self.labels.len()];
        let (mut sz, mut nph, mut a0) = (
            Complex64::default(),
            Complex64::default(),
            Complex64::default(),
        );
        let (mut drift, mut top): (f64, f64) = (0.0, 0.0);
        let dt = span / m as f64;
        let mut f = Self::rhs(self.gen);
        for k in 0..m {
            let t = t0 + k as f64 * dt;
            if k > 0 {
                self.ig.integrate(&mut f, t - dt, t, x)?;
            }
            drift = drift.max((self.obs.trace(x) - 1.0).norm());
            top = top.max(self.obs.top_occupation(x));
            sz += Observables::eval(&self.obs.sigma_z, x);
            nph += Observables::eval(&self.obs.number, x);
            let sp = Observables::eval(&self.obs.sigma_plus, x);
            // frame ⟨a⟩ is the lab component at e^{−iω_p t}
            a0 += Observables::eval(&self.obs.a, x);
            for (slot, (_, nu)) in acc.iter_mut().zip(&self.labels) {
                *slot += sp * Complex64::from_polar(1.0, nu * t);
            }
        }
        self.ig
            .integrate(&mut f, t0 + (m - 1) as f64 * dt, t0 + span, x)?;
        let inv = 1.0 / m as f64;
        let mut components = BTreeMap::new();
        for (v, (label, _)) in acc.iter().zip(&self.labels) {
            components.insert(format!("sigma_plus@{label}"), v * inv);
        }
        // ⟨σ_−⟩ = ⟨σ_+⟩*: the e^{−iνt} component of σ_− is the conjugate of σ_+ at −ν
        for (label, _) in &self.labels {
            let mirror = mirror_label(label);
            let v = components[&format!("sigma_plus@{mirror}")].conj();
            components.insert(format!("sigma_minus@{label}"), v);
        }
        components.insert("a@+wp".into(), a0 * inv);
        Ok(Window {
            sigma_z: sz * inv,
            photon_number: nph * inv,
            components,
            trace_drift: drift,
            top,
        })
    }
}

fn mirror_label(label: &str) -> String {
    match label.as_bytes().first() {
        Some(b'+') => format!("-{}", &label[1..]),
        Some(b'-') => format!("+{}", &label[1..]),
        _ => label.to_string(),
    }
}

fn window_delta(a: &Window, b: &Window) -> f64 {
    let mut d = (a.sigma_z - b.sigma_z)
        .norm()
        .max((a.photon_number - b.photon_number).norm());
    for (k, v) in &a.components {
        d = d.max((v - b.components[k]).norm());
    }
    d
}

fn frequency_labels(sys: &TruncatedSystem, gen: &Generator) -> Vec<(String, f64)> {
    let mut labels = vec![("0".to_string(), 0.0)];
    let freqs = gen.frequencies();
    let named = [
        ("wd", sys.tones.drive.frequency),
        ("ws", sys.tones.spectroscopy.frequency),
        ("wp", sys.tones.probe.frequency),
    ];
    for (name, w) in named {
        if freqs.iter().any(|&nu| nu.abs() == w)
            && !labels.iter().any(|(l, _)| l == &format!("+{name}"))
        {
            // component of e^{−iνt} is extracted with e^{+iνt}
            labels.push((format!("+{name}"), w));
            labels.push((format!("-{name}"), -w));
        }
    }
    labels
}

fn sample_count(sys: &TruncatedSystem, gen: &Generator, span: f64, cfg: &EvolveConfig) -> usize {
    if let Some(m) = cfg.samples_per_period {
        return m.max(2);
    }
    let fmax = sys.qubit_splitting()
        + gen
            .frequencies()
            .iter()
            .map(|w| w.abs())
            .fold(0.0, f64::max);
    let harmonics = (fmax * span / TAU).ceil() as usize;
    (4 * harmonics + 64).max(64)
}

fn ground_state(d: usize) -> Vec<Complex64> {
    let mut x = vec![Complex64::default(); d * d];
    x[0] = Complex64::from(1.0);
    x
}

/// One-period propagator, column by column.
fn monodromy(
    gen: &Generator,
    period: f64,
    cfg: &IntegratorConfig,
) -> Result<(DMatrix<Complex64>, Stats)> {
    let n = gen.hilbert_dim().pow(2);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut ig = Dop853::new(*cfg, n);
    let mut f = Runner::rhs(gen);
    let mut x = vec![Complex64::default(); n];
    for j in 0..n {
        x.fill(Complex64::default());
        x[j] = Complex64::from(1.0);
        ig.integrate(&mut f, 0.0, period, &mut x)?;
        m.column_mut(j).copy_from_slice(&x);
    }
    Ok((m, ig.stats))
}

/// Fixed point of the monodromy with unit trace.
fn periodic_state(m: &DMatrix<Complex64>, d: usize) -> Result<Vec<Complex64>> {
    let n = d * d;
    let mut a = m - DMatrix::<Complex64>::identity(n, n);
    let mut b = DVector::<Complex64>::zeros(n);
    a.row_mut(0).fill(Complex64::default());
    for i in 0..d {
        a[(0, i + d * i)] = Complex64::from(1.0);
    }
    b[0] = Complex64::from(1.0);
    let x = a
        .lu()
        .solve(&b)
        .ok_or(Error::Singular("monodromy fixed point"))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("monodromy fixed point"));
    }
    Ok(x.iter().copied().collect())
}

fn density_checks(x: &[Complex64], d: usize) -> (DMatrix<Complex64>, f64, f64) {
    let rho = DMatrix::from_column_slice(d, d, x);
    let herm = (&rho - rho.adjoint()).norm();
    let sym = (&rho + rho.adjoint()) * Complex64::from(0.5);
    let min_eig = sym
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    (sym, herm, min_eig)
}

/// Evolve `sys` to its time-periodic steady state and report period averages.
pub fn evolve_to_steady(sys: &TruncatedSystem, cfg: &EvolveConfig) -> Result<EvolutionResult> {
    let gen = build_generator(sys)?;
    let d = gen.hilbert_dim();
    let freqs = gen.frequencies();
    let probe_period = TAU / sys.tones.probe.frequency;
    let period = if freqs.is_empty() {
        Some(probe_period)
    } else {
        common_period(&freqs, cfg.frequency_grid)
    };
    let strategy = match (cfg.strategy, period) {
        (Strategy::Auto, Some(t)) if t <= cfg.max_commensurate_period => Strategy::Monodromy,
        (Strategy::Auto, _) => Strategy::Relax,
        (Strategy::Monodromy, None) => {
            return Err(Error::invalid(
                "strategy",
                "tones are not commensurate on the frequency grid",
            ))
        }
        (s, _) => s,
    };
    let window = match (strategy, period) {
        (Strategy::Monodromy, Some(t)) => t,
        (_, Some(t)) if t <= cfg.max_commensurate_period => t,
        _ => cfg.window_probe_periods as f64 * probe_period,
    };
    let samples = sample_count(sys, &gen, window, cfg);
    let mut runner = Runner {
        gen: &gen,
        obs: Observables::new(&Operators::new(sys.fock_dim)),
        ig: Dop853::new(cfg.integrator, d * d),
        labels: frequency_labels(sys, &gen),
    };

    let (x0, mut stats, first, mut x, mut t) = match strategy {
        Strategy::Monodromy => {
            let (m, stats) = monodromy(&gen, window, &cfg.integrator)?;
            let x0 = periodic_state(&m, d)?;
            let mut x = x0.clone();
            let first = runner.window(&mut x, 0.0, window, samples)?;
            (x0, stats, first, x, window)
        }
        _ => {
            let mut x = ground_state(d);
            let mut t = 0.0;
            let mut prev = runner.window(&mut x, t, window, samples)?;
            t += window;
            let mut settled = None;
            for _ in 1..cfg.max_periods {
                let x_start = x.clone();
                let next = runner.window(&mut x, t, window, samples)?;
                t += window;
                let delta = window_delta(&prev, &next);
                prev = next;
                if delta < cfg.convergence_tol {
                    settled = Some(x_start);
                    break;
                }
            }
            let Some(x0) = settled else {
                return Err(Error::NonConvergence {
                    what: "period-averaged observables",
                    iterations: cfg.max_periods,
                    residual: f64::NAN,
                });
            };
            (x0, Stats::default(), prev, x, t)
        }
    };

    // two further periods must reproduce the averages
    let mut last = first;
    let mut drift = last.trace_drift;
    let mut top = last.top;
    for _ in 0..2 {
        let next = runner.window(&mut x, t, window, samples)?;
        t += window;
        let delta = window_delta(&last, &next);
        if delta >= cfg.convergence_tol {
            return Err(Error::NonConvergence {
                what: "periodic steady state",
                iterations: 2,
                residual: delta,
            });
        }
        drift = drift.max(next.trace_drift);
        top = top.max(next.top);
        last = next;
    }
    stats.accepted += runner.ig.stats.accepted;
    stats.rejected += runner.ig.stats.rejected;
    stats.evaluations += runner.ig.stats.evaluations;

    let (rho, herm, min_eig) = density_checks(&x0, d);
    let mut expectations = last.components;
    expectations.insert("sigma_z".into(), last.sigma_z);
    expectations.insert("photon_number".into(), last.photon_number);
    Ok(EvolutionResult {
        steady_density_matrix: rho,
        period_averaged_expectations: expectations,
        trace_drift: drift,
        min_eigenvalue: min_eig,
        hermiticity_error: herm,
        top_fock_occupation: top,
        period: window,
        strategy,
        stats,
    })
}

/// Floquet exponents μ = ln(λ)/T of the Liouvillian over the common period,
/// sorted by decay rate −Re μ.
pub fn floquet_exponents(sys: &TruncatedSystem, cfg: &EvolveConfig) -> Result<Vec<Complex64>> {
    let gen = build_generator(sys)?;
    let freqs = gen.frequencies();
    let period = if freqs.is_empty() {
        TAU / sys.tones.probe.frequency
    } else {
        common_period(&freqs, cfg.frequency_grid)
            .ok_or_else(|| Error::invalid("tones", "not commensurate on the frequency grid"))?
    };
    let (m, _) = monodromy(&gen, period, &cfg.integrator)?;
    let schur = m.schur();
    let (_, t) = schur.unpack();
    let mut mu: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)].ln() / period).collect();
    mu.sort_by(|a, b| (-a.re).total_cmp(&-b.re));
    Ok(mu)
}
