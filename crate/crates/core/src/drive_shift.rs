//! Closed-form consequences of a strong off-resonant drive on the qubit:
//! sideband amplitudes of the induced dipole, the off-resonant population,
//! the ac Zeeman plus Bloch-Siegert shift, the shifted splitting, the
//! renormalized couplings and the modified dissipation rates.
//!
//! All frequencies are angular (rad/ns). `bar_drive` is the transverse drive
//! amplitude Ω̄_d = (Δ/ω_q)·Ω_d at the operating point.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{DissipationRates, QubitParams};

/// Ratio Ω̄_d/|δ_−| above which the second-order expansion is flagged.
pub const VALIDITY_RATIO: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detunings {
    /// δ_− = ω_q − ω_d
    pub delta_minus: f64,
    /// δ_+ = ω_q + ω_d
    pub delta_plus: f64,
}

impl Detunings {
    pub fn new(wq: f64, wd: f64) -> Self {
        Self {
            delta_minus: wq - wd,
            delta_plus: wq + wd,
        }
    }

    /// C = Ω̄_d² (1/δ_−² + 1/δ_+²), the second-order mixing weight.
    pub fn mixing(&self, bar_drive: f64) -> f64 {
        bar_drive * bar_drive * (self.delta_minus.powi(-2) + self.delta_plus.powi(-2))
    }

    /// Ω̄_d / |δ_−|, the expansion parameter.
    pub fn perturbation_ratio(&self, bar_drive: f64) -> f64 {
        bar_drive / self.delta_minus.abs()
    }
}

/// Complex amplitudes of ⟨σ_+⟩ = s_+ e^{−iω_d t} + s_− e^{iω_d t}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandAmplitudes {
    pub s_plus: Complex64,
    pub s_minus: Complex64,
}

/// Steady sidebands of ⟨σ_+⟩ under a transverse drive Ω̄_d cos(ω_d t) σ_x,
/// for a given population `sz`. `decoherence` is Γ_φ.
pub fn sideband_amplitudes(
    bar_drive: f64,
    wq: f64,
    wd: f64,
    decoherence: f64,
    sz: f64,
) -> Result<SidebandAmplitudes> {
    let d = Detunings::new(wq, wd);
    let den_plus = Complex64::new(d.delta_plus, decoherence);
    let den_minus = Complex64::new(d.delta_minus, decoherence);
    if den_plus.norm() == 0.0 || den_minus.norm() == 0.0 {
        return Err(Error::DegenerateDenominator("sideband_amplitudes"));
    }
    let num = Complex64::from(0.5 * bar_drive * sz);
    Ok(SidebandAmplitudes {
        s_plus: num / den_plus,
        s_minus: num / den_minus,
    })
}

/// Period-averaged ⟨σ_z⟩ of the qubit under the off-resonant drive alone,
/// including both co- and counter-rotating absorption channels.
///
/// The saturation term carries Ω̄_d² (not Ω̄_d²/2): this is the coefficient
/// that follows from the Bloch equations of H_d and the one the Lindblad
/// oracle reproduces.
pub fn offres_population(bar_drive: f64, wq: f64, wd: f64, rates: &DissipationRates) -> f64 {
    let d = Detunings::new(wq, wd);
    let g = rates.decoherence();
    let absorption = lorentz_im(d.delta_minus, g) + lorentz_im(d.delta_plus, g);
    let den = rates.relaxation + bar_drive * bar_drive * absorption;
    if den == 0.0 {
        return -1.0;
    }
    -rates.relaxation / den
}

/// Im[1/(δ − iΓ)] = Γ/(δ² + Γ²).
fn lorentz_im(delta: f64, width: f64) -> f64 {
    width / (delta * delta + width * width)
}

/// Level shift ∂E/ħ including the decoherence linewidth.
pub fn ac_shift_exact(bar_drive: f64, wq: f64, wd: f64, decoherence: f64) -> f64 {
    let d = Detunings::new(wq, wd);
    let minus = Complex64::new(d.delta_minus, decoherence).inv();
    let plus = Complex64::new(d.delta_plus, -decoherence).inv();
    0.5 * bar_drive * bar_drive * (minus + plus).re
}

/// ω_ac = Ω̄_d² ω_q / (ω_q² − ω_d²), the large-detuning limit of
/// [`ac_shift_exact`]. Negative for a drive above the qubit.
pub fn ac_shift_approx(bar_drive: f64, wq: f64, wd: f64) -> Result<f64> {
    let den = wq * wq - wd * wd;
    if den == 0.0 {
        return Err(Error::DegenerateDenominator(
            "ac_shift_approx (drive resonant with qubit)",
        ));
    }
    Ok(bar_drive * bar_drive * wq / den)
}

/// Shifted splitting Ω_R = √((ω_q + ω_ac)² + (2ε ω_ac/Δ)²).
pub fn rabi_splitting(q: &QubitParams, eps: f64, omega_ac: f64) -> f64 {
    let wq = q.gap().hypot(eps);
    (wq + omega_ac).hypot(2.0 * eps / q.gap() * omega_ac)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingFactors {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

/// Longitudinal (α) and transverse (β) coupling weights after the drive is
/// transformed away, with the auxiliary factors A and B.
pub fn coupling_factors(
    q: &QubitParams,
    eps: f64,
    bar_drive: f64,
    wd: f64,
) -> Result<CouplingFactors> {
    let gap = q.gap();
    let wq = gap.hypot(eps);
    let d = Detunings::new(wq, wd);
    let omega_ac = ac_shift_approx(bar_drive, wq, wd)?;
    let rabi = rabi_splitting(q, eps, omega_ac);
    let a = 1.0 - 0.5 * d.mixing(bar_drive);
    let b = if bar_drive == 0.0 {
        1.0
    } else {
        1.0 - (omega_ac / bar_drive).powi(2)
    };
    let alpha = eps / (wq * rabi) * (a * (wq + omega_ac) + 2.0 * b * omega_ac);
    let beta =
        gap / (wq * rabi) * (b * (wq + omega_ac) + 2.0 * eps * eps / (gap * gap) * a * omega_ac);
    Ok(CouplingFactors { alpha, beta, a, b })
}

/// Qubit dissipation in the frame where the drive has been transformed away.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedRates {
    pub relaxation_hat: f64,
    pub excitation_hat: f64,
    pub dephasing_hat: f64,
}

impl ModifiedRates {
    /// Rates of the undriven qubit (C = 0).
    pub fn undriven(rates: &DissipationRates) -> Self {
        Self {
            relaxation_hat: rates.relaxation,
            excitation_hat: 0.0,
            dephasing_hat: rates.pure_dephasing,
        }
    }

    /// Γ̂_φ = (Γ̂_r + Γ̂_e)/2 + γ̂_φ.
    pub fn decoherence_hat(&self) -> f64 {
        0.5 * (self.relaxation_hat + self.excitation_hat) + self.dephasing_hat
    }

    /// Total population relaxation rate Γ̂_r + Γ̂_e.
    pub fn population_decay(&self) -> f64 {
        self.relaxation_hat + self.excitation_hat
    }
}

/// Modified rates for a mixing weight `c` (see [`Detunings::mixing`]).
pub fn modified_rates(rates: &DissipationRates, c: f64) -> Result<ModifiedRates> {
    let (gr, gp) = (rates.relaxation, rates.pure_dephasing);
    let half = 0.5 * c;
    let out = ModifiedRates {
        relaxation_hat: gr - half * (gr - gp),
        excitation_hat: half * gp,
        dephasing_hat: gp + half * (gr - 2.0 * gp),
    };
    for (rate, value) in [
        ("relaxation", out.relaxation_hat),
        ("excitation", out.excitation_hat),
        ("dephasing", out.dephasing_hat),
    ] {
        if value < 0.0 {
            return Err(Error::NegativeRate { rate, value });
        }
    }
    Ok(out)
}

/// Everything the drive does to the qubit at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftResult {
    pub omega_ac: f64,
    pub rabi_splitting: f64,
    pub alpha: f64,
    pub beta: f64,
    pub a_factor: f64,
    pub b_factor: f64,
    pub c_factor: f64,
    /// ω_q at this bias, kept for reference.
    pub bare_splitting: f64,
    /// Ω̄_d at this bias.
    pub bar_drive: f64,
}

impl ShiftResult {
    /// `drive_amplitude` is the bare Ω_d; the transverse projection is applied here.
    pub fn evaluate(q: &QubitParams, eps: f64, drive_amplitude: f64, wd: f64) -> Result<Self> {
        let wq = q.gap().hypot(eps);
        let bar_drive = q.gap() / wq * drive_amplitude;
        let d = Detunings::new(wq, wd);
        let ratio = d.perturbation_ratio(bar_drive);
        if ratio > VALIDITY_RATIO {
            log::debug!(
                "drive ratio Ω̄_d/|δ_−| = {ratio:.3} exceeds {VALIDITY_RATIO}; second-order shift is unreliable"
            );
        }
        let omega_ac = ac_shift_approx(bar_drive, wq, wd)?;
        let f = coupling_factors(q, eps, bar_drive, wd)?;
        Ok(Self {
            omega_ac,
            rabi_splitting: rabi_splitting(q, eps, omega_ac),
            alpha: f.alpha,
            beta: f.beta,
            a_factor: f.a,
            b_factor: f.b,
            c_factor: d.mixing(bar_drive),
            bare_splitting: wq,
            bar_drive,
        })
    }

    /// Keep ω_ac and Ω_R but restore the couplings to their undriven values.
    pub fn first_order(mut self, q: &QubitParams, eps: f64) -> Self {
        self.alpha = eps / self.bare_splitting;
        self.beta = q.gap() / self.bare_splitting;
        self.a_factor = 1.0;
        self.b_factor = 1.0;
        self
    }
}
