//! Stationary Maxwell-Bloch solution of the probed resonator coupled to the
//! drive-shifted qubit, with the spectroscopy tone acting on the qubit.
//!
//! Qubit and resonator expectation values are factorized, only the
//! co-rotating exchange terms are kept, and the intra-cavity photon number
//! is a fixed parameter unless [`PhotonMode::SelfConsistent`] is requested.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::drive_shift::{modified_rates, ModifiedRates, ShiftResult};
use crate::error::{Error, Result};
use crate::params::{DissipationRates, FluxBias, QubitParams, ResonatorParams, ToneSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionOrder {
    /// Keep the shifted splitting only; couplings and rates stay undriven.
    FirstOrder,
    /// Also renormalize couplings and dissipation to second order.
    #[default]
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonMode {
    /// N enters the qubit population as a constant.
    #[default]
    FixedN,
    /// Iterate N ← |⟨a⟩|² to a fixed point.
    SelfConsistent,
}

/// How the probe amplitude Ω_p is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbeStrength {
    /// Ω_p = κ√N/2, i.e. N photons in the bare resonator on resonance.
    #[default]
    FromPhotonNumber,
    /// Use `tones.probe.amplitude` as given.
    Explicit,
}

pub const SELF_CONSISTENT_TOL: f64 = 1e-9;
pub const SELF_CONSISTENT_MAX_ITER: usize = 10_000;
const SELF_CONSISTENT_DAMPING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub qubit: QubitParams,
    pub bias: FluxBias,
    pub resonator: ResonatorParams,
    pub tones: ToneSet,
    pub rates: DissipationRates,
    pub photon_number: f64,
    pub correction_order: CorrectionOrder,
    pub mode: PhotonMode,
    pub probe_strength: ProbeStrength,
}

/// Drive-dressed qubit parameters entering the Maxwell-Bloch equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedQubit {
    pub shift: ShiftResult,
    pub rates: ModifiedRates,
}

impl OperatingPoint {
    /// ε/ħ in rad/ns.
    pub fn energy_bias(&self) -> f64 {
        self.bias.energy_bias(&self.qubit)
    }

    /// δ_rp = ω_r − ω_p.
    pub fn probe_detuning(&self) -> f64 {
        self.resonator.fundamental() - self.tones.probe.frequency
    }

    pub fn probe_amplitude(&self) -> f64 {
        match self.probe_strength {
            ProbeStrength::FromPhotonNumber => {
                0.5 * self.resonator.kappa() * self.photon_number.sqrt()
            }
            ProbeStrength::Explicit => self.tones.probe.amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.photon_number >= 0.0 && self.photon_number.is_finite()) {
            return Err(Error::invalid(
                "photon_number",
                format!("must be non-negative, got {}", self.photon_number),
            ));
        }
        Ok(())
    }

    /// Shift, couplings and rates at this point, honoring the correction order.
    pub fn dressed(&self) -> Result<DressedQubit> {
        let eps = self.energy_bias();
        let drive = &self.tones.drive;
        let shift = ShiftResult::evaluate(&self.qubit, eps, drive.amplitude, drive.frequency)?;
        Ok(match self.correction_order {
            CorrectionOrder::SecondOrder => DressedQubit {
                shift,
                rates: modified_rates(&self.rates, shift.c_factor)?,
            },
            CorrectionOrder::FirstOrder => DressedQubit {
                shift: shift.first_order(&self.qubit, eps),
                rates: ModifiedRates::undriven(&self.rates),
            },
        })
    }
}

/// Stationary expectation values at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub cavity_amplitude: Complex64,
    pub population: f64,
    pub transmission: Complex64,
    /// (s_p, s_s): components of ⟨σ_−⟩ at the probe and spectroscopy frequencies.
    pub sidebands: (Complex64, Complex64),
    /// Photon number used in the population, N or the self-consistent |⟨a⟩|².
    pub photon_number: f64,
}

/// Components of ⟨σ_−⟩ = s_p e^{−iω_p t} + s_s e^{−iω_s t}.
pub fn spectroscopy_sidebands(
    op: &OperatingPoint,
    shift: &ShiftResult,
    rates_hat: &ModifiedRates,
    sz: f64,
    a: Complex64,
) -> (Complex64, Complex64) {
    let g = op.resonator.coupling();
    let gamma = rates_hat.decoherence_hat();
    let spec = &op.tones.spectroscopy;
    let den_p = Complex64::new(shift.rabi_splitting - op.tones.probe.frequency, -gamma);
    let den_s = Complex64::new(shift.rabi_splitting - spec.frequency, -gamma);
    let s_p = shift.beta * g * sz * a / den_p;
    let s_s = Complex64::from(shift.beta * spec.amplitude * sz) / (2.0 * den_s);
    (s_p, s_s)
}

/// δ_rp − iκ/2 + g²β² sz/(Ω_R − ω_p − iΓ̂_φ), the dressed cavity response.
fn cavity_denominator(
    op: &OperatingPoint,
    shift: &ShiftResult,
    rates_hat: &ModifiedRates,
    sz: f64,
) -> Complex64 {
    let g = op.resonator.coupling();
    let kappa = op.resonator.kappa();
    let pull = Complex64::from(g * g * shift.beta * shift.beta * sz)
        / Complex64::new(
            shift.rabi_splitting - op.tones.probe.frequency,
            -rates_hat.decoherence_hat(),
        );
    Complex64::new(op.probe_detuning(), -0.5 * kappa) + pull
}

/// Stationary ⟨a⟩ in the frame rotating at the probe frequency.
pub fn cavity_amplitude(
    op: &OperatingPoint,
    shift: &ShiftResult,
    rates_hat: &ModifiedRates,
    sz: f64,
) -> Complex64 {
    -op.probe_amplitude() / cavity_denominator(op, shift, rates_hat, sz)
}

/// Qubit population under the cavity field (N photons) and the spectroscopy tone.
pub fn qubit_population(
    op: &OperatingPoint,
    shift: &ShiftResult,
    rates_hat: &ModifiedRates,
    photons: f64,
) -> f64 {
    let g = op.resonator.coupling();
    let gamma = rates_hat.decoherence_hat();
    let spec = &op.tones.spectroscopy;
    let dp = shift.rabi_splitting - op.tones.probe.frequency;
    let ds = shift.rabi_splitting - spec.frequency;
    let saturation = shift.beta
        * shift.beta
        * gamma
        * (4.0 * g * g * photons / (dp * dp + gamma * gamma)
            + spec.amplitude * spec.amplitude / (ds * ds + gamma * gamma));
    let (up, down) = (rates_hat.excitation_hat, rates_hat.relaxation_hat);
    let den = up + down + saturation;
    if den == 0.0 {
        // no dissipation and no tones: the undriven qubit stays in its ground state
        return -1.0;
    }
    (up - down) / den
}

/// Complex transmission t = (i/2) κ / (δ_rp − iκ/2 + …).
pub fn transmission(
    op: &OperatingPoint,
    shift: &ShiftResult,
    rates_hat: &ModifiedRates,
    sz: f64,
) -> Complex64 {
    Complex64::new(0.0, 0.5 * op.resonator.kappa()) / cavity_denominator(op, shift, rates_hat, sz)
}

pub fn solve(op: &OperatingPoint) -> Result<SteadyState> {
    op.validate()?;
    let DressedQubit { shift, rates } = op.dressed()?;
    solve_dressed(op, &shift, &rates)
}

/// [`solve`] with a precomputed dressed qubit.
pub fn solve_dressed(
    op: &OperatingPoint,
    shift: &ShiftResult,
    rates: &ModifiedRates,
) -> Result<SteadyState> {
    let photons = match op.mode {
        PhotonMode::FixedN => op.photon_number,
        PhotonMode::SelfConsistent => self_consistent_photons(op, shift, rates)?,
    };
    let sz = qubit_population(op, shift, rates, photons);
    let a = cavity_amplitude(op, shift, rates, sz);
    Ok(SteadyState {
        cavity_amplitude: a,
        population: sz,
        transmission: transmission(op, shift, rates, sz),
        sidebands: spectroscopy_sidebands(op, shift, rates, sz, a),
        photon_number: photons,
    })
}

fn self_consistent_photons(
    op: &OperatingPoint,
    shift: &ShiftResult,
    rates: &ModifiedRates,
) -> Result<f64> {
    let mut n = op.photon_number;
    let mut residual = f64::INFINITY;
    for _ in 0..SELF_CONSISTENT_MAX_ITER {
        let sz = qubit_population(op, shift, rates, n);
        let target = cavity_amplitude(op, shift, rates, sz).norm_sqr();
        let next = (1.0 - SELF_CONSISTENT_DAMPING) * n + SELF_CONSISTENT_DAMPING * target;
        residual = (next - n).abs();
        n = next;
        if residual < SELF_CONSISTENT_TOL {
            return Ok(n);
        }
    }
    Err(Error::NonConvergence {
        what: "self-consistent photon number",
        iterations: SELF_CONSISTENT_MAX_ITER,
        residual,
    })
}
