//! Analytic and brute-force models of a flux qubit whose level splitting is
//! shifted by a strong off-resonant drive, read out through a coplanar
//! resonator with three-tone spectroscopy.
//!
//! Angular frequencies are in rad/ns and times in ns throughout the library.
//! Configuration and file output use ordinary frequencies (GHz, MHz); see
//! [`units`] for the conversions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod drive_shift;
pub mod error;
pub mod io;
pub mod oracle;
pub mod params;
pub mod steady_state;
pub mod sweep;
pub mod units;

pub use drive_shift::{Detunings, ModifiedRates, ShiftResult, SidebandAmplitudes};
pub use error::{Error, Result};
pub use params::{
    DissipationRates, FluxBias, QubitParams, ResonatorParams, Tone, ToneRole, ToneSet,
};
pub use steady_state::{CorrectionOrder, OperatingPoint, PhotonMode, ProbeStrength, SteadyState};

pub use num_complex::Complex64;
