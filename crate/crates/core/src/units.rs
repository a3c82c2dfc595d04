//! Unit conventions and physical constants.
//!
//! Every frequency inside the library is an angular frequency in rad/ns, so a
//! value of `units::ghz(1.0)` is 2π rad/ns. Rates quoted in MHz (Γ/2π) go
//! through [`mhz`].

use std::f64::consts::TAU;

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Flux quantum h/2e, Wb.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// Ordinary frequency in GHz to angular frequency in rad/ns.
#[inline]
pub fn ghz(f: f64) -> f64 {
    TAU * f
}

/// Ordinary frequency in MHz to angular frequency in rad/ns.
#[inline]
pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e-3
}

/// Angular frequency in rad/ns to GHz.
#[inline]
pub fn to_ghz(w: f64) -> f64 {
    w / TAU
}

/// Angular frequency in rad/ns to MHz.
#[inline]
pub fn to_mhz(w: f64) -> f64 {
    w / TAU * 1e3
}

/// Angular frequency in rad/ns to rad/s.
#[inline]
pub fn to_rad_per_s(w: f64) -> f64 {
    w * 1e9
}

/// Angular frequency in rad/s to rad/ns.
#[inline]
pub fn from_rad_per_s(w: f64) -> f64 {
    w * 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_invert() {
        assert!((to_ghz(ghz(2.97)) - 2.97).abs() < 1e-15);
        assert!((to_mhz(mhz(25.0)) - 25.0).abs() < 1e-12);
        assert!((ghz(1.0) - mhz(1000.0)).abs() < 1e-12);
    }

    #[test]
    fn flux_quantum_value() {
        assert!((FLUX_QUANTUM - 2.067_833_848e-15).abs() < 1e-23);
    }
}
