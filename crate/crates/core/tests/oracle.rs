use fluxshift::config::RunConfig;
use fluxshift::oracle::compare::{rate_check, sideband_check, transmission_check};
use fluxshift::oracle::EvolveConfig;
use fluxshift::steady_state::solve;
use fluxshift::units::{ghz, to_ghz};
use fluxshift::{Complex64, OperatingPoint};

fn template(drive_ghz: f64) -> OperatingPoint {
    let cfg = RunConfig::default().resolve().unwrap().config;
    let mut op = cfg.operating_point().unwrap();
    op.tones.drive.amplitude = ghz(drive_ghz);
    op
}

/// Analytic t with the cavity pull g²β²⟨σ_z⟩/(Ω_R + ω_p) of the counter-rotating coupling added.
fn with_counter_rotating_pull(op: &OperatingPoint) -> Complex64 {
    let s = solve(op).unwrap();
    let d = op.dressed().unwrap().shift;
    let half_kappa = Complex64::new(0.0, 0.5 * op.resonator.kappa());
    let g = op.resonator.coupling() * d.beta;
    let pull = g * g * s.population / (d.rabi_splitting + op.tones.probe.frequency);
    half_kappa / (half_kappa / s.transmission + pull)
}

#[test]
fn nominal_q_transmission_gap_is_counter_rotating_pull() {
    let mut op = template(0.0);
    op.photon_number = 1.0;
    let (wr, k) = (op.resonator.fundamental(), op.resonator.kappa());
    let scan: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0]
        .iter()
        .map(|x| to_ghz(wr + x * k))
        .collect();
    let c = transmission_check(&op, &scan, None, &EvolveConfig::default()).unwrap();
    let corrected = c
        .rows
        .iter()
        .map(|r| {
            let mut p = op;
            p.tones.probe.frequency = ghz(r.x);
            p.tones.spectroscopy.amplitude = 0.0;
            (with_counter_rotating_pull(&p) - r.oracle).norm() / r.oracle.norm()
        })
        .fold(0.0, f64::max);
    assert!(c.max_deviation() > 0.02, "{c:?}");
    assert!(corrected < 2e-3, "{corrected}");
}

#[test]
fn sidebands_track_oracle_off_resonance() {
    let c = sideband_check(&template(0.5), &[-1.0, 0.0, 1.0], &EvolveConfig::default()).unwrap();
    assert_eq!(c.rows.len(), 6);
    assert!(c.max_deviation() < 0.02, "{c:?}");
}

#[test]
fn modified_rates_within_second_order_bound() {
    let c = rate_check(&template(0.0), &[0.5, 1.0], &EvolveConfig::default()).unwrap();
    for r in &c.rows {
        assert!(r.deviation <= r.bound.unwrap(), "{r:?}");
    }
}
