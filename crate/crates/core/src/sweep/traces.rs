use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    evaluate, power::drive_from_power, rabi_overlay, Axis, AxisName, DeviceGeometry, MapResult,
    Normalization, OrderPolicy, Quantity, SweepSpec,
};
use crate::drive_shift::ShiftResult;
use crate::error::{Error, Result};
use crate::params::FluxBias;
use crate::steady_state::{solve, OperatingPoint};
use crate::units::{ghz, to_ghz};

/// ω_s/2π of the level-diagram spectroscopy tone, GHz.
pub const LEVEL_SPECTROSCOPY_FREQUENCY: f64 = 3.5;
/// Ω_s/2π of the level-diagram spectroscopy tone, GHz.
pub const LEVEL_SPECTROSCOPY_AMPLITUDE: f64 = 0.010;

const BISECTION_STEPS: usize = 200;

/// One |t(ε)| trace at a fixed drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTrace {
    /// Ω_d/2π, GHz
    pub drive_amplitude: f64,
    pub power_dbm: Option<f64>,
    #[serde(skip)]
    pub map: Option<MapResult>,
}

/// |t(ε)| with the spectroscopy tone off, one trace per drive amplitude (GHz).
pub fn bias_trace_by_amplitude(
    template: &OperatingPoint,
    bias: Axis,
    amplitudes: &[f64],
    order: OrderPolicy,
) -> Result<Vec<BiasTrace>> {
    if bias.name != AxisName::EnergyBias {
        return Err(Error::invalid("axis1", "bias traces scan energy_bias"));
    }
    amplitudes
        .iter()
        .map(|&amp| {
            if !(amp >= 0.0 && amp.is_finite()) {
                return Err(Error::invalid(
                    "drive amplitude",
                    format!("must be non-negative, got {amp}"),
                ));
            }
            let mut op = *template;
            op.tones.spectroscopy.amplitude = 0.0;
            op.tones.drive.amplitude = ghz(amp);
            let spec = SweepSpec {
                axis1: bias,
                axis2: None,
                fixed: op,
                quantity: Quantity::TAbs,
                normalization: Normalization::None,
                order,
            };
            let mut map = evaluate(&spec)?;
            map.overlay = rabi_overlay(&op, &bias, order)?;
            Ok(BiasTrace {
                drive_amplitude: amp,
                power_dbm: None,
                map: Some(map),
            })
        })
        .collect()
}

/// [`bias_trace_by_amplitude`] with amplitudes converted from input power.
pub fn bias_trace(
    template: &OperatingPoint,
    bias: Axis,
    powers_dbm: &[f64],
    geometry: &DeviceGeometry,
    order: OrderPolicy,
) -> Result<Vec<BiasTrace>> {
    let wd = template.tones.drive.frequency;
    let amps = powers_dbm
        .iter()
        .map(|&p| drive_from_power(p, wd, geometry).map(to_ghz))
        .collect::<Result<Vec<_>>>()?;
    let mut traces = bias_trace_by_amplitude(template, bias, &amps, order)?;
    for (t, &p) in traces.iter_mut().zip(powers_dbm) {
        t.power_dbm = Some(p);
    }
    Ok(traces)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    /// ε/h, GHz, parabolically refined
    pub bias: f64,
    pub value: f64,
    /// Height of the lower of the two enclosing maxima above the minimum.
    pub prominence: f64,
}

/// Interior local minima of a 1D map whose prominence exceeds `min_prominence`.
pub fn find_dips(map: &MapResult, min_prominence: f64) -> Result<Vec<Dip>> {
    map.check_shape()?;
    if map.axis2.is_some() {
        return Err(Error::invalid("map", "dip search needs a 1D trace"));
    }
    let v = &map.values;
    let n = v.len();
    let step = map.axis1.step();
    let mut dips = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(v[i] < v[i - 1] && v[i] <= v[i + 1]) {
            continue;
        }
        let side_max = |range: &mut dyn Iterator<Item = usize>| {
            let mut m = v[i];
            for j in range {
                if v[j] < v[i] {
                    break;
                }
                m = m.max(v[j]);
            }
            m
        };
        let left = side_max(&mut (0..i).rev());
        let right = side_max(&mut (i + 1..n));
        let prominence = left.min(right) - v[i];
        if !(prominence > min_prominence) {
            continue;
        }
        let curv = v[i - 1] - 2.0 * v[i] + v[i + 1];
        let offset = if curv > 0.0 {
            (0.5 * (v[i - 1] - v[i + 1]) / curv).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        dips.push(Dip {
            bias: map.axis1.value(i) + offset * step,
            value: v[i],
            prominence,
        });
    }
    Ok(dips)
}

fn rabi_at(template: &OperatingPoint, eps_ghz: f64, amplitude: f64) -> Result<f64> {
    let mut op = *template;
    op.bias = FluxBias::from_energy_ghz(eps_ghz);
    op.tones.drive.amplitude = amplitude;
    Ok(op.dressed()?.shift.rabi_splitting)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let f_lo = f(lo)?;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid)? > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Drive amplitude Ω_d (rad/ns) at which Ω_R(ε = 0) reaches ω_r.
pub fn threshold_drive(template: &OperatingPoint) -> Result<f64> {
    let wr = template.resonator.fundamental();
    let f = |amp: f64| Ok(rabi_at(template, 0.0, amp)? - wr);
    if f(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = ghz(0.5);
    while f(hi)? > 0.0 {
        hi *= 2.0;
        if hi > ghz(100.0) {
            return Err(Error::RidgeNotFound(
                "Ω_R(0) stays above ω_r for every drive".into(),
            ));
        }
    }
    bisect(0.0, hi, f)
}

/// Positive ε/h (GHz) where Ω_R(ε) = ω_r at drive `amplitude` (rad/ns); none below threshold.
pub fn resonance_crossing(template: &OperatingPoint, amplitude: f64) -> Result<Option<f64>> {
    let wr = template.resonator.fundamental();
    let f = |e: f64| Ok(rabi_at(template, e, amplitude)? - wr);
    if f(0.0)? >= 0.0 {
        return Ok(None);
    }
    let mut hi = 1.0;
    while f(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Ok(None);
        }
    }
    bisect(0.0, hi, f).map(Some)
}

/// Qubit levels ±Ω_R/2 (GHz) and ⟨σ_z⟩ over (ε, Ω_d). Population is NaN where
/// the second-order rates turn negative.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDiagram {
    pub upper: MapResult,
    pub lower: MapResult,
    pub population: MapResult,
}

pub fn level_diagram(
    template: &OperatingPoint,
    bias: Axis,
    amplitudes: Axis,
    order: OrderPolicy,
) -> Result<LevelDiagram> {
    if bias.name != AxisName::EnergyBias || amplitudes.name != AxisName::DriveAmplitude {
        return Err(Error::invalid(
            "axes",
            "level diagram scans (energy_bias, drive_amplitude)",
        ));
    }
    let mut op = *template;
    op.tones.spectroscopy.frequency = ghz(LEVEL_SPECTROSCOPY_FREQUENCY);
    op.tones.spectroscopy.amplitude = ghz(LEVEL_SPECTROSCOPY_AMPLITUDE);
    let (e_vals, a_vals) = (bias.values(), amplitudes.values());
    let points: Vec<(f64, f64)> = e_vals
        .iter()
        .flat_map(|&e| a_vals.iter().map(move |&a| (e, a)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(e, a)| {
            let mut p = op;
            p.bias = FluxBias::from_energy_ghz(e);
            p.tones.drive.amplitude = ghz(a);
            p.correction_order = order.at(p.energy_bias());
            let grid_err = |err| Error::GridPoint {
                axis1: e,
                axis2: a,
                source: Box::new(err),
            };
            let d = p.tones.drive;
            let shift = ShiftResult::evaluate(&p.qubit, p.energy_bias(), d.amplitude, d.frequency)
                .map_err(grid_err)?;
            let sz = match solve(&p) {
                Ok(s) => s.population,
                Err(Error::NegativeRate { .. }) => f64::NAN,
                Err(err) => return Err(grid_err(err)),
            };
            Ok((0.5 * to_ghz(shift.rabi_splitting), sz))
        })
        .collect::<Result<Vec<_>>>()?;
    let (upper, pops): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let level_map = |values: Vec<f64>| MapResult {
        quantity: Quantity::Levels,
        axis1: bias,
        axis2: Some(amplitudes),
        values,
        normalization: Normalization::None,
        overlay: Vec::new(),
    };
    let lower = level_map(upper.iter().map(|v| -v).collect());
    let population = MapResult {
        quantity: Quantity::Population,
        ..level_map(pops)
    };
    Ok(LevelDiagram {
        upper: level_map(upper),
        lower,
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::tests::nominal_template;

    fn bias_axis() -> Axis {
        Axis::new(AxisName::EnergyBias, -3.0, 3.0, 1201).unwrap()
    }

    fn dips_at(amp: f64) -> Vec<Dip> {
        let t = bias_trace_by_amplitude(
            &nominal_template(0.0),
            bias_axis(),
            &[amp],
            OrderPolicy::Second,
        )
        .unwrap();
        find_dips(t[0].map.as_ref().unwrap(), 1e-3).unwrap()
    }

    #[test]
    fn threshold_value() {
        let th = to_ghz(threshold_drive(&nominal_template(0.0)).unwrap());
        assert!((th - 2.568).abs() < 5e-3, "{th}");
    }

    #[test]
    fn one_dip_below_threshold() {
        for amp in [0.0, 1.0, 2.0] {
            let d = dips_at(amp);
            assert_eq!(d.len(), 1, "Ω_d = {amp}: {d:?}");
            assert!(d[0].bias.abs() < 0.01);
        }
    }

    #[test]
    fn two_symmetric_dips_above_threshold() {
        let t = nominal_template(0.0);
        let d = dips_at(3.0);
        assert_eq!(d.len(), 2, "{d:?}");
        assert!((d[0].bias + d[1].bias).abs() < 0.01);
        let root = resonance_crossing(&t, ghz(3.0)).unwrap().unwrap();
        assert!((d[1].bias - root).abs() < 0.05, "{} vs {root}", d[1].bias);
    }

    #[test]
    fn no_crossing_below_threshold() {
        assert!(resonance_crossing(&nominal_template(0.0), ghz(2.0))
            .unwrap()
            .is_none());
    }

    #[test]
    fn power_traces_carry_power() {
        let t = nominal_template(0.0);
        let g = DeviceGeometry::nominal(&t.resonator);
        let tr = bias_trace(
            &t,
            Axis::new(AxisName::EnergyBias, -1.0, 1.0, 11).unwrap(),
            &[-30.0, -20.0],
            &g,
            OrderPolicy::Second,
        )
        .unwrap();
        assert_eq!(tr[1].power_dbm, Some(-20.0));
        assert!((tr[1].drive_amplitude / tr[0].drive_amplitude - 10f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn level_diagram_branches() {
        let bias = Axis::new(AxisName::EnergyBias, -6.0, 6.0, 41).unwrap();
        let amps = Axis::new(AxisName::DriveAmplitude, 0.0, 3.0, 4).unwrap();
        let d = level_diagram(&nominal_template(0.0), bias, amps, OrderPolicy::Second).unwrap();
        // ε = 0, Ω_d = 0: bare ±Δ/2
        assert!((d.upper.get(20, 0) - 1.485).abs() < 1e-12);
        assert!((d.lower.get(20, 0) + 1.485).abs() < 1e-12);
        assert!(d.upper.get(20, 3) < d.upper.get(20, 0) - 0.2);
        assert!(d
            .population
            .values
            .iter()
            .filter(|p| p.is_finite())
            .all(|p| (-1.0..=1.0).contains(p)));
        // Ω̄_d/|δ_−| > 1 near ω_q ≈ ω_d
        assert!(d.population.get(0, 3).is_nan());
        assert!(d.population.get(20, 3).is_finite());
    }

    #[test]
    fn population_dips_at_spectroscopy_resonance() {
        let bias = Axis::new(AxisName::EnergyBias, 0.0, 4.0, 801).unwrap();
        let amps = Axis::new(AxisName::DriveAmplitude, 0.0, 1.0, 2).unwrap();
        let d = level_diagram(&nominal_template(0.0), bias, amps, OrderPolicy::Second).unwrap();
        let (i, _) = (0..801)
            .map(|i| (i, d.population.get(i, 0)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let e = bias.value(i);
        // ω_q(ε) = 3.5 GHz
        assert!(
            (e - (3.5f64.powi(2) - 2.97f64.powi(2)).sqrt()).abs() < 0.02,
            "{e}"
        );
    }
}
