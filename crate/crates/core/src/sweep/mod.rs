//! Parameter scans over steady-state solutions and the analyses run on them.
//!
//! Map axes and values are reported in configuration units (GHz for
//! frequencies and amplitudes, dBm for power), not rad/ns.

mod power;
mod ridge;
mod traces;

pub use power::{drive_from_power, DeviceGeometry};
pub use ridge::{extract_min_gap, ridge_positions, RidgePoint};
pub use traces::{
    bias_trace, bias_trace_by_amplitude, find_dips, level_diagram, resonance_crossing,
    threshold_drive, BiasTrace, Dip, LevelDiagram, LEVEL_SPECTROSCOPY_AMPLITUDE,
    LEVEL_SPECTROSCOPY_FREQUENCY,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::FluxBias;
use crate::steady_state::{solve, CorrectionOrder, OperatingPoint};
use crate::units::{ghz, to_ghz};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    /// ε/h, GHz
    EnergyBias,
    /// ω_s/2π, GHz
    SpectroscopyFrequency,
    /// ω_p/2π, GHz
    ProbeFrequency,
    /// Ω_d/2π, GHz
    DriveAmplitude,
    /// P_in, dBm
    DrivePower,
}

impl AxisName {
    pub fn unit(self) -> &'static str {
        match self {
            AxisName::DrivePower => "dBm",
            _ => "GHz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(name: AxisName, start: f64, stop: f64, points: usize) -> Result<Self> {
        let a = Self {
            name,
            start,
            stop,
            points,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::invalid(
                "axis points",
                format!("need at least 2, got {}", self.points),
            ));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start == self.stop {
            return Err(Error::invalid(
                "axis range",
                format!("[{}, {}] is empty or not finite", self.start, self.stop),
            ));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.stop
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    TAbs,
    TPhase,
    Population,
    Levels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide each axis-1 column by its median.
    #[default]
    Column,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderPolicy {
    First,
    #[default]
    Second,
    /// First order for ε < 0, second order for ε ≥ 0.
    Mixed,
}

impl OrderPolicy {
    pub fn at(self, eps: f64) -> CorrectionOrder {
        match self {
            OrderPolicy::First => CorrectionOrder::FirstOrder,
            OrderPolicy::Second => CorrectionOrder::SecondOrder,
            OrderPolicy::Mixed if eps < 0.0 => CorrectionOrder::FirstOrder,
            OrderPolicy::Mixed => CorrectionOrder::SecondOrder,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub fixed: OperatingPoint,
    pub quantity: Quantity,
    pub normalization: Normalization,
    pub order: OrderPolicy,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.name == self.axis1.name {
                return Err(Error::invalid(
                    "axis2",
                    "must scan a different parameter than axis1",
                ));
            }
        }
        if self.quantity == Quantity::Levels {
            return Err(Error::invalid(
                "quantity",
                "level data come from level_diagram",
            ));
        }
        Ok(())
    }

    fn point(&self, a1: f64, a2: Option<f64>) -> OperatingPoint {
        let mut op = self.fixed;
        let mut set = |name: AxisName, v: f64| match name {
            AxisName::EnergyBias => op.bias = FluxBias::from_energy_ghz(v),
            AxisName::SpectroscopyFrequency => op.tones.spectroscopy.frequency = ghz(v),
            AxisName::ProbeFrequency => op.tones.probe.frequency = ghz(v),
            AxisName::DriveAmplitude => op.tones.drive.amplitude = ghz(v),
            AxisName::DrivePower => {}
        };
        set(self.axis1.name, a1);
        if let (Some(ax), Some(v)) = (self.axis2, a2) {
            set(ax.name, v);
        }
        op.correction_order = self.order.at(op.energy_bias());
        op
    }
}

/// Grid of values, axis 1 outer: `values[i1 * n2 + i2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapResult {
    pub quantity: Quantity,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub values: Vec<f64>,
    pub normalization: Normalization,
    /// (ε/h, Ω_R/2π) samples in GHz for overlay curves.
    pub overlay: Vec<[f64; 2]>,
}

impl MapResult {
    pub fn inner_len(&self) -> usize {
        self.axis2.map_or(1, |a| a.points)
    }

    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.inner_len() + i2]
    }

    /// Values along axis 2 at fixed axis-1 index.
    pub fn column(&self, i1: usize) -> &[f64] {
        let n = self.inner_len();
        &self.values[i1 * n..(i1 + 1) * n]
    }

    pub fn check_shape(&self) -> Result<()> {
        let expected = self.axis1.points * self.inner_len();
        if self.values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s: Vec<f64> = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn normalize_columns(values: &mut [f64], inner: usize) {
    for col in values.chunks_mut(inner) {
        let m = median(col);
        if m != 0.0 && m.is_finite() {
            col.iter_mut().for_each(|v| *v /= m);
        }
    }
}

/// Evaluate `spec.quantity` at every grid point, in parallel and in index order.
pub fn evaluate(spec: &SweepSpec) -> Result<MapResult> {
    spec.validate()?;
    let a1 = spec.axis1.values();
    let a2 = spec.axis2.map(|a| a.values());
    let inner = a2.as_ref().map_or(1, Vec::len);
    let values = (0..a1.len() * inner)
        .into_par_iter()
        .map(|k| {
            let (i1, i2) = (k / inner, k % inner);
            let x2 = a2.as_ref().map(|v| v[i2]);
            let op = spec.point(a1[i1], x2);
            let s = solve(&op).map_err(|e| Error::GridPoint {
                axis1: a1[i1],
                axis2: x2.unwrap_or(f64::NAN),
                source: Box::new(e),
            })?;
            Ok(match spec.quantity {
                Quantity::TAbs => s.transmission.norm(),
                Quantity::TPhase => s.transmission.arg(),
                Quantity::Population => s.population,
                Quantity::Levels => unreachable!("rejected by validate"),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut map = MapResult {
        quantity: spec.quantity,
        axis1: spec.axis1,
        axis2: spec.axis2,
        values,
        normalization: spec.normalization,
        overlay: Vec::new(),
    };
    if spec.normalization == Normalization::Column && spec.axis2.is_some() {
        normalize_columns(&mut map.values, inner);
    }
    Ok(map)
}

/// Ω_R(ε) in GHz along an ε axis at the template's drive.
pub fn rabi_overlay(op: &OperatingPoint, bias: &Axis, order: OrderPolicy) -> Result<Vec<[f64; 2]>> {
    bias.values()
        .into_iter()
        .map(|e| {
            let mut p = *op;
            p.bias = FluxBias::from_energy_ghz(e);
            p.correction_order = order.at(p.energy_bias());
            Ok([e, to_ghz(p.dressed()?.shift.rabi_splitting)])
        })
        .collect()
}

/// |t| over (ε, ω_s) at the template's drive amplitude, with the Ω_R overlay.
pub fn spectroscopy_map(
    template: &OperatingPoint,
    bias: Axis,
    spectroscopy: Axis,
    normalization: Normalization,
    order: OrderPolicy,
) -> Result<MapResult> {
    if bias.name != AxisName::EnergyBias || spectroscopy.name != AxisName::SpectroscopyFrequency {
        return Err(Error::invalid(
            "axes",
            "spectroscopy map scans (energy_bias, spectroscopy_frequency)",
        ));
    }
    let spec = SweepSpec {
        axis1: bias,
        axis2: Some(spectroscopy),
        fixed: *template,
        quantity: Quantity::TAbs,
        normalization,
        order,
    };
    let mut map = evaluate(&spec)?;
    map.overlay = rabi_overlay(template, &bias, order)?;
    Ok(map)
}
