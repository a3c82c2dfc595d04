use super::{median, AxisName, MapResult};
use crate::error::{Error, Result};

/// Ridge location in one ε column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePoint {
    /// ε/h, GHz
    pub bias: f64,
    /// Refined ω_s/2π of the spectroscopic feature, GHz
    pub frequency: f64,
    /// |v − median| at the feature
    pub strength: f64,
}

/// Per-column spectroscopic feature positions, skipping columns whose
/// extremum sits on the frequency boundary or stays within 3× the noise floor.
pub fn ridge_positions(map: &MapResult) -> Result<Vec<RidgePoint>> {
    map.check_shape()?;
    let Some(freq_axis) = map.axis2 else {
        return Err(Error::invalid("map", "ridge extraction needs a 2D map"));
    };
    if map.axis1.name != AxisName::EnergyBias || freq_axis.name != AxisName::SpectroscopyFrequency {
        return Err(Error::invalid(
            "map",
            "ridge extraction needs (energy_bias, spectroscopy_frequency) axes",
        ));
    }
    let n = freq_axis.points;
    let devs: Vec<Vec<f64>> = (0..map.axis1.points)
        .map(|i| {
            let col = map.column(i);
            let m = median(col);
            col.iter().map(|v| (v - m).abs()).collect()
        })
        .collect();
    let all: Vec<f64> = devs.iter().flatten().copied().collect();
    let floor = median(&all);
    let step = freq_axis.step();
    let mut out = Vec::new();
    for (i, dev) in devs.iter().enumerate() {
        let (k, &peak) = dev
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("axis has at least two points");
        if k == 0 || k + 1 == n || !(peak > 3.0 * floor) || !peak.is_finite() {
            continue;
        }
        let (y0, y1, y2) = (dev[k - 1], peak, dev[k + 1]);
        let curv = y0 - 2.0 * y1 + y2;
        let offset = if curv < 0.0 {
            (0.5 * (y0 - y2) / curv).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        out.push(RidgePoint {
            bias: map.axis1.value(i),
            frequency: freq_axis.value(k) + offset * step,
            strength: peak,
        });
    }
    Ok(out)
}

/// Minimum over ε of the located ridge, GHz.
pub fn extract_min_gap(map: &MapResult) -> Result<f64> {
    let ridge = ridge_positions(map)?;
    ridge
        .iter()
        .map(|r| r.frequency)
        .min_by(f64::total_cmp)
        .ok_or_else(|| {
            Error::RidgeNotFound("no column has a feature above 3× the noise floor".into())
        })
}
