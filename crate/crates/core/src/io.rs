//! CSV tables and JSON sidecars.
//!
//! Data files are UTF-8, comma separated, with a header row and LF line
//! endings. Numbers are written in scientific notation with 9 significant
//! digits. The sidecar carries axes, units, normalization, overlay samples
//! and the resolved configuration.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::sweep::{Axis, AxisName, MapResult, Normalization, Quantity};

pub const SIDECAR_VERSION: u32 = 1;

/// 9 significant digits, scientific; −0 prints as 0.
pub fn format_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

/// Header plus string cells; numeric cells are produced with [`format_f64`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&v| format_f64(v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r.get(k).map_or("", String::as_str);
                cell.trim().parse::<f64>().map_err(|_| {
                    Error::Format(format!(
                        "row {}: `{cell}` in `{name}` is not a number",
                        i + 1
                    ))
                })
            })
            .collect()
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(&self.headers).map_err(csv_err)?;
        for r in &self.rows {
            if r.len() != self.headers.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.headers.len(),
                    got: r.len(),
                });
            }
            out.write_record(r).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
    }

    /// Strict read: header required, every row as wide as the header.
    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(r);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(str::to_owned)
            .collect();
        if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
            return Err(Error::Format("empty header".into()));
        }
        let rows = rdr
            .records()
            .map(|rec| {
                rec.map(|r| r.iter().map(str::to_owned).collect())
                    .map_err(csv_err)
            })
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Self { headers, rows })
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        }
    } else {
        Error::Format(e.to_string())
    }
}

/// `axis1,axis2,value` rows in axis-1-major order; 1D maps omit `axis2`.
pub fn map_table(map: &MapResult) -> Result<Table> {
    map.check_shape()?;
    let mut t = match map.axis2 {
        Some(_) => Table::new(["axis1", "axis2", "value"]),
        None => Table::new(["axis1", "value"]),
    };
    let a1 = map.axis1.values();
    match map.axis2 {
        Some(ax2) => {
            let a2 = ax2.values();
            for (i, x1) in a1.iter().enumerate() {
                for (k, x2) in a2.iter().enumerate() {
                    t.push_numbers(&[*x1, *x2, map.get(i, k)]);
                }
            }
        }
        None => {
            for (i, x1) in a1.iter().enumerate() {
                t.push_numbers(&[*x1, map.values[i]]);
            }
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnInfo {
    pub name: String,
    pub unit: String,
}

impl ColumnInfo {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisInfo {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub unit: String,
}

impl AxisInfo {
    pub fn axis(&self) -> Result<Axis> {
        Axis::new(self.name, self.start, self.stop, self.points)
    }
}

impl From<Axis> for AxisInfo {
    fn from(a: Axis) -> Self {
        Self {
            name: a.name,
            start: a.start,
            stop: a.stop,
            points: a.points,
            unit: a.name.unit().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub format_version: u32,
    pub generator: String,
    pub command: String,
    pub data_file: String,
    pub columns: Vec<ColumnInfo>,
    pub quantity: Option<Quantity>,
    pub axis1: Option<AxisInfo>,
    pub axis2: Option<AxisInfo>,
    pub normalization: Option<Normalization>,
    /// (ε/h, Ω_R/2π) in GHz.
    pub overlay: Vec<[f64; 2]>,
    pub config: RunConfig,
    /// Fields of `config` that took a computed default.
    pub defaulted: Vec<String>,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl Sidecar {
    pub fn new(command: &str, data_file: &str, config: RunConfig, defaulted: Vec<String>) -> Self {
        Self {
            format_version: SIDECAR_VERSION,
            generator: format!("fluxshift {}", env!("CARGO_PKG_VERSION")),
            command: command.into(),
            data_file: data_file.into(),
            columns: Vec::new(),
            quantity: None,
            axis1: None,
            axis2: None,
            normalization: None,
            overlay: Vec::new(),
            config,
            defaulted,
            metadata: BTreeMap::new(),
        }
    }

    /// Fill axes, columns, normalization and overlay from a map.
    pub fn with_map(mut self, map: &MapResult, value_unit: &str) -> Self {
        self.quantity = Some(map.quantity);
        self.axis1 = Some(map.axis1.into());
        self.axis2 = map.axis2.map(Into::into);
        self.normalization = Some(map.normalization);
        self.overlay = map.overlay.clone();
        let mut cols = vec![ColumnInfo::new("axis1", map.axis1.name.unit())];
        if let Some(a2) = map.axis2 {
            cols.push(ColumnInfo::new("axis2", a2.name.unit()));
        }
        cols.push(ColumnInfo::new("value", value_unit));
        self.columns = cols;
        self
    }

    pub fn insert(&mut self, key: &str, value: impl Serialize) {
        self.metadata.insert(
            key.into(),
            serde_json::to_value(value).expect("metadata serializes"),
        );
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let s: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Format(format!("sidecar at `{path}`: {}", e.into_inner()))
        })?;
        if s.format_version != SIDECAR_VERSION {
            return Err(Error::Format(format!(
                "unsupported sidecar version {}",
                s.format_version
            )));
        }
        Ok(s)
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Rebuild a map from its CSV table and sidecar, checking the grid against the axes.
pub fn read_map(table: &Table, sidecar: &Sidecar) -> Result<MapResult> {
    let (Some(a1), Some(quantity)) = (&sidecar.axis1, sidecar.quantity) else {
        return Err(Error::Format("sidecar describes no map".into()));
    };
    let a1 = a1.axis()?;
    let a2 = sidecar.axis2.as_ref().map(AxisInfo::axis).transpose()?;
    let inner = a2.map_or(1, |a| a.points);
    let expected = a1
        .points
        .checked_mul(inner)
        .ok_or_else(|| Error::Format("grid too large".into()))?;
    if table.rows.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: table.rows.len(),
        });
    }
    let x1 = table.column_f64("axis1")?;
    let x2 = match a2 {
        Some(_) => Some(table.column_f64("axis2")?),
        None => None,
    };
    let values = table.column_f64("value")?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-7 * a.abs().max(b.abs()).max(1e-300);
    for k in 0..expected {
        let (i, j) = (k / inner, k % inner);
        let ok1 = close(x1[k], a1.value(i));
        let ok2 = match (&x2, a2) {
            (Some(x2), Some(a2)) => close(x2[k], a2.value(j)),
            _ => true,
        };
        if !(ok1 && ok2) {
            return Err(Error::Format(format!(
                "row {} is off the sidecar grid",
                k + 1
            )));
        }
    }
    Ok(MapResult {
        quantity,
        axis1: a1,
        axis2: a2,
        values,
        normalization: sidecar.normalization.unwrap_or(Normalization::None),
        overlay: sidecar.overlay.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_map() -> MapResult {
        let a1 = Axis::new(AxisName::EnergyBias, -1.0, 1.0, 3).unwrap();
        let a2 = Axis::new(AxisName::SpectroscopyFrequency, 2.0, 3.0, 2).unwrap();
        MapResult {
            quantity: Quantity::TAbs,
            axis1: a1,
            axis2: Some(a2),
            values: vec![1.0, 0.5, 0.25, 0.125, 1.0 / 3.0, 2.0 / 3.0],
            normalization: Normalization::Column,
            overlay: vec![[0.0, 2.97]],
        }
    }

    #[test]
    fn float_format() {
        assert_eq!(format_f64(2.97), "2.97000000e0");
        assert_eq!(format_f64(-0.0576117), "-5.76117000e-2");
        assert_eq!(format_f64(f64::NAN), "NaN");
        assert_eq!(format_f64(-0.0), "0.00000000e0");
    }

    #[test]
    fn csv_layout() {
        let s = map_table(&small_map()).unwrap().to_csv_string().unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("axis1,axis2,value"));
        assert_eq!(
            lines.next(),
            Some("-1.00000000e0,2.00000000e0,1.00000000e0")
        );
        assert!(!s.contains('\r'));
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn map_round_trip() {
        let m = small_map();
        let t = map_table(&m).unwrap();
        let back = Table::read_from(t.to_csv_string().unwrap().as_bytes()).unwrap();
        assert_eq!(back, t);
        let sc =
            Sidecar::new("spectroscopy", "map.csv", RunConfig::default(), vec![]).with_map(&m, "");
        let sc2 = Sidecar::from_json_str(&sc.to_json_string()).unwrap();
        assert_eq!(sc2, sc);
        let m2 = read_map(&back, &sc2).unwrap();
        assert_eq!(m2.axis1, m.axis1);
        for (a, b) in m.values.iter().zip(&m2.values) {
            assert!((a - b).abs() <= 1e-8 * a.abs());
        }
    }

    #[test]
    fn one_dimensional_map() {
        let mut m = small_map();
        m.axis2 = None;
        m.values.truncate(3);
        let t = map_table(&m).unwrap();
        assert_eq!(t.headers, ["axis1", "value"]);
        let sc = Sidecar::new("biastrace", "t.csv", RunConfig::default(), vec![]).with_map(&m, "");
        assert_eq!(read_map(&t, &sc).unwrap().values, m.values);
    }

    #[test]
    fn malformed_inputs() {
        assert!(Table::read_from("".as_bytes()).is_err());
        assert!(Table::read_from("a,b\n1,2,3\n".as_bytes()).is_err());
        let t = Table::read_from("axis1,value\nx,1\n".as_bytes()).unwrap();
        assert!(t.column_f64("axis1").is_err());
        assert!(t.column_f64("nope").is_err());
        let m = small_map();
        let sc =
            Sidecar::new("spectroscopy", "map.csv", RunConfig::default(), vec![]).with_map(&m, "");
        let mut t = map_table(&m).unwrap();
        t.rows.pop();
        assert!(matches!(
            read_map(&t, &sc),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut t = map_table(&m).unwrap();
        t.rows[0][0] = format_f64(5.0);
        assert!(read_map(&t, &sc).is_err());
        assert!(Sidecar::from_json_str("{}").is_err());
        assert!(Sidecar::from_json_str("[1,2]").is_err());
    }

    #[test]
    fn unknown_sidecar_key_rejected() {
        let sc = Sidecar::new("shift", "s.csv", RunConfig::default(), vec![]);
        let mut v: serde_json::Value = serde_json::from_str(&sc.to_json_string()).unwrap();
        v["surprise"] = 1.into();
        assert!(Sidecar::from_json_str(&v.to_string()).is_err());
    }

    proptest! {
        #[test]
        fn numbers_survive_formatting(x in proptest::num::f64::NORMAL) {
            let back: f64 = format_f64(x).parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-9 * x.abs());
        }
    }
}
