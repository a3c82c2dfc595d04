use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};

use fluxshift::config::Resolved;
use fluxshift::io::{format_f64, map_table, ColumnInfo, Sidecar, Table};
use fluxshift::oracle::compare::{
    population_check, rate_check, shift_check, sideband_check, transmission_check,
};
use fluxshift::oracle::{Comparison, EvolveConfig};
use fluxshift::sweep::{
    bias_trace, bias_trace_by_amplitude, drive_from_power, extract_min_gap, find_dips,
    level_diagram, spectroscopy_map, threshold_drive, AxisName, MapResult,
};
use fluxshift::units::{to_ghz, to_mhz};
use fluxshift::{OperatingPoint, ShiftResult};

use crate::CheckArg;

/// Dips shallower than this fraction of |t| are ignored.
const DIP_PROMINENCE: f64 = 1e-3;

pub struct Context {
    pub resolved: Resolved,
    pub out: PathBuf,
}

impl Context {
    fn template(&self) -> Result<OperatingPoint> {
        Ok(self.resolved.config.operating_point()?)
    }

    fn sidecar(&self, command: &str, data_file: &str) -> Sidecar {
        Sidecar::new(
            command,
            data_file,
            self.resolved.config.clone(),
            self.resolved.defaulted.clone(),
        )
    }

    fn emit(&self, stem: &str, table: &Table, sidecar: &Sidecar) -> Result<PathBuf> {
        let csv = self.out.join(format!("{stem}.csv"));
        table
            .write_path(&csv)
            .with_context(|| format!("writing {}", csv.display()))?;
        let json = self.out.join(format!("{stem}.json"));
        sidecar
            .write_path(&json)
            .with_context(|| format!("writing {}", json.display()))?;
        Ok(csv)
    }

    fn emit_map(
        &self,
        command: &str,
        stem: &str,
        map: &MapResult,
        unit: &str,
        extra: impl FnOnce(&mut Sidecar),
    ) -> Result<PathBuf> {
        let mut sc = self
            .sidecar(command, &format!("{stem}.csv"))
            .with_map(map, unit);
        extra(&mut sc);
        self.emit(stem, &map_table(map)?, &sc)
    }
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

pub fn levels(ctx: &Context) -> Result<()> {
    let c = &ctx.resolved.config;
    let bias = c.sweep.level_bias_ghz.axis(AxisName::EnergyBias)?;
    let amps = c
        .sweep
        .level_amplitudes_ghz
        .axis(AxisName::DriveAmplitude)?;
    let d = level_diagram(&ctx.template()?, bias, amps, c.mode.correction_order)?;
    for (stem, map, unit) in [
        ("levels_upper", &d.upper, "GHz"),
        ("levels_lower", &d.lower, "GHz"),
        ("levels_population", &d.population, ""),
    ] {
        let p = ctx.emit_map("levels", stem, map, unit, |sc| {
            sc.insert(
                "spectroscopy_frequency_ghz",
                fluxshift::sweep::LEVEL_SPECTROSCOPY_FREQUENCY,
            );
            sc.insert(
                "spectroscopy_amplitude_ghz",
                fluxshift::sweep::LEVEL_SPECTROSCOPY_AMPLITUDE,
            );
        })?;
        announce(&p);
    }
    Ok(())
}

pub fn spectroscopy(ctx: &Context) -> Result<()> {
    let c = &ctx.resolved.config;
    let bias = c.sweep.bias_ghz.axis(AxisName::EnergyBias)?;
    let spec = c
        .sweep
        .spectroscopy_ghz
        .axis(AxisName::SpectroscopyFrequency)?;
    let map = spectroscopy_map(
        &ctx.template()?,
        bias,
        spec,
        c.mode.normalization,
        c.mode.correction_order,
    )?;
    let gap = extract_min_gap(&map);
    match &gap {
        Ok(g) => println!("min gap: {} GHz", format_f64(*g)),
        Err(e) => println!("min gap: {e}"),
    }
    let p = ctx.emit_map("spectroscopy", "spectroscopy", &map, "", |sc| {
        sc.insert("drive_amplitude_ghz", c.tones.drive_amplitude_ghz);
        sc.insert("min_gap_ghz", gap.as_ref().ok());
    })?;
    announce(&p);
    Ok(())
}

pub fn biastrace(ctx: &Context) -> Result<()> {
    let c = &ctx.resolved.config;
    let template = ctx.template()?;
    let bias = c.sweep.trace_bias_ghz.axis(AxisName::EnergyBias)?;
    let order = c.mode.correction_order;
    let traces = match &c.sweep.trace_powers_dbm {
        Some(p) => bias_trace(&template, bias, p, &c.device_geometry()?, order)?,
        None => bias_trace_by_amplitude(&template, bias, &c.sweep.trace_amplitudes_ghz, order)?,
    };
    let threshold = to_ghz(threshold_drive(&template)?);
    println!("threshold drive: {} GHz", format_f64(threshold));
    let mut summary = Table::new([
        "trace",
        "drive_amplitude",
        "power_dbm",
        "dip_count",
        "dip_bias",
        "dip_value",
        "prominence",
    ]);
    for (k, t) in traces.iter().enumerate() {
        let map = t.map.as_ref().expect("traces carry their map");
        let dips = find_dips(map, DIP_PROMINENCE)?;
        let power = t.power_dbm.map_or(String::new(), format_f64);
        for d in &dips {
            summary.push(vec![
                k.to_string(),
                format_f64(t.drive_amplitude),
                power.clone(),
                dips.len().to_string(),
                format_f64(d.bias),
                format_f64(d.value),
                format_f64(d.prominence),
            ]);
        }
        println!(
            "trace {k}: Ω_d/2π = {} GHz, {} dip(s) at ε/h = {:?} GHz",
            format_f64(t.drive_amplitude),
            dips.len(),
            dips.iter().map(|d| format_f64(d.bias)).collect::<Vec<_>>()
        );
        let stem = format!("biastrace_{k:02}");
        let p = ctx.emit_map("biastrace", &stem, map, "", |sc| {
            sc.insert("drive_amplitude_ghz", t.drive_amplitude);
            sc.insert("power_dbm", t.power_dbm);
            sc.insert("dips", &dips);
            sc.insert("threshold_drive_ghz", threshold);
        })?;
        announce(&p);
    }
    let mut sc = ctx.sidecar("biastrace", "biastrace_dips.csv");
    sc.columns = vec![
        ColumnInfo::new("trace", ""),
        ColumnInfo::new("drive_amplitude", "GHz"),
        ColumnInfo::new("power_dbm", "dBm"),
        ColumnInfo::new("dip_count", ""),
        ColumnInfo::new("dip_bias", "GHz"),
        ColumnInfo::new("dip_value", ""),
        ColumnInfo::new("prominence", ""),
    ];
    sc.insert("threshold_drive_ghz", threshold);
    announce(&ctx.emit("biastrace_dips", &summary, &sc)?);
    Ok(())
}

pub fn calibrate(ctx: &Context) -> Result<()> {
    let c = &ctx.resolved.config;
    let template = ctx.template()?;
    let geometry = c.device_geometry()?;
    let powers = c.sweep.calibration_powers_dbm.axis(AxisName::DrivePower)?;
    let wd = template.tones.drive.frequency;
    let mut table = Table::new(["power_dbm", "drive_amplitude", "omega_ac", "rabi_splitting"]);
    for p in powers.values() {
        let w = drive_from_power(p, wd, &geometry)?;
        let s = ShiftResult::evaluate(&template.qubit, 0.0, w, wd)?;
        table.push_numbers(&[p, to_ghz(w), to_ghz(s.omega_ac), to_ghz(s.rabi_splitting)]);
    }
    let mut sc = ctx.sidecar("calibrate", "calibration.csv");
    sc.axis1 = Some(powers.into());
    sc.columns = vec![
        ColumnInfo::new("power_dbm", "dBm"),
        ColumnInfo::new("drive_amplitude", "GHz"),
        ColumnInfo::new("omega_ac", "GHz"),
        ColumnInfo::new("rabi_splitting", "GHz"),
    ];
    sc.insert("geometry", geometry);
    sc.insert("bias_ghz", 0.0);
    let p = ctx.emit("calibration", &table, &sc)?;
    if c.geometry.calibration_reference.is_none() {
        println!(
            "note: calibration factor {} is uncalibrated",
            c.geometry.calibration
        );
    }
    announce(&p);
    Ok(())
}

pub fn shift(ctx: &Context) -> Result<()> {
    let op = ctx.template()?;
    let d = op.dressed()?;
    let s = d.shift;
    let r = d.rates;
    let rows: [(&str, f64, &str); 14] = [
        ("bare_splitting", to_ghz(s.bare_splitting), "GHz"),
        ("bar_drive", to_ghz(s.bar_drive), "GHz"),
        ("omega_ac", to_ghz(s.omega_ac), "GHz"),
        ("rabi_splitting", to_ghz(s.rabi_splitting), "GHz"),
        ("alpha", s.alpha, ""),
        ("beta", s.beta, ""),
        ("a_factor", s.a_factor, ""),
        ("b_factor", s.b_factor, ""),
        ("c_factor", s.c_factor, ""),
        ("relaxation_hat", to_mhz(r.relaxation_hat), "MHz"),
        ("excitation_hat", to_mhz(r.excitation_hat), "MHz"),
        ("dephasing_hat", to_mhz(r.dephasing_hat), "MHz"),
        ("decoherence_hat", to_mhz(r.decoherence_hat()), "MHz"),
        ("population_decay", to_mhz(r.population_decay()), "MHz"),
    ];
    let mut table = Table::new(["quantity", "value", "unit"]);
    for (name, v, unit) in rows {
        println!("{name:>17} = {} {unit}", format_f64(v));
        table.push(vec![name.into(), format_f64(v), unit.into()]);
    }
    let mut sc = ctx.sidecar("shift", "shift.csv");
    sc.columns = vec![
        ColumnInfo::new("quantity", ""),
        ColumnInfo::new("value", ""),
        ColumnInfo::new("unit", ""),
    ];
    sc.insert("correction_order", op.correction_order);
    announce(&ctx.emit("shift", &table, &sc)?);
    Ok(())
}

fn comparison_table(c: &Comparison) -> Table {
    let mut t = Table::new([
        "x",
        "component",
        "analytic_re",
        "analytic_im",
        "oracle_re",
        "oracle_im",
        "deviation",
        "bound",
    ]);
    for r in &c.rows {
        t.push(vec![
            format_f64(r.x),
            r.component.clone(),
            format_f64(r.analytic.re),
            format_f64(r.analytic.im),
            format_f64(r.oracle.re),
            format_f64(r.oracle.im),
            format_f64(r.deviation),
            r.bound.map_or(String::new(), format_f64),
        ]);
    }
    t
}

/// Real part for real quantities, modulus otherwise.
fn show(z: fluxshift::Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6e}", z.re)
    } else {
        format!("|{:.6e}|", z.norm())
    }
}

pub fn oracle_compare(ctx: &Context, check: CheckArg) -> Result<()> {
    let c = &ctx.resolved.config;
    let op = ctx.template()?;
    let evolve = EvolveConfig::default();
    let biases = &c.oracle.bias_points_ghz;
    let amps = &c.oracle.drive_amplitudes_ghz;
    let cmp = match check {
        CheckArg::Population => population_check(&op, biases, &evolve)?,
        CheckArg::Sidebands => sideband_check(&op, biases, &evolve)?,
        CheckArg::Shift => shift_check(&op, amps)?,
        CheckArg::Rates => rate_check(&op, amps, &evolve)?,
        CheckArg::Transmission => {
            let mut p = op;
            let q = c.oracle.quality_factor.expect("resolved");
            p.resonator = p.resonator.with_quality_factor(q);
            let probe = c
                .sweep
                .probe_ghz
                .expect("resolved")
                .axis(AxisName::ProbeFrequency)?;
            transmission_check(&p, &probe.values(), c.oracle.fock_dim, &evolve)?
        }
    };
    let name = cmp.check.name();
    let (xname, xunit) = cmp.check.abscissa();
    println!(
        "{:>15} {:>14} {:>16} {:>16} {:>11}",
        xname, "component", "analytic", "oracle", "deviation"
    );
    for r in &cmp.rows {
        println!(
            "{:>15} {:>14} {:>16} {:>16} {:>11}",
            format!("{:.6}", r.x),
            r.component,
            show(r.analytic),
            show(r.oracle),
            format!("{:.3e}", r.deviation)
        );
    }
    println!(
        "max {} deviation ({name}): {}",
        cmp.check.deviation_kind(),
        format_f64(cmp.max_deviation())
    );
    let stem = format!("oracle_{name}");
    let mut sc = ctx.sidecar("oracle-compare", &format!("{stem}.csv"));
    sc.columns = vec![
        ColumnInfo::new("x", xunit),
        ColumnInfo::new("component", ""),
        ColumnInfo::new("analytic_re", ""),
        ColumnInfo::new("analytic_im", ""),
        ColumnInfo::new("oracle_re", ""),
        ColumnInfo::new("oracle_im", ""),
        ColumnInfo::new("deviation", cmp.check.deviation_kind()),
        ColumnInfo::new("bound", ""),
    ];
    sc.insert("check", cmp.check);
    sc.insert("abscissa", xname);
    sc.insert("max_deviation", cmp.max_deviation());
    sc.insert("drive_amplitude_ghz", to_ghz(op.tones.drive.amplitude));
    sc.insert("energy_bias_ghz", to_ghz(op.energy_bias()));
    announce(&ctx.emit(&stem, &comparison_table(&cmp), &sc)?);
    Ok(())
}
