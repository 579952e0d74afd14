//! Whitespace-separated snapshot files and run summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::maxent::MaxEntSettings;
use crate::moment_space::{geometric_outputs, ExponentBasis};
use crate::simulator::{fractional_equivalent, CaseConfig, ErrorReport, RunOutput, Snapshot};

pub const COLUMNS: [&str; 14] =
    ["i", "j", "x", "y", "m0", "m1/2", "m1", "m3/2", "u", "v", "alpha", "sigma", "sigma_H", "sigma_G"];

/// Snapshot text: `#` header lines, then one row per cell with 17 significant digits.
///
/// Integer-basis cells are written through their maximum-entropy fractional moments.
pub fn format_snapshot(snap: &Snapshot, cfg: &CaseConfig, dt: f64) -> Result<String> {
    let settings: MaxEntSettings = cfg.maxent.settings();
    let mut s = String::new();
    let _ = writeln!(s, "# case_id = {}", cfg.case_id.name());
    let _ = writeln!(s, "# time = {:.16e}", snap.time);
    let _ = writeln!(s, "# grid = {} {}", snap.nx, snap.ny);
    let _ = writeln!(s, "# basis = {}", cfg.basis.name());
    let _ = writeln!(
        s,
        "# transport_order = {}, evaporation = {:?}, n_neg = {}, splitting = {:?}",
        u8::from(cfg.schemes.transport_order), cfg.schemes.evaporation, cfg.schemes.n_neg, cfg.schemes.splitting
    );
    let _ = writeln!(s, "# dt = {dt:.16e}");
    if cfg.basis == ExponentBasis::Integer {
        let _ = writeln!(s, "# fractional moments closed by maximum entropy");
    }
    let _ = writeln!(s, "# {}", COLUMNS.join(" "));
    for j in 0..snap.ny {
        for i in 0..snap.nx {
            let c = &snap.cells[j * snap.nx + i];
            let m = fractional_equivalent(&c.moments, &settings)?;
            let g = geometric_outputs(&m)?;
            let (x, y) = ((i as f64 + 0.5) * snap.dx, (j as f64 + 0.5) * snap.dy);
            let _ = write!(s, "{i} {j}");
            for v in [
                x,
                y,
                m.values[0],
                m.values[1],
                m.values[2],
                m.values[3],
                c.velocity[0],
                c.velocity[1],
                g.volume_fraction,
                g.interface_area,
                g.mean_curvature,
                g.gauss_curvature,
            ] {
                let _ = write!(s, " {v:.16e}");
            }
            s.push('\n');
        }
    }
    Ok(s)
}

/// Numeric rows of a snapshot file.
pub fn parse_snapshot(text: &str) -> Result<Vec<[f64; 14]>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
        .map(|(n, l)| {
            let v: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("snapshot line {}: {e}", n + 1)))?;
            v.try_into().map_err(|v: Vec<f64>| {
                Error::Config(format!("snapshot line {}: {} columns instead of 14", n + 1, v.len()))
            })
        })
        .collect()
}

pub fn snapshot_file_name(cfg: &CaseConfig, time: f64) -> String {
    format!("{}_{}_t{time:.6}.dat", cfg.case_id.name(), cfg.basis.name())
}

/// `key = value` lines of the scalars and error summaries of a report.
pub fn format_summary(report: &ErrorReport, header: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in header {
        let _ = writeln!(s, "{k} = {v}");
    }
    for (k, v) in &report.scalars {
        let _ = writeln!(s, "{k} = {v:.6e}");
    }
    for series in &report.series {
        let mut worst = [0.0f64; 4];
        for e in &series.errors {
            for k in 0..4 {
                worst[k] = worst[k].max(e[k]);
            }
        }
        let _ = writeln!(
            s,
            "max_rel_error_per_moment_vs_{} = {:.6e} {:.6e} {:.6e} {:.6e}",
            series.reference, worst[0], worst[1], worst[2], worst[3]
        );
    }
    for (nx, e) in &report.l1_errors {
        let _ = writeln!(s, "l1_error_nx{nx} = {e:.6e}");
    }
    if let Some(p) = report.fitted_order {
        let _ = writeln!(s, "fitted_order = {p:.4}");
    }
    s
}

/// Writes the snapshots, the expanded configuration and `summary.txt` of a run.
pub fn write_run(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for snap in &out.snapshots {
        let path = dir.join(snapshot_file_name(&out.config, snap.time));
        fs::write(&path, format_snapshot(snap, &out.config, out.dt)?)?;
        written.push(path);
    }
    let cfg_path = dir.join(format!("{}_{}.toml", out.config.case_id.name(), out.config.basis.name()));
    fs::write(&cfg_path, super::config_to_string(&out.config)?)?;
    written.push(cfg_path);
    let header = vec![
        ("case_id".to_string(), out.config.case_id.name().to_string()),
        ("basis".to_string(), out.config.basis.name().to_string()),
        ("dt".to_string(), format!("{:.16e}", out.dt)),
        ("steps".to_string(), out.steps.to_string()),
    ];
    let summary = dir.join("summary.txt");
    fs::write(&summary, format_summary(&out.report, &header))?;
    written.push(summary);
    Ok(written)
}
