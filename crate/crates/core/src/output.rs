//! CSV writers. All numbers use `{:.16e}` (17 significant digits, round-trip
//! exact for f64) and never depend on locale.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::analysis::{DiagnosticsRow, DiagnosticsSeries, TravelingWaveSlopes};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::integrator::Snapshot;

pub const DIAGNOSTICS_HEADER: &str = "t,mass,momentum,energy,energy_eq4,max_abs,l2_norm,spectrum_tail";
pub const GAMMA_HEADER: &str = "t,gamma";
pub const SPECTRUM_HEADER: &str = "k,abs_psi_hat";
pub const DISPERSION_HEADER: &str = "k,omega_sq,group_velocity,phase_velocity,kdv_omega";
pub const TWAVE_HEADER: &str = "c,radicand,slope_minus,slope_zero,slope_plus,extended_schwartz";
pub const TEMPORAL_HEADER: &str = "dt,error";
pub const SPATIAL_HEADER: &str = "points,spectrum_tail";

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes `header` followed by one line per row.
pub fn write_table<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{header}").map_err(io)?;
    for row in rows {
        writeln!(w, "{row}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_diagnostics(series: &DiagnosticsSeries, path: &Path) -> Result<()> {
    if series.is_empty() {
        return Err(Error::config("diagnostics", "series is empty"));
    }
    write_table(
        path,
        DIAGNOSTICS_HEADER,
        series.rows.iter().map(|r| {
            [r.t, r.mass, r.momentum, r.energy, r.energy_eq4, r.max_abs, r.l2_norm, r.spectrum_tail]
                .map(fmt_num)
                .join(",")
        }),
    )
}

pub fn read_diagnostics(path: &Path) -> Result<DiagnosticsSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose().map_err(|e| Error::io(path, e))?;
    if header.as_deref() != Some(DIAGNOSTICS_HEADER) {
        return Err(Error::config(path.display().to_string(), "unexpected diagnostics header"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let v = line
            .split(',')
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::config(format!("{}:{}", path.display(), i + 2), e.to_string()))?;
        if v.len() != 8 {
            return Err(Error::config(
                format!("{}:{}", path.display(), i + 2),
                format!("expected 8 columns, got {}", v.len()),
            ));
        }
        rows.push(DiagnosticsRow {
            t: v[0],
            mass: v[1],
            momentum: v[2],
            energy: v[3],
            energy_eq4: v[4],
            max_abs: v[5],
            l2_norm: v[6],
            spectrum_tail: v[7],
        });
    }
    Ok(DiagnosticsSeries { rows })
}

pub fn write_gamma(series: &[(f64, f64)], path: &Path) -> Result<()> {
    write_table(
        path,
        GAMMA_HEADER,
        series.iter().map(|(t, g)| format!("{},{}", fmt_num(*t), fmt_num(*g))),
    )
}

pub fn snapshot_column(t: f64) -> String {
    format!("psi@{t:.6}")
}

/// `x` followed by one `psi@<t>` column per snapshot.
pub fn write_snapshots(snapshots: &[Snapshot], grid: &GridSpec, path: &Path) -> Result<()> {
    if let Some(bad) = snapshots.iter().find(|s| s.psi.len() != grid.len()) {
        return Err(Error::Contract(format!(
            "snapshot at t = {} has {} samples, grid has {}",
            bad.t,
            bad.psi.len(),
            grid.len()
        )));
    }
    let header = std::iter::once("x".to_string())
        .chain(snapshots.iter().map(|s| snapshot_column(s.t)))
        .collect::<Vec<_>>()
        .join(",");
    write_table(
        path,
        &header,
        (0..grid.len()).map(|j| {
            std::iter::once(grid.node(j))
                .chain(snapshots.iter().map(|s| s.psi[j]))
                .map(fmt_num)
                .collect::<Vec<_>>()
                .join(",")
        }),
    )
}

/// Columns of a CSV file by header name, parsed as numbers (empty cells become NaN).
pub fn read_columns(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::config(path.display().to_string(), "empty file"))?;
    let mut cols: Vec<(String, Vec<f64>)> = header.split(',').map(|h| (h.to_string(), Vec::new())).collect();
    for line in lines {
        for (cell, col) in line.split(',').zip(cols.iter_mut()) {
            let v = if cell.is_empty() {
                f64::NAN
            } else {
                cell.parse().map_err(|_| {
                    Error::config(path.display().to_string(), format!("not a number: {cell:?}"))
                })?
            };
            col.1.push(v);
        }
    }
    Ok(cols)
}

pub fn twave_row(s: &TravelingWaveSlopes) -> String {
    let (minus, plus) = if s.slopes.len() == 3 {
        (Some(s.slopes[0]), Some(s.slopes[2]))
    } else {
        (None, None)
    };
    format!(
        "{},{},{},{},{},{}",
        fmt_num(s.c),
        fmt_opt(s.radicand),
        fmt_opt(minus),
        fmt_num(0.0),
        fmt_opt(plus),
        s.extended_schwartz
    )
}
