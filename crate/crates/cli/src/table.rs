//! CSV input and output.

use crate::error::{CliError, CliResult};
use mp_core::curves::Polyline;
use mp_core::experiments::RateReport;
use mp_core::{DiscreteMeasure, Points, SolverTrace};
use std::path::Path;

fn writer(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))
}

fn write_rows(path: &Path, header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(&header).map_err(|e| CliError::write(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::write(path, e))?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

fn coord_header(d: usize) -> Vec<String> {
    (1..=d).map(|a| format!("x{a}")).collect()
}

pub fn write_points(path: &Path, points: &Points) -> CliResult<()> {
    write_rows(
        path,
        coord_header(points.dim()),
        points.iter().map(|p| p.iter().map(f64::to_string).collect()),
    )
}

pub fn write_measure(path: &Path, mu: &DiscreteMeasure) -> CliResult<()> {
    let mut header = coord_header(mu.dim());
    header.push("w".into());
    write_rows(
        path,
        header,
        (0..mu.len()).map(|i| {
            let mut r: Vec<String> = mu.point(i).iter().map(f64::to_string).collect();
            r.push(mu.weights()[i].to_string());
            r
        }),
    )
}

/// Reads points `x1..xd` with an optional trailing weight column `w`.
///
/// Without weights every point gets mass `1/n`.
pub fn read_measure(path: &Path) -> CliResult<DiscreteMeasure> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::read(path, e))?;
    let header = r.headers().map_err(|e| CliError::read(path, e))?.clone();
    let weighted = header.iter().next_back().map(|h| h.trim() == "w").unwrap_or(false);
    let d = header.len() - weighted as usize;
    if d == 0 {
        return Err(CliError::Validation(format!("{}: no coordinate columns", path.display())));
    }
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::read(path, e))?;
        let vals = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Validation(format!("{} row {}: {e}", path.display(), line + 1)))?;
        if vals.len() != header.len() {
            return Err(CliError::Validation(format!("{} row {}: wrong column count", path.display(), line + 1)));
        }
        coords.extend_from_slice(&vals[..d]);
        if weighted {
            weights.push(vals[d]);
        }
    }
    let n = coords.len() / d;
    if !weighted {
        weights = vec![1.0 / n.max(1) as f64; n];
    }
    Ok(DiscreteMeasure::new(Points::new(d, coords)?, weights)?)
}

pub fn read_points(path: &Path) -> CliResult<Points> {
    Ok(read_measure(path)?.points().clone())
}

/// Rows `iteration, J, step_norm`; row 0 is the start and has no step.
pub fn write_trace(path: &Path, trace: &SolverTrace) -> CliResult<()> {
    let header = vec!["iteration".into(), "J".into(), "step_norm".into()];
    let start = std::iter::once(vec!["0".into(), trace.initial_energy.to_string(), String::new()]);
    let steps = trace
        .energies
        .iter()
        .zip(&trace.step_norms)
        .enumerate()
        .map(|(k, (j, s))| vec![(k + 1).to_string(), j.to_string(), s.to_string()]);
    write_rows(path, header, start.chain(steps))
}

/// Reads back the `J` column of a trace file.
pub fn read_trace_energies(path: &Path) -> CliResult<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::read(path, e))?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::read(path, e))?;
            rec.get(1)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CliError::Validation(format!("{}: bad J value", path.display())))
        })
        .collect()
}

/// Rows `t, x1..xd` of a timed polyline.
pub fn write_curve(path: &Path, curve: &Polyline) -> CliResult<()> {
    let mut header = vec!["t".to_string()];
    header.extend(coord_header(curve.points.dim()));
    write_rows(
        path,
        header,
        curve.times.iter().zip(curve.points.iter()).map(|(t, p)| {
            let mut r = vec![t.to_string()];
            r.extend(p.iter().map(f64::to_string));
            r
        }),
    )
}

/// Per-sample rows `size, trial, w1, bound`.
pub fn write_rate_samples(path: &Path, report: &RateReport) -> CliResult<()> {
    let header = ["size", "trial", "w1", "bound"].map(String::from).to_vec();
    write_rows(
        path,
        header,
        report
            .samples
            .iter()
            .map(|s| vec![s.size.to_string(), s.trial.to_string(), s.w1.to_string(), s.bound.to_string()]),
    )
}

/// Whitespace-separated `size mean_w1 bound` with a fitted-slope comment, for gnuplot.
pub fn write_gnuplot(path: &Path, report: &RateReport, label: &str) -> CliResult<()> {
    let mut s = format!(
        "# {label}, d = {}\n# slope {} intercept {} r2 {}\n# {label} mean_w1 bound\n",
        report.d, report.fit.slope, report.fit.intercept, report.fit.r2
    );
    for &(size, mean) in &report.means {
        let bound = report
            .samples
            .iter()
            .find(|x| x.size == size)
            .map(|x| x.bound)
            .unwrap_or(f64::NAN);
        s.push_str(&format!("{size} {mean} {bound}\n"));
    }
    std::fs::write(path, s).map_err(|e| CliError::write(path, e))
}
