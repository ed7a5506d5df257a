use std::path::Path;
use std::str::FromStr;

use super::experiments::{CoherenceRow, SweepResult, SweepRow};
use crate::error::{Error, Result};
use crate::estimator::EstimationResult;
use crate::linalg::{CMatrix, C64};
use crate::projection_design::{DesignTrace, ProjectionKind};

pub const SWEEP_HEADER: [&str; 6] = [
    "method",
    "snr_db",
    "mse_ongrid",
    "mse_refined",
    "trials",
    "failed_trials",
];
pub const COHERENCE_HEADER: [&str; 4] = ["method", "P", "iter", "mu_max"];
pub const TRACE_HEADER: [&str; 3] = ["iter", "eta", "mu_max"];
pub const ESTIMATE_HEADER: [&str; 4] = ["k", "grid_index", "nu_initial", "nu_hat"];

/// Upper bound on `rows × cols` accepted by [`parse_complex_matrix`].
pub const MAX_MATRIX_ENTRIES: usize = 1 << 24;

/// Nine significant digits, e.g. `1.23456789e-3`.
pub fn format_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.8e}")
    }
}

fn parse_real(field: &str, line: usize) -> Result<f64> {
    let t = field.trim();
    match t {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        _ => t.parse::<f64>().map_err(|e| parse_error(line, format!("`{t}`: {e}"))),
    }
}

fn parse_usize(field: &str, line: usize) -> Result<usize> {
    let t = field.trim();
    t.parse::<usize>().map_err(|e| parse_error(line, format!("`{t}`: {e}")))
}

fn parse_error(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Renders records as CSV text with a header row.
fn render<I, R>(header: &[&str], records: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    // writes into a Vec cannot fail
    w.write_record(header).expect("in-memory write");
    for r in records {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

/// Reads a header-checked CSV into raw records with their 1-based line
/// numbers.
fn records(text: &str, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let got = reader.headers().map_err(|e| parse_error(1, e.to_string()))?.clone();
    if got.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(parse_error(
            1,
            format!(
                "expected header `{}`, got `{}`",
                header.join(","),
                got.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn parse_kind(field: &str, line: usize) -> Result<ProjectionKind> {
    let t = field.trim();
    ProjectionKind::ALL
        .into_iter()
        .find(|k| k.name() == t)
        .ok_or_else(|| parse_error(line, format!("unknown method `{t}`")))
}

/// Orders rows by method name, then SNR ascending (`inf` last).
fn sorted_rows(rows: &[SweepRow]) -> Vec<&SweepRow> {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.method.name().cmp(b.method.name()).then(a.snr_db.total_cmp(&b.snr_db)));
    sorted
}

pub fn sweep_csv(result: &SweepResult) -> String {
    render(
        &SWEEP_HEADER,
        sorted_rows(&result.rows).into_iter().map(|r| {
            vec![
                r.method.name().to_string(),
                format_real(r.snr_db),
                format_real(r.mse_ongrid),
                format_real(r.mse_refined),
                r.trials.to_string(),
                r.failed_trials.to_string(),
            ]
        }),
    )
}

/// Writes the sweep rows (method, then SNR ascending) with 9 significant
/// digits.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, sweep_csv(result).as_bytes())
}

/// Parses text produced by [`sweep_csv`]. Runtimes are not part of the file
/// and come back empty.
pub fn parse_sweep_csv(text: &str) -> Result<SweepResult> {
    let mut rows = Vec::new();
    for (line, f) in records(text, &SWEEP_HEADER)? {
        let trials = parse_usize(&f[4], line)?;
        let failed_trials = parse_usize(&f[5], line)?;
        let mse_ongrid = parse_real(&f[2], line)?;
        let mse_refined = parse_real(&f[3], line)?;
        for (name, v) in [("mse_ongrid", mse_ongrid), ("mse_refined", mse_refined)] {
            if v < 0.0 || (v.is_nan() && trials > 0) {
                return Err(parse_error(line, format!("{name} must be >= 0, got {v}")));
            }
        }
        rows.push(SweepRow {
            method: parse_kind(&f[0], line)?,
            snr_db: parse_real(&f[1], line)?,
            mse_ongrid,
            mse_refined,
            trials,
            failed_trials,
        });
    }
    Ok(SweepResult {
        rows,
        mean_trial_runtime: Vec::new(),
    })
}

pub fn read_sweep_csv(path: &Path) -> Result<SweepResult> {
    parse_sweep_csv(&read_file(path)?)
}

pub fn coherence_csv(rows: &[CoherenceRow]) -> String {
    render(
        &COHERENCE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.method.name().to_string(),
                r.p.to_string(),
                r.iter.to_string(),
                format_real(r.mu_max),
            ]
        }),
    )
}

pub fn write_coherence_csv(rows: &[CoherenceRow], path: &Path) -> Result<()> {
    write_file(path, coherence_csv(rows).as_bytes())
}

pub fn parse_coherence_csv(text: &str) -> Result<Vec<CoherenceRow>> {
    records(text, &COHERENCE_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(CoherenceRow {
                method: parse_kind(&f[0], line)?,
                p: parse_usize(&f[1], line)?,
                iter: parse_usize(&f[2], line)?,
                mu_max: parse_real(&f[3], line)?,
            })
        })
        .collect()
}

/// Per-iteration `η` and `μ_max` of a design run.
pub fn trace_csv(trace: &DesignTrace) -> String {
    render(
        &TRACE_HEADER,
        trace
            .objective_per_iter
            .iter()
            .zip(&trace.coherence_per_iter)
            .enumerate()
            .map(|(i, (eta, mu))| vec![i.to_string(), format_real(*eta), format_real(*mu)]),
    )
}

pub fn write_trace_csv(trace: &DesignTrace, path: &Path) -> Result<()> {
    write_file(path, trace_csv(trace).as_bytes())
}

pub fn estimate_csv(result: &EstimationResult) -> String {
    render(
        &ESTIMATE_HEADER,
        result.nu_hat.iter().enumerate().map(|(k, nu)| {
            vec![
                k.to_string(),
                result
                    .initial_grid_indices
                    .get(k)
                    .map_or_else(String::new, |p| p.to_string()),
                format_real(result.nu_initial[k]),
                format_real(*nu),
            ]
        }),
    )
}

pub fn write_estimate_csv(result: &EstimationResult, path: &Path) -> Result<()> {
    write_file(path, estimate_csv(result).as_bytes())
}

fn format_complex(z: C64) -> String {
    // 17 significant digits round-trip every f64 exactly
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

/// Complex matrix text: a header line `rows,cols`, then one line per row of
/// comma-separated `re+imj` entries.
pub fn complex_matrix_csv(m: &CMatrix) -> String {
    let mut out = format!("{},{}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = m.row(r).iter().map(|z| format_complex(*z)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_complex_matrix(m: &CMatrix, path: &Path) -> Result<()> {
    write_file(path, complex_matrix_csv(m).as_bytes())
}

fn parse_complex(field: &str, line: usize) -> Result<C64> {
    let t = field.trim();
    if !t.ends_with('j') {
        return Err(parse_error(line, format!("`{t}` is not of the form re+imj")));
    }
    let z = C64::from_str(t).map_err(|e| parse_error(line, format!("`{t}`: {e}")))?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(parse_error(line, format!("`{t}` is not finite")));
    }
    Ok(z)
}

/// Parses [`complex_matrix_csv`] text. Blank lines are ignored.
pub fn parse_complex_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "missing `rows,cols` header"))?;
    let (r, c) = header
        .split_once(',')
        .ok_or_else(|| parse_error(hline, format!("header `{header}` is not `rows,cols`")))?;
    let rows = parse_usize(r, hline)?;
    let cols = parse_usize(c, hline)?;
    if rows == 0 || cols == 0 {
        return Err(parse_error(
            hline,
            format!("matrix must be non-empty, got {rows}×{cols}"),
        ));
    }
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_MATRIX_ENTRIES => {}
        _ => {
            return Err(parse_error(
                hline,
                format!("{rows}×{cols} exceeds the {MAX_MATRIX_ENTRIES}-entry limit"),
            ))
        }
    }
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (line, text) in lines {
        if seen == rows {
            return Err(parse_error(line, format!("more than the declared {rows} rows")));
        }
        let before = data.len();
        for f in text.split(',') {
            data.push(parse_complex(f, line)?);
            if data.len() - before > cols {
                break;
            }
        }
        if data.len() - before != cols {
            return Err(parse_error(line, format!("expected {cols} entries")));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(parse_error(
            text.lines().count().max(1),
            format!("expected {rows} rows, got {seen}"),
        ));
    }
    Ok(CMatrix::from_row_slice(rows, cols, &data))
}

pub fn read_complex_matrix(path: &Path) -> Result<CMatrix> {
    parse_complex_matrix(&read_file(path)?)
}
