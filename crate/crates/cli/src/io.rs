//! Dataset readers and result writers.
//!
//! Datasets are CSV (first column time, one column per signal, optional
//! header) or JSON (an array of `[t, f1, .., fM]` records). Missing samples
//! are empty cells, `NaN`, or JSON `null`.
//!
//! Floats are written with 17 significant digits, which round-trips `f64`
//! exactly.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mahm::{
    DecompositionResult64, Diagnostics, IngestOptions, PhaseFunction64, SignalEnsemble64,
    SolverMode,
};
use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{CliError, Result};

pub fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_cell(cell: &str, row: usize) -> Result<f64> {
    let s = cell.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("nan") {
        return Ok(f64::NAN);
    }
    s.parse().map_err(|_| CliError::Parse {
        row,
        message: format!("`{s}` is not a number"),
    })
}

/// Turns `[t, f1, .., fM]` records into an ensemble. `lines[i]` is the
/// source line of record `i`, used in error reports.
fn assemble(records: Vec<Vec<f64>>, lines: Vec<usize>, center: bool) -> Result<SignalEnsemble64> {
    let Some(first) = records.first() else {
        return Err(mahm::Error::ShapeMismatch {
            row: 1,
            expected: 2,
            found: 0,
        }
        .into());
    };
    let width = first.len();
    if width < 2 {
        return Err(mahm::Error::ShapeMismatch {
            row: lines[0],
            expected: 2,
            found: width,
        }
        .into());
    }
    let mut times = Vec::with_capacity(records.len());
    let mut rows = vec![Vec::with_capacity(records.len()); width - 1];
    for (rec, &line) in records.iter().zip(&lines) {
        if rec.len() != width {
            return Err(mahm::Error::ShapeMismatch {
                row: line,
                expected: width,
                found: rec.len(),
            }
            .into());
        }
        if rec[0].is_nan() {
            return Err(CliError::Parse {
                row: line,
                message: "time stamp is missing".into(),
            });
        }
        times.push(rec[0]);
        for (row, &v) in rows.iter_mut().zip(&rec[1..]) {
            row.push(v);
        }
    }
    Ok(SignalEnsemble64::ingest(
        &times,
        &rows,
        None,
        IngestOptions { center },
    )?)
}

pub fn read_csv_dataset(path: &Path, center: bool) -> Result<SignalEnsemble64> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Parse {
            row: e.position().map_or(i + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        // A header is a first line whose leading field is not a number.
        if i == 0
            && rec
                .get(0)
                .is_some_and(|c| !c.is_empty() && c.parse::<f64>().is_err())
        {
            continue;
        }
        let vals = rec
            .iter()
            .map(|c| parse_cell(c, line))
            .collect::<Result<Vec<_>>>()?;
        records.push(vals);
        lines.push(line);
    }
    assemble(records, lines, center)
}

pub fn read_json_dataset(path: &Path, center: bool) -> Result<SignalEnsemble64> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw: Vec<Vec<Option<f64>>> = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        row: e.line(),
        message: e.to_string(),
    })?;
    let lines = (1..=raw.len()).collect();
    let records = raw
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
        .collect();
    assemble(records, lines, center)
}

/// Picks the reader from the extension: `.json` is JSON, anything else CSV.
pub fn read_dataset(path: &Path, center: bool) -> Result<SignalEnsemble64> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => read_json_dataset(path, center),
        _ => read_csv_dataset(path, center),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_rows<W: Write>(
    path: &Path,
    mut w: W,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let io = |e| CliError::io(path, e);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for r in rows {
        writeln!(w, "{}", r.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn numbered(prefix: &str, m: usize) -> impl Iterator<Item = String> + '_ {
    (1..=m).map(move |j| format!("{prefix}{j}"))
}

/// Physical times and uncentered values, missing samples as empty cells.
pub fn write_dataset(path: &Path, ensemble: &SignalEnsemble64) -> Result<()> {
    let t = ensemble.physical_times();
    let v = ensemble.values() + &ensemble.offsets().view().insert_axis(ndarray::Axis(1));
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(numbered("f", ensemble.n_signals()))
        .collect();
    let rows = (0..t.len()).map(|i| {
        std::iter::once(fmt(t[i]))
            .chain(v.column(i).iter().map(|&x| fmt(x)))
            .collect()
    });
    write_rows(path, create(path)?, &header, rows)
}

/// Instantaneous frequency in rad per physical time unit.
fn physical_frequency(phase: &PhaseFunction64, ensemble: &SignalEnsemble64) -> Array1<f64> {
    phase.frequency() / ensemble.time_span()
}

/// One row per component and sample:
/// `component,t,theta,if_hz,if_rad_s,a_1..a_M,b_1..b_M`.
pub fn write_components(
    path: &Path,
    result: &DecompositionResult64,
    ensemble: &SignalEnsemble64,
) -> Result<()> {
    let m = ensemble.n_signals();
    let t = ensemble.physical_times();
    let header: Vec<String> = ["component", "t", "theta", "if_hz", "if_rad_s"]
        .into_iter()
        .map(String::from)
        .chain(numbered("a_", m))
        .chain(numbered("b_", m))
        .collect();
    let rows = result.components.iter().enumerate().flat_map(|(k, c)| {
        let w = physical_frequency(&c.phase, ensemble);
        let t = &t;
        (0..t.len()).map(move |i| {
            [
                k.to_string(),
                fmt(t[i]),
                fmt(c.phase.theta()[i]),
                fmt(w[i] / (2.0 * PI)),
                fmt(w[i]),
            ]
            .into_iter()
            .chain(c.envelopes_a.column(i).iter().map(|&x| fmt(x)))
            .chain(c.envelopes_b.column(i).iter().map(|&x| fmt(x)))
            .collect()
        })
    });
    write_rows(path, create(path)?, &header, rows)
}

pub fn write_residuals(
    path: &Path,
    result: &DecompositionResult64,
    ensemble: &SignalEnsemble64,
) -> Result<()> {
    let t = ensemble.physical_times();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(numbered("r_", ensemble.n_signals()))
        .collect();
    let rows = (0..t.len()).map(|i| {
        std::iter::once(fmt(t[i]))
            .chain(result.residuals.column(i).iter().map(|&x| fmt(x)))
            .collect()
    });
    write_rows(path, create(path)?, &header, rows)
}

/// Outlier estimates of robust runs: `component,t,z_1..z_M`. Returns
/// `false` without writing when no component carries any.
pub fn write_outliers(
    path: &Path,
    result: &DecompositionResult64,
    ensemble: &SignalEnsemble64,
) -> Result<bool> {
    if result.components.iter().all(|c| c.outliers.is_none()) {
        return Ok(false);
    }
    let t = ensemble.physical_times();
    let header: Vec<String> = ["component", "t"]
        .into_iter()
        .map(String::from)
        .chain(numbered("z_", ensemble.n_signals()))
        .collect();
    let rows = result.components.iter().enumerate().flat_map(|(k, c)| {
        let t = &t;
        c.outliers.iter().flat_map(move |z| {
            (0..t.len()).map(move |i| {
                [k.to_string(), fmt(t[i])]
                    .into_iter()
                    .chain(z.column(i).iter().map(|&x| fmt(x)))
                    .collect()
            })
        })
    });
    write_rows(path, create(path)?, &header, rows)?;
    Ok(true)
}

/// `t,omega_1,f1_hz,tension`.
pub fn write_tension(
    path: &Path,
    t: &Array1<f64>,
    omega_1: &Array1<f64>,
    tension: &Array1<f64>,
) -> Result<()> {
    let header: Vec<String> = ["t", "omega_1", "f1_hz", "tension"]
        .map(String::from)
        .to_vec();
    let rows = (0..t.len()).map(|i| {
        vec![
            fmt(t[i]),
            fmt(omega_1[i]),
            fmt(omega_1[i] / (2.0 * PI)),
            fmt(tension[i]),
        ]
    });
    write_rows(path, create(path)?, &header, rows)
}

#[derive(Debug, Serialize)]
pub struct RunReport<'a, D: Serialize> {
    /// `"ok"` or `"unconverged"`.
    pub status: &'a str,
    pub mode: SolverMode,
    pub n_signals: usize,
    pub n_samples: usize,
    pub time_origin: f64,
    pub time_span: f64,
    pub diagnostics: &'a D,
}

pub type DecompositionReport<'a> = RunReport<'a, Diagnostics>;

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

/// One component read back from `components.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTable {
    pub t: Array1<f64>,
    pub theta: Array1<f64>,
    pub if_hz: Array1<f64>,
    pub if_rad_s: Array1<f64>,
    /// `M × N`.
    pub a: Array2<f64>,
    pub b: Array2<f64>,
}

pub fn read_components(path: &Path) -> Result<Vec<ComponentTable>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let width = reader
        .headers()
        .map_err(|e| CliError::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .len();
    if width < 7 || (width - 5) % 2 != 0 {
        return Err(CliError::Parse {
            row: 1,
            message: format!("unexpected components header with {width} columns"),
        });
    }
    let m = (width - 5) / 2;
    // component index -> rows of numbers after the index
    let mut groups: Vec<Vec<Vec<f64>>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| CliError::Parse {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != width {
            return Err(mahm::Error::ShapeMismatch {
                row,
                expected: width,
                found: rec.len(),
            }
            .into());
        }
        let k: usize = rec[0].parse().map_err(|_| CliError::Parse {
            row,
            message: format!("bad component index `{}`", &rec[0]),
        })?;
        let vals = rec
            .iter()
            .skip(1)
            .map(|c| parse_cell(c, row))
            .collect::<Result<Vec<_>>>()?;
        if k >= groups.len() {
            groups.resize(k + 1, Vec::new());
        }
        groups[k].push(vals);
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            let col = |c: usize| g.iter().map(|r| r[c]).collect::<Array1<f64>>();
            ComponentTable {
                t: col(0),
                theta: col(1),
                if_hz: col(2),
                if_rad_s: col(3),
                a: Array2::from_shape_fn((m, n), |(j, i)| g[i][4 + j]),
                b: Array2::from_shape_fn((m, n), |(j, i)| g[i][4 + m + j]),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            f64::MAX,
        ] {
            assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt(f64::NAN), "");
    }
}
