//! Text formats: event files and the coefficient, risk and rate CSVs.
//!
//! CSV floats are written with 17 significant digits, so every value reads
//! back to the same bits.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::analysis::{RatePoint, RateStudy, RiskRow};
use crate::basis::LambdaIndex;
use crate::error::{Error, Result};
use crate::estimator::CoefficientRecord;
use crate::process::PointSample;

pub const COEFFICIENT_HEADER: &str = "j,k,beta_hat,v_hat,v_tilde,eta,kept";
pub const RISK_HEADER: &str = "n,replicates,mc_risk,mc_se,oracle_sum,bound_main,ratio";
pub const RATE_HEADER: &str = "n,mc_risk,mc_se";
const CSV_VERSION: u32 = 1;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Event times from a text file, one per line; `#` lines and blank lines
/// are skipped. Unsorted input is sorted.
pub fn parse_events(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_events_str(&text, path)
}

pub fn parse_events_str(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut times = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: f64 = line.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: format!("expected an event time, found '{line}'"),
        })?;
        if !t.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("event time '{line}' is not finite"),
            });
        }
        times.push(t);
    }
    times.sort_by(f64::total_cmp);
    Ok(times)
}

pub fn read_events(path: &Path, n: u64) -> Result<PointSample> {
    PointSample::new(parse_events(path)?, n)
}

/// Shortest round-trip decimal per event, preceded by a comment header.
pub fn write_events(mut w: impl Write, sample: &PointSample) -> Result<()> {
    match sample.seed() {
        Some(s) => writeln!(w, "# n={} seed={} events={}", sample.n(), s, sample.len())?,
        None => writeln!(w, "# n={} events={}", sample.n(), sample.len())?,
    }
    for t in sample.times() {
        writeln!(w, "{t:?}")?;
    }
    Ok(())
}

fn format_err(schema: &'static str, detail: String) -> Error {
    Error::Format {
        schema,
        version: CSV_VERSION,
        detail,
    }
}

/// Data lines of a CSV after checking the header; `#` lines are returned
/// separately.
/// Numbered data lines and comment lines.
type CsvBody = (Vec<(usize, String)>, Vec<String>);

fn csv_body(r: impl BufRead, schema: &'static str, header: &str) -> Result<CsvBody> {
    let mut lines = r.lines().enumerate();
    let first = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(format_err(schema, "missing header".into())),
    };
    if first.trim_end() != header {
        return Err(format_err(
            schema,
            format!("expected header '{header}', found '{}'", first.trim_end()),
        ));
    }
    let mut rows = Vec::new();
    let mut comments = Vec::new();
    for (i, l) in lines {
        let l = l?;
        let l = l.trim_end();
        if l.is_empty() {
            continue;
        }
        if let Some(c) = l.strip_prefix('#') {
            comments.push(c.trim().to_string());
        } else {
            rows.push((i + 1, l.to_string()));
        }
    }
    Ok((rows, comments))
}

fn fields<'a>(
    schema: &'static str,
    line_no: usize,
    line: &'a str,
    count: usize,
) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != count {
        return Err(format_err(
            schema,
            format!("line {line_no}: expected {count} fields, found {}", f.len()),
        ));
    }
    Ok(f)
}

fn parse_field<T: std::str::FromStr>(
    schema: &'static str,
    line_no: usize,
    name: &str,
    s: &str,
) -> Result<T> {
    s.parse()
        .map_err(|_| format_err(schema, format!("line {line_no}: bad {name} '{s}'")))
}

pub fn write_coefficients(mut w: impl Write, records: &[CoefficientRecord]) -> Result<()> {
    writeln!(w, "{COEFFICIENT_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.lambda.j,
            r.lambda.k,
            fmt_f64(r.beta_hat),
            fmt_f64(r.v_hat),
            fmt_f64(r.v_tilde),
            fmt_f64(r.eta),
            r.kept as u8
        )?;
    }
    Ok(())
}

pub fn read_coefficients(r: impl BufRead) -> Result<Vec<CoefficientRecord>> {
    const S: &str = "coefficients";
    let (rows, _) = csv_body(r, S, COEFFICIENT_HEADER)?;
    rows.iter()
        .map(|(no, line)| {
            let f = fields(S, *no, line, 7)?;
            let kept = match f[6] {
                "0" => false,
                "1" => true,
                other => return Err(format_err(S, format!("line {no}: bad kept flag '{other}'"))),
            };
            Ok(CoefficientRecord {
                lambda: LambdaIndex::new(
                    parse_field(S, *no, "j", f[0])?,
                    parse_field(S, *no, "k", f[1])?,
                ),
                beta_hat: parse_field(S, *no, "beta_hat", f[2])?,
                v_hat: parse_field(S, *no, "v_hat", f[3])?,
                v_tilde: parse_field(S, *no, "v_tilde", f[4])?,
                eta: parse_field(S, *no, "eta", f[5])?,
                kept,
            })
        })
        .collect()
}

pub fn write_risk(mut w: impl Write, rows: &[RiskRow]) -> Result<()> {
    writeln!(w, "{RISK_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n,
            r.replicates,
            fmt_f64(r.mc_risk),
            fmt_f64(r.mc_se),
            fmt_f64(r.oracle_sum),
            fmt_f64(r.bound_main),
            fmt_f64(r.ratio)
        )?;
    }
    Ok(())
}

pub fn read_risk(r: impl BufRead) -> Result<Vec<RiskRow>> {
    const S: &str = "risk";
    let (rows, _) = csv_body(r, S, RISK_HEADER)?;
    rows.iter()
        .map(|(no, line)| {
            let f = fields(S, *no, line, 7)?;
            Ok(RiskRow {
                n: parse_field(S, *no, "n", f[0])?,
                replicates: parse_field(S, *no, "replicates", f[1])?,
                mc_risk: parse_field(S, *no, "mc_risk", f[2])?,
                mc_se: parse_field(S, *no, "mc_se", f[3])?,
                oracle_sum: parse_field(S, *no, "oracle_sum", f[4])?,
                bound_main: parse_field(S, *no, "bound_main", f[5])?,
                ratio: parse_field(S, *no, "ratio", f[6])?,
            })
        })
        .collect()
}

pub fn write_rate(mut w: impl Write, study: &RateStudy) -> Result<()> {
    writeln!(w, "{RATE_HEADER}")?;
    for p in &study.points {
        writeln!(w, "{},{},{}", p.n, fmt_f64(p.mc_risk), fmt_f64(p.mc_se))?;
    }
    writeln!(
        w,
        "# slope={} stderr={}",
        fmt_f64(study.slope),
        fmt_f64(study.stderr)
    )?;
    Ok(())
}

pub fn read_rate(r: impl BufRead) -> Result<RateStudy> {
    const S: &str = "rate";
    let (rows, comments) = csv_body(r, S, RATE_HEADER)?;
    let points = rows
        .iter()
        .map(|(no, line)| {
            let f = fields(S, *no, line, 3)?;
            Ok(RatePoint {
                n: parse_field(S, *no, "n", f[0])?,
                mc_risk: parse_field(S, *no, "mc_risk", f[1])?,
                mc_se: parse_field(S, *no, "mc_se", f[2])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = comments
        .iter()
        .rev()
        .find(|c| c.starts_with("slope="))
        .ok_or_else(|| format_err(S, "missing '# slope=<v> stderr=<v>' line".into()))?;
    let mut slope = None;
    let mut stderr = None;
    for part in summary.split_whitespace() {
        match part.split_once('=') {
            Some(("slope", v)) => slope = Some(parse_field(S, 0, "slope", v)?),
            Some(("stderr", v)) => stderr = Some(parse_field(S, 0, "stderr", v)?),
            _ => return Err(format_err(S, format!("bad summary field '{part}'"))),
        }
    }
    match (slope, stderr) {
        (Some(slope), Some(stderr)) => Ok(RateStudy {
            points,
            slope,
            stderr,
        }),
        _ => Err(format_err(S, "summary line needs slope and stderr".into())),
    }
}
