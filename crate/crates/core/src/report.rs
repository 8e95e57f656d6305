//! CSV import and export.
//!
//! Floats are written like C's `%.17g` (17 significant digits, `.` decimal
//! separator, no locale), so every value round-trips bit-exactly.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::estimators::{EstimateResult, EstimatorKind, ObservedSeries};
use crate::monte_carlo::{McSummary, SweepRow};
use crate::ou::SimulatedPath;

/// Format `x` with 17 significant digits in the style of `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const PATH_HEADER: &str = "t,x";
pub const DIAGNOSTICS_HEADER: &str = "t,x,dw,dd,dj,jump_count";
pub const ESTIMATE_HEADER: &str = "estimator,a_hat,kept,filtered,threshold,s_t";
pub const SUMMARY_HEADER: &str = "estimator,n_reps,mean,std_dev,avg_filtered,seed";
pub const RAW_HEADER: &str = "rep,estimator,a_hat,std_error,studentized_error";
pub const SWEEP_HEADER: &str = "lambda,mean_mle,std_mle,mean_lse,std_lse,avar_mle,avar_lse";

/// `t,x`, one row per observation.
pub fn write_path_csv<W: Write>(mut w: W, path: &SimulatedPath) -> io::Result<()> {
    writeln!(w, "{PATH_HEADER}")?;
    for (i, x) in path.x.iter().enumerate() {
        writeln!(w, "{},{}", fmt_g17(path.grid.time(i)), fmt_g17(*x))?;
    }
    w.flush()
}

/// `t,x,dw,dd,dj,jump_count`. Row `i` carries the observation at `t_i` and
/// the ground truth of the interval `(t_i, t_{i+1}]`; the final row has empty
/// interval columns. Infinite-activity paths write `inf` as jump count.
pub fn write_diagnostics_csv<W: Write>(mut w: W, path: &SimulatedPath) -> io::Result<()> {
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    let n = path.grid.n();
    for i in 0..=n {
        write!(w, "{},{}", fmt_g17(path.grid.time(i)), fmt_g17(path.x[i]))?;
        if i < n {
            let count = match &path.jump_count {
                Some(c) => c[i].to_string(),
                None => "inf".into(),
            };
            writeln!(
                w,
                ",{},{},{},{}",
                fmt_g17(path.dw[i]),
                fmt_g17(path.dd[i]),
                fmt_g17(path.dj[i]),
                count
            )?;
        } else {
            writeln!(w, ",,,,")?;
        }
    }
    w.flush()
}

pub fn write_estimates_csv<W: Write>(
    mut w: W,
    rows: &[(EstimatorKind, EstimateResult)],
) -> io::Result<()> {
    writeln!(w, "{ESTIMATE_HEADER}")?;
    for (kind, r) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            kind,
            fmt_g17(r.a_hat),
            r.kept,
            r.filtered,
            fmt_g17(r.threshold),
            fmt_g17(r.s_t)
        )?;
    }
    w.flush()
}

/// One row per estimator of each summary, in order.
pub fn write_summary_csv<W: Write>(mut w: W, summaries: &[McSummary]) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in summaries {
        for e in &s.estimators {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                e.kind,
                s.replications,
                fmt_g17(e.mean),
                fmt_g17(e.std_dev),
                fmt_g17(e.avg_filtered),
                s.seed
            )?;
        }
    }
    w.flush()
}

/// Per-replication estimates for histograms; `std_error` is `sqrt(T)(a_hat - a)`.
pub fn write_raw_csv<W: Write>(mut w: W, summaries: &[McSummary]) -> io::Result<()> {
    writeln!(w, "{RAW_HEADER}")?;
    for s in summaries {
        for rep in 0..s.replications as usize {
            for e in &s.estimators {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    rep,
                    e.kind,
                    fmt_g17(e.estimates[rep]),
                    fmt_g17(e.standardized_errors[rep]),
                    fmt_g17(e.studentized_errors[rep])
                )?;
            }
        }
    }
    w.flush()
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_g17(r.lambda),
            fmt_g17(r.mean_mle),
            fmt_g17(r.std_mle),
            fmt_g17(r.mean_lse),
            fmt_g17(r.std_lse),
            fmt_g17(r.avar_mle),
            fmt_g17(r.avar_lse)
        )?;
    }
    w.flush()
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Format { line: u64, msg: String },
    #[error("{0}")]
    Invalid(String),
}

/// Read a `t,x` series. Extra trailing columns (as in the diagnostics
/// export) are ignored.
pub fn read_series_csv<R: Read>(r: R) -> Result<ObservedSeries, ReadError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(r);
    let headers = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    if headers.get(0).map(str::trim) != Some("t") || headers.get(1).map(str::trim) != Some("x") {
        return Err(ReadError::Format {
            line: 1,
            msg: format!("expected header starting with `t,x`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut t = Vec::new();
    let mut x = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |k: usize, name: &str| -> Result<f64, ReadError> {
            let raw = rec.get(k).ok_or_else(|| ReadError::Format {
                line,
                msg: format!("missing column `{name}`"),
            })?;
            raw.trim().parse::<f64>().map_err(|_| ReadError::Format {
                line,
                msg: format!("column `{name}`: cannot parse {raw:?} as a number"),
            })
        };
        t.push(field(0, "t")?);
        x.push(field(1, "x")?);
    }
    ObservedSeries::new(t, x).map_err(|e| ReadError::Invalid(e.to_string()))
}

fn csv_error(e: csv::Error, fallback_line: u64) -> ReadError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ReadError::Io(io),
        kind => ReadError::Format { line, msg: format!("{kind:?}") },
    }
}
