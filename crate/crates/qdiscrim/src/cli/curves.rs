//! Per-scheme success/failure curves and their CSV/JSON serialisation.
//!
//! CSV schema: `scheme,N,theta,fidelity,p0,p_success,p_error`, one row per
//! (scheme, N), floats rendered as shortest round-trip decimals so that
//! `parse(write(curves))` reproduces every bit.

use crate::adaptive::{self, AdaptiveError};
use crate::helstrom::{self, HelstromError};
use crate::qdg::{self, QdgError};
use crate::sim::Scheme;
use crate::states::{NoiseModel, SignalEnsemble};
use crate::voting::{self, VotingError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("scheme `{0}` has no exact route; use `qdiscrim mc`")]
    NoExactRoute(Scheme),
    #[error(transparent)]
    Adaptive(#[from] AdaptiveError),
    #[error(transparent)]
    Qdg(#[from] QdgError),
    #[error(transparent)]
    Voting(#[from] VotingError),
    #[error(transparent)]
    Helstrom(#[from] HelstromError),
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct CsvParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: u32,
    pub p_success: f64,
    pub p_error: f64,
}

/// One scheme's exact success/failure curve at fixed (theta, F, p0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeCurve {
    pub scheme: Scheme,
    pub theta: f64,
    pub fidelity: f64,
    pub prior0: f64,
    pub rows: Vec<CurvePoint>,
}

/// Evaluate a scheme's exact route over `N = 1..=n_max`.
pub fn evaluate_curve(
    scheme: Scheme,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
    n_max: u32,
) -> Result<SchemeCurve, CurveError> {
    assert!(n_max >= 1);
    let successes: Vec<f64> = match scheme {
        Scheme::Adaptive => adaptive::success_dp_curve(n_max, ens, noise)?,
        Scheme::AdaptiveMajority => adaptive::record_majority_curve(n_max, ens, noise)?,
        Scheme::Bayes => adaptive::bayes_curve(n_max, ens, noise)?,
        Scheme::Qdg => qdg::oracle_success_curve(n_max, ens, noise)?,
        Scheme::Voting => {
            let q = voting::per_copy_q(ens, noise)?;
            (1..=n_max)
                .map(|n| voting::majority_prob(&voting::VoteConfig::new(n, q)))
                .collect()
        }
        Scheme::HelstromPure => (1..=n_max)
            .map(|n| helstrom::bound_pure_multi(ens, n))
            .collect::<Result<_, _>>()?,
        Scheme::QdgPostselect => return Err(CurveError::NoExactRoute(scheme)),
    };
    Ok(SchemeCurve {
        scheme,
        theta: ens.theta(),
        fidelity: noise.fidelity(),
        prior0: ens.prior0(),
        rows: successes
            .into_iter()
            .enumerate()
            .map(|(i, p)| CurvePoint {
                n: i as u32 + 1,
                p_success: p,
                p_error: 1.0 - p,
            })
            .collect(),
    })
}

pub const CSV_HEADER: &str = "scheme,N,theta,fidelity,p0,p_success,p_error";

/// Render curves as CSV, rows ordered by (scheme token, N).
pub fn write_csv(curves: &[SchemeCurve]) -> String {
    let mut sorted: Vec<&SchemeCurve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.scheme.token());
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for curve in sorted {
        for row in &curve.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                curve.scheme.token(),
                row.n,
                curve.theta,
                curve.fidelity,
                curve.prior0,
                row.p_success,
                row.p_error,
            ));
        }
    }
    out
}

/// Render curves as a JSON document.
pub fn write_json(curves: &[SchemeCurve]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        curves: &'a [SchemeCurve],
    }
    let mut s = serde_json::to_string_pretty(&Doc { curves }).expect("serialisable");
    s.push('\n');
    s
}

/// Parse a curves CSV, grouping rows into curves in order of first
/// appearance. Errors carry the 1-based line number.
pub fn parse_csv(text: &str) -> Result<Vec<SchemeCurve>, CsvParseError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(CsvParseError {
        line: 1,
        message: "empty file".into(),
    })?;
    if header.trim() != CSV_HEADER {
        return Err(CsvParseError {
            line: 1,
            message: format!("expected header `{CSV_HEADER}`, got `{header}`"),
        });
    }
    let mut curves: Vec<SchemeCurve> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 7 {
            return Err(CsvParseError {
                line,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let fail = |message: String| CsvParseError { line, message };
        let scheme: Scheme = fields[0]
            .parse()
            .map_err(|e: String| fail(e))?;
        let n: u32 = fields[1]
            .parse()
            .map_err(|e| fail(format!("bad N `{}`: {e}", fields[1])))?;
        let float = |i: usize, name: &str| -> Result<f64, CsvParseError> {
            fields[i]
                .parse()
                .map_err(|e| fail(format!("bad {name} `{}`: {e}", fields[i])))
        };
        let theta = float(2, "theta")?;
        let fidelity = float(3, "fidelity")?;
        let prior0 = float(4, "p0")?;
        let p_success = float(5, "p_success")?;
        let p_error = float(6, "p_error")?;
        if (p_error - (1.0 - p_success)).abs() > 1e-15 {
            return Err(fail(format!(
                "p_error {p_error} is not 1 - p_success within 1e-15"
            )));
        }
        let point = CurvePoint {
            n,
            p_success,
            p_error,
        };
        let key = (scheme, theta.to_bits(), fidelity.to_bits(), prior0.to_bits());
        match curves.iter_mut().find(|c| {
            (c.scheme, c.theta.to_bits(), c.fidelity.to_bits(), c.prior0.to_bits()) == key
        }) {
            Some(curve) => {
                if curve.rows.last().is_some_and(|last| last.n >= n) {
                    return Err(fail(format!(
                        "N values must be strictly increasing per scheme (got {n})"
                    )));
                }
                curve.rows.push(point);
            }
            None => curves.push(SchemeCurve {
                scheme,
                theta,
                fidelity,
                prior0,
                rows: vec![point],
            }),
        }
    }
    if curves.is_empty() {
        return Err(CsvParseError {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok(curves)
}
