//! Rate-constant files: one `label = value` (or `label value`) per line,
//! `#` comments.

use std::collections::HashMap;

use thiserror::Error;

use crate::crn::Crn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatesError {
    #[error("rates line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rates file names unknown reaction `{0}`")]
    UnknownLabel(String),
}

pub fn parse_rates(text: &str) -> Result<Vec<(String, f64)>, RatesError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (label, value) = match body.split_once('=') {
            Some((l, v)) => (l.trim(), v.trim()),
            None => {
                let mut it = body.split_whitespace();
                let l = it.next().unwrap_or("");
                let v = it.next().unwrap_or("");
                if it.next().is_some() {
                    return Err(RatesError::Syntax {
                        line,
                        message: "expected `label = value`".into(),
                    });
                }
                (l, v)
            }
        };
        let v: f64 = value.parse().map_err(|_| RatesError::Syntax {
            line,
            message: format!("invalid rate `{value}`"),
        })?;
        if label.is_empty() || !(v.is_finite() && v > 0.0) {
            return Err(RatesError::Syntax {
                line,
                message: format!("rate for `{label}` must be a positive finite number"),
            });
        }
        out.push((label.to_string(), v));
    }
    Ok(out)
}

/// Overrides rates by reaction label.
pub fn apply_rates(crn: &Crn, rates: &[(String, f64)]) -> Result<Crn, RatesError> {
    let by_label: HashMap<&str, usize> = crn
        .reactions()
        .iter()
        .enumerate()
        .map(|(k, r)| (r.label.as_str(), k))
        .collect();
    let mut out = crn.clone();
    for (label, v) in rates {
        let k = *by_label
            .get(label.as_str())
            .ok_or_else(|| RatesError::UnknownLabel(label.clone()))?;
        out.set_rate(k, *v);
    }
    Ok(out)
}
