//! Pearson correlation between human and model measurements.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::genset::Restriction;
use crate::metrics::evaluate::SetAuc;
use crate::scoring::ScoreTable;

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::CorrelationLength(x.len(), y.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlation input"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("first input"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("second input"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Number of paired observations.
    pub n: usize,
    /// Keys present on only one side.
    pub unmatched: usize,
}

fn join<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> Result<Correlation> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (k, va) in a {
        if let Some(vb) = b.get(k) {
            x.push(*va);
            y.push(*vb);
        }
    }
    let unmatched = a.len() + b.len() - 2 * x.len();
    Ok(Correlation {
        r: pearson(&x, &y)?,
        n: x.len(),
        unmatched,
    })
}

/// Correlates two per-set AUC lists joined on (acceptable id, restriction).
pub fn correlate_set_aucs(a: &[SetAuc], b: &[SetAuc]) -> Result<Correlation> {
    let key = |s: &SetAuc| -> (String, Restriction) { (s.acceptable_id.clone(), s.restriction) };
    let ma: BTreeMap<_, f64> = a.iter().map(|s| (key(s), s.auc)).collect();
    let mb: BTreeMap<_, f64> = b.iter().map(|s| (key(s), s.auc)).collect();
    join(&ma, &mb)
}

/// Correlates two sentence-score tables joined on sentence id.
pub fn correlate_scores(a: &ScoreTable, b: &ScoreTable) -> Result<Correlation> {
    let ma: BTreeMap<String, f64> = a.iter().map(|(k, v)| (k.to_string(), v)).collect();
    let mb: BTreeMap<String, f64> = b.iter().map(|(k, v)| (k.to_string(), v)).collect();
    join(&ma, &mb)
}
