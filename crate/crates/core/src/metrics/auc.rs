use serde::Serialize;

use crate::error::{Error, Result};

/// One vertex of an empirical ROC curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    /// Scores at or above this value are classified positive. The first
    /// point uses `+inf`.
    pub threshold: f64,
    pub false_positive_rate: f64,
    pub true_positive_rate: f64,
}

fn check(positives: &[f64], negatives: &[f64]) -> Result<()> {
    if positives.is_empty() {
        return Err(Error::EmptySample("positive"));
    }
    if negatives.is_empty() {
        return Err(Error::EmptySample("negative"));
    }
    if positives.iter().chain(negatives).any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("AUC scores"));
    }
    Ok(())
}

/// Cumulative (threshold, fp, tp) counts, one entry per distinct score in
/// descending order, preceded by (inf, 0, 0).
fn cumulative_counts(positives: &[f64], negatives: &[f64]) -> Vec<(f64, u64, u64)> {
    let mut labelled: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    labelled.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut out = vec![(f64::INFINITY, 0u64, 0u64)];
    let (mut fp, mut tp) = (0u64, 0u64);
    let mut i = 0;
    while i < labelled.len() {
        let threshold = labelled[i].0;
        // Tied scores cross the threshold together.
        while i < labelled.len() && labelled[i].0 == threshold {
            if labelled[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push((threshold, fp, tp));
    }
    out
}

/// Empirical ROC curve from (0, 0) to (1, 1).
pub fn roc_curve(positives: &[f64], negatives: &[f64]) -> Result<Vec<RocPoint>> {
    check(positives, negatives)?;
    let p = positives.len() as f64;
    let n = negatives.len() as f64;
    Ok(cumulative_counts(positives, negatives)
        .into_iter()
        .map(|(threshold, fp, tp)| RocPoint {
            threshold,
            false_positive_rate: fp as f64 / n,
            true_positive_rate: tp as f64 / p,
        })
        .collect())
}

/// Area under the ROC curve by trapezoidal integration. Tied scores form a
/// diagonal segment, which gives half credit to tied pairs, so the result
/// equals the Mann-Whitney statistic `P(s_p > s_n) + 0.5 P(s_p = s_n)`.
///
/// The area is accumulated in integers and divided once, so constant scores
/// give exactly 0.5 and perfect separation exactly 1.0.
pub fn auc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    check(positives, negatives)?;
    let counts = cumulative_counts(positives, negatives);
    let twice_area: u128 = counts
        .windows(2)
        .map(|w| {
            let (_, fp0, tp0) = w[0];
            let (_, fp1, tp1) = w[1];
            u128::from(fp1 - fp0) * u128::from(tp0 + tp1)
        })
        .sum();
    let denom = 2 * positives.len() as u128 * negatives.len() as u128;
    Ok(twice_area as f64 / denom as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominating_positive() {
        assert_eq!(auc(&[3.0], &[1.0, 2.0]).unwrap(), 1.0);
    }

    #[test]
    fn all_ties_is_chance() {
        assert_eq!(auc(&[1.0], &[1.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn mixed_pairs() {
        // pairs: (2,2)=0.5, (2,0)=1, (1,2)=0, (1,0)=1
        assert_eq!(auc(&[2.0, 1.0], &[2.0, 0.0]).unwrap(), 0.625);
    }

    #[test]
    fn reversed() {
        assert_eq!(auc(&[0.0], &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn empty_side_is_error() {
        assert!(matches!(
            auc(&[], &[1.0]),
            Err(Error::EmptySample("positive"))
        ));
        assert!(matches!(
            auc(&[1.0], &[]),
            Err(Error::EmptySample("negative"))
        ));
        assert!(auc(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn curve_endpoints() {
        let curve = roc_curve(&[2.0, 1.0], &[2.0, 0.0]).unwrap();
        let first = curve.first().unwrap();
        let last = curve.last().unwrap();
        assert_eq!(
            (first.false_positive_rate, first.true_positive_rate),
            (0.0, 0.0)
        );
        assert_eq!(
            (last.false_positive_rate, last.true_positive_rate),
            (1.0, 1.0)
        );
        assert_eq!(curve.len(), 4);
    }
}
