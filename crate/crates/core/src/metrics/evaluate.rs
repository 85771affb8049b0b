//! Per-set AUCs over minimal variation sets and the per-set AUC file.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genset::{Dataset, Restriction};
use crate::metrics::auc::{auc, roc_curve, RocPoint};
use crate::scoring::ScoreTable;

/// AUC of one acceptable sentence against its (restricted) violations.
#[derive(Debug, Clone, PartialEq)]
pub struct SetAuc {
    pub acceptable_id: String,
    pub template_id: String,
    pub restriction: Restriction,
    pub case_order: String,
    pub role_label: String,
    pub auc: f64,
}

fn gather<'a>(
    dataset: &'a Dataset,
    scores: &ScoreTable,
    restriction: Restriction,
) -> Result<Vec<(&'a crate::genset::SentenceRecord, f64, Vec<f64>)>> {
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(dataset.sets().len());
    for set in dataset.sets() {
        let anchor = dataset
            .get(&set.acceptable_id)
            .expect("set anchors are dataset records");
        let positive = scores.get(&set.acceptable_id);
        if positive.is_none() {
            missing.push(set.acceptable_id.clone());
        }
        let mut negatives = Vec::with_capacity(6);
        for id in set.restricted(restriction) {
            match scores.get(id) {
                Some(s) => negatives.push(s),
                None => missing.push(id.clone()),
            }
        }
        if let Some(p) = positive {
            out.push((anchor, p, negatives));
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::MissingScores(missing));
    }
    Ok(out)
}

/// One [`SetAuc`] per acceptable sentence, in dataset order. Every sentence
/// of every evaluated set must be scored.
pub fn evaluate_sets(
    dataset: &Dataset,
    scores: &ScoreTable,
    restriction: Restriction,
) -> Result<Vec<SetAuc>> {
    gather(dataset, scores, restriction)?
        .into_iter()
        .map(|(anchor, positive, negatives)| {
            Ok(SetAuc {
                acceptable_id: anchor.id.clone(),
                template_id: anchor.template_id.clone(),
                restriction,
                case_order: anchor.case_sequence.label(),
                role_label: anchor.role_label.clone(),
                auc: auc(&[positive], &negatives)?,
            })
        })
        .collect()
}

/// ROC points of every set, for plotting.
pub fn set_roc_curves(
    dataset: &Dataset,
    scores: &ScoreTable,
    restriction: Restriction,
) -> Result<Vec<(String, Vec<RocPoint>)>> {
    gather(dataset, scores, restriction)?
        .into_iter()
        .map(|(anchor, positive, negatives)| {
            Ok((anchor.id.clone(), roc_curve(&[positive], &negatives)?))
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct AucRow {
    scorer: String,
    acceptable_id: String,
    template_id: String,
    restriction: String,
    case_order: String,
    role_label: String,
    auc: f64,
}

/// Writes a tab-separated per-set AUC file with a header row.
pub fn write_set_aucs(scorer: &str, aucs: &[SetAuc], writer: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_writer(writer);
    for a in aucs {
        w.serialize(AucRow {
            scorer: scorer.to_string(),
            acceptable_id: a.acceptable_id.clone(),
            template_id: a.template_id.clone(),
            restriction: a.restriction.key().to_string(),
            case_order: a.case_order.clone(),
            role_label: a.role_label.clone(),
            auc: a.auc,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a per-set AUC file; returns (scorer name, rows). All rows must
/// name the same scorer.
pub fn read_set_aucs(reader: impl Read) -> Result<(String, Vec<SetAuc>)> {
    let mut r = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_reader(reader);
    let mut scorer: Option<String> = None;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: AucRow = row?;
        match &scorer {
            None => scorer = Some(row.scorer.clone()),
            Some(s) if *s != row.scorer => {
                return Err(Error::Parse(format!(
                    "mixed scorers {s:?} and {:?} in one AUC file",
                    row.scorer
                )))
            }
            _ => {}
        }
        if !(0.0..=1.0).contains(&row.auc) {
            return Err(Error::Parse(format!(
                "AUC {} outside [0, 1] for {}",
                row.auc, row.acceptable_id
            )));
        }
        out.push(SetAuc {
            acceptable_id: row.acceptable_id,
            template_id: row.template_id,
            restriction: row.restriction.parse()?,
            case_order: row.case_order,
            role_label: row.role_label,
            auc: row.auc,
        });
    }
    Ok((scorer.unwrap_or_default(), out))
}
