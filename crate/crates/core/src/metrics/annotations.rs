//! Human rating records: file format, filler-based quality control and
//! per-annotator normalization.
//!
//! The annotation file is tab-separated with a header row:
//!
//! ```text
//! annotator_id  sentence_id  raw  timestamp  is_filler  filler_kind  warmup
//! ```
//!
//! `raw` is an integer in 0..=99, `timestamp` is milliseconds since the Unix
//! epoch, `filler_kind` is one of `acceptable`, `violation`, `none`, and
//! `warmup` marks ratings given during the warm-up block.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScoreTable;

pub const ANNOTATION_HEADER: [&str; 7] = [
    "annotator_id",
    "sentence_id",
    "raw",
    "timestamp",
    "is_filler",
    "filler_kind",
    "warmup",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillerKind {
    Acceptable,
    Violation,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub annotator_id: String,
    pub sentence_id: String,
    pub raw: u8,
    pub timestamp: u64,
    pub is_filler: bool,
    pub filler_kind: FillerKind,
    #[serde(default)]
    pub warmup: bool,
}

impl AnnotationRecord {
    /// A test-sentence rating.
    pub fn test(annotator_id: &str, sentence_id: &str, raw: u8) -> Self {
        AnnotationRecord {
            annotator_id: annotator_id.into(),
            sentence_id: sentence_id.into(),
            raw,
            timestamp: 0,
            is_filler: false,
            filler_kind: FillerKind::None,
            warmup: false,
        }
    }

    pub fn filler(annotator_id: &str, sentence_id: &str, raw: u8, kind: FillerKind) -> Self {
        AnnotationRecord {
            is_filler: true,
            filler_kind: kind,
            ..Self::test(annotator_id, sentence_id, raw)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.raw > 99 {
            return Err(Error::RatingOutOfRange(i64::from(self.raw)));
        }
        if self.is_filler == (self.filler_kind == FillerKind::None) {
            return Err(Error::Parse(format!(
                "rating of {:?} by {:?}: is_filler={} disagrees with filler_kind={:?}",
                self.sentence_id, self.annotator_id, self.is_filler, self.filler_kind
            )));
        }
        Ok(())
    }
}

/// Writes the header followed by one row per record. An empty slice gives a
/// header-only file.
pub fn write_annotations(records: &[AnnotationRecord], writer: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .from_writer(writer);
    w.write_record(ANNOTATION_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_annotations(reader: impl Read) -> Result<Vec<AnnotationRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ANNOTATION_HEADER {
        return Err(Error::Parse(format!(
            "unexpected annotation header {:?}",
            headers
        )));
    }
    let mut out = Vec::new();
    for (idx, row) in r.deserialize().enumerate() {
        let record: AnnotationRecord = row.map_err(|e| Error::Line {
            line: idx + 2,
            message: e.to_string(),
        })?;
        record.validate().map_err(|e| Error::Line {
            line: idx + 2,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum QcRemoval {
    /// Mean acceptable-filler rating was not strictly above the mean
    /// violation-filler rating.
    FailedFillers {
        acceptable_mean: f64,
        violation_mean: f64,
    },
    /// The annotator lacks ratings of one filler kind and cannot be validated.
    MissingFillerKind(FillerKind),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QcOutcome {
    pub retained: BTreeSet<String>,
    pub removed: BTreeMap<String, QcRemoval>,
}

/// Keeps an annotator iff their mean rating of acceptable fillers is strictly
/// greater than their mean rating of violation fillers. Warm-up ratings are
/// ignored.
pub fn qc_filter(records: &[AnnotationRecord]) -> QcOutcome {
    #[derive(Default)]
    struct Sums {
        acceptable: (f64, usize),
        violation: (f64, usize),
    }
    let mut per: BTreeMap<&str, Sums> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.warmup) {
        let sums = per.entry(&r.annotator_id).or_default();
        let slot = match r.filler_kind {
            FillerKind::Acceptable => &mut sums.acceptable,
            FillerKind::Violation => &mut sums.violation,
            FillerKind::None => continue,
        };
        slot.0 += f64::from(r.raw);
        slot.1 += 1;
    }
    let mut outcome = QcOutcome::default();
    for (annotator, sums) in per {
        let verdict = if sums.acceptable.1 == 0 {
            Err(QcRemoval::MissingFillerKind(FillerKind::Acceptable))
        } else if sums.violation.1 == 0 {
            Err(QcRemoval::MissingFillerKind(FillerKind::Violation))
        } else {
            let acceptable_mean = sums.acceptable.0 / sums.acceptable.1 as f64;
            let violation_mean = sums.violation.0 / sums.violation.1 as f64;
            if acceptable_mean > violation_mean {
                Ok(())
            } else {
                Err(QcRemoval::FailedFillers {
                    acceptable_mean,
                    violation_mean,
                })
            }
        };
        match verdict {
            Ok(()) => {
                outcome.retained.insert(annotator.to_string());
            }
            Err(reason) => {
                if let QcRemoval::MissingFillerKind(kind) = &reason {
                    log::warn!("annotator {annotator} has no {kind:?} filler ratings; excluded");
                }
                outcome.removed.insert(annotator.to_string(), reason);
            }
        }
    }
    outcome
}

/// One z-scored rating.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRating {
    pub annotator_id: String,
    pub sentence_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalizedScores {
    pub ratings: Vec<NormalizedRating>,
    /// Mean normalized rating per sentence.
    pub by_sentence: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl NormalizedScores {
    pub fn to_score_table(&self, scorer_name: &str) -> ScoreTable {
        let mut table = ScoreTable::new(scorer_name);
        for (id, v) in &self.by_sentence {
            table
                .insert(id.clone(), *v)
                .expect("normalized scores are finite");
        }
        table
    }
}

/// Z-transforms each annotator's test ratings (fillers and warm-up excluded)
/// with the population standard deviation, then averages per sentence. An
/// annotator with constant ratings gets zeros and a warning.
pub fn normalize_annotations(records: &[AnnotationRecord]) -> NormalizedScores {
    let mut per: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_filler && !r.warmup) {
        per.entry(&r.annotator_id).or_default().push(r);
    }
    let mut out = NormalizedScores::default();
    let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (annotator, ratings) in per {
        let n = ratings.len() as f64;
        let mean = ratings.iter().map(|r| f64::from(r.raw)).sum::<f64>() / n;
        let var = ratings
            .iter()
            .map(|r| (f64::from(r.raw) - mean).powi(2))
            .sum::<f64>()
            / n;
        let sd = var.sqrt();
        if sd == 0.0 {
            out.warnings.push(format!(
                "annotator {annotator} gave constant ratings; normalized to 0"
            ));
        }
        for r in ratings {
            let value = if sd == 0.0 {
                0.0
            } else {
                (f64::from(r.raw) - mean) / sd
            };
            let slot = sums.entry(&r.sentence_id).or_insert((0.0, 0));
            slot.0 += value;
            slot.1 += 1;
            out.ratings.push(NormalizedRating {
                annotator_id: annotator.to_string(),
                sentence_id: r.sentence_id.clone(),
                value,
            });
        }
    }
    out.by_sentence = sums
        .into_iter()
        .map(|(id, (s, n))| (id.to_string(), s / n as f64))
        .collect();
    out
}

/// QC then normalization: the usual route from raw records to sentence
/// scores.
pub fn human_scores(records: &[AnnotationRecord]) -> (QcOutcome, NormalizedScores) {
    let qc = qc_filter(records);
    let kept: Vec<AnnotationRecord> = records
        .iter()
        .filter(|r| qc.retained.contains(&r.annotator_id))
        .cloned()
        .collect();
    let normalized = normalize_annotations(&kept);
    (qc, normalized)
}
