//! Sentence scoring: native n-gram models and a file-based adapter for
//! external scorers.
//!
//! External scorers read a request file (`<id>\t<text>` per line) and write a
//! score file (`<id>\t<score>` per line, decimal, LF). A score must be the sum
//! of natural-log token probabilities, higher meaning more acceptable: the
//! chain-rule log-probability for left-to-right models, or the
//! pseudo-log-likelihood for masked models (see [`external`]).

pub mod external;
pub mod ngram;
pub mod tokenize;

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::genset::Dataset;

pub use ngram::{
    train_ngram, train_ngram_partitioned, NgramConfig, NgramModel, Smoothing, TextCorpus,
};
pub use tokenize::tokenize;

/// Anything that maps a sentence to a finite log-probability-like score.
pub trait SentenceScorer {
    fn name(&self) -> &str;
    fn score(&self, text: &str) -> Result<f64>;
}

/// An [`NgramModel`] with scoring options.
#[derive(Debug, Clone)]
pub struct NgramScorer {
    pub model: NgramModel,
    pub name: String,
    /// When false, `. , ! ?` tokens are dropped before scoring.
    pub include_punctuation: bool,
}

impl NgramScorer {
    pub fn new(model: NgramModel) -> Self {
        let name = match model.order() {
            1 => "unigram",
            _ => "bigram",
        }
        .to_string();
        NgramScorer {
            model,
            name,
            include_punctuation: true,
        }
    }
}

impl SentenceScorer for NgramScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn score(&self, text: &str) -> Result<f64> {
        let mut tokens = tokenize(text);
        if !self.include_punctuation {
            tokens.retain(|t| !tokenize::is_punctuation(t));
        }
        self.model.score_chain(&tokens)
    }
}

/// Scores keyed by sentence id, with the producing scorer's label.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub scorer_name: String,
    entries: HashMap<String, f64>,
}

impl ScoreTable {
    pub fn new(scorer_name: impl Into<String>) -> Self {
        ScoreTable {
            scorer_name: scorer_name.into(),
            entries: HashMap::new(),
        }
    }

    /// Inserts a finite score; returns false if the id was already present.
    pub fn insert(&mut self, id: impl Into<String>, score: f64) -> Result<bool> {
        let id = id.into();
        if !score.is_finite() {
            return Err(Error::NonFiniteScore { id, line: 0 });
        }
        if self.entries.contains_key(&id) {
            return Ok(false);
        }
        self.entries.insert(id, score);
        Ok(true)
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.entries.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Ids of `dataset` that have no score, in dataset order.
    pub fn missing(&self, dataset: &Dataset) -> Vec<String> {
        dataset
            .records()
            .iter()
            .filter(|r| !self.entries.contains_key(&r.id))
            .map(|r| r.id.clone())
            .collect()
    }

    /// Fails with the full list of uncovered ids.
    pub fn validate_coverage(&self, dataset: &Dataset) -> Result<()> {
        let missing = self.missing(dataset);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingScores(missing))
        }
    }

    /// Writes `<id>\t<score>` lines in dataset order. Ids not in the dataset
    /// are skipped. Scores use Rust's shortest round-trip decimal form.
    pub fn write(&self, dataset: &Dataset, mut writer: impl Write) -> Result<()> {
        for record in dataset.records() {
            if let Some(score) = self.entries.get(&record.id) {
                writeln!(writer, "{}\t{}", record.id, score)?;
            }
        }
        Ok(())
    }
}

/// Scores every sentence of the dataset.
pub fn score_dataset(scorer: &dyn SentenceScorer, dataset: &Dataset) -> Result<ScoreTable> {
    let mut table = ScoreTable::new(scorer.name());
    for record in dataset.records() {
        table.insert(record.id.clone(), scorer.score(&record.text)?)?;
    }
    Ok(table)
}

/// Writes the request file for external scorers: `<id>\t<text>` per line.
pub fn export_requests(dataset: &Dataset, mut writer: impl Write) -> Result<()> {
    for record in dataset.records() {
        writeln!(writer, "{}\t{}", record.id, record.text)?;
    }
    Ok(())
}

/// Parses a score file. Every id must belong to `dataset`; coverage is
/// checked separately with [`ScoreTable::validate_coverage`].
pub fn import_scores(
    reader: impl BufRead,
    scorer_name: &str,
    dataset: &Dataset,
) -> Result<ScoreTable> {
    let mut table = ScoreTable::new(scorer_name);
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let (id, raw) = line.split_once('\t').ok_or_else(|| Error::Line {
            line: line_no,
            message: "expected `<id>\\t<score>`".into(),
        })?;
        if !dataset.contains(id) {
            return Err(Error::Line {
                line: line_no,
                message: format!("unknown sentence id {id:?}"),
            });
        }
        let score: f64 = raw.trim().parse().map_err(|_| Error::Line {
            line: line_no,
            message: format!("invalid score {raw:?}"),
        })?;
        if !score.is_finite() {
            return Err(Error::NonFiniteScore {
                id: id.to_string(),
                line: line_no,
            });
        }
        if !table.insert(id, score)? {
            return Err(Error::DuplicateScore {
                id: id.to_string(),
                line: line_no,
            });
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genset::{build_dataset, Template};
    use crate::lexicon::{Animacy, DeterminerClass, Lexeme, Lexicon};

    fn dataset() -> Dataset {
        let lexicon = Lexicon::new([
            Lexeme::new(
                "soldat",
                "Soldat",
                "Soldaten",
                "Soldat",
                DeterminerClass::Definite,
                Animacy::Human,
            ),
            Lexeme::new(
                "offizier",
                "Offizier",
                "Offizier",
                "Offizier",
                DeterminerClass::Definite,
                Animacy::Human,
            ),
            Lexeme::new(
                "brief",
                "Brief",
                "Brief",
                "Brief",
                DeterminerClass::Indefinite,
                Animacy::Inanimate,
            ),
        ])
        .unwrap();
        let t = Template::new(
            "t00",
            "Er wollte uns sagen, dass",
            "schreibt",
            ["soldat", "offizier", "brief"],
        );
        build_dataset(&[t], &lexicon).unwrap()
    }

    #[test]
    fn requests_follow_dataset_order() {
        let ds = dataset();
        let mut buf = Vec::new();
        export_requests(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 144);
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            format!("{}\t{}", ds.records()[0].id, ds.records()[0].text)
        );
    }

    #[test]
    fn request_score_round_trip_preserves_ids() {
        let ds = dataset();
        let mut req = Vec::new();
        export_requests(&ds, &mut req).unwrap();
        let scores: String = String::from_utf8(req)
            .unwrap()
            .lines()
            .enumerate()
            .map(|(i, l)| format!("{}\t{}\n", l.split('\t').next().unwrap(), -(i as f64) / 3.0))
            .collect();
        let table = import_scores(scores.as_bytes(), "identity", &ds).unwrap();
        assert_eq!(table.len(), 144);
        table.validate_coverage(&ds).unwrap();
        let mut out = Vec::new();
        table.write(&ds, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), scores);
    }

    #[test]
    fn import_rejects_bad_lines() {
        let ds = dataset();
        let id = &ds.records()[0].id;
        assert!(matches!(
            import_scores(format!("{id}\tNaN\n").as_bytes(), "x", &ds),
            Err(Error::NonFiniteScore { line: 1, .. })
        ));
        assert!(matches!(
            import_scores(format!("{id}\tinf\n").as_bytes(), "x", &ds),
            Err(Error::NonFiniteScore { .. })
        ));
        assert!(matches!(
            import_scores(format!("{id}\t1.0\n{id}\t2.0\n").as_bytes(), "x", &ds),
            Err(Error::DuplicateScore { line: 2, .. })
        ));
        match import_scores("x7\t1.0\n".as_bytes(), "x", &ds) {
            Err(Error::Line { line: 1, message }) => assert!(message.contains("x7")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(import_scores(format!("{id} 1.0\n").as_bytes(), "x", &ds).is_err());
    }

    #[test]
    fn coverage_reports_missing_ids() {
        let ds = dataset();
        let id = &ds.records()[0].id;
        let table = import_scores(format!("{id}\t-3.5\n").as_bytes(), "x", &ds).unwrap();
        match table.validate_coverage(&ds) {
            Err(Error::MissingScores(missing)) => assert_eq!(missing.len(), 143),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ngram_scorer_punctuation_flag() {
        let model = train_ngram(&["der Soldat schreibt ."], NgramConfig::unigram(10)).unwrap();
        let mut scorer = NgramScorer::new(model);
        let with = scorer.score("der Soldat schreibt.").unwrap();
        scorer.include_punctuation = false;
        let without = scorer.score("der Soldat schreibt.").unwrap();
        assert!((with - without - (0.25f64).ln()).abs() < 1e-12);
    }
}
