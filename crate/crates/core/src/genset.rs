//! Template expansion into acceptable permutations and case violations, and
//! the minimal variation set index.
//!
//! Every template yields 36 acceptable sentences (6 case permutations x 6
//! item arrangements) followed by 108 violations (18 sequences with one
//! doubled case x 6 arrangements). Within each block, case sequences run in
//! lexicographic order under NOM < ACC < DAT and arrangements in lexicographic
//! order. Sentence ids are `<template>:<cases>:<arrangement>`, e.g.
//! `t00:NDA:123`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::case::{role_label, Arrangement, Case, CaseSequence};
use crate::error::{Error, Result};
use crate::lexicon::{Animacy, DeterminerClass, Lexicon};

/// A ditransitive subordinate-clause frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub id: String,
    /// Main clause up to and including the complementizer.
    pub prefix: String,
    /// Clause-final verb.
    pub verb: String,
    /// Lexeme ids of items 1, 2 and 3.
    pub items: [String; 3],
    /// Optional per-item determiner class override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub determiners: Option<[Option<DeterminerClass>; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
}

impl Template {
    pub fn new(
        id: impl Into<String>,
        prefix: impl Into<String>,
        verb: impl Into<String>,
        items: [&str; 3],
    ) -> Self {
        Template {
            id: id.into(),
            prefix: prefix.into(),
            verb: verb.into(),
            items: items.map(String::from),
            determiners: None,
            gloss: None,
        }
    }

    fn determiner_for(&self, item: u8, lexicon: &Lexicon) -> Result<DeterminerClass> {
        let idx = usize::from(item - 1);
        let lexeme = lexicon.get(&self.items[idx])?;
        Ok(self
            .determiners
            .as_ref()
            .and_then(|d| d[idx])
            .unwrap_or(lexeme.determiner_class))
    }

    /// NP for lexical item `item` (1-based) in `case`.
    pub fn noun_phrase(&self, item: u8, case: Case, lexicon: &Lexicon) -> Result<String> {
        let lexeme = lexicon.get(&self.items[usize::from(item - 1)])?;
        let class = self.determiner_for(item, lexicon)?;
        Ok(lexicon.inflect_with(lexeme, class, case))
    }

    /// Checks structural well-formedness against a lexicon. Animacy deviations
    /// are only warned about.
    pub fn validate(&self, lexicon: &Lexicon) -> Result<()> {
        let invalid = |message: String| Error::InvalidTemplate {
            template: self.id.clone(),
            message,
        };
        if self.id.is_empty() || self.id.contains(':') || self.id.chars().any(char::is_whitespace) {
            return Err(invalid(
                "id must be non-empty without ':' or whitespace".into(),
            ));
        }
        if self.prefix.trim().is_empty() || self.verb.trim().is_empty() {
            return Err(invalid("prefix and verb must be non-empty".into()));
        }
        let unique: HashSet<&String> = self.items.iter().collect();
        if unique.len() != 3 {
            return Err(invalid(format!(
                "items {:?} must be three distinct lexemes",
                self.items
            )));
        }
        for (idx, id) in self.items.iter().enumerate() {
            let lexeme = lexicon.get(id)?;
            let expected = if idx < 2 {
                Animacy::Human
            } else {
                Animacy::Inanimate
            };
            if lexeme.animacy != expected {
                log::warn!(
                    "template {}: item {} ({}) is {:?}, expected {:?}",
                    self.id,
                    idx + 1,
                    id,
                    lexeme.animacy,
                    expected
                );
            }
        }
        // Distinct items must never realize to the same NP, or sentences collide.
        let mut seen = HashMap::new();
        for item in 1..=3u8 {
            for case in Case::ALL {
                let np = self.noun_phrase(item, case, lexicon)?;
                if let Some(other) = seen.insert(np.clone(), item) {
                    if other != item {
                        return Err(invalid(format!(
                            "items {other} and {item} both realize as {np:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Reads templates from JSON Lines; blank and `#` lines are skipped.
pub fn load_templates(reader: impl BufRead) -> Result<Vec<Template>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let template: Template = serde_json::from_str(trimmed).map_err(|e| Error::Line {
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(template);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationType {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "double_NOM")]
    DoubleNom,
    #[serde(rename = "double_ACC")]
    DoubleAcc,
    #[serde(rename = "double_DAT")]
    DoubleDat,
}

impl ViolationType {
    pub fn of(cases: &CaseSequence) -> ViolationType {
        match cases.doubled_case() {
            None => ViolationType::None,
            Some(Case::Nom) => ViolationType::DoubleNom,
            Some(Case::Acc) => ViolationType::DoubleAcc,
            Some(Case::Dat) => ViolationType::DoubleDat,
        }
    }
}

/// One realized sentence with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRecord {
    pub id: String,
    pub template_id: String,
    pub text: String,
    pub case_sequence: CaseSequence,
    pub arrangement: Arrangement,
    pub role_label: String,
    pub acceptable: bool,
    pub violation_type: ViolationType,
}

/// Wire form of [`SentenceRecord`]; field order is the public schema.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    id: String,
    template_id: String,
    text: String,
    case_sequence: String,
    arrangement: String,
    role_label: String,
    acceptable: bool,
    violation_type: ViolationType,
}

impl SentenceRecord {
    pub fn sentence_id(
        template_id: &str,
        cases: &CaseSequence,
        arrangement: &Arrangement,
    ) -> String {
        format!("{template_id}:{cases}:{arrangement}")
    }

    fn to_line(&self) -> RecordLine {
        RecordLine {
            id: self.id.clone(),
            template_id: self.template_id.clone(),
            text: self.text.clone(),
            case_sequence: self.case_sequence.label(),
            arrangement: self.arrangement.label(),
            role_label: self.role_label.clone(),
            acceptable: self.acceptable,
            violation_type: self.violation_type,
        }
    }

    fn from_line(line: RecordLine) -> Result<Self> {
        let case_sequence: CaseSequence = line.case_sequence.parse()?;
        let arrangement: Arrangement = line.arrangement.parse()?;
        let record = SentenceRecord {
            id: line.id,
            template_id: line.template_id,
            text: line.text,
            case_sequence,
            arrangement,
            role_label: line.role_label,
            acceptable: line.acceptable,
            violation_type: line.violation_type,
        };
        let consistent = record.id
            == Self::sentence_id(&record.template_id, &case_sequence, &arrangement)
            && record.role_label == role_label(&case_sequence, &arrangement)
            && record.violation_type == ViolationType::of(&case_sequence)
            && record.acceptable == case_sequence.is_acceptable()
            && (record.acceptable || case_sequence.doubled_case().is_some());
        if !consistent {
            return Err(Error::Parse(format!(
                "record {:?} has inconsistent derived fields",
                record.id
            )));
        }
        Ok(record)
    }
}

/// Surface string: prefix, the three NPs in position order, the verb, and a
/// single terminal period, joined by single spaces.
pub fn realize(
    template: &Template,
    cases: &CaseSequence,
    arrangement: &Arrangement,
    lexicon: &Lexicon,
) -> Result<String> {
    let mut text = template.prefix.trim().to_string();
    for pos in 0..3 {
        text.push(' ');
        text.push_str(&template.noun_phrase(arrangement.item_at(pos), cases.0[pos], lexicon)?);
    }
    text.push(' ');
    text.push_str(template.verb.trim().trim_end_matches('.'));
    text.push('.');
    Ok(text)
}

fn make_record(
    template: &Template,
    cases: CaseSequence,
    arrangement: Arrangement,
    lexicon: &Lexicon,
) -> Result<SentenceRecord> {
    Ok(SentenceRecord {
        id: SentenceRecord::sentence_id(&template.id, &cases, &arrangement),
        template_id: template.id.clone(),
        text: realize(template, &cases, &arrangement, lexicon)?,
        case_sequence: cases,
        arrangement,
        role_label: role_label(&cases, &arrangement),
        acceptable: cases.is_acceptable(),
        violation_type: ViolationType::of(&cases),
    })
}

fn enumerate(
    template: &Template,
    lexicon: &Lexicon,
    sequences: impl Iterator<Item = CaseSequence>,
) -> Result<Vec<SentenceRecord>> {
    let mut out = Vec::new();
    for cases in sequences {
        for arrangement in Arrangement::all() {
            out.push(make_record(template, cases, arrangement, lexicon)?);
        }
    }
    Ok(out)
}

/// The 36 acceptable sentences of a template.
pub fn enumerate_acceptable(template: &Template, lexicon: &Lexicon) -> Result<Vec<SentenceRecord>> {
    enumerate(template, lexicon, CaseSequence::permutations())
}

/// The 108 case-violation sentences of a template.
pub fn enumerate_violations(template: &Template, lexicon: &Lexicon) -> Result<Vec<SentenceRecord>> {
    enumerate(template, lexicon, CaseSequence::violations())
}

/// Which violations of a minimal variation set to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Restriction {
    /// (1-6) sets: all six violations.
    All,
    /// (1-2) sets: only the two violations doubling this case.
    Doubled(Case),
}

impl Restriction {
    pub const EVERY: [Restriction; 4] = [
        Restriction::All,
        Restriction::Doubled(Case::Nom),
        Restriction::Doubled(Case::Acc),
        Restriction::Doubled(Case::Dat),
    ];

    /// Machine label used in files: `all`, `double_NOM`, ...
    pub fn key(&self) -> &'static str {
        match self {
            Restriction::All => "all",
            Restriction::Doubled(Case::Nom) => "double_NOM",
            Restriction::Doubled(Case::Acc) => "double_ACC",
            Restriction::Doubled(Case::Dat) => "double_DAT",
        }
    }

    /// Report label: `1-6`, `1-2 nom`, ...
    pub fn display_label(&self) -> &'static str {
        match self {
            Restriction::All => "1-6",
            Restriction::Doubled(Case::Nom) => "1-2 nom",
            Restriction::Doubled(Case::Acc) => "1-2 acc",
            Restriction::Doubled(Case::Dat) => "1-2 dat",
        }
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Restriction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" | "1-6" => Ok(Restriction::All),
            "nom" | "double_nom" | "1-2 nom" => Ok(Restriction::Doubled(Case::Nom)),
            "acc" | "double_acc" | "1-2 acc" => Ok(Restriction::Doubled(Case::Acc)),
            "dat" | "double_dat" | "1-2 dat" => Ok(Restriction::Doubled(Case::Dat)),
            _ => Err(Error::Parse(format!("unknown restriction {s:?}"))),
        }
    }
}

/// One acceptable sentence and its six single-position case violations,
/// grouped by the doubled case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalVariationSet {
    pub acceptable_id: String,
    #[serde(rename = "double_NOM")]
    pub double_nom: [String; 2],
    #[serde(rename = "double_ACC")]
    pub double_acc: [String; 2],
    #[serde(rename = "double_DAT")]
    pub double_dat: [String; 2],
}

impl MinimalVariationSet {
    pub fn doubled(&self, case: Case) -> &[String; 2] {
        match case {
            Case::Nom => &self.double_nom,
            Case::Acc => &self.double_acc,
            Case::Dat => &self.double_dat,
        }
    }

    /// All six violation ids, NOM pair first, then ACC, then DAT.
    pub fn violation_ids(&self) -> impl Iterator<Item = &String> {
        self.double_nom
            .iter()
            .chain(&self.double_acc)
            .chain(&self.double_dat)
    }

    pub fn restricted(&self, restriction: Restriction) -> Vec<&String> {
        match restriction {
            Restriction::All => self.violation_ids().collect(),
            Restriction::Doubled(case) => self.doubled(case).iter().collect(),
        }
    }
}

/// Violations reachable from an acceptable sequence by changing a single
/// position to a case already present elsewhere.
fn single_change_variants(cases: &CaseSequence, doubled: Case) -> [CaseSequence; 2] {
    let mut out = Vec::with_capacity(2);
    for pos in 0..3 {
        if cases.0[pos] != doubled {
            out.push(cases.with_case_at(pos, doubled));
        }
    }
    [out[0], out[1]]
}

/// All sentence records of a set of templates, plus the minimal variation
/// index over every acceptable sentence.
#[derive(Debug, Clone)]
pub struct Dataset {
    records: Vec<SentenceRecord>,
    index: HashMap<String, usize>,
    sets: Vec<MinimalVariationSet>,
    set_index: HashMap<String, usize>,
}

impl Dataset {
    /// Indexes records and builds the minimal variation sets. Every
    /// acceptable record must have all six violations present.
    pub fn from_records(records: Vec<SentenceRecord>) -> Result<Self> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, record) in records.iter().enumerate() {
            if index.insert(record.id.clone(), i).is_some() {
                return Err(Error::Parse(format!(
                    "duplicate sentence id {:?}",
                    record.id
                )));
            }
        }
        let mut sets = Vec::new();
        let mut set_index = HashMap::new();
        for record in records.iter().filter(|r| r.acceptable) {
            let ids = |case: Case| -> Result<[String; 2]> {
                let variants = single_change_variants(&record.case_sequence, case);
                let ids = variants.map(|cases| {
                    SentenceRecord::sentence_id(&record.template_id, &cases, &record.arrangement)
                });
                for id in &ids {
                    if !index.contains_key(id) {
                        return Err(Error::Parse(format!(
                            "minimal variation set of {:?} is missing {id:?}",
                            record.id
                        )));
                    }
                }
                Ok(ids)
            };
            set_index.insert(record.id.clone(), sets.len());
            sets.push(MinimalVariationSet {
                acceptable_id: record.id.clone(),
                double_nom: ids(Case::Nom)?,
                double_acc: ids(Case::Acc)?,
                double_dat: ids(Case::Dat)?,
            });
        }
        Ok(Dataset {
            records,
            index,
            sets,
            set_index,
        })
    }

    pub fn records(&self) -> &[SentenceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&SentenceRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn acceptable_count(&self) -> usize {
        self.records.iter().filter(|r| r.acceptable).count()
    }

    pub fn template_ids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.records
            .iter()
            .map(|r| r.template_id.as_str())
            .filter(|t| seen.insert(*t))
            .collect()
    }

    /// Minimal variation sets in dataset order.
    pub fn sets(&self) -> &[MinimalVariationSet] {
        &self.sets
    }

    /// Violation ids of the set anchored at `acceptable_id`, restricted.
    pub fn minimal_variation_set(
        &self,
        acceptable_id: &str,
        restriction: Restriction,
    ) -> Result<Vec<&str>> {
        let record = self
            .get(acceptable_id)
            .ok_or_else(|| Error::UnknownSentence(acceptable_id.into()))?;
        if !record.acceptable {
            return Err(Error::NotAcceptable(acceptable_id.into()));
        }
        let set = &self.sets[self.set_index[acceptable_id]];
        Ok(set
            .restricted(restriction)
            .into_iter()
            .map(String::as_str)
            .collect())
    }

    pub fn set_for(&self, acceptable_id: &str) -> Option<&MinimalVariationSet> {
        self.set_index.get(acceptable_id).map(|&i| &self.sets[i])
    }

    /// Writes one JSON record per line in dataset order.
    pub fn write_jsonl(&self, mut writer: impl Write) -> Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut writer, &record.to_line())?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<Self> {
        let mut records = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RecordLine = serde_json::from_str(&line).map_err(|e| Error::Line {
                line: idx + 1,
                message: e.to_string(),
            })?;
            records.push(SentenceRecord::from_line(raw).map_err(|e| Error::Line {
                line: idx + 1,
                message: e.to_string(),
            })?);
        }
        Self::from_records(records)
    }

    /// Writes the minimal variation index, one set per line.
    pub fn write_sets_jsonl(&self, mut writer: impl Write) -> Result<()> {
        for set in &self.sets {
            serde_json::to_writer(&mut writer, set)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    /// SHA-256 of the JSON Lines serialization, hex encoded. Used to check
    /// that downstream artifacts refer to the same dataset.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)
            .expect("writing to memory cannot fail");
        hex::encode(Sha256::digest(&buf))
    }
}

/// Expands every template, in input order.
pub fn build_dataset(templates: &[Template], lexicon: &Lexicon) -> Result<Dataset> {
    if templates.is_empty() {
        return Err(Error::Config("at least one template is required".into()));
    }
    let mut ids = HashSet::new();
    for template in templates {
        if !ids.insert(template.id.as_str()) {
            return Err(Error::DuplicateTemplate(template.id.clone()));
        }
        template.validate(lexicon)?;
    }
    let mut records = Vec::with_capacity(templates.len() * 144);
    for template in templates {
        records.extend(enumerate_acceptable(template, lexicon)?);
        records.extend(enumerate_violations(template, lexicon)?);
    }
    Dataset::from_records(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexeme;

    fn lexicon() -> Lexicon {
        Lexicon::new([
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
        .unwrap()
    }

    fn soldat_template() -> Template {
        Template::new(
            "t00",
            "Er wollte uns sagen, dass",
            "schreibt",
            ["soldat", "offizier", "brief"],
        )
    }

    fn text(cases: &str, arr: &str) -> String {
        realize(
            &soldat_template(),
            &cases.parse().unwrap(),
            &arr.parse().unwrap(),
            &lexicon(),
        )
        .unwrap()
    }

    #[test]
    fn realizes_soldat_sentences() {
        assert_eq!(
            text("NDA", "123"),
            "Er wollte uns sagen, dass der Soldat dem Offizier einen Brief schreibt."
        );
        assert_eq!(
            text("DNA", "213"),
            "Er wollte uns sagen, dass dem Offizier der Soldat einen Brief schreibt."
        );
        assert_eq!(
            text("NNA", "123"),
            "Er wollte uns sagen, dass der Soldat der Offizier einen Brief schreibt."
        );
    }

    #[test]
    fn unresolvable_item() {
        let mut t = soldat_template();
        t.items[2] = "tisch".into();
        let err = realize(
            &t,
            &"NDA".parse().unwrap(),
            &Arrangement::IDENTITY,
            &lexicon(),
        );
        assert!(matches!(err, Err(Error::UnknownLexeme(_))));
    }

    #[test]
    fn determiner_override() {
        let mut t = soldat_template();
        t.determiners = Some([None, None, Some(DeterminerClass::Definite)]);
        let s = realize(
            &t,
            &"NDA".parse().unwrap(),
            &Arrangement::IDENTITY,
            &lexicon(),
        )
        .unwrap();
        assert!(s.ends_with("den Brief schreibt."));
    }

    #[test]
    fn acceptable_block() {
        let recs = enumerate_acceptable(&soldat_template(), &lexicon()).unwrap();
        assert_eq!(recs.len(), 36);
        assert!(recs
            .iter()
            .all(|r| r.violation_type == ViolationType::None && r.acceptable));
        let texts: HashSet<&str> = recs.iter().map(|r| r.text.as_str()).collect();
        assert_eq!(texts.len(), 36);
        let roles: HashSet<&str> = recs.iter().map(|r| r.role_label.as_str()).collect();
        let expected: HashSet<&str> = [
            "ag1,re2,pa3",
            "ag2,re1,pa3",
            "ag1,re3,pa2",
            "ag2,re3,pa1",
            "ag3,re1,pa2",
            "ag3,re2,pa1",
        ]
        .into();
        assert_eq!(roles, expected);
        assert_eq!(recs[0].id, "t00:NAD:123");
        assert_eq!(recs[1].id, "t00:NAD:132");
        assert_eq!(recs[6].id, "t00:NDA:123");
    }

    #[test]
    fn violation_block() {
        let recs = enumerate_violations(&soldat_template(), &lexicon()).unwrap();
        assert_eq!(recs.len(), 108);
        for vt in [
            ViolationType::DoubleNom,
            ViolationType::DoubleAcc,
            ViolationType::DoubleDat,
        ] {
            assert_eq!(recs.iter().filter(|r| r.violation_type == vt).count(), 36);
        }
        assert!(recs
            .iter()
            .all(|r| !r.acceptable && r.case_sequence.doubled_case().is_some()));
        let distinct: HashSet<CaseSequence> = recs.iter().map(|r| r.case_sequence).collect();
        assert_eq!(distinct.len(), 18);
    }

    #[test]
    fn dataset_counts_and_sets() {
        let ds = build_dataset(&[soldat_template()], &lexicon()).unwrap();
        assert_eq!(ds.len(), 144);
        assert_eq!(ds.acceptable_count(), 36);
        assert_eq!(ds.sets().len(), 36);
        let texts: HashSet<&str> = ds.records().iter().map(|r| r.text.as_str()).collect();
        assert_eq!(texts.len(), 144);
    }

    #[test]
    fn nda_set_members() {
        let ds = build_dataset(&[soldat_template()], &lexicon()).unwrap();
        let mut got: Vec<&str> = ds
            .minimal_variation_set("t00:NDA:123", Restriction::All)
            .unwrap();
        got.sort();
        let mut want = vec![
            "t00:DDA:123",
            "t00:ADA:123",
            "t00:NNA:123",
            "t00:NAA:123",
            "t00:NDN:123",
            "t00:NDD:123",
        ];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(
            ds.minimal_variation_set("t00:NDA:123", Restriction::Doubled(Case::Dat))
                .unwrap(),
            ["t00:DDA:123", "t00:NDD:123"]
        );
    }

    #[test]
    fn set_of_violation_is_error() {
        let ds = build_dataset(&[soldat_template()], &lexicon()).unwrap();
        assert!(matches!(
            ds.minimal_variation_set("t00:NNA:123", Restriction::All),
            Err(Error::NotAcceptable(_))
        ));
        assert!(matches!(
            ds.minimal_variation_set("nope", Restriction::All),
            Err(Error::UnknownSentence(_))
        ));
    }

    #[test]
    fn duplicate_templates_rejected() {
        let t = soldat_template();
        assert!(matches!(
            build_dataset(&[t.clone(), t], &lexicon()),
            Err(Error::DuplicateTemplate(_))
        ));
        assert!(build_dataset(&[], &lexicon()).is_err());
    }

    #[test]
    fn template_with_repeated_item_rejected() {
        let t = Template::new(
            "bad",
            "Er sagt, dass",
            "gibt",
            ["soldat", "soldat", "brief"],
        );
        assert!(matches!(
            t.validate(&lexicon()),
            Err(Error::InvalidTemplate { .. })
        ));
    }

    #[test]
    fn jsonl_round_trip() {
        let ds = build_dataset(&[soldat_template()], &lexicon()).unwrap();
        let mut buf = Vec::new();
        ds.write_jsonl(&mut buf).unwrap();
        let back = Dataset::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back.records(), ds.records());
        assert_eq!(back.content_hash(), ds.content_hash());
        let first = String::from_utf8(buf)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert!(first.starts_with(r#"{"id":"t00:NAD:123","template_id":"t00","text":"#));
    }

    #[test]
    fn tampered_record_rejected() {
        let ds = build_dataset(&[soldat_template()], &lexicon()).unwrap();
        let mut buf = Vec::new();
        ds.write_jsonl(&mut buf).unwrap();
        let tampered = String::from_utf8(buf).unwrap().replacen(
            "\"acceptable\":true",
            "\"acceptable\":false",
            1,
        );
        assert!(Dataset::read_jsonl(tampered.as_bytes()).is_err());
    }

    #[test]
    fn template_file_parsing() {
        let doc = r#"
# soldat template
{"id": "t00", "prefix": "Er wollte uns sagen, dass", "verb": "schreibt", "items": ["soldat", "offizier", "brief"], "gloss": "He wanted to tell us that the soldier writes a letter to the officer."}
"#;
        let templates = load_templates(doc.as_bytes()).unwrap();
        assert_eq!(templates.len(), 1);
        assert_eq!(templates[0].items[2], "brief");
        assert!(load_templates(
            r#"{"id": "x", "prefix": "p", "verb": "v", "items": ["a", "b"]}"#.as_bytes()
        )
        .is_err());
    }
}
