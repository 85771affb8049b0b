//! Masculine singular NP paradigms and case realization.
//!
//! A lexicon file is JSON Lines, one lexeme per line:
//!
//! ```text
//! {"id": "soldat", "nom": "Soldat", "acc": "Soldaten", "dat": "Soldat",
//!  "determiner_class": "definite", "animacy": "human", "gloss": "soldier"}
//! ```
//!
//! `gloss` is optional. Blank lines and lines starting with `#` are skipped.
//! Noun forms are stored verbatim; nothing is derived by declension rules.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::case::Case;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeterminerClass {
    Definite,
    Indefinite,
}

impl DeterminerClass {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "definite" => Some(Self::Definite),
            "indefinite" => Some(Self::Indefinite),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Animacy {
    Human,
    Inanimate,
}

impl Animacy {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "human" => Some(Self::Human),
            "inanimate" => Some(Self::Inanimate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexeme {
    pub id: String,
    noun_forms: [String; 3],
    pub determiner_class: DeterminerClass,
    pub animacy: Animacy,
    pub gloss: Option<String>,
}

impl Lexeme {
    pub fn new(
        id: impl Into<String>,
        nom: impl Into<String>,
        acc: impl Into<String>,
        dat: impl Into<String>,
        determiner_class: DeterminerClass,
        animacy: Animacy,
    ) -> Self {
        Lexeme {
            id: id.into(),
            noun_forms: [nom.into(), acc.into(), dat.into()],
            determiner_class,
            animacy,
            gloss: None,
        }
    }

    pub fn noun_form(&self, case: Case) -> &str {
        &self.noun_forms[case_index(case)]
    }
}

fn case_index(case: Case) -> usize {
    match case {
        Case::Nom => 0,
        Case::Acc => 1,
        Case::Dat => 2,
    }
}

/// Determiner surface forms per (class, case).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminerTable {
    definite: [String; 3],
    indefinite: [String; 3],
}

impl Default for DeterminerTable {
    fn default() -> Self {
        DeterminerTable {
            definite: ["der".into(), "den".into(), "dem".into()],
            indefinite: ["ein".into(), "einen".into(), "einem".into()],
        }
    }
}

impl DeterminerTable {
    /// Builds a table from explicit NOM/ACC/DAT forms. The three forms of each
    /// class must be pairwise distinct, otherwise NPs of one lexeme collide.
    pub fn new(definite: [&str; 3], indefinite: [&str; 3]) -> Result<Self> {
        for (name, forms) in [("definite", &definite), ("indefinite", &indefinite)] {
            if forms[0] == forms[1] || forms[1] == forms[2] || forms[0] == forms[2] {
                return Err(Error::Config(format!(
                    "{name} determiner forms {forms:?} are not distinct"
                )));
            }
        }
        Ok(DeterminerTable {
            definite: definite.map(String::from),
            indefinite: indefinite.map(String::from),
        })
    }

    pub fn get(&self, class: DeterminerClass, case: Case) -> &str {
        let forms = match class {
            DeterminerClass::Definite => &self.definite,
            DeterminerClass::Indefinite => &self.indefinite,
        };
        &forms[case_index(case)]
    }
}

/// Immutable collection of lexemes plus the determiner table.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    lexemes: BTreeMap<String, Lexeme>,
    determiners: DeterminerTable,
}

impl Lexicon {
    pub fn new(lexemes: impl IntoIterator<Item = Lexeme>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for lexeme in lexemes {
            validate_forms(&lexeme)?;
            if map.contains_key(&lexeme.id) {
                return Err(Error::DuplicateLexeme(lexeme.id));
            }
            map.insert(lexeme.id.clone(), lexeme);
        }
        Ok(Lexicon {
            lexemes: map,
            determiners: DeterminerTable::default(),
        })
    }

    pub fn with_determiners(mut self, determiners: DeterminerTable) -> Self {
        self.determiners = determiners;
        self
    }

    pub fn len(&self) -> usize {
        self.lexemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexemes.is_empty()
    }

    pub fn get(&self, id: &str) -> Result<&Lexeme> {
        self.lexemes
            .get(id)
            .ok_or_else(|| Error::UnknownLexeme(id.to_string()))
    }

    pub fn lexemes(&self) -> impl Iterator<Item = &Lexeme> {
        self.lexemes.values()
    }

    pub fn determiners(&self) -> &DeterminerTable {
        &self.determiners
    }

    /// Surface NP for `lexeme_id` in `case`, using the lexeme's own
    /// determiner class.
    pub fn inflect(&self, lexeme_id: &str, case: Case) -> Result<String> {
        let lexeme = self.get(lexeme_id)?;
        Ok(self.inflect_with(lexeme, lexeme.determiner_class, case))
    }

    /// Surface NP with an explicit determiner class (template slot override).
    pub fn inflect_with(&self, lexeme: &Lexeme, class: DeterminerClass, case: Case) -> String {
        format!(
            "{} {}",
            self.determiners.get(class, case),
            lexeme.noun_form(case)
        )
    }
}

fn validate_forms(lexeme: &Lexeme) -> Result<()> {
    if lexeme.id.trim().is_empty() {
        return Err(Error::InvalidField {
            lexeme: lexeme.id.clone(),
            field: "id",
            message: "must not be empty".into(),
        });
    }
    for (case, field) in Case::ALL.iter().zip(["nom", "acc", "dat"]) {
        let form = lexeme.noun_form(*case);
        if form.is_empty() || form.chars().any(char::is_whitespace) {
            return Err(Error::InvalidField {
                lexeme: lexeme.id.clone(),
                field,
                message: format!("noun form {form:?} must be a single non-empty word"),
            });
        }
    }
    Ok(())
}

/// Reads a JSON Lines lexicon document.
pub fn load_lexicon(reader: impl BufRead) -> Result<Lexicon> {
    let mut lexemes = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let value: Value = serde_json::from_str(trimmed).map_err(|e| Error::Line {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let Value::Object(record) = value else {
            return Err(Error::Line {
                line: idx + 1,
                message: "expected a JSON object".into(),
            });
        };
        lexemes.push(parse_lexeme(&record)?);
    }
    Lexicon::new(lexemes)
}

fn parse_lexeme(record: &Map<String, Value>) -> Result<Lexeme> {
    let id = match record.get("id") {
        Some(Value::String(id)) => id.clone(),
        _ => {
            return Err(Error::MissingField {
                lexeme: "<unnamed>".into(),
                field: "id",
            })
        }
    };
    let text = |field: &'static str| -> Result<String> {
        match record.get(field) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(other) => Err(Error::InvalidField {
                lexeme: id.clone(),
                field,
                message: format!("expected a string, got {other}"),
            }),
            None => Err(Error::MissingField {
                lexeme: id.clone(),
                field,
            }),
        }
    };
    let nom = text("nom")?;
    let acc = text("acc")?;
    let dat = text("dat")?;
    let class_raw = text("determiner_class")?;
    let determiner_class =
        DeterminerClass::parse(&class_raw).ok_or_else(|| Error::InvalidField {
            lexeme: id.clone(),
            field: "determiner_class",
            message: format!("{class_raw:?} is not one of definite, indefinite"),
        })?;
    let animacy_raw = text("animacy")?;
    let animacy = Animacy::parse(&animacy_raw).ok_or_else(|| Error::InvalidField {
        lexeme: id.clone(),
        field: "animacy",
        message: format!("{animacy_raw:?} is not one of human, inanimate"),
    })?;
    let gloss = match record.get("gloss") {
        None | Some(Value::Null) => None,
        Some(Value::String(g)) => Some(g.clone()),
        Some(other) => {
            return Err(Error::InvalidField {
                lexeme: id,
                field: "gloss",
                message: format!("expected a string, got {other}"),
            })
        }
    };
    let mut lexeme = Lexeme::new(id, nom, acc, dat, determiner_class, animacy);
    lexeme.gloss = gloss;
    Ok(lexeme)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLDAT: &str = r#"
{"id": "soldat", "nom": "Soldat", "acc": "Soldaten", "dat": "Soldat", "determiner_class": "definite", "animacy": "human", "gloss": "soldier"}
{"id": "offizier", "nom": "Offizier", "acc": "Offizier", "dat": "Offizier", "determiner_class": "definite", "animacy": "human"}
# inanimate theme
{"id": "brief", "nom": "Brief", "acc": "Brief", "dat": "Brief", "determiner_class": "indefinite", "animacy": "inanimate", "gloss": "letter"}
"#;

    fn soldat_lexicon() -> Lexicon {
        load_lexicon(SOLDAT.as_bytes()).unwrap()
    }

    #[test]
    fn loads_records() {
        let lex = soldat_lexicon();
        assert_eq!(lex.len(), 3);
        assert_eq!(lex.get("soldat").unwrap().gloss.as_deref(), Some("soldier"));
        assert_eq!(lex.get("offizier").unwrap().gloss, None);
    }

    #[test]
    fn single_record() {
        let doc = r#"{"id": "soldat", "nom": "Soldat", "acc": "Soldaten", "dat": "Soldat", "determiner_class": "definite", "animacy": "human"}"#;
        let lex = load_lexicon(doc.as_bytes()).unwrap();
        assert_eq!(lex.len(), 1);
        // stored verbatim, including the colloquial dative
        assert_eq!(lex.get("soldat").unwrap().noun_form(Case::Dat), "Soldat");
    }

    #[test]
    fn empty_document_is_valid() {
        let lex = load_lexicon("".as_bytes()).unwrap();
        assert!(lex.is_empty());
    }

    #[test]
    fn inflects_figure_nps() {
        let lex = soldat_lexicon();
        assert_eq!(lex.inflect("soldat", Case::Nom).unwrap(), "der Soldat");
        assert_eq!(lex.inflect("offizier", Case::Dat).unwrap(), "dem Offizier");
        assert_eq!(lex.inflect("brief", Case::Acc).unwrap(), "einen Brief");
    }

    #[test]
    fn inflected_forms_are_pairwise_distinct() {
        let lex = soldat_lexicon();
        for lexeme in lex.lexemes() {
            let forms: Vec<String> = Case::ALL
                .iter()
                .map(|c| lex.inflect(&lexeme.id, *c).unwrap())
                .collect();
            assert_ne!(forms[0], forms[1]);
            assert_ne!(forms[1], forms[2]);
            assert_ne!(forms[0], forms[2]);
        }
    }

    #[test]
    fn unknown_lexeme() {
        let lex = soldat_lexicon();
        assert!(
            matches!(lex.inflect("hund", Case::Nom), Err(Error::UnknownLexeme(id)) if id == "hund")
        );
    }

    #[test]
    fn missing_dative_names_lexeme_and_field() {
        let doc = r#"{"id": "brief", "nom": "Brief", "acc": "Brief", "determiner_class": "indefinite", "animacy": "inanimate"}"#;
        match load_lexicon(doc.as_bytes()) {
            Err(Error::MissingField { lexeme, field }) => {
                assert_eq!(lexeme, "brief");
                assert_eq!(field, "dat");
            }
            other => panic!("expected missing field error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let doc = format!(
            "{}\n{}",
            SOLDAT.trim(),
            SOLDAT.trim().lines().next().unwrap()
        );
        assert!(
            matches!(load_lexicon(doc.as_bytes()), Err(Error::DuplicateLexeme(id)) if id == "soldat")
        );
    }

    #[test]
    fn bad_enum_value() {
        let doc = r#"{"id": "x", "nom": "X", "acc": "X", "dat": "X", "determiner_class": "partitive", "animacy": "human"}"#;
        assert!(matches!(
            load_lexicon(doc.as_bytes()),
            Err(Error::InvalidField {
                field: "determiner_class",
                ..
            })
        ));
    }

    #[test]
    fn determiner_table_requires_distinct_forms() {
        assert!(DeterminerTable::new(["der", "der", "dem"], ["ein", "einen", "einem"]).is_err());
        let table = DeterminerTable::new(["der", "den", "dem"], ["ein", "einen", "einem"]).unwrap();
        assert_eq!(table, DeterminerTable::default());
    }
}
