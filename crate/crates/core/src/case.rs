//! Grammatical case, case sequences, item arrangements and role labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Morphological case of a masculine singular noun phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Case {
    Nom,
    Acc,
    Dat,
}

impl Case {
    /// Cases in canonical order NOM < ACC < DAT.
    pub const ALL: [Case; 3] = [Case::Nom, Case::Acc, Case::Dat];

    pub fn letter(self) -> char {
        match self {
            Case::Nom => 'N',
            Case::Acc => 'A',
            Case::Dat => 'D',
        }
    }

    pub fn from_letter(c: char) -> Option<Case> {
        match c {
            'N' => Some(Case::Nom),
            'A' => Some(Case::Acc),
            'D' => Some(Case::Dat),
            _ => None,
        }
    }

    /// Semantic role carried by an argument in this case.
    pub fn role(self) -> Role {
        match self {
            Case::Nom => Role::Agent,
            Case::Acc => Role::Patient,
            Case::Dat => Role::Recipient,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Case::Nom => "NOM",
            Case::Acc => "ACC",
            Case::Dat => "DAT",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Thematic role. The derived ordering (agent, recipient, patient) is the
/// order used when rendering role labels such as `ag1,re2,pa3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Agent,
    Recipient,
    Patient,
}

impl Role {
    pub fn prefix(self) -> &'static str {
        match self {
            Role::Agent => "ag",
            Role::Recipient => "re",
            Role::Patient => "pa",
        }
    }
}

/// The cases of the three NPs from left to right, e.g. `NDA`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaseSequence(pub [Case; 3]);

impl CaseSequence {
    /// All 27 sequences in lexicographic order under NOM < ACC < DAT.
    pub fn all() -> impl Iterator<Item = CaseSequence> {
        Case::ALL.into_iter().flat_map(|a| {
            Case::ALL
                .into_iter()
                .flat_map(move |b| Case::ALL.into_iter().map(move |c| CaseSequence([a, b, c])))
        })
    }

    /// The 6 permutations of {NOM, ACC, DAT}, lexicographic.
    pub fn permutations() -> impl Iterator<Item = CaseSequence> {
        Self::all().filter(|s| s.is_acceptable())
    }

    /// The 18 sequences with exactly one duplicated case, lexicographic.
    pub fn violations() -> impl Iterator<Item = CaseSequence> {
        Self::all().filter(|s| s.doubled_case().is_some())
    }

    pub fn cases(&self) -> [Case; 3] {
        self.0
    }

    pub fn is_acceptable(&self) -> bool {
        let [a, b, c] = self.0;
        a != b && b != c && a != c
    }

    /// The case occurring exactly twice, if any. All-same sequences have none.
    pub fn doubled_case(&self) -> Option<Case> {
        let [a, b, c] = self.0;
        if a == b && b == c {
            None
        } else if a == b || a == c {
            Some(a)
        } else if b == c {
            Some(b)
        } else {
            None
        }
    }

    pub fn with_case_at(&self, position: usize, case: Case) -> CaseSequence {
        let mut cases = self.0;
        cases[position] = case;
        CaseSequence(cases)
    }

    /// Three-letter label such as `NDA`.
    pub fn label(&self) -> String {
        self.0.iter().map(|c| c.letter()).collect()
    }
}

impl fmt::Display for CaseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for CaseSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cases: Vec<Case> = s
            .chars()
            .map(Case::from_letter)
            .collect::<Option<_>>()
            .ok_or_else(|| {
                Error::Parse(format!(
                    "invalid case sequence {s:?}: expected three of N, A, D"
                ))
            })?;
        let cases: [Case; 3] = cases
            .try_into()
            .map_err(|_| Error::Parse(format!("case sequence {s:?} must have length 3")))?;
        Ok(CaseSequence(cases))
    }
}

/// Which lexical item (1, 2 or 3) fills each of the three NP positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arrangement([u8; 3]);

impl Arrangement {
    pub const IDENTITY: Arrangement = Arrangement([1, 2, 3]);

    pub fn new(item_at_position: [u8; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &item in &item_at_position {
            if !(1..=3).contains(&item) || seen[(item - 1) as usize] {
                return Err(Error::Parse(format!(
                    "arrangement {item_at_position:?} is not a permutation of 1,2,3"
                )));
            }
            seen[(item - 1) as usize] = true;
        }
        Ok(Arrangement(item_at_position))
    }

    /// All 6 arrangements in lexicographic order.
    pub fn all() -> [Arrangement; 6] {
        [
            Arrangement([1, 2, 3]),
            Arrangement([1, 3, 2]),
            Arrangement([2, 1, 3]),
            Arrangement([2, 3, 1]),
            Arrangement([3, 1, 2]),
            Arrangement([3, 2, 1]),
        ]
    }

    /// 1-based item number at a 0-based position.
    pub fn item_at(&self, position: usize) -> u8 {
        self.0[position]
    }

    pub fn items(&self) -> [u8; 3] {
        self.0
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|i| char::from(b'0' + i)).collect()
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Arrangement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits: Vec<u8> = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Parse(format!("invalid arrangement {s:?}")))?;
        let digits: [u8; 3] = digits
            .try_into()
            .map_err(|_| Error::Parse(format!("arrangement {s:?} must have length 3")))?;
        Arrangement::new(digits)
    }
}

/// Role label for a realized sentence: every item receives the role of the
/// case at its position. Entries are ordered by role (ag, re, pa) and then by
/// item number, so `NDA`/`123` gives `ag1,re2,pa3` and `NNA`/`123` gives
/// `ag1,ag2,pa3`.
pub fn role_label(cases: &CaseSequence, arrangement: &Arrangement) -> String {
    let mut entries: Vec<(Role, u8)> = (0..3)
        .map(|pos| (cases.0[pos].role(), arrangement.item_at(pos)))
        .collect();
    entries.sort();
    entries
        .iter()
        .map(|(role, item)| format!("{}{}", role.prefix(), item))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_counts() {
        assert_eq!(CaseSequence::all().count(), 27);
        assert_eq!(CaseSequence::permutations().count(), 6);
        // 27 - 6 permutations - 3 all-same
        assert_eq!(CaseSequence::violations().count(), 18);
    }

    #[test]
    fn permutation_order_is_lexicographic() {
        let labels: Vec<String> = CaseSequence::permutations().map(|s| s.label()).collect();
        assert_eq!(labels, ["NAD", "NDA", "AND", "ADN", "DNA", "DAN"]);
    }

    #[test]
    fn doubled_case_detection() {
        assert_eq!(
            "NNA".parse::<CaseSequence>().unwrap().doubled_case(),
            Some(Case::Nom)
        );
        assert_eq!(
            "NAA".parse::<CaseSequence>().unwrap().doubled_case(),
            Some(Case::Acc)
        );
        assert_eq!(
            "DND".parse::<CaseSequence>().unwrap().doubled_case(),
            Some(Case::Dat)
        );
        assert_eq!("NDA".parse::<CaseSequence>().unwrap().doubled_case(), None);
        assert_eq!("AAA".parse::<CaseSequence>().unwrap().doubled_case(), None);
    }

    #[test]
    fn role_labels_match_table_headers() {
        let nda: CaseSequence = "NDA".parse().unwrap();
        let labels: Vec<String> = Arrangement::all()
            .iter()
            .map(|arr| role_label(&nda, arr))
            .collect();
        assert_eq!(
            labels,
            [
                "ag1,re2,pa3",
                "ag1,re3,pa2",
                "ag2,re1,pa3",
                "ag2,re3,pa1",
                "ag3,re1,pa2",
                "ag3,re2,pa1"
            ]
        );
    }

    #[test]
    fn role_label_is_invariant_to_case_reordering() {
        // DNA with items 2,1,3 keeps item 1 as agent and item 2 as recipient
        let dna: CaseSequence = "DNA".parse().unwrap();
        let arr: Arrangement = "213".parse().unwrap();
        assert_eq!(role_label(&dna, &arr), "ag1,re2,pa3");
    }

    #[test]
    fn violation_role_labels() {
        let id = Arrangement::IDENTITY;
        assert_eq!(role_label(&"NNA".parse().unwrap(), &id), "ag1,ag2,pa3");
        assert_eq!(role_label(&"NAA".parse().unwrap(), &id), "ag1,pa2,pa3");
        assert_eq!(role_label(&"NDD".parse().unwrap(), &id), "ag1,re2,re3");
    }

    #[test]
    fn rejects_bad_arrangements() {
        assert!("112".parse::<Arrangement>().is_err());
        assert!("124".parse::<Arrangement>().is_err());
        assert!("12".parse::<Arrangement>().is_err());
        assert!("NDX".parse::<CaseSequence>().is_err());
    }
}
