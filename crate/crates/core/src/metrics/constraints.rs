//! Descriptive checks of the two word-order constraints on a 6x6 table:
//! nominative-first orders should outscore nominative-final ones, and for the
//! canonical role assignments dative-before-accusative orders should
//! outscore their accusative-before-dative counterparts.

use std::fmt;

use crate::error::{Error, Result};
use crate::metrics::aggregate::{AggregateTable, GroupBy};

const NOM_INITIAL: [&str; 2] = ["NAD", "NDA"];
const NOM_FINAL: [&str; 2] = ["DAN", "ADN"];
/// (dative-first, accusative-first) pairs differing only in D/A order.
const DAT_ACC_PAIRS: [(&str, &str); 3] = [("NDA", "NAD"), ("DNA", "AND"), ("DAN", "ADN")];
const CANONICAL_ROLES: [&str; 2] = ["ag1,re2,pa3", "ag2,re1,pa3"];

#[derive(Debug, Clone, PartialEq)]
pub struct NomAlign {
    pub initial_mean: f64,
    pub final_mean: f64,
    pub delta: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatAlign {
    pub role_label: String,
    /// `cell(dative-first) - cell(accusative-first)` for each pair.
    pub pair_deltas: Vec<(String, String, f64)>,
    pub delta: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub nomalign: NomAlign,
    pub datalign: Vec<DatAlign>,
}

impl ConstraintReport {
    pub fn datalign_holds(&self) -> bool {
        self.datalign.iter().all(|d| d.holds)
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = &self.nomalign;
        writeln!(
            f,
            "NOMALIGN: nominative-initial {:.4} vs nominative-final {:.4} (delta {:+.4}) -> {}",
            n.initial_mean,
            n.final_mean,
            n.delta,
            if n.holds { "holds" } else { "does not hold" }
        )?;
        for d in &self.datalign {
            let pairs: Vec<String> = d
                .pair_deltas
                .iter()
                .map(|(a, b, v)| format!("{a}-{b} {v:+.4}"))
                .collect();
            writeln!(
                f,
                "DATALIGN [{}]: mean delta {:+.4} ({}) -> {}",
                d.role_label,
                d.delta,
                pairs.join(", "),
                if d.holds { "holds" } else { "does not hold" }
            )?;
        }
        Ok(())
    }
}

pub fn constraint_check(table: &AggregateTable) -> Result<ConstraintReport> {
    if table.group_by != GroupBy::CaseOrderByRole {
        return Err(Error::MalformedTable(
            "expected a case order x role assignment table".into(),
        ));
    }
    let row = |label: &str| {
        table
            .row_mean(label)
            .ok_or_else(|| Error::MalformedTable(format!("missing case order row {label}")))
    };
    let initial_mean = (row(NOM_INITIAL[0])? + row(NOM_INITIAL[1])?) / 2.0;
    let final_mean = (row(NOM_FINAL[0])? + row(NOM_FINAL[1])?) / 2.0;
    let delta = initial_mean - final_mean;
    let nomalign = NomAlign {
        initial_mean,
        final_mean,
        delta,
        holds: delta > 0.0,
    };

    let mut datalign = Vec::new();
    for role in CANONICAL_ROLES {
        let cell = |order: &str| {
            table
                .cell(order, role)
                .map(|c| c.mean)
                .ok_or_else(|| Error::MalformedTable(format!("missing cell ({order}, {role})")))
        };
        let mut pair_deltas = Vec::new();
        for (dat_first, acc_first) in DAT_ACC_PAIRS {
            pair_deltas.push((
                dat_first.to_string(),
                acc_first.to_string(),
                cell(dat_first)? - cell(acc_first)?,
            ));
        }
        let delta = pair_deltas.iter().map(|p| p.2).sum::<f64>() / pair_deltas.len() as f64;
        datalign.push(DatAlign {
            role_label: role.to_string(),
            pair_deltas,
            delta,
            holds: delta > 0.0,
        });
    }
    Ok(ConstraintReport { nomalign, datalign })
}
