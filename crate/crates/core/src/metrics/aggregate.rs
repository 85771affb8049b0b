//! Averaging per-set AUCs by case order, role assignment and restriction,
//! with CSV and Markdown renderings in the published table layout.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genset::Restriction;
use crate::metrics::evaluate::SetAuc;

/// Reporting order for case orders (most to least canonical) and role
/// assignments (most to least plausible).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRanking {
    pub markedness_order: Vec<String>,
    pub plausibility_order: Vec<String>,
}

const CASE_ORDERS: [&str; 6] = ["NAD", "NDA", "AND", "ADN", "DNA", "DAN"];
const ROLE_LABELS: [&str; 6] = [
    "ag1,re2,pa3",
    "ag2,re1,pa3",
    "ag1,re3,pa2",
    "ag2,re3,pa1",
    "ag3,re1,pa2",
    "ag3,re2,pa1",
];

impl ConstraintRanking {
    pub fn new(markedness_order: Vec<String>, plausibility_order: Vec<String>) -> Result<Self> {
        check_permutation("markedness_order", &markedness_order, &CASE_ORDERS)?;
        check_permutation("plausibility_order", &plausibility_order, &ROLE_LABELS)?;
        Ok(ConstraintRanking {
            markedness_order,
            plausibility_order,
        })
    }

    /// Row order of the appendix tables: NDA, NAD, DNA, AND, DAN, ADN.
    pub fn appendix() -> Self {
        Self::from_static(["NDA", "NAD", "DNA", "AND", "DAN", "ADN"])
    }

    /// Row order of the human table in the main results: NAD first.
    pub fn main_text() -> Self {
        Self::from_static(["NAD", "NDA", "DNA", "AND", "DAN", "ADN"])
    }

    fn from_static(rows: [&str; 6]) -> Self {
        ConstraintRanking {
            markedness_order: rows.map(String::from).to_vec(),
            plausibility_order: ROLE_LABELS.map(String::from).to_vec(),
        }
    }

    /// Parses and validates a JSON ranking document.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ConstraintRanking = serde_json::from_str(text)?;
        Self::new(raw.markedness_order, raw.plausibility_order)
    }
}

impl Default for ConstraintRanking {
    fn default() -> Self {
        Self::appendix()
    }
}

fn check_permutation(axis: &'static str, got: &[String], expected: &[&str; 6]) -> Result<()> {
    let mut sorted: Vec<&str> = got.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    let mut want = expected.to_vec();
    want.sort_unstable();
    if sorted != want {
        return Err(Error::InvalidRanking {
            axis,
            message: format!("got {got:?}"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    /// 6x6 grid: rows case orders, columns role assignments.
    CaseOrderByRole,
    CaseOrder,
    Role,
    Restriction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub mean: f64,
    pub count: usize,
}

/// Mean AUCs in a ranked grid. Marginal and grand means are taken over the
/// underlying per-set AUCs; with a balanced design (the same number of sets
/// in every cell) they equal the means of the cells.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTable {
    pub group_by: GroupBy,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<Vec<Option<Cell>>>,
    pub row_means: Vec<f64>,
    pub col_means: Vec<f64>,
    pub grand_mean: f64,
    pub count: usize,
}

impl AggregateTable {
    pub fn cell(&self, row: &str, col: &str) -> Option<Cell> {
        let r = self.row_labels.iter().position(|l| l == row)?;
        let c = self.col_labels.iter().position(|l| l == col)?;
        self.cells[r][c]
    }

    pub fn row_mean(&self, row: &str) -> Option<f64> {
        self.row_labels
            .iter()
            .position(|l| l == row)
            .map(|r| self.row_means[r])
    }

    pub fn col_mean(&self, col: &str) -> Option<f64> {
        self.col_labels
            .iter()
            .position(|l| l == col)
            .map(|c| self.col_means[c])
    }

    fn is_grid(&self) -> bool {
        self.group_by == GroupBy::CaseOrderByRole
    }

    fn headers(&self) -> (&'static str, &'static str, &'static str) {
        match self.group_by {
            GroupBy::CaseOrderByRole => (
                "Case order / Role assignment",
                "Avg markedness",
                "Avg plausibility",
            ),
            GroupBy::CaseOrder => ("Case order", "", "Avg"),
            GroupBy::Role => ("Role assignment", "", "Avg"),
            GroupBy::Restriction => ("Minimal variation sets", "", ""),
        }
    }

    /// Markdown rendering with two decimals. The 6x6 grid gets a trailing
    /// markedness column and plausibility row.
    pub fn to_markdown(&self) -> String {
        let (corner, row_avg, col_avg) = self.headers();
        let mut out = String::new();
        let mut header = vec![corner.to_string()];
        header.extend(self.col_labels.iter().cloned());
        if self.is_grid() {
            header.push(row_avg.to_string());
        }
        push_md_row(&mut out, &header);
        push_md_row(&mut out, &vec!["---".to_string(); header.len()]);
        for (r, label) in self.row_labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend(
                self.cells[r]
                    .iter()
                    .map(|c| c.map_or(String::new(), |c| format!("{:.2}", c.mean))),
            );
            if self.is_grid() {
                row.push(format!("{:.2}", self.row_means[r]));
            }
            push_md_row(&mut out, &row);
        }
        if self.group_by != GroupBy::Restriction {
            let mut row = vec![col_avg.to_string()];
            if self.is_grid() {
                row.extend(self.col_means.iter().map(|m| format!("{m:.2}")));
            }
            row.push(format!("{:.2}", self.grand_mean));
            push_md_row(&mut out, &row);
        }
        out
    }

    /// CSV rendering at full precision, same layout as the Markdown table.
    pub fn to_csv(&self) -> Result<String> {
        let (corner, row_avg, col_avg) = self.headers();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![corner.to_string()];
        header.extend(self.col_labels.iter().cloned());
        if self.is_grid() {
            header.push(row_avg.to_string());
        }
        w.write_record(&header)?;
        for (r, label) in self.row_labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend(
                self.cells[r]
                    .iter()
                    .map(|c| c.map_or(String::new(), |c| c.mean.to_string())),
            );
            if self.is_grid() {
                row.push(self.row_means[r].to_string());
            }
            w.write_record(&row)?;
        }
        if self.group_by != GroupBy::Restriction {
            let mut row = vec![col_avg.to_string()];
            if self.is_grid() {
                row.extend(self.col_means.iter().map(f64::to_string));
            }
            row.push(self.grand_mean.to_string());
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn push_md_row(out: &mut String, cells: &[String]) {
    let _ = writeln!(out, "| {} |", cells.join(" | "));
}

fn ranked_labels(axis: &'static str, present: &[&str], order: &[String]) -> Result<Vec<String>> {
    for label in present {
        if !order.iter().any(|o| o == label) {
            return Err(Error::UnknownLabel {
                axis,
                label: label.to_string(),
            });
        }
    }
    Ok(order
        .iter()
        .filter(|o| present.contains(&o.as_str()))
        .cloned()
        .collect())
}

fn restriction_order() -> Vec<String> {
    Restriction::EVERY
        .iter()
        .map(|r| r.display_label().to_string())
        .collect()
}

/// Groups per-set AUCs. Rows and columns contain only labels that occur,
/// ordered by the ranking.
pub fn aggregate(
    set_aucs: &[SetAuc],
    ranking: &ConstraintRanking,
    group_by: GroupBy,
) -> Result<AggregateTable> {
    if set_aucs.is_empty() {
        return Err(Error::EmptySample("set AUC"));
    }
    let keys = |a: &SetAuc| -> (String, String) {
        match group_by {
            GroupBy::CaseOrderByRole => (a.case_order.clone(), a.role_label.clone()),
            GroupBy::CaseOrder => (a.case_order.clone(), "AUC".into()),
            GroupBy::Role => (a.role_label.clone(), "AUC".into()),
            GroupBy::Restriction => (a.restriction.display_label().into(), "AUC".into()),
        }
    };
    let pairs: Vec<(String, String)> = set_aucs.iter().map(keys).collect();
    let mut present_rows: Vec<&str> = pairs.iter().map(|p| p.0.as_str()).collect();
    present_rows.sort_unstable();
    present_rows.dedup();
    let mut present_cols: Vec<&str> = pairs.iter().map(|p| p.1.as_str()).collect();
    present_cols.sort_unstable();
    present_cols.dedup();

    let row_labels = match group_by {
        GroupBy::CaseOrderByRole | GroupBy::CaseOrder => {
            ranked_labels("case order", &present_rows, &ranking.markedness_order)?
        }
        GroupBy::Role => ranked_labels(
            "role assignment",
            &present_rows,
            &ranking.plausibility_order,
        )?,
        GroupBy::Restriction => ranked_labels("restriction", &present_rows, &restriction_order())?,
    };
    let col_labels = match group_by {
        GroupBy::CaseOrderByRole => ranked_labels(
            "role assignment",
            &present_cols,
            &ranking.plausibility_order,
        )?,
        _ => vec!["AUC".to_string()],
    };
    let row_pos: HashMap<&str, usize> = row_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let col_pos: HashMap<&str, usize> = col_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    let (rows, cols) = (row_labels.len(), col_labels.len());
    let mut sums = vec![vec![(0.0f64, 0usize); cols]; rows];
    let mut row_sums = vec![(0.0f64, 0usize); rows];
    let mut col_sums = vec![(0.0f64, 0usize); cols];
    let mut total = 0.0;
    for ((row, col), a) in pairs.iter().zip(set_aucs) {
        let (r, c) = (row_pos[row.as_str()], col_pos[col.as_str()]);
        for slot in [&mut sums[r][c], &mut row_sums[r], &mut col_sums[c]] {
            slot.0 += a.auc;
            slot.1 += 1;
        }
        total += a.auc;
    }
    let mean = |(s, n): (f64, usize)| s / n as f64;
    Ok(AggregateTable {
        group_by,
        cells: sums
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(s, n)| {
                        (n > 0).then(|| Cell {
                            mean: s / n as f64,
                            count: n,
                        })
                    })
                    .collect()
            })
            .collect(),
        row_means: row_sums.into_iter().map(mean).collect(),
        col_means: col_sums.into_iter().map(mean).collect(),
        grand_mean: total / set_aucs.len() as f64,
        count: set_aucs.len(),
        row_labels,
        col_labels,
    })
}

/// Several scorers side by side: rows are labels of a one-dimensional
/// grouping, columns are scorers. Used for the per-case-order,
/// per-role and per-restriction comparison tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub row_header: String,
    pub row_labels: Vec<String>,
    pub scorers: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    /// Grand mean per scorer, if an average row is rendered.
    pub averages: Option<Vec<f64>>,
}

impl ComparisonTable {
    /// Combines one-dimensional aggregates. Row order comes from the first
    /// table, extended by unseen labels of later tables.
    pub fn from_tables(
        row_header: &str,
        tables: &[(String, AggregateTable)],
        with_average: bool,
    ) -> Self {
        let mut row_labels: Vec<String> = Vec::new();
        for (_, t) in tables {
            for l in &t.row_labels {
                if !row_labels.contains(l) {
                    row_labels.push(l.clone());
                }
            }
        }
        let values = row_labels
            .iter()
            .map(|row| tables.iter().map(|(_, t)| t.row_mean(row)).collect())
            .collect();
        ComparisonTable {
            row_header: row_header.to_string(),
            row_labels,
            scorers: tables.iter().map(|(s, _)| s.clone()).collect(),
            values,
            averages: with_average.then(|| tables.iter().map(|(_, t)| t.grand_mean).collect()),
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let mut header = vec![self.row_header.clone()];
        header.extend(self.scorers.iter().cloned());
        push_md_row(&mut out, &header);
        push_md_row(&mut out, &vec!["---".to_string(); header.len()]);
        for (label, vals) in self.row_labels.iter().zip(&self.values) {
            let mut row = vec![label.clone()];
            row.extend(
                vals.iter()
                    .map(|v| v.map_or(String::new(), |v| format!("{v:.2}"))),
            );
            push_md_row(&mut out, &row);
        }
        if let Some(avg) = &self.averages {
            let mut row = vec!["Avg".to_string()];
            row.extend(avg.iter().map(|v| format!("{v:.2}")));
            push_md_row(&mut out, &row);
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.row_header.clone()];
        header.extend(self.scorers.iter().cloned());
        w.write_record(&header)?;
        for (label, vals) in self.row_labels.iter().zip(&self.values) {
            let mut row = vec![label.clone()];
            row.extend(
                vals.iter()
                    .map(|v| v.map_or(String::new(), |v| v.to_string())),
            );
            w.write_record(&row)?;
        }
        if let Some(avg) = &self.averages {
            let mut row = vec!["Avg".to_string()];
            row.extend(avg.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}
