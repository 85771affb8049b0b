//! Evaluation: ROC/AUC, per-set scores, aggregate tables, constraint checks
//! and human-rating processing.

pub mod aggregate;
pub mod annotations;
pub mod auc;
pub mod constraints;
pub mod correlation;
pub mod evaluate;

pub use aggregate::{aggregate, AggregateTable, Cell, ComparisonTable, ConstraintRanking, GroupBy};
pub use annotations::{
    human_scores, normalize_annotations, qc_filter, read_annotations, write_annotations,
    AnnotationRecord, FillerKind, NormalizedScores, QcOutcome, QcRemoval,
};
pub use auc::{auc, roc_curve, RocPoint};
pub use constraints::{constraint_check, ConstraintReport};
pub use correlation::{correlate_scores, correlate_set_aucs, pearson, Correlation};
pub use evaluate::{evaluate_sets, read_set_aucs, set_roc_curves, write_set_aucs, SetAuc};
