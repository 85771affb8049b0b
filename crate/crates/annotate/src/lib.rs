//! Collection of human acceptability ratings: seeded assignments under
//! per-annotator and global constraints, warm-up and filler items, an
//! append-only rating log and a small versioned HTTP interface.

pub mod assignment;
pub mod error;
pub mod http;
pub mod service;
pub mod store;

pub use assignment::{
    create_assignment, load_fillers, Assignment, AssignmentConfig, Filler, ItemPool,
};
pub use error::{ServiceError, ServiceResult};
pub use service::{AnnotationService, ServiceConfig};
