//! Numerical toolkit for multi-tiling measures over closed subgroups of R^d:
//! group arithmetic, measure assembly, translation-matrix determinant
//! certificates, structured spectrum construction and frame bound estimation.

pub mod config;
pub mod detcond;
pub mod error;
pub mod frame;
pub mod group;
pub mod measure;
pub mod report;
pub mod scenario;
pub mod spectrum;

pub use error::{Error, Result};
