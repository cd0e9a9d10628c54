//! Coordinate tensor calculus: metrics, connection, curvature, conformal
//! tensors, two-metric formulas and nilpotency diagnostics.

mod curvature;
mod field;
mod metric;
mod nilpotency;
mod relative;

pub use curvature::{
    christoffel_of, contracted_bianchi_defect, covariant_derivative_with, curvature_invariants, first_bianchi_zero,
    lie_derivative, metricity_holds, weyl_trace, Geometry,
};
pub use field::{indices, Slot, Symmetry, TensorField};
pub use metric::{adjugate, determinant, invert_matrix, Metric};
pub use nilpotency::{nilpotency_report, ricci_nilpotency, NilpotencyReport, RicciNilpotency};
pub use relative::{connection_difference, relative_ricci};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("metric is identically singular")]
    Singular,
    #[error("metric is not symmetric: g[{0}][{1}] != g[{1}][{0}]")]
    NotSymmetric(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("{op} needs dimension at least {min}, got {n}")]
    DimensionTooLow { op: &'static str, n: usize, min: usize },
    #[error("determinant is not invertible in the coefficient ring")]
    NotInvertible,
}
