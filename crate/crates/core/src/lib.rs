//! Symbolic and numeric tools for ambient metrics of Walker and related
//! pseudo-Riemannian manifolds.

pub mod ambient;
pub mod expr;
pub mod frame;
pub mod oracle;
pub mod ratfunc;
pub mod report;
pub mod scalar;
pub mod series;
pub mod tensor;

pub use expr::{Expr, ExprError, Q};
pub use ratfunc::RatFunc;
pub use scalar::Scalar;
pub use series::RhoSeries;
