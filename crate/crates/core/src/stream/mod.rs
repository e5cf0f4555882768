//! Stream circuits over truncated formal power series.

pub mod circuit;
pub mod hsc;
pub mod matrix;
pub mod series;

pub use circuit::{
    semantics, solve_feedback, solve_feedback_iterative, validity_semantic, validity_syntactic,
    Solver,
};
pub use hsc::{Ideal, ScInstance, WireAssertion};
pub use matrix::SeriesMatrix;
pub use series::Series;
