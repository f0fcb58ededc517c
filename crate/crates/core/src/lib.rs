pub mod analysis;
pub mod coordinator;
pub mod cost;
pub mod error;
pub mod evaluators;
pub mod evolution;
pub mod pareto;
pub mod space;

pub use error::{Error, Result};

/// Objective point at the precision the search uses.
pub type Point64 = pareto::Point<f64>;
/// Single-precision objective point for compact bulk analysis.
pub type Point32 = pareto::Point<f32>;
pub type CorrelationMatrix64 = analysis::CorrelationMatrix<f64>;
pub type CorrelationMatrix32 = analysis::CorrelationMatrix<f32>;
