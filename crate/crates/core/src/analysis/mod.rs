//! Post-search analytics over journaled records.

mod correlation;
mod export;
mod factors;

pub use correlation::{correlation_matrix, correlation_of_columns, pearson, CorrelationMatrix};
pub use export::{export_correlation, export_front, front_rows, ExportFormat, FrontRow};
pub use factors::{
    encoding_factors, extract_factors, records_up_to_round, FactorVector, FACTOR_NAMES,
};
