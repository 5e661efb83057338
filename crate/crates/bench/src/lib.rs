//! Evaluation reports, solution methods and the `ttr` command line.

pub mod cli;
pub mod error;
pub mod eval;
pub mod method;
pub mod plot;
pub mod report;

pub use error::BenchError;
pub use eval::{evaluate, Baseline};
pub use method::{Method, Solver};
pub use report::{gap, gap_percent, EvalReport, MethodSummary, ReportRow};
