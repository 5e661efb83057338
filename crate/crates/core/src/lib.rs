//! Train timetable rescheduling core.
//!
//! Data model, objective and constraint checking, the heuristic timetabling
//! layer, running-order search, local search, the event graph used as a
//! learning state, instance generation, exhaustive search and LP export.
//!
//! Objective arithmetic is generic over [`Scalar`]; the aliases below fix
//! common choices.

pub mod event_graph;
pub mod instance_gen;
pub mod io;
pub mod local_search;
pub mod lp;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod orders;
pub mod scalar;
pub mod schedule;
pub mod timetable;
pub mod validate;

pub use event_graph::EventGraph;
pub use model::{Instance, LpExportConfig, Minutes, ModelError, ObjectiveConfig, Solution, TrainId};
pub use scalar::Scalar;
pub use schedule::{Pipeline, Schedule};
pub use timetable::TimetableConfig;
pub use validate::{validate, Profile, Violation};

/// Exact objective arithmetic.
pub type Rational = num_rational::Rational64;
pub type ExactObjective = ObjectiveConfig<Rational>;
pub type F64Objective = ObjectiveConfig<f64>;
pub type F32Objective = ObjectiveConfig<f32>;
