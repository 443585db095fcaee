//! Unit commitment by evolved priority heuristics.
//!
//! The crate scores on/off schedules with a penalty-based cost model, decodes
//! small arithmetic priority rules into schedules, and searches the space of
//! such rules with a pluggable sampler (a chat-completion model or an offline
//! mutation operator). A genetic algorithm over raw schedules and an
//! exhaustive oracle serve as baselines.

pub mod dispatch;
pub mod evaluate;
pub mod ga;
pub mod instance;
pub mod lang;
pub mod oracle;
pub mod report;
pub mod sampler;
pub mod search;

pub use dispatch::{dispatch, DispatchMatrix};
pub use evaluate::{evaluate, ScheduleEvaluation};
pub use ga::{repair, run_ga, GaConfig};
pub use instance::{load_instance, store_instance, CommitmentMatrix, UcInstance, UnitSpec};
pub use lang::{decode, HeuristicProgram};
pub use oracle::solve_exhaustive;
pub use report::SearchReport;
pub use search::{evaluate_candidate, run_search, SearchConfig};
