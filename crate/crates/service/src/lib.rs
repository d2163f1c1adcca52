//! The allocation engine behind HTTP and a command line: runs are created
//! from a scenario, screened at once, optimised in the background and can
//! be amended by a manager into child runs.

pub mod api;
pub mod cli;
pub mod record;
pub mod service;
pub mod store;

pub use record::{RunRecord, RunStatus};
pub use service::{AmendRun, CreateRun, EvaluateAmendments, Evaluation, RunCreated, Service, ServiceError};
pub use store::RunStore;
