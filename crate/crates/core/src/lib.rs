//! Workforce task allocation that balances business goals against worker
//! well-being.
//!
//! Each analyst's allocation is scored by the probability of completing it
//! within their availability (weighted towards high-priority work), optionally
//! multiplied by how rewarding and how preferred the tasks are. Analyst
//! utilities are combined with a Nash product, so no allocation can buy a
//! better global score by sacrificing one worker entirely.
//!
//! * [`model`]: tasks, analysts, scenarios, allocations.
//! * [`objectives`]: the utility functions and the fairness metric.
//! * [`ga`]: the genetic optimiser.
//! * [`baselines`]: greedy, hill-climbing and simulated manager strategies.
//! * [`scenario`]: simulated scenario generation and pre-screening.
//! * [`workflow`]: schedules, manager amendments and re-optimisation.
//! * [`bench`]: the experiment harness.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod ga;
pub mod model;
pub mod objectives;
pub mod scenario;
pub mod workflow;

pub use error::{Error, Result};
