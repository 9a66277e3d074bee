//! Concolic search: run the program on a feed, record the pick-dependent
//! branches it took, and solve for feeds that flip them.
//!
//! Runs are merged into a [`PathTree`]. Each open direction becomes a
//! [`Target`] in three queues; targets are popped from the depth-first or
//! breadth-first queue at random, solved, and the model seeds the next
//! run's feed. Targets deeper than the current cap wait until the shallower
//! tree is used up.

mod queue;
mod report;
mod search;
mod tree;

pub use queue::{Horizon, Target, TargetQueues};
pub use report::{Blame, Incomplete, Refutation, Report, SearchStats, Verdict, HEADER, NO_ERRORS};
pub use search::{acquire_targets, explain, search, search_with, solve_target, SearchConfig, SearchError, Solved};
pub use tree::{Child, Contradiction, PathKey, PathTree, Status};

#[cfg(test)]
mod tests;
