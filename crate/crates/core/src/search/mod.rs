//! Baseline searchers over the deduction environment and the benchmark
//! harness that compares them.

mod backward;
mod bench;
mod forward;

pub use backward::{solve_backward, Subgoal};
pub use bench::{benchmark, BenchProblem, BenchRow, BenchTable, ProblemOutcome};
pub use forward::solve_forward;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::deduction::Environment;
use crate::lang::{Action, ProblemCdl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Bfs,
    Dfs,
    Random,
    Beam,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::Bfs => "bfs",
            Strategy::Dfs => "dfs",
            Strategy::Random => "rs",
            Strategy::Beam => "bs",
        }
    }

    pub const ALL: [Strategy; 4] = [Strategy::Bfs, Strategy::Dfs, Strategy::Random, Strategy::Beam];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Forward => "fw",
            Direction::Backward => "bw",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Upper bound on node expansions (forward: theorem applications).
    pub max_nodes: usize,
    pub max_depth: usize,
    /// Seconds.
    pub wall_timeout: f64,
    pub beam_width: usize,
    pub rng_seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_nodes: 500, max_depth: 10, wall_timeout: 60.0, beam_width: 3, rng_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub solved: bool,
    pub sequence: Vec<Action>,
    pub nodes_expanded: usize,
    pub elapsed: f64,
    pub strategy: String,
}

/// Wall-clock budget; a zero timeout is expired from the start.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    start: Instant,
    limit: Option<Duration>,
}

impl Deadline {
    pub fn new(seconds: f64) -> Self {
        let limit = if seconds.is_finite() { Some(Duration::from_secs_f64(seconds.max(0.0))) } else { None };
        Deadline { start: Instant::now(), limit }
    }

    pub fn expired(&self) -> bool {
        self.limit.is_some_and(|l| l.is_zero() || self.start.elapsed() >= l)
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// A named solving method. Implementations are registered in
/// [`crate::solver::Registry`] and selected at runtime.
pub trait Solver: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, env: &Environment, problem: &ProblemCdl) -> SearchResult;
}

/// Re-verifies a candidate sequence from scratch; searchers only report what
/// the verifier accepts.
pub(crate) fn confirm(env: &Environment, problem: &ProblemCdl, sequence: &[Action]) -> bool {
    env.verify_sequence(problem, sequence).is_ok_and(|v| v.solved)
}
