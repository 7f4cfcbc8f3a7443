//! Solving methods behind one trait, registered by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::deduction::Environment;
use crate::lang::ProblemCdl;
use crate::mcts::{run_search, MctsConfig};
use crate::policy::PolicyModel;
use crate::search::{solve_backward, solve_forward, Direction, SearchBudget, SearchResult, Solver, Strategy};

pub struct BaselineSolver {
    name: String,
    direction: Direction,
    strategy: Strategy,
    budget: SearchBudget,
}

impl BaselineSolver {
    pub fn new(direction: Direction, strategy: Strategy, budget: SearchBudget) -> Self {
        BaselineSolver { name: format!("{}-{}", direction.label(), strategy.label()), direction, strategy, budget }
    }
}

impl Solver for BaselineSolver {
    fn name(&self) -> &str {
        &self.name
    }

    fn solve(&self, env: &Environment, problem: &ProblemCdl) -> SearchResult {
        match self.direction {
            Direction::Forward => solve_forward(env, problem, self.strategy, &self.budget),
            Direction::Backward => solve_backward(env, problem, self.strategy, &self.budget),
        }
    }
}

/// Tree search with `rl` guiding expansion and `sl` driving rollouts.
pub struct MctsSolver {
    pub rl: Arc<PolicyModel>,
    pub sl: Arc<PolicyModel>,
    pub config: MctsConfig,
}

impl Solver for MctsSolver {
    fn name(&self) -> &str {
        "mcts"
    }

    fn solve(&self, env: &Environment, problem: &ProblemCdl) -> SearchResult {
        let out = run_search(env, problem, &self.rl, &self.sl, &self.config);
        SearchResult {
            solved: out.solved,
            sequence: out.sequence,
            nodes_expanded: out.iterations,
            elapsed: out.elapsed,
            strategy: "mcts".into(),
        }
    }
}

#[derive(Default)]
pub struct Registry {
    solvers: BTreeMap<String, Box<dyn Solver>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The eight baselines plus tree search under one policy.
    pub fn standard(budget: &SearchBudget, mcts: &MctsConfig, model: Arc<PolicyModel>) -> Self {
        let mut r = Registry::new();
        r.register(Box::new(MctsSolver { rl: model.clone(), sl: model, config: mcts.clone() }));
        for direction in [Direction::Forward, Direction::Backward] {
            for strategy in Strategy::ALL {
                r.register(Box::new(BaselineSolver::new(direction, strategy, budget.clone())));
            }
        }
        r
    }

    /// Replaces any solver with the same name.
    pub fn register(&mut self, solver: Box<dyn Solver>) {
        self.solvers.insert(solver.name().to_string(), solver);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Solver> {
        self.solvers.get(name).map(|s| s.as_ref())
    }

    /// Registered names in the order of [`METHODS`], then any others sorted.
    pub fn names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = METHODS.iter().copied().filter(|m| self.solvers.contains_key(*m)).collect();
        out.extend(self.solvers.keys().map(String::as_str).filter(|k| !METHODS.contains(k)));
        out
    }
}

pub const METHODS: [&str; 9] =
    ["mcts", "fw-bfs", "fw-dfs", "fw-rs", "fw-bs", "bw-bfs", "bw-dfs", "bw-rs", "bw-bs"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_registry_has_every_method() {
        let model = Arc::new(PolicyModel::zeros(1, vec!["a".into()]));
        let r = Registry::standard(&SearchBudget::default(), &MctsConfig::default(), model);
        assert_eq!(r.names(), METHODS.to_vec());
        for m in METHODS {
            assert_eq!(r.get(m).unwrap().name(), m);
        }
        assert!(r.get("fw-astar").is_none());
    }
}
