//! Policy-guided Monte Carlo tree search over theorem applications, and the
//! generation loop that trains the policy from its own search trajectories.

mod search;
mod train;

pub use search::{run_search, search_with_tree, simulate, SearchOutcome, Tree, TreeNode};
pub use train::{train_loop, GenerationMetrics, Lineage};

use serde::{Deserialize, Serialize};

use crate::lang::Action;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MctsConfig {
    pub c: f64,
    pub gamma: f64,
    pub simulation_num: usize,
    pub max_sim_steps: usize,
    pub max_iterations: usize,
    /// Seconds.
    pub wall_timeout: f64,
    pub seed: u64,
    /// Accept a goal-reaching rollout as a solution (tree path plus the
    /// rollout, pruned and re-verified) instead of waiting for the tree to
    /// expand the solved node itself.
    pub rollout_solutions: bool,
    /// Keep every backup in [`SearchOutcome::backups`].
    pub record_backups: bool,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig {
            c: 1.25,
            gamma: 0.99,
            simulation_num: 30,
            max_sim_steps: 30,
            max_iterations: 200,
            wall_timeout: 60.0,
            seed: 0,
            rollout_solutions: true,
            record_backups: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MctsError {
    #[error("node has no selectable edges")]
    NoEdges,
    #[error("edge already expanded")]
    AlreadyVisited,
}

/// Statistics of one (state, action) edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStats {
    pub action: Action,
    pub action_index: usize,
    /// Prior P(s,a).
    pub p: f64,
    /// Visit count N(s,a).
    pub n: u32,
    /// Sum of backed-up values.
    pub total: f64,
    /// Mean backed-up value.
    pub g: f64,
    pub visited: bool,
    /// The action made no progress here; never selected again, G stays 0.
    pub dead: bool,
    pub child: Option<usize>,
}

impl EdgeStats {
    pub fn new(action: Action, action_index: usize, p: f64) -> Self {
        EdgeStats { action, action_index, p, n: 0, total: 0.0, g: 0.0, visited: false, dead: false, child: None }
    }

    pub fn record(&mut self, value: f64) {
        self.n += 1;
        if self.dead {
            return;
        }
        self.total += value;
        self.g = self.total / self.n as f64;
    }
}

/// UCB selection: unvisited edges first (highest prior, then lowest action
/// index), otherwise the argmax of `G + c * sqrt(ln(sum N) / N)` with ties
/// to the lowest action index. Dead edges are skipped.
pub fn select_ucb(edges: &[EdgeStats], c: f64) -> Result<usize, MctsError> {
    let live = || edges.iter().enumerate().filter(|(_, e)| !e.dead);
    let better = |a: (f64, usize), b: (f64, usize)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
    let mut best: Option<(usize, (f64, usize))> = None;
    for (i, e) in live().filter(|(_, e)| e.n == 0) {
        let key = (e.p, e.action_index);
        if best.is_none_or(|(_, b)| better(key, b)) {
            best = Some((i, key));
        }
    }
    if let Some((i, _)) = best {
        return Ok(i);
    }
    let total: f64 = edges.iter().map(|e| e.n as f64).sum();
    let ln_total = total.ln();
    for (i, e) in live() {
        let score = e.g + c * (ln_total / e.n as f64).sqrt();
        let key = (score, e.action_index);
        if best.is_none_or(|(_, b)| better(key, b)) {
            best = Some((i, key));
        }
    }
    best.map(|(i, _)| i).ok_or(MctsError::NoEdges)
}

/// One backup: the values credited along the path, leaf edge first. The
/// value at depth `d` from the leaf is `gamma` times the value at `d - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackupTrace {
    pub omega: f64,
    pub gamma: f64,
    /// (node, edge) pairs, leaf first.
    pub edges: Vec<(usize, usize)>,
    pub values: Vec<f64>,
}

/// Discounted values for a path of `len` edges, leaf first.
pub fn backup_values(len: usize, omega: f64, gamma: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut v = omega;
    for _ in 0..len {
        out.push(v);
        v *= gamma;
    }
    out
}

/// Credits `omega` to a root-to-leaf path of edges.
pub fn backup(path: &mut [&mut EdgeStats], omega: f64, gamma: f64) -> Vec<f64> {
    let values = backup_values(path.len(), omega, gamma);
    for (e, v) in path.iter_mut().rev().zip(&values) {
        e.record(*v);
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edge(i: usize, p: f64, n: u32, g: f64) -> EdgeStats {
        let mut e = EdgeStats::new(Action { theorem: i, branch: 1 }, i, p);
        e.n = n;
        e.g = g;
        e.total = g * n as f64;
        e
    }

    #[test]
    fn pure_exploitation_at_zero_c() {
        let edges = vec![edge(0, 0.5, 3, 0.2), edge(1, 0.1, 10, 0.7), edge(2, 0.4, 1, 0.6)];
        assert_eq!(select_ucb(&edges, 0.0), Ok(1));
    }

    #[test]
    fn equal_stats_pick_lowest_index() {
        let edges = vec![edge(0, 0.5, 2, 0.5), edge(1, 0.5, 2, 0.5)];
        assert_eq!(select_ucb(&edges, 1.0), Ok(0));
    }

    #[test]
    fn unvisited_edge_first() {
        let edges = vec![edge(0, 0.1, 1, 0.0), edge(1, 0.9, 0, 0.0)];
        assert_eq!(select_ucb(&edges, 1.0), Ok(1));
    }

    #[test]
    fn no_edges() {
        assert_eq!(select_ucb(&[], 1.0), Err(MctsError::NoEdges));
        let mut e = edge(0, 1.0, 0, 0.0);
        e.dead = true;
        assert_eq!(select_ucb(&[e], 1.0), Err(MctsError::NoEdges));
    }

    #[test]
    fn backup_examples() {
        let mut leaf = edge(0, 1.0, 0, 0.0);
        backup(&mut [&mut leaf], 1.0, 0.99);
        assert_eq!((leaf.g, leaf.n), (1.0, 1));

        let (mut root, mut child) = (edge(0, 1.0, 0, 0.0), edge(1, 1.0, 0, 0.0));
        backup(&mut [&mut root, &mut child], 1.0, 0.99);
        assert_eq!(root.g, 0.99);
        assert_eq!(child.g, 1.0);

        let mut e = edge(0, 1.0, 0, 0.0);
        backup(&mut [&mut e], 1.0, 0.99);
        backup(&mut [&mut e], 0.0, 0.99);
        assert_eq!((e.g, e.n), (0.5, 2));
    }

    #[test]
    fn dead_edge_stays_at_zero() {
        let mut e = edge(0, 1.0, 0, 0.0);
        e.dead = true;
        backup(&mut [&mut e], 1.0, 0.9);
        assert_eq!((e.g, e.n), (0.0, 1));
    }

    proptest! {
        #[test]
        fn c_zero_with_uniform_priors_is_greedy(gs in prop::collection::vec((0.0f64..1.0, 1u32..50), 1..12)) {
            let p = 1.0 / gs.len() as f64;
            let edges: Vec<_> = gs.iter().enumerate().map(|(i, &(g, n))| edge(i, p, n, g)).collect();
            let chosen = select_ucb(&edges, 0.0).unwrap();
            let best = gs.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(edges[chosen].g, best);
            prop_assert!(edges[..chosen].iter().all(|e| e.g < best));
        }

        #[test]
        fn backed_up_values_discount_exactly(len in 1usize..20, omega in 0.0f64..=1.0, gamma in 0.01f64..=1.0) {
            let v = backup_values(len, omega, gamma);
            prop_assert_eq!(v[0], omega);
            for d in 1..len {
                prop_assert_eq!(v[d], gamma * v[d - 1]);
                prop_assert!(v[d] >= 0.0 && v[d] <= 1.0);
            }
        }
    }
}
