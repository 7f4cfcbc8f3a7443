use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{confirm, Deadline, SearchBudget, SearchResult, Strategy};
use crate::deduction::{Environment, State};
use crate::lang::{Action, ProblemCdl};

struct Run<'a> {
    env: &'a Environment,
    budget: &'a SearchBudget,
    deadline: Deadline,
    nodes: usize,
}

impl Run<'_> {
    fn exhausted(&self) -> bool {
        self.nodes >= self.budget.max_nodes || self.deadline.expired()
    }

    /// Applies one action, counting it against the node budget.
    fn expand(&mut self, state: &State, action: Action) -> Option<(State, usize)> {
        self.nodes += 1;
        self.env.apply_action(state, action).ok()
    }
}

/// Forward search from the initial state. Revisited states are pruned by
/// digest; the first solving sequence found is re-verified and returned.
pub fn solve_forward(env: &Environment, problem: &ProblemCdl, strategy: Strategy, budget: &SearchBudget) -> SearchResult {
    let mut run = Run { env, budget, deadline: Deadline::new(budget.wall_timeout), nodes: 0 };
    let found = if run.deadline.expired() {
        None
    } else {
        match env.init_state(problem) {
            Ok(s) if env.solved(&s) => Some(Vec::new()),
            Ok(s) => {
                let root = s.untraced();
                match strategy {
                    Strategy::Bfs => bfs(&mut run, root),
                    Strategy::Dfs => {
                        let mut seen = HashSet::from([root.digest()]);
                        dfs(&mut run, &root, &mut seen)
                    }
                    Strategy::Random => random(&mut run, root),
                    Strategy::Beam => beam(&mut run, root),
                }
            }
            Err(_) => None,
        }
    };
    let solved = found.as_ref().is_some_and(|seq| confirm(env, problem, seq));
    SearchResult {
        solved,
        sequence: if solved { found.unwrap_or_default() } else { Vec::new() },
        nodes_expanded: run.nodes,
        elapsed: run.deadline.elapsed(),
        strategy: format!("fw-{}", strategy.label()),
    }
}

fn bfs(run: &mut Run, root: State) -> Option<Vec<Action>> {
    let mut seen = HashSet::from([root.digest()]);
    let mut queue = VecDeque::from([root]);
    while let Some(state) = queue.pop_front() {
        if state.steps_taken() >= run.budget.max_depth {
            continue;
        }
        for a in run.env.legal_actions(&state) {
            if run.exhausted() {
                return None;
            }
            let Some((child, _)) = run.expand(&state, a) else { continue };
            if run.env.solved(&child) {
                return Some(child.applied);
            }
            if seen.insert(child.digest()) {
                queue.push_back(child);
            }
        }
    }
    None
}

fn dfs(run: &mut Run, state: &State, seen: &mut HashSet<u64>) -> Option<Vec<Action>> {
    if state.steps_taken() >= run.budget.max_depth {
        return None;
    }
    for a in run.env.legal_actions(state) {
        if run.exhausted() {
            return None;
        }
        let Some((child, _)) = run.expand(state, a) else { continue };
        if run.env.solved(&child) {
            return Some(child.applied);
        }
        if seen.insert(child.digest()) {
            if let Some(seq) = dfs(run, &child, seen) {
                return Some(seq);
            }
        }
    }
    None
}

/// Restarting random walks over legal actions.
fn random(run: &mut Run, root: State) -> Option<Vec<Action>> {
    let mut rng = ChaCha8Rng::seed_from_u64(run.budget.rng_seed);
    loop {
        let mut state = root.clone();
        let mut progressed = false;
        while state.steps_taken() < run.budget.max_depth {
            let legal = run.env.legal_actions(&state);
            let Some(&a) = legal.choose(&mut rng) else { break };
            if run.exhausted() {
                return None;
            }
            let Some((child, _)) = run.expand(&state, a) else { break };
            progressed = true;
            if run.env.solved(&child) {
                return Some(child.applied);
            }
            state = child;
        }
        if !progressed || run.exhausted() {
            return None;
        }
    }
}

/// Keeps the `beam_width` children with the most new nodes per level; ties
/// go to the earlier parent, then the earlier action.
fn beam(run: &mut Run, root: State) -> Option<Vec<Action>> {
    let mut seen = HashSet::from([root.digest()]);
    let mut frontier = vec![root];
    let width = run.budget.beam_width.max(1);
    while !frontier.is_empty() {
        let mut children: Vec<(usize, State)> = Vec::new();
        for state in &frontier {
            if state.steps_taken() >= run.budget.max_depth {
                continue;
            }
            for a in run.env.legal_actions(state) {
                if run.exhausted() {
                    return None;
                }
                let Some((child, gain)) = run.expand(state, a) else { continue };
                if run.env.solved(&child) {
                    return Some(child.applied);
                }
                if seen.insert(child.digest()) {
                    children.push((gain, child));
                }
            }
        }
        children.sort_by_key(|c| std::cmp::Reverse(c.0));
        frontier = children.into_iter().take(width).map(|(_, s)| s).collect();
    }
    None
}
