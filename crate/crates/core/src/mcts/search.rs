use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{backup, select_ucb, BackupTrace, EdgeStats, MctsConfig, MctsError};
use crate::deduction::{Environment, State};
use crate::lang::{Action, ProblemCdl};
use crate::policy::{featurize_with_legal, mask_normalize, FeatureVector, PolicyModel, Trajectory, TrajectoryStep};
use crate::search::Deadline;

/// (node, edge) pairs from the root down.
type Path = Vec<(usize, usize)>;

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub state: State,
    pub digest: u64,
    pub edges: Vec<EdgeStats>,
    pub features: FeatureVector,
    pub legal: Vec<usize>,
    pub solved: bool,
    pub terminal: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

fn action_indices(env: &Environment, legal: &[Action]) -> Vec<usize> {
    legal.iter().map(|&a| env.schemas().action_index(a).expect("registered action")).collect()
}

impl Tree {
    /// Adds a node for `state`, with edge priors from `model` unless the
    /// state is terminal.
    fn push(&mut self, env: &Environment, model: &PolicyModel, state: State) -> usize {
        let solved = env.solved(&state);
        let legal = if solved || state.steps_taken() >= env.max_steps { Vec::new() } else { env.legal_actions(&state) };
        let idx = action_indices(env, &legal);
        let features = featurize_with_legal(env.schemas(), &state, &legal);
        let mut edges = Vec::new();
        if !solved && !legal.is_empty() {
            let priors = model.predict(&features).ok().and_then(|p| mask_normalize(&p, &idx).ok());
            for (&a, &i) in legal.iter().zip(&idx) {
                let p = priors.as_ref().map_or(1.0 / idx.len() as f64, |p| p[i]);
                edges.push(EdgeStats::new(a, i, p));
            }
        }
        self.nodes.push(TreeNode {
            digest: state.digest(),
            terminal: solved || edges.is_empty(),
            state,
            edges,
            features,
            legal: idx,
            solved,
        });
        self.nodes.len() - 1
    }

    /// Applies the edge's action and links the child. A no-progress action
    /// marks the edge dead and returns the parent.
    pub fn expand(
        &mut self,
        env: &Environment,
        model: &PolicyModel,
        node: usize,
        edge: usize,
    ) -> Result<usize, MctsError> {
        let e = &self.nodes[node].edges[edge];
        if e.visited {
            return Err(MctsError::AlreadyVisited);
        }
        let action = e.action;
        let applied = env.apply_action(&self.nodes[node].state, action);
        let e = &mut self.nodes[node].edges[edge];
        e.visited = true;
        match applied {
            Ok((next, gain)) if gain > 0 => {
                let child = self.push(env, model, next);
                self.nodes[node].edges[edge].child = Some(child);
                Ok(child)
            }
            _ => {
                e.dead = true;
                e.g = 0.0;
                Ok(node)
            }
        }
    }

    fn backup(&mut self, path: &[(usize, usize)], omega: f64, gamma: f64) -> BackupTrace {
        let mut refs: Vec<(usize, &mut EdgeStats)> = self
            .nodes
            .iter_mut()
            .enumerate()
            .filter_map(|(i, n)| path.iter().position(|&(pn, _)| pn == i).map(|pos| (pos, &mut n.edges[path[pos].1])))
            .collect();
        refs.sort_by_key(|r| r.0);
        let mut edges: Vec<&mut EdgeStats> = refs.into_iter().map(|r| r.1).collect();
        let values = backup(&mut edges, omega, gamma);
        BackupTrace { omega, gamma, edges: path.iter().rev().copied().collect(), values }
    }

    pub fn root_visits(&self) -> u64 {
        self.nodes.first().map_or(0, |n| n.edges.iter().map(|e| e.n as u64).sum())
    }

    fn trajectory(&self, path: &[(usize, usize)], reward: f64, gamma: f64) -> Trajectory {
        let steps = path
            .iter()
            .enumerate()
            .map(|(i, &(n, e))| TrajectoryStep {
                features: self.nodes[n].features.clone(),
                action: self.nodes[n].edges[e].action_index,
                legal: self.nodes[n].legal.clone(),
                reward: if i + 1 == path.len() { reward } else { 0.0 },
            })
            .collect();
        Trajectory::new(steps, gamma)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub solved: bool,
    pub sequence: Vec<Action>,
    pub iterations: usize,
    pub tree_nodes: usize,
    pub root_visits: u64,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
    #[serde(skip)]
    pub backups: Vec<BackupTrace>,
    pub elapsed: f64,
}

/// Samples from `model` masked to the legal set.
fn sample(env: &Environment, model: &PolicyModel, state: &State, legal: &[Action], rng: &mut ChaCha8Rng) -> Action {
    let idx = action_indices(env, legal);
    let features = featurize_with_legal(env.schemas(), state, legal);
    let weights: Vec<f64> = match model.predict(&features).ok().and_then(|p| mask_normalize(&p, &idx).ok()) {
        Some(p) => idx.iter().map(|&i| p[i]).collect(),
        None => vec![1.0; legal.len()],
    };
    match WeightedIndex::new(&weights) {
        Ok(d) => legal[d.sample(rng)],
        Err(_) => legal[0],
    }
}

fn rollout(env: &Environment, model: &PolicyModel, start: &State, steps: usize, mut rng: ChaCha8Rng) -> Option<Vec<Action>> {
    let mut state = start.clone();
    let mut taken = Vec::new();
    for _ in 0..steps {
        let legal = env.legal_actions(&state);
        if legal.is_empty() {
            return None;
        }
        let a = sample(env, model, &state, &legal, &mut rng);
        state = env.apply_action(&state, a).ok()?.0;
        taken.push(a);
        if env.solved(&state) {
            return Some(taken);
        }
    }
    None
}

/// Runs `simulation_num` rollouts from `state` under `model`; returns the
/// success fraction and the first successful rollout. Rollout `k` draws from
/// stream `stream + k`, so results do not depend on scheduling.
pub fn simulate(
    env: &Environment,
    model: &PolicyModel,
    state: &State,
    config: &MctsConfig,
    stream: u64,
) -> (f64, Option<Vec<Action>>) {
    if env.solved(state) {
        return (1.0, Some(Vec::new()));
    }
    let sims = config.simulation_num.max(1);
    let results: Vec<Option<Vec<Action>>> = (0..sims)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream.wrapping_add(k as u64));
            rollout(env, model, state, config.max_sim_steps, rng)
        })
        .collect();
    let wins = results.iter().filter(|r| r.is_some()).count();
    (wins as f64 / sims as f64, results.into_iter().flatten().next())
}

fn replay_solves(env: &Environment, init: &State, seq: &[Action]) -> bool {
    let mut state = init.clone();
    for &a in seq {
        match env.apply_action(&state, a) {
            Ok((next, _)) => state = next,
            Err(_) => return false,
        }
    }
    env.solved(&state)
}

fn productive_only(env: &Environment, init: &State, seq: Vec<Action>) -> Vec<Action> {
    let mut state = init.clone();
    let mut kept = Vec::new();
    for a in seq {
        if let Ok((next, gain)) = env.apply_action(&state, a) {
            if gain > 0 {
                kept.push(a);
                state = next;
            }
        }
    }
    kept
}

/// Greedily deletes steps, last first, while the sequence still solves, then
/// drops steps that no longer add anything.
fn prune(env: &Environment, init: &State, seq: Vec<Action>) -> Vec<Action> {
    let mut kept = productive_only(env, init, seq);
    let mut i = kept.len();
    while i > 0 {
        i -= 1;
        let mut shorter = kept.clone();
        shorter.remove(i);
        if replay_solves(env, init, &shorter) {
            kept = shorter;
        }
    }
    productive_only(env, init, kept)
}

/// Selection, expansion, simulation and backup until a solved node is
/// reached, the iteration cap, or the deadline. `rl` scores expansions and
/// `sl` drives rollouts.
pub fn run_search(
    env: &Environment,
    problem: &ProblemCdl,
    rl: &PolicyModel,
    sl: &PolicyModel,
    config: &MctsConfig,
) -> SearchOutcome {
    search_with_tree(env, problem, rl, sl, config).0
}

/// [`run_search`] that also returns the final tree; empty when the problem
/// fails to load or is solved at the root.
pub fn search_with_tree(
    env: &Environment,
    problem: &ProblemCdl,
    rl: &PolicyModel,
    sl: &PolicyModel,
    config: &MctsConfig,
) -> (SearchOutcome, Tree) {
    let deadline = Deadline::new(config.wall_timeout);
    let mut out = SearchOutcome {
        solved: false,
        sequence: Vec::new(),
        iterations: 0,
        tree_nodes: 0,
        root_visits: 0,
        trajectories: Vec::new(),
        backups: Vec::new(),
        elapsed: 0.0,
    };
    let Ok(init) = env.init_state(problem) else { return (out, Tree::default()) };
    let init = init.untraced();
    if env.solved(&init) {
        out.solved = true;
        out.tree_nodes = 1;
        return (out, Tree::default());
    }
    let mut tree = Tree::default();
    tree.push(env, rl, init.clone());
    // Either a solved tree path or a confirmed rollout sequence.
    let mut found: Option<(Path, Vec<Action>)> = None;

    while out.iterations < config.max_iterations && !deadline.expired() {
        let mut path: Path = Vec::new();
        let mut cur = 0;
        let mut expanded = false;
        loop {
            if tree.nodes[cur].terminal {
                break;
            }
            let Ok(e) = select_ucb(&tree.nodes[cur].edges, config.c) else {
                tree.nodes[cur].terminal = true;
                break;
            };
            path.push((cur, e));
            match tree.nodes[cur].edges[e].child {
                Some(child) if tree.nodes[cur].edges[e].visited => cur = child,
                _ => {
                    cur = tree.expand(env, rl, cur, e).expect("selected edge is unvisited");
                    expanded = true;
                    break;
                }
            }
        }
        if path.is_empty() {
            break;
        }
        out.iterations += 1;
        let leaf = &tree.nodes[cur];
        let dead = tree.nodes[path.last().unwrap().0].edges[path.last().unwrap().1].dead;
        let (omega, rollout) = if dead {
            (0.0, None)
        } else if leaf.solved {
            (1.0, Some(Vec::new()))
        } else if leaf.terminal {
            (0.0, None)
        } else {
            let stream = (out.iterations as u64) << 24;
            simulate(env, sl, &leaf.state, config, stream)
        };
        if expanded && leaf.terminal && !dead {
            let reward = if leaf.solved { 1.0 } else { 0.0 };
            out.trajectories.push(tree.trajectory(&path, reward, config.gamma));
        }
        let trace = tree.backup(&path, omega, config.gamma);
        if config.record_backups {
            out.backups.push(trace);
        }
        let leaf = &tree.nodes[cur];
        if leaf.solved {
            found = Some((path, Vec::new()));
            break;
        }
        if let (true, Some(tail)) = (config.rollout_solutions, rollout) {
            let mut seq: Vec<Action> = path.iter().map(|&(n, e)| tree.nodes[n].edges[e].action).collect();
            seq.extend(tail);
            let seq = prune(env, &init, seq);
            if crate::search::confirm(env, problem, &seq) {
                found = Some((Vec::new(), seq));
                break;
            }
        }
    }

    if let Some((path, seq)) = found {
        let seq = if path.is_empty() {
            seq
        } else {
            path.iter().map(|&(n, e)| tree.nodes[n].edges[e].action).collect()
        };
        if crate::search::confirm(env, problem, &seq) {
            out.solved = true;
            // A tree-path solution already left its trajectory above.
            if path.is_empty() {
                out.trajectories.push(solution_trajectory(env, &init, &seq, config.gamma));
            }
            out.sequence = seq;
        }
    }
    out.tree_nodes = tree.nodes.len();
    out.root_visits = tree.root_visits();
    out.elapsed = deadline.elapsed();
    (out, tree)
}

/// Replays a solving sequence, recording features and legal sets; the final
/// step carries reward 1.
fn solution_trajectory(env: &Environment, init: &State, seq: &[Action], gamma: f64) -> Trajectory {
    let mut state = init.clone();
    let mut steps = Vec::with_capacity(seq.len());
    for (t, &a) in seq.iter().enumerate() {
        let legal = env.legal_actions(&state);
        let mut idx = action_indices(env, &legal);
        let ai = env.schemas().action_index(a).expect("registered action");
        if !idx.contains(&ai) {
            idx.push(ai);
            idx.sort_unstable();
        }
        steps.push(TrajectoryStep {
            features: featurize_with_legal(env.schemas(), &state, &legal),
            action: ai,
            legal: idx,
            reward: if t + 1 == seq.len() { 1.0 } else { 0.0 },
        });
        state = env.apply_action(&state, a).map(|r| r.0).unwrap_or(state);
    }
    Trajectory::new(steps, gamma)
}
