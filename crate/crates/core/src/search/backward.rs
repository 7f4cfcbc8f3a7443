use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{confirm, Deadline, SearchBudget, SearchResult, Strategy};
use crate::algebra::AttrSymbol;
use crate::deduction::{complete_binding, instantiate, Binding, Environment, Fact, State};
use crate::lang::{Action, FactTemplate, Goal, Pattern, ProblemCdl, Schemas, TheoremBranch, VarIdx};
use crate::point::Point;

/// Something the backward search still has to establish.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subgoal {
    Fact(Fact),
    Value(AttrSymbol),
}

#[derive(Debug, Clone)]
struct Node {
    pending: BTreeSet<Subgoal>,
    opened: BTreeSet<Subgoal>,
    /// Goal-first order.
    actions: Vec<Action>,
}

impl Node {
    fn key(&self) -> (Vec<Subgoal>, BTreeSet<Action>) {
        (self.pending.iter().cloned().collect(), self.actions.iter().copied().collect())
    }
}

struct Regressor<'a> {
    env: &'a Environment,
    problem: &'a ProblemCdl,
    init: State,
    budget: &'a SearchBudget,
    deadline: Deadline,
    nodes: usize,
    /// Per action: fact templates it can produce, extensions included, in
    /// theorem-variable space.
    produced: Vec<(Action, Vec<FactTemplate>)>,
}

fn produced_facts(schemas: &Schemas, branch: &TheoremBranch) -> Vec<FactTemplate> {
    let mut out: Vec<FactTemplate> = Vec::new();
    let mut work: Vec<FactTemplate> = branch
        .conclusions
        .iter()
        .filter_map(|p| match p {
            Pattern::Fact(t) => Some(t.clone()),
            Pattern::Equation(_) => None,
        })
        .collect();
    while let Some(t) = work.pop() {
        if out.contains(&t) {
            continue;
        }
        for ext in &schemas.predicate(t.predicate).extensions {
            work.push(FactTemplate {
                predicate: ext.predicate,
                args: ext.args.iter().map(|&i| t.args[i as usize]).collect(),
            });
        }
        out.push(t);
    }
    out
}

/// Binds `args` to `points` position-wise, keeping the binding injective.
fn unify(seed: &mut Binding, args: &[VarIdx], points: &[Point]) -> bool {
    for (&v, &p) in args.iter().zip(points) {
        match seed[v as usize] {
            Some(q) if q == p => {}
            Some(_) => return false,
            None if seed.contains(&Some(p)) => return false,
            None => seed[v as usize] = Some(p),
        }
    }
    true
}

impl Regressor<'_> {
    fn exhausted(&self) -> bool {
        self.nodes >= self.budget.max_nodes || self.deadline.expired()
    }

    fn closed(&self, g: &Subgoal) -> bool {
        match g {
            Subgoal::Fact(f) => self.init.facts.contains(f),
            Subgoal::Value(s) => self.init.algebra.value(s).is_some(),
        }
    }

    fn root(&self) -> Node {
        let mut goals = Vec::new();
        match &*self.init.goal {
            Goal::Relation(f) => goals.push(Subgoal::Fact(f.clone())),
            Goal::Value { term, .. } => goals.extend(term.leaves().into_iter().cloned().map(Subgoal::Value)),
            Goal::Equation(eq) => goals.extend(eq.symbols().into_iter().map(Subgoal::Value)),
        }
        let goals: BTreeSet<Subgoal> = goals.into_iter().filter(|g| !self.closed(g)).collect();
        Node { opened: goals.clone(), pending: goals, actions: Vec::new() }
    }

    /// Seed bindings of `action` under which one of its conclusions yields `goal`.
    fn seeds(&self, action: Action, templates: &[FactTemplate], goal: &Subgoal) -> Vec<Binding> {
        let schemas = self.env.schemas();
        let branch = schemas.branch(action).expect("registered action");
        let var_count = schemas.theorem(action.theorem).vars.len();
        let mut out = Vec::new();
        match goal {
            Subgoal::Fact(f) => {
                let orbit = schemas.predicate(f.predicate).representations.orbit(&f.points);
                for t in templates.iter().filter(|t| t.predicate == f.predicate) {
                    for pts in &orbit {
                        let mut seed = vec![None; var_count];
                        if unify(&mut seed, &t.args, pts) {
                            out.push(seed);
                        }
                    }
                }
            }
            Subgoal::Value(s) => {
                let orbit = schemas.attribute(s.attr).representations.orbit(&s.points);
                for p in &branch.conclusions {
                    let Pattern::Equation(e) = p else { continue };
                    let mut leaves = e.lhs.leaves();
                    leaves.extend(e.rhs.leaves());
                    for leaf in leaves.into_iter().filter(|l| l.attr == s.attr) {
                        for pts in &orbit {
                            let mut seed = vec![None; var_count];
                            if unify(&mut seed, &leaf.args, pts) {
                                out.push(seed);
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Full bindings extending `seed`; premise facts touching unbound
    /// variables must already hold initially.
    fn complete(&self, action: Action, seed: Binding) -> Vec<Binding> {
        let schemas = self.env.schemas();
        let branch = schemas.branch(action).expect("registered action");
        let needed: Vec<&FactTemplate> =
            branch.premise_facts().filter(|t| t.args.iter().any(|&v| seed[v as usize].is_none())).collect();
        complete_binding(schemas, &self.init.facts, &self.problem.points, branch.variables(), needed, seed)
    }

    /// Subgoals left open by firing `action` under `binding`.
    fn premises(&self, action: Action, binding: &Binding, goal: &Subgoal) -> Vec<Subgoal> {
        let schemas = self.env.schemas();
        let branch = schemas.branch(action).expect("registered action");
        let inst = instantiate(schemas, branch, binding);
        let mut out: Vec<Subgoal> = inst.premise_facts.into_iter().map(Subgoal::Fact).collect();
        for eq in &inst.premise_equations {
            out.extend(eq.symbols().into_iter().map(Subgoal::Value));
        }
        if let Subgoal::Value(s) = goal {
            for eq in inst.conclusion_equations.iter().filter(|e| e.symbols().contains(s)) {
                out.extend(eq.symbols().into_iter().filter(|t| t != s).map(Subgoal::Value));
            }
        }
        out.retain(|g| !self.closed(g));
        out
    }

    fn children(&mut self, node: &Node) -> Vec<Node> {
        let Some(goal) = node.pending.iter().next().cloned() else { return Vec::new() };
        if node.actions.len() >= self.budget.max_depth {
            return Vec::new();
        }
        let mut out = Vec::new();
        let produced = std::mem::take(&mut self.produced);
        'outer: for (action, templates) in &produced {
            for seed in self.seeds(*action, templates, &goal) {
                for binding in self.complete(*action, seed) {
                    if self.exhausted() {
                        break 'outer;
                    }
                    self.nodes += 1;
                    let mut child = node.clone();
                    child.pending.remove(&goal);
                    for g in self.premises(*action, &binding, &goal) {
                        if child.opened.insert(g.clone()) {
                            child.pending.insert(g);
                        }
                    }
                    child.actions.push(*action);
                    out.push(child);
                }
            }
        }
        self.produced = produced;
        out
    }

    /// Orders the collected applications forward and keeps the productive
    /// ones; `None` unless the replay solves the problem.
    fn linearize(&self, node: &Node) -> Option<Vec<Action>> {
        let mut seq: Vec<Action> = Vec::new();
        for &a in node.actions.iter().rev() {
            if !seq.contains(&a) {
                seq.push(a);
            }
        }
        let mut state = self.init.clone().untraced();
        let mut kept = Vec::new();
        for a in seq {
            let (next, gain) = self.env.apply_action(&state, a).ok()?;
            if gain > 0 {
                kept.push(a);
                state = next;
            }
        }
        self.env.solved(&state).then_some(kept)
    }
}

/// Goal-directed search: regresses the goal through theorem conclusions into
/// premise subgoals until every subgoal holds initially, then replays the
/// collected applications forward and verifies them.
pub fn solve_backward(env: &Environment, problem: &ProblemCdl, strategy: Strategy, budget: &SearchBudget) -> SearchResult {
    let deadline = Deadline::new(budget.wall_timeout);
    let label = format!("bw-{}", strategy.label());
    let unsolved = |nodes: usize, deadline: &Deadline| SearchResult {
        solved: false,
        sequence: Vec::new(),
        nodes_expanded: nodes,
        elapsed: deadline.elapsed(),
        strategy: label.clone(),
    };
    if deadline.expired() {
        return unsolved(0, &deadline);
    }
    let Ok(init) = env.init_state(problem) else { return unsolved(0, &deadline) };
    if env.solved(&init) {
        return SearchResult { solved: true, ..unsolved(0, &deadline) };
    }
    let schemas = env.schemas();
    let produced = schemas.actions().iter().map(|&a| (a, produced_facts(schemas, schemas.branch(a).unwrap()))).collect();
    let mut r = Regressor { env, problem, init: init.untraced(), budget, deadline, nodes: 0, produced };
    let root = r.root();
    let found = match strategy {
        Strategy::Bfs => bfs(&mut r, root),
        Strategy::Dfs => dfs(&mut r, root),
        Strategy::Random => random(&mut r, root),
        Strategy::Beam => beam(&mut r, root),
    };
    match found {
        Some(seq) if confirm(env, problem, &seq) => SearchResult {
            solved: true,
            sequence: seq,
            nodes_expanded: r.nodes,
            elapsed: r.deadline.elapsed(),
            strategy: label.clone(),
        },
        _ => unsolved(r.nodes, &r.deadline),
    }
}

fn bfs(r: &mut Regressor, root: Node) -> Option<Vec<Action>> {
    let mut seen = HashSet::from([root.key()]);
    let mut queue = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        if node.pending.is_empty() {
            if let Some(seq) = r.linearize(&node) {
                return Some(seq);
            }
            continue;
        }
        if r.exhausted() {
            return None;
        }
        for child in r.children(&node) {
            if seen.insert(child.key()) {
                queue.push_back(child);
            }
        }
    }
    None
}

fn dfs(r: &mut Regressor, root: Node) -> Option<Vec<Action>> {
    let mut seen = HashSet::from([root.key()]);
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node.pending.is_empty() {
            if let Some(seq) = r.linearize(&node) {
                return Some(seq);
            }
            continue;
        }
        if r.exhausted() {
            return None;
        }
        for child in r.children(&node).into_iter().rev() {
            if seen.insert(child.key()) {
                stack.push(child);
            }
        }
    }
    None
}

fn random(r: &mut Regressor, root: Node) -> Option<Vec<Action>> {
    let mut rng = ChaCha8Rng::seed_from_u64(r.budget.rng_seed);
    loop {
        let mut node = root.clone();
        let before = r.nodes;
        loop {
            if node.pending.is_empty() {
                if let Some(seq) = r.linearize(&node) {
                    return Some(seq);
                }
                break;
            }
            if r.exhausted() {
                return None;
            }
            let mut children = r.children(&node);
            if children.is_empty() {
                break;
            }
            let i = rng.gen_range(0..children.len());
            node = children.swap_remove(i);
        }
        if r.nodes == before || r.exhausted() {
            return None;
        }
    }
}

/// Keeps the `beam_width` nodes with the fewest open subgoals per layer.
fn beam(r: &mut Regressor, root: Node) -> Option<Vec<Action>> {
    let width = r.budget.beam_width.max(1);
    let mut seen = HashSet::from([root.key()]);
    let mut frontier = vec![root];
    while !frontier.is_empty() {
        let mut next: Vec<Node> = Vec::new();
        for node in &frontier {
            if node.pending.is_empty() {
                if let Some(seq) = r.linearize(node) {
                    return Some(seq);
                }
                continue;
            }
            if r.exhausted() {
                return None;
            }
            for child in r.children(node) {
                if seen.insert(child.key()) {
                    next.push(child);
                }
            }
        }
        next.sort_by_key(|n| n.pending.len());
        next.truncate(width);
        frontier = next;
    }
    None
}
