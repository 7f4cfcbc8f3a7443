use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::fact::{Fact, FactBase};
use super::hypertree::HyperTree;
use super::matcher::{self, Binding};
use super::DeductionError;
use crate::algebra::{equation_key, AttrSymbol, EquationStore};
use crate::lang::{Action, Condition, Goal, ProblemCdl, Schemas};
use crate::point::Point;

pub const DEFAULT_MAX_STEPS: usize = 30;

/// The MDP state: knowledge so far plus the goal being pursued.
#[derive(Debug, Clone)]
pub struct State {
    pub points: Arc<Vec<Point>>,
    pub facts: FactBase,
    pub algebra: EquationStore,
    pub goal: Arc<Goal>,
    pub applied: Vec<Action>,
    trace: Option<Arc<HyperTree>>,
}

impl State {
    pub fn steps_taken(&self) -> usize {
        self.applied.len()
    }

    pub fn trace(&self) -> Option<&HyperTree> {
        self.trace.as_deref()
    }

    /// Drops the proof trace; searches that only need the final sequence
    /// skip the bookkeeping and re-verify afterwards.
    pub fn untraced(mut self) -> Self {
        self.trace = None;
        self
    }

    /// Hash over sorted facts, determined values and pending equations.
    pub fn digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for f in self.facts.iter() {
            f.hash(&mut h);
        }
        0xffu8.hash(&mut h);
        for (s, v) in self.algebra.determined() {
            s.hash(&mut h);
            v.hash(&mut h);
        }
        0xffu8.hash(&mut h);
        for k in self.algebra.pending_keys() {
            k.hash(&mut h);
        }
        h.finish()
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub next: State,
    pub reward: f64,
    pub terminal: bool,
    pub new_nodes: usize,
    /// Legal actions of `next`; empty when terminal.
    pub legal: Vec<Action>,
    pub error: Option<DeductionError>,
}

impl StepOutcome {
    pub fn progress(&self) -> bool {
        self.new_nodes > 0
    }
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub solved: bool,
    pub first_failure: Option<usize>,
    pub trace: HyperTree,
    pub state: State,
}

/// Stateless environment over one schema set.
#[derive(Debug, Clone)]
pub struct Environment {
    schemas: Arc<Schemas>,
    pub max_steps: usize,
}

impl Environment {
    pub fn new(schemas: Arc<Schemas>) -> Self {
        Environment { schemas, max_steps: DEFAULT_MAX_STEPS }
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn schemas(&self) -> &Schemas {
        &self.schemas
    }

    pub fn schemas_arc(&self) -> &Arc<Schemas> {
        &self.schemas
    }

    pub fn init_state(&self, problem: &ProblemCdl) -> Result<State, DeductionError> {
        let schemas = &*self.schemas;
        let mut facts = FactBase::new(schemas);
        let mut algebra = EquationStore::new();
        let mut trace = HyperTree::default();
        let given = problem.construction.iter().chain(problem.conditions.iter().filter_map(|c| match c {
            Condition::Fact(f) => Some(f),
            Condition::Equation(_) => None,
        }));
        for f in given {
            for added in facts.insert_closed(schemas, f.clone()) {
                trace.add_fact(added, true);
            }
        }
        for c in &problem.conditions {
            if let Condition::Equation(eq) = c {
                if let Some(key) = equation_key(eq) {
                    if !algebra.contains_key(&key) {
                        let id = trace.add_equation(key, eq.clone(), true);
                        algebra.add_equation(eq.clone(), id);
                    }
                }
            }
        }
        let found = algebra.solve()?;
        for s in found {
            let v = algebra.value(&s).cloned().expect("solved symbol has a value");
            trace.add_value(s, v, true);
        }
        Ok(State {
            points: Arc::new(problem.points.clone()),
            facts,
            algebra,
            goal: Arc::new(problem.goal.clone()),
            applied: Vec::new(),
            trace: Some(Arc::new(trace)),
        })
    }

    fn raw_bindings(&self, state: &State, action: Action) -> Result<Vec<Binding>, DeductionError> {
        let branch = self.schemas.branch(action).ok_or(DeductionError::UnknownAction(action))?;
        let theorem = self.schemas.theorem(action.theorem);
        Ok(matcher::match_all(&self.schemas, &state.facts, &state.algebra, &state.points, theorem.vars.len(), branch))
    }

    /// Distinct bindings of the action's premise, symmetric duplicates removed.
    pub fn match_premise(&self, state: &State, action: Action) -> Vec<Binding> {
        let Ok(raw) = self.raw_bindings(state, action) else {
            return Vec::new();
        };
        let branch = self.schemas.branch(action).expect("checked above");
        matcher::dedup_symmetric(&self.schemas, branch, raw)
    }

    /// True if some binding would add a fact or an equation.
    pub fn is_productive(&self, state: &State, action: Action) -> bool {
        let Ok(bindings) = self.raw_bindings(state, action) else {
            return false;
        };
        let branch = self.schemas.branch(action).expect("checked above");
        bindings.iter().any(|b| {
            branch.conclusions.iter().any(|p| match p {
                crate::lang::Pattern::Fact(t) => !state.facts.contains(&matcher::instantiate_fact(&self.schemas, t, b)),
                crate::lang::Pattern::Equation(t) => {
                    state.algebra.is_new(&matcher::instantiate_equation(&self.schemas, t, b))
                }
            })
        })
    }

    pub fn legal_actions(&self, state: &State) -> Vec<Action> {
        self.schemas.actions().iter().copied().filter(|&a| self.is_productive(state, a)).collect()
    }

    /// Fires every binding of `action` at once. Returns the successor and the
    /// number of new facts (extensions included) and equations.
    pub fn apply_action(&self, state: &State, action: Action) -> Result<(State, usize), DeductionError> {
        let schemas = &*self.schemas;
        let bindings = self.raw_bindings(state, action)?;
        let branch = schemas.branch(action).expect("checked by raw_bindings");
        let mut next = state.clone();
        next.applied.push(action);
        let mut trace = next.trace.take();
        let mut new_nodes = 0;

        for b in &bindings {
            let inst = matcher::instantiate(schemas, branch, b);
            let mut conclusions = Vec::new();
            for f in inst.conclusion_facts {
                for added in next.facts.insert_closed(schemas, f) {
                    new_nodes += 1;
                    if let Some(t) = trace.as_mut() {
                        conclusions.push(Arc::make_mut(t).add_fact(added, false));
                    }
                }
            }
            for eq in inst.conclusion_equations {
                let Some(key) = equation_key(&eq) else { continue };
                if next.algebra.contains_key(&key) {
                    continue;
                }
                let id = match trace.as_mut() {
                    Some(t) => {
                        let id = Arc::make_mut(t).add_equation(key, eq.clone(), false);
                        conclusions.push(id);
                        id
                    }
                    None => usize::MAX,
                };
                next.algebra.add_equation(eq, id);
                new_nodes += 1;
            }
            if let (Some(t), false) = (trace.as_mut(), conclusions.is_empty()) {
                let premises = premise_nodes(t, state, &inst.premise_facts, &inst.premise_equations);
                Arc::make_mut(t).add_edge(Some(action), premises, conclusions);
            }
        }

        let found = next.algebra.solve()?;
        if let (Some(t), false) = (trace.as_mut(), found.is_empty()) {
            let t = Arc::make_mut(t);
            let mut premises = Vec::new();
            for stored in next.algebra.equations() {
                let syms = stored.equation.symbols();
                if syms.iter().any(|s| found.contains(s)) {
                    premises.push(stored.provenance);
                    for s in syms.iter().filter(|s| !found.contains(s)) {
                        if let Some(id) = t.value_node(s) {
                            premises.push(id);
                        }
                    }
                }
            }
            let conclusions = found
                .iter()
                .map(|s| t.add_value(s.clone(), next.algebra.value(s).cloned().expect("solved"), false))
                .collect();
            t.add_edge(None, premises, conclusions);
        }
        next.trace = trace;
        Ok((next, new_nodes))
    }

    pub fn solved(&self, state: &State) -> bool {
        match &*state.goal {
            Goal::Relation(f) => state.facts.contains(f),
            Goal::Value { term, target } => match state.algebra.value_of(term) {
                Ok(Some(v)) => target.as_ref().is_none_or(|t| *t == v),
                _ => false,
            },
            Goal::Equation(eq) => matcher::equation_holds(&state.algebra, eq),
        }
    }

    /// One MDP transition. Reward is 1 exactly when the successor satisfies
    /// the goal; failures map to reward 0.
    pub fn step(&self, state: &State, action: Action) -> StepOutcome {
        let (next, new_nodes) = match self.apply_action(state, action) {
            Ok(r) => r,
            Err(e) => {
                return StepOutcome {
                    next: state.clone(),
                    reward: 0.0,
                    terminal: true,
                    new_nodes: 0,
                    legal: Vec::new(),
                    error: Some(e),
                }
            }
        };
        let solved = self.solved(&next);
        let capped = next.steps_taken() >= self.max_steps;
        let legal = if solved || capped { Vec::new() } else { self.legal_actions(&next) };
        StepOutcome {
            terminal: solved || capped || legal.is_empty(),
            reward: if solved { 1.0 } else { 0.0 },
            next,
            new_nodes,
            legal,
            error: None,
        }
    }

    /// Replays `actions` from the initial state with tracing on.
    pub fn verify_sequence(&self, problem: &ProblemCdl, actions: &[Action]) -> Result<Verification, DeductionError> {
        let mut state = self.init_state(problem)?;
        let mut first_failure = None;
        for (i, &a) in actions.iter().enumerate() {
            let (next, new_nodes) = self.apply_action(&state, a)?;
            if new_nodes == 0 && first_failure.is_none() {
                first_failure = Some(i);
            }
            state = next;
        }
        Ok(Verification {
            solved: self.solved(&state),
            first_failure,
            trace: state.trace().cloned().unwrap_or_default(),
            state,
        })
    }

    /// Node ids in `state`'s trace that the goal depends on.
    pub fn goal_nodes(&self, state: &State) -> Vec<usize> {
        let Some(t) = state.trace() else { return Vec::new() };
        match &*state.goal {
            Goal::Relation(f) => t.fact_node(f).into_iter().collect(),
            Goal::Value { term, .. } => {
                let mut syms: Vec<&AttrSymbol> = term.leaves();
                syms.sort();
                syms.dedup();
                syms.into_iter().filter_map(|s| t.value_node(s)).collect()
            }
            Goal::Equation(eq) => match equation_key(eq).and_then(|k| t.equation_node(&k)) {
                Some(id) => vec![id],
                None => eq.symbols().iter().filter_map(|s| t.value_node(s)).collect(),
            },
        }
    }
}

fn premise_nodes(
    trace: &HyperTree,
    state: &State,
    facts: &[Fact],
    equations: &[crate::algebra::Equation],
) -> Vec<usize> {
    let mut out: Vec<usize> = facts.iter().filter_map(|f| trace.fact_node(f)).collect();
    for eq in equations {
        if let Some(id) = equation_key(eq).and_then(|k| {
            if state.algebra.contains_key(&k) {
                trace.equation_node(&k)
            } else {
                None
            }
        }) {
            out.push(id);
            continue;
        }
        out.extend(eq.symbols().iter().filter_map(|s| trace.value_node(s)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_cdl, parse_gdl};

    fn env() -> Environment {
        Environment::new(Arc::new(parse_gdl(crate::GEOMETRY_GDL).unwrap()))
    }

    fn problem(env: &Environment, src: &str) -> ProblemCdl {
        parse_cdl(src, env.schemas()).unwrap()
    }

    fn action(env: &Environment, name: &str, branch: usize) -> Action {
        env.schemas().action_by_name(name, branch).unwrap()
    }

    const TRIANGLE: &str = "Points A,B,C; Polygon(A,B,C); Goal Value(MeasureOfAngle(B,C,A))";

    #[test]
    fn polygon_extends_to_its_angles() {
        let env = env();
        let s = env.init_state(&problem(&env, TRIANGLE)).unwrap();
        assert_eq!(s.facts.len(), 4);
        assert!(!env.solved(&s));
    }

    #[test]
    fn goal_among_initial_facts() {
        let env = env();
        let s = env.init_state(&problem(&env, "Points A,B,C,D; Parallel(C,D,A,B); Goal Parallel(A,B,C,D)")).unwrap();
        assert!(env.solved(&s));
        let absent = env.init_state(&problem(&env, "Points A,B,C,D; Goal Parallel(A,B,C,D)")).unwrap();
        assert!(!env.solved(&absent));
    }

    #[test]
    fn single_triangle_binds_once() {
        let env = env();
        let s = env.init_state(&problem(&env, "Points P,Q,R; Polygon(P,Q,R); Goal Value(MeasureOfAngle(P,Q,R))")).unwrap();
        assert_eq!(env.match_premise(&s, action(&env, "triangle_property_angle_sum", 1)).len(), 1);
    }

    #[test]
    fn equation_premise_on_determined_values() {
        let env = env();
        let src = "Points A,B,C; Polygon(A,B,C); Equal(LengthOfLine(A,B),5); Equal(LengthOfLine(A,C),5); Goal IsoscelesTriangle(A,B,C)";
        let s = env.init_state(&problem(&env, src)).unwrap();
        let a = action(&env, "isosceles_triangle_judgment", 1);
        assert!(!env.match_premise(&s, a).is_empty());
        let (next, gain) = env.apply_action(&s, a).unwrap();
        assert!(gain > 0);
        assert!(env.solved(&next));
    }

    #[test]
    fn angle_sum_application() {
        let env = env();
        let s = env.init_state(&problem(&env, TRIANGLE)).unwrap();
        let a = action(&env, "triangle_property_angle_sum", 1);
        let (once, gain) = env.apply_action(&s, a).unwrap();
        assert_eq!(gain, 1);
        assert_eq!(once.algebra.equations().len(), 1);
        let (_, again) = env.apply_action(&once, a).unwrap();
        assert_eq!(again, 0);
        assert!(!env.legal_actions(&once).contains(&a));
    }

    #[test]
    fn all_bindings_fire_together() {
        let env = env();
        let src = "Points A,B,C,D,E,F; Polygon(A,B,C); Polygon(D,E,F); Goal Value(MeasureOfAngle(A,B,C))";
        let s = env.init_state(&problem(&env, src)).unwrap();
        let (next, gain) = env.apply_action(&s, action(&env, "triangle_property_angle_sum", 1)).unwrap();
        assert_eq!(gain, 2);
        assert_eq!(next.algebra.equations().len(), 2);
    }

    #[test]
    fn legal_actions_match_trial_application() {
        let env = env();
        let s = env.init_state(&problem(&env, TRIANGLE)).unwrap();
        let oracle: Vec<Action> =
            env.schemas().actions().iter().copied().filter(|&a| env.apply_action(&s, a).unwrap().1 > 0).collect();
        assert_eq!(env.legal_actions(&s), oracle);
        assert!(!oracle.is_empty());
    }

    #[test]
    fn no_facts_no_actions() {
        let env = env();
        let s = env.init_state(&problem(&env, "Points A,B,C; Goal Value(MeasureOfAngle(A,B,C))")).unwrap();
        assert!(s.facts.is_empty());
        assert!(env.legal_actions(&s).is_empty());
    }

    #[test]
    fn value_goals() {
        let env = env();
        let known = "Points A,B,C; Polygon(A,B,C); Equal(MeasureOfAngle(B,C,A),60); Goal Value(MeasureOfAngle(B,C,A))=60";
        assert!(env.solved(&env.init_state(&problem(&env, known)).unwrap()));
        let wrong = "Points A,B,C; Polygon(A,B,C); Equal(MeasureOfAngle(B,C,A),60); Goal Value(MeasureOfAngle(B,C,A))=50";
        assert!(!env.solved(&env.init_state(&problem(&env, wrong)).unwrap()));
        assert!(!env.solved(&env.init_state(&problem(&env, TRIANGLE)).unwrap()));
    }

    #[test]
    fn verification() {
        let env = env();
        let src = "Points A,B,C; Polygon(A,B,C); Equal(MeasureOfAngle(A,B,C),40); Equal(MeasureOfAngle(B,C,A),60); Goal Value(MeasureOfAngle(C,A,B))=80";
        let p = problem(&env, src);
        let a = action(&env, "triangle_property_angle_sum", 1);
        let v = env.verify_sequence(&p, &[a]).unwrap();
        assert!(v.solved);
        assert_eq!(v.first_failure, None);
        let empty = env.verify_sequence(&p, &[]).unwrap();
        assert!(!empty.solved);
        assert_eq!(empty.first_failure, None);
        let repeated = env.verify_sequence(&p, &[a, a]).unwrap();
        assert_eq!(repeated.first_failure, Some(1));
    }

    #[test]
    fn trace_shape() {
        let env = env();
        let s = env.init_state(&problem(&env, TRIANGLE)).unwrap();
        let t = s.trace().unwrap();
        assert_eq!(t.nodes().len(), 4);
        assert!(t.edges().is_empty());
        let (next, _) = env.apply_action(&s, action(&env, "triangle_property_angle_sum", 1)).unwrap();
        let t = next.trace().unwrap();
        assert_eq!(t.edges().len(), 1);
        assert_eq!((t.edges()[0].premises.len(), t.edges()[0].conclusions.len()), (1, 1));
    }

    #[test]
    fn equal_states_equal_successors() {
        let env = env();
        let p = problem(&env, TRIANGLE);
        let a = action(&env, "triangle_property_angle_sum", 1);
        let x = env.apply_action(&env.init_state(&p).unwrap(), a).unwrap().0;
        let y = env.apply_action(&env.init_state(&p).unwrap(), a).unwrap().0;
        assert_eq!(x.digest(), y.digest());
    }
}
