use crate::deduction::{Environment, State, DEFAULT_MAX_STEPS};
use crate::lang::{Action, Goal, Schemas};

pub type FeatureVector = Vec<f64>;

/// Layout, in order: fact count per predicate over point count, goal kind
/// one-hot, goal attribute one-hot, goal predicate one-hot, determined and
/// pending symbol counts over point count, steps taken over the step cap,
/// then one legal flag and one already-applied flag per action.
pub fn feature_dim(schemas: &Schemas) -> usize {
    let (p, a, k) = (schemas.predicates.len(), schemas.attributes.len(), schemas.actions().len());
    2 * p + a + 3 + 3 + 2 * k
}

pub fn featurize(env: &Environment, state: &State) -> FeatureVector {
    featurize_with_legal(env.schemas(), state, &env.legal_actions(state))
}

/// Same as [`featurize`] with the legal set already computed.
pub fn featurize_with_legal(schemas: &Schemas, state: &State, legal: &[Action]) -> FeatureVector {
    let (np, na) = (schemas.predicates.len(), schemas.attributes.len());
    let n_points = state.points.len().max(1) as f64;
    let mut x = vec![0.0; feature_dim(schemas)];

    for (i, slot) in x.iter_mut().take(np).enumerate() {
        *slot = state.facts.count(crate::lang::PredicateId(i as u16)) as f64 / n_points;
    }
    let mut o = np;
    x[o + state.goal.kind_index()] = 1.0;
    o += 3;
    match &*state.goal {
        Goal::Relation(f) => x[o + na + f.predicate.0 as usize] = 1.0,
        Goal::Value { term, .. } => {
            for s in term.leaves() {
                x[o + s.attr.0 as usize] = 1.0;
            }
        }
        Goal::Equation(eq) => {
            for s in eq.symbols() {
                x[o + s.attr.0 as usize] = 1.0;
            }
        }
    }
    o += na + np;
    x[o] = state.algebra.determined().len() as f64 / n_points;
    x[o + 1] = state.algebra.pending_symbols().len() as f64 / n_points;
    x[o + 2] = state.steps_taken() as f64 / DEFAULT_MAX_STEPS as f64;
    o += 3;
    let k = schemas.actions().len();
    for a in legal {
        if let Some(i) = schemas.action_index(*a) {
            x[o + i] = 1.0;
        }
    }
    for a in &state.applied {
        if let Some(i) = schemas.action_index(*a) {
            x[o + k + i] = 1.0;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lang::{parse_cdl, parse_gdl};

    fn env() -> Environment {
        Environment::new(Arc::new(parse_gdl(crate::GEOMETRY_GDL).unwrap()))
    }

    fn features(env: &Environment, src: &str) -> FeatureVector {
        featurize(env, &env.init_state(&parse_cdl(src, env.schemas()).unwrap()).unwrap())
    }

    #[test]
    fn empty_fact_base() {
        let env = env();
        let s = env.schemas();
        let x = features(&env, "Points A,B,C; Goal Value(MeasureOfAngle(A,B,C))");
        assert_eq!(x.len(), feature_dim(s));
        let np = s.predicates.len();
        assert!(x[..np].iter().all(|v| *v == 0.0));
        assert_eq!(x[np + 1], 1.0);
        let angle = s.attribute_id("MeasureOfAngle").unwrap().0 as usize;
        assert_eq!(x[np + 3 + angle], 1.0);
    }

    #[test]
    fn count_over_points() {
        let env = env();
        let x = features(&env, "Points A,B,C,D,E,F; Angle(A,B,C); Angle(B,C,D); Angle(D,E,F); Goal Value(MeasureOfAngle(A,B,C))");
        let angle = env.schemas().predicate_id("Angle").unwrap().0 as usize;
        assert_eq!(x[angle], 0.5);
    }

    #[test]
    fn representations_share_a_vector() {
        let env = env();
        let a = features(&env, "Points A,B,C; Polygon(A,B,C); Goal Value(MeasureOfAngle(A,B,C))");
        let b = features(&env, "Points A,B,C; Polygon(B,C,A); Goal Value(MeasureOfAngle(C,B,A))");
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.is_finite()));
    }
}
