use std::path::Path;
use std::sync::Arc;

use georeason::algebra::normalize;
use georeason::deduction::{Environment, ProblemFile, State};
use georeason::lang::{parse_gdl, Action, Goal, ProblemCdl, Schemas};

fn fixture(id: &str) -> (Arc<Schemas>, ProblemCdl) {
    let data = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data"));
    let schemas = Arc::new(parse_gdl(&std::fs::read_to_string(data.join("geometry.gdl")).unwrap()).unwrap());
    let text = std::fs::read_to_string(data.join("corpus").join(format!("{id}.json"))).unwrap();
    let file: ProblemFile = serde_json::from_str(&text).unwrap();
    let problem = file.to_cdl(&schemas).unwrap();
    (schemas, problem)
}

/// Goal check that evaluates the target term from the determined values.
fn goal_reached(state: &State) -> bool {
    let Goal::Value { term, target } = &*state.goal else { panic!("fixtures have value goals") };
    let det = state.algebra.determined();
    match normalize(term, &|s| det.get(s).cloned()).ok().and_then(|r| r.as_constant()) {
        Some(v) => target.as_ref().is_none_or(|t| *t == v),
        None => false,
    }
}

const FIXTURES: [&str; 3] = ["angle_05", "length_02", "area_04"];

#[test]
fn two_ply_enumeration() {
    for id in FIXTURES {
        let (schemas, problem) = fixture(id);
        let env = Environment::new(schemas.clone());
        let root = env.init_state(&problem).unwrap();
        assert!(!goal_reached(&root), "{id} solved at the root");
        let mut rewarded = 0;
        for &a1 in schemas.actions() {
            let o1 = env.step(&root, a1);
            assert_eq!(o1.reward == 1.0, goal_reached(&o1.next), "{id}: {}", schemas.action_name(a1));
            assert!(o1.reward == 0.0 || o1.reward == 1.0);
            if o1.reward == 1.0 {
                assert!(o1.terminal);
                rewarded += 1;
                continue;
            }
            if o1.terminal {
                continue;
            }
            for &a2 in schemas.actions() {
                let o2 = env.step(&o1.next, a2);
                assert_eq!(o2.reward == 1.0, goal_reached(&o2.next), "{id}: {} then {}", schemas.action_name(a1), schemas.action_name(a2));
                if !o2.progress() {
                    assert_eq!(o2.reward, 0.0);
                }
                rewarded += usize::from(o2.reward == 1.0);
            }
        }
        assert!(rewarded > 0, "{id}: no two-step solution found");
    }
}

#[test]
fn non_executable_action_scores_zero() {
    let (schemas, problem) = fixture("angle_05");
    let env = Environment::new(schemas);
    let root = env.init_state(&problem).unwrap();
    let o = env.step(&root, Action { theorem: 9999, branch: 1 });
    assert!(o.error.is_some());
    assert_eq!(o.reward, 0.0);
    assert!(o.terminal);
}

#[test]
fn step_limit_ends_the_episode_without_reward() {
    for id in FIXTURES {
        let (schemas, problem) = fixture(id);
        let env = Environment::new(schemas.clone()).with_max_steps(1);
        let root = env.init_state(&problem).unwrap();
        for &a in schemas.actions() {
            let o = env.step(&root, a);
            assert!(o.terminal);
            assert!(o.legal.is_empty());
            assert_eq!(o.reward, if goal_reached(&o.next) { 1.0 } else { 0.0 });
        }
    }
}
