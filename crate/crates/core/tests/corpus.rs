use std::path::Path;
use std::sync::Arc;

use georeason::deduction::{Environment, ProblemFile};
use georeason::lang::{parse_gdl, Schemas};

fn data() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data"))
}

fn corpus() -> (Arc<Schemas>, Vec<ProblemFile>) {
    let schemas = Arc::new(parse_gdl(&std::fs::read_to_string(data().join("geometry.gdl")).unwrap()).unwrap());
    let mut entries: Vec<_> = std::fs::read_dir(data().join("corpus")).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    let files = entries
        .iter()
        .map(|p| serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap())
        .collect();
    (schemas, files)
}

#[test]
fn saturation_never_contradicts() {
    let (schemas, files) = corpus();
    let env = Environment::new(schemas.clone()).with_max_steps(usize::MAX);
    for file in &files {
        let problem = file.to_cdl(&schemas).unwrap();
        let mut state = env.init_state(&problem).unwrap().untraced();
        loop {
            let legal = env.legal_actions(&state);
            if legal.is_empty() {
                break;
            }
            for a in legal {
                state = match env.apply_action(&state, a) {
                    Ok((next, _)) => next,
                    Err(e) => panic!("{}: {} -> {e}", file.id, schemas.action_name(a)),
                };
            }
        }
        assert!(env.solved(&state), "{} unsolved at saturation", file.id);
    }
}

#[test]
fn annotated_sequences_verify() {
    let (schemas, files) = corpus();
    let env = Environment::new(schemas.clone());
    let mut failures = Vec::new();
    for file in files {
        let problem = file.to_cdl(&schemas).unwrap();
        let actions = file.actions(&schemas).unwrap().unwrap();
        let v = env.verify_sequence(&problem, &actions).unwrap();
        if !v.solved || v.first_failure.is_some() {
            failures.push(format!("{}: solved={} first_failure={:?}", file.id, v.solved, v.first_failure));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn dropping_any_step_breaks_the_proof() {
    let (schemas, files) = corpus();
    let env = Environment::new(schemas.clone());
    let mut redundant = Vec::new();
    for file in &files {
        let problem = file.to_cdl(&schemas).unwrap();
        let actions = file.actions(&schemas).unwrap().unwrap();
        for i in 0..actions.len() {
            let mut short = actions.clone();
            short.remove(i);
            if env.verify_sequence(&problem, &short).unwrap().solved {
                redundant.push(format!("{} step {i}", file.id));
            }
        }
    }
    assert!(redundant.is_empty(), "{redundant:#?}");
}

#[test]
fn goal_nodes_reachable_in_trace() {
    let (schemas, files) = corpus();
    let env = Environment::new(schemas.clone());
    for file in &files {
        let problem = file.to_cdl(&schemas).unwrap();
        let v = env.verify_sequence(&problem, &file.actions(&schemas).unwrap().unwrap()).unwrap();
        let goal = env.goal_nodes(&v.state);
        assert!(!goal.is_empty(), "{}", file.id);
        let reachable = v.trace.reachable();
        assert!(goal.iter().all(|g| reachable.contains(g)), "{}", file.id);
        let dot = v.trace.to_dot(&schemas);
        assert!(dot.starts_with("digraph"), "{}", file.id);
    }
}
