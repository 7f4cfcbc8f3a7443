use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use georeason::dataset::{load_corpus, ProblemRecord};
use georeason::deduction::Environment;
use georeason::lang::{parse_cdl, parse_gdl, ProblemCdl};
use georeason::mcts::{run_search, search_with_tree, simulate, train_loop, EdgeStats, MctsConfig, Tree, TreeNode};
use georeason::policy::{featurize, PolicyModel, TrainConfig};

fn env() -> Environment {
    Environment::new(Arc::new(parse_gdl(georeason::GEOMETRY_GDL).unwrap()))
}

fn corpus(env: &Environment) -> Vec<ProblemRecord> {
    load_corpus(env, &Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus")).unwrap()
}

fn record(env: &Environment, id: &str) -> ProblemRecord {
    corpus(env).into_iter().find(|r| r.id == id).unwrap()
}

fn uniform(env: &Environment) -> PolicyModel {
    PolicyModel::for_schemas(env.schemas())
}

fn tree_only() -> MctsConfig {
    MctsConfig { rollout_solutions: false, simulation_num: 4, max_sim_steps: 8, ..MctsConfig::default() }
}

#[test]
fn first_expansion() {
    let env = env();
    let rec = record(&env, "perimeter_07");
    let m = uniform(&env);
    let cfg = MctsConfig { max_iterations: 1, ..tree_only() };
    let (out, tree) = search_with_tree(&env, &rec.problem, &m, &m, &cfg);
    assert_eq!(out.iterations, 1);
    assert_eq!(tree.nodes.len(), 2);
    assert_eq!(tree.nodes[0].edges.iter().filter(|e| e.visited).count(), 1);
    let p: f64 = tree.nodes[0].edges.iter().map(|e| e.p).sum();
    assert!((p - 1.0).abs() <= 1e-9);
}

#[test]
fn solved_child_is_terminal_without_priors() {
    let env = env();
    let rec = record(&env, "angle_04");
    let m = uniform(&env);
    let (out, tree) = search_with_tree(&env, &rec.problem, &m, &m, &tree_only());
    assert!(out.solved);
    assert_eq!(out.sequence.len(), 1);
    let solved: Vec<&TreeNode> = tree.nodes.iter().filter(|n| n.solved).collect();
    assert_eq!(solved.len(), 1);
    assert!(solved[0].terminal && solved[0].edges.is_empty());
}

#[test]
fn no_progress_edge_dies() {
    let env = env();
    let p = parse_cdl("Points A,B,C; Polygon(A,B,C); Goal Value(MeasureOfAngle(A,B,C))", env.schemas()).unwrap();
    let state = env.init_state(&p).unwrap();
    let a = env.schemas().action_by_name("triangle_property_angle_sum", 1).unwrap();
    let state = env.apply_action(&state, a).unwrap().0;
    let m = uniform(&env);
    let mut edge = EdgeStats::new(a, env.schemas().action_index(a).unwrap(), 1.0);
    edge.g = 0.7;
    let mut tree = Tree {
        nodes: vec![TreeNode {
            digest: state.digest(),
            features: featurize(&env, &state),
            legal: vec![edge.action_index],
            edges: vec![edge],
            solved: false,
            terminal: false,
            state: state.clone(),
        }],
    };
    assert_eq!(tree.expand(&env, &m, 0, 0), Ok(0));
    assert_eq!(tree.nodes.len(), 1);
    let e = &tree.nodes[0].edges[0];
    assert!(e.dead && e.visited);
    assert_eq!(e.g, 0.0);
    assert_eq!(env.apply_action(&state, a).unwrap().0.digest(), tree.nodes[0].digest);
}

#[test]
fn simulation_edge_cases() {
    let env = env();
    let m = uniform(&env);
    let cfg = MctsConfig { simulation_num: 5, ..MctsConfig::default() };
    let solved = parse_cdl("Points A,B,C,D; Parallel(C,D,A,B); Goal Parallel(A,B,C,D)", env.schemas()).unwrap();
    assert_eq!(simulate(&env, &m, &env.init_state(&solved).unwrap(), &cfg, 0).0, 1.0);
    let stuck = parse_cdl("Points A,B,C; Goal Value(MeasureOfAngle(A,B,C))", env.schemas()).unwrap();
    assert_eq!(simulate(&env, &m, &env.init_state(&stuck).unwrap(), &cfg, 0).0, 0.0);
}

#[test]
fn uniform_rollouts_hit_one_of_four() {
    let env = env();
    let rec = record(&env, "angle_04");
    let state = env.init_state(&rec.problem).unwrap();
    let legal = env.legal_actions(&state);
    assert_eq!(legal.len(), 4);
    assert_eq!(legal.iter().filter(|&&a| env.solved(&env.apply_action(&state, a).unwrap().0)).count(), 1);
    let cfg = MctsConfig { simulation_num: 10_000, max_sim_steps: 1, ..MctsConfig::default() };
    let (omega, _) = simulate(&env, &uniform(&env), &state, &cfg, 0);
    assert!((omega - 0.25).abs() <= 0.02, "omega = {omega}");
}

#[test]
fn backups_discount_and_average() {
    let env = env();
    let m = uniform(&env);
    let mut checked = 0;
    for id in ["perimeter_07", "angle_19", "area_10"] {
        let rec = record(&env, id);
        let cfg = MctsConfig { record_backups: true, max_iterations: 60, ..tree_only() };
        let (out, tree) = search_with_tree(&env, &rec.problem, &m, &m, &cfg);
        assert_eq!(out.backups.len(), out.iterations);
        let mut sums: HashMap<(usize, usize), (u32, f64)> = HashMap::new();
        for b in &out.backups {
            let mut v = b.omega;
            for (d, (&edge, &value)) in b.edges.iter().zip(&b.values).enumerate() {
                assert_eq!(value, v, "depth {d}");
                assert!((value - b.gamma.powi(d as i32) * b.omega).abs() <= 1e-15);
                v *= b.gamma;
                let slot = sums.entry(edge).or_default();
                slot.0 += 1;
                slot.1 += value;
            }
        }
        for (n, node) in tree.nodes.iter().enumerate() {
            for (e, edge) in node.edges.iter().enumerate() {
                let (count, total) = sums.get(&(n, e)).copied().unwrap_or_default();
                assert_eq!(edge.n, count);
                if count > 0 && !edge.dead {
                    assert_eq!(edge.g, total / count as f64);
                    checked += 1;
                }
                assert!((0.0..=1.0).contains(&edge.g) && (0.0..=1.0).contains(&edge.p));
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn seeded_search_repeats() {
    let env = env();
    let m = uniform(&env);
    for rec in corpus(&env).iter().step_by(7) {
        for cfg in [MctsConfig { seed: 7, ..MctsConfig::default() }, MctsConfig { seed: 7, max_iterations: 30, ..tree_only() }] {
            let a = run_search(&env, &rec.problem, &m, &m, &cfg);
            let b = run_search(&env, &rec.problem, &m, &m, &cfg);
            assert_eq!((a.solved, &a.sequence, a.iterations, a.tree_nodes, a.root_visits), (b.solved, &b.sequence, b.iterations, b.tree_nodes, b.root_visits), "{}", rec.id);
            if a.solved {
                assert!(env.verify_sequence(&rec.problem, &a.sequence).unwrap().solved);
            }
        }
    }
}

#[test]
fn solved_at_init() {
    let env = env();
    let m = uniform(&env);
    let p = parse_cdl("Points A,B,C,D; Parallel(C,D,A,B); Goal Parallel(A,B,C,D)", env.schemas()).unwrap();
    let out = run_search(&env, &p, &m, &m, &MctsConfig::default());
    assert!(out.solved && out.sequence.is_empty());
    assert_eq!(out.iterations, 0);
}

#[test]
fn single_step_problems_need_one_action() {
    let env = env();
    let m = uniform(&env);
    for rec in corpus(&env).iter().filter(|r| r.annotated_sequence.as_ref().unwrap().len() == 1) {
        // Unvisited root edges are all tried before any is revisited.
        let root = env.legal_actions(&env.init_state(&rec.problem).unwrap()).len();
        let out = run_search(&env, &rec.problem, &m, &m, &MctsConfig { max_iterations: root, ..tree_only() });
        assert!(out.solved, "{}", rec.id);
        assert_eq!(out.sequence.len(), 1, "{}", rec.id);

        // Rollout solutions are pruned to an irreducible sequence, not
        // necessarily a shortest one.
        let out = run_search(&env, &rec.problem, &m, &m, &MctsConfig { max_iterations: 1, ..MctsConfig::default() });
        assert!(out.solved, "{}", rec.id);
        for i in 0..out.sequence.len() {
            let mut shorter = out.sequence.clone();
            shorter.remove(i);
            assert!(!env.verify_sequence(&rec.problem, &shorter).unwrap().solved, "{}", rec.id);
        }
    }
}

fn annotated_probability(env: &Environment, model: &PolicyModel, recs: &[ProblemRecord]) -> f64 {
    let mut total = 0.0;
    let mut n = 0;
    for r in recs {
        let mut s = env.init_state(&r.problem).unwrap();
        for &a in r.annotated_sequence.as_ref().unwrap() {
            let p = model.predict(&featurize(env, &s)).unwrap();
            total += p[env.schemas().action_index(a).unwrap()];
            n += 1;
            s = env.apply_action(&s, a).unwrap().0;
        }
    }
    total / n as f64
}

#[test]
fn zero_generations_keep_the_model() {
    let env = env();
    let m = uniform(&env);
    let lineage = train_loop(&env, &[], &m, &MctsConfig::default(), &TrainConfig::default(), 0).unwrap();
    assert_eq!(lineage.models, vec![m]);
    assert!(lineage.metrics.is_empty());
}

#[test]
fn failed_generation_keeps_parameters() {
    let env = env();
    let m = uniform(&env);
    let p: ProblemCdl = parse_cdl(
        "Points A,B,C,D; Polygon(A,B,C); Equal(MeasureOfAngle(A,B,C),40); Goal Value(LengthOfLine(A,D))",
        env.schemas(),
    )
    .unwrap();
    let lineage = train_loop(&env, &[p], &m, &MctsConfig { max_iterations: 20, ..tree_only() }, &TrainConfig::default(), 1).unwrap();
    assert_eq!(lineage.metrics[0].solved, 0);
    let next = lineage.latest();
    assert_eq!((&next.weights, &next.bias), (&m.weights, &m.bias));
    assert_eq!(next.version, m.version + 1);
}

#[test]
fn one_generation_raises_annotated_probability() {
    let env = env();
    let recs: Vec<ProblemRecord> =
        ["angle_05", "length_02", "area_04"].iter().map(|id| record(&env, id)).collect();
    let problems: Vec<ProblemCdl> = recs.iter().map(|r| r.problem.clone()).collect();
    let m = uniform(&env);
    let lineage = train_loop(&env, &problems, &m, &MctsConfig::default(), &TrainConfig::default(), 1).unwrap();
    assert_eq!(lineage.metrics[0].solved, 3);
    let before = annotated_probability(&env, &m, &recs);
    let after = annotated_probability(&env, lineage.latest(), &recs);
    assert!(after > before, "{before} -> {after}");
}
