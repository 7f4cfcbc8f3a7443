use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use georeason::dataset::{build_experience, corpus_stats, load_corpus, split, ProblemRecord};
use georeason::deduction::{resolve_step, step_json, Environment, ProblemFile, StepJson};
use georeason::lang::{parse_cdl, parse_gdl, Action, ProblemCdl, Schemas};
use georeason::mcts::{run_search, train_loop};
use georeason::policy::{topk_hit_rate, train_supervised, PolicyModel};
use georeason::search::{benchmark, BenchProblem, Solver};
use georeason::solver::{Registry, METHODS};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{Outcome, Tuning};

const SPLIT: [f64; 3] = [0.7, 0.15, 0.15];
const TABLE_KS: [usize; 7] = [1, 3, 5, 10, 15, 20, 25];

struct Ctx {
    env: Environment,
    cfg: RunConfig,
    verbose: bool,
}

impl Ctx {
    fn new(t: &Tuning) -> Result<Self> {
        let cfg = RunConfig::from_flags(t)?;
        let source = match &t.gdl {
            Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            None => georeason::GEOMETRY_GDL.to_string(),
        };
        let schemas = parse_gdl(&source).context("parsing schema library")?;
        let env = Environment::new(Arc::new(schemas)).with_max_steps(cfg.max_steps);
        Ok(Ctx { env, cfg, verbose: t.verbose })
    }

    fn schemas(&self) -> &Schemas {
        self.env.schemas()
    }

    fn model(&self, t: &Tuning) -> Result<PolicyModel> {
        let Some(path) = &t.model else { return Ok(PolicyModel::for_schemas(self.schemas())) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let model: PolicyModel = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let expected = PolicyModel::for_schemas(self.schemas());
        if model.feature_dim != expected.feature_dim || model.action_names != expected.action_names {
            bail!("model {} does not match the schema library", path.display());
        }
        if !model.is_finite() {
            bail!("model {} has non-finite parameters", path.display());
        }
        Ok(model)
    }

    fn corpus(&self, dir: &Path) -> Result<Vec<ProblemRecord>> {
        let start = Instant::now();
        let records = load_corpus(&self.env, dir)?;
        self.note(format!("loaded {} problems in {:.2?}", records.len(), start.elapsed()));
        Ok(records)
    }

    fn note(&self, msg: String) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }

    fn steps(&self, seq: &[Action]) -> Vec<StepJson> {
        seq.iter().map(|&a| step_json(self.schemas(), a)).collect()
    }
}

/// A `.json` problem file or CDL text.
fn read_problem(env: &Environment, path: &Path) -> Result<(String, ProblemCdl, Option<ProblemFile>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let file: ProblemFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let problem = file.to_cdl(env.schemas()).with_context(|| format!("validating {}", path.display()))?;
        Ok((file.id.clone(), problem, Some(file)))
    } else {
        let problem = parse_cdl(&text, env.schemas()).with_context(|| format!("parsing {}", path.display()))?;
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok((id, problem, None))
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &Value) -> Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(value)?))
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

pub fn solve(path: &Path, method: &str, out: Option<&Path>, t: &Tuning) -> Result<Outcome> {
    let ctx = Ctx::new(t)?;
    let (id, problem, _) = read_problem(&ctx.env, path)?;
    let model = Arc::new(ctx.model(t)?);
    let start = Instant::now();
    let record = if method == "mcts" {
        let r = run_search(&ctx.env, &problem, &model, &model, &ctx.cfg.mcts);
        json!({
            "problem_id": id,
            "method": method,
            "solved": r.solved,
            "sequence": ctx.steps(&r.sequence),
            "iterations": r.iterations,
            "tree_nodes": r.tree_nodes,
            "root_visits": r.root_visits,
            "seed": ctx.cfg.seed,
            "config": ctx.cfg.mcts,
        })
    } else {
        let registry = Registry::standard(&ctx.cfg.budget, &ctx.cfg.mcts, model);
        let solver = registry
            .get(method)
            .ok_or_else(|| anyhow!("unknown method `{method}`; expected one of {}", METHODS.join(", ")))?;
        let r = solver.solve(&ctx.env, &problem);
        json!({
            "problem_id": id,
            "method": method,
            "solved": r.solved,
            "sequence": ctx.steps(&r.sequence),
            "nodes_expanded": r.nodes_expanded,
            "seed": ctx.cfg.seed,
            "config": ctx.cfg.budget,
        })
    };
    ctx.note(format!("{method} on {id}: {:.2?}", start.elapsed()));
    print_json(&record)?;
    if let Some(p) = out {
        write_json(p, &record)?;
    }
    Ok(if record["solved"] == Value::Bool(true) { Outcome::Solved } else { Outcome::Unsolved })
}

pub fn verify(path: &Path, sequence: Option<&Path>, dot: Option<&Path>, t: &Tuning) -> Result<Outcome> {
    let ctx = Ctx::new(t)?;
    let (id, problem, file) = read_problem(&ctx.env, path)?;
    let steps: Vec<StepJson> = match sequence {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => file
            .and_then(|f| f.annotated_sequence)
            .ok_or_else(|| anyhow!("no sequence given and {} has no annotated sequence", path.display()))?,
    };
    // Steps naming no known branch cut the replay short and count as failures.
    let mut actions = Vec::with_capacity(steps.len());
    let mut unresolved = None;
    for (i, s) in steps.iter().enumerate() {
        match resolve_step(ctx.schemas(), s) {
            Ok(a) => actions.push(a),
            Err(_) => {
                unresolved = Some(i);
                break;
            }
        }
    }
    let start = Instant::now();
    let v = ctx.env.verify_sequence(&problem, &actions)?;
    ctx.note(format!("verified {id} in {:.2?}", start.elapsed()));
    let first_failure = match (v.first_failure, unresolved) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let solved = v.solved && unresolved.is_none();
    if let Some(p) = dot {
        std::fs::write(p, v.trace.to_dot(ctx.schemas())).with_context(|| format!("writing {}", p.display()))?;
    }
    print_json(&json!({
        "problem_id": id,
        "solved": solved,
        "first_failure": first_failure,
        "steps": steps.len(),
        "trace": { "nodes": v.trace.nodes().len(), "edges": v.trace.edges().len() },
    }))?;
    Ok(if solved && first_failure.is_none() { Outcome::Solved } else { Outcome::Unsolved })
}

pub fn train(corpus: &Path, out: &Path, t: &Tuning) -> Result<Outcome> {
    let ctx = Ctx::new(t)?;
    let records = ctx.corpus(corpus)?;
    let parts = split(&records, SPLIT, ctx.cfg.seed)?;
    let gamma = ctx.cfg.train.gamma;
    let pool = build_experience(&ctx.env, &parts.train, gamma)?;
    if pool.is_empty() {
        bail!("no annotated sequences in the training split; nothing to learn from");
    }
    let validation = build_experience(&ctx.env, &parts.validation, gamma)?;
    let test = build_experience(&ctx.env, &parts.test, gamma)?;

    let start = Instant::now();
    let init = ctx.model(t)?;
    let (mut sl, curve) = train_supervised(&init, &pool, &validation, &ctx.cfg.train)?;
    sl.version = init.version + 1;
    ctx.note(format!("supervised: {} pairs, {} epochs, {:.2?}", pool.len(), curve.len(), start.elapsed()));

    let start = Instant::now();
    let problems: Vec<ProblemCdl> = parts.train.iter().map(|r| r.problem.clone()).collect();
    let lineage = train_loop(&ctx.env, &problems, &sl, &ctx.cfg.mcts, &ctx.cfg.train, ctx.cfg.generations)?;
    ctx.note(format!("{} generation(s) in {:.2?}", ctx.cfg.generations, start.elapsed()));

    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut files = Vec::new();
    for m in &lineage.models {
        let name = format!("model_v{}.json", m.version);
        write_json(&out.join(&name), m)?;
        files.push(name);
    }
    let ks: Vec<usize> = TABLE_KS.iter().copied().filter(|&k| k <= sl.action_count).collect();
    let ids = |rs: &[ProblemRecord]| rs.iter().map(|r| r.id.clone()).collect::<Vec<_>>();
    let metrics = json!({
        "seed": ctx.cfg.seed,
        "split": { "train": ids(&parts.train), "test": ids(&parts.test), "validation": ids(&parts.validation) },
        "pairs": { "train": pool.len(), "test": test.len(), "validation": validation.len() },
        "supervised": curve,
        "hit_rate": {
            "k": ks,
            "supervised": topk_hit_rate(&sl, &test, &ks)?,
            "latest": topk_hit_rate(lineage.latest(), &test, &ks)?,
        },
        "generations": lineage.metrics,
        "models": files,
    });
    write_json(&out.join("metrics.json"), &metrics)?;
    print_json(&metrics)?;
    Ok(Outcome::Solved)
}

pub fn eval(corpus: &Path, ks: &[usize], out: Option<&Path>, t: &Tuning) -> Result<Outcome> {
    let ctx = Ctx::new(t)?;
    let model = ctx.model(t)?;
    if let Some(k) = ks.iter().find(|&&k| k == 0 || k > model.action_count) {
        bail!("k = {k} outside 1..={}", model.action_count);
    }
    let records = ctx.corpus(corpus)?;
    let parts = split(&records, SPLIT, ctx.cfg.seed)?;
    let test = build_experience(&ctx.env, &parts.test, ctx.cfg.train.gamma)?;
    if test.is_empty() {
        bail!("the test split has no state-action pairs");
    }
    let start = Instant::now();
    let rates = topk_hit_rate(&model, &test, ks)?;
    ctx.note(format!("evaluated {} pairs in {:.2?}", test.len(), start.elapsed()));
    let mut header = format!("{:<8}", "Range");
    let mut row = format!("{:<8}", "Hit(%)");
    for (k, r) in ks.iter().zip(&rates) {
        header.push_str(&format!(" {k:>6}"));
        row.push_str(&format!(" {:>6.2}", 100.0 * r));
    }
    emit(&format!("{header}\n{row}\n"))?;
    if let Some(p) = out {
        write_json(p, &json!({ "pairs": test.len(), "k": ks, "hit_rate": rates }))?;
    }
    Ok(Outcome::Solved)
}

pub fn bench(corpus: &Path, methods: &[String], out: Option<&Path>, t: &Tuning) -> Result<Outcome> {
    let ctx = Ctx::new(t)?;
    let records = ctx.corpus(corpus)?;
    let registry = Registry::standard(&ctx.cfg.budget, &ctx.cfg.mcts, Arc::new(ctx.model(t)?));
    let names: Vec<&str> =
        if methods.is_empty() { METHODS.to_vec() } else { methods.iter().map(String::as_str).collect() };
    let solvers: Vec<&dyn Solver> = names
        .iter()
        .map(|n| registry.get(n).ok_or_else(|| anyhow!("unknown method `{n}`")))
        .collect::<Result<_>>()?;
    let problems: Vec<BenchProblem> = records
        .iter()
        .map(|r| {
            let level = r.level.ok_or_else(|| anyhow!("{} has no difficulty level", r.id))?;
            Ok(BenchProblem { id: r.id.clone(), level, problem: r.problem.clone() })
        })
        .collect::<Result<_>>()?;
    let start = Instant::now();
    let table = benchmark(&ctx.env, &problems, &solvers, ctx.cfg.jobs);
    ctx.note(format!("benchmark: {} cells in {:.2?}", problems.len() * solvers.len(), start.elapsed()));
    let text = table.render();
    emit(&text)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_json(&dir.join("bench.json"), &table.rows)?;
        std::fs::write(dir.join("bench.txt"), &text)?;
    }
    Ok(Outcome::Solved)
}

pub fn stats(corpus: &Path, as_json: bool, t: &Tuning) -> Result<Outcome> {
    let ctx = Ctx::new(t)?;
    let s = corpus_stats(&ctx.corpus(corpus)?);
    if as_json {
        emit(&format!("{}\n", serde_json::to_string_pretty(&s)?))?;
    } else {
        emit(&s.render())?;
    }
    Ok(Outcome::Solved)
}
