use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Solver;
use crate::dataset::DifficultyLevel;
use crate::deduction::Environment;
use crate::lang::ProblemCdl;

#[derive(Debug, Clone)]
pub struct BenchProblem {
    pub id: String,
    pub level: DifficultyLevel,
    pub problem: ProblemCdl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemOutcome {
    pub id: String,
    pub solved: bool,
    pub seq_len: usize,
    pub nodes: usize,
    pub seconds: f64,
}

/// One method's results. Rates are percentages; a level with no problems
/// has no rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub total_rate: f64,
    pub per_level: BTreeMap<String, Option<f64>>,
    pub per_problem: Vec<ProblemOutcome>,
}

impl BenchRow {
    pub fn solved(&self) -> usize {
        self.per_problem.iter().filter(|p| p.solved).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

fn rate(solved: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| 100.0 * solved as f64 / total as f64)
}

/// Runs every solver on every problem. Cells are independent and run on a
/// pool of `jobs` threads; the table does not depend on scheduling.
pub fn benchmark(env: &Environment, problems: &[BenchProblem], solvers: &[&dyn Solver], jobs: usize) -> BenchTable {
    if problems.is_empty() {
        return BenchTable::default();
    }
    let cells: Vec<(usize, usize)> =
        (0..solvers.len()).flat_map(|m| (0..problems.len()).map(move |p| (m, p))).collect();
    let run = |&(m, p): &(usize, usize)| {
        let r = solvers[m].solve(env, &problems[p].problem);
        ProblemOutcome {
            id: problems[p].id.clone(),
            solved: r.solved,
            seq_len: r.sequence.len(),
            nodes: r.nodes_expanded,
            seconds: r.elapsed,
        }
    };
    let outcomes: Vec<ProblemOutcome> = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(|| cells.par_iter().map(run).collect()),
        Err(_) => cells.iter().map(run).collect(),
    };
    let rows = solvers
        .iter()
        .zip(outcomes.chunks(problems.len()))
        .map(|(s, chunk)| {
            let mut per_level = BTreeMap::new();
            for level in DifficultyLevel::ALL {
                let (mut n, mut k) = (0, 0);
                for (o, p) in chunk.iter().zip(problems) {
                    if p.level == level {
                        n += 1;
                        k += o.solved as usize;
                    }
                }
                per_level.insert(level.label().to_string(), rate(k, n));
            }
            let solved = chunk.iter().filter(|o| o.solved).count();
            BenchRow {
                method: s.name().to_string(),
                total_rate: rate(solved, chunk.len()).unwrap_or(0.0),
                per_level,
                per_problem: chunk.to_vec(),
            }
        })
        .collect();
    BenchTable { rows }
}

impl BenchTable {
    /// Aligned text: one row per method, columns Total then L1..L6.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.method.len()).max().unwrap_or(0).max(6);
        let mut out = format!("{:<width$}  {:>7}", "Method", "Total");
        for level in DifficultyLevel::ALL {
            let _ = write!(out, "  {:>7}", level.label());
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<width$}  {:>7.2}", row.method, row.total_rate);
            for level in DifficultyLevel::ALL {
                match row.per_level.get(level.label()).copied().flatten() {
                    Some(r) => {
                        let _ = write!(out, "  {r:>7.2}");
                    }
                    None => {
                        let _ = write!(out, "  {:>7}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}
