use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_search, MctsConfig};
use crate::deduction::Environment;
use crate::lang::ProblemCdl;
use crate::policy::{reinforce_update, PolicyError, PolicyModel, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationMetrics {
    pub generation: usize,
    pub solved: usize,
    pub attempted: usize,
    pub solve_rate: f64,
    pub trajectories: usize,
    pub mean_return: f64,
}

/// Every model produced, oldest first, with per-generation metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub models: Vec<PolicyModel>,
    pub metrics: Vec<GenerationMetrics>,
}

impl Lineage {
    pub fn latest(&self) -> &PolicyModel {
        self.models.last().expect("lineage starts with the initial model")
    }
}

/// Each generation searches every problem with the latest model guiding the
/// tree and the previous generation driving rollouts, then takes one
/// REINFORCE step on the collected trajectories. Problem `i` searches with
/// seed `mcts.seed + i`.
pub fn train_loop(
    env: &Environment,
    problems: &[ProblemCdl],
    initial: &PolicyModel,
    mcts: &MctsConfig,
    train: &TrainConfig,
    generations: usize,
) -> Result<Lineage, PolicyError> {
    let mut models = vec![initial.clone()];
    let mut metrics = Vec::with_capacity(generations);
    for generation in 1..=generations {
        let rl = models.last().unwrap().clone();
        let sl = models[models.len().saturating_sub(2)].clone();
        let outcomes: Vec<_> = problems
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let cfg = MctsConfig { seed: mcts.seed.wrapping_add(i as u64), ..mcts.clone() };
                run_search(env, p, &rl, &sl, &cfg)
            })
            .collect();
        let trajectories: Vec<_> = outcomes.iter().flat_map(|o| o.trajectories.iter().cloned()).collect();
        let solved = outcomes.iter().filter(|o| o.solved).count();
        let mut next = reinforce_update(&rl, &trajectories, train)?;
        next.version = rl.version + 1;
        metrics.push(GenerationMetrics {
            generation,
            solved,
            attempted: problems.len(),
            solve_rate: if problems.is_empty() { 0.0 } else { solved as f64 / problems.len() as f64 },
            trajectories: trajectories.len(),
            mean_return: if trajectories.is_empty() {
                0.0
            } else {
                trajectories.iter().map(|t| t.ret).sum::<f64>() / trajectories.len() as f64
            },
        });
        models.push(next);
    }
    Ok(Lineage { models, metrics })
}
