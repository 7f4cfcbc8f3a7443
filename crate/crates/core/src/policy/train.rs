use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{Gradient, PolicyModel};
use super::{FeatureVector, PolicyError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.5, epochs: 60, batch_size: 16, l2: 1e-4, gamma: 0.99, seed: 0 }
    }
}

/// One replayed state-action pair with its discounted return.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub problem_id: String,
    pub t: usize,
    pub features: FeatureVector,
    pub action_index: usize,
    #[serde(rename = "G")]
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub features: FeatureVector,
    pub action: usize,
    /// Legal action indices at this step; the policy is masked to them.
    pub legal: Vec<usize>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    #[serde(rename = "return")]
    pub ret: f64,
}

impl Trajectory {
    pub fn new(steps: Vec<TrajectoryStep>, gamma: f64) -> Self {
        let ret = steps.iter().rev().fold(0.0, |acc, s| s.reward + gamma * acc);
        Trajectory { steps, ret }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub validation: Option<f64>,
}

/// Mean cross-entropy of the unmasked policy against the recorded actions.
pub fn cross_entropy(model: &PolicyModel, pool: &[Experience]) -> Result<f64, PolicyError> {
    if pool.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for e in pool {
        total -= model.log_prob(&e.features, e.action_index, None)?;
    }
    Ok(total / pool.len() as f64)
}

/// Minibatch gradient descent on cross-entropy with an L2 penalty on the
/// weights. Shuffling is seeded; the result is deterministic.
pub fn train_supervised(
    model: &PolicyModel,
    pool: &[Experience],
    validation: &[Experience],
    config: &TrainConfig,
) -> Result<(PolicyModel, Vec<EpochLoss>), PolicyError> {
    if pool.is_empty() {
        return Err(PolicyError::EmptyPool);
    }
    let mut m = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size.max(1)) {
            let mut g = Gradient::zeros(m.feature_dim, m.action_count);
            for &i in batch {
                g.add_scaled(&m.log_prob_grad(&pool[i].features, pool[i].action_index, None)?, 1.0);
            }
            let scale = config.learning_rate / batch.len() as f64;
            if config.l2 > 0.0 {
                let decay = 1.0 - config.learning_rate * config.l2;
                for w in m.weights.iter_mut().flatten() {
                    *w *= decay;
                }
            }
            m.apply(&g, scale);
        }
        curve.push(EpochLoss {
            epoch: epoch + 1,
            train: cross_entropy(&m, pool)?,
            validation: if validation.is_empty() { None } else { Some(cross_entropy(&m, validation)?) },
        });
    }
    Ok((m, curve))
}

/// Mean over trajectories of `sum_t grad log pi(a_t | s_t) * R(tau)`.
pub fn policy_gradient(model: &PolicyModel, trajectories: &[Trajectory]) -> Result<Gradient, PolicyError> {
    let mut g = Gradient::zeros(model.feature_dim, model.action_count);
    if trajectories.is_empty() {
        return Ok(g);
    }
    let n = trajectories.len() as f64;
    for tau in trajectories.iter().filter(|t| t.ret != 0.0) {
        for s in &tau.steps {
            let legal = (!s.legal.is_empty()).then_some(s.legal.as_slice());
            g.add_scaled(&model.log_prob_grad(&s.features, s.action, legal)?, tau.ret / n);
        }
    }
    Ok(g)
}

/// One REINFORCE ascent step. Batches whose returns are all zero leave the
/// parameters untouched.
pub fn reinforce_update(
    model: &PolicyModel,
    trajectories: &[Trajectory],
    config: &TrainConfig,
) -> Result<PolicyModel, PolicyError> {
    let mut m = model.clone();
    if trajectories.iter().all(|t| t.ret == 0.0) {
        return Ok(m);
    }
    let g = policy_gradient(model, trajectories)?;
    m.apply(&g, config.learning_rate);
    Ok(m)
}

/// Fraction of pairs whose true action ranks within the top `k`, for each
/// `k`. Ranking is by probability, ties to the lower action index.
pub fn topk_hit_rate(model: &PolicyModel, pairs: &[Experience], ks: &[usize]) -> Result<Vec<f64>, PolicyError> {
    let mut hits = vec![0usize; ks.len()];
    for e in pairs {
        let p = model.predict(&e.features)?;
        let truth = p[e.action_index];
        let rank = p
            .iter()
            .enumerate()
            .filter(|&(i, &q)| q > truth || (q == truth && i < e.action_index))
            .count();
        for (h, &k) in hits.iter_mut().zip(ks) {
            if rank < k {
                *h += 1;
            }
        }
    }
    let n = pairs.len().max(1) as f64;
    Ok(hits.into_iter().map(|h| h as f64 / n).collect())
}
