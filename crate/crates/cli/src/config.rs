use std::path::Path;

use anyhow::{bail, Context, Result};
use georeason::mcts::MctsConfig;
use georeason::policy::TrainConfig;
use georeason::search::SearchBudget;

use crate::Tuning;

/// Every tunable of a run. Flags are applied first, then the config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub max_steps: usize,
    pub jobs: usize,
    pub generations: usize,
    pub budget: SearchBudget,
    pub mcts: MctsConfig,
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn from_flags(t: &Tuning) -> Result<Self> {
        let mut cfg = RunConfig {
            seed: 0,
            max_steps: georeason::deduction::DEFAULT_MAX_STEPS,
            jobs: 1,
            generations: 1,
            budget: SearchBudget::default(),
            mcts: MctsConfig::default(),
            train: TrainConfig::default(),
        };
        let flags: [(&str, Option<String>); 13] = [
            ("seed", t.seed.map(|v| v.to_string())),
            ("timeout", t.timeout.map(|v| v.to_string())),
            ("max_steps", t.max_steps.map(|v| v.to_string())),
            ("sims", t.sims.map(|v| v.to_string())),
            ("iterations", t.iterations.map(|v| v.to_string())),
            ("c", t.c.map(|v| v.to_string())),
            ("gamma", t.gamma.map(|v| v.to_string())),
            ("beam_width", t.beam_width.map(|v| v.to_string())),
            ("jobs", t.jobs.map(|v| v.to_string())),
            ("max_nodes", t.max_nodes.map(|v| v.to_string())),
            ("max_depth", t.max_depth.map(|v| v.to_string())),
            ("generations", t.generations.map(|v| v.to_string())),
            ("epochs", t.epochs.map(|v| v.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if let Some(path) = &t.config {
            cfg.apply_file(path)?;
        }
        Ok(cfg)
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("{}:{}: expected key=value", path.display(), n + 1);
            };
            self.set(k.trim(), v.trim()).with_context(|| format!("{}:{}", path.display(), n + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| anyhow::anyhow!("invalid value `{v}` for `{key}`"))
        }
        match key.replace('-', "_").as_str() {
            "seed" => {
                // One seed feeds every stochastic component.
                let s: u64 = num(key, value)?;
                self.seed = s;
                self.budget.rng_seed = s;
                self.mcts.seed = s;
                self.train.seed = s;
            }
            "timeout" => {
                let t: f64 = num(key, value)?;
                self.budget.wall_timeout = t;
                self.mcts.wall_timeout = t;
            }
            "max_steps" => self.max_steps = num(key, value)?,
            "sims" | "simulation_num" => self.mcts.simulation_num = num(key, value)?,
            "max_sim_steps" => self.mcts.max_sim_steps = num(key, value)?,
            "iterations" | "max_iterations" => self.mcts.max_iterations = num(key, value)?,
            "c" => self.mcts.c = num(key, value)?,
            "gamma" => {
                let g: f64 = num(key, value)?;
                self.mcts.gamma = g;
                self.train.gamma = g;
            }
            "rollout_solutions" => self.mcts.rollout_solutions = num(key, value)?,
            "beam_width" => self.budget.beam_width = num(key, value)?,
            "max_nodes" => self.budget.max_nodes = num(key, value)?,
            "max_depth" => self.budget.max_depth = num(key, value)?,
            "jobs" => self.jobs = num(key, value)?,
            "generations" => self.generations = num(key, value)?,
            "learning_rate" | "alpha" => self.train.learning_rate = num(key, value)?,
            "epochs" => self.train.epochs = num(key, value)?,
            "batch_size" => self.train.batch_size = num(key, value)?,
            "l2" => self.train.l2 = num(key, value)?,
            _ => bail!("unknown config key `{key}`"),
        }
        self.validate()
    }

    fn validate(&self) -> Result<()> {
        if !(self.mcts.gamma > 0.0 && self.mcts.gamma <= 1.0) {
            bail!("gamma must lie in (0, 1]");
        }
        if self.mcts.c < 0.0 {
            bail!("c must be nonnegative");
        }
        if self.mcts.simulation_num == 0 {
            bail!("sims must be at least 1");
        }
        if self.train.learning_rate <= 0.0 {
            bail!("learning_rate must be positive");
        }
        if self.budget.wall_timeout < 0.0 {
            bail!("timeout must be nonnegative");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# tuning\nsims = 5\nseed=9\n\nc=0.5 # explore less\n").unwrap();
        let t = Tuning { sims: Some(50), seed: Some(3), config: Some(path), ..Tuning::default() };
        let cfg = RunConfig::from_flags(&t).unwrap();
        assert_eq!(cfg.mcts.simulation_num, 5);
        assert_eq!(cfg.mcts.c, 0.5);
        assert_eq!((cfg.seed, cfg.mcts.seed, cfg.budget.rng_seed, cfg.train.seed), (9, 9, 9, 9));
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = RunConfig::from_flags(&Tuning::default()).unwrap();
        assert!(cfg.set("gamma", "1.5").is_err());
        assert!(cfg.set("sims", "many").is_err());
        assert!(cfg.set("unknown", "1").is_err());
    }
}
