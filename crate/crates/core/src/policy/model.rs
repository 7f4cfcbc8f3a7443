use serde::{Deserialize, Serialize};

use super::PolicyError;
use crate::lang::Schemas;

/// Linear softmax scorer over branch-actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyModel {
    pub feature_dim: usize,
    pub action_count: usize,
    pub action_names: Vec<String>,
    /// `feature_dim` rows of `action_count` weights.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub version: u32,
}

/// Gradient with the model's shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Gradient {
    pub fn zeros(feature_dim: usize, action_count: usize) -> Self {
        Gradient { weights: vec![vec![0.0; action_count]; feature_dim], bias: vec![0.0; action_count] }
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, other: &Gradient, k: f64) {
        for (row, orow) in self.weights.iter_mut().zip(&other.weights) {
            for (w, o) in row.iter_mut().zip(orow) {
                *w += k * o;
            }
        }
        for (b, o) in self.bias.iter_mut().zip(&other.bias) {
            *b += k * o;
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Zeroes illegal entries and renormalizes. Falls back to uniform over the
/// legal set when it carries no mass.
pub fn mask_normalize(probs: &[f64], legal: &[usize]) -> Result<Vec<f64>, PolicyError> {
    if legal.is_empty() {
        return Err(PolicyError::EmptyLegalSet);
    }
    let mut out = vec![0.0; probs.len()];
    let mass: f64 = legal.iter().map(|&i| probs[i]).sum();
    for &i in legal {
        out[i] = if mass > 0.0 { probs[i] / mass } else { 1.0 / legal.len() as f64 };
    }
    Ok(out)
}

impl PolicyModel {
    pub fn zeros(feature_dim: usize, action_names: Vec<String>) -> Self {
        let action_count = action_names.len();
        PolicyModel {
            feature_dim,
            action_count,
            action_names,
            weights: vec![vec![0.0; action_count]; feature_dim],
            bias: vec![0.0; action_count],
            version: 0,
        }
    }

    /// Zero model shaped for `schemas`.
    pub fn for_schemas(schemas: &Schemas) -> Self {
        let names = schemas.actions().iter().map(|&a| schemas.action_name(a)).collect();
        Self::zeros(super::feature_dim(schemas), names)
    }

    fn check(&self, features: &[f64]) -> Result<(), PolicyError> {
        if features.len() != self.feature_dim {
            return Err(PolicyError::DimensionMismatch { expected: self.feature_dim, found: features.len() });
        }
        Ok(())
    }

    pub fn logits(&self, features: &[f64]) -> Result<Vec<f64>, PolicyError> {
        self.check(features)?;
        let mut z = self.bias.clone();
        for (x, row) in features.iter().zip(&self.weights) {
            if *x == 0.0 {
                continue;
            }
            for (zj, w) in z.iter_mut().zip(row) {
                *zj += x * w;
            }
        }
        Ok(z)
    }

    pub fn predict(&self, features: &[f64]) -> Result<Vec<f64>, PolicyError> {
        Ok(softmax(&self.logits(features)?))
    }

    /// `log pi(action | features)`, restricted to `legal` when given.
    pub fn log_prob(&self, features: &[f64], action: usize, legal: Option<&[usize]>) -> Result<f64, PolicyError> {
        let z = self.logits(features)?;
        let idx: Vec<usize> = match legal {
            Some(l) => l.to_vec(),
            None => (0..self.action_count).collect(),
        };
        let max = idx.iter().map(|&i| z[i]).fold(f64::NEG_INFINITY, f64::max);
        let lse = max + idx.iter().map(|&i| (z[i] - max).exp()).sum::<f64>().ln();
        Ok(z[action] - lse)
    }

    /// Gradient of [`Self::log_prob`] with respect to weights and bias.
    pub fn log_prob_grad(&self, features: &[f64], action: usize, legal: Option<&[usize]>) -> Result<Gradient, PolicyError> {
        let probs = self.predict(features)?;
        let probs = match legal {
            Some(l) => mask_normalize(&probs, l)?,
            None => probs,
        };
        let mut dz: Vec<f64> = probs.iter().map(|p| -p).collect();
        dz[action] += 1.0;
        let mut g = Gradient::zeros(self.feature_dim, self.action_count);
        for (row, x) in g.weights.iter_mut().zip(features) {
            if *x == 0.0 {
                continue;
            }
            for (w, d) in row.iter_mut().zip(&dz) {
                *w = x * d;
            }
        }
        g.bias = dz;
        Ok(g)
    }

    /// `theta += k * g`.
    pub fn apply(&mut self, g: &Gradient, k: f64) {
        for (row, grow) in self.weights.iter_mut().zip(&g.weights) {
            for (w, d) in row.iter_mut().zip(grow) {
                *w += k * d;
            }
        }
        for (b, d) in self.bias.iter_mut().zip(&g.bias) {
            *b += k * d;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().flatten().chain(&self.bias).all(|w| w.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(dim: usize, actions: usize) -> PolicyModel {
        PolicyModel::zeros(dim, (0..actions).map(|i| format!("a{i}")).collect())
    }

    #[test]
    fn zero_weights_are_uniform() {
        let p = model(3, 8).predict(&[1.0, -2.0, 0.5]).unwrap();
        assert!(p.iter().all(|x| (x - 0.125).abs() < 1e-15));
    }

    #[test]
    fn dominant_logit() {
        let mut m = model(1, 64);
        m.bias[5] = 20.0;
        let p = m.predict(&[0.0]).unwrap();
        let direct = 1.0 / (1.0 + 63.0 * (-20.0f64).exp());
        assert!((p[5] - direct).abs() < 1e-12);
        assert!(p[5] > 0.999);
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(
            model(3, 2).predict(&[1.0]),
            Err(PolicyError::DimensionMismatch { expected: 3, found: 1 })
        );
    }

    #[test]
    fn masking() {
        let uniform = vec![0.1; 10];
        let m = mask_normalize(&uniform, &[2, 7]).unwrap();
        assert_eq!(m[2], 0.5);
        assert_eq!(m[7], 0.5);
        assert_eq!(m.iter().filter(|p| **p == 0.0).count(), 8);
        let mut point = vec![0.0; 4];
        point[1] = 1.0;
        assert_eq!(mask_normalize(&point, &[1, 3]).unwrap(), point);
        assert_eq!(mask_normalize(&point, &[]), Err(PolicyError::EmptyLegalSet));
    }

    proptest! {
        #[test]
        fn predict_is_a_distribution(ws in prop::collection::vec(-50.0f64..50.0, 12), x in prop::collection::vec(-3.0f64..3.0, 3)) {
            let mut m = model(3, 4);
            for (i, w) in ws.iter().enumerate() {
                if i < 12 { m.weights[i / 4][i % 4] = *w; }
            }
            let p = m.predict(&x).unwrap();
            prop_assert!(p.iter().all(|v| *v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn shift_invariance(z in prop::collection::vec(-30.0f64..30.0, 1..16), c in -100.0f64..100.0) {
            let a = softmax(&z);
            let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
            let b = softmax(&shifted);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
