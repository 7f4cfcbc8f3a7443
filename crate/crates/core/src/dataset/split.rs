use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Category, DatasetError, DifficultyLevel, ProblemRecord};

#[derive(Debug, Clone, Default)]
pub struct Split {
    pub train: Vec<ProblemRecord>,
    pub test: Vec<ProblemRecord>,
    pub validation: Vec<ProblemRecord>,
}

/// Largest-remainder apportionment of `n` items by `ratios`; remainders
/// tie toward the earlier part.
pub fn apportion(n: usize, ratios: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let short = n.saturating_sub(sizes.iter().sum());
    for &i in order.iter().take(short) {
        sizes[i] += 1;
    }
    sizes
}

/// Train/test/validation partition stratified by (category, level). Each
/// stratum is shuffled with one seeded generator, visited in key order.
pub fn split(corpus: &[ProblemRecord], ratios: [f64; 3], seed: u64) -> Result<Split, DatasetError> {
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || ratios.iter().any(|r| *r < 0.0) {
        return Err(DatasetError::BadRatios(ratios));
    }
    let mut strata: BTreeMap<(Category, Option<DifficultyLevel>), Vec<&ProblemRecord>> = BTreeMap::new();
    for r in corpus {
        strata.entry((r.category, r.level)).or_default().push(r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Split::default();
    for members in strata.values_mut() {
        members.sort_by(|a, b| a.id.cmp(&b.id));
        members.shuffle(&mut rng);
        let sizes = apportion(members.len(), &ratios);
        let mut it = members.iter();
        for (part, n) in [&mut out.train, &mut out.test, &mut out.validation].into_iter().zip(sizes) {
            part.extend(it.by_ref().take(n).map(|r| (*r).clone()));
        }
    }
    for part in [&mut out.train, &mut out.test, &mut out.validation] {
        part.sort_by(|a, b| a.id.cmp(&b.id));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn twenty_at_seventy_fifteen_fifteen() {
        assert_eq!(apportion(20, &[0.7, 0.15, 0.15]), vec![14, 3, 3]);
        assert_eq!(apportion(7, &[1.0, 0.0, 0.0]), vec![7, 0, 0]);
        assert_eq!(apportion(0, &[0.7, 0.15, 0.15]), vec![0, 0, 0]);
    }

    proptest! {
        #[test]
        fn apportion_covers(n in 0usize..500, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (a, b) = if a + b > 1.0 { (a / 2.0, b / 2.0) } else { (a, b) };
            let sizes = apportion(n, &[a, b, 1.0 - a - b]);
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            for (s, r) in sizes.iter().zip([a, b, 1.0 - a - b]) {
                prop_assert!((*s as f64 - r * n as f64).abs() < 1.0 + 1e-9);
            }
        }
    }
}
