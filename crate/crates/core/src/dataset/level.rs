use std::fmt;

use serde::{Deserialize, Serialize};

/// Difficulty bucket by annotated sequence length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DifficultyLevel {
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
}

impl DifficultyLevel {
    pub const ALL: [DifficultyLevel; 6] = [Self::L1, Self::L2, Self::L3, Self::L4, Self::L5, Self::L6];

    pub fn label(self) -> &'static str {
        match self {
            Self::L1 => "L1",
            Self::L2 => "L2",
            Self::L3 => "L3",
            Self::L4 => "L4",
            Self::L5 => "L5",
            Self::L6 => "L6",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DifficultyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn difficulty_of(length: usize) -> DifficultyLevel {
    match length {
        0..=2 => DifficultyLevel::L1,
        3..=4 => DifficultyLevel::L2,
        5..=6 => DifficultyLevel::L3,
        7..=8 => DifficultyLevel::L4,
        9..=10 => DifficultyLevel::L5,
        _ => DifficultyLevel::L6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_boundaries() {
        use DifficultyLevel::*;
        let expected = [(2, L1), (3, L2), (4, L2), (5, L3), (6, L3), (7, L4), (8, L4), (9, L5), (10, L5), (11, L6)];
        for (len, level) in expected {
            assert_eq!(difficulty_of(len), level, "length {len}");
        }
    }

    proptest! {
        #[test]
        fn monotone(a in 0usize..100, b in 0usize..100) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(difficulty_of(lo) <= difficulty_of(hi));
        }
    }
}
