use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Category, DifficultyLevel, ProblemRecord};

/// Problem counts by category and level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub categories: Vec<String>,
    pub levels: Vec<String>,
    /// `counts[category][level]`.
    pub counts: Vec<Vec<usize>>,
    pub row_totals: Vec<usize>,
    pub column_totals: Vec<usize>,
    pub total: usize,
    /// Records with no level (no annotation and none declared).
    pub unleveled: usize,
}

pub fn corpus_stats(corpus: &[ProblemRecord]) -> CorpusStats {
    let mut counts = vec![vec![0; DifficultyLevel::ALL.len()]; Category::ALL.len()];
    let mut unleveled = 0;
    for r in corpus {
        let row = Category::ALL.iter().position(|c| *c == r.category).expect("every category listed");
        match r.level {
            Some(l) => counts[row][l.index()] += 1,
            None => unleveled += 1,
        }
    }
    let row_totals: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    let column_totals: Vec<usize> =
        (0..DifficultyLevel::ALL.len()).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
    CorpusStats {
        categories: Category::ALL.iter().map(|c| c.to_string()).collect(),
        levels: DifficultyLevel::ALL.iter().map(|l| l.label().to_string()).collect(),
        total: row_totals.iter().sum(),
        counts,
        row_totals,
        column_totals,
        unleveled,
    }
}

impl CorpusStats {
    pub fn render(&self) -> String {
        let mut out = format!("{:<10}", "Category");
        for l in &self.levels {
            let _ = write!(out, " {l:>5}");
        }
        out.push_str(" Total\n");
        for ((name, row), total) in self.categories.iter().zip(&self.counts).zip(&self.row_totals) {
            let _ = write!(out, "{name:<10}");
            for c in row {
                let _ = write!(out, " {c:>5}");
            }
            let _ = writeln!(out, " {total:>5}");
        }
        let _ = write!(out, "{:<10}", "Total");
        for c in &self.column_totals {
            let _ = write!(out, " {c:>5}");
        }
        let _ = writeln!(out, " {:>5}", self.total);
        out
    }
}
