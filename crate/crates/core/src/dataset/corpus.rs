use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{difficulty_of, DifficultyLevel};
use crate::deduction::{Environment, ProblemFile};
use crate::lang::{Action, ProblemCdl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Angle,
    Length,
    Area,
    Perimeter,
    Other,
}

impl Category {
    pub const ALL: [Category; 5] = [Self::Angle, Self::Length, Self::Area, Self::Perimeter, Self::Other];

    pub fn parse(s: &str) -> Self {
        match s.to_ascii_lowercase().as_str() {
            "angle" => Self::Angle,
            "length" => Self::Length,
            "area" => Self::Area,
            "perimeter" => Self::Perimeter,
            _ => Self::Other,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone)]
pub struct ProblemRecord {
    pub id: String,
    pub problem: ProblemCdl,
    pub annotated_sequence: Option<Vec<Action>>,
    pub category: Category,
    /// From the annotated sequence length, else the file's declared level.
    pub level: Option<DifficultyLevel>,
    pub file: ProblemFile,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadFailure {
    pub path: PathBuf,
    pub message: String,
}

/// Every file that failed to load, not just the first.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct CorpusError {
    pub failures: Vec<LoadFailure>,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} problem file(s) rejected", self.failures.len())?;
        for x in &self.failures {
            write!(f, "\n  {}: {}", x.path.display(), x.message)?;
        }
        Ok(())
    }
}

fn parse_level(s: &str) -> Option<DifficultyLevel> {
    DifficultyLevel::ALL.into_iter().find(|l| l.label().eq_ignore_ascii_case(s))
}

/// Parses and validates one problem file; annotated sequences must replay to
/// a solve with every step productive.
pub fn load_problem(env: &Environment, path: &Path) -> Result<ProblemRecord, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let file: ProblemFile = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    record_from_file(env, file)
}

pub fn record_from_file(env: &Environment, file: ProblemFile) -> Result<ProblemRecord, String> {
    let schemas = env.schemas();
    let problem = file.to_cdl(schemas).map_err(|e| e.to_string())?;
    let actions = file.actions(schemas).map_err(|e| e.to_string())?;
    if let Some(seq) = &actions {
        let v = env.verify_sequence(&problem, seq).map_err(|e| e.to_string())?;
        if let Some(i) = v.first_failure {
            return Err(format!("annotated sequence fails at step {i}"));
        }
        if !v.solved {
            return Err("annotated sequence does not reach the goal".into());
        }
    }
    let level = match &actions {
        Some(seq) => Some(difficulty_of(seq.len())),
        None => file.level.as_deref().and_then(parse_level),
    };
    Ok(ProblemRecord {
        id: file.id.clone(),
        problem,
        annotated_sequence: actions,
        category: file.category.as_deref().map_or(Category::Other, Category::parse),
        level,
        file,
    })
}

/// Loads every `*.json` file under `dir`, sorted by id.
pub fn load_corpus(env: &Environment, dir: &Path) -> Result<Vec<ProblemRecord>, CorpusError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CorpusError {
        failures: vec![LoadFailure { path: dir.to_path_buf(), message: e.to_string() }],
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let results: Vec<_> = paths.par_iter().map(|p| (p, load_problem(env, p))).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (path, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(message) => failures.push(LoadFailure { path: path.clone(), message }),
        }
    }
    if !failures.is_empty() {
        return Err(CorpusError { failures });
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(records)
}
