//! JSON problem files.

use serde::{Deserialize, Serialize};

use super::fact::Fact;
use crate::lang::{parse_equation, parse_goal, Action, Condition, LangError, ProblemCdl, Schemas};
use crate::point::Point;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactJson {
    pub predicate: String,
    pub points: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConditionJson {
    Fact(FactJson),
    Equation(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepJson {
    pub theorem: String,
    pub branch: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub points: Vec<String>,
    #[serde(default)]
    pub construction: Vec<FactJson>,
    #[serde(default)]
    pub conditions: Vec<ConditionJson>,
    pub goal: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotated_sequence: Option<Vec<StepJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
}

fn point(name: &str) -> Result<Point, LangError> {
    name.parse::<Point>().map_err(|_| LangError::Syntax { line: 0, col: 0, message: format!("invalid point name `{name}`") })
}

impl FactJson {
    pub fn resolve(&self, schemas: &Schemas, declared: &[Point]) -> Result<Fact, LangError> {
        let id = schemas.predicate_id(&self.predicate).ok_or_else(|| LangError::UnknownReference {
            kind: "predicate",
            name: self.predicate.clone(),
            line: 0,
            col: 0,
        })?;
        let schema = schemas.predicate(id);
        let pts = self.points.iter().map(|p| point(p)).collect::<Result<Vec<_>, _>>()?;
        if pts.len() != schema.arity() {
            return Err(LangError::ArityMismatch {
                name: schema.name.clone(),
                expected: schema.arity(),
                found: pts.len(),
                line: 0,
                col: 0,
            });
        }
        if let Some(p) = pts.iter().find(|p| !declared.contains(p)) {
            return Err(LangError::UndeclaredPoint { point: p.to_string(), line: 0, col: 0 });
        }
        Ok(Fact::canonical(schemas, id, &pts))
    }
}

impl ProblemFile {
    pub fn to_cdl(&self, schemas: &Schemas) -> Result<ProblemCdl, LangError> {
        let points = self.points.iter().map(|p| point(p)).collect::<Result<Vec<_>, _>>()?;
        let construction =
            self.construction.iter().map(|f| f.resolve(schemas, &points)).collect::<Result<Vec<_>, _>>()?;
        let conditions = self
            .conditions
            .iter()
            .map(|c| match c {
                ConditionJson::Fact(f) => f.resolve(schemas, &points).map(Condition::Fact),
                ConditionJson::Equation(s) => parse_equation(s, schemas, &points).map(Condition::Equation),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let goal = parse_goal(&self.goal, schemas, &points)?;
        Ok(ProblemCdl { points, construction, conditions, goal })
    }

    /// Resolves the annotated sequence, if any, to actions.
    pub fn actions(&self, schemas: &Schemas) -> Result<Option<Vec<Action>>, LangError> {
        let Some(seq) = &self.annotated_sequence else { return Ok(None) };
        seq.iter()
            .map(|s| resolve_step(schemas, s))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

pub fn resolve_step(schemas: &Schemas, s: &StepJson) -> Result<Action, LangError> {
    schemas.action_by_name(&s.theorem, s.branch).ok_or_else(|| LangError::UnknownReference {
        kind: "theorem branch",
        name: format!("{}#{}", s.theorem, s.branch),
        line: 0,
        col: 0,
    })
}

pub fn step_json(schemas: &Schemas, a: Action) -> StepJson {
    StepJson { theorem: schemas.theorem(a.theorem).name.clone(), branch: a.branch }
}
