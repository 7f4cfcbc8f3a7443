use num::BigRational;

use crate::algebra::{Equation, Term};
use crate::deduction::Fact;
use crate::point::Point;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Fact(Fact),
    Equation(Equation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    /// A ground fact that must become present.
    Relation(Fact),
    /// A term whose value must become determined (and match `target` if given).
    Value { term: Term, target: Option<BigRational> },
    /// An equation that must hold after substitution.
    Equation(Equation),
}

impl Goal {
    pub fn kind_index(&self) -> usize {
        match self {
            Goal::Relation(_) => 0,
            Goal::Value { .. } => 1,
            Goal::Equation(_) => 2,
        }
    }
}

/// A validated problem statement with canonical facts and symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemCdl {
    pub points: Vec<Point>,
    pub construction: Vec<Fact>,
    pub conditions: Vec<Condition>,
    pub goal: Goal,
}
