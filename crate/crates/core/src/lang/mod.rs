//! The geometry formal language: schema definitions (predicates, attributes,
//! theorems) and problem declarations.
//!
//! Schema files are line-oriented, `;`-terminated statements:
//!
//! ```text
//! Predicate Polygon(A,B,C) reps (B,C,A),(C,A,B) extend Angle(A,B,C),Angle(B,C,A),Angle(C,A,B);
//! Attribute LengthOfLine(A,B) reps (B,A) unit length;
//! Theorem triangle_property_angle_sum(A,B,C) {
//!   branch 1: premise Polygon(A,B,C);
//!             conclude Equal(Add(MeasureOfAngle(A,B,C),MeasureOfAngle(B,C,A),MeasureOfAngle(C,A,B)),180);
//! }
//! ```
//!
//! A `reps`, `extend` or `unit` clause may also stand as its own statement, in
//! which case it continues the preceding `Predicate` or `Attribute`.
//!
//! Problem declarations list points, facts, equations and a goal:
//!
//! ```text
//! Points A,B,C; Polygon(A,B,C); Equal(MeasureOfAngle(A,B,C),60); Goal Value(MeasureOfAngle(B,C,A))
//! ```

mod lexer;
mod parser;
mod print;
mod problem;
mod schema;

pub use parser::{parse_cdl, parse_equation, parse_fact, parse_gdl, parse_goal, parse_term};
pub use print::{print_cdl, print_gdl, render_equation, render_fact, render_goal, render_term};
pub use problem::{Condition, Goal, ProblemCdl};
pub use schema::{
    Action, AttrTemplate, AttributeId, AttributeSchema, EquationTemplate, FactTemplate, Pattern,
    Permutation, PredicateId, PredicateSchema, Representations, Schemas, TermTemplate, TheoremBranch,
    TheoremSchema, Unit, VarIdx, VarList,
};


#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown {kind} `{name}` at {line}:{col}")]
    UnknownReference { kind: &'static str, name: String, line: usize, col: usize },
    #[error("duplicate {kind} name `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("`{name}` expects {expected} points, found {found} at {line}:{col}")]
    ArityMismatch { name: String, expected: usize, found: usize, line: usize, col: usize },
    #[error("point `{point}` is not declared (at {line}:{col})")]
    UndeclaredPoint { point: String, line: usize, col: usize },
    #[error("variable `{var}` is not a parameter of `{owner}`")]
    UnknownVariable { owner: String, var: String },
    #[error("representations of `{0}` do not form a permutation group")]
    NotAGroup(String),
    #[error("invalid permutation {perm} for `{owner}`")]
    BadPermutation { owner: String, perm: String },
    #[error("theorem `{theorem}` branch {branch}: conclusion variable `{var}` is not bound by the premise")]
    FreeConclusionVariable { theorem: String, branch: usize, var: String },
    #[error("theorem `{theorem}`: branch indices must be dense from 1 (found {found}, expected {expected})")]
    BranchIndex { theorem: String, found: usize, expected: usize },
    #[error("theorem `{theorem}` branch {branch}: premise is empty")]
    EmptyPremise { theorem: String, branch: usize },
    #[error("theorem `{0}` has no branches")]
    NoBranches(String),
    #[error("division by the literal constant zero")]
    LiteralZeroDivision,
    #[error("goal target must be a finite rational constant")]
    BadTarget,
    #[error("problem declares no goal")]
    MissingGoal,
    #[error("problem declares more than one goal")]
    DuplicateGoal,
}
