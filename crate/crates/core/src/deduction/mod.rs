//! The deduction environment: fact storage, premise matching, theorem
//! application with proof tracing, and the step/reward interface.

mod fact;
mod hypertree;
mod matcher;
mod problem_file;
mod state;

pub use fact::{Fact, FactBase};
pub use hypertree::{HyperEdge, HyperTree, Node, NodeContent};
pub use matcher::{
    dedup_symmetric, equation_holds, instantiate, instantiate_equation, instantiate_fact, match_all, signature, Binding,
    Instance, Signature,
};
pub(crate) use matcher::complete_binding;
pub use problem_file::{resolve_step, step_json, ConditionJson, FactJson, ProblemFile, StepJson};
pub use state::{Environment, State, StepOutcome, Verification, DEFAULT_MAX_STEPS};

use crate::algebra::AlgebraError;
use crate::lang::{Action, LangError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeductionError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("no such theorem branch: {0:?}")]
    UnknownAction(Action),
}
