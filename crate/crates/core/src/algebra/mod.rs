//! Exact-rational condition store: canonical attribute symbols, equations,
//! and a substitute-then-eliminate solver.

mod expr;
mod linear;
mod poly;
mod store;

pub use expr::{render_rational, AttrSymbol, Expr, Term};
pub use linear::{solve_linear, Contradiction};
pub use poly::{equation_numerator, normalize, rational_root, Monomial, NormError, Poly, RatFn};
pub use store::{equation_key, EqKey, Equation, EquationStore, StoredEquation};

use crate::lang::{AttributeId, LangError, Schemas};
use crate::point::Point;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("inconsistent equation system")]
    Inconsistent { equation: usize },
    #[error("division by zero while evaluating a term")]
    Evaluation,
}

/// The representation-minimal symbol for an attribute application.
pub fn canonical_symbol(schemas: &Schemas, attr: AttributeId, points: &[Point]) -> Result<AttrSymbol, LangError> {
    let schema = schemas.attribute(attr);
    if schema.arity() != points.len() {
        return Err(LangError::ArityMismatch {
            name: schema.name.clone(),
            expected: schema.arity(),
            found: points.len(),
            line: 0,
            col: 0,
        });
    }
    Ok(schemas.canonical_symbol(attr, points))
}
