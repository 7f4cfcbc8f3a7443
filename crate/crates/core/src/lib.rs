//! Formal plane-geometry reasoning as a Markov decision process.
//!
//! Problems are stated in a small declaration language over a schema library
//! of predicates, attributes and theorems. The deduction environment applies
//! theorem branches as actions; searchers (breadth/depth-first, random, beam,
//! backward regression and policy-guided tree search) look for an action
//! sequence that reaches the goal, and every reported sequence is replayed
//! through the verifier.

pub mod algebra;
pub mod dataset;
pub mod deduction;
pub mod lang;
pub mod mcts;
pub mod point;
pub mod policy;
pub mod search;
pub mod solver;

pub use point::{Point, Points};

/// The bundled schema library.
pub const GEOMETRY_GDL: &str = include_str!("../data/geometry.gdl");
