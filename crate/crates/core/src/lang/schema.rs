use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algebra::{AttrSymbol, Expr};
use crate::point::{Point, Points};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateId(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeId(pub u16);

/// Index of a variable in the owning schema's parameter list.
pub type VarIdx = u8;

pub type VarList = SmallVec<[VarIdx; 6]>;

/// A parameter permutation: position `i` of the equivalent tuple takes the
/// point at position `perm[i]` of the original.
pub type Permutation = SmallVec<[u8; 6]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Degrees,
    Length,
    Area,
    Scalar,
}

impl Unit {
    pub fn keyword(self) -> &'static str {
        match self {
            Unit::Degrees => "degrees",
            Unit::Length => "length",
            Unit::Area => "area",
            Unit::Scalar => "scalar",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "degrees" => Unit::Degrees,
            "length" => Unit::Length,
            "area" => Unit::Area,
            "scalar" => Unit::Scalar,
            _ => return None,
        })
    }
}

/// Fact template over the variables of an enclosing schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactTemplate {
    pub predicate: PredicateId,
    pub args: VarList,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrTemplate {
    pub attr: AttributeId,
    pub args: VarList,
}

pub type TermTemplate = Expr<AttrTemplate>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EquationTemplate {
    pub lhs: TermTemplate,
    pub rhs: TermTemplate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Fact(FactTemplate),
    Equation(EquationTemplate),
}

/// Shared representation machinery of predicates and attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representations {
    /// Always starts with the identity.
    perms: Vec<Permutation>,
}

impl Representations {
    pub fn identity(arity: usize) -> Self {
        Representations { perms: vec![(0..arity as u8).collect()] }
    }

    /// Builds the set from explicitly listed permutations plus the identity.
    /// Returns `None` if the result is not closed under composition.
    pub fn from_listed(arity: usize, listed: &[Permutation]) -> Option<Self> {
        let mut perms: Vec<Permutation> = vec![(0..arity as u8).collect()];
        for p in listed {
            if !perms.contains(p) {
                perms.push(p.clone());
            }
        }
        for a in &perms {
            for b in &perms {
                let composed: Permutation = b.iter().map(|&i| a[i as usize]).collect();
                if !perms.contains(&composed) {
                    return None;
                }
            }
        }
        Some(Representations { perms })
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    /// Listed (non-identity) permutations, as declared.
    pub fn listed(&self) -> &[Permutation] {
        &self.perms[1..]
    }

    pub fn apply(perm: &[u8], points: &[Point]) -> Points {
        perm.iter().map(|&i| points[i as usize]).collect()
    }

    /// The lexicographically minimal equivalent tuple.
    pub fn canonical(&self, points: &[Point]) -> Points {
        let mut best: Points = points.iter().copied().collect();
        for perm in &self.perms[1..] {
            let cand = Self::apply(perm, points);
            if cand < best {
                best = cand;
            }
        }
        best
    }

    /// Every tuple equivalent to `points` (including itself), deduplicated.
    pub fn orbit(&self, points: &[Point]) -> Vec<Points> {
        let mut out: Vec<Points> = Vec::with_capacity(self.perms.len());
        for perm in &self.perms {
            let cand = Self::apply(perm, points);
            if !out.contains(&cand) {
                out.push(cand);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    pub params: Vec<Point>,
    pub representations: Representations,
    pub extensions: Vec<FactTemplate>,
}

impl PredicateSchema {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    pub name: String,
    pub params: Vec<Point>,
    pub representations: Representations,
    pub unit: Unit,
}

impl AttributeSchema {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremBranch {
    /// 1-based, dense within the theorem.
    pub index: usize,
    pub premise: Vec<Pattern>,
    pub conclusions: Vec<Pattern>,
}

impl TheoremBranch {
    pub fn premise_facts(&self) -> impl Iterator<Item = &FactTemplate> {
        self.premise.iter().filter_map(|p| match p {
            Pattern::Fact(f) => Some(f),
            Pattern::Equation(_) => None,
        })
    }

    pub fn premise_equations(&self) -> impl Iterator<Item = &EquationTemplate> {
        self.premise.iter().filter_map(|p| match p {
            Pattern::Equation(e) => Some(e),
            Pattern::Fact(_) => None,
        })
    }

    /// Variables mentioned anywhere in the branch, sorted and deduplicated.
    pub fn variables(&self) -> Vec<VarIdx> {
        let mut vars: Vec<VarIdx> = Vec::new();
        for p in self.premise.iter().chain(&self.conclusions) {
            pattern_vars(p, &mut vars);
        }
        vars.sort_unstable();
        vars.dedup();
        vars
    }
}

pub(crate) fn pattern_vars(p: &Pattern, out: &mut Vec<VarIdx>) {
    match p {
        Pattern::Fact(f) => out.extend(f.args.iter().copied()),
        Pattern::Equation(e) => {
            for side in [&e.lhs, &e.rhs] {
                side.visit_leaves(&mut |leaf: &AttrTemplate| out.extend(leaf.args.iter().copied()));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremSchema {
    pub name: String,
    pub vars: Vec<Point>,
    pub branches: Vec<TheoremBranch>,
}

/// A (theorem, branch) pair: one unit of the action space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Action {
    pub theorem: usize,
    /// 1-based branch index.
    pub branch: usize,
}

/// A parsed, cross-validated schema library.
#[derive(Debug, Clone, Default)]
pub struct Schemas {
    pub predicates: Vec<PredicateSchema>,
    pub attributes: Vec<AttributeSchema>,
    pub theorems: Vec<TheoremSchema>,
    predicate_index: HashMap<String, PredicateId>,
    attribute_index: HashMap<String, AttributeId>,
    theorem_index: HashMap<String, usize>,
    actions: Vec<Action>,
}

impl PartialEq for Schemas {
    fn eq(&self, other: &Self) -> bool {
        self.predicates == other.predicates
            && self.attributes == other.attributes
            && self.theorems == other.theorems
    }
}

impl Schemas {
    pub(crate) fn assemble(
        predicates: Vec<PredicateSchema>,
        attributes: Vec<AttributeSchema>,
        theorems: Vec<TheoremSchema>,
    ) -> Self {
        let predicate_index = predicates
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.clone(), PredicateId(i as u16)))
            .collect();
        let attribute_index = attributes
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.clone(), AttributeId(i as u16)))
            .collect();
        let theorem_index = theorems.iter().enumerate().map(|(i, t)| (t.name.clone(), i)).collect();
        let actions = theorems
            .iter()
            .enumerate()
            .flat_map(|(t, th)| th.branches.iter().map(move |b| Action { theorem: t, branch: b.index }))
            .collect();
        Schemas {
            predicates,
            attributes,
            theorems,
            predicate_index,
            attribute_index,
            theorem_index,
            actions,
        }
    }

    pub fn predicate_id(&self, name: &str) -> Option<PredicateId> {
        self.predicate_index.get(name).copied()
    }

    pub fn attribute_id(&self, name: &str) -> Option<AttributeId> {
        self.attribute_index.get(name).copied()
    }

    pub fn theorem_id(&self, name: &str) -> Option<usize> {
        self.theorem_index.get(name).copied()
    }

    pub fn predicate(&self, id: PredicateId) -> &PredicateSchema {
        &self.predicates[id.0 as usize]
    }

    pub fn attribute(&self, id: AttributeId) -> &AttributeSchema {
        &self.attributes[id.0 as usize]
    }

    pub fn theorem(&self, idx: usize) -> &TheoremSchema {
        &self.theorems[idx]
    }

    pub fn branch(&self, action: Action) -> Option<&TheoremBranch> {
        self.theorems.get(action.theorem)?.branches.get(action.branch.checked_sub(1)?)
    }

    /// All branch-actions in declaration order; the index into this slice is
    /// the action index used by policies.
    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action_index(&self, action: Action) -> Option<usize> {
        self.actions.iter().position(|a| *a == action)
    }

    pub fn action_by_name(&self, theorem: &str, branch: usize) -> Option<Action> {
        let t = self.theorem_id(theorem)?;
        let action = Action { theorem: t, branch };
        self.branch(action).map(|_| action)
    }

    pub fn action_name(&self, action: Action) -> String {
        format!("{}#{}", self.theorems[action.theorem].name, action.branch)
    }

    pub fn canonical_symbol(&self, attr: AttributeId, points: &[Point]) -> AttrSymbol {
        AttrSymbol { attr, points: self.attribute(attr).representations.canonical(points) }
    }

    pub fn render_symbol(&self, sym: &AttrSymbol) -> String {
        format!("{}({})", self.attribute(sym.attr).name, crate::point::join_points(&sym.points))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}#{}", self.theorem, self.branch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use smallvec::smallvec;

    fn pts(s: &str) -> Vec<Point> {
        s.chars().map(|c| Point::new(c, None).unwrap()).collect()
    }

    #[test]
    fn cyclic_group_closes() {
        let reps = Representations::from_listed(3, &[smallvec![1, 2, 0], smallvec![2, 0, 1]]).unwrap();
        assert_eq!(reps.perms().len(), 3);
        assert_eq!(reps.canonical(&pts("CAB")).as_slice(), pts("ABC").as_slice());
        assert_eq!(reps.orbit(&pts("ABC")).len(), 3);
    }

    #[test]
    fn non_group_rejected() {
        assert!(Representations::from_listed(3, &[smallvec![1, 2, 0]]).is_none());
    }
}
