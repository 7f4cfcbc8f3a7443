//! Backtracking join of theorem premises against the fact base.

use smallvec::SmallVec;

use super::fact::{Fact, FactBase};
use crate::algebra::{equation_key, AttrSymbol, EqKey, Equation, EquationStore, Term};
use crate::lang::{AttrTemplate, EquationTemplate, FactTemplate, Pattern, Schemas, TermTemplate, TheoremBranch, VarIdx};
use crate::point::{Point, Points};

/// Assignment of theorem variables to points, indexed by variable position.
/// Variables the branch never mentions stay `None`.
pub type Binding = Vec<Option<Point>>;

/// The ground premises and conclusions of one binding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    pub premise_facts: Vec<Fact>,
    pub premise_equations: Vec<Equation>,
    pub conclusion_facts: Vec<Fact>,
    pub conclusion_equations: Vec<Equation>,
}

pub fn instantiate_fact(schemas: &Schemas, t: &FactTemplate, binding: &Binding) -> Fact {
    let pts: Points = t.args.iter().map(|&v| bound(binding, v)).collect();
    Fact::canonical(schemas, t.predicate, &pts)
}

pub fn instantiate_term(schemas: &Schemas, t: &TermTemplate, binding: &Binding) -> Term {
    t.map(&mut |leaf: &AttrTemplate| -> AttrSymbol {
        let pts: Points = leaf.args.iter().map(|&v| bound(binding, v)).collect();
        schemas.canonical_symbol(leaf.attr, &pts)
    })
}

pub fn instantiate_equation(schemas: &Schemas, t: &EquationTemplate, binding: &Binding) -> Equation {
    Equation::new(instantiate_term(schemas, &t.lhs, binding), instantiate_term(schemas, &t.rhs, binding))
}

fn bound(binding: &Binding, v: VarIdx) -> Point {
    binding[v as usize].expect("template variable bound by premise")
}

pub fn instantiate(schemas: &Schemas, branch: &TheoremBranch, binding: &Binding) -> Instance {
    let mut inst = Instance::default();
    for p in &branch.premise {
        match p {
            Pattern::Fact(t) => inst.premise_facts.push(instantiate_fact(schemas, t, binding)),
            Pattern::Equation(t) => inst.premise_equations.push(instantiate_equation(schemas, t, binding)),
        }
    }
    for p in &branch.conclusions {
        match p {
            Pattern::Fact(t) => inst.conclusion_facts.push(instantiate_fact(schemas, t, binding)),
            Pattern::Equation(t) => inst.conclusion_equations.push(instantiate_equation(schemas, t, binding)),
        }
    }
    inst
}

/// An equation premise holds when it is stored verbatim (up to its key) or
/// reduces to an identity under the determined values.
pub fn equation_holds(store: &EquationStore, eq: &Equation) -> bool {
    store.satisfies(eq)
}

struct Join<'a> {
    schemas: &'a Schemas,
    facts: &'a FactBase,
    store: &'a EquationStore,
    points: &'a [Point],
    fact_pats: Vec<&'a FactTemplate>,
    eq_pats: Vec<&'a EquationTemplate>,
    free: Vec<VarIdx>,
    binding: Binding,
    out: Vec<Binding>,
}

impl<'a> Join<'a> {
    fn used(&self, p: Point) -> bool {
        self.binding.contains(&Some(p))
    }

    fn facts_from(&mut self, i: usize) {
        if i == self.fact_pats.len() {
            self.free_from(0);
            return;
        }
        let pat = self.fact_pats[i];
        let perms = self.schemas.predicate(pat.predicate).representations.perms();
        for stored in self.facts.with_predicate(pat.predicate) {
            for perm in perms {
                let mut assigned: SmallVec<[VarIdx; 6]> = SmallVec::new();
                let mut ok = true;
                for (j, &v) in pat.args.iter().enumerate() {
                    let p = stored[perm[j] as usize];
                    match self.binding[v as usize] {
                        Some(q) if q == p => {}
                        Some(_) => ok = false,
                        None if self.used(p) => ok = false,
                        None => {
                            self.binding[v as usize] = Some(p);
                            assigned.push(v);
                        }
                    }
                    if !ok {
                        break;
                    }
                }
                if ok {
                    self.facts_from(i + 1);
                }
                for v in assigned {
                    self.binding[v as usize] = None;
                }
            }
        }
    }

    fn free_from(&mut self, i: usize) {
        if i == self.free.len() {
            if self.eq_pats.iter().all(|t| equation_holds(self.store, &instantiate_equation(self.schemas, t, &self.binding))) {
                self.out.push(self.binding.clone());
            }
            return;
        }
        let v = self.free[i] as usize;
        if self.binding[v].is_some() {
            self.free_from(i + 1);
            return;
        }
        for &p in self.points {
            if self.used(p) {
                continue;
            }
            self.binding[v] = Some(p);
            self.free_from(i + 1);
            self.binding[v] = None;
        }
    }
}

/// Every injective binding satisfying the premise, sorted, including
/// bindings that differ only by a theorem symmetry.
pub fn match_all(
    schemas: &Schemas,
    facts: &FactBase,
    store: &EquationStore,
    points: &[Point],
    var_count: usize,
    branch: &TheoremBranch,
) -> Vec<Binding> {
    let mut join = Join {
        schemas,
        facts,
        store,
        points,
        fact_pats: branch.premise_facts().collect(),
        eq_pats: branch.premise_equations().collect(),
        free: branch.variables(),
        binding: vec![None; var_count],
        out: Vec::new(),
    };
    join.facts_from(0);
    let mut out = join.out;
    out.sort();
    out.dedup();
    out
}

/// Extends a partial binding so that every pattern in `facts_needed` is
/// present in `facts`; variables in `vars` left unbound afterwards range over
/// `points`. Equation premises are not checked.
pub(crate) fn complete_binding(
    schemas: &Schemas,
    facts: &FactBase,
    points: &[Point],
    vars: Vec<VarIdx>,
    facts_needed: Vec<&FactTemplate>,
    seed: Binding,
) -> Vec<Binding> {
    let empty = EquationStore::new();
    let mut join = Join {
        schemas,
        facts,
        store: &empty,
        points,
        fact_pats: facts_needed,
        eq_pats: Vec::new(),
        free: vars,
        binding: seed,
        out: Vec::new(),
    };
    join.facts_from(0);
    let mut out = join.out;
    out.sort();
    out.dedup();
    out
}

/// Identity of an application: the canonical premises and conclusions it
/// produces. Bindings sharing a signature are the same application.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    premise_facts: Vec<Fact>,
    premise_equations: Vec<Option<EqKey>>,
    conclusion_facts: Vec<Fact>,
    conclusion_equations: Vec<Option<EqKey>>,
}

pub fn signature(schemas: &Schemas, branch: &TheoremBranch, binding: &Binding) -> Signature {
    let inst = instantiate(schemas, branch, binding);
    let keys = |eqs: &[Equation]| {
        let mut k: Vec<Option<EqKey>> = eqs.iter().map(equation_key).collect();
        k.sort();
        k.dedup();
        k
    };
    let facts = |mut fs: Vec<Fact>| {
        fs.sort();
        fs.dedup();
        fs
    };
    Signature {
        premise_equations: keys(&inst.premise_equations),
        conclusion_equations: keys(&inst.conclusion_equations),
        premise_facts: facts(inst.premise_facts),
        conclusion_facts: facts(inst.conclusion_facts),
    }
}

/// Removes bindings that repeat an earlier application, keeping the
/// lexicographically smallest of each group. Input must be sorted.
pub fn dedup_symmetric(schemas: &Schemas, branch: &TheoremBranch, bindings: Vec<Binding>) -> Vec<Binding> {
    if bindings.len() < 2 {
        return bindings;
    }
    let mut seen = std::collections::HashSet::new();
    bindings
        .into_iter()
        .filter(|b| {
            let s = signature(schemas, branch, b);
            let fresh = !seen.contains(&s);
            if fresh {
                seen.insert(s);
            }
            fresh
        })
        .collect()
}
