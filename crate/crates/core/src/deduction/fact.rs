use std::collections::BTreeSet;

use crate::lang::{FactTemplate, PredicateId, Schemas};
use crate::point::{Point, Points};

/// A ground relational fact in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub predicate: PredicateId,
    pub points: Points,
}

impl Fact {
    pub fn canonical(schemas: &Schemas, predicate: PredicateId, points: &[Point]) -> Self {
        Fact { predicate, points: schemas.predicate(predicate).representations.canonical(points) }
    }

    /// Instantiates a template whose variables index into `args`.
    pub fn from_template(schemas: &Schemas, template: &FactTemplate, args: &[Point]) -> Self {
        let pts: Points = template.args.iter().map(|&v| args[v as usize]).collect();
        Fact::canonical(schemas, template.predicate, &pts)
    }
}

/// Set of facts closed under predicate extensions.
#[derive(Debug, Clone, Default)]
pub struct FactBase {
    facts: BTreeSet<Fact>,
    by_predicate: Vec<Vec<Points>>,
    log: Vec<Fact>,
}

impl FactBase {
    pub fn new(schemas: &Schemas) -> Self {
        FactBase { facts: BTreeSet::new(), by_predicate: vec![Vec::new(); schemas.predicates.len()], log: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    /// Sorted iteration.
    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    /// Facts in insertion order.
    pub fn log(&self) -> &[Fact] {
        &self.log
    }

    pub fn with_predicate(&self, predicate: PredicateId) -> &[Points] {
        self.by_predicate.get(predicate.0 as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn count(&self, predicate: PredicateId) -> usize {
        self.with_predicate(predicate).len()
    }

    /// Asserts a canonical fact and its extension closure. Returns the facts
    /// that were actually new, the asserted one first.
    pub fn insert_closed(&mut self, schemas: &Schemas, fact: Fact) -> Vec<Fact> {
        let mut added = Vec::new();
        let mut work = vec![fact];
        while let Some(f) = work.pop() {
            if self.facts.contains(&f) {
                continue;
            }
            let schema = schemas.predicate(f.predicate);
            for ext in schema.extensions.iter().rev() {
                work.push(Fact::from_template(schemas, ext, &f.points));
            }
            self.facts.insert(f.clone());
            self.by_predicate[f.predicate.0 as usize].push(f.points.clone());
            self.log.push(f.clone());
            added.push(f);
        }
        added
    }
}
