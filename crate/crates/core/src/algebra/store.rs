use std::collections::{BTreeMap, HashSet};

use num::BigRational;

use super::expr::{AttrSymbol, Term};
use super::linear::solve_linear;
use super::poly::{equation_numerator, normalize, NormError, Poly};
use super::AlgebraError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Equation { lhs, rhs }
    }

    pub fn symbols(&self) -> Vec<AttrSymbol> {
        let mut out: Vec<AttrSymbol> = self.lhs.leaves().into_iter().chain(self.rhs.leaves()).cloned().collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Identity of an equation up to scaling and rearrangement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EqKey {
    /// Monic numerator of `lhs - rhs`.
    Poly(Poly),
    /// Equations that do not reduce to a polynomial compare syntactically.
    Opaque(Equation),
}

/// Normal form used for duplicate detection. `None` means the equation is a
/// tautology (`lhs - rhs` is identically zero).
pub fn equation_key(eq: &Equation) -> Option<EqKey> {
    match equation_numerator(&eq.lhs, &eq.rhs, &|_| None) {
        Ok(p) if p.is_zero() => None,
        Ok(p) => Some(EqKey::Poly(p.monic())),
        Err(_) => Some(EqKey::Opaque(eq.clone())),
    }
}

#[derive(Debug, Clone)]
pub struct StoredEquation {
    pub equation: Equation,
    pub key: EqKey,
    /// Hyper-tree node that introduced the equation.
    pub provenance: usize,
    /// Cached numerator when the equation is polynomial without substitution.
    numerator: Option<Poly>,
}

#[derive(Debug, Clone, Default)]
pub struct EquationStore {
    equations: Vec<StoredEquation>,
    keys: HashSet<EqKey>,
    /// Equations already reduced to `0 = 0`; they stay satisfied forever.
    satisfied: Vec<bool>,
    determined: BTreeMap<AttrSymbol, BigRational>,
    generation: u64,
}

impl EquationStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn equations(&self) -> &[StoredEquation] {
        &self.equations
    }

    pub fn determined(&self) -> &BTreeMap<AttrSymbol, BigRational> {
        &self.determined
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn value(&self, s: &AttrSymbol) -> Option<&BigRational> {
        self.determined.get(s)
    }

    pub fn contains_key(&self, key: &EqKey) -> bool {
        self.keys.contains(key)
    }

    /// True if adding `eq` would change the store.
    pub fn is_new(&self, eq: &Equation) -> bool {
        equation_key(eq).is_some_and(|k| !self.keys.contains(&k))
    }

    /// Symbols mentioned by stored equations that have no value yet.
    pub fn pending_symbols(&self) -> Vec<AttrSymbol> {
        let mut out: Vec<AttrSymbol> = self
            .equations
            .iter()
            .flat_map(|e| e.equation.symbols())
            .filter(|s| !self.determined.contains_key(s))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Keys of equations not yet reduced to an identity, sorted.
    pub fn pending_keys(&self) -> Vec<&EqKey> {
        let mut out: Vec<&EqKey> = self
            .equations
            .iter()
            .zip(&self.satisfied)
            .filter(|(_, s)| !**s)
            .map(|(e, _)| &e.key)
            .collect();
        out.sort();
        out
    }

    /// Adds an equation unless it is a tautology or a duplicate.
    pub fn add_equation(&mut self, eq: Equation, provenance: usize) -> bool {
        let Some(key) = equation_key(&eq) else {
            return false;
        };
        if !self.keys.insert(key.clone()) {
            return false;
        }
        let numerator = match &key {
            EqKey::Poly(_) => equation_numerator(&eq.lhs, &eq.rhs, &|_| None).ok(),
            EqKey::Opaque(_) => None,
        };
        self.equations.push(StoredEquation { equation: eq, key, provenance, numerator });
        self.satisfied.push(false);
        true
    }

    fn substituted(&self, stored: &StoredEquation) -> Result<Poly, NormError> {
        let value = |s: &AttrSymbol| self.determined.get(s).cloned();
        match &stored.numerator {
            Some(p) => Ok(p.substitute(&value)),
            None => equation_numerator(&stored.equation.lhs, &stored.equation.rhs, &value),
        }
    }

    /// Runs the substitute / eliminate fixpoint and returns the newly
    /// determined symbols in the order they were found.
    pub fn solve(&mut self) -> Result<Vec<AttrSymbol>, AlgebraError> {
        let mut found = Vec::new();
        loop {
            let mut linear = Vec::new();
            let mut candidates: Vec<(AttrSymbol, BigRational)> = Vec::new();
            for i in 0..self.equations.len() {
                if self.satisfied[i] {
                    continue;
                }
                let poly = match self.substituted(&self.equations[i]) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                if poly.is_zero() {
                    self.satisfied[i] = true;
                } else if poly.as_constant().is_some() {
                    return Err(AlgebraError::Inconsistent { equation: i });
                } else if poly.is_linear() {
                    linear.push(poly);
                } else if let Some(root) = poly.univariate_root() {
                    candidates.push(root);
                }
            }
            let pinned = solve_linear(&linear).map_err(|_| AlgebraError::Inconsistent { equation: usize::MAX })?;
            let mut fresh: BTreeMap<AttrSymbol, BigRational> = BTreeMap::new();
            for (s, v) in pinned.into_iter().chain(candidates) {
                match fresh.get(&s) {
                    Some(existing) if *existing != v => {
                        return Err(AlgebraError::Inconsistent { equation: usize::MAX })
                    }
                    Some(_) => {}
                    None => {
                        fresh.insert(s, v);
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            for (s, v) in fresh {
                found.push(s.clone());
                self.determined.insert(s, v);
            }
            self.generation += 1;
        }
        Ok(found)
    }

    /// Exact value of `term` under the current assignments.
    pub fn value_of(&self, term: &Term) -> Result<Option<BigRational>, AlgebraError> {
        let value = |s: &AttrSymbol| self.determined.get(s).cloned();
        match normalize(term, &value) {
            Ok(r) => Ok(r.as_constant()),
            Err(NormError::Pending) => Ok(None),
            Err(NormError::ZeroDenominator) => Err(AlgebraError::Evaluation),
        }
    }

    /// True if the equation is stored (up to its key) or reduces to an
    /// identity after substitution.
    pub fn satisfies(&self, eq: &Equation) -> bool {
        match equation_numerator(&eq.lhs, &eq.rhs, &|_| None) {
            Ok(p) if p.is_zero() => true,
            Ok(p) => {
                self.keys.contains(&EqKey::Poly(p.monic()))
                    || p.substitute(&|s: &AttrSymbol| self.determined.get(s).cloned()).is_zero()
            }
            Err(_) => self.keys.contains(&EqKey::Opaque(eq.clone())) || self.holds(eq),
        }
    }

    /// True if the equation reduces to an identity after substitution.
    pub fn holds(&self, eq: &Equation) -> bool {
        let value = |s: &AttrSymbol| self.determined.get(s).cloned();
        matches!(equation_numerator(&eq.lhs, &eq.rhs, &value), Ok(p) if p.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Expr;
    use crate::lang::AttributeId;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn sym(i: u16) -> AttrSymbol {
        AttrSymbol { attr: AttributeId(i), points: Default::default() }
    }

    fn x(i: u16) -> Term {
        Expr::Leaf(sym(i))
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn solved(eqs: &[Equation]) -> BTreeMap<AttrSymbol, BigRational> {
        let mut store = EquationStore::new();
        for (i, e) in eqs.iter().enumerate() {
            store.add_equation(e.clone(), i);
        }
        store.solve().unwrap();
        store.determined().clone()
    }

    fn sum_difference() -> Vec<Equation> {
        vec![
            Equation::new(Expr::Add(vec![x(0), x(1)]), Expr::int(180)),
            Equation::new(Expr::Sub(Box::new(x(0)), Box::new(x(1))), Expr::int(40)),
        ]
    }

    fn pythagorean() -> Vec<Equation> {
        let sq = |t: Term| Expr::Pow(Box::new(t), 2);
        vec![
            Equation::new(x(0), Expr::int(3)),
            Equation::new(x(1), Expr::int(4)),
            Equation::new(sq(x(2)), Expr::Add(vec![sq(x(0)), sq(x(1))])),
        ]
    }

    #[test]
    fn sum_and_difference() {
        let d = solved(&sum_difference());
        assert_eq!(d[&sym(0)], int(110));
        assert_eq!(d[&sym(1)], int(70));
    }

    #[test]
    fn three_four_five() {
        assert_eq!(solved(&pythagorean())[&sym(2)], int(5));
    }

    #[test]
    fn insertion_order_is_irrelevant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for fixture in [sum_difference(), pythagorean()] {
            let expected = solved(&fixture);
            for _ in 0..20 {
                let mut eqs = fixture.clone();
                eqs.shuffle(&mut rng);
                assert_eq!(solved(&eqs), expected);
            }
        }
    }

    #[test]
    fn duplicates_and_tautologies_are_rejected() {
        let mut store = EquationStore::new();
        let e = Equation::new(Expr::Add(vec![x(0), x(1)]), Expr::int(180));
        assert!(store.add_equation(e.clone(), 0));
        let scaled = Equation::new(Expr::Add(vec![Expr::Mul(vec![Expr::int(2), x(1)]), Expr::Mul(vec![Expr::int(2), x(0)])]), Expr::int(360));
        assert!(!store.add_equation(scaled, 1));
        assert!(!store.add_equation(Equation::new(x(3), x(3)), 2));
        assert_eq!(store.equations().len(), 1);
    }

    #[test]
    fn contradiction_is_reported() {
        let mut store = EquationStore::new();
        store.add_equation(Equation::new(x(0), Expr::int(1)), 0);
        store.add_equation(Equation::new(x(0), Expr::int(2)), 1);
        assert!(matches!(store.solve(), Err(AlgebraError::Inconsistent { .. })));
    }

    #[test]
    fn irrational_roots_stay_pending() {
        let mut store = EquationStore::new();
        store.add_equation(Equation::new(Expr::Pow(Box::new(x(0)), 2), Expr::int(2)), 0);
        store.solve().unwrap();
        assert!(store.value(&sym(0)).is_none());
        assert_eq!(store.pending_symbols(), vec![sym(0)]);
    }

    // Random consistent systems: rows are integer combinations of a hidden
    // integer assignment, so every pinned value must equal the hidden one.
    fn system() -> impl Strategy<Value = (Vec<i64>, Vec<Vec<i64>>)> {
        (2usize..5).prop_flat_map(|n| {
            (prop::collection::vec(-50i64..50, n), prop::collection::vec(prop::collection::vec(-3i64..4, n), 1..6))
        })
    }

    fn row_equation(coeffs: &[i64], hidden: &[i64]) -> Equation {
        let lhs = Expr::Add(coeffs.iter().enumerate().map(|(i, &c)| Expr::Mul(vec![Expr::int(c), x(i as u16)])).collect());
        let rhs: i64 = coeffs.iter().zip(hidden).map(|(c, h)| c * h).sum();
        Equation::new(lhs, Expr::int(rhs))
    }

    proptest! {
        #[test]
        fn pinned_values_match_hidden_assignment((hidden, rows) in system(), seed in any::<u64>()) {
            let mut eqs: Vec<Equation> = rows.iter().map(|r| row_equation(r, &hidden)).collect();
            let d = solved(&eqs);
            for (s, v) in &d {
                prop_assert_eq!(v, &int(hidden[s.attr.0 as usize]));
            }
            eqs.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(solved(&eqs), d);
        }

        #[test]
        fn full_rank_pins_everything(hidden in prop::collection::vec(-50i64..50, 1..5)) {
            // Identity plus an all-ones row: always full rank.
            let n = hidden.len();
            let mut rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j) + 1).collect()).collect();
            rows.push(vec![1; n]);
            let eqs: Vec<Equation> = rows.iter().map(|r| row_equation(r, &hidden)).collect();
            prop_assert_eq!(solved(&eqs).len(), n);
        }
    }
}
