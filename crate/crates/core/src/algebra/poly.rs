//! Sparse multivariate polynomials and rational functions over exact rationals.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Signed, Zero};

use super::expr::{AttrSymbol, Expr, Term};

/// Product of symbol powers, sorted by symbol; the empty monomial is `1`.
pub type Monomial = Vec<(AttrSymbol, u32)>;

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn symbol(s: AttrSymbol) -> Self {
        let mut p = Poly::zero();
        p.terms.insert(vec![(s, 1)], BigRational::one());
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().map(|(_, e)| e).sum()).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    pub fn symbols(&self) -> Vec<AttrSymbol> {
        let mut out: Vec<AttrSymbol> = self.terms.keys().flatten().map(|(s, _)| s.clone()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Coefficient of the degree-1 monomial in `s`.
    pub fn linear_coefficient(&self, s: &AttrSymbol) -> BigRational {
        self.terms
            .get(&vec![(s.clone(), 1)])
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(mul_monomials(m1, m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(BigRational::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Replaces every symbol that has a value.
    pub fn substitute(&self, value: &impl Fn(&AttrSymbol) -> Option<BigRational>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest: Monomial = Vec::new();
            for (s, e) in m {
                match value(s) {
                    Some(v) => coeff *= pow_rational(&v, *e),
                    None => rest.push((s.clone(), *e)),
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }

    /// Scales so the coefficient of the greatest monomial is one.
    pub fn monic(&self) -> Poly {
        match self.terms.values().next_back() {
            Some(lead) if !lead.is_one() => self.scale(&lead.recip()),
            _ => self.clone(),
        }
    }

    /// Solves a one-symbol polynomial of degree ≥ 2 for a unique nonnegative
    /// rational root (or the unique real root for odd pure powers).
    pub fn univariate_root(&self) -> Option<(AttrSymbol, BigRational)> {
        let syms = self.symbols();
        if syms.len() != 1 || self.degree() < 2 {
            return None;
        }
        let sym = syms.into_iter().next()?;
        let mut coeffs: BTreeMap<u32, BigRational> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.first().map(|(_, e)| *e).unwrap_or(0);
            coeffs.insert(e, c.clone());
        }
        let zero = BigRational::zero();
        let (&n, lead) = coeffs.iter().next_back()?;
        let c0 = coeffs.get(&0).unwrap_or(&zero);
        if coeffs.len() <= 2 && coeffs.keys().all(|&e| e == 0 || e == n) {
            let rhs = -c0 / lead;
            return rational_root(&rhs, n).map(|r| (sym, r));
        }
        if n == 2 {
            let a = lead;
            let b = coeffs.get(&1).unwrap_or(&zero);
            let disc = b * b - BigRational::from_integer(4.into()) * a * c0;
            let root = rational_root(&disc, 2)?;
            let two_a = BigRational::from_integer(2.into()) * a;
            let r1 = (-b + &root) / &two_a;
            let r2 = (-b - &root) / &two_a;
            let nonneg: Vec<BigRational> = [r1, r2].into_iter().filter(|r| !r.is_negative()).collect();
            return match nonneg.as_slice() {
                [r] => Some((sym, r.clone())),
                [r, s] if r == s => Some((sym, r.clone())),
                _ => None,
            };
        }
        None
    }
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: Monomial = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn pow_rational(v: &BigRational, e: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= v;
    }
    out
}

/// The `n`-th root of `v` if it is rational: nonnegative for even `n`.
pub fn rational_root(v: &BigRational, n: u32) -> Option<BigRational> {
    if n == 0 {
        return None;
    }
    if n == 1 {
        return Some(v.clone());
    }
    if v.is_negative() {
        if n.is_multiple_of(2) {
            return None;
        }
        return rational_root(&-v, n).map(|r| -r);
    }
    let num = int_root(v.numer(), n)?;
    let den = int_root(v.denom(), n)?;
    Some(BigRational::new(num, den))
}

fn int_root(x: &BigInt, n: u32) -> Option<BigInt> {
    let r = x.nth_root(n);
    if num::pow(r.clone(), n as usize) == *x {
        Some(r)
    } else {
        None
    }
}

/// Why a term could not be reduced to a rational function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormError {
    /// A square root of a non-constant or irrational quantity.
    Pending,
    /// A denominator that is identically zero.
    ZeroDenominator,
}

/// `num / den`, with `den` equal to one whenever it is constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFn {
    pub num: Poly,
    pub den: Poly,
}

impl RatFn {
    fn new(num: Poly, den: Poly) -> Result<Self, NormError> {
        if den.is_zero() {
            return Err(NormError::ZeroDenominator);
        }
        match den.as_constant() {
            Some(d) if d.is_one() => Ok(RatFn { num, den }),
            Some(d) => Ok(RatFn { num: num.scale(&d.recip()), den: Poly::constant(BigRational::one()) }),
            None => Ok(RatFn { num, den }),
        }
    }

    fn poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::constant(BigRational::one()) }
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        let d = self.den.as_constant()?;
        Some(self.num.as_constant()? / d)
    }

    fn add(&self, o: &RatFn) -> Result<RatFn, NormError> {
        if self.den == o.den {
            return RatFn::new(self.num.add(&o.num), self.den.clone());
        }
        RatFn::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    fn neg(&self) -> RatFn {
        RatFn { num: self.num.scale(&-BigRational::one()), den: self.den.clone() }
    }

    fn mul(&self, o: &RatFn) -> Result<RatFn, NormError> {
        RatFn::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    fn recip(&self) -> Result<RatFn, NormError> {
        RatFn::new(self.den.clone(), self.num.clone())
    }
}

/// Reduces a term to a rational function, replacing symbols that `value` knows.
pub fn normalize(term: &Term, value: &impl Fn(&AttrSymbol) -> Option<BigRational>) -> Result<RatFn, NormError> {
    Ok(match term {
        Expr::Const(c) => RatFn::poly(Poly::constant(c.clone())),
        Expr::Leaf(s) => match value(s) {
            Some(v) => RatFn::poly(Poly::constant(v)),
            None => RatFn::poly(Poly::symbol(s.clone())),
        },
        Expr::Add(xs) => {
            let mut acc = RatFn::poly(Poly::zero());
            for x in xs {
                acc = acc.add(&normalize(x, value)?)?;
            }
            acc
        }
        Expr::Mul(xs) => {
            let mut acc = RatFn::poly(Poly::constant(BigRational::one()));
            for x in xs {
                acc = acc.mul(&normalize(x, value)?)?;
            }
            acc
        }
        Expr::Sub(a, b) => normalize(a, value)?.add(&normalize(b, value)?.neg())?,
        Expr::Div(a, b) => normalize(a, value)?.mul(&normalize(b, value)?.recip()?)?,
        Expr::Pow(a, n) => {
            let base = normalize(a, value)?;
            let base = if *n < 0 { base.recip()? } else { base };
            let e = n.unsigned_abs();
            RatFn::new(base.num.pow(e), base.den.pow(e))?
        }
        Expr::Sqrt(a) => {
            let inner = normalize(a, value)?;
            let c = inner.as_constant().ok_or(NormError::Pending)?;
            let r = rational_root(&c, 2).ok_or(NormError::Pending)?;
            RatFn::poly(Poly::constant(r))
        }
    })
}

/// Numerator of `lhs - rhs`, zero exactly when the equation is an identity.
pub fn equation_numerator(
    lhs: &Term,
    rhs: &Term,
    value: &impl Fn(&AttrSymbol) -> Option<BigRational>,
) -> Result<Poly, NormError> {
    let l = normalize(lhs, value)?;
    let r = normalize(rhs, value)?;
    Ok(l.num.mul(&r.den).sub(&r.num.mul(&l.den)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::AttributeId;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn x() -> Poly {
        Poly::symbol(AttrSymbol { attr: AttributeId(0), points: Default::default() })
    }

    #[test]
    fn roots() {
        assert_eq!(rational_root(&r(9, 4), 2), Some(r(3, 2)));
        assert_eq!(rational_root(&r(2, 1), 2), None);
        assert_eq!(rational_root(&r(-8, 27), 3), Some(r(-2, 3)));
        assert_eq!(rational_root(&r(-4, 1), 2), None);
    }

    #[test]
    fn quadratic_keeps_the_nonnegative_root() {
        // x^2 - x - 6 = (x - 3)(x + 2)
        let p = x().pow(2).sub(&x()).sub(&Poly::constant(r(6, 1)));
        assert_eq!(p.univariate_root().map(|(_, v)| v), Some(r(3, 1)));
        // x^2 - 5x + 6 has two nonnegative roots.
        let q = x().pow(2).sub(&x().scale(&r(5, 1))).add(&Poly::constant(r(6, 1)));
        assert_eq!(q.univariate_root(), None);
    }

    #[test]
    fn zero_denominator() {
        let t: Term = Expr::Div(Box::new(Expr::int(1)), Box::new(Expr::Sub(Box::new(Expr::int(2)), Box::new(Expr::int(2)))));
        assert_eq!(normalize(&t, &|_| None), Err(NormError::ZeroDenominator));
    }

    #[test]
    fn monic_is_scale_invariant() {
        let p = x().scale(&r(4, 1)).add(&Poly::constant(r(2, 1)));
        assert_eq!(p.monic(), p.scale(&r(-7, 3)).monic());
    }
}
