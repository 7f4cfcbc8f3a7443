//! Arithmetic expressions over attribute leaves.
//!
//! The same tree shape serves ground terms (leaves are [`AttrSymbol`]s) and
//! theorem templates (leaves reference theorem variables).

use num::{BigRational, Zero};

use crate::lang::AttributeId;
use crate::point::Points;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr<L> {
    Const(BigRational),
    Leaf(L),
    Add(Vec<Expr<L>>),
    Sub(Box<Expr<L>>, Box<Expr<L>>),
    Mul(Vec<Expr<L>>),
    Div(Box<Expr<L>>, Box<Expr<L>>),
    Pow(Box<Expr<L>>, i32),
    Sqrt(Box<Expr<L>>),
}

/// A canonical attribute application such as `LengthOfLine(A,B)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrSymbol {
    pub attr: AttributeId,
    pub points: Points,
}

pub type Term = Expr<AttrSymbol>;

impl<L> Expr<L> {
    pub fn constant(value: impl Into<BigRational>) -> Self {
        Expr::Const(value.into())
    }

    pub fn int(value: i64) -> Self {
        Expr::Const(BigRational::from_integer(value.into()))
    }

    /// Rebuilds the tree with every leaf mapped through `f`.
    pub fn try_map<M, E>(&self, f: &mut impl FnMut(&L) -> Result<M, E>) -> Result<Expr<M>, E> {
        Ok(match self {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Leaf(l) => Expr::Leaf(f(l)?),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.try_map(f)).collect::<Result<_, _>>()?),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.try_map(f)).collect::<Result<_, _>>()?),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.try_map(f)?), Box::new(b.try_map(f)?)),
            Expr::Div(a, b) => Expr::Div(Box::new(a.try_map(f)?), Box::new(b.try_map(f)?)),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.try_map(f)?), *n),
            Expr::Sqrt(a) => Expr::Sqrt(Box::new(a.try_map(f)?)),
        })
    }

    pub fn map<M>(&self, f: &mut impl FnMut(&L) -> M) -> Expr<M> {
        self.try_map::<M, std::convert::Infallible>(&mut |l| Ok(f(l)))
            .unwrap_or_else(|never| match never {})
    }

    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |l| out.push(l));
        out
    }

    pub fn visit_leaves<'a>(&'a self, f: &mut impl FnMut(&'a L)) {
        match self {
            Expr::Const(_) => {}
            Expr::Leaf(l) => f(l),
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.visit_leaves(f)),
            Expr::Sub(a, b) | Expr::Div(a, b) => {
                a.visit_leaves(f);
                b.visit_leaves(f);
            }
            Expr::Pow(a, _) | Expr::Sqrt(a) => a.visit_leaves(f),
        }
    }

    /// True if a `Div` has the literal constant zero as its denominator.
    pub fn divides_by_literal_zero(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Leaf(_) => false,
            Expr::Div(a, b) => {
                matches!(&**b, Expr::Const(c) if c.is_zero())
                    || a.divides_by_literal_zero()
                    || b.divides_by_literal_zero()
            }
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(|x| x.divides_by_literal_zero()),
            Expr::Sub(a, b) => a.divides_by_literal_zero() || b.divides_by_literal_zero(),
            Expr::Pow(a, _) | Expr::Sqrt(a) => a.divides_by_literal_zero(),
        }
    }

    /// Renders the expression in the concrete grammar, with leaves rendered by `leaf`.
    pub fn render(&self, leaf: &impl Fn(&L) -> String) -> String {
        match self {
            Expr::Const(c) => render_rational(c),
            Expr::Leaf(l) => leaf(l),
            Expr::Add(xs) => render_call("Add", xs.iter().map(|x| x.render(leaf))),
            Expr::Mul(xs) => render_call("Mul", xs.iter().map(|x| x.render(leaf))),
            Expr::Sub(a, b) => render_call("Sub", [a.render(leaf), b.render(leaf)].into_iter()),
            Expr::Div(a, b) => render_call("Div", [a.render(leaf), b.render(leaf)].into_iter()),
            Expr::Pow(a, n) => render_call("Pow", [a.render(leaf), n.to_string()].into_iter()),
            Expr::Sqrt(a) => render_call("Sqrt", std::iter::once(a.render(leaf))),
        }
    }
}

fn render_call(name: &str, args: impl Iterator<Item = String>) -> String {
    let args: Vec<String> = args.collect();
    format!("{name}({})", args.join(","))
}

/// Integers print plainly; other rationals print as `Div(p,q)` so they reparse exactly.
pub fn render_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("Div({},{})", c.numer(), c.denom())
    }
}
