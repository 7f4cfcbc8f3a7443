use std::collections::HashSet;

use num::{BigRational, ToPrimitive, Zero};

use super::lexer::{tokenize, Tok, Token};
use super::problem::{Condition, Goal, ProblemCdl};
use super::schema::*;
use super::LangError;
use crate::algebra::{Equation, Expr, Term};
use crate::deduction::Fact;
use crate::point::Point;

const OPERATORS: [&str; 6] = ["Add", "Sub", "Mul", "Div", "Pow", "Sqrt"];

#[derive(Debug, Clone)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
struct RawApp {
    name: String,
    args: Vec<(String, Pos)>,
    pos: Pos,
}

#[derive(Debug, Clone)]
enum RawTerm {
    Num(BigRational),
    Op(String, Vec<RawTerm>),
    Pow(Box<RawTerm>, i32),
    Attr(RawApp),
}

#[derive(Debug, Clone)]
enum RawPattern {
    Fact(RawApp),
    Equal(RawTerm, RawTerm),
}

struct Cursor {
    toks: Vec<Token>,
    at: usize,
    end: Pos,
}

impl Cursor {
    fn new(source: &str) -> Result<Self, LangError> {
        let toks = tokenize(source)?;
        let end = toks
            .last()
            .map(|t| Pos { line: t.line, col: t.col + 1 })
            .unwrap_or(Pos { line: 1, col: 1 });
        Ok(Cursor { toks, at: 0, end })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.at)
            .map(|t| Pos { line: t.line, col: t.col })
            .unwrap_or_else(|| self.end.clone())
    }

    fn is_eof(&self) -> bool {
        self.at >= self.toks.len()
    }

    fn error(&self, message: impl Into<String>) -> LangError {
        let p = self.pos();
        LangError::Syntax { line: p.line, col: p.col, message: message.into() }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), LangError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), LangError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok((s, pos))
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), LangError> {
        match self.peek_ident() {
            Some(s) if s == kw => {
                self.at += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected `{kw}`"))),
        }
    }

    fn integer(&mut self) -> Result<i64, LangError> {
        match self.peek() {
            Some(Tok::Number(n)) if n.is_integer() => {
                let v = n.to_integer().to_i64().ok_or_else(|| self.error("integer out of range"))?;
                self.at += 1;
                Ok(v)
            }
            _ => Err(self.error("expected integer")),
        }
    }

    /// `(X,Y,...)` of point-shaped identifiers.
    fn point_list(&mut self) -> Result<Vec<(String, Pos)>, LangError> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            let (name, pos) = self.ident("point")?;
            if !Point::is_point_name(&name) {
                return Err(LangError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    message: format!("`{name}` is not a point identifier"),
                });
            }
            out.push((name, pos));
            if self.eat(&Tok::RParen) {
                return Ok(out);
            }
            self.expect(&Tok::Comma, "`,` or `)`")?;
        }
    }

    fn app(&mut self) -> Result<RawApp, LangError> {
        let (name, pos) = self.ident("predicate name")?;
        let args = self.point_list()?;
        Ok(RawApp { name, args, pos })
    }

    fn term(&mut self) -> Result<RawTerm, LangError> {
        if let Some(Tok::Number(n)) = self.peek() {
            let n = n.clone();
            self.at += 1;
            return Ok(RawTerm::Num(n));
        }
        let (name, pos) = self.ident("term")?;
        if name == "Pow" {
            self.expect(&Tok::LParen, "`(`")?;
            let base = self.term()?;
            self.expect(&Tok::Comma, "`,`")?;
            let exp = self.integer()?;
            self.expect(&Tok::RParen, "`)`")?;
            let exp = i32::try_from(exp).map_err(|_| self.error("exponent out of range"))?;
            return Ok(RawTerm::Pow(Box::new(base), exp));
        }
        if OPERATORS.contains(&name.as_str()) {
            self.expect(&Tok::LParen, "`(`")?;
            let mut args = vec![self.term()?];
            while self.eat(&Tok::Comma) {
                args.push(self.term()?);
            }
            self.expect(&Tok::RParen, "`)`")?;
            let arity_ok = match name.as_str() {
                "Add" | "Mul" => args.len() >= 2,
                "Sub" | "Div" => args.len() == 2,
                _ => args.len() == 1,
            };
            if !arity_ok {
                return Err(LangError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    message: format!("wrong number of operands for `{name}`"),
                });
            }
            return Ok(RawTerm::Op(name, args));
        }
        let args = self.point_list()?;
        Ok(RawTerm::Attr(RawApp { name, args, pos }))
    }

    fn equal_body(&mut self) -> Result<(RawTerm, RawTerm), LangError> {
        self.expect(&Tok::LParen, "`(`")?;
        let lhs = self.term()?;
        self.expect(&Tok::Comma, "`,`")?;
        let rhs = self.term()?;
        self.expect(&Tok::RParen, "`)`")?;
        Ok((lhs, rhs))
    }

    fn pattern(&mut self) -> Result<RawPattern, LangError> {
        if self.peek_ident() == Some("Equal") {
            self.at += 1;
            let (lhs, rhs) = self.equal_body()?;
            Ok(RawPattern::Equal(lhs, rhs))
        } else {
            Ok(RawPattern::Fact(self.app()?))
        }
    }
}

// ---------------------------------------------------------------------------
// GDL

struct RawPredicate {
    name: String,
    params: Vec<(String, Pos)>,
    reps: Vec<Vec<(String, Pos)>>,
    extensions: Vec<RawApp>,
}

struct RawAttribute {
    name: String,
    params: Vec<(String, Pos)>,
    reps: Vec<Vec<(String, Pos)>>,
    unit: Option<Unit>,
}

struct RawBranch {
    index: usize,
    premise: Vec<RawPattern>,
    conclusions: Vec<RawPattern>,
}

struct RawTheorem {
    name: String,
    params: Vec<(String, Pos)>,
    branches: Vec<RawBranch>,
}

enum Last {
    None,
    Predicate,
    Attribute,
}

/// Parses and validates a schema library.
pub fn parse_gdl(source: &str) -> Result<Schemas, LangError> {
    let mut cur = Cursor::new(source)?;
    let mut preds: Vec<RawPredicate> = Vec::new();
    let mut attrs: Vec<RawAttribute> = Vec::new();
    let mut thms: Vec<RawTheorem> = Vec::new();
    let mut last = Last::None;

    while !cur.is_eof() {
        if cur.eat(&Tok::Semi) {
            continue;
        }
        let (kw, _) = cur.ident("declaration keyword")?;
        match kw.as_str() {
            "Predicate" => {
                let (name, _) = cur.ident("predicate name")?;
                let params = cur.point_list()?;
                preds.push(RawPredicate { name, params, reps: vec![], extensions: vec![] });
                last = Last::Predicate;
                predicate_clauses(&mut cur, preds.last_mut().unwrap())?;
                end_statement(&mut cur)?;
            }
            "Attribute" => {
                let (name, _) = cur.ident("attribute name")?;
                let params = cur.point_list()?;
                attrs.push(RawAttribute { name, params, reps: vec![], unit: None });
                last = Last::Attribute;
                attribute_clauses(&mut cur, attrs.last_mut().unwrap())?;
                end_statement(&mut cur)?;
            }
            "Theorem" => {
                thms.push(theorem_decl(&mut cur)?);
                last = Last::None;
                cur.eat(&Tok::Semi);
            }
            "reps" | "extend" | "unit" => {
                cur.at -= 1;
                match last {
                    Last::Predicate => predicate_clauses(&mut cur, preds.last_mut().unwrap())?,
                    Last::Attribute => attribute_clauses(&mut cur, attrs.last_mut().unwrap())?,
                    Last::None => return Err(cur.error(format!("`{kw}` clause without a preceding declaration"))),
                }
                end_statement(&mut cur)?;
            }
            other => {
                cur.at -= 1;
                return Err(cur.error(format!("unknown declaration `{other}`")));
            }
        }
    }
    resolve_gdl(preds, attrs, thms)
}

fn end_statement(cur: &mut Cursor) -> Result<(), LangError> {
    if cur.is_eof() || cur.eat(&Tok::Semi) {
        Ok(())
    } else {
        Err(cur.error("expected `;`"))
    }
}

fn perm_list(cur: &mut Cursor) -> Result<Vec<Vec<(String, Pos)>>, LangError> {
    let mut out = vec![cur.point_list()?];
    while cur.eat(&Tok::Comma) {
        out.push(cur.point_list()?);
    }
    Ok(out)
}

fn predicate_clauses(cur: &mut Cursor, p: &mut RawPredicate) -> Result<(), LangError> {
    loop {
        match cur.peek_ident() {
            Some("reps") => {
                cur.at += 1;
                p.reps.extend(perm_list(cur)?);
            }
            Some("extend") => {
                cur.at += 1;
                p.extensions.push(cur.app()?);
                while cur.eat(&Tok::Comma) {
                    p.extensions.push(cur.app()?);
                }
            }
            _ => return Ok(()),
        }
    }
}

fn attribute_clauses(cur: &mut Cursor, a: &mut RawAttribute) -> Result<(), LangError> {
    loop {
        match cur.peek_ident() {
            Some("reps") => {
                cur.at += 1;
                a.reps.extend(perm_list(cur)?);
            }
            Some("unit") => {
                cur.at += 1;
                let (u, _) = cur.ident("unit")?;
                a.unit = Some(Unit::from_keyword(&u).ok_or_else(|| {
                    cur.at -= 1;
                    cur.error(format!("unknown unit `{u}`"))
                })?);
            }
            _ => return Ok(()),
        }
    }
}

fn theorem_decl(cur: &mut Cursor) -> Result<RawTheorem, LangError> {
    let (name, _) = cur.ident("theorem name")?;
    let params = cur.point_list()?;
    cur.expect(&Tok::LBrace, "`{`")?;
    let mut branches = Vec::new();
    while !cur.eat(&Tok::RBrace) {
        if cur.is_eof() {
            return Err(cur.error("unterminated theorem body"));
        }
        cur.keyword("branch")?;
        let index = cur.integer()?;
        let index = usize::try_from(index).map_err(|_| cur.error("branch index must be positive"))?;
        cur.expect(&Tok::Colon, "`:`")?;
        cur.keyword("premise")?;
        let mut premise = vec![cur.pattern()?];
        while cur.eat(&Tok::Amp) {
            premise.push(cur.pattern()?);
        }
        cur.expect(&Tok::Semi, "`;` after premise")?;
        cur.keyword("conclude")?;
        let mut conclusions = vec![cur.pattern()?];
        while cur.eat(&Tok::Comma) {
            conclusions.push(cur.pattern()?);
        }
        cur.expect(&Tok::Semi, "`;` after conclusions")?;
        branches.push(RawBranch { index, premise, conclusions });
    }
    Ok(RawTheorem { name, params, branches })
}

fn var_index(owner: &str, params: &[Point], name: &str) -> Result<VarIdx, LangError> {
    let p: Point = name.parse().map_err(|_| LangError::UnknownVariable {
        owner: owner.to_string(),
        var: name.to_string(),
    })?;
    params
        .iter()
        .position(|q| *q == p)
        .map(|i| i as VarIdx)
        .ok_or_else(|| LangError::UnknownVariable { owner: owner.to_string(), var: name.to_string() })
}

fn params_of(owner: &str, raw: &[(String, Pos)]) -> Result<Vec<Point>, LangError> {
    let mut out: Vec<Point> = Vec::new();
    for (name, pos) in raw {
        let p: Point = name.parse().map_err(|_| LangError::Syntax {
            line: pos.line,
            col: pos.col,
            message: format!("`{name}` is not a point identifier"),
        })?;
        if out.contains(&p) {
            return Err(LangError::Duplicate { kind: "parameter", name: format!("{owner}.{name}") });
        }
        out.push(p);
    }
    Ok(out)
}

fn representations(owner: &str, params: &[Point], reps: &[Vec<(String, Pos)>]) -> Result<Representations, LangError> {
    let mut listed: Vec<Permutation> = Vec::new();
    for rep in reps {
        let perm: Permutation = rep
            .iter()
            .map(|(v, _)| var_index(owner, params, v))
            .collect::<Result<_, _>>()?;
        let mut seen = perm.clone();
        seen.sort_unstable();
        if perm.len() != params.len() || seen.iter().enumerate().any(|(i, &v)| v as usize != i) {
            let names: Vec<&str> = rep.iter().map(|(v, _)| v.as_str()).collect();
            return Err(LangError::BadPermutation { owner: owner.to_string(), perm: format!("({})", names.join(",")) });
        }
        listed.push(perm);
    }
    Representations::from_listed(params.len(), &listed).ok_or_else(|| LangError::NotAGroup(owner.to_string()))
}

struct Names<'a> {
    preds: &'a std::collections::HashMap<String, (PredicateId, usize)>,
    attrs: &'a std::collections::HashMap<String, (AttributeId, usize)>,
}

fn fact_template(names: &Names, owner: &str, params: &[Point], app: &RawApp) -> Result<FactTemplate, LangError> {
    let &(predicate, arity) = names.preds.get(&app.name).ok_or_else(|| LangError::UnknownReference {
        kind: "predicate",
        name: app.name.clone(),
        line: app.pos.line,
        col: app.pos.col,
    })?;
    if arity != app.args.len() {
        return Err(LangError::ArityMismatch {
            name: app.name.clone(),
            expected: arity,
            found: app.args.len(),
            line: app.pos.line,
            col: app.pos.col,
        });
    }
    let args = app
        .args
        .iter()
        .map(|(v, _)| var_index(owner, params, v))
        .collect::<Result<_, _>>()?;
    Ok(FactTemplate { predicate, args })
}

/// Lowers a raw term, mapping attribute applications with `leaf`.
fn lower_term<L>(
    raw: &RawTerm,
    attrs: &std::collections::HashMap<String, (AttributeId, usize)>,
    leaf: &mut impl FnMut(AttributeId, &RawApp) -> Result<L, LangError>,
) -> Result<Expr<L>, LangError> {
    Ok(match raw {
        RawTerm::Num(n) => Expr::Const(n.clone()),
        RawTerm::Pow(base, n) => Expr::Pow(Box::new(lower_term(base, attrs, leaf)?), *n),
        RawTerm::Attr(app) => {
            let &(id, arity) = attrs.get(&app.name).ok_or_else(|| LangError::UnknownReference {
                kind: "attribute",
                name: app.name.clone(),
                line: app.pos.line,
                col: app.pos.col,
            })?;
            if arity != app.args.len() {
                return Err(LangError::ArityMismatch {
                    name: app.name.clone(),
                    expected: arity,
                    found: app.args.len(),
                    line: app.pos.line,
                    col: app.pos.col,
                });
            }
            Expr::Leaf(leaf(id, app)?)
        }
        RawTerm::Op(op, args) => {
            let mut lowered: Vec<Expr<L>> = args
                .iter()
                .map(|a| lower_term(a, attrs, leaf))
                .collect::<Result<_, _>>()?;
            match op.as_str() {
                "Add" => Expr::Add(lowered),
                "Mul" => Expr::Mul(lowered),
                "Sqrt" => Expr::Sqrt(Box::new(lowered.remove(0))),
                "Sub" | "Div" => {
                    let b = lowered.pop().unwrap();
                    let a = lowered.pop().unwrap();
                    if op == "Sub" {
                        Expr::Sub(Box::new(a), Box::new(b))
                    } else {
                        match (&a, &b) {
                            (_, Expr::Const(d)) if d.is_zero() => return Err(LangError::LiteralZeroDivision),
                            (Expr::Const(n), Expr::Const(d)) => Expr::Const(n / d),
                            _ => Expr::Div(Box::new(a), Box::new(b)),
                        }
                    }
                }
                _ => unreachable!("operator list is closed"),
            }
        }
    })
}

fn pattern(names: &Names, owner: &str, params: &[Point], raw: &RawPattern) -> Result<Pattern, LangError> {
    Ok(match raw {
        RawPattern::Fact(app) => Pattern::Fact(fact_template(names, owner, params, app)?),
        RawPattern::Equal(l, r) => {
            let mut leaf = |attr: AttributeId, app: &RawApp| -> Result<AttrTemplate, LangError> {
                let args = app
                    .args
                    .iter()
                    .map(|(v, _)| var_index(owner, params, v))
                    .collect::<Result<_, _>>()?;
                Ok(AttrTemplate { attr, args })
            };
            Pattern::Equation(EquationTemplate {
                lhs: lower_term(l, names.attrs, &mut leaf)?,
                rhs: lower_term(r, names.attrs, &mut leaf)?,
            })
        }
    })
}

fn resolve_gdl(
    preds: Vec<RawPredicate>,
    attrs: Vec<RawAttribute>,
    thms: Vec<RawTheorem>,
) -> Result<Schemas, LangError> {
    let mut pred_names = std::collections::HashMap::new();
    for (i, p) in preds.iter().enumerate() {
        if pred_names.insert(p.name.clone(), (PredicateId(i as u16), p.params.len())).is_some() {
            return Err(LangError::Duplicate { kind: "predicate", name: p.name.clone() });
        }
    }
    let mut attr_names = std::collections::HashMap::new();
    for (i, a) in attrs.iter().enumerate() {
        if pred_names.contains_key(&a.name) || attr_names.insert(a.name.clone(), (AttributeId(i as u16), a.params.len())).is_some() {
            return Err(LangError::Duplicate { kind: "attribute", name: a.name.clone() });
        }
    }
    let names = Names { preds: &pred_names, attrs: &attr_names };

    let mut predicates = Vec::with_capacity(preds.len());
    for p in &preds {
        let params = params_of(&p.name, &p.params)?;
        let representations = representations(&p.name, &params, &p.reps)?;
        let extensions = p
            .extensions
            .iter()
            .map(|e| fact_template(&names, &p.name, &params, e))
            .collect::<Result<_, _>>()?;
        predicates.push(PredicateSchema { name: p.name.clone(), params, representations, extensions });
    }

    let mut attributes = Vec::with_capacity(attrs.len());
    for a in &attrs {
        let params = params_of(&a.name, &a.params)?;
        let representations = representations(&a.name, &params, &a.reps)?;
        attributes.push(AttributeSchema {
            name: a.name.clone(),
            params,
            representations,
            unit: a.unit.unwrap_or(Unit::Scalar),
        });
    }

    let mut theorems = Vec::with_capacity(thms.len());
    let mut thm_names = HashSet::new();
    for t in &thms {
        if !thm_names.insert(t.name.clone()) {
            return Err(LangError::Duplicate { kind: "theorem", name: t.name.clone() });
        }
        if t.branches.is_empty() {
            return Err(LangError::NoBranches(t.name.clone()));
        }
        let vars = params_of(&t.name, &t.params)?;
        let mut branches = Vec::with_capacity(t.branches.len());
        for (i, b) in t.branches.iter().enumerate() {
            if b.index != i + 1 {
                return Err(LangError::BranchIndex { theorem: t.name.clone(), found: b.index, expected: i + 1 });
            }
            if b.premise.is_empty() {
                return Err(LangError::EmptyPremise { theorem: t.name.clone(), branch: b.index });
            }
            let premise: Vec<Pattern> =
                b.premise.iter().map(|p| pattern(&names, &t.name, &vars, p)).collect::<Result<_, _>>()?;
            let conclusions: Vec<Pattern> = b
                .conclusions
                .iter()
                .map(|p| pattern(&names, &t.name, &vars, p))
                .collect::<Result<_, _>>()?;
            for p in premise.iter().chain(&conclusions) {
                if let Pattern::Equation(e) = p {
                    if e.lhs.divides_by_literal_zero() || e.rhs.divides_by_literal_zero() {
                        return Err(LangError::LiteralZeroDivision);
                    }
                }
            }
            let mut bound = Vec::new();
            premise.iter().for_each(|p| pattern_vars(p, &mut bound));
            let mut used = Vec::new();
            conclusions.iter().for_each(|p| pattern_vars(p, &mut used));
            if let Some(free) = used.iter().find(|v| !bound.contains(v)) {
                return Err(LangError::FreeConclusionVariable {
                    theorem: t.name.clone(),
                    branch: b.index,
                    var: vars[*free as usize].to_string(),
                });
            }
            branches.push(TheoremBranch { index: b.index, premise, conclusions });
        }
        theorems.push(TheoremSchema { name: t.name.clone(), vars, branches });
    }
    Ok(Schemas::assemble(predicates, attributes, theorems))
}

// ---------------------------------------------------------------------------
// CDL

struct Ground<'a> {
    schemas: &'a Schemas,
    points: &'a [Point],
}

impl Ground<'_> {
    fn point(&self, name: &str, pos: &Pos) -> Result<Point, LangError> {
        let p: Point = name.parse().map_err(|_| LangError::Syntax {
            line: pos.line,
            col: pos.col,
            message: format!("`{name}` is not a point identifier"),
        })?;
        if self.points.contains(&p) {
            Ok(p)
        } else {
            Err(LangError::UndeclaredPoint { point: name.to_string(), line: pos.line, col: pos.col })
        }
    }

    fn fact(&self, app: &RawApp) -> Result<Fact, LangError> {
        let id = self.schemas.predicate_id(&app.name).ok_or_else(|| LangError::UnknownReference {
            kind: "predicate",
            name: app.name.clone(),
            line: app.pos.line,
            col: app.pos.col,
        })?;
        let schema = self.schemas.predicate(id);
        if schema.arity() != app.args.len() {
            return Err(LangError::ArityMismatch {
                name: app.name.clone(),
                expected: schema.arity(),
                found: app.args.len(),
                line: app.pos.line,
                col: app.pos.col,
            });
        }
        let pts: Vec<Point> = app.args.iter().map(|(n, p)| self.point(n, p)).collect::<Result<_, _>>()?;
        Ok(Fact::canonical(self.schemas, id, &pts))
    }

    fn term(&self, raw: &RawTerm) -> Result<Term, LangError> {
        let attrs: std::collections::HashMap<String, (AttributeId, usize)> = self
            .schemas
            .attributes
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.clone(), (AttributeId(i as u16), a.arity())))
            .collect();
        lower_term(raw, &attrs, &mut |attr, app| {
            let pts: Vec<Point> = app.args.iter().map(|(n, p)| self.point(n, p)).collect::<Result<_, _>>()?;
            Ok(self.schemas.canonical_symbol(attr, &pts))
        })
    }

    fn equation(&self, l: &RawTerm, r: &RawTerm) -> Result<Equation, LangError> {
        Ok(Equation::new(self.term(l)?, self.term(r)?))
    }
}

fn goal_body(cur: &mut Cursor, g: &Ground) -> Result<Goal, LangError> {
    match cur.peek_ident() {
        Some("Value") => {
            cur.at += 1;
            cur.expect(&Tok::LParen, "`(`")?;
            let t = cur.term()?;
            cur.expect(&Tok::RParen, "`)`")?;
            let term = g.term(&t)?;
            let target = if cur.eat(&Tok::Eq) {
                let raw = cur.term()?;
                match g.term(&raw)? {
                    Expr::Const(c) => Some(c),
                    _ => return Err(LangError::BadTarget),
                }
            } else {
                None
            };
            Ok(Goal::Value { term, target })
        }
        Some("Equal") => {
            cur.at += 1;
            let (l, r) = cur.equal_body()?;
            Ok(Goal::Equation(g.equation(&l, &r)?))
        }
        _ => Ok(Goal::Relation(g.fact(&cur.app()?)?)),
    }
}

/// Parses a problem statement against a schema library.
pub fn parse_cdl(source: &str, schemas: &Schemas) -> Result<ProblemCdl, LangError> {
    let mut cur = Cursor::new(source)?;
    let mut points: Vec<Point> = Vec::new();
    // Statements are validated after all are read so `Points` may appear anywhere.
    enum Stmt {
        Construction(RawApp),
        ConditionFact(RawApp),
        ConditionEq(RawTerm, RawTerm),
        Goal(usize),
    }
    let mut stmts = Vec::new();
    let mut goal_starts = Vec::new();
    while !cur.is_eof() {
        if cur.eat(&Tok::Semi) {
            continue;
        }
        match cur.peek_ident() {
            Some("Points") => {
                cur.at += 1;
                loop {
                    let (name, pos) = cur.ident("point")?;
                    let p: Point = name.parse().map_err(|_| LangError::Syntax {
                        line: pos.line,
                        col: pos.col,
                        message: format!("`{name}` is not a point identifier"),
                    })?;
                    if points.contains(&p) {
                        return Err(LangError::Duplicate { kind: "point", name });
                    }
                    points.push(p);
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            Some("Goal") => {
                cur.at += 1;
                goal_starts.push(cur.at);
                stmts.push(Stmt::Goal(cur.at));
                skip_statement(&mut cur);
            }
            Some("Condition") => {
                cur.at += 1;
                stmts.push(Stmt::ConditionFact(cur.app()?));
            }
            Some("Equal") => {
                cur.at += 1;
                let (l, r) = cur.equal_body()?;
                stmts.push(Stmt::ConditionEq(l, r));
            }
            Some(_) => stmts.push(Stmt::Construction(cur.app()?)),
            None => return Err(cur.error("expected a declaration")),
        }
        end_statement(&mut cur)?;
    }

    let ground = Ground { schemas, points: &points };
    let mut construction = Vec::new();
    let mut conditions = Vec::new();
    let mut goal = None;
    for stmt in &stmts {
        match stmt {
            Stmt::Construction(app) => construction.push(ground.fact(app)?),
            Stmt::ConditionFact(app) => conditions.push(Condition::Fact(ground.fact(app)?)),
            Stmt::ConditionEq(l, r) => conditions.push(Condition::Equation(ground.equation(l, r)?)),
            Stmt::Goal(start) => {
                if goal.is_some() {
                    return Err(LangError::DuplicateGoal);
                }
                cur.at = *start;
                let g = goal_body(&mut cur, &ground)?;
                if !(cur.is_eof() || cur.peek() == Some(&Tok::Semi)) {
                    return Err(cur.error("unexpected tokens after goal"));
                }
                goal = Some(g);
            }
        }
    }
    let goal = goal.ok_or(LangError::MissingGoal)?;
    Ok(ProblemCdl { points, construction, conditions, goal })
}

fn skip_statement(cur: &mut Cursor) {
    let mut depth = 0i32;
    while let Some(t) = cur.peek() {
        match t {
            Tok::LParen => depth += 1,
            Tok::RParen => depth -= 1,
            Tok::Semi if depth <= 0 => return,
            _ => {}
        }
        cur.at += 1;
    }
}

fn whole<T>(source: &str, f: impl FnOnce(&mut Cursor) -> Result<T, LangError>) -> Result<T, LangError> {
    let mut cur = Cursor::new(source)?;
    let out = f(&mut cur)?;
    if !cur.is_eof() {
        return Err(cur.error("unexpected trailing input"));
    }
    Ok(out)
}

/// Parses a single ground term such as `Add(MeasureOfAngle(A,B,C),30)`.
pub fn parse_term(source: &str, schemas: &Schemas, points: &[Point]) -> Result<Term, LangError> {
    let g = Ground { schemas, points };
    whole(source, |cur| g.term(&cur.term()?))
}

/// Parses `Equal(lhs,rhs)`.
pub fn parse_equation(source: &str, schemas: &Schemas, points: &[Point]) -> Result<Equation, LangError> {
    let g = Ground { schemas, points };
    whole(source, |cur| {
        cur.keyword("Equal")?;
        let (l, r) = cur.equal_body()?;
        g.equation(&l, &r)
    })
}

/// Parses a ground fact such as `Parallel(A,B,C,D)`, canonicalized.
pub fn parse_fact(source: &str, schemas: &Schemas, points: &[Point]) -> Result<Fact, LangError> {
    let g = Ground { schemas, points };
    whole(source, |cur| g.fact(&cur.app()?))
}

/// Parses a goal in the `Goal` statement syntax (without the keyword).
pub fn parse_goal(source: &str, schemas: &Schemas, points: &[Point]) -> Result<Goal, LangError> {
    let g = Ground { schemas, points };
    whole(source, |cur| goal_body(cur, &g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{print_cdl, print_gdl};

    const MINI: &str = "
        Predicate Angle(A,B,C);
        Predicate Triangle(A,B,C) reps (B,C,A),(C,A,B) extend Angle(A,B,C),Angle(B,C,A),Angle(C,A,B);
        Predicate Polygon(A,B,C) reps (B,C,A),(C,A,B);
        Attribute MeasureOfAngle(A,B,C) unit degrees;
        Attribute LengthOfLine(A,B) reps (B,A) unit length;
        Attribute AreaOfTriangle(A,B,C) reps (B,C,A),(C,A,B) unit area;
        Theorem angle_sum(A,B,C) {
          branch 1: premise Polygon(A,B,C);
                    conclude Equal(Add(MeasureOfAngle(A,B,C),MeasureOfAngle(B,C,A),MeasureOfAngle(C,A,B)),180);
        }
    ";

    fn pts(names: &str) -> Vec<Point> {
        names.chars().map(|c| Point::new(c, None).unwrap()).collect()
    }

    #[test]
    fn predicate_with_reps_and_extensions() {
        let s = parse_gdl(MINI).unwrap();
        let tri = s.predicate(s.predicate_id("Triangle").unwrap());
        assert_eq!(tri.arity(), 3);
        assert_eq!(tri.representations.perms().len(), 3);
        assert_eq!(tri.extensions.len(), 3);
    }

    #[test]
    fn empty_source() {
        let s = parse_gdl("").unwrap();
        assert!(s.predicates.is_empty() && s.attributes.is_empty() && s.theorems.is_empty());
        assert!(s.actions().is_empty());
    }

    #[test]
    fn free_conclusion_variable() {
        let src = "Predicate Angle(A,B,C);
            Theorem bad(A,B,C,D) { branch 1: premise Angle(A,B,C); conclude Angle(A,B,D); }";
        assert!(matches!(parse_gdl(src), Err(LangError::FreeConclusionVariable { .. })));
    }

    #[test]
    fn problem_statement() {
        let s = parse_gdl(MINI).unwrap();
        let p = parse_cdl(
            "Points A,B,C; Polygon(A,B,C); Equal(MeasureOfAngle(A,B,C),60); Goal Value(MeasureOfAngle(B,C,A))",
            &s,
        )
        .unwrap();
        assert_eq!(p.points, pts("ABC"));
        assert_eq!(p.construction.len() + p.conditions.iter().filter(|c| matches!(c, Condition::Fact(_))).count(), 1);
        assert_eq!(p.conditions.iter().filter(|c| matches!(c, Condition::Equation(_))).count(), 1);
        assert!(matches!(p.goal, Goal::Value { target: None, .. }));
    }

    #[test]
    fn arity_mismatch() {
        let s = parse_gdl(MINI).unwrap();
        let r = parse_cdl("Points A,B,C; Triangle(A,B); Goal Value(MeasureOfAngle(A,B,C))", &s);
        assert!(matches!(r, Err(LangError::ArityMismatch { .. })));
    }

    #[test]
    fn undeclared_goal_point() {
        let s = parse_gdl(MINI).unwrap();
        let r = parse_cdl("Points A,B,C; Polygon(A,B,C); Goal Value(MeasureOfAngle(A,B,D))", &s);
        assert!(matches!(r, Err(LangError::UndeclaredPoint { .. })));
    }

    #[test]
    fn canonical_symbols() {
        let s = parse_gdl(MINI).unwrap();
        let sym = |name: &str, p: &str| s.render_symbol(&s.canonical_symbol(s.attribute_id(name).unwrap(), &pts(p)));
        assert_eq!(sym("LengthOfLine", "BA"), "LengthOfLine(A,B)");
        assert_eq!(sym("MeasureOfAngle", "CBA"), "MeasureOfAngle(C,B,A)");
        assert_eq!(sym("AreaOfTriangle", "CAB"), "AreaOfTriangle(A,B,C)");
    }

    #[test]
    fn bundled_library_round_trips() {
        let s = parse_gdl(crate::GEOMETRY_GDL).unwrap();
        let again = parse_gdl(&print_gdl(&s)).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.actions(), again.actions());
    }

    #[test]
    fn problem_round_trips() {
        let s = parse_gdl(MINI).unwrap();
        let src = "Points A,B,C; Polygon(A,B,C); Equal(MeasureOfAngle(A,B,C),Div(1,2)); Equal(LengthOfLine(B,A),Sqrt(2)); Goal Value(MeasureOfAngle(B,C,A))=30";
        let p = parse_cdl(src, &s).unwrap();
        assert_eq!(parse_cdl(&print_cdl(&p, &s), &s).unwrap(), p);
    }
}
