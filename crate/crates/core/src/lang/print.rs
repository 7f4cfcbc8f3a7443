//! Pretty-printers producing text that reparses to the same AST.

use std::fmt::Write;

use super::problem::{Condition, Goal, ProblemCdl};
use super::schema::*;
use crate::algebra::{render_rational, Equation, Term};
use crate::deduction::Fact;
use crate::point::{join_points, Point};

fn vars(params: &[Point], args: &[VarIdx]) -> String {
    let pts: Vec<Point> = args.iter().map(|&i| params[i as usize]).collect();
    join_points(&pts)
}

fn perm_text(params: &[Point], perm: &[u8]) -> String {
    format!("({})", vars(params, perm))
}

fn template_text(schemas: &Schemas, params: &[Point], p: &Pattern) -> String {
    match p {
        Pattern::Fact(f) => format!("{}({})", schemas.predicate(f.predicate).name, vars(params, &f.args)),
        Pattern::Equation(e) => {
            let leaf = |l: &AttrTemplate| format!("{}({})", schemas.attribute(l.attr).name, vars(params, &l.args));
            format!("Equal({},{})", e.lhs.render(&leaf), e.rhs.render(&leaf))
        }
    }
}

pub fn print_gdl(schemas: &Schemas) -> String {
    let mut out = String::new();
    for p in &schemas.predicates {
        let _ = write!(out, "Predicate {}({})", p.name, join_points(&p.params));
        let listed = p.representations.listed();
        if !listed.is_empty() {
            let reps: Vec<String> = listed.iter().map(|r| perm_text(&p.params, r)).collect();
            let _ = write!(out, " reps {}", reps.join(","));
        }
        if !p.extensions.is_empty() {
            let ext: Vec<String> = p
                .extensions
                .iter()
                .map(|e| format!("{}({})", schemas.predicate(e.predicate).name, vars(&p.params, &e.args)))
                .collect();
            let _ = write!(out, " extend {}", ext.join(","));
        }
        out.push_str(";\n");
    }
    for a in &schemas.attributes {
        let _ = write!(out, "Attribute {}({})", a.name, join_points(&a.params));
        let listed = a.representations.listed();
        if !listed.is_empty() {
            let reps: Vec<String> = listed.iter().map(|r| perm_text(&a.params, r)).collect();
            let _ = write!(out, " reps {}", reps.join(","));
        }
        let _ = writeln!(out, " unit {};", a.unit.keyword());
    }
    for t in &schemas.theorems {
        let _ = writeln!(out, "Theorem {}({}) {{", t.name, join_points(&t.vars));
        for b in &t.branches {
            let prem: Vec<String> = b.premise.iter().map(|p| template_text(schemas, &t.vars, p)).collect();
            let concl: Vec<String> = b.conclusions.iter().map(|p| template_text(schemas, &t.vars, p)).collect();
            let _ = writeln!(
                out,
                "  branch {}: premise {}; conclude {};",
                b.index,
                prem.join(" & "),
                concl.join(", ")
            );
        }
        out.push_str("}\n");
    }
    out
}

pub fn render_fact(schemas: &Schemas, fact: &Fact) -> String {
    format!("{}({})", schemas.predicate(fact.predicate).name, join_points(&fact.points))
}

pub fn render_term(schemas: &Schemas, term: &Term) -> String {
    term.render(&|s| schemas.render_symbol(s))
}

pub fn render_equation(schemas: &Schemas, eq: &Equation) -> String {
    format!("Equal({},{})", render_term(schemas, &eq.lhs), render_term(schemas, &eq.rhs))
}

pub fn render_goal(schemas: &Schemas, goal: &Goal) -> String {
    match goal {
        Goal::Relation(f) => render_fact(schemas, f),
        Goal::Value { term, target: None } => format!("Value({})", render_term(schemas, term)),
        Goal::Value { term, target: Some(t) } => {
            format!("Value({})={}", render_term(schemas, term), render_rational(t))
        }
        Goal::Equation(e) => render_equation(schemas, e),
    }
}

pub fn print_cdl(problem: &ProblemCdl, schemas: &Schemas) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Points {};", join_points(&problem.points));
    for f in &problem.construction {
        let _ = writeln!(out, "{};", render_fact(schemas, f));
    }
    for c in &problem.conditions {
        match c {
            Condition::Fact(f) => {
                let _ = writeln!(out, "Condition {};", render_fact(schemas, f));
            }
            Condition::Equation(e) => {
                let _ = writeln!(out, "{};", render_equation(schemas, e));
            }
        }
    }
    let _ = writeln!(out, "Goal {}", render_goal(schemas, &problem.goal));
    out
}
