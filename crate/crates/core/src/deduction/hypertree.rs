use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num::BigRational;
use serde::Serialize;

use super::fact::Fact;
use crate::algebra::{render_rational, AttrSymbol, EqKey, Equation};
use crate::lang::{render_equation, render_fact, Action, Schemas};

#[derive(Debug, Clone, PartialEq)]
pub enum NodeContent {
    Fact(Fact),
    Equation(Equation),
    Value(AttrSymbol, BigRational),
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: usize,
    pub content: NodeContent,
    pub initial: bool,
}

/// One theorem application (or solver pass when `action` is `None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperEdge {
    pub action: Option<Action>,
    pub premises: Vec<usize>,
    pub conclusions: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct HyperTree {
    nodes: Vec<Node>,
    edges: Vec<HyperEdge>,
    fact_nodes: HashMap<Fact, usize>,
    eq_nodes: HashMap<EqKey, usize>,
    value_nodes: HashMap<AttrSymbol, usize>,
}

impl HyperTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[HyperEdge] {
        &self.edges
    }

    pub fn fact_node(&self, fact: &Fact) -> Option<usize> {
        self.fact_nodes.get(fact).copied()
    }

    pub fn equation_node(&self, key: &EqKey) -> Option<usize> {
        self.eq_nodes.get(key).copied()
    }

    pub fn value_node(&self, sym: &AttrSymbol) -> Option<usize> {
        self.value_nodes.get(sym).copied()
    }

    fn push(&mut self, content: NodeContent, initial: bool) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { id, content, initial });
        id
    }

    pub(crate) fn add_fact(&mut self, fact: Fact, initial: bool) -> usize {
        if let Some(&id) = self.fact_nodes.get(&fact) {
            return id;
        }
        let id = self.push(NodeContent::Fact(fact.clone()), initial);
        self.fact_nodes.insert(fact, id);
        id
    }

    pub(crate) fn add_equation(&mut self, key: EqKey, eq: Equation, initial: bool) -> usize {
        if let Some(&id) = self.eq_nodes.get(&key) {
            return id;
        }
        let id = self.push(NodeContent::Equation(eq), initial);
        self.eq_nodes.insert(key, id);
        id
    }

    pub(crate) fn add_value(&mut self, sym: AttrSymbol, value: BigRational, initial: bool) -> usize {
        if let Some(&id) = self.value_nodes.get(&sym) {
            return id;
        }
        let id = self.push(NodeContent::Value(sym.clone(), value), initial);
        self.value_nodes.insert(sym, id);
        id
    }

    pub(crate) fn add_edge(&mut self, action: Option<Action>, mut premises: Vec<usize>, conclusions: Vec<usize>) {
        if conclusions.is_empty() {
            return;
        }
        premises.sort_unstable();
        premises.dedup();
        self.edges.push(HyperEdge { action, premises, conclusions });
    }

    /// Nodes derivable from the initial nodes by firing edges whose premises
    /// are all derived.
    pub fn reachable(&self) -> HashSet<usize> {
        let mut seen: HashSet<usize> = self.nodes.iter().filter(|n| n.initial).map(|n| n.id).collect();
        loop {
            let before = seen.len();
            for e in &self.edges {
                if e.premises.iter().all(|p| seen.contains(p)) {
                    seen.extend(e.conclusions.iter().copied());
                }
            }
            if seen.len() == before {
                return seen;
            }
        }
    }

    pub fn node_label(&self, schemas: &Schemas, id: usize) -> String {
        match &self.nodes[id].content {
            NodeContent::Fact(f) => render_fact(schemas, f),
            NodeContent::Equation(eq) => render_equation(schemas, eq),
            NodeContent::Value(s, v) => format!("{} = {}", schemas.render_symbol(s), render_rational(v)),
        }
    }

    pub fn to_json(&self, schemas: &Schemas) -> serde_json::Value {
        #[derive(Serialize)]
        struct JsonNode {
            id: usize,
            kind: &'static str,
            label: String,
            initial: bool,
        }
        #[derive(Serialize)]
        struct JsonEdge {
            id: usize,
            theorem: String,
            premises: Vec<usize>,
            conclusions: Vec<usize>,
        }
        let nodes: Vec<JsonNode> = self
            .nodes
            .iter()
            .map(|n| JsonNode {
                id: n.id,
                kind: match n.content {
                    NodeContent::Fact(_) => "fact",
                    NodeContent::Equation(_) => "equation",
                    NodeContent::Value(..) => "value",
                },
                label: self.node_label(schemas, n.id),
                initial: n.initial,
            })
            .collect();
        let edges: Vec<JsonEdge> = self
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| JsonEdge {
                id,
                theorem: edge_label(schemas, e),
                premises: e.premises.clone(),
                conclusions: e.conclusions.clone(),
            })
            .collect();
        serde_json::json!({ "nodes": nodes, "edges": edges })
    }

    /// Graphviz rendering; each hyper-edge becomes a small box node.
    pub fn to_dot(&self, schemas: &Schemas) -> String {
        let mut out = String::from("digraph hypertree {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n");
        for n in &self.nodes {
            let style = if n.initial { ", style=filled, fillcolor=\"#e8f0fe\"" } else { "" };
            let _ = writeln!(out, "  n{} [shape=ellipse, label=\"{}\"{}];", n.id, escape(&self.node_label(schemas, n.id)), style);
        }
        for (i, e) in self.edges.iter().enumerate() {
            let _ = writeln!(out, "  e{} [shape=box, label=\"{}\"];", i, escape(&edge_label(schemas, e)));
            for p in &e.premises {
                let _ = writeln!(out, "  n{} -> e{};", p, i);
            }
            for c in &e.conclusions {
                let _ = writeln!(out, "  e{} -> n{};", i, c);
            }
        }
        out.push_str("}\n");
        out
    }
}

fn edge_label(schemas: &Schemas, e: &HyperEdge) -> String {
    match e.action {
        Some(a) => schemas.action_name(a),
        None => "solve".to_string(),
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
