use std::fmt::Write as _;

use crate::gsequent::GSequent;
use crate::lattice::CalculusSpace;
use crate::proof::ProofStep;

/// A DOT string literal.
fn lit(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// One node `w : S` per vertex and one edge per atom, labelled with its type.
pub fn gsequent_dot(g: &GSequent) -> String {
    let mut out = String::from("digraph gsequent {\n");
    for (v, l) in g.labels() {
        writeln!(out, "  {} [label={}];", lit(v.as_str()), lit(&format!("{v} : {l}"))).unwrap();
    }
    for e in g.edges() {
        writeln!(out, "  {} -> {} [label={}];", lit(e.src.as_str()), lit(e.dst.as_str()), lit(e.ty.as_str())).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Steps as boxes with the root at the bottom; arrows run premise to conclusion.
pub fn proof_dot(p: &ProofStep) -> String {
    let mut out = String::from("digraph proof {\n  rankdir=BT;\n  node [shape=box];\n");
    let steps = p.steps();
    let id = |path: &[usize]| if path.is_empty() { "s".to_string() } else { format!("s_{}", path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("_")) };
    for (path, s) in &steps {
        writeln!(out, "  {} [label={}];", id(path), lit(&format!("{}\n{}", s.rule, s.conclusion))).unwrap();
    }
    for (path, s) in &steps {
        for i in 0..s.premises.len() {
            let mut q = path.clone();
            q.push(i);
            writeln!(out, "  {} -> {};", id(&q), id(path)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// Covering pairs of a space, drawn upward.
pub fn hasse_dot(s: &CalculusSpace) -> String {
    let mut out = format!("digraph {} {{\n  rankdir=BT;\n", lit(&format!("{} space", s.direction)));
    for i in 0..s.len() {
        writeln!(out, "  m{i} [label={}];", lit(&s.member_name(i))).unwrap();
    }
    for (a, b) in s.hasse() {
        writeln!(out, "  m{a} -> m{b};").unwrap();
    }
    out.push_str("}\n");
    out
}
