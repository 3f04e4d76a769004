//! Ready-made calculi and g-sequents used by tests, the acceptance suite and the CLI.

use std::collections::BTreeMap;

use crate::calculus::Calculus;
use crate::g3i::{build_g3i, sequent};
use crate::gsequent::{Alphabet, GSequent, Vertex};
use crate::proof::ProofStep;
use crate::rules::Instantiation;
use crate::rewriting::{ESystem, EdgeString, Symbol};
use crate::rules::{Always, EdgeLanguage, Relation, Rule, StructuralConstraint};

fn word(s: &[&str]) -> EdgeString {
    EdgeString(s.iter().map(|x| Symbol::fwd(*x)).collect())
}

fn always() -> Relation {
    Relation::new(Always)
}

fn init_rule() -> Rule {
    Rule::initial("init", StructuralConstraint::single_edge("x", "y", EdgeLanguage::new(ESystem::empty(), "a")), always())
}

fn example_horn() -> Vec<Rule> {
    vec![
        Rule::horn_forward("h1", "a", word(&["c", "c"])),
        Rule::horn_forward("h2", "a", EdgeString::empty()),
        Rule::horn_backward("h3", "b", word(&["a"])),
    ]
}

/// Three Horn rules over `{a, b, c}` and one initial rule with an empty constraint grammar.
pub fn example_calculus() -> Calculus {
    let mut rules = example_horn();
    rules.push(init_rule());
    Calculus::new("example", Alphabet::new(["a", "b", "c"]), rules).expect("well-formed")
}

/// The example calculus plus one rule of every other kind.
pub fn synthetic_calculus() -> Calculus {
    let mut rules = example_horn();
    rules.extend([
        init_rule(),
        Rule::local("split", always(), 2),
        Rule::local("step", always(), 1),
        Rule::expansion("grow", always(), Symbol::fwd("c")),
        Rule::reachability("hop", vec![EdgeLanguage::new(ESystem::empty(), "b")], always()),
    ]);
    Calculus::new("synthetic", Alphabet::new(["a", "b", "c"]), rules).expect("well-formed")
}

pub fn g3i_explicit() -> Calculus {
    build_g3i(true)
}

pub fn g3i_implicit() -> Calculus {
    build_g3i(false)
}

/// Four vertices and six edges, with a self-loop and an undirected cycle.
pub fn cyclic_example() -> GSequent {
    let mut g = GSequent::new();
    for i in 1..=4 {
        g = g.with_vertex(format!("u{i}"), format!("S{i}"));
    }
    g.with_edge("u1", "a", "u3")
        .with_edge("u2", "a", "u4")
        .with_edge("u2", "b", "u3")
        .with_edge("u1", "c", "u2")
        .with_edge("u3", "c", "u4")
        .with_edge("u4", "c", "u4")
}

/// A 5-vertex polytree with four edges.
pub fn polytree_example() -> GSequent {
    let mut g = GSequent::new();
    for i in 1..=5 {
        g = g.with_vertex(format!("w{i}"), format!("S{i}"));
    }
    g.with_edge("w1", "c", "w2").with_edge("w1", "b", "w3").with_edge("w4", "b", "w2").with_edge("w5", "a", "w2")
}

fn id_leaf(g: GSequent, w: &str, u: &str) -> ProofStep {
    let embedding: BTreeMap<Vertex, Vertex> = [("w".into(), w.into()), ("u".into(), u.into())].into();
    ProofStep::new(g, "id", Instantiation::Initial { embedding }, vec![])
}

fn horn_step(rule: &str, walk: &[&str], premise: ProofStep, conclusion: GSequent) -> ProofStep {
    let walk = walk.iter().map(|v| Vertex::from(*v)).collect();
    ProofStep::new(conclusion, rule, Instantiation::Horn { walk }, vec![premise])
}

/// `(id)` over a loop `wEw`, then `(ref)` removing it.
pub fn id_ref_proof() -> ProofStep {
    let g = GSequent::single("w", sequent(&["p"], &["p"]));
    horn_step("ref", &["w"], id_leaf(g.clone().with_edge("w", "E", "w"), "w", "w"), g)
}

/// `(id)` over `wEv` with `wEu, uEv` present, then `(tra)` removing `wEv`.
pub fn id_tra_proof() -> ProofStep {
    let g = GSequent::new()
        .with_vertex("w", sequent(&["p"], &[]))
        .with_vertex("u", sequent(&[], &[]))
        .with_vertex("v", sequent(&[], &["p"]))
        .with_edge("w", "E", "u")
        .with_edge("u", "E", "v");
    horn_step("tra", &["w", "u", "v"], id_leaf(g.clone().with_edge("w", "E", "v"), "w", "v"), g)
}

/// `(imp_l)` with `w = u` over a loop, closed by `(id)` on both sides, then `(ref)`.
pub fn imp_l_ref_proof() -> ProofStep {
    let concl = sequent(&["p", "p -> q"], &["q"]);
    let left = sequent(&["p", "p -> q"], &["q", "p"]);
    let right = sequent(&["p", "p -> q", "q"], &["q"]);
    let looped = |l| GSequent::single("w", l).with_edge("w", "E", "w");
    let imp = ProofStep::new(
        looped(concl.clone()),
        "imp_l",
        Instantiation::Reachability { w: "w".into(), u: "w".into() },
        vec![id_leaf(looped(left), "w", "w"), id_leaf(looped(right), "w", "w")],
    );
    horn_step("ref", &["w"], imp, GSequent::single("w", concl))
}
