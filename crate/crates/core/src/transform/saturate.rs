use crate::gsequent::{EdgeAtom, GSequent, Vertex};
use crate::rules::{walks_from, Rule, RuleKind};

/// One inverse-Horn application: `edge` was added because `walk` spelled the
/// rule's path at that moment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationStep {
    pub rule: String,
    pub walk: Vec<Vertex>,
    pub edge: EdgeAtom,
}

/// Add every edge some inverse Horn rule permits, until nothing changes.
/// Rules are tried in the order given, vertices in sorted order.
pub fn invhorn_trace(g: &GSequent, rules: &[&Rule]) -> (GSequent, Vec<SaturationStep>) {
    let mut out = g.clone();
    let mut steps = Vec::new();
    let vertices: Vec<Vertex> = g.vertices().cloned().collect();
    loop {
        let before = steps.len();
        for rule in rules {
            let RuleKind::Horn { path, .. } = &rule.kind else { continue };
            for w in &vertices {
                for walk in walks_from(&out, w, path) {
                    let edge = rule.horn_added_edge(w, walk.last().unwrap()).unwrap();
                    if out.add_edge(edge.clone()).expect("walk ends are vertices") {
                        steps.push(SaturationStep { rule: rule.id.clone(), walk, edge });
                    }
                }
            }
        }
        if steps.len() == before {
            return (out, steps);
        }
    }
}

pub fn invhorn_saturate(g: &GSequent, rules: &[&Rule]) -> GSequent {
    invhorn_trace(g, rules).0
}

/// No inverse application of `rules` adds an edge.
pub fn is_saturated(g: &GSequent, rules: &[&Rule]) -> bool {
    rules.iter().all(|rule| match &rule.kind {
        RuleKind::Horn { path, .. } => g.vertices().all(|w| {
            walks_from(g, w, path)
                .iter()
                .all(|walk| g.contains_edge(&rule.horn_added_edge(w, walk.last().unwrap()).unwrap()))
        }),
        _ => true,
    })
}
