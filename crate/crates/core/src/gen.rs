//! Seeded random generators for g-sequents, grammars, rules, proofs and
//! two-step windows.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::calculus::Calculus;
use crate::g3i::{Formula, Sequent};
use crate::gsequent::{EdgeAtom, GSequent, Vertex};
use crate::proof::{validate_with, ProofStep, ValidateOptions};
use crate::rewriting::{ESystem, EdgeString, Production, Symbol};
use crate::rules::{apply_bottom_up, CheckOptions, Instantiation, Rule, RuleKind};
use crate::search::{prove, prove_randomized, SearchOptions};

const ATOMS: [&str; 3] = ["p", "q", "r"];

pub fn random_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return Formula::atom(ATOMS[rng.gen_range(0..ATOMS.len())]);
    }
    let a = random_formula(rng, depth - 1);
    let b = random_formula(rng, depth - 1);
    if rng.gen_bool(0.75) {
        Formula::imp(a, b)
    } else {
        Formula::or(a, b)
    }
}

/// `w: (=> phi)` for a random formula.
pub fn random_g3i_goal<R: Rng>(rng: &mut R, depth: usize) -> GSequent {
    let f = random_formula(rng, depth);
    GSequent::single("w", Sequent::new(Vec::new(), vec![f]).label())
}

/// A proof of a random goal found by randomized search, if one is found in budget.
pub fn random_g3i_proof<R: Rng>(rng: &mut R, c: &Calculus, depth: usize, opts: &SearchOptions) -> Option<ProofStep> {
    let goal = random_g3i_goal(rng, depth);
    prove_randomized(&goal, c, opts, rng).ok().flatten()
}

pub fn random_symbol<R: Rng>(rng: &mut R, alphabet: &[&str]) -> Symbol {
    let a = alphabet[rng.gen_range(0..alphabet.len())];
    if rng.gen_bool(0.5) {
        Symbol::fwd(a)
    } else {
        Symbol::inv(a)
    }
}

pub fn random_string<R: Rng>(rng: &mut R, alphabet: &[&str], max_len: usize) -> EdgeString {
    let n = rng.gen_range(0..=max_len);
    EdgeString((0..n).map(|_| random_symbol(rng, alphabet)).collect())
}

/// Converse closure of `pairs` random productions.
pub fn random_esystem<R: Rng>(rng: &mut R, alphabet: &[&str], pairs: usize, max_len: usize) -> ESystem {
    let prods: Vec<Production> =
        (0..pairs).map(|_| Production::new(random_symbol(rng, alphabet), random_string(rng, alphabet, max_len))).collect();
    ESystem::close_under_converse(prods)
}

/// A Horn rule with a random head and path; an inverse head gives the backward form.
pub fn random_horn_rule<R: Rng>(rng: &mut R, id: &str, alphabet: &[&str], max_len: usize) -> Rule {
    let head = random_symbol(rng, alphabet);
    let path = random_string(rng, alphabet, max_len);
    if head.inverse {
        Rule::horn_backward(id, head.base.clone(), path)
    } else {
        Rule::horn_forward(id, head.base.clone(), path)
    }
}

fn pick_label<R: Rng>(rng: &mut R, labels: &[&str]) -> String {
    labels[rng.gen_range(0..labels.len())].to_string()
}

/// A connected g-sequent on `n` vertices: a random spanning tree plus `extra` edges.
pub fn random_gsequent<R: Rng>(rng: &mut R, n: usize, alphabet: &[&str], labels: &[&str], extra: usize) -> GSequent {
    let mut g = GSequent::new();
    let names: Vec<Vertex> = (0..n).map(|i| Vertex(format!("v{i}"))).collect();
    for v in &names {
        g.set_label(v.clone(), pick_label(rng, labels).into());
    }
    let add = |g: &mut GSequent, a: &Vertex, b: &Vertex, rng: &mut R| {
        let ty = alphabet[rng.gen_range(0..alphabet.len())];
        let (s, d) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        g.add_edge(EdgeAtom::new(s.clone(), ty, d.clone())).unwrap();
    };
    for i in 1..n {
        let j = rng.gen_range(0..i);
        add(&mut g, &names[i], &names[j], rng);
    }
    for _ in 0..extra {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        add(&mut g, &names[i], &names[j], rng);
    }
    g
}

/// A random polytree: no extra edges.
pub fn random_polytree<R: Rng>(rng: &mut R, n: usize, alphabet: &[&str], labels: &[&str]) -> GSequent {
    random_gsequent(rng, n, alphabet, labels, 0)
}

fn close(g: &GSequent, c: &Calculus) -> Option<ProofStep> {
    let opts = SearchOptions { max_depth: 4, node_limit: Some(400), ..Default::default() };
    prove(g, c, &opts).ok().flatten()
}

/// A proof of `root` grown bottom-up by random rule applications, each branch
/// closed by a short search once `budget` runs out.
pub fn random_proof<R: Rng>(rng: &mut R, c: &Calculus, root: &GSequent, budget: usize) -> Option<ProofStep> {
    if budget == 0 || rng.gen_bool(0.15) {
        return close(root, c);
    }
    let mut apps: Vec<(String, Vec<GSequent>, Instantiation)> = Vec::new();
    for r in c.rules().iter().filter(|r| !r.is_initial()) {
        for (ps, inst) in apply_bottom_up(r, root, CheckOptions::default()).ok()? {
            apps.push((r.id.clone(), ps, inst));
        }
    }
    apps.shuffle(rng);
    for (id, ps, inst) in apps.into_iter().take(3) {
        let share = (budget - 1) / ps.len().max(1);
        let subs: Option<Vec<ProofStep>> = ps.iter().map(|p| random_proof(rng, c, p, share)).collect();
        if let Some(subs) = subs {
            return Some(ProofStep::new(root.clone(), id, inst, subs));
        }
    }
    close(root, c)
}

/// Shapes of two-step windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowKind {
    HornOverLocal,
    LocalOverHorn,
    HornOverExpansion,
    HornOverReach,
    ReachOverHorn,
    HornOverHorn,
}

fn horn_apps<'a>(c: &'a Calculus, g: &GSequent, filter: impl Fn(&Rule) -> bool) -> Vec<(&'a Rule, GSequent, Instantiation)> {
    let mut out = Vec::new();
    for r in c.rules().iter().filter(|r| r.is_horn() && filter(r)) {
        for (mut ps, inst) in apply_bottom_up(r, g, CheckOptions::default()).unwrap_or_default() {
            out.push((r, ps.remove(0), inst));
        }
    }
    out
}

fn apps_of_kind(c: &Calculus, g: &GSequent, kind: fn(&RuleKind) -> bool) -> Vec<(String, Vec<GSequent>, Instantiation)> {
    let mut out = Vec::new();
    for r in c.rules().iter().filter(|r| kind(&r.kind)) {
        for (ps, inst) in apply_bottom_up(r, g, CheckOptions::default()).unwrap_or_default() {
            out.push((r.id.clone(), ps, inst));
        }
    }
    out
}

fn hyps(ps: Vec<GSequent>) -> Vec<ProofStep> {
    ps.into_iter().map(ProofStep::hypothesis).collect()
}

/// A Horn step from `lower` under one application drawn from `upper`.
fn horn_under<R: Rng>(rng: &mut R, c: &Calculus, g: &GSequent, lower: impl Fn(&Rule) -> bool, upper: impl Fn(&GSequent) -> Vec<(String, Vec<GSequent>, Instantiation)>) -> Option<ProofStep> {
    let mut below = horn_apps(c, g, lower);
    below.shuffle(rng);
    for (h, mid, inst) in below {
        let above = upper(&mid);
        if let Some((id, ps, i2)) = above.choose(rng).cloned() {
            let top = ProofStep::new(mid, id, i2, hyps(ps));
            return Some(ProofStep::new(g.clone(), h.id.clone(), inst, vec![top]));
        }
    }
    None
}

/// A step of `kind` with one shared Horn application on each premise.
fn horns_over<R: Rng>(rng: &mut R, c: &Calculus, g: &GSequent, kind: fn(&RuleKind) -> bool) -> Option<ProofStep> {
    let mut lower = apps_of_kind(c, g, kind);
    lower.shuffle(rng);
    for (id, ps, inst) in lower {
        let Some(first) = ps.first() else { continue };
        let mut cands = horn_apps(c, first, |_| true);
        cands.shuffle(rng);
        for (h, _, hinst) in cands {
            let tops: Option<Vec<ProofStep>> = ps
                .iter()
                .map(|p| {
                    let (mut qs, _) = apply_bottom_up(h, p, CheckOptions::default()).ok()?.into_iter().find(|(_, i)| *i == hinst)?;
                    Some(ProofStep::new(p.clone(), h.id.clone(), hinst.clone(), hyps(vec![qs.remove(0)])))
                })
                .collect();
            if let Some(tops) = tops {
                return Some(ProofStep::new(g.clone(), id, inst, tops));
            }
        }
    }
    None
}

fn is_local(k: &RuleKind) -> bool {
    matches!(k, RuleKind::Local { .. })
}

fn is_expansion(k: &RuleKind) -> bool {
    matches!(k, RuleKind::Expansion { .. })
}

fn is_reach(k: &RuleKind) -> bool {
    matches!(k, RuleKind::Reachability { .. })
}

/// A valid two-step derivation of `g` of the given shape, with open leaves.
/// For `HornOverHorn` the lower rule lies outside `inside` and the upper inside.
pub fn random_window<R: Rng>(rng: &mut R, c: &Calculus, g: &GSequent, kind: WindowKind, inside: &[String]) -> Option<ProofStep> {
    let w = match kind {
        WindowKind::HornOverLocal => horn_under(rng, c, g, |_| true, |m| apps_of_kind(c, m, is_local)),
        WindowKind::HornOverExpansion => horn_under(rng, c, g, |_| true, |m| apps_of_kind(c, m, is_expansion)),
        WindowKind::HornOverReach => horn_under(rng, c, g, |_| true, |m| apps_of_kind(c, m, is_reach)),
        WindowKind::LocalOverHorn => horns_over(rng, c, g, is_local),
        WindowKind::ReachOverHorn => horns_over(rng, c, g, is_reach),
        WindowKind::HornOverHorn => horn_under(
            rng,
            c,
            g,
            |r| !inside.contains(&r.id),
            |m| {
                horn_apps(c, m, |r| inside.contains(&r.id))
                    .into_iter()
                    .map(|(r, p, i)| (r.id.clone(), vec![p], i))
                    .collect()
            },
        ),
    }?;
    validate_with(&w, c, ValidateOptions::derivation()).ok()?;
    Some(w)
}

/// Put a weakening step at a random position. The weakened edge joins root
/// vertices; every step below it gains the edge, and the siblings on that path
/// are weakened too. The root conclusion therefore grows by one edge.
pub fn inject_pw<R: Rng>(rng: &mut R, p: &ProofStep, c: &Calculus, alphabet: &[&str]) -> Option<ProofStep> {
    let roots: Vec<Vertex> = p.conclusion.vertices().cloned().collect();
    let paths: Vec<Vec<usize>> = p.steps().into_iter().map(|(path, _)| path).collect();
    for _ in 0..8 {
        let path = paths.choose(rng)?.clone();
        let sigma = EdgeAtom::new(
            roots.choose(rng)?.clone(),
            alphabet[rng.gen_range(0..alphabet.len())],
            roots.choose(rng)?.clone(),
        );
        let target = p.at(&path)?;
        if target.conclusion.contains_edge(&sigma) {
            continue;
        }
        let out = weaken_along(p, &path, &sigma);
        if validate_with(&out, c, ValidateOptions::derivation()).is_ok() {
            return Some(out);
        }
    }
    None
}

fn weaken_along(s: &ProofStep, path: &[usize], sigma: &EdgeAtom) -> ProofStep {
    let Some((&i, rest)) = path.split_first() else {
        return ProofStep::weakening(s.clone(), sigma.clone());
    };
    let premises = s
        .premises
        .iter()
        .enumerate()
        .map(|(j, q)| {
            if j == i {
                weaken_along(q, rest, sigma)
            } else if q.conclusion.contains_edge(sigma) {
                q.clone()
            } else {
                ProofStep::weakening(q.clone(), sigma.clone())
            }
        })
        .collect();
    let mut g = s.conclusion.clone();
    g.add_edge(sigma.clone()).expect("root vertices persist upwards");
    ProofStep::new(g, s.rule.clone(), s.inst.clone(), premises)
}
