//! Structural constraints, sequent constraints and the rule schemas: checking an
//! instance, enumerating bottom-up applications, and absorbing or fracturing the
//! grammars a rule carries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use thiserror::Error;

use crate::gsequent::{Delta, EdgeAtom, EdgeType, GSequent, SequentLabel, Vertex};
use crate::reach::GraphReach;
use crate::rewriting::{ESystem, EdgeString, Production, ProductionPair, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule `{rule}` expects {expected} premise(s), got {got}")]
    Arity { rule: String, expected: usize, got: usize },
    #[error("rule `{0}`: {1}")]
    Shape(String, String),
    #[error("rule `{0}`: structural constraint not satisfied: {1}")]
    Constraint(String, String),
    #[error("rule `{0}`: sequent constraint `{1}` does not hold")]
    Relation(String, String),
    #[error("rule `{0}`: vertex `{1}` is not fresh")]
    Freshness(String, String),
    #[error("rule `{0}`: instantiation does not fit the rule: {1}")]
    Instantiation(String, String),
    #[error("sequent constraint `{0}` cannot enumerate premises")]
    NotEnumerable(String),
    #[error("unknown sequent constraint `{0}`")]
    UnknownRelation(String),
    #[error("constraint is not a tree: {0}")]
    NotATree(String),
}

/// A relation between the sequents a rule touches and the untouched context.
///
/// Arguments are ordered premise sequents first, then conclusion sequents:
/// initial `[L(w1) .. L(wn)]`, local `[S1 .. Sn, S]`, expansion `[S1, S2, S]`,
/// reachability `[S1, S1', .., Sn, Sn', S, S']`.
pub trait SequentRelation: Send + Sync {
    fn name(&self) -> &str;

    fn holds(&self, args: &[&SequentLabel], delta: &Delta) -> bool;

    /// Candidate premise sequents for the given conclusion sequents, flattened
    /// in argument order. `None` when the relation cannot enumerate.
    fn synthesize(&self, _conclusion: &[&SequentLabel], _premises: usize, _delta: &Delta) -> Option<Vec<Vec<SequentLabel>>> {
        None
    }
}

/// Shared handle to a named sequent constraint; compared by name.
#[derive(Clone)]
pub struct Relation(pub Arc<dyn SequentRelation>);

impl Relation {
    pub fn new<R: SequentRelation + 'static>(r: R) -> Self {
        Relation(Arc::new(r))
    }

    pub fn name(&self) -> &str {
        self.0.name()
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation({})", self.name())
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl Eq for Relation {}

/// The full relation. Synthesis copies the conclusion sequents upwards.
pub struct Always;

impl SequentRelation for Always {
    fn name(&self) -> &str {
        "true"
    }

    fn holds(&self, _args: &[&SequentLabel], _delta: &Delta) -> bool {
        true
    }

    fn synthesize(&self, conclusion: &[&SequentLabel], premises: usize, _delta: &Delta) -> Option<Vec<Vec<SequentLabel>>> {
        let row: Vec<SequentLabel> = match conclusion.len() {
            // reachability: one (S, S') pair per premise
            2 => (0..premises).flat_map(|_| conclusion.iter().map(|s| (*s).clone())).collect(),
            _ => (0..premises).map(|_| conclusion[0].clone()).collect(),
        };
        Some(vec![row])
    }
}

/// Named relations available to calculus files.
#[derive(Clone)]
pub struct Registry {
    relations: BTreeMap<String, Relation>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { relations: BTreeMap::new() }
    }

    /// `true` plus the intuitionistic fragment's relations.
    pub fn standard() -> Self {
        let mut r = Registry::empty();
        r.register(Relation::new(Always));
        for rel in crate::g3i::relations() {
            r.register(rel);
        }
        r
    }

    pub fn register(&mut self, r: Relation) {
        self.relations.insert(r.name().to_string(), r);
    }

    pub fn get(&self, name: &str) -> Result<Relation, RuleError> {
        self.relations.get(name).cloned().ok_or_else(|| RuleError::UnknownRelation(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.relations.keys()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::standard()
    }
}

/// The language `grammar(start)` attached to one constraint edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeLanguage {
    pub grammar: ESystem,
    pub start: EdgeType,
}

impl EdgeLanguage {
    pub fn new(grammar: ESystem, start: impl Into<EdgeType>) -> Self {
        EdgeLanguage { grammar, start: start.into() }
    }

    /// The singleton language `{start}`.
    pub fn plain(start: impl Into<EdgeType>) -> Self {
        EdgeLanguage { grammar: ESystem::empty(), start: start.into() }
    }

    pub fn start_symbol(&self) -> Symbol {
        Symbol::fwd(self.start.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintEdge {
    pub src: Vertex,
    pub dst: Vertex,
    pub language: EdgeLanguage,
}

/// A finite labelled tree whose edges demand language-constrained walks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StructuralConstraint {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<ConstraintEdge>,
}

impl StructuralConstraint {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<ConstraintEdge>) -> Result<Self, RuleError> {
        let c = StructuralConstraint { vertices, edges };
        c.check_tree()?;
        Ok(c)
    }

    /// `({w, u}, {(w, u)})` labelled with `language`.
    pub fn single_edge(w: &str, u: &str, language: EdgeLanguage) -> Self {
        StructuralConstraint {
            vertices: vec![w.into(), u.into()],
            edges: vec![ConstraintEdge { src: w.into(), dst: u.into(), language }],
        }
    }

    pub fn check_tree(&self) -> Result<(), RuleError> {
        let vs: BTreeSet<&Vertex> = self.vertices.iter().collect();
        if vs.len() != self.vertices.len() {
            return Err(RuleError::NotATree("repeated vertex".into()));
        }
        for e in &self.edges {
            if !vs.contains(&e.src) || !vs.contains(&e.dst) {
                return Err(RuleError::NotATree(format!("edge {} {} leaves the vertex set", e.src, e.dst)));
            }
        }
        if self.vertices.is_empty() {
            return if self.edges.is_empty() { Ok(()) } else { Err(RuleError::NotATree("edges without vertices".into())) };
        }
        let mut g = GSequent::new();
        for v in &self.vertices {
            g.set_label(v.clone(), SequentLabel::from(""));
        }
        for e in &self.edges {
            if !g.add_edge(EdgeAtom { src: e.src.clone(), ty: EdgeType::from("t"), dst: e.dst.clone() }).unwrap() {
                return Err(RuleError::NotATree("parallel edges".into()));
            }
        }
        if g.is_polytree() {
            Ok(())
        } else {
            Err(RuleError::NotATree("not connected or has a cycle".into()))
        }
    }

    pub fn grammar(&self) -> ESystem {
        self.edges.iter().fold(ESystem::empty(), |acc, e| acc.union(&e.language.grammar))
    }

    fn map_grammars(&self, f: impl Fn(&ESystem) -> ESystem) -> Self {
        StructuralConstraint {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| ConstraintEdge {
                    src: e.src.clone(),
                    dst: e.dst.clone(),
                    language: EdgeLanguage { grammar: f(&e.language.grammar), start: e.language.start.clone() },
                })
                .collect(),
        }
    }

    /// Vertices renamed to their positions so that equality ignores names.
    fn canonical(&self) -> (usize, Vec<(usize, usize, EdgeLanguage)>) {
        let pos = |v: &Vertex| self.vertices.iter().position(|x| x == v).unwrap();
        let mut edges: Vec<_> = self.edges.iter().map(|e| (pos(&e.src), pos(&e.dst), e.language.clone())).collect();
        edges.sort();
        (self.vertices.len(), edges)
    }
}

/// Whether `g` satisfies `c` once constraint vertices are sent along `embedding`.
pub fn constraint_satisfied(
    g: &GSequent,
    c: &StructuralConstraint,
    embedding: &BTreeMap<Vertex, Vertex>,
) -> Result<bool, RuleError> {
    for v in &c.vertices {
        match embedding.get(v) {
            None => return Err(RuleError::Instantiation("constraint".into(), format!("vertex {v} is not embedded"))),
            Some(x) if !g.contains_vertex(x) => {
                return Err(RuleError::Instantiation("constraint".into(), format!("{v} is sent to {x}, which is absent")))
            }
            _ => {}
        }
    }
    let mut solvers: Vec<(&ESystem, GraphReach<'_>)> = Vec::new();
    for e in &c.edges {
        let idx = match solvers.iter().position(|(gr, _)| *gr == &e.language.grammar) {
            Some(i) => i,
            None => {
                solvers.push((&e.language.grammar, GraphReach::new(g, &e.language.grammar)));
                solvers.len() - 1
            }
        };
        if !solvers[idx].1.holds(&e.language.start_symbol(), &embedding[&e.src], &embedding[&e.dst]) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Initial { constraint: StructuralConstraint, relation: Relation },
    Local { relation: Relation, premises: usize },
    /// The new edge runs `w -> u` for a plain symbol and `u -> w` for its converse.
    Expansion { relation: Relation, edge: Symbol },
    Horn { edge: EdgeType, path: EdgeString, backward: bool },
    Reachability { family: Vec<EdgeLanguage>, relation: Relation },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub kind: RuleKind,
}

/// Identity-free description of a rule, used for calculus equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKey {
    Initial { vertices: usize, edges: Vec<(usize, usize, EdgeLanguage)>, relation: String },
    Local { relation: String, premises: usize },
    Expansion { relation: String, edge: Symbol },
    Horn { edge: EdgeType, path: EdgeString },
    Reachability { family: Vec<EdgeLanguage>, relation: String },
}

/// Which vertices and walks a rule application uses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instantiation {
    /// Constraint vertex to g-sequent vertex.
    Initial { embedding: BTreeMap<Vertex, Vertex> },
    Local { w: Vertex },
    Expansion { w: Vertex, u: Vertex, edge: Symbol },
    /// A walk in the conclusion spelling the rule's path, from `w` to `u`.
    Horn { walk: Vec<Vertex> },
    Reachability { w: Vertex, u: Vertex },
    /// Path weakening: the premise adds one edge between existing vertices.
    Weakening { edge: EdgeAtom },
    /// An open leaf of a derivation.
    Hypothesis,
}

/// Knobs for instance checking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Reject non-injective embeddings and reachability instances with `w = u`.
    pub strict: bool,
}

impl Rule {
    pub fn initial(id: &str, constraint: StructuralConstraint, relation: Relation) -> Self {
        Rule { id: id.into(), kind: RuleKind::Initial { constraint, relation } }
    }

    pub fn local(id: &str, relation: Relation, premises: usize) -> Self {
        Rule { id: id.into(), kind: RuleKind::Local { relation, premises } }
    }

    pub fn expansion(id: &str, relation: Relation, edge: Symbol) -> Self {
        Rule { id: id.into(), kind: RuleKind::Expansion { relation, edge } }
    }

    pub fn horn_forward(id: &str, edge: impl Into<EdgeType>, path: EdgeString) -> Self {
        Rule { id: id.into(), kind: RuleKind::Horn { edge: edge.into(), path, backward: false } }
    }

    pub fn horn_backward(id: &str, edge: impl Into<EdgeType>, path: EdgeString) -> Self {
        Rule { id: id.into(), kind: RuleKind::Horn { edge: edge.into(), path, backward: true } }
    }

    pub fn reachability(id: &str, family: Vec<EdgeLanguage>, relation: Relation) -> Self {
        Rule { id: id.into(), kind: RuleKind::Reachability { family, relation } }
    }

    /// The single Horn rule of a production pair, named after its forward member.
    pub fn horn_of_pair(pair: &ProductionPair) -> Self {
        let p = &pair.forward;
        Rule::horn_forward(&horn_id(p), p.lhs.base.clone(), p.rhs.clone())
    }

    pub fn is_horn(&self) -> bool {
        matches!(self.kind, RuleKind::Horn { .. })
    }

    pub fn is_initial(&self) -> bool {
        matches!(self.kind, RuleKind::Initial { .. })
    }

    pub fn is_reachability(&self) -> bool {
        matches!(self.kind, RuleKind::Reachability { .. })
    }

    /// A reachability rule all of whose languages are single symbols.
    pub fn is_transmission(&self) -> bool {
        match &self.kind {
            RuleKind::Reachability { family, .. } => family.iter().all(|l| l.grammar.is_empty()),
            _ => false,
        }
    }

    pub fn premise_count(&self) -> usize {
        match &self.kind {
            RuleKind::Initial { .. } => 0,
            RuleKind::Local { premises, .. } => *premises,
            RuleKind::Expansion { .. } | RuleKind::Horn { .. } => 1,
            RuleKind::Reachability { family, .. } => family.len(),
        }
    }

    pub fn relation(&self) -> Option<&Relation> {
        match &self.kind {
            RuleKind::Initial { relation, .. }
            | RuleKind::Local { relation, .. }
            | RuleKind::Expansion { relation, .. }
            | RuleKind::Reachability { relation, .. } => Some(relation),
            RuleKind::Horn { .. } => None,
        }
    }

    /// The production pair of a Horn rule.
    pub fn horn_pair(&self) -> Option<ProductionPair> {
        match &self.kind {
            RuleKind::Horn { edge, path, backward } => {
                let p = if *backward {
                    Production::new(Symbol::inv(edge.clone()), path.clone())
                } else {
                    Production::new(Symbol::fwd(edge.clone()), path.clone())
                };
                Some(ProductionPair::of(&p))
            }
            _ => None,
        }
    }

    /// The edge atom a Horn rule adds in its premise for a walk from `w` to `u`.
    pub fn horn_added_edge(&self, w: &Vertex, u: &Vertex) -> Option<EdgeAtom> {
        match &self.kind {
            RuleKind::Horn { edge, backward: false, .. } => Some(EdgeAtom { src: w.clone(), ty: edge.clone(), dst: u.clone() }),
            RuleKind::Horn { edge, backward: true, .. } => Some(EdgeAtom { src: u.clone(), ty: edge.clone(), dst: w.clone() }),
            _ => None,
        }
    }

    pub fn key(&self) -> RuleKey {
        match &self.kind {
            RuleKind::Initial { constraint, relation } => {
                let (vertices, edges) = constraint.canonical();
                RuleKey::Initial { vertices, edges, relation: relation.name().to_string() }
            }
            RuleKind::Local { relation, premises } => RuleKey::Local { relation: relation.name().to_string(), premises: *premises },
            RuleKind::Expansion { relation, edge } => RuleKey::Expansion { relation: relation.name().to_string(), edge: edge.clone() },
            RuleKind::Horn { .. } => {
                let f = self.horn_pair().unwrap().forward;
                RuleKey::Horn { edge: f.lhs.base, path: f.rhs }
            }
            RuleKind::Reachability { family, relation } => {
                RuleKey::Reachability { family: family.clone(), relation: relation.name().to_string() }
            }
        }
    }

    /// Edge types mentioned by the rule.
    pub fn edge_types(&self) -> BTreeSet<EdgeType> {
        let mut out = rule_grammar(self).edge_types();
        match &self.kind {
            RuleKind::Initial { constraint, .. } => out.extend(constraint.edges.iter().map(|e| e.language.start.clone())),
            RuleKind::Expansion { edge, .. } => {
                out.insert(edge.base.clone());
            }
            RuleKind::Reachability { family, .. } => out.extend(family.iter().map(|l| l.start.clone())),
            _ => {}
        }
        out
    }
}

/// Deterministic id of the Horn rule generated from a forward production.
pub fn horn_id(p: &Production) -> String {
    let rhs = if p.rhs.is_empty() { "eps".to_string() } else { p.rhs.symbols().iter().map(|s| s.to_string()).join(",") };
    format!("h({}->{})", p.lhs, rhs)
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

/// `G(rule)`: every grammar participating in the rule, or a Horn rule's pair.
pub fn rule_grammar(rule: &Rule) -> ESystem {
    match &rule.kind {
        RuleKind::Initial { constraint, .. } => constraint.grammar(),
        RuleKind::Reachability { family, .. } => family.iter().fold(ESystem::empty(), |acc, l| acc.union(&l.grammar)),
        RuleKind::Horn { .. } => ESystem::from_pairs([&rule.horn_pair().unwrap()]),
        RuleKind::Local { .. } | RuleKind::Expansion { .. } => ESystem::empty(),
    }
}

fn map_rule_grammars(rule: &Rule, f: impl Fn(&ESystem) -> ESystem) -> Rule {
    let kind = match &rule.kind {
        RuleKind::Initial { constraint, relation } => {
            RuleKind::Initial { constraint: constraint.map_grammars(&f), relation: relation.clone() }
        }
        RuleKind::Reachability { family, relation } => RuleKind::Reachability {
            family: family.iter().map(|l| EdgeLanguage { grammar: f(&l.grammar), start: l.start.clone() }).collect(),
            relation: relation.clone(),
        },
        other => other.clone(),
    };
    Rule { id: rule.id.clone(), kind }
}

/// `rule (+) g`: union `g` into every constraint grammar.
pub fn absorb_rule(rule: &Rule, g: &ESystem) -> Rule {
    map_rule_grammars(rule, |x| x.union(g))
}

/// `rule (-) g`: remove `g` from every constraint grammar.
pub fn fracture_rule(rule: &Rule, g: &ESystem) -> Rule {
    map_rule_grammars(rule, |x| x.minus(g))
}

fn shape(rule: &Rule, msg: impl Into<String>) -> RuleError {
    RuleError::Shape(rule.id.clone(), msg.into())
}

fn arity(rule: &Rule, premises: usize) -> Result<(), RuleError> {
    let expected = rule.premise_count();
    if premises != expected {
        return Err(RuleError::Arity { rule: rule.id.clone(), expected, got: premises });
    }
    Ok(())
}

fn vertex_in(rule: &Rule, g: &GSequent, v: &Vertex, what: &str) -> Result<(), RuleError> {
    if g.contains_vertex(v) {
        Ok(())
    } else {
        Err(RuleError::Instantiation(rule.id.clone(), format!("{what} vertex {v} is not in the conclusion")))
    }
}

/// The premise equals the conclusion outside the sequents at `active`.
fn same_context(rule: &Rule, premise: &GSequent, conclusion: &GSequent, active: &[&Vertex]) -> Result<(), RuleError> {
    if !premise.same_graph(conclusion) {
        return Err(shape(rule, "premise and conclusion differ in their edges or vertices"));
    }
    for (v, l) in conclusion.labels() {
        if !active.contains(&v) && premise.label(v) != Some(l) {
            return Err(shape(rule, format!("sequent at {v} changes but is not active")));
        }
    }
    Ok(())
}

/// Try the premise groups in their given order, then in every other order.
fn holds_permuted(relation: &Relation, groups: &[Vec<&SequentLabel>], tail: &[&SequentLabel], delta: &Delta) -> bool {
    let n = groups.len();
    let call = |order: &[usize]| {
        let mut args: Vec<&SequentLabel> = order.iter().flat_map(|&i| groups[i].iter().copied()).collect();
        args.extend_from_slice(tail);
        relation.0.holds(&args, delta)
    };
    let identity: Vec<usize> = (0..n).collect();
    if call(&identity) {
        return true;
    }
    n > 1 && (0..n).permutations(n).any(|p| p != identity && call(&p))
}

/// Decide whether `premises / conclusion` is an application of `rule` as
/// described by `inst`.
pub fn check_instance(
    rule: &Rule,
    premises: &[&GSequent],
    conclusion: &GSequent,
    inst: &Instantiation,
    opts: CheckOptions,
) -> Result<(), RuleError> {
    arity(rule, premises.len())?;
    let bad_inst = || RuleError::Instantiation(rule.id.clone(), format!("{inst:?} does not match a {} rule", kind_name(rule)));
    match (&rule.kind, inst) {
        (RuleKind::Initial { constraint, relation }, Instantiation::Initial { embedding }) => {
            if opts.strict {
                let image: BTreeSet<&Vertex> = constraint.vertices.iter().filter_map(|v| embedding.get(v)).collect();
                if image.len() != constraint.vertices.len() {
                    return Err(RuleError::Instantiation(rule.id.clone(), "embedding is not injective".into()));
                }
            }
            if !constraint_satisfied(conclusion, constraint, embedding).map_err(|e| match e {
                RuleError::Instantiation(_, m) => RuleError::Instantiation(rule.id.clone(), m),
                e => e,
            })? {
                return Err(RuleError::Constraint(rule.id.clone(), "no walk in the constraint language".into()));
            }
            let image: Vec<&Vertex> = constraint.vertices.iter().map(|v| &embedding[v]).collect();
            let args: Vec<&SequentLabel> = image.iter().map(|v| conclusion.label(v).unwrap()).collect();
            let delta = conclusion.delta_without(&image);
            if !relation.0.holds(&args, &delta) {
                return Err(RuleError::Relation(rule.id.clone(), relation.name().into()));
            }
            Ok(())
        }
        (RuleKind::Local { relation, .. }, Instantiation::Local { w }) => {
            vertex_in(rule, conclusion, w, "active")?;
            for p in premises {
                same_context(rule, p, conclusion, &[w])?;
            }
            let groups: Vec<Vec<&SequentLabel>> = premises.iter().map(|p| vec![p.label(w).unwrap()]).collect();
            let delta = conclusion.delta_without(&[w]);
            if !holds_permuted(relation, &groups, &[conclusion.label(w).unwrap()], &delta) {
                return Err(RuleError::Relation(rule.id.clone(), relation.name().into()));
            }
            Ok(())
        }
        (RuleKind::Expansion { relation, edge }, Instantiation::Expansion { w, u, edge: used }) => {
            if edge != used {
                return Err(bad_inst());
            }
            vertex_in(rule, conclusion, w, "active")?;
            if conclusion.contains_vertex(u) {
                return Err(RuleError::Freshness(rule.id.clone(), u.to_string()));
            }
            let premise = premises[0];
            let sigma = expansion_edge(w, u, edge);
            let mut expected = conclusion.clone();
            expected.set_label(u.clone(), premise.label(u).cloned().ok_or_else(|| shape(rule, format!("premise lacks {u}")))?);
            expected.set_label(w.clone(), premise.label(w).unwrap().clone());
            expected.add_edge(sigma).unwrap();
            if &expected != premise {
                return Err(shape(rule, "premise is not the conclusion plus the new vertex and edge"));
            }
            let args = [premise.label(w).unwrap(), premise.label(u).unwrap(), conclusion.label(w).unwrap()];
            if !relation.0.holds(&args, &conclusion.delta_without(&[w])) {
                return Err(RuleError::Relation(rule.id.clone(), relation.name().into()));
            }
            Ok(())
        }
        (RuleKind::Horn { path, .. }, Instantiation::Horn { walk }) => {
            if walk.is_empty() || !conclusion.walk_spells(walk, path) {
                return Err(RuleError::Constraint(rule.id.clone(), format!("walk does not spell {path} in the conclusion")));
            }
            let alpha = rule.horn_added_edge(&walk[0], walk.last().unwrap()).unwrap();
            let mut expected = conclusion.clone();
            expected.add_edge(alpha).unwrap();
            if &expected != premises[0] {
                return Err(shape(rule, "premise is not the conclusion plus the Horn edge"));
            }
            Ok(())
        }
        (RuleKind::Reachability { family, relation }, Instantiation::Reachability { w, u }) => {
            vertex_in(rule, conclusion, w, "active")?;
            vertex_in(rule, conclusion, u, "active")?;
            if opts.strict && w == u {
                return Err(RuleError::Instantiation(rule.id.clone(), "w and u coincide".into()));
            }
            for (p, lang) in premises.iter().zip(family) {
                same_context(rule, p, conclusion, &[w, u])?;
                if !GraphReach::new(p, &lang.grammar).holds(&lang.start_symbol(), w, u) {
                    return Err(RuleError::Constraint(rule.id.clone(), format!("no {} walk from {w} to {u}", lang.start)));
                }
            }
            let groups: Vec<Vec<&SequentLabel>> = premises.iter().map(|p| vec![p.label(w).unwrap(), p.label(u).unwrap()]).collect();
            let tail = [conclusion.label(w).unwrap(), conclusion.label(u).unwrap()];
            if !holds_permuted(relation, &groups, &tail, &conclusion.delta_without(&[w, u])) {
                return Err(RuleError::Relation(rule.id.clone(), relation.name().into()));
            }
            Ok(())
        }
        _ => Err(bad_inst()),
    }
}

pub fn is_instance(rule: &Rule, premises: &[&GSequent], conclusion: &GSequent, inst: &Instantiation, opts: CheckOptions) -> bool {
    check_instance(rule, premises, conclusion, inst, opts).is_ok()
}

/// Path weakening: the conclusion is the premise plus one edge on existing vertices.
pub fn check_weakening(premise: &GSequent, conclusion: &GSequent, edge: &EdgeAtom) -> Result<(), RuleError> {
    let mut expected = premise.clone();
    expected.add_edge(edge.clone()).map_err(|e| RuleError::Shape("pw".into(), e.to_string()))?;
    if &expected != conclusion {
        return Err(RuleError::Shape("pw".into(), "conclusion is not the premise plus the weakened edge".into()));
    }
    Ok(())
}

fn kind_name(rule: &Rule) -> &'static str {
    match rule.kind {
        RuleKind::Initial { .. } => "initial",
        RuleKind::Local { .. } => "local",
        RuleKind::Expansion { .. } => "expansion",
        RuleKind::Horn { .. } => "Horn",
        RuleKind::Reachability { .. } => "reachability",
    }
}

pub fn expansion_edge(w: &Vertex, u: &Vertex, edge: &Symbol) -> EdgeAtom {
    if edge.inverse {
        EdgeAtom { src: u.clone(), ty: edge.base.clone(), dst: w.clone() }
    } else {
        EdgeAtom { src: w.clone(), ty: edge.base.clone(), dst: u.clone() }
    }
}

/// Every walk end `u` reachable from `w` along `path`, with one walk for each.
pub fn walks_from(g: &GSequent, w: &Vertex, path: &EdgeString) -> Vec<Vec<Vertex>> {
    let mut frontier: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::from([(w.clone(), vec![w.clone()])]);
    for sym in path.symbols() {
        let mut next = BTreeMap::new();
        for (v, walk) in &frontier {
            for x in g.step(v, sym) {
                next.entry(x.clone()).or_insert_with(|| {
                    let mut wk = walk.clone();
                    wk.push(x);
                    wk
                });
            }
        }
        frontier = next;
    }
    frontier.into_values().collect()
}

/// Every bottom-up application of `rule` to `conclusion`, each one checked.
pub fn apply_bottom_up(rule: &Rule, conclusion: &GSequent, opts: CheckOptions) -> Result<Vec<(Vec<GSequent>, Instantiation)>, RuleError> {
    let mut out = Vec::new();
    let vertices: Vec<Vertex> = conclusion.vertices().cloned().collect();
    match &rule.kind {
        RuleKind::Initial { constraint, .. } => {
            let k = constraint.vertices.len();
            for images in (0..k).map(|_| vertices.iter()).multi_cartesian_product() {
                let embedding: BTreeMap<Vertex, Vertex> =
                    constraint.vertices.iter().cloned().zip(images.into_iter().cloned()).collect();
                let inst = Instantiation::Initial { embedding };
                if is_instance(rule, &[], conclusion, &inst, opts) {
                    out.push((Vec::new(), inst));
                }
            }
            if k == 0 {
                let inst = Instantiation::Initial { embedding: BTreeMap::new() };
                if is_instance(rule, &[], conclusion, &inst, opts) {
                    out.push((Vec::new(), inst));
                }
            }
        }
        RuleKind::Local { relation, premises } => {
            for w in &vertices {
                let delta = conclusion.delta_without(&[w]);
                let rows = relation.0.synthesize(&[conclusion.label(w).unwrap()], *premises, &delta).ok_or_else(|| RuleError::NotEnumerable(relation.name().into()))?;
                for row in rows {
                    let ps: Vec<GSequent> = row
                        .into_iter()
                        .map(|l| {
                            let mut p = conclusion.clone();
                            p.set_label(w.clone(), l);
                            p
                        })
                        .collect();
                    push_checked(rule, conclusion, ps, Instantiation::Local { w: w.clone() }, opts, &mut out);
                }
            }
        }
        RuleKind::Expansion { relation, edge } => {
            let u = conclusion.fresh_vertex("u");
            for w in &vertices {
                let delta = conclusion.delta_without(&[w]);
                // the single premise carries two new sequents
                let rows = relation.0.synthesize(&[conclusion.label(w).unwrap()], 2, &delta).ok_or_else(|| RuleError::NotEnumerable(relation.name().into()))?;
                for row in rows {
                    if row.len() != 2 {
                        continue;
                    }
                    let mut p = conclusion.clone();
                    p.set_label(w.clone(), row[0].clone());
                    p.set_label(u.clone(), row[1].clone());
                    p.add_edge(expansion_edge(w, &u, edge)).unwrap();
                    let inst = Instantiation::Expansion { w: w.clone(), u: u.clone(), edge: edge.clone() };
                    push_checked(rule, conclusion, vec![p], inst, opts, &mut out);
                }
            }
        }
        RuleKind::Horn { path, .. } => {
            for w in &vertices {
                for walk in walks_from(conclusion, w, path) {
                    let alpha = rule.horn_added_edge(w, walk.last().unwrap()).unwrap();
                    if conclusion.contains_edge(&alpha) {
                        continue;
                    }
                    let mut p = conclusion.clone();
                    p.add_edge(alpha).unwrap();
                    push_checked(rule, conclusion, vec![p], Instantiation::Horn { walk }, opts, &mut out);
                }
            }
        }
        RuleKind::Reachability { family, relation } => {
            for w in &vertices {
                for u in &vertices {
                    if opts.strict && w == u {
                        continue;
                    }
                    let ok = family.iter().all(|l| GraphReach::new(conclusion, &l.grammar).holds(&l.start_symbol(), w, u));
                    if !ok {
                        continue;
                    }
                    let delta = conclusion.delta_without(&[w, u]);
                    let concl = [conclusion.label(w).unwrap(), conclusion.label(u).unwrap()];
                    let rows = relation.0.synthesize(&concl, family.len(), &delta).ok_or_else(|| RuleError::NotEnumerable(relation.name().into()))?;
                    for row in rows {
                        if row.len() != 2 * family.len() {
                            continue;
                        }
                        let ps: Vec<GSequent> = row
                            .chunks(2)
                            .filter(|c| w != u || c[0] == c[1])
                            .map(|c| {
                                let mut p = conclusion.clone();
                                p.set_label(w.clone(), c[0].clone());
                                p.set_label(u.clone(), c[1].clone());
                                p
                            })
                            .collect();
                        if ps.len() == family.len() {
                            let inst = Instantiation::Reachability { w: w.clone(), u: u.clone() };
                            push_checked(rule, conclusion, ps, inst, opts, &mut out);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn push_checked(
    rule: &Rule,
    conclusion: &GSequent,
    premises: Vec<GSequent>,
    inst: Instantiation,
    opts: CheckOptions,
    out: &mut Vec<(Vec<GSequent>, Instantiation)>,
) {
    let refs: Vec<&GSequent> = premises.iter().collect();
    if is_instance(rule, &refs, conclusion, &inst, opts) && !out.iter().any(|(p, i)| p == &premises && i == &inst) {
        out.push((premises, inst));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> Symbol {
        match s.strip_suffix('~') {
            Some(b) => Symbol::inv(b),
            None => Symbol::fwd(s),
        }
    }

    fn st(s: &str) -> EdgeString {
        s.split_whitespace().map(sym).collect()
    }

    fn grammar(rules: &[(&str, &str)]) -> ESystem {
        ESystem::close_under_converse(rules.iter().map(|(l, r)| Production::new(sym(l), st(r))))
    }

    fn truth() -> Relation {
        Relation::new(Always)
    }

    fn id_rule(g: ESystem) -> Rule {
        Rule::initial("id", StructuralConstraint::single_edge("x", "y", EdgeLanguage::new(g, "E")), truth())
    }

    fn emb(pairs: &[(&str, &str)]) -> BTreeMap<Vertex, Vertex> {
        pairs.iter().map(|(a, b)| (Vertex::from(*a), Vertex::from(*b))).collect()
    }

    #[test]
    fn constraint_satisfaction() {
        let c = StructuralConstraint::single_edge("w", "u", EdgeLanguage::plain("E"));
        let g = GSequent::single("w", "S").with_vertex("u", "T").with_edge("w", "E", "u");
        assert!(constraint_satisfied(&g, &c, &emb(&[("w", "w"), ("u", "u")])).unwrap());
        assert!(!constraint_satisfied(&g, &c, &emb(&[("w", "u"), ("u", "w")])).unwrap());
        let rt = grammar(&[("E", ""), ("E", "E E")]);
        let c2 = StructuralConstraint::single_edge("w", "u", EdgeLanguage::new(rt, "E"));
        let bare = GSequent::single("w", "S");
        assert!(constraint_satisfied(&bare, &c2, &emb(&[("w", "w"), ("u", "w")])).unwrap());
        let empty = StructuralConstraint::new(vec![], vec![]).unwrap();
        assert!(constraint_satisfied(&bare, &empty, &BTreeMap::new()).unwrap());
        assert!(constraint_satisfied(&bare, &c2, &emb(&[("w", "w")])).is_err());
    }

    #[test]
    fn trees_only() {
        let l = EdgeLanguage::plain("a");
        let e = |a: &str, b: &str| ConstraintEdge { src: a.into(), dst: b.into(), language: l.clone() };
        assert!(StructuralConstraint::new(vec!["x".into(), "y".into()], vec![e("x", "y")]).is_ok());
        assert!(StructuralConstraint::new(vec!["x".into(), "y".into()], vec![]).is_err());
        assert!(StructuralConstraint::new(vec!["x".into(), "y".into()], vec![e("x", "y"), e("y", "x")]).is_err());
        assert!(StructuralConstraint::new(vec!["x".into()], vec![]).is_ok());
    }

    #[test]
    fn strictness_rejects_collapsed_embeddings() {
        let rule = id_rule(grammar(&[("E", "")]));
        let g = GSequent::single("w", "S");
        let inst = Instantiation::Initial { embedding: emb(&[("x", "w"), ("y", "w")]) };
        assert!(is_instance(&rule, &[], &g, &inst, CheckOptions::default()));
        assert!(!is_instance(&rule, &[], &g, &inst, CheckOptions { strict: true }));
    }

    #[test]
    fn horn_instances() {
        let tra = Rule::horn_forward("tra", "E", st("E E"));
        let concl = GSequent::single("w", "S").with_vertex("u", "S").with_vertex("v", "S").with_edge("w", "E", "u").with_edge("u", "E", "v");
        let prem = concl.clone().with_edge("w", "E", "v");
        let inst = Instantiation::Horn { walk: vec!["w".into(), "u".into(), "v".into()] };
        check_instance(&tra, &[&prem], &concl, &inst, CheckOptions::default()).unwrap();
        assert!(!is_instance(&tra, &[&concl], &concl, &inst, CheckOptions::default()));
        let cands = apply_bottom_up(&tra, &concl, CheckOptions::default()).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].0, vec![prem.clone()]);
        assert!(apply_bottom_up(&tra, &prem, CheckOptions::default()).unwrap().is_empty());

        let refl = Rule::horn_forward("ref", "E", EdgeString::empty());
        let single = GSequent::single("w", "S");
        let cands = apply_bottom_up(&refl, &single, CheckOptions::default()).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].0[0], single.clone().with_edge("w", "E", "w"));

        let back = Rule::horn_backward("h3", "b", st("a"));
        let g = GSequent::single("w", "S").with_vertex("u", "S").with_edge("w", "a", "u");
        let p = g.clone().with_edge("u", "b", "w");
        let inst = Instantiation::Horn { walk: vec!["w".into(), "u".into()] };
        check_instance(&back, &[&p], &g, &inst, CheckOptions::default()).unwrap();
    }

    #[test]
    fn horn_grammars() {
        let back = Rule::horn_backward("h3", "b", st("a"));
        assert_eq!(rule_grammar(&back), grammar(&[("b~", "a")]));
        assert!(rule_grammar(&back).contains(&Production::new(sym("b"), st("a~"))));
        let tra = Rule::horn_forward("tra", "E", st("E E"));
        let refl = Rule::horn_forward("ref", "E", st(""));
        assert_eq!(rule_grammar(&tra).union(&rule_grammar(&refl)), grammar(&[("E", ""), ("E", "E E")]));
        assert!(rule_grammar(&Rule::local("l", truth(), 2)).is_empty());
        // backward (b, a) and forward (b, inv(a)) are the same rule
        assert_eq!(back.key(), Rule::horn_forward("x", "b", st("a~")).key());
    }

    #[test]
    fn horn_of_pair_ids() {
        let pair = ProductionPair::of(&Production::new(sym("a"), st("c c")));
        assert_eq!(Rule::horn_of_pair(&pair).id, "h(a->c,c)");
        let pair = ProductionPair::of(&Production::new(sym("b~"), st("a")));
        assert_eq!(Rule::horn_of_pair(&pair).id, "h(b->inv(a))");
        let pair = ProductionPair::of(&Production::new(sym("a"), st("")));
        assert_eq!(Rule::horn_of_pair(&pair).id, "h(a->eps)");
    }

    #[test]
    fn expansion_freshness() {
        let rule = Rule::expansion("grow", truth(), sym("c"));
        let concl = GSequent::single("w", "S");
        let prem = GSequent::single("w", "S").with_vertex("u", "T").with_edge("w", "c", "u");
        let inst = Instantiation::Expansion { w: "w".into(), u: "u".into(), edge: sym("c") };
        check_instance(&rule, &[&prem], &concl, &inst, CheckOptions::default()).unwrap();
        let crowded = concl.clone().with_vertex("u", "T");
        let prem2 = crowded.clone().with_edge("w", "c", "u");
        assert!(matches!(
            check_instance(&rule, &[&prem2], &crowded, &inst, CheckOptions::default()),
            Err(RuleError::Freshness(_, _))
        ));
    }

    #[test]
    fn absorb_fracture_basics() {
        let g = grammar(&[("E", ""), ("E", "E E")]);
        let id = id_rule(ESystem::empty());
        let absorbed = absorb_rule(&id, &g);
        assert_eq!(rule_grammar(&absorbed), g);
        assert_eq!(fracture_rule(&absorbed, &g), id);
        assert_eq!(absorb_rule(&id, &ESystem::empty()), id);
        let local = Rule::local("l", truth(), 1);
        assert_eq!(absorb_rule(&local, &g), local);
    }

    #[test]
    fn transmission_is_fracture_fixpoint() {
        let t = Rule::reachability("t", vec![EdgeLanguage::plain("E")], truth());
        assert!(t.is_transmission());
        assert_eq!(fracture_rule(&t, &rule_grammar(&t)), t);
        let r = Rule::reachability("r", vec![EdgeLanguage::new(grammar(&[("E", "")]), "E")], truth());
        assert!(!r.is_transmission());
        assert_ne!(fracture_rule(&r, &rule_grammar(&r)), r);
    }

    #[test]
    fn reachability_instances() {
        let rt = grammar(&[("E", "")]);
        let r = Rule::reachability("r", vec![EdgeLanguage::new(rt, "E")], truth());
        let g = GSequent::single("w", "S");
        let inst = Instantiation::Reachability { w: "w".into(), u: "w".into() };
        check_instance(&r, &[&g], &g, &inst, CheckOptions::default()).unwrap();
        assert!(!is_instance(&r, &[&g], &g, &inst, CheckOptions { strict: true }));
        let cands = apply_bottom_up(&r, &g, CheckOptions::default()).unwrap();
        assert_eq!(cands.len(), 1);
    }

    #[test]
    fn wrong_instantiation_kind() {
        let rule = Rule::local("l", truth(), 1);
        let g = GSequent::single("w", "S");
        let inst = Instantiation::Reachability { w: "w".into(), u: "w".into() };
        assert!(matches!(check_instance(&rule, &[&g], &g, &inst, CheckOptions::default()), Err(RuleError::Instantiation(_, _))));
        assert!(matches!(
            check_instance(&rule, &[], &g, &Instantiation::Local { w: "w".into() }, CheckOptions::default()),
            Err(RuleError::Arity { .. })
        ));
    }

    struct NoSynth;
    impl SequentRelation for NoSynth {
        fn name(&self) -> &str {
            "opaque"
        }
        fn holds(&self, _: &[&SequentLabel], _: &Delta) -> bool {
            true
        }
    }

    #[test]
    fn missing_synthesis_is_reported() {
        let rule = Rule::local("l", Relation::new(NoSynth), 1);
        assert!(matches!(apply_bottom_up(&rule, &GSequent::single("w", "S"), CheckOptions::default()), Err(RuleError::NotEnumerable(_))));
    }
}
