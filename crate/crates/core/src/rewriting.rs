//! Edge symbols, strings over them, single-symbol productions and converse-closed
//! rewriting systems.
//!
//! A string `s` over edge symbols names a walk shape; `inv(a)` traverses an `a`
//! edge backwards. An [`ESystem`] is a finite set of productions `x -> y1 .. yn`
//! closed under converse, where the converse of `x -> y1 .. yn` is
//! `inv(x) -> inv(yn) .. inv(y1)`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::gsequent::EdgeType;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("production `{0}` has a left-hand side of length {1}; exactly one symbol is required")]
    LhsLength(String, usize),
    #[error("production `{0}` is present but its converse `{1}` is not")]
    NotClosed(String, String),
    #[error("unbounded derivability is only decidable from a single symbol (got `{0}`)")]
    Unbounded(String),
}

/// An edge type or its converse.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub base: EdgeType,
    pub inverse: bool,
}

impl Symbol {
    pub fn fwd(base: impl Into<EdgeType>) -> Self {
        Symbol { base: base.into(), inverse: false }
    }

    pub fn inv(base: impl Into<EdgeType>) -> Self {
        Symbol { base: base.into(), inverse: true }
    }

    pub fn converse(&self) -> Self {
        Symbol { base: self.base.clone(), inverse: !self.inverse }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "inv({})", self.base)
        } else {
            write!(f, "{}", self.base)
        }
    }
}

/// A finite string of symbols; the empty string is printed as `eps`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeString(pub Vec<Symbol>);

impl EdgeString {
    pub fn empty() -> Self {
        EdgeString(Vec::new())
    }

    pub fn single(sym: Symbol) -> Self {
        EdgeString(vec![sym])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    /// Reverse and bar every symbol.
    pub fn converse(&self) -> Self {
        EdgeString(self.0.iter().rev().map(Symbol::converse).collect())
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.0.contains(sym)
    }

    /// Replace the symbol at `pos` by the right-hand side of `p`, if it matches.
    pub fn rewrite_at(&self, pos: usize, p: &Production) -> Option<EdgeString> {
        if self.0.get(pos)? != &p.lhs {
            return None;
        }
        let mut out = Vec::with_capacity(self.0.len() + p.rhs.len());
        out.extend_from_slice(&self.0[..pos]);
        out.extend_from_slice(&p.rhs.0);
        out.extend_from_slice(&self.0[pos + 1..]);
        Some(EdgeString(out))
    }
}

impl fmt::Display for EdgeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "eps");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromIterator<Symbol> for EdgeString {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        EdgeString(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Production {
    pub lhs: Symbol,
    pub rhs: EdgeString,
}

impl Production {
    pub fn new(lhs: Symbol, rhs: EdgeString) -> Self {
        Production { lhs, rhs }
    }

    /// Build from a general left-hand string, rejecting anything but one symbol.
    pub fn from_strings(lhs: EdgeString, rhs: EdgeString) -> Result<Self, RewriteError> {
        if lhs.len() != 1 {
            let shown = format!("{lhs} -> {rhs}");
            return Err(RewriteError::LhsLength(shown, lhs.len()));
        }
        Ok(Production { lhs: lhs.0.into_iter().next().unwrap(), rhs })
    }

    pub fn converse(&self) -> Self {
        Production { lhs: self.lhs.converse(), rhs: self.rhs.converse() }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// A production together with its converse. `forward` is always the member whose
/// left-hand side is an unbarred edge type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductionPair {
    pub forward: Production,
    pub converse: Production,
}

impl ProductionPair {
    pub fn of(p: &Production) -> Self {
        if p.lhs.inverse {
            ProductionPair { forward: p.converse(), converse: p.clone() }
        } else {
            ProductionPair { forward: p.clone(), converse: p.converse() }
        }
    }

    /// The pair `(a -> s, inv(a) -> conv(s))`.
    pub fn horn(edge: &EdgeType, s: &EdgeString) -> Self {
        ProductionPair::of(&Production::new(Symbol::fwd(edge.clone()), s.clone()))
    }

    pub fn productions(&self) -> [&Production; 2] {
        [&self.forward, &self.converse]
    }

    /// True when either right-hand side mentions a left-hand symbol of `other`.
    pub fn depends_on(&self, other: &ProductionPair) -> bool {
        let y = &other.forward.lhs;
        let ybar = &other.converse.lhs;
        self.forward.rhs.contains(y) || self.forward.rhs.contains(ybar)
    }
}

impl fmt::Display for ProductionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.forward)
    }
}

/// A converse-closed set of single-symbol productions, kept in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ESystem {
    productions: BTreeSet<Production>,
}

impl ESystem {
    pub fn empty() -> Self {
        ESystem::default()
    }

    /// Smallest converse-closed system containing `rules`.
    pub fn close_under_converse<I: IntoIterator<Item = Production>>(rules: I) -> Self {
        let mut productions = BTreeSet::new();
        for p in rules {
            productions.insert(p.converse());
            productions.insert(p);
        }
        ESystem { productions }
    }

    /// Accept `rules` only if they are already converse closed.
    pub fn from_closed<I: IntoIterator<Item = Production>>(rules: I) -> Result<Self, RewriteError> {
        let productions: BTreeSet<Production> = rules.into_iter().collect();
        for p in &productions {
            let c = p.converse();
            if !productions.contains(&c) {
                return Err(RewriteError::NotClosed(p.to_string(), c.to_string()));
            }
        }
        Ok(ESystem { productions })
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = &'a ProductionPair>>(pairs: I) -> Self {
        let mut productions = BTreeSet::new();
        for pair in pairs {
            productions.insert(pair.forward.clone());
            productions.insert(pair.converse.clone());
        }
        ESystem { productions }
    }

    pub fn productions(&self) -> impl Iterator<Item = &Production> {
        self.productions.iter()
    }

    pub fn contains(&self, p: &Production) -> bool {
        self.productions.contains(p)
    }

    pub fn len(&self) -> usize {
        self.productions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.productions.is_empty()
    }

    pub fn union(&self, other: &ESystem) -> ESystem {
        ESystem { productions: self.productions.union(&other.productions).cloned().collect() }
    }

    pub fn minus(&self, other: &ESystem) -> ESystem {
        ESystem { productions: self.productions.difference(&other.productions).cloned().collect() }
    }

    pub fn is_subset(&self, other: &ESystem) -> bool {
        self.productions.is_subset(&other.productions)
    }

    pub fn is_disjoint(&self, other: &ESystem) -> bool {
        self.productions.is_disjoint(&other.productions)
    }

    pub fn pairs(&self) -> BTreeSet<ProductionPair> {
        self.productions.iter().map(ProductionPair::of).collect()
    }

    /// Every edge type mentioned anywhere in the system.
    pub fn edge_types(&self) -> BTreeSet<EdgeType> {
        let mut out = BTreeSet::new();
        for p in &self.productions {
            out.insert(p.lhs.base.clone());
            for s in p.rhs.symbols() {
                out.insert(s.base.clone());
            }
        }
        out
    }
}

impl fmt::Display for ESystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.productions.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

pub fn grammar_union(g1: &ESystem, g2: &ESystem) -> ESystem {
    g1.union(g2)
}

pub fn grammar_minus(g1: &ESystem, g2: &ESystem) -> ESystem {
    g1.minus(g2)
}

pub fn production_pairs(g: &ESystem) -> BTreeSet<ProductionPair> {
    g.pairs()
}

pub fn converse_string(s: &EdgeString) -> EdgeString {
    s.converse()
}

/// One rewrite: the symbol at `position` is replaced by `production.rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub position: usize,
    pub production: Production,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Derivation {
    pub steps: Vec<RewriteStep>,
}

impl Derivation {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Replay from `start`, returning every sentential form (start included).
    /// `None` if some step does not apply or uses a production outside `g`.
    pub fn forms(&self, g: &ESystem, start: &EdgeString) -> Option<Vec<EdgeString>> {
        let mut out = vec![start.clone()];
        let mut cur = start.clone();
        for step in &self.steps {
            if !g.contains(&step.production) {
                return None;
            }
            cur = cur.rewrite_at(step.position, &step.production)?;
            out.push(cur.clone());
        }
        Some(out)
    }

    pub fn result(&self, g: &ESystem, start: &EdgeString) -> Option<EdgeString> {
        self.forms(g, start).and_then(|f| f.last().cloned())
    }
}

/// Decide `s ->* t` in `g`.
///
/// With a bound, a breadth-first search over sentential forms of at most
/// `max_steps` rewrites. Without one, only a single-symbol source is accepted and
/// the question is answered exactly by span saturation over `t`.
pub fn derives(
    g: &ESystem,
    s: &EdgeString,
    t: &EdgeString,
    max_steps: Option<usize>,
) -> Result<Option<Derivation>, RewriteError> {
    if s == t {
        return Ok(Some(Derivation::default()));
    }
    match max_steps {
        Some(bound) => Ok(bounded_derives(g, s, t, bound)),
        None => {
            if s.len() != 1 {
                return Err(RewriteError::Unbounded(s.to_string()));
            }
            Ok(crate::reach::membership(g, &s.0[0], t))
        }
    }
}

fn bounded_derives(g: &ESystem, s: &EdgeString, t: &EdgeString, bound: usize) -> Option<Derivation> {
    let mut parent: HashMap<EdgeString, Option<(EdgeString, RewriteStep)>> = HashMap::new();
    parent.insert(s.clone(), None);
    let mut queue = VecDeque::from([(s.clone(), 0usize)]);
    while let Some((form, depth)) = queue.pop_front() {
        if &form == t {
            let mut steps = Vec::new();
            let mut cur = form;
            while let Some(Some((prev, step))) = parent.get(&cur).cloned() {
                steps.push(step);
                cur = prev;
            }
            steps.reverse();
            return Some(Derivation { steps });
        }
        if depth == bound {
            continue;
        }
        for pos in 0..form.len() {
            for p in g.productions().filter(|p| p.lhs == form.0[pos]) {
                let next = form.rewrite_at(pos, p).expect("lhs matched");
                if !parent.contains_key(&next) {
                    let step = RewriteStep { position: pos, production: p.clone() };
                    parent.insert(next.clone(), Some((form.clone(), step)));
                    queue.push_back((next, depth + 1));
                }
            }
        }
    }
    None
}

/// All forms derivable from `start` in at most `steps` rewrites whose length never
/// exceeds `max_len` along the way.
pub fn bounded_language(g: &ESystem, start: &EdgeString, steps: usize, max_len: usize) -> BTreeSet<EdgeString> {
    let mut seen = BTreeSet::new();
    if start.len() > max_len {
        return seen;
    }
    seen.insert(start.clone());
    let mut frontier = vec![start.clone()];
    for _ in 0..steps {
        let mut next = Vec::new();
        for form in &frontier {
            for pos in 0..form.len() {
                for p in g.productions().filter(|p| p.lhs == form.0[pos]) {
                    let f = form.rewrite_at(pos, p).expect("lhs matched");
                    if f.len() <= max_len && seen.insert(f.clone()) {
                        next.push(f);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen
}
