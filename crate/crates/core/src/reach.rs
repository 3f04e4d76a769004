//! Grammar-constrained reachability: does some walk from `source` to `target`
//! spell a string derivable from a start symbol?
//!
//! Every symbol of the grammar is a nonterminal whose base facts are the arcs of
//! the graph (`u -a-> v` and `v -inv(a)-> u` for every atom `u E_a v`). Long
//! right-hand sides are binarized with auxiliary nonterminals, and spans are
//! saturated with a worklist. Each fact keeps the justification it was first
//! derived with, which makes witness extraction a walk down a finite tree.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::gsequent::{Alphabet, GSequent, Vertex};
use crate::rewriting::{Derivation, ESystem, EdgeString, Production, RewriteStep, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReachError {
    #[error("start symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("vertex `{0}` does not occur in the g-sequent")]
    UnknownVertex(String),
}

#[derive(Clone, Debug)]
pub struct ReachQuery<'a> {
    pub gsequent: &'a GSequent,
    pub source: Vertex,
    pub target: Vertex,
    pub grammar: &'a ESystem,
    pub start: Symbol,
    /// When present, the start symbol must belong to it.
    pub alphabet: Option<&'a Alphabet>,
}

/// A derivation from the start symbol together with a walk spelling its result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachWitness {
    pub derivation: Derivation,
    pub string: EdgeString,
    pub walk: Vec<Vertex>,
}

impl ReachWitness {
    /// Longest sentential form met along the derivation.
    pub fn max_form_len(&self, g: &ESystem, start: &Symbol) -> usize {
        self.derivation
            .forms(g, &EdgeString::single(start.clone()))
            .map(|fs| fs.iter().map(EdgeString::len).max().unwrap_or(1))
            .unwrap_or(1)
    }
}

#[derive(Clone, Copy, Debug)]
enum Just {
    Arc,
    Eps(usize),
    Unit(usize),
    Bin(usize, usize),
}

#[derive(Clone, Debug)]
struct BinRule {
    lhs: usize,
    left: usize,
    right: usize,
    /// Index of the source production when this rule heads it.
    origin: Option<usize>,
}

/// Saturated span table for one graph and one grammar. Queries are cheap once
/// built.
pub struct ReachSolver {
    symbols: HashMap<Symbol, usize>,
    names: Vec<Option<Symbol>>,
    productions: Vec<Production>,
    units: Vec<(usize, usize, usize)>,
    bins: Vec<BinRule>,
    facts: HashMap<(usize, usize, usize), Just>,
}

impl ReachSolver {
    /// Build over vertices `0..n` with the given labelled arcs.
    fn build(n: usize, arcs: &[(usize, Symbol, usize)], g: &ESystem) -> Self {
        let mut symbols: HashMap<Symbol, usize> = HashMap::new();
        let mut names: Vec<Option<Symbol>> = Vec::new();
        fn intern(s: &Symbol, symbols: &mut HashMap<Symbol, usize>, names: &mut Vec<Option<Symbol>>) -> usize {
            *symbols.entry(s.clone()).or_insert_with(|| {
                names.push(Some(s.clone()));
                names.len() - 1
            })
        }
        for (_, s, _) in arcs {
            intern(s, &mut symbols, &mut names);
        }
        let productions: Vec<Production> = g.productions().cloned().collect();
        for p in &productions {
            intern(&p.lhs, &mut symbols, &mut names);
            for s in p.rhs.symbols() {
                intern(s, &mut symbols, &mut names);
            }
        }
        let mut eps = Vec::new();
        let mut units = Vec::new();
        let mut bins = Vec::new();
        for (k, p) in productions.iter().enumerate() {
            let lhs = symbols[&p.lhs];
            let rhs: Vec<usize> = p.rhs.symbols().iter().map(|s| symbols[s]).collect();
            match rhs.len() {
                0 => eps.push((lhs, k)),
                1 => units.push((lhs, rhs[0], k)),
                m => {
                    let mut head = lhs;
                    let mut origin = Some(k);
                    for &y in &rhs[..m - 2] {
                        names.push(None);
                        let aux = names.len() - 1;
                        bins.push(BinRule { lhs: head, left: y, right: aux, origin });
                        head = aux;
                        origin = None;
                    }
                    bins.push(BinRule { lhs: head, left: rhs[m - 2], right: rhs[m - 1], origin });
                }
            }
        }
        let nts = names.len();
        let mut unit_by_rhs = vec![Vec::new(); nts];
        for (i, &(_, r, _)) in units.iter().enumerate() {
            unit_by_rhs[r].push(i);
        }
        let mut bin_by_left = vec![Vec::new(); nts];
        let mut bin_by_right = vec![Vec::new(); nts];
        for (i, b) in bins.iter().enumerate() {
            bin_by_left[b.left].push(i);
            bin_by_right[b.right].push(i);
        }

        let mut facts: HashMap<(usize, usize, usize), Just> = HashMap::new();
        let mut out: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; nts];
        let mut inn: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; nts];
        let mut queue: VecDeque<(usize, usize, usize)> = VecDeque::new();
        let add = |f: (usize, usize, usize),
                       j: Just,
                       facts: &mut HashMap<(usize, usize, usize), Just>,
                       queue: &mut VecDeque<(usize, usize, usize)>| {
            if let std::collections::hash_map::Entry::Vacant(e) = facts.entry(f) {
                e.insert(j);
                queue.push_back(f);
            }
        };
        for (u, s, v) in arcs {
            add((symbols[s], *u, *v), Just::Arc, &mut facts, &mut queue);
        }
        for &(lhs, k) in &eps {
            for v in 0..n {
                add((lhs, v, v), Just::Eps(k), &mut facts, &mut queue);
            }
        }
        while let Some((x, i, j)) = queue.pop_front() {
            out[x][i].push(j);
            inn[x][j].push(i);
            for &ui in &unit_by_rhs[x] {
                add((units[ui].0, i, j), Just::Unit(ui), &mut facts, &mut queue);
            }
            for &bi in &bin_by_left[x] {
                let b = &bins[bi];
                for &k in &out[b.right][j] {
                    add((b.lhs, i, k), Just::Bin(bi, j), &mut facts, &mut queue);
                }
            }
            for &bi in &bin_by_right[x] {
                let b = &bins[bi];
                for &h in &inn[b.left][i] {
                    add((b.lhs, h, j), Just::Bin(bi, i), &mut facts, &mut queue);
                }
            }
        }
        ReachSolver { symbols, names, productions, units, bins, facts }
    }

    fn holds_idx(&self, start: &Symbol, i: usize, j: usize) -> bool {
        match self.symbols.get(start) {
            Some(&x) => self.facts.contains_key(&(x, i, j)),
            None => false,
        }
    }

    /// Derivation tree of a fact as (production index, children) or a leaf arc.
    fn tree(&self, f: (usize, usize, usize)) -> Node {
        let (x, i, j) = f;
        match self.facts[&f] {
            Just::Arc => Node::Leaf(self.names[x].clone().expect("arcs carry real symbols"), i, j),
            Just::Eps(k) => Node::Prod(k, Vec::new()),
            Just::Unit(u) => {
                let (_, y, k) = self.units[u];
                Node::Prod(k, vec![self.tree((y, i, j))])
            }
            Just::Bin(b, m) => {
                let rule = &self.bins[b];
                let k = rule.origin.expect("auxiliary facts are only expanded through their head");
                let mut children = vec![self.tree((rule.left, i, m))];
                self.aux_children(rule.right, m, j, &mut children);
                Node::Prod(k, children)
            }
        }
    }

    fn aux_children(&self, y: usize, i: usize, j: usize, children: &mut Vec<Node>) {
        if self.names[y].is_some() {
            children.push(self.tree((y, i, j)));
            return;
        }
        match self.facts[&(y, i, j)] {
            Just::Bin(b, m) => {
                let rule = &self.bins[b];
                children.push(self.tree((rule.left, i, m)));
                self.aux_children(rule.right, m, j, children);
            }
            _ => unreachable!("auxiliary nonterminals only occur as binary heads"),
        }
    }

    fn witness_idx(&self, start: &Symbol, i: usize, j: usize) -> Option<(Derivation, Vec<(Symbol, usize, usize)>)> {
        let x = *self.symbols.get(start)?;
        if !self.facts.contains_key(&(x, i, j)) {
            return None;
        }
        let root = self.tree((x, i, j));
        let mut steps = Vec::new();
        let mut leaves = Vec::new();
        self.linearize(&root, 0, &mut steps, &mut leaves);
        Some((Derivation { steps }, leaves))
    }

    /// Leftmost derivation of a tree rooted at `pos`; returns the yield length.
    fn linearize(&self, node: &Node, pos: usize, steps: &mut Vec<RewriteStep>, leaves: &mut Vec<(Symbol, usize, usize)>) -> usize {
        match node {
            Node::Leaf(s, i, j) => {
                leaves.push((s.clone(), *i, *j));
                1
            }
            Node::Prod(k, children) => {
                steps.push(RewriteStep { position: pos, production: self.productions[*k].clone() });
                let mut p = pos;
                for c in children {
                    p += self.linearize(c, p, steps, leaves);
                }
                p - pos
            }
        }
    }
}

enum Node {
    Leaf(Symbol, usize, usize),
    Prod(usize, Vec<Node>),
}

/// A saturated solver bound to the vertex names of one g-sequent.
pub struct GraphReach<'g> {
    index: HashMap<&'g Vertex, usize>,
    vertices: Vec<&'g Vertex>,
    solver: ReachSolver,
}

impl<'g> GraphReach<'g> {
    pub fn new(g: &'g GSequent, grammar: &ESystem) -> Self {
        let vertices: Vec<&Vertex> = g.vertices().collect();
        let index: HashMap<&Vertex, usize> = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut arcs = Vec::with_capacity(2 * g.edge_count());
        for e in g.edges() {
            let (u, v) = (index[&e.src], index[&e.dst]);
            arcs.push((u, Symbol::fwd(e.ty.clone()), v));
            arcs.push((v, Symbol::inv(e.ty.clone()), u));
        }
        let solver = ReachSolver::build(vertices.len(), &arcs, grammar);
        GraphReach { index, vertices, solver }
    }

    pub fn holds(&self, start: &Symbol, from: &Vertex, to: &Vertex) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&i), Some(&j)) => self.solver.holds_idx(start, i, j),
            _ => false,
        }
    }

    pub fn witness(&self, start: &Symbol, from: &Vertex, to: &Vertex) -> Option<ReachWitness> {
        let (&i, &j) = (self.index.get(from)?, self.index.get(to)?);
        let (derivation, leaves) = self.solver.witness_idx(start, i, j)?;
        let mut walk = vec![self.vertices[i].clone()];
        walk.extend(leaves.iter().map(|(_, _, b)| self.vertices[*b].clone()));
        let string = leaves.into_iter().map(|(s, _, _)| s).collect();
        Some(ReachWitness { derivation, string, walk })
    }
}

fn check_query(q: &ReachQuery<'_>) -> Result<(), ReachError> {
    if let Some(a) = q.alphabet {
        if !a.contains_symbol(&q.start) {
            return Err(ReachError::UnknownSymbol(q.start.to_string()));
        }
    }
    for v in [&q.source, &q.target] {
        if !q.gsequent.contains_vertex(v) {
            return Err(ReachError::UnknownVertex(v.to_string()));
        }
    }
    Ok(())
}

/// Exact decision of `source -G(start)-> target`, with a witness when it holds.
pub fn solve_reach(q: &ReachQuery<'_>) -> Result<Option<ReachWitness>, ReachError> {
    check_query(q)?;
    Ok(GraphReach::new(q.gsequent, q.grammar).witness(&q.start, &q.source, &q.target))
}

/// Boolean form of [`solve_reach`] without witness extraction.
pub fn reaches(g: &GSequent, grammar: &ESystem, start: &Symbol, from: &Vertex, to: &Vertex) -> bool {
    GraphReach::new(g, grammar).holds(start, from, to)
}

/// Exact `start ->* t` by running the solver on the linear graph spelled by `t`.
pub fn membership(g: &ESystem, start: &Symbol, t: &EdgeString) -> Option<Derivation> {
    let n = t.len();
    let arcs: Vec<(usize, Symbol, usize)> = t.symbols().iter().enumerate().map(|(i, s)| (i, s.clone(), i + 1)).collect();
    let solver = ReachSolver::build(n + 1, &arcs, g);
    solver.witness_idx(start, 0, n).map(|(d, _)| d)
}

/// Oracle: derive every string reachable in at most `derivation_bound` rewrites
/// and look for a walk among those of length at most `walk_bound`.
pub fn brute_force_reach(q: &ReachQuery<'_>, walk_bound: usize, derivation_bound: usize) -> bool {
    if !q.gsequent.contains_vertex(&q.source) || !q.gsequent.contains_vertex(&q.target) {
        return false;
    }
    let start = EdgeString::single(q.start.clone());
    let mut seen: BTreeSet<EdgeString> = BTreeSet::from([start.clone()]);
    let mut frontier = vec![start];
    for depth in 0..=derivation_bound {
        for s in &frontier {
            if s.len() <= walk_bound && q.gsequent.has_walk(&q.source, &q.target, s) {
                return true;
            }
        }
        if depth == derivation_bound {
            break;
        }
        let remaining = derivation_bound - depth - 1;
        let mut next = Vec::new();
        for s in &frontier {
            for pos in 0..s.len() {
                for p in q.grammar.productions().filter(|p| p.lhs == s.symbols()[pos]) {
                    let t = s.rewrite_at(pos, p).expect("lhs matched");
                    // a rewrite shrinks a form by at most one symbol
                    if t.len() <= walk_bound + remaining && seen.insert(t.clone()) {
                        next.push(t);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    false
}
