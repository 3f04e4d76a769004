//! G-sequents: edge-typed directed graphs whose vertices carry opaque sequents.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::rewriting::{EdgeString, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GSequentError {
    #[error("edge `{0}` has an endpoint that is not a vertex")]
    DanglingEdge(String),
    #[error("vertex `{0}` does not occur in the g-sequent")]
    UnknownVertex(String),
    #[error("edge type `{0}` is not in the alphabet")]
    UnknownEdgeType(String),
    #[error("vertex `{0}` already occurs in the g-sequent")]
    DuplicateVertex(String),
}

macro_rules! name_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }

        impl From<&$name> for $name {
            fn from(s: &$name) -> Self {
                s.clone()
            }
        }
    };
}

name_type!(
    /// A member of the finite edge-type alphabet.
    EdgeType
);
name_type!(
    /// A vertex identity drawn from an unbounded universe of names.
    Vertex
);
name_type!(
    /// An opaque sequent. Concrete calculi give the text its own structure.
    SequentLabel
);

/// The fact `src E_ty dst`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeAtom {
    pub src: Vertex,
    pub ty: EdgeType,
    pub dst: Vertex,
}

impl EdgeAtom {
    pub fn new(src: impl Into<Vertex>, ty: impl Into<EdgeType>, dst: impl Into<Vertex>) -> Self {
        EdgeAtom { src: src.into(), ty: ty.into(), dst: dst.into() }
    }

    pub fn is_loop(&self) -> bool {
        self.src == self.dst
    }
}

impl fmt::Display for EdgeAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.src, self.ty, self.dst)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Alphabet(BTreeSet<EdgeType>);

impl Alphabet {
    pub fn new<I, T>(types: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<EdgeType>,
    {
        Alphabet(types.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, t: &EdgeType) -> bool {
        self.0.contains(t)
    }

    pub fn contains_symbol(&self, s: &Symbol) -> bool {
        self.0.contains(&s.base)
    }

    pub fn check_string(&self, s: &EdgeString) -> Result<(), GSequentError> {
        match s.symbols().iter().find(|x| !self.contains_symbol(x)) {
            Some(x) => Err(GSequentError::UnknownEdgeType(x.base.to_string())),
            None => Ok(()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &EdgeType> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &Alphabet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Every symbol and its converse, in canonical order.
    pub fn symbols(&self) -> Vec<Symbol> {
        self.0.iter().flat_map(|t| [Symbol::fwd(t.clone()), Symbol::inv(t.clone())]).collect()
    }
}

/// The prefixed sequents of a g-sequent that a rule does not touch.
pub type Delta = Vec<(Vertex, SequentLabel)>;

/// `Gamma |- Delta`: a set of edge atoms over labelled vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GSequent {
    labels: BTreeMap<Vertex, SequentLabel>,
    edges: BTreeSet<EdgeAtom>,
}

impl GSequent {
    pub fn new() -> Self {
        GSequent::default()
    }

    /// Validating constructor.
    pub fn from_parts<V, E>(vertices: V, edges: E) -> Result<Self, GSequentError>
    where
        V: IntoIterator<Item = (Vertex, SequentLabel)>,
        E: IntoIterator<Item = EdgeAtom>,
    {
        let mut g = GSequent::new();
        for (v, l) in vertices {
            if g.labels.insert(v.clone(), l).is_some() {
                return Err(GSequentError::DuplicateVertex(v.0));
            }
        }
        for e in edges {
            g.add_edge(e)?;
        }
        Ok(g)
    }

    /// A single labelled vertex and nothing else.
    pub fn single(v: impl Into<Vertex>, label: impl Into<SequentLabel>) -> Self {
        let mut g = GSequent::new();
        g.labels.insert(v.into(), label.into());
        g
    }

    pub fn with_vertex(mut self, v: impl Into<Vertex>, label: impl Into<SequentLabel>) -> Self {
        self.labels.insert(v.into(), label.into());
        self
    }

    pub fn with_edge(mut self, src: &str, ty: &str, dst: &str) -> Self {
        self.add_edge(EdgeAtom::new(src, ty, dst)).expect("endpoints present");
        self
    }

    /// Insert or relabel a vertex.
    pub fn set_label(&mut self, v: Vertex, label: SequentLabel) {
        self.labels.insert(v, label);
    }

    /// Add an edge atom; returns whether it was new.
    pub fn add_edge(&mut self, e: EdgeAtom) -> Result<bool, GSequentError> {
        if !self.labels.contains_key(&e.src) || !self.labels.contains_key(&e.dst) {
            return Err(GSequentError::DanglingEdge(e.to_string()));
        }
        Ok(self.edges.insert(e))
    }

    pub fn remove_edge(&mut self, e: &EdgeAtom) -> bool {
        self.edges.remove(e)
    }

    /// Drop a vertex together with every edge touching it.
    pub fn remove_vertex(&mut self, v: &Vertex) -> Option<SequentLabel> {
        self.edges.retain(|e| &e.src != v && &e.dst != v);
        self.labels.remove(v)
    }

    pub fn contains_edge(&self, e: &EdgeAtom) -> bool {
        self.edges.contains(e)
    }

    pub fn contains_vertex(&self, v: &Vertex) -> bool {
        self.labels.contains_key(v)
    }

    pub fn label(&self, v: &Vertex) -> Option<&SequentLabel> {
        self.labels.get(v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.labels.keys()
    }

    pub fn labels(&self) -> impl Iterator<Item = (&Vertex, &SequentLabel)> {
        self.labels.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeAtom> {
        self.edges.iter()
    }

    pub fn edge_set(&self) -> &BTreeSet<EdgeAtom> {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge atoms plus vertices.
    pub fn size(&self) -> usize {
        self.edges.len() + self.labels.len()
    }

    pub fn edge_types(&self) -> BTreeSet<EdgeType> {
        self.edges.iter().map(|e| e.ty.clone()).collect()
    }

    /// Same vertices and edges, labels possibly different.
    pub fn same_graph(&self, other: &GSequent) -> bool {
        self.edges == other.edges && self.labels.keys().eq(other.labels.keys())
    }

    /// All prefixed sequents except those at `skip`.
    pub fn delta_without(&self, skip: &[&Vertex]) -> Delta {
        self.labels
            .iter()
            .filter(|(v, _)| !skip.contains(v))
            .map(|(v, l)| (v.clone(), l.clone()))
            .collect()
    }

    /// Connected and free of undirected cycles once types and directions are
    /// forgotten. Loops and parallel atoms count as cycles.
    pub fn is_polytree(&self) -> bool {
        let n = self.labels.len();
        if n == 0 {
            return false;
        }
        if self.edges.len() != n - 1 {
            return false;
        }
        // n - 1 edges and connected means acyclic; loops and parallel atoms spend
        // an edge without joining components, so they break connectivity here.
        let index: HashMap<&Vertex, usize> = self.labels.keys().enumerate().map(|(i, v)| (v, i)).collect();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        for e in &self.edges {
            let a = find(&mut parent, index[&e.src]);
            let b = find(&mut parent, index[&e.dst]);
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// One-symbol successors of `v`.
    pub fn step(&self, v: &Vertex, sym: &Symbol) -> Vec<Vertex> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.ty != sym.base {
                    return None;
                }
                match (sym.inverse, &e.src == v, &e.dst == v) {
                    (false, true, _) => Some(e.dst.clone()),
                    (true, _, true) => Some(e.src.clone()),
                    _ => None,
                }
            })
            .collect()
    }

    /// Whether some walk from `from` spells `s` and ends at `to`.
    pub fn has_walk(&self, from: &Vertex, to: &Vertex, s: &EdgeString) -> bool {
        let mut cur: BTreeSet<Vertex> = BTreeSet::new();
        if self.labels.contains_key(from) {
            cur.insert(from.clone());
        }
        for sym in s.symbols() {
            let mut next = BTreeSet::new();
            for v in &cur {
                next.extend(self.step(v, sym));
            }
            if next.is_empty() {
                return false;
            }
            cur = next;
        }
        cur.contains(to)
    }

    /// A vertex sequence `from = v0, .., vn = to` whose steps spell `s`.
    pub fn find_walk(&self, from: &Vertex, to: &Vertex, s: &EdgeString) -> Option<Vec<Vertex>> {
        if !self.labels.contains_key(from) {
            return None;
        }
        // layers[i] maps each vertex reachable after i symbols to a predecessor
        let mut layers: Vec<BTreeMap<Vertex, Option<Vertex>>> = vec![[(from.clone(), None)].into()];
        for sym in s.symbols() {
            let mut next = BTreeMap::new();
            for v in layers.last().unwrap().keys() {
                for w in self.step(v, sym) {
                    next.entry(w).or_insert_with(|| Some(v.clone()));
                }
            }
            if next.is_empty() {
                return None;
            }
            layers.push(next);
        }
        if !layers.last().unwrap().contains_key(to) {
            return None;
        }
        let mut walk = vec![to.clone()];
        let mut cur = to.clone();
        for layer in layers.iter().rev() {
            match layer.get(&cur).cloned().flatten() {
                Some(p) => {
                    walk.push(p.clone());
                    cur = p;
                }
                None => break,
            }
        }
        walk.reverse();
        Some(walk)
    }

    /// Edge atoms traversed by a walk spelling `s` through `walk`.
    pub fn walk_atoms(walk: &[Vertex], s: &EdgeString) -> Vec<EdgeAtom> {
        s.symbols()
            .iter()
            .zip(walk.windows(2))
            .map(|(sym, w)| {
                if sym.inverse {
                    EdgeAtom { src: w[1].clone(), ty: sym.base.clone(), dst: w[0].clone() }
                } else {
                    EdgeAtom { src: w[0].clone(), ty: sym.base.clone(), dst: w[1].clone() }
                }
            })
            .collect()
    }

    /// Checks that `walk` spells `s` from its first to its last vertex.
    pub fn walk_spells(&self, walk: &[Vertex], s: &EdgeString) -> bool {
        walk.len() == s.len() + 1 && Self::walk_atoms(walk, s).iter().all(|e| self.edges.contains(e))
            && walk.iter().all(|v| self.labels.contains_key(v))
    }

    /// Smallest `prefix{n}` not already a vertex.
    pub fn fresh_vertex(&self, prefix: &str) -> Vertex {
        (0..)
            .map(|i| Vertex(format!("{prefix}{i}")))
            .find(|v| !self.labels.contains_key(v))
            .unwrap()
    }

    /// Structural equality up to a renaming of vertices.
    pub fn is_isomorphic(&self, other: &GSequent) -> bool {
        if self.labels.len() != other.labels.len() || self.edges.len() != other.edges.len() {
            return false;
        }
        let mine: Vec<&Vertex> = self.labels.keys().collect();
        let theirs: Vec<&Vertex> = other.labels.keys().collect();
        let mut map: BTreeMap<&Vertex, &Vertex> = BTreeMap::new();
        let mut used = vec![false; theirs.len()];
        self.iso_extend(other, &mine, &theirs, 0, &mut map, &mut used)
    }

    fn iso_extend<'a>(
        &'a self,
        other: &'a GSequent,
        mine: &[&'a Vertex],
        theirs: &[&'a Vertex],
        i: usize,
        map: &mut BTreeMap<&'a Vertex, &'a Vertex>,
        used: &mut [bool],
    ) -> bool {
        if i == mine.len() {
            return self.edges.iter().all(|e| {
                other.edges.contains(&EdgeAtom { src: map[&e.src].clone(), ty: e.ty.clone(), dst: map[&e.dst].clone() })
            });
        }
        let v = mine[i];
        for (j, w) in theirs.iter().enumerate() {
            if used[j] || self.labels[v] != other.labels[*w] {
                continue;
            }
            map.insert(v, w);
            used[j] = true;
            // prune on edges whose endpoints are both mapped
            let consistent = self.edges.iter().filter(|e| map.contains_key(&e.src) && map.contains_key(&e.dst)).all(|e| {
                other.edges.contains(&EdgeAtom { src: map[&e.src].clone(), ty: e.ty.clone(), dst: map[&e.dst].clone() })
            });
            if consistent && self.iso_extend(other, mine, theirs, i + 1, map, used) {
                return true;
            }
            used[j] = false;
            map.remove(v);
        }
        false
    }

    /// Vertices reachable from `v` ignoring types and directions.
    pub fn component_of(&self, v: &Vertex) -> BTreeSet<Vertex> {
        let mut seen = BTreeSet::from([v.clone()]);
        let mut queue = VecDeque::from([v.clone()]);
        while let Some(x) = queue.pop_front() {
            for e in &self.edges {
                for (a, b) in [(&e.src, &e.dst), (&e.dst, &e.src)] {
                    if a == &x && seen.insert(b.clone()) {
                        queue.push_back(b.clone());
                    }
                }
            }
        }
        seen
    }
}

impl fmt::Display for GSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges.iter().map(|e| format!("{}{}{}", e.src, e.ty, e.dst)).collect();
        let labels: Vec<String> = self.labels.iter().map(|(v, l)| format!("{v}:({l})")).collect();
        write!(f, "{} |- {}", edges.join(", "), labels.join(", "))
    }
}

/// `g |= from -s-> to`, rejecting symbols outside the alphabet.
pub fn path_holds(
    g: &GSequent,
    from: &Vertex,
    to: &Vertex,
    s: &EdgeString,
    alphabet: &Alphabet,
) -> Result<bool, GSequentError> {
    alphabet.check_string(s)?;
    for v in [from, to] {
        if !g.contains_vertex(v) {
            return Err(GSequentError::UnknownVertex(v.to_string()));
        }
    }
    Ok(g.has_walk(from, to, s))
}
