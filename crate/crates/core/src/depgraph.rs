//! Dependency graphs over production pairs and Horn rules, and the
//! (anti-)fracturable node sets used to walk between calculi.

use std::collections::BTreeSet;

use crate::rewriting::{ESystem, ProductionPair};
use crate::rules::Rule;

/// Nodes with the base relation `i ⊏ j` and its reflexive-transitive closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph<N> {
    nodes: Vec<N>,
    base: BTreeSet<(usize, usize)>,
    closure: Vec<Vec<bool>>,
}

impl<N: Ord + Clone> DependencyGraph<N> {
    /// Nodes are sorted and deduplicated; edges name nodes by value.
    pub fn from_edges(nodes: impl IntoIterator<Item = N>, edges: impl IntoIterator<Item = (N, N)>) -> Self {
        let set: BTreeSet<N> = nodes.into_iter().collect();
        let nodes: Vec<N> = set.into_iter().collect();
        let idx = |n: &N| nodes.binary_search(n).expect("edge endpoint is a node");
        let base: BTreeSet<(usize, usize)> = edges.into_iter().map(|(a, b)| (idx(&a), idx(&b))).collect();
        let n = nodes.len();
        let mut closure = vec![vec![false; n]; n];
        for (i, row) in closure.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(i, j) in &base {
            closure[i][j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if closure[i][k] {
                    for j in 0..n {
                        if closure[k][j] {
                            closure[i][j] = true;
                        }
                    }
                }
            }
        }
        DependencyGraph { nodes, base, closure }
    }

    pub fn nodes(&self) -> &[N] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn index(&self, n: &N) -> Option<usize> {
        self.nodes.binary_search(n).ok()
    }

    /// The base relation `⊏`, by value.
    pub fn base_edges(&self) -> Vec<(&N, &N)> {
        self.base.iter().map(|&(i, j)| (&self.nodes[i], &self.nodes[j])).collect()
    }

    /// `a ⊑ b`.
    pub fn leq(&self, a: &N, b: &N) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(i), Some(j)) => self.closure[i][j],
            _ => false,
        }
    }

    /// No `⊑` edge leaves the subset. Unknown nodes make the answer false.
    pub fn is_fracturable(&self, subset: &BTreeSet<N>) -> bool {
        let Some(inside) = self.mask(subset) else { return false };
        self.base.iter().all(|&(i, j)| !inside[i] || inside[j])
    }

    /// The complement is fracturable.
    pub fn is_anti_fracturable(&self, subset: &BTreeSet<N>) -> bool {
        let Some(inside) = self.mask(subset) else { return false };
        self.base.iter().all(|&(i, j)| inside[i] || !inside[j])
    }

    fn mask(&self, subset: &BTreeSet<N>) -> Option<Vec<bool>> {
        let mut inside = vec![false; self.nodes.len()];
        for n in subset {
            inside[self.index(n)?] = true;
        }
        Some(inside)
    }

    /// Strongly connected components, each sorted, listed so that every
    /// component comes after all components it reaches.
    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let comp: Vec<usize> = (0..n).filter(|&j| self.closure[i][j] && self.closure[j][i]).collect();
            for &j in &comp {
                seen[j] = true;
            }
            comps.push(comp);
        }
        // a component reaches strictly fewer nodes than anything above it
        comps.sort_by_key(|c| self.closure[c[0]].iter().filter(|&&b| b).count());
        comps
    }

    /// Every fracturable subset, by cardinality then lexicographically.
    pub fn enumerate_fracturable(&self) -> Vec<BTreeSet<N>> {
        let comps = self.components();
        let succ: Vec<BTreeSet<usize>> = comps
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                (0..comps.len())
                    .filter(|&cj| cj != ci && self.closure[c[0]][comps[cj][0]])
                    .collect()
            })
            .collect();
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut chosen = vec![false; comps.len()];
        fn go(k: usize, comps: &[Vec<usize>], succ: &[BTreeSet<usize>], chosen: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
            if k == comps.len() {
                let mut set: Vec<usize> = (0..comps.len()).filter(|&c| chosen[c]).flat_map(|c| comps[c].iter().copied()).collect();
                set.sort_unstable();
                out.push(set);
                return;
            }
            go(k + 1, comps, succ, chosen, out);
            if succ[k].iter().all(|&s| chosen[s]) {
                chosen[k] = true;
                go(k + 1, comps, succ, chosen, out);
                chosen[k] = false;
            }
        }
        go(0, &comps, &succ, &mut chosen, &mut out);
        self.finish(out)
    }

    /// Complements of the fracturable subsets, in the same ordering.
    pub fn enumerate_anti_fracturable(&self) -> Vec<BTreeSet<N>> {
        let all: Vec<usize> = (0..self.nodes.len()).collect();
        let sets = self
            .enumerate_fracturable()
            .into_iter()
            .map(|s| all.iter().copied().filter(|&i| !s.contains(&self.nodes[i])).collect())
            .collect();
        self.finish(sets)
    }

    fn finish(&self, mut sets: Vec<Vec<usize>>) -> Vec<BTreeSet<N>> {
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        sets.into_iter().map(|s| s.into_iter().map(|i| self.nodes[i].clone()).collect()).collect()
    }
}

/// `DG(g)` over the production pairs of `g`.
pub fn build_dg(g: &ESystem) -> DependencyGraph<ProductionPair> {
    let pairs: Vec<ProductionPair> = g.pairs().into_iter().collect();
    let edges: Vec<(ProductionPair, ProductionPair)> = pairs
        .iter()
        .flat_map(|p| pairs.iter().filter(move |q| p.depends_on(q)).map(move |q| (p.clone(), q.clone())))
        .collect();
    DependencyGraph::from_edges(pairs.clone(), edges)
}

/// `DG(H)` over Horn rule ids, lifted from the pair level.
pub fn build_dg_horn<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> DependencyGraph<String> {
    let hs: Vec<(String, ProductionPair)> =
        rules.into_iter().filter_map(|r| r.horn_pair().map(|p| (r.id.clone(), p))).collect();
    let edges: Vec<(String, String)> = hs
        .iter()
        .flat_map(|(a, p)| hs.iter().filter(move |(_, q)| p.depends_on(q)).map(move |(b, _)| (a.clone(), b.clone())))
        .collect();
    DependencyGraph::from_edges(hs.iter().map(|(id, _)| id.clone()), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{calculus_grammar, horn_rules};
    use crate::fixtures::example_calculus;
    use proptest::prelude::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn example_horn_graph() {
        let a = example_calculus();
        let dg = build_dg_horn(horn_rules(&a));
        let mut edges: Vec<(String, String)> = dg.base_edges().into_iter().map(|(x, y)| (x.clone(), y.clone())).collect();
        edges.sort();
        assert_eq!(edges, vec![("h3".to_string(), "h1".to_string()), ("h3".to_string(), "h2".to_string())]);
        assert!(dg.leq(&"h1".to_string(), &"h1".to_string()));
        let fr = dg.enumerate_fracturable();
        assert_eq!(fr, vec![set(&[]), set(&["h1"]), set(&["h2"]), set(&["h1", "h2"]), set(&["h1", "h2", "h3"])]);
        assert!(dg.is_anti_fracturable(&set(&["h3"])));
        assert!(!dg.is_fracturable(&set(&["h3"])));
        let anti = dg.enumerate_anti_fracturable();
        assert_eq!(anti, vec![set(&[]), set(&["h3"]), set(&["h1", "h3"]), set(&["h2", "h3"]), set(&["h1", "h2", "h3"])]);
    }

    #[test]
    fn pair_graph_matches_horn_graph() {
        let a = example_calculus();
        let dg = build_dg(&calculus_grammar(&a));
        assert_eq!(dg.len(), 3);
        assert_eq!(dg.base_edges().len(), 2);
        assert_eq!(dg.enumerate_fracturable().len(), 5);
    }

    #[test]
    fn trivial_graphs() {
        let empty: DependencyGraph<u8> = DependencyGraph::from_edges([], []);
        assert_eq!(empty.enumerate_fracturable(), vec![BTreeSet::new()]);
        let cyc = DependencyGraph::from_edges([0u8, 1, 2], [(0, 1), (1, 2), (2, 0)]);
        let all: BTreeSet<u8> = [0, 1, 2].into();
        assert_eq!(cyc.enumerate_fracturable(), vec![BTreeSet::new(), all.clone()]);
        let lone = DependencyGraph::from_edges([7u8], []);
        assert_eq!(lone.base_edges().len(), 0);
        assert!(lone.leq(&7, &7));
    }

    // oracle: powerset filtered by a direct scan of base edges
    fn brute(n: usize, edges: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
        let mut out: Vec<BTreeSet<usize>> = (0u32..1 << n)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect::<BTreeSet<usize>>())
            .filter(|s| edges.iter().all(|(i, j)| !s.contains(i) || s.contains(j)))
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
        out
    }

    fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (0usize..=10).prop_flat_map(|n| {
            let e = if n == 0 { Just(Vec::new()).boxed() } else { prop::collection::vec((0..n, 0..n), 0..(2 * n)).boxed() };
            (Just(n), e)
        })
    }

    proptest! {
        #[test]
        fn enumeration_matches_powerset((n, edges) in graph()) {
            let dg = DependencyGraph::from_edges(0..n, edges.clone());
            prop_assert_eq!(dg.enumerate_fracturable(), brute(n, &edges));
        }

        #[test]
        fn complement_bijection((n, edges) in graph()) {
            let dg = DependencyGraph::from_edges(0..n, edges);
            let all: BTreeSet<usize> = (0..n).collect();
            let fr = dg.enumerate_fracturable();
            let anti = dg.enumerate_anti_fracturable();
            prop_assert_eq!(fr.len(), anti.len());
            for s in &anti {
                prop_assert!(dg.is_anti_fracturable(s));
                let c: BTreeSet<usize> = all.difference(s).copied().collect();
                prop_assert!(fr.contains(&c));
            }
        }

        #[test]
        fn closure_law((n, edges) in graph(), pick in any::<(u16, u16)>()) {
            let dg = DependencyGraph::from_edges(0..n, edges.clone());
            let fr = dg.enumerate_fracturable();
            let v1 = &fr[pick.0 as usize % fr.len()];
            let rest: Vec<usize> = (0..n).filter(|i| !v1.contains(i)).collect();
            let sub_edges: Vec<(usize, usize)> = edges.iter().copied().filter(|(i, j)| !v1.contains(i) && !v1.contains(j)).collect();
            let sub = DependencyGraph::from_edges(rest, sub_edges);
            let fr2 = sub.enumerate_fracturable();
            let v2 = &fr2[pick.1 as usize % fr2.len()];
            let union: BTreeSet<usize> = v1.union(v2).copied().collect();
            prop_assert!(dg.is_fracturable(&union));
        }
    }
}
