//! Upward and downward spaces of a calculus, the two enumeration algorithms,
//! their correspondence, and proof translation between members.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::calculus::{calculus_grammar, f_op, g_op, horn_ids, horn_rules, Calculus, CalculusError};
use crate::depgraph::{build_dg, build_dg_horn};
use crate::proof::ProofStep;
use crate::rewriting::ProductionPair;
use crate::transform::{lift_proof, lower_proof, Trace, TransformError};

pub use crate::calculus::{bottom_of, top_of};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Upward,
    Downward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Upward => "upward",
            Direction::Downward => "downward",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("{found} Horn rules exceed the cap of {cap}")]
    HornCap { found: usize, cap: usize },
    #[error("time budget exhausted after {0} members")]
    Budget(usize),
    #[error("order is not antisymmetric between {0} and {1}")]
    NotAntisymmetric(String, String),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

#[derive(Clone, Debug, Default)]
pub struct SpaceOptions {
    pub horn_cap: Option<usize>,
    pub deadline: Option<Instant>,
}

/// Members with the generation order. `leq(i, j)` holds when `i` sits below
/// `j`, i.e. keeps at least the Horn rules of `j`. The origin is member 0.
#[derive(Clone, Debug)]
pub struct CalculusSpace {
    pub direction: Direction,
    pub members: Vec<Calculus>,
    /// Upward: origin Horn ids absorbed. Downward: production pairs fractured.
    pub labels: Vec<Vec<String>>,
    generation: BTreeSet<(usize, usize)>,
    order: Vec<Vec<bool>>,
}

impl CalculusSpace {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn origin(&self) -> &Calculus {
        &self.members[0]
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.order[i][j]
    }

    /// Generation steps as `(lower, upper)`.
    pub fn generation_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.generation
    }

    /// Covering pairs `(lower, upper)` of the order.
    pub fn hasse(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let lt = |i: usize, j: usize| i != j && self.order[i][j];
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if lt(i, j) && !(0..n).any(|k| lt(i, k) && lt(k, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The member above every other.
    pub fn top(&self) -> usize {
        (0..self.len()).find(|&i| (0..self.len()).all(|j| self.order[j][i])).expect("a lattice has a top")
    }

    pub fn bottom(&self) -> usize {
        (0..self.len()).find(|&i| (0..self.len()).all(|j| self.order[i][j])).expect("a lattice has a bottom")
    }

    pub fn find(&self, c: &Calculus) -> Option<usize> {
        self.members.iter().position(|m| m == c)
    }

    /// Display name of a member.
    pub fn member_name(&self, i: usize) -> String {
        if self.labels[i].is_empty() {
            return self.origin().name.clone();
        }
        let op = match self.direction {
            Direction::Upward => "f",
            Direction::Downward => "g",
        };
        format!("{op}({}, {{{}}})", self.origin().name, self.labels[i].join(", "))
    }
}

fn budget(opts: &SpaceOptions, found: usize) -> Result<(), LatticeError> {
    match opts.deadline {
        Some(d) if Instant::now() > d => Err(LatticeError::Budget(found)),
        _ => Ok(()),
    }
}

/// Breadth-first closure from `origin`; `step` lists the successors of a member.
fn explore(
    origin: &Calculus,
    direction: Direction,
    opts: &SpaceOptions,
    step: impl Fn(&Calculus) -> Result<Vec<Calculus>, LatticeError>,
    label: impl Fn(&Calculus) -> Vec<String>,
) -> Result<CalculusSpace, LatticeError> {
    let mut members = vec![origin.clone()];
    let mut index: HashMap<Calculus, usize> = HashMap::from([(origin.clone(), 0)]);
    let mut generated = BTreeSet::new();
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        budget(opts, members.len())?;
        if let Some(cap) = opts.horn_cap {
            let found = horn_rules(&members[i]).len();
            if found > cap {
                return Err(LatticeError::HornCap { found, cap });
            }
        }
        for next in step(&members[i].clone())? {
            let j = *index.entry(next.clone()).or_insert_with(|| {
                members.push(next);
                queue.push_back(members.len() - 1);
                members.len() - 1
            });
            if i != j {
                generated.insert(match direction {
                    Direction::Upward => (i, j),
                    Direction::Downward => (j, i),
                });
            }
        }
    }

    // origin first, then by label size and label
    let labels: Vec<Vec<String>> = members.iter().map(&label).collect();
    let mut perm: Vec<usize> = (0..members.len()).collect();
    perm[1..].sort_by(|&a, &b| labels[a].len().cmp(&labels[b].len()).then_with(|| labels[a].cmp(&labels[b])));
    let mut pos = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        pos[old] = new;
    }
    let members: Vec<Calculus> = perm.iter().map(|&o| members[o].clone()).collect();
    let labels: Vec<Vec<String>> = perm.iter().map(|&o| labels[o].clone()).collect();
    let generation: BTreeSet<(usize, usize)> = generated.into_iter().map(|(a, b)| (pos[a], pos[b])).collect();

    let n = members.len();
    let mut order = vec![vec![false; n]; n];
    for (i, row) in order.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in &generation {
        order[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if order[i][k] {
                for j in 0..n {
                    if order[k][j] {
                        order[i][j] = true;
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if order[i][j] && order[j][i] {
                return Err(LatticeError::NotAntisymmetric(members[i].to_string(), members[j].to_string()));
            }
        }
    }
    Ok(CalculusSpace { direction, members, labels, generation, order })
}

/// The upward space: repeatedly absorb and delete anti-fracturable Horn sets.
pub fn implicate_with(c: &Calculus, opts: &SpaceOptions) -> Result<CalculusSpace, LatticeError> {
    let origin_horn = horn_ids(c);
    explore(
        c,
        Direction::Upward,
        opts,
        |b| {
            let dg = build_dg_horn(horn_rules(b));
            dg.enumerate_anti_fracturable()
                .into_iter()
                .filter(|h| !h.is_empty())
                .map(|h| Ok(f_op(b, &h)?))
                .collect()
        },
        |m| origin_horn.difference(&horn_ids(m)).cloned().collect(),
    )
}

pub fn implicate(c: &Calculus) -> CalculusSpace {
    implicate_with(c, &SpaceOptions::default()).expect("the upward order is antisymmetric")
}

fn constraint_pairs(c: &Calculus) -> BTreeSet<ProductionPair> {
    calculus_grammar(&c.without(&horn_ids(c))).pairs()
}

/// The downward space: repeatedly fracture fracturable pair sets and add
/// their Horn rules.
pub fn explicate_with(c: &Calculus, opts: &SpaceOptions) -> Result<CalculusSpace, LatticeError> {
    let origin_pairs = constraint_pairs(c);
    explore(
        c,
        Direction::Downward,
        opts,
        |b| {
            let dg = build_dg(&calculus_grammar(&b.without(&horn_ids(b))));
            Ok(dg.enumerate_fracturable().into_iter().filter(|p| !p.is_empty()).map(|p| g_op(b, &p)).collect())
        },
        |m| {
            let left = constraint_pairs(m);
            origin_pairs.difference(&left).map(|p| p.forward.to_string()).collect()
        },
    )
}

pub fn explicate(c: &Calculus) -> CalculusSpace {
    explicate_with(c, &SpaceOptions::default()).expect("the downward order is antisymmetric")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsoError {
    #[error("expected an upward and a downward space")]
    Directions,
    #[error("spaces have {0} and {1} members")]
    Sizes(usize, usize),
    #[error("member {0} of the upward space has no counterpart")]
    Unmatched(String),
    #[error("order differs between {0} and {1}")]
    Order(String, String),
    #[error("grammar of {0} differs from the origin's")]
    Grammar(String),
}

/// `map[i]` is the downward member equal to upward member `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub map: Vec<usize>,
}

/// Match members by calculus equality and check that the orders agree and
/// every member has the same grammar.
pub fn space_isomorphism(up: &CalculusSpace, down: &CalculusSpace) -> Result<Isomorphism, IsoError> {
    if up.direction != Direction::Upward || down.direction != Direction::Downward {
        return Err(IsoError::Directions);
    }
    if up.len() != down.len() {
        return Err(IsoError::Sizes(up.len(), down.len()));
    }
    let map = (0..up.len())
        .map(|i| down.find(&up.members[i]).ok_or_else(|| IsoError::Unmatched(up.member_name(i))))
        .collect::<Result<Vec<_>, _>>()?;
    for i in 0..up.len() {
        for j in 0..up.len() {
            if up.leq(i, j) != down.leq(map[i], map[j]) {
                return Err(IsoError::Order(up.member_name(i), up.member_name(j)));
            }
        }
    }
    let g = calculus_grammar(up.origin());
    for (i, m) in up.members.iter().enumerate() {
        if calculus_grammar(m) != g {
            return Err(IsoError::Grammar(up.member_name(i)));
        }
    }
    for (i, m) in down.members.iter().enumerate() {
        if calculus_grammar(m) != g {
            return Err(IsoError::Grammar(down.member_name(i)));
        }
    }
    Ok(Isomorphism { map })
}

/// Move a proof from member `from` to member `to`: up by lifting, down by
/// lowering, and between incomparable members through the bottom.
pub fn translate_in_space(p: &ProofStep, space: &CalculusSpace, from: usize, to: usize) -> Result<(ProofStep, Trace), TransformError> {
    let (a, b) = (&space.members[from], &space.members[to]);
    if from == to {
        crate::proof::validate(p, a)?;
        return Ok((p.clone(), Trace::default()));
    }
    if space.leq(from, to) {
        return lift_proof(p, a, b);
    }
    if space.leq(to, from) {
        return lower_proof(p, a, b);
    }
    let bottom = space.bottom();
    let (mid, mut trace) = lower_proof(p, a, &space.members[bottom])?;
    let (out, rest) = lift_proof(&mid, &space.members[bottom], b)?;
    trace.events.extend(rest.events);
    Ok((out, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{is_explicit, is_implicit};
    use crate::fixtures::{example_calculus, g3i_explicit, g3i_implicit, synthetic_calculus};

    fn names(s: &CalculusSpace) -> Vec<String> {
        (0..s.len()).map(|i| s.member_name(i)).collect()
    }

    #[test]
    fn example_upward_space() {
        let a = example_calculus();
        let up = implicate(&a);
        assert_eq!(
            names(&up),
            ["example", "f(example, {h3})", "f(example, {h1, h3})", "f(example, {h2, h3})", "f(example, {h1, h2, h3})"]
        );
        assert_eq!(up.hasse(), vec![(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)]);
        assert_eq!(up.top(), 4);
        assert_eq!(up.bottom(), 0);
        assert_eq!(up.members[4], top_of(&a));
        assert_eq!(up.members.iter().filter(|m| is_implicit(m)).count(), 1);
    }

    #[test]
    fn example_downward_space_matches() {
        let a = example_calculus();
        let up = implicate(&a);
        let down = explicate(&top_of(&a));
        assert_eq!(down.len(), 5);
        assert_eq!(down.members[down.bottom()], a);
        assert_eq!(down.members.iter().filter(|m| is_explicit(m)).count(), 1);
        let iso = space_isomorphism(&up, &down).unwrap();
        assert_eq!(iso.map[0], down.bottom());
        assert_eq!(iso.map[up.top()], 0);
        assert!(space_isomorphism(&down, &up).is_err());
    }

    #[test]
    fn g3i_spaces() {
        let up = implicate(&g3i_explicit());
        // tra depends on ref: {tra} and {ref, tra} are the non-empty anti-fracturable sets
        assert_eq!(names(&up), ["g3i", "f(g3i, {tra})", "f(g3i, {ref, tra})"]);
        assert_eq!(up.hasse(), vec![(0, 1), (1, 2)]);
        assert_eq!(up.members[2], g3i_implicit());
        let down = explicate(&g3i_implicit());
        assert_eq!(down.len(), 3);
        space_isomorphism(&up, &down).unwrap();
    }

    #[test]
    fn singleton_spaces() {
        let c = example_calculus().without(&horn_ids(&example_calculus()));
        assert_eq!(implicate(&c).len(), 1);
        assert_eq!(implicate(&c).hasse(), vec![]);
        let flat = crate::calculus::Calculus::new("l", c.alphabet().clone(), vec![crate::rules::Rule::local("l", crate::rules::Relation::new(crate::rules::Always), 1)]).unwrap();
        assert_eq!(explicate(&flat).len(), 1);
        space_isomorphism(&implicate(&flat), &explicate(&flat)).unwrap();
    }

    #[test]
    fn caps() {
        let opts = SpaceOptions { horn_cap: Some(2), deadline: None };
        assert!(matches!(implicate_with(&synthetic_calculus(), &opts), Err(LatticeError::HornCap { found: 3, cap: 2 })));
        let past = SpaceOptions { horn_cap: None, deadline: Some(Instant::now()) };
        std::thread::sleep(std::time::Duration::from_millis(2));
        assert!(matches!(implicate_with(&synthetic_calculus(), &past), Err(LatticeError::Budget(_))));
    }
}
