//! Bounded bottom-up proof search by iterative deepening.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::calculus::Calculus;
use crate::gsequent::GSequent;
use crate::proof::ProofStep;
use crate::rules::{apply_bottom_up, CheckOptions, Rule, RuleError};

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Largest proof height tried.
    pub max_depth: usize,
    pub check: CheckOptions,
    pub deadline: Option<Instant>,
    /// Cap on expanded goals over the whole search.
    pub node_limit: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_depth: 8, check: CheckOptions::default(), deadline: None, node_limit: None }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("search budget exhausted after {0} goals")]
    Budget(usize),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: usize,
    pub depth_reached: usize,
}

struct Searcher<'a, R> {
    rules: Vec<&'a Rule>,
    opts: &'a SearchOptions,
    rng: Option<&'a mut R>,
    // largest height known to fail for a goal
    failed: HashMap<GSequent, usize>,
    stats: SearchStats,
}

impl<R: Rng> Searcher<'_, R> {
    fn tick(&mut self) -> Result<(), SearchError> {
        self.stats.nodes += 1;
        let over_nodes = self.opts.node_limit.is_some_and(|n| self.stats.nodes > n);
        let over_time = self.stats.nodes % 256 == 0 && self.opts.deadline.is_some_and(|d| Instant::now() > d);
        if over_nodes || over_time {
            return Err(SearchError::Budget(self.stats.nodes));
        }
        Ok(())
    }

    fn go(&mut self, goal: &GSequent, depth: usize) -> Result<Option<ProofStep>, SearchError> {
        if depth == 0 || self.failed.get(goal).is_some_and(|&d| d >= depth) {
            return Ok(None);
        }
        self.tick()?;
        let mut order = self.rules.clone();
        if let Some(rng) = self.rng.as_deref_mut() {
            order.shuffle(rng);
        }
        // close leaves before opening branches
        order.sort_by_key(|r| r.premise_count() != 0);
        for rule in order {
            let mut apps = apply_bottom_up(rule, goal, self.opts.check)?;
            if let Some(rng) = self.rng.as_deref_mut() {
                apps.shuffle(rng);
            }
            'apps: for (premises, inst) in apps {
                if !premises.is_empty() && depth == 1 {
                    continue;
                }
                let mut subproofs = Vec::with_capacity(premises.len());
                for p in &premises {
                    match self.go(p, depth - 1)? {
                        Some(s) => subproofs.push(s),
                        None => continue 'apps,
                    }
                }
                return Ok(Some(ProofStep::new(goal.clone(), rule.id.clone(), inst, subproofs)));
            }
        }
        let e = self.failed.entry(goal.clone()).or_insert(0);
        *e = (*e).max(depth);
        Ok(None)
    }
}

fn run<R: Rng>(goal: &GSequent, c: &Calculus, opts: &SearchOptions, rng: Option<&mut R>) -> Result<(Option<ProofStep>, SearchStats), SearchError> {
    let mut s = Searcher { rules: c.rules().iter().collect(), opts, rng, failed: HashMap::new(), stats: SearchStats::default() };
    for depth in 1..=opts.max_depth {
        s.stats.depth_reached = depth;
        if let Some(p) = s.go(goal, depth)? {
            return Ok((Some(p), s.stats));
        }
    }
    Ok((None, s.stats))
}

/// Shallowest proof of `goal` up to `opts.max_depth`, or `None`.
pub fn prove(goal: &GSequent, c: &Calculus, opts: &SearchOptions) -> Result<Option<ProofStep>, SearchError> {
    Ok(run::<rand_chacha::ChaCha8Rng>(goal, c, opts, None)?.0)
}

pub fn prove_with_stats(goal: &GSequent, c: &Calculus, opts: &SearchOptions) -> Result<(Option<ProofStep>, SearchStats), SearchError> {
    run::<rand_chacha::ChaCha8Rng>(goal, c, opts, None)
}

/// As [`prove`], trying rules and applications in a random order.
pub fn prove_randomized<R: Rng>(goal: &GSequent, c: &Calculus, opts: &SearchOptions, rng: &mut R) -> Result<Option<ProofStep>, SearchError> {
    Ok(run(goal, c, opts, Some(rng))?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g3i_explicit, g3i_implicit};
    use crate::g3i::sequent;
    use crate::proof::{is_complete, is_polytree_proof, validate};
    use crate::transform::{lift_proof, lower_proof};
    use rand::SeedableRng;

    fn goal(s: &str) -> GSequent {
        GSequent::single("w", sequent(&[], &[s]))
    }

    #[test]
    fn identity_implication_both_variants() {
        let opts = SearchOptions::default();
        let ex = prove(&goal("p -> p"), &g3i_explicit(), &opts).unwrap().unwrap();
        validate(&ex, &g3i_explicit()).unwrap();
        assert_eq!(ex.rule_counts().keys().collect::<Vec<_>>(), ["id", "imp_r", "ref"]);
        assert!(!is_polytree_proof(&ex));

        let im = prove(&goal("p -> p"), &g3i_implicit(), &opts).unwrap().unwrap();
        validate(&im, &g3i_implicit()).unwrap();
        assert_eq!(im.rule_counts().keys().collect::<Vec<_>>(), ["id", "imp_r"]);
        assert!(is_complete(&im) && is_polytree_proof(&im));

        let (up, _) = lift_proof(&ex, &g3i_explicit(), &g3i_implicit()).unwrap();
        validate(&up, &g3i_implicit()).unwrap();
        let (down, _) = lower_proof(&im, &g3i_implicit(), &g3i_explicit()).unwrap();
        validate(&down, &g3i_explicit()).unwrap();
    }

    #[test]
    fn unprovable_and_budget() {
        let opts = SearchOptions { max_depth: 5, ..Default::default() };
        assert_eq!(prove(&goal("p"), &g3i_implicit(), &opts).unwrap(), None);
        let tight = SearchOptions { node_limit: Some(1), ..Default::default() };
        assert!(matches!(prove(&goal("p -> (q -> p)"), &g3i_explicit(), &tight), Err(SearchError::Budget(_))));
    }

    #[test]
    fn nested_and_randomized() {
        let opts = SearchOptions::default();
        let p = prove(&goal("p -> (q -> p)"), &g3i_implicit(), &opts).unwrap().unwrap();
        validate(&p, &g3i_implicit()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let r = prove_randomized(&goal("(p | q) -> (q | p)"), &g3i_implicit(), &opts, &mut rng).unwrap();
        // no rule for a disjunction on the right
        assert_eq!(r, None);
        let r = prove_randomized(&goal("p -> ((p -> q) -> q)"), &g3i_implicit(), &opts, &mut rng).unwrap().unwrap();
        validate(&r, &g3i_implicit()).unwrap();
        assert!(r.uses_rule("imp_l"));
    }
}
