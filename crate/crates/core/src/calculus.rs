//! Abstract calculi: a finite rule set over an edge alphabet, with the derived
//! grammar, Horn set and production pairs, and the operators that move between
//! calculi by absorbing or fracturing Horn reasoning.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::gsequent::{Alphabet, EdgeType};
use crate::rewriting::{ESystem, ProductionPair};
use crate::rules::{absorb_rule, fracture_rule, rule_grammar, Rule, RuleKey, RuleKind};

/// Rule ids reserved for path weakening and open leaves.
pub const RESERVED_IDS: [&str; 2] = ["pw", "hyp"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CalculusError {
    #[error("rule id `{0}` is used twice")]
    DuplicateId(String),
    #[error("rule id `{0}` is reserved")]
    ReservedId(String),
    #[error("rule `{0}` uses edge type `{1}` outside the alphabet")]
    AlphabetMismatch(String, EdgeType),
    #[error("no rule `{0}` in the calculus")]
    UnknownRule(String),
    #[error("rule `{0}` is not a Horn rule")]
    NotHorn(String),
}

/// Rules are kept sorted by id. Equality ignores ids and the name.
#[derive(Clone, Debug)]
pub struct Calculus {
    pub name: String,
    alphabet: Alphabet,
    rules: Vec<Rule>,
}

/// Canonical, identity-free description of a calculus.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CalculusKey {
    pub alphabet: Vec<EdgeType>,
    pub rules: Vec<RuleKey>,
}

impl Calculus {
    pub fn new(name: &str, alphabet: Alphabet, mut rules: Vec<Rule>) -> Result<Self, CalculusError> {
        rules.sort_by(|a, b| a.id.cmp(&b.id));
        for w in rules.windows(2) {
            if w[0].id == w[1].id {
                return Err(CalculusError::DuplicateId(w[0].id.clone()));
            }
        }
        for r in &rules {
            if RESERVED_IDS.contains(&r.id.as_str()) {
                return Err(CalculusError::ReservedId(r.id.clone()));
            }
            if let Some(t) = r.edge_types().into_iter().find(|t| !alphabet.contains(t)) {
                return Err(CalculusError::AlphabetMismatch(r.id.clone(), t));
            }
        }
        Ok(Calculus { name: name.to_string(), alphabet, rules })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.binary_search_by(|r| r.id.as_str().cmp(id)).ok().map(|i| &self.rules[i])
    }

    pub fn key(&self) -> CalculusKey {
        let mut rules: Vec<RuleKey> = self.rules.iter().map(Rule::key).collect();
        rules.sort();
        rules.dedup();
        CalculusKey { alphabet: self.alphabet.iter().cloned().collect(), rules }
    }

    fn rebuild(&self, rules: Vec<Rule>) -> Calculus {
        Calculus::new(&self.name, self.alphabet.clone(), rules).expect("operators preserve well-formedness")
    }

    /// `self \ ids`.
    pub fn without(&self, ids: &BTreeSet<String>) -> Calculus {
        self.rebuild(self.rules.iter().filter(|r| !ids.contains(&r.id)).cloned().collect())
    }

    /// `self u rules`; a rule whose key is already present is skipped, and a
    /// clashing id gets primes appended.
    pub fn with_rules(&self, extra: impl IntoIterator<Item = Rule>) -> Calculus {
        let mut rules = self.rules.clone();
        for mut r in extra {
            if rules.iter().any(|x| x.key() == r.key()) {
                continue;
            }
            while rules.iter().any(|x| x.id == r.id) {
                r.id.push('\'');
            }
            rules.push(r);
        }
        self.rebuild(rules)
    }

    /// Id of the rule in this calculus with the same key as `rule`.
    pub fn find_equivalent(&self, rule: &Rule) -> Option<&Rule> {
        let k = rule.key();
        self.rules.iter().find(|r| r.key() == k)
    }
}

impl PartialEq for Calculus {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Calculus {}

impl Hash for Calculus {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.rules.iter().map(|r| r.id.as_str()).collect();
        write!(f, "{}{{{}}}", self.name, ids.join(", "))
    }
}

/// `H(c)`.
pub fn horn_rules(c: &Calculus) -> Vec<&Rule> {
    c.rules.iter().filter(|r| r.is_horn()).collect()
}

pub fn horn_ids(c: &Calculus) -> BTreeSet<String> {
    horn_rules(c).into_iter().map(|r| r.id.clone()).collect()
}

/// `G(c)`: the union of every rule grammar.
pub fn calculus_grammar(c: &Calculus) -> ESystem {
    rules_grammar(c.rules.iter())
}

pub fn rules_grammar<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> ESystem {
    rules.into_iter().fold(ESystem::empty(), |acc, r| acc.union(&rule_grammar(r)))
}

/// `P(c)`.
pub fn production_pairs_of(c: &Calculus) -> BTreeSet<ProductionPair> {
    calculus_grammar(c).pairs()
}

/// `c (+) g`.
pub fn calculus_absorb(c: &Calculus, g: &ESystem) -> Calculus {
    c.rebuild(c.rules.iter().map(|r| absorb_rule(r, g)).collect())
}

/// `c (-) g`.
pub fn calculus_fracture(c: &Calculus, g: &ESystem) -> Calculus {
    c.rebuild(c.rules.iter().map(|r| fracture_rule(r, g)).collect())
}

fn horn_subset<'a>(c: &'a Calculus, h: &BTreeSet<String>) -> Result<Vec<&'a Rule>, CalculusError> {
    h.iter()
        .map(|id| {
            let r = c.rule(id).ok_or_else(|| CalculusError::UnknownRule(id.clone()))?;
            if r.is_horn() {
                Ok(r)
            } else {
                Err(CalculusError::NotHorn(id.clone()))
            }
        })
        .collect()
}

/// `f(c, H) = (c (+) G(H)) \ H`.
pub fn f_op(c: &Calculus, h: &BTreeSet<String>) -> Result<Calculus, CalculusError> {
    let g = rules_grammar(horn_subset(c, h)?);
    Ok(calculus_absorb(c, &g).without(h))
}

/// `g(c, P) = (c (-) G(P)) u H(P)`.
pub fn g_op(c: &Calculus, p: &BTreeSet<ProductionPair>) -> Calculus {
    let g = ESystem::from_pairs(p);
    calculus_fracture(c, &g).with_rules(p.iter().map(Rule::horn_of_pair))
}

/// Every initial and reachability rule is unchanged by fracturing with `G(c)`.
pub fn is_explicit(c: &Calculus) -> bool {
    let g = calculus_grammar(c);
    constrained(c).all(|r| &fracture_rule(r, &g) == r)
}

/// No Horn rules, and every initial and reachability rule already contains `G(c)`.
pub fn is_implicit(c: &Calculus) -> bool {
    let g = calculus_grammar(c);
    horn_rules(c).is_empty() && constrained(c).all(|r| &absorb_rule(r, &g) == r)
}

fn constrained(c: &Calculus) -> impl Iterator<Item = &Rule> {
    c.rules.iter().filter(|r| matches!(r.kind, RuleKind::Initial { .. } | RuleKind::Reachability { .. }))
}

/// `f(c, H(c))`.
pub fn top_of(c: &Calculus) -> Calculus {
    f_op(c, &horn_ids(c)).expect("Horn ids come from the calculus")
}

/// `g(c, P(c))`.
pub fn bottom_of(c: &Calculus) -> Calculus {
    g_op(c, &production_pairs_of(c))
}
