//! Derivations as step trees, their validation against a calculus, and the
//! quantity and size metrics.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::calculus::Calculus;
use crate::gsequent::{EdgeAtom, GSequent};
use crate::rules::{check_instance, check_weakening, CheckOptions, Instantiation, RuleError, RuleKind};

/// Rule id of path weakening.
pub const PW: &str = "pw";
/// Rule id of an open leaf.
pub const HYP: &str = "hyp";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProofStep {
    pub conclusion: GSequent,
    pub rule: String,
    pub inst: Instantiation,
    pub premises: Vec<ProofStep>,
}

/// Where in a tree a step sits: premise indices from the root.
pub type StepPath = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofErrorKind {
    #[error("unknown rule")]
    UnknownRule,
    #[error("path weakening is not allowed here")]
    WeakeningNotAllowed,
    #[error("open hypothesis")]
    OpenHypothesis,
    #[error("a hypothesis has premises")]
    HypothesisWithPremises,
    #[error("malformed instantiation for {0}")]
    MalformedInstantiation(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("step {} (`{rule}`): {kind}", fmt_path(.path))]
pub struct ProofError {
    pub path: StepPath,
    pub rule: String,
    pub kind: ProofErrorKind,
}

fn fmt_path(p: &StepPath) -> String {
    if p.is_empty() {
        "root".into()
    } else {
        p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// What validation accepts beyond the calculus's own rules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ValidateOptions {
    pub allow_pw: bool,
    pub allow_hyp: bool,
    pub check: CheckOptions,
}

impl ValidateOptions {
    /// Hypotheses and path weakening both allowed.
    pub fn derivation() -> Self {
        ValidateOptions { allow_pw: true, allow_hyp: true, check: CheckOptions::default() }
    }
}

impl ProofStep {
    pub fn new(conclusion: GSequent, rule: impl Into<String>, inst: Instantiation, premises: Vec<ProofStep>) -> Self {
        ProofStep { conclusion, rule: rule.into(), inst, premises }
    }

    pub fn hypothesis(g: GSequent) -> Self {
        ProofStep::new(g, HYP, Instantiation::Hypothesis, Vec::new())
    }

    pub fn weakening(premise: ProofStep, edge: EdgeAtom) -> Self {
        let mut g = premise.conclusion.clone();
        g.add_edge(edge.clone()).expect("weakened edge joins existing vertices");
        ProofStep::new(g, PW, Instantiation::Weakening { edge }, vec![premise])
    }

    pub fn is_hypothesis(&self) -> bool {
        self.rule == HYP
    }

    pub fn is_weakening(&self) -> bool {
        self.rule == PW
    }

    /// Preorder walk with paths.
    pub fn steps(&self) -> Vec<(StepPath, &ProofStep)> {
        let mut out = Vec::new();
        let mut stack: Vec<(StepPath, &ProofStep)> = vec![(Vec::new(), self)];
        while let Some((path, s)) = stack.pop() {
            for (i, p) in s.premises.iter().enumerate().rev() {
                let mut q = path.clone();
                q.push(i);
                stack.push((q, p));
            }
            out.push((path, s));
        }
        out
    }

    pub fn at(&self, path: &[usize]) -> Option<&ProofStep> {
        path.iter().try_fold(self, |s, &i| s.premises.get(i))
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut ProofStep> {
        path.iter().try_fold(self, |s, &i| s.premises.get_mut(i))
    }

    pub fn step_count(&self) -> usize {
        1 + self.premises.iter().map(ProofStep::step_count).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(ProofStep::height).max().unwrap_or(0)
    }

    /// How many steps use each rule id.
    pub fn rule_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for (_, s) in self.steps() {
            *out.entry(s.rule.clone()).or_insert(0) += 1;
        }
        out
    }

    pub fn uses_rule(&self, id: &str) -> bool {
        self.steps().iter().any(|(_, s)| s.rule == id)
    }

    pub fn hypotheses(&self) -> Vec<&GSequent> {
        self.steps().into_iter().filter(|(_, s)| s.is_hypothesis()).map(|(_, s)| &s.conclusion).collect()
    }

    pub fn sequents(&self) -> Vec<&GSequent> {
        self.steps().into_iter().map(|(_, s)| &s.conclusion).collect()
    }
}

impl fmt::Display for ProofStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(s: &ProofStep, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            writeln!(f, "{:indent$}{}  [{}]", "", s.conclusion, s.rule, indent = 2 * depth)?;
            s.premises.iter().try_for_each(|p| go(p, depth + 1, f))
        }
        go(self, 0, f)
    }
}

/// Check one step against its rule, ignoring the subtrees.
pub fn check_step(step: &ProofStep, c: &Calculus, opts: ValidateOptions) -> Result<(), ProofErrorKind> {
    let premises: Vec<&GSequent> = step.premises.iter().map(|p| &p.conclusion).collect();
    match step.rule.as_str() {
        HYP => {
            if !opts.allow_hyp {
                return Err(ProofErrorKind::OpenHypothesis);
            }
            if !step.premises.is_empty() {
                return Err(ProofErrorKind::HypothesisWithPremises);
            }
            match step.inst {
                Instantiation::Hypothesis => Ok(()),
                _ => Err(ProofErrorKind::MalformedInstantiation(HYP.into())),
            }
        }
        PW => {
            if !opts.allow_pw {
                return Err(ProofErrorKind::WeakeningNotAllowed);
            }
            match (&step.inst, premises.as_slice()) {
                (Instantiation::Weakening { edge }, [p]) => Ok(check_weakening(p, &step.conclusion, edge)?),
                _ => Err(ProofErrorKind::MalformedInstantiation(PW.into())),
            }
        }
        id => {
            let rule = c.rule(id).ok_or(ProofErrorKind::UnknownRule)?;
            Ok(check_instance(rule, &premises, &step.conclusion, &step.inst, opts.check)?)
        }
    }
}

/// Every step checks; the first failure in preorder is reported.
pub fn validate_with(p: &ProofStep, c: &Calculus, opts: ValidateOptions) -> Result<(), ProofError> {
    for (path, s) in p.steps() {
        check_step(s, c, opts).map_err(|kind| ProofError { path, rule: s.rule.clone(), kind })?;
    }
    Ok(())
}

/// A proof: every step is a rule of `c`, so every leaf is an initial step.
pub fn validate(p: &ProofStep, c: &Calculus) -> Result<(), ProofError> {
    validate_with(p, c, ValidateOptions::default())
}

pub fn is_valid(p: &ProofStep, c: &Calculus) -> bool {
    validate(p, c).is_ok()
}

/// Number of distinct g-sequents in the tree.
pub fn quantity(p: &ProofStep) -> usize {
    p.sequents().into_iter().collect::<HashSet<_>>().len()
}

/// Largest g-sequent size times the quantity.
pub fn proof_size(p: &ProofStep) -> usize {
    let max = p.sequents().into_iter().map(GSequent::size).max().unwrap_or(0);
    max * quantity(p)
}

/// The root is a single sequent with no edges.
pub fn is_complete(p: &ProofStep) -> bool {
    p.conclusion.vertex_count() == 1 && p.conclusion.edge_count() == 0
}

pub fn is_polytree_proof(p: &ProofStep) -> bool {
    p.sequents().into_iter().all(GSequent::is_polytree)
}

/// Leaves are initial steps of `c`.
pub fn leaves_initial(p: &ProofStep, c: &Calculus) -> bool {
    p.steps().into_iter().filter(|(_, s)| s.premises.is_empty()).all(|(_, s)| {
        c.rule(&s.rule).is_some_and(|r| matches!(r.kind, RuleKind::Initial { .. }))
    })
}
