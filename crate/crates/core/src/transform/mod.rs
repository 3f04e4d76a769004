//! Proof rewriting: the two-step permutations, Horn absorption into initial
//! steps, inverse-Horn saturation, path-weakening elimination, the fracture
//! simulations, and whole-proof translation between related calculi.

mod fracture;
mod permute;
mod saturate;
mod translate;
mod weaken;

use std::fmt;

use thiserror::Error;

use crate::calculus::CalculusError;
use crate::gsequent::{EdgeAtom, GSequent};
use crate::proof::{ProofError, ProofStep};
use crate::rules::{Instantiation, Rule};

pub use fracture::{fracture_simulate_initial, fracture_simulate_reachability, horn_chain};
pub use permute::{
    absorb_initial_horn, permute_horn_above_expansion, permute_horn_horn, permute_local_horn, permute_reach_horn,
};
pub use saturate::{invhorn_saturate, invhorn_trace, is_saturated, SaturationStep};
pub use translate::{
    lift_proof, lower_proof, translate_down_downward, translate_down_upward, translate_up_downward,
    translate_up_upward,
};
pub use weaken::{eliminate_pw, push_pw};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("window shape: {0}")]
    Shape(String),
    #[error("reachability rule `{0}` does not contain the grammar of `{1}`")]
    NotAbsorbed(String, String),
    #[error("{0:?} is not fracturable")]
    NotFracturable(Vec<String>),
    #[error("{0:?} is not anti-fracturable")]
    NotAntiFracturable(Vec<String>),
    #[error("no rule `{0}` in the target calculus")]
    MissingRule(String),
    #[error("rule `{0}` has no walk in the rewritten sequent")]
    NoWalk(String),
    #[error("cannot move a Horn step past `{0}`")]
    Blocked(String),
    #[error("target is not the expected neighbour: {0}")]
    NotRelated(String),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("rewritten proof does not check: {0}")]
    Invalid(#[from] ProofError),
}

/// Coarse stages of a translation, in the order they run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Rename,
    Lift,
    Simulate,
    Weakening,
    Check,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Rename => "rename",
            Phase::Lift => "lift",
            Phase::Simulate => "simulate",
            Phase::Weakening => "weakening",
            Phase::Check => "check",
        };
        f.write_str(s)
    }
}

/// One primitive rewrite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub phase: Phase,
    pub op: &'static str,
    pub rule: String,
    pub detail: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.phase, self.op, self.rule)?;
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn push(&mut self, phase: Phase, op: &'static str, rule: impl Into<String>, detail: impl Into<String>) {
        self.events.push(TraceEvent { phase, op, rule: rule.into(), detail: detail.into() });
    }

    /// Phases never go backwards.
    pub fn phases_ordered(&self) -> bool {
        self.events.windows(2).all(|w| w[0].phase <= w[1].phase)
    }

    pub fn count(&self, op: &str) -> usize {
        self.events.iter().filter(|e| e.op == op).count()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.events.iter().try_for_each(|e| writeln!(f, "{e}"))
    }
}

/// The edge a Horn step adds in its premise.
pub(crate) fn horn_alpha(rule: &Rule, step: &ProofStep) -> Result<EdgeAtom, TransformError> {
    match &step.inst {
        Instantiation::Horn { walk } if !walk.is_empty() => rule
            .horn_added_edge(&walk[0], walk.last().unwrap())
            .ok_or_else(|| TransformError::Shape(format!("`{}` is not a Horn rule", rule.id))),
        _ => Err(TransformError::Shape(format!("step `{}` has no Horn walk", step.rule))),
    }
}

/// `g` without `e`, unless the reference sequent already has it.
pub(crate) fn minus_unless(g: &GSequent, e: &EdgeAtom, keep_in: &GSequent) -> GSequent {
    let mut out = g.clone();
    if !keep_in.contains_edge(e) {
        out.remove_edge(e);
    }
    out
}

pub(crate) fn with_edge(g: &GSequent, e: &EdgeAtom) -> GSequent {
    let mut out = g.clone();
    out.add_edge(e.clone()).expect("edge joins existing vertices");
    out
}
