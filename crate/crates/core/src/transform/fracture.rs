use std::collections::BTreeSet;

use crate::calculus::Calculus;
use crate::depgraph::build_dg;
use crate::proof::{validate_with, ProofStep, ValidateOptions};
use crate::rewriting::{ESystem, ProductionPair};
use crate::rules::{fracture_rule, rule_grammar, Instantiation, Rule};

use super::saturate::{invhorn_trace, SaturationStep};
use super::TransformError;

/// Stack Horn steps under `top`, undoing `steps` from the last added edge back.
pub fn horn_chain(top: ProofStep, steps: &[SaturationStep]) -> ProofStep {
    steps.iter().rev().fold(top, |acc, st| {
        let mut concl = acc.conclusion.clone();
        concl.remove_edge(&st.edge);
        ProofStep::new(concl, st.rule.clone(), Instantiation::Horn { walk: st.walk.clone() }, vec![acc])
    })
}

/// Fractured initial step on the saturated sequent, then the Horn chain back.
pub(crate) fn simulate_initial_with(step: &ProofStep, fractured_id: &str, horn: &[&Rule]) -> ProofStep {
    let (sat, steps) = invhorn_trace(&step.conclusion, horn);
    horn_chain(ProofStep::new(sat, fractured_id, step.inst.clone(), Vec::new()), &steps)
}

/// Weaken each premise up to the saturated graph, apply the fractured
/// reachability rule there, then the Horn chain back.
pub(crate) fn simulate_reach_with(step: &ProofStep, fractured_id: &str, horn: &[&Rule], premises: Vec<ProofStep>) -> ProofStep {
    let (sat, steps) = invhorn_trace(&step.conclusion, horn);
    let premises = premises
        .into_iter()
        .map(|p| {
            steps.iter().fold(p, |acc, st| {
                if acc.conclusion.contains_edge(&st.edge) {
                    acc
                } else {
                    ProofStep::weakening(acc, st.edge.clone())
                }
            })
        })
        .collect();
    horn_chain(ProofStep::new(sat, fractured_id, step.inst.clone(), premises), &steps)
}

struct Fractured {
    target: Calculus,
    id: String,
    horn: Vec<Rule>,
}

fn fracture_setup(step: &ProofStep, c: &Calculus, h_prime: &BTreeSet<ProductionPair>, want: fn(&Rule) -> bool) -> Result<Option<Fractured>, TransformError> {
    let rule = c.rule(&step.rule).ok_or_else(|| TransformError::MissingRule(step.rule.clone()))?;
    if !want(rule) {
        return Err(TransformError::Shape(format!("`{}` has the wrong kind", rule.id)));
    }
    if !build_dg(&rule_grammar(rule)).is_fracturable(h_prime) {
        return Err(TransformError::NotFracturable(h_prime.iter().map(|p| p.forward.to_string()).collect()));
    }
    if h_prime.is_empty() {
        return Ok(None);
    }
    let weaker = fracture_rule(rule, &ESystem::from_pairs(h_prime));
    let horn: Vec<Rule> = h_prime.iter().map(Rule::horn_of_pair).collect();
    let target = c.with_rules(std::iter::once(weaker.clone()).chain(horn.iter().cloned()));
    let id = target.find_equivalent(&weaker).expect("just added").id.clone();
    let horn = horn.iter().map(|h| target.find_equivalent(h).expect("just added").clone()).collect();
    Ok(Some(Fractured { target, id, horn }))
}

/// Replace an initial step by its fractured form plus Horn steps from `h_prime`.
pub fn fracture_simulate_initial(step: &ProofStep, c: &Calculus, h_prime: &BTreeSet<ProductionPair>) -> Result<(ProofStep, Calculus), TransformError> {
    let Some(f) = fracture_setup(step, c, h_prime, Rule::is_initial)? else {
        return Ok((step.clone(), c.clone()));
    };
    let horn: Vec<&Rule> = f.horn.iter().collect();
    let out = simulate_initial_with(step, &f.id, &horn);
    validate_with(&out, &f.target, ValidateOptions::derivation())?;
    Ok((out, f.target))
}

/// Replace a reachability step by weakening, its fractured form and Horn steps.
/// The premise subtrees are kept as they are.
pub fn fracture_simulate_reachability(step: &ProofStep, c: &Calculus, h_prime: &BTreeSet<ProductionPair>) -> Result<(ProofStep, Calculus), TransformError> {
    let Some(f) = fracture_setup(step, c, h_prime, Rule::is_reachability)? else {
        return Ok((step.clone(), c.clone()));
    };
    let horn: Vec<&Rule> = f.horn.iter().collect();
    let out = simulate_reach_with(step, &f.id, &horn, step.premises.clone());
    validate_with(&out, &f.target, ValidateOptions::derivation())?;
    Ok((out, f.target))
}
