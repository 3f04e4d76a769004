use std::collections::{BTreeMap, BTreeSet};

use crate::calculus::{calculus_grammar, f_op, g_op, horn_ids, horn_rules, Calculus};
use crate::depgraph::{build_dg, build_dg_horn};
use crate::gsequent::EdgeAtom;
use crate::proof::{validate, ProofStep};
use crate::rewriting::ProductionPair;
use crate::rules::{rule_grammar, Instantiation, Rule, RuleKind};

use super::fracture::{simulate_initial_with, simulate_reach_with};
use super::weaken::eliminate_pw;
use super::{horn_alpha, Phase, Trace, TransformError};

fn same_kind(a: &Rule, b: &Rule) -> bool {
    std::mem::discriminant(&a.kind) == std::mem::discriminant(&b.kind)
}

/// Where each source rule goes in the target; `None` for Horn rules that the
/// target no longer has.
fn rule_map(from: &Calculus, to: &Calculus) -> BTreeMap<String, Option<String>> {
    from.rules()
        .iter()
        .map(|r| {
            let target = if r.is_horn() {
                to.find_equivalent(r).map(|t| t.id.clone())
            } else {
                Some(to.rule(&r.id).filter(|t| same_kind(r, t)).map(|t| t.id.clone()).unwrap_or_default())
            };
            (r.id.clone(), target)
        })
        .collect()
}

fn target_id(map: &BTreeMap<String, Option<String>>, id: &str) -> Result<String, TransformError> {
    match map.get(id) {
        Some(Some(t)) if !t.is_empty() => Ok(t.clone()),
        _ => Err(TransformError::MissingRule(id.to_string())),
    }
}

fn closed_leaf(step: &ProofStep) -> Result<(), TransformError> {
    match step.inst {
        Instantiation::Hypothesis | Instantiation::Weakening { .. } => Err(TransformError::Blocked(step.rule.clone())),
        _ => Ok(()),
    }
}

/// Rename kept rules to their target ids and drop steps whose premise equals
/// their conclusion. Eliminated Horn steps keep their source id.
fn rename(step: &ProofStep, map: &BTreeMap<String, Option<String>>, trace: &mut Trace) -> Result<ProofStep, TransformError> {
    closed_leaf(step)?;
    let premises = step.premises.iter().map(|p| rename(p, map, trace)).collect::<Result<Vec<_>, _>>()?;
    if let [only] = premises.as_slice() {
        if only.conclusion == step.conclusion {
            trace.push(Phase::Rename, "drop-identity", step.rule.clone(), "");
            return Ok(only.clone());
        }
    }
    let id = match map.get(&step.rule) {
        Some(None) => step.rule.clone(),
        _ => target_id(map, &step.rule)?,
    };
    Ok(ProofStep::new(step.conclusion.clone(), id, step.inst.clone(), premises))
}

/// A derivation of `concl(d) - alpha` from `d`, in which the Horn step that
/// removed `alpha` has been pushed through every rule up to the leaves.
fn push_horn(d: ProofStep, alpha: &EdgeAtom, to: &Calculus, trace: &mut Trace) -> Result<ProofStep, TransformError> {
    let ProofStep { mut conclusion, rule, inst, premises } = d;
    conclusion.remove_edge(alpha);
    match &inst {
        Instantiation::Initial { .. } => {
            trace.push(Phase::Lift, "absorb-initial", rule.clone(), alpha.to_string());
            Ok(ProofStep::new(conclusion, rule, inst, premises))
        }
        Instantiation::Local { .. } | Instantiation::Expansion { .. } | Instantiation::Reachability { .. } => {
            let op = match inst {
                Instantiation::Local { .. } => "permute-local",
                Instantiation::Expansion { .. } => "permute-expansion",
                _ => "permute-reach",
            };
            trace.push(Phase::Lift, op, rule.clone(), alpha.to_string());
            let premises = premises.into_iter().map(|p| push_horn(p, alpha, to, trace)).collect::<Result<Vec<_>, _>>()?;
            Ok(ProofStep::new(conclusion, rule, inst, premises))
        }
        Instantiation::Horn { walk } => {
            let r = to.rule(&rule).ok_or_else(|| TransformError::MissingRule(rule.clone()))?;
            let RuleKind::Horn { path, .. } = &r.kind else { return Err(TransformError::Blocked(rule)) };
            let walk = if conclusion.walk_spells(walk, path) {
                walk.clone()
            } else {
                conclusion.find_walk(&walk[0], walk.last().unwrap(), path).ok_or_else(|| TransformError::NoWalk(rule.clone()))?
            };
            trace.push(Phase::Lift, "permute-horn", rule.clone(), alpha.to_string());
            let premise = push_horn(premises.into_iter().next().expect("Horn step has a premise"), alpha, to, trace)?;
            Ok(ProofStep::new(conclusion, rule, Instantiation::Horn { walk }, vec![premise]))
        }
        _ => Err(TransformError::Blocked(rule)),
    }
}

fn lift(step: ProofStep, from: &Calculus, to: &Calculus, elim: &BTreeSet<String>, trace: &mut Trace) -> Result<ProofStep, TransformError> {
    let ProofStep { conclusion, rule, inst, premises } = step;
    let premises = premises.into_iter().map(|p| lift(p, from, to, elim, trace)).collect::<Result<Vec<_>, _>>()?;
    let step = ProofStep::new(conclusion, rule, inst, premises);
    if !elim.contains(&step.rule) {
        return Ok(step);
    }
    let h = from.rule(&step.rule).expect("eliminated rules come from the source");
    let alpha = horn_alpha(h, &step)?;
    let premise = step.premises.into_iter().next().expect("Horn step has a premise");
    push_horn(premise, &alpha, to, trace)
}

/// Translate a proof to a calculus with fewer Horn rules and wider
/// constraints: every Horn step the target lacks is pushed up and absorbed.
pub fn lift_proof(p: &ProofStep, from: &Calculus, to: &Calculus) -> Result<(ProofStep, Trace), TransformError> {
    let map = rule_map(from, to);
    let elim: BTreeSet<String> = map.iter().filter(|(_, t)| t.is_none()).map(|(id, _)| id.clone()).collect();
    let mut trace = Trace::default();
    let renamed = rename(p, &map, &mut trace)?;
    let out = lift(renamed, from, to, &elim, &mut trace)?;
    validate(&out, to)?;
    trace.push(Phase::Check, "validate", to.name.clone(), "");
    Ok((out, trace))
}

/// Per constrained source rule: target id and the target Horn rules whose
/// grammar the target dropped from it.
fn fracture_plan<'a>(from: &Calculus, to: &'a Calculus) -> BTreeMap<String, (String, Vec<&'a Rule>)> {
    let mut plan = BTreeMap::new();
    for r in from.rules().iter().filter(|r| r.is_initial() || r.is_reachability()) {
        let Some(t) = to.rule(&r.id).filter(|t| same_kind(r, t)) else { continue };
        let dropped: BTreeSet<ProductionPair> = rule_grammar(r).minus(&rule_grammar(t)).pairs();
        let horn: Vec<&Rule> = horn_rules(to).into_iter().filter(|h| h.horn_pair().is_some_and(|p| dropped.contains(&p))).collect();
        plan.insert(r.id.clone(), (t.id.clone(), horn));
    }
    plan
}

fn lower(step: &ProofStep, map: &BTreeMap<String, Option<String>>, plan: &BTreeMap<String, (String, Vec<&Rule>)>, trace: &mut Trace) -> Result<ProofStep, TransformError> {
    closed_leaf(step)?;
    let premises = step.premises.iter().map(|p| lower(p, map, plan, trace)).collect::<Result<Vec<_>, _>>()?;
    let rename = |premises| -> Result<ProofStep, TransformError> {
        Ok(ProofStep::new(step.conclusion.clone(), target_id(map, &step.rule)?, step.inst.clone(), premises))
    };
    match (&step.inst, plan.get(&step.rule)) {
        (Instantiation::Initial { .. }, Some((id, horn))) if !horn.is_empty() => {
            trace.push(Phase::Simulate, "fracture-initial", step.rule.clone(), format!("{} Horn rules", horn.len()));
            Ok(simulate_initial_with(step, id, horn))
        }
        (Instantiation::Reachability { .. }, Some((id, horn))) if !horn.is_empty() => {
            trace.push(Phase::Simulate, "fracture-reach", step.rule.clone(), format!("{} Horn rules", horn.len()));
            Ok(simulate_reach_with(step, id, horn, premises))
        }
        _ => rename(premises),
    }
}

/// Translate a proof to a calculus with more Horn rules and narrower
/// constraints: initial and reachability steps are fractured, the missing
/// edges restored by Horn steps, and path weakening eliminated.
pub fn lower_proof(p: &ProofStep, from: &Calculus, to: &Calculus) -> Result<(ProofStep, Trace), TransformError> {
    let map = rule_map(from, to);
    let plan = fracture_plan(from, to);
    let mut trace = Trace::default();
    let simulated = lower(p, &map, &plan, &mut trace)?;
    let weakenings = simulated.rule_counts().get(crate::proof::PW).copied().unwrap_or(0);
    let out = eliminate_pw(simulated);
    trace.push(Phase::Weakening, "eliminate-pw", crate::proof::PW, format!("{weakenings} steps"));
    validate(&out, to)?;
    trace.push(Phase::Check, "validate", to.name.clone(), "");
    Ok((out, trace))
}

fn names(s: &BTreeSet<String>) -> Vec<String> {
    s.iter().cloned().collect()
}

fn pair_names(s: &BTreeSet<ProductionPair>) -> Vec<String> {
    s.iter().map(|p| p.forward.to_string()).collect()
}

fn check_f(lower: &Calculus, upper: &Calculus, h: &BTreeSet<String>) -> Result<(), TransformError> {
    if !build_dg_horn(horn_rules(lower)).is_anti_fracturable(h) {
        return Err(TransformError::NotAntiFracturable(names(h)));
    }
    if &f_op(lower, h)? != upper {
        return Err(TransformError::NotRelated(format!("{upper} is not f({lower}, {h:?})")));
    }
    Ok(())
}

fn check_g(upper: &Calculus, lower: &Calculus, p: &BTreeSet<ProductionPair>) -> Result<(), TransformError> {
    let non_horn = upper.without(&horn_ids(upper));
    if !build_dg(&calculus_grammar(&non_horn)).is_fracturable(p) {
        return Err(TransformError::NotFracturable(pair_names(p)));
    }
    if &g_op(upper, p) != lower {
        return Err(TransformError::NotRelated(format!("{lower} is not g({upper}, ...)")));
    }
    Ok(())
}

/// `to = f(from, h_prime)`, `h_prime` anti-fracturable.
pub fn translate_up_upward(p: &ProofStep, from: &Calculus, to: &Calculus, h_prime: &BTreeSet<String>) -> Result<(ProofStep, Trace), TransformError> {
    check_f(from, to, h_prime)?;
    lift_proof(p, from, to)
}

/// `from = f(to, h_prime)`, `h_prime` anti-fracturable in `to`.
pub fn translate_down_upward(p: &ProofStep, from: &Calculus, to: &Calculus, h_prime: &BTreeSet<String>) -> Result<(ProofStep, Trace), TransformError> {
    check_f(to, from, h_prime)?;
    lower_proof(p, from, to)
}

/// `to = g(from, p_prime)`, `p_prime` fracturable.
pub fn translate_down_downward(p: &ProofStep, from: &Calculus, to: &Calculus, p_prime: &BTreeSet<ProductionPair>) -> Result<(ProofStep, Trace), TransformError> {
    check_g(from, to, p_prime)?;
    lower_proof(p, from, to)
}

/// `from = g(to, p_prime)`, `p_prime` fracturable in `to`.
pub fn translate_up_downward(p: &ProofStep, from: &Calculus, to: &Calculus, p_prime: &BTreeSet<ProductionPair>) -> Result<(ProofStep, Trace), TransformError> {
    check_g(to, from, p_prime)?;
    lift_proof(p, from, to)
}
