use std::collections::BTreeSet;

use crate::calculus::{horn_rules, rules_grammar, Calculus};
use crate::depgraph::build_dg_horn;
use crate::proof::{check_step, ProofError, ProofStep, ValidateOptions};
use crate::rules::{absorb_rule, rule_grammar, Rule, RuleKind};

use super::{horn_alpha, minus_unless, with_edge, TransformError};

fn rule_of<'a>(c: &'a Calculus, step: &ProofStep) -> Result<&'a Rule, TransformError> {
    c.rule(&step.rule).ok_or_else(|| TransformError::MissingRule(step.rule.clone()))
}

fn only_premise(step: &ProofStep) -> Result<&ProofStep, TransformError> {
    match step.premises.as_slice() {
        [p] => Ok(p),
        _ => Err(TransformError::Shape(format!("`{}` should have one premise", step.rule))),
    }
}

/// Check the rewritten step and its direct premises; deeper steps are untouched.
fn check_window(step: &ProofStep, c: &Calculus) -> Result<(), TransformError> {
    let opts = ValidateOptions::derivation();
    let fail = |path: Vec<usize>, s: &ProofStep, kind| ProofError { path, rule: s.rule.clone(), kind };
    check_step(step, c, opts).map_err(|k| fail(Vec::new(), step, k))?;
    for (i, p) in step.premises.iter().enumerate() {
        check_step(p, c, opts).map_err(|k| fail(vec![i], p, k))?;
    }
    Ok(())
}

/// Lower Horn step `step` over `upper`: the Horn step moves into every premise
/// of `upper`, and `upper` (possibly under a new id) concludes the original sequent.
fn hoist(step: &ProofStep, h: &Rule, upper_id: &str) -> Result<ProofStep, TransformError> {
    let alpha = horn_alpha(h, step)?;
    let upper = only_premise(step)?;
    let premises = upper
        .premises
        .iter()
        .map(|p| {
            let concl = minus_unless(&p.conclusion, &alpha, &step.conclusion);
            ProofStep::new(concl, h.id.clone(), step.inst.clone(), vec![p.clone()])
        })
        .collect();
    Ok(ProofStep::new(step.conclusion.clone(), upper_id, upper.inst.clone(), premises))
}

/// The same Horn application on every premise, moved below the step.
fn sink(step: &ProofStep, c: &Calculus) -> Result<ProofStep, TransformError> {
    let first = step.premises.first().ok_or_else(|| TransformError::Shape("no premises".into()))?;
    let h = rule_of(c, first)?;
    if !h.is_horn() || step.premises.iter().any(|p| p.rule != first.rule || p.inst != first.inst) {
        return Err(TransformError::Shape("premises are not one shared Horn application".into()));
    }
    let alpha = horn_alpha(h, first)?;
    let tops = step.premises.iter().map(|p| only_premise(p).cloned()).collect::<Result<Vec<_>, _>>()?;
    let upper = ProofStep::new(with_edge(&step.conclusion, &alpha), step.rule.clone(), step.inst.clone(), tops);
    Ok(ProofStep::new(step.conclusion.clone(), first.rule.clone(), first.inst.clone(), vec![upper]))
}

/// Swap a Horn step with a local step in either order.
pub fn permute_local_horn(step: &ProofStep, c: &Calculus) -> Result<ProofStep, TransformError> {
    let r = rule_of(c, step)?;
    let out = match &r.kind {
        RuleKind::Horn { .. } => {
            let upper = only_premise(step)?;
            if !matches!(rule_of(c, upper)?.kind, RuleKind::Local { .. }) {
                return Err(TransformError::Shape("Horn step is not below a local step".into()));
            }
            hoist(step, r, &upper.rule)?
        }
        RuleKind::Local { .. } => sink(step, c)?,
        _ => return Err(TransformError::Shape(format!("`{}` is neither local nor Horn", r.id))),
    };
    check_window(&out, c)?;
    Ok(out)
}

/// Move a Horn step from below an expansion step to above it.
pub fn permute_horn_above_expansion(step: &ProofStep, c: &Calculus) -> Result<ProofStep, TransformError> {
    let h = rule_of(c, step)?;
    let upper = only_premise(step)?;
    if !h.is_horn() || !matches!(rule_of(c, upper)?.kind, RuleKind::Expansion { .. }) {
        return Err(TransformError::Shape("expected a Horn step below an expansion step".into()));
    }
    let out = hoist(step, h, &upper.rule)?;
    check_window(&out, c)?;
    Ok(out)
}

/// Swap a Horn step with a reachability step. Moving the Horn step up needs
/// the reachability grammars to contain the Horn grammar: with `absorbed` that
/// is required of the rule as it stands, otherwise an absorbed copy is added
/// and the returned calculus holds it.
pub fn permute_reach_horn(step: &ProofStep, c: &Calculus, absorbed: bool) -> Result<(ProofStep, Calculus), TransformError> {
    let r = rule_of(c, step)?;
    match &r.kind {
        RuleKind::Horn { .. } => {
            let upper = only_premise(step)?;
            let reach = rule_of(c, upper)?;
            let RuleKind::Reachability { family, .. } = &reach.kind else {
                return Err(TransformError::Shape("Horn step is not below a reachability step".into()));
            };
            let gh = rule_grammar(r);
            let (target, id) = if absorbed {
                if !family.iter().all(|l| gh.is_subset(&l.grammar)) {
                    return Err(TransformError::NotAbsorbed(reach.id.clone(), r.id.clone()));
                }
                (c.clone(), reach.id.clone())
            } else {
                let wider = absorb_rule(reach, &gh);
                let target = c.with_rules([wider.clone()]);
                let id = target.find_equivalent(&wider).expect("just added").id.clone();
                (target, id)
            };
            let out = hoist(step, r, &id)?;
            check_window(&out, &target)?;
            Ok((out, target))
        }
        RuleKind::Reachability { .. } => {
            let out = sink(step, c)?;
            check_window(&out, c)?;
            Ok((out, c.clone()))
        }
        _ => Err(TransformError::Shape(format!("`{}` is neither reachability nor Horn", r.id))),
    }
}

/// Swap a lower Horn step outside `fracturable` with an upper one inside it.
pub fn permute_horn_horn(step: &ProofStep, c: &Calculus, fracturable: &BTreeSet<String>) -> Result<ProofStep, TransformError> {
    if !build_dg_horn(horn_rules(c)).is_fracturable(fracturable) {
        return Err(TransformError::NotFracturable(fracturable.iter().cloned().collect()));
    }
    let lower = rule_of(c, step)?;
    let top = only_premise(step)?;
    let upper = rule_of(c, top)?;
    if !lower.is_horn() || !upper.is_horn() || fracturable.contains(&lower.id) || !fracturable.contains(&upper.id) {
        return Err(TransformError::Shape("expected a Horn step outside the set below one inside it".into()));
    }
    let out = swap_horn(step, lower, upper)?;
    check_window(&out, c)?;
    Ok(out)
}

/// `lower` over `upper` becomes `upper` over `lower`, re-finding the upper walk
/// in the lower conclusion if the old one used the removed edge.
pub(crate) fn swap_horn(step: &ProofStep, lower: &Rule, upper: &Rule) -> Result<ProofStep, TransformError> {
    let top = only_premise(step)?;
    let alpha_up = horn_alpha(upper, top)?;
    let g = &step.conclusion;
    let crate::rules::Instantiation::Horn { walk } = &top.inst else { unreachable!("checked by horn_alpha") };
    let RuleKind::Horn { path, .. } = &upper.kind else { unreachable!() };
    let walk = if g.walk_spells(walk, path) {
        walk.clone()
    } else {
        g.find_walk(&walk[0], walk.last().unwrap(), path).ok_or_else(|| TransformError::NoWalk(upper.id.clone()))?
    };
    let mid = ProofStep::new(with_edge(g, &alpha_up), lower.id.clone(), step.inst.clone(), top.premises.clone());
    Ok(ProofStep::new(g.clone(), upper.id.clone(), crate::rules::Instantiation::Horn { walk }, vec![mid]))
}

/// An initial step under a chain of Horn steps from `h_set` becomes one step of
/// the initial rule absorbed with the grammar of `h_set`.
pub fn absorb_initial_horn(step: &ProofStep, c: &Calculus, h_set: &BTreeSet<String>) -> Result<(ProofStep, Calculus), TransformError> {
    let mut leaf = step;
    while leaf.premises.len() == 1 && h_set.contains(&leaf.rule) {
        leaf = &leaf.premises[0];
    }
    let init = rule_of(c, leaf)?;
    if !init.is_initial() || !leaf.premises.is_empty() {
        return Err(TransformError::Shape(format!("`{}` interrupts the Horn chain above an initial step", leaf.rule)));
    }
    if std::ptr::eq(leaf, step) {
        return Ok((step.clone(), c.clone()));
    }
    let hs = h_set
        .iter()
        .map(|id| c.rule(id).filter(|r| r.is_horn()).ok_or_else(|| TransformError::MissingRule(id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let wider = absorb_rule(init, &rules_grammar(hs));
    let target = c.with_rules([wider.clone()]);
    let id = target.find_equivalent(&wider).expect("just added").id.clone();
    let out = ProofStep::new(step.conclusion.clone(), id, leaf.inst.clone(), Vec::new());
    check_window(&out, &target)?;
    Ok((out, target))
}
