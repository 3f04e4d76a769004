use crate::gsequent::EdgeAtom;
use crate::proof::ProofStep;
use crate::rules::Instantiation;

use super::with_edge;

/// A derivation of `concl(d) + sigma` built from `d`. Open leaves keep an
/// explicit weakening; everything else absorbs it.
pub fn push_pw(d: ProofStep, sigma: &EdgeAtom) -> ProofStep {
    if d.conclusion.contains_edge(sigma) {
        return d;
    }
    match &d.inst {
        Instantiation::Hypothesis => ProofStep::weakening(d, sigma.clone()),
        Instantiation::Horn { .. } => {
            let ProofStep { conclusion, rule, inst, premises } = d;
            let premise = premises.into_iter().next().expect("Horn step has one premise");
            let alpha = premise.conclusion.edges().find(|e| !conclusion.contains_edge(e)).cloned();
            if alpha.as_ref() == Some(sigma) {
                // the Horn step removed exactly the weakened edge
                return premise;
            }
            ProofStep::new(with_edge(&conclusion, sigma), rule, inst, vec![push_pw(premise, sigma)])
        }
        Instantiation::Weakening { edge } => {
            let edge = edge.clone();
            let premise = d.premises.into_iter().next().expect("weakening has one premise");
            ProofStep::weakening(push_pw(premise, sigma), edge)
        }
        _ => {
            let ProofStep { conclusion, rule, inst, premises } = d;
            let premises = premises.into_iter().map(|p| push_pw(p, sigma)).collect();
            ProofStep::new(with_edge(&conclusion, sigma), rule, inst, premises)
        }
    }
}

/// Remove every path-weakening step above a rule application.
pub fn eliminate_pw(p: ProofStep) -> ProofStep {
    let ProofStep { conclusion, rule, inst, premises } = p;
    let premises: Vec<ProofStep> = premises.into_iter().map(eliminate_pw).collect();
    match inst {
        Instantiation::Weakening { edge } => {
            let premise = premises.into_iter().next().expect("weakening has one premise");
            push_pw(premise, &edge)
        }
        inst => ProofStep::new(conclusion, rule, inst, premises),
    }
}
