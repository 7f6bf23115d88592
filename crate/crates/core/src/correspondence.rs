//! Executable operational correspondence between the symbolic and the
//! concrete late semantics, over a finite domain.
//!
//! For every closing substitution `sigma` of the free non-rigid names and
//! every assertion `Psi` of the domain, the concrete transitions of
//! `P sigma` in `Psi` must be exactly the instances of symbolic transitions
//! of `P` whose constraint is solved by `(sigma . [K/y], Psi)`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::concrete::{late_transitions, ConcreteTransition, SemanticsError};
use crate::constraints::{check_solution, Solution, SolutionSpace};
use crate::domain::DomainConfig;
use crate::nominal::{Alpha, FreshSession, Nominal, Subst};
use crate::params::Instance;
use crate::symbolic::symbolic_transitions;
use crate::syntax::Agent;

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorrespondenceReport {
    /// Number of (substitution, assertion) pairs examined.
    pub checked: usize,
    /// Action kinds seen on matched transitions.
    pub kinds: BTreeSet<&'static str>,
    /// Instances of symbolic steps with no concrete counterpart.
    pub unsound: Vec<String>,
    /// Concrete steps not covered by any symbolic step.
    pub incomplete: Vec<String>,
}

impl CorrespondenceReport {
    pub fn passed(&self) -> bool {
        self.unsound.is_empty() && self.incomplete.is_empty()
    }

    pub fn merge(&mut self, other: CorrespondenceReport) {
        self.checked += other.checked;
        self.kinds.extend(other.kinds);
        self.unsound.extend(other.unsound);
        self.incomplete.extend(other.incomplete);
    }
}

/// Compares the two semantics of `p` from the unit environment.
pub fn check_correspondence(
    inst: &dyn Instance,
    p: &Agent,
    dom: &DomainConfig,
) -> Result<CorrespondenceReport, SemanticsError> {
    let mut dom = dom.clone();
    dom.extend_names(p.support());
    let pool = dom.pool();
    let values = inst.term_domain(&pool, dom.term_depth);

    let mut avoid = p.names();
    avoid.extend(dom.names.iter().copied());
    values.iter().for_each(|v| v.collect_support(&mut avoid));
    let mut session = FreshSession::new(avoid.clone());
    let unit = inst.unit();
    let symbolic = symbolic_transitions(inst, &unit, p, &mut session, dom.rep_bound)?;
    if symbolic.truncated {
        return Err(SemanticsError::DomainExhausted {
            bound: dom.rep_bound,
            agent: p.to_string(),
        });
    }
    // bound names fresh for every substitution considered
    let symbolic: Vec<_> = symbolic
        .transitions
        .iter()
        .map(|t| t.freshen_bn(&avoid, &mut session))
        .collect();

    let closing = SolutionSpace {
        targets: p.support().into_iter().filter(|n| !dom.rigid.contains(n)).collect(),
        values: values.clone(),
        assertions: inst.assertion_domain(&pool, dom.assert_depth),
    };
    let mut report = CorrespondenceReport::default();
    for sigma in closing.enumerate() {
        report.checked += 1;
        let p_sigma = p.subst(&sigma.subst)?;
        let concrete = late_transitions(inst, &sigma.assertion, &p_sigma, &dom)?;
        if concrete.truncated {
            return Err(SemanticsError::DomainExhausted {
                bound: dom.rep_bound,
                agent: p_sigma.to_string(),
            });
        }
        let concrete: BTreeSet<ConcreteTransition> = concrete.transitions.iter().map(Alpha::canonical).collect();

        let mut induced = BTreeSet::new();
        for t in &symbolic {
            let candidates: Vec<Solution> = match t.action.subject() {
                Some(y) => values.iter().map(|k| sigma.extend(y, k.clone())).collect(),
                None => vec![sigma.clone()],
            };
            for s in candidates {
                if check_solution(inst, &s, &t.constraint) {
                    let c = t.instantiate(&s)?.canonical();
                    if concrete.contains(&c) {
                        report.kinds.insert(t.action.kind());
                    } else {
                        report.unsound.push(format!("{p} under {s}: {t} gives {c} with no concrete match"));
                    }
                    induced.insert(c);
                }
            }
        }
        for c in concrete.difference(&induced) {
            report.incomplete.push(format!("{p} under {sigma}: concrete {c} has no symbolic source"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{random_agent, GenConfig};
    use crate::instances::registry_lookup;
    use crate::syntax::parse_agent;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn handwritten_agents_correspond() {
        let pi = registry_lookup("pi").unwrap();
        let dom = DomainConfig::labels(&["a", "b"]);
        for src in [
            "a!b.0 | a(x).x!b",
            "(new c)(a!c | a(x).x!b)",
            "(new c)a!c.c(z).0",
            "case a = b : a!a [] a <> b : b!b",
            "a(x).case x = b : x!x",
            "(new a)a!b | b(x).0",
        ] {
            let p = parse_agent(&*pi, src).unwrap();
            let r = check_correspondence(&*pi, &p, &dom).unwrap();
            assert!(r.passed(), "{src}: {:?} {:?}", r.unsound, r.incomplete);
        }
    }

    #[test]
    fn assignments_correspond() {
        let inst = registry_lookup("assign").unwrap();
        let mut dom = DomainConfig::labels(&["a", "u"]);
        dom.literals = vec![crate::data::Term::Int(2), crate::data::Term::Int(4)];
        dom.assert_depth = 1;
        dom.rigid.insert(crate::nominal::Name::new("u"));
        for src in ["(|u:=2|) | case prime(u) : a!u", "a(x).case x = 2 : a!x", "a!4 | a(z).case prime(z) : a!z"] {
            let p = parse_agent(&*inst, src).unwrap();
            let r = check_correspondence(&*inst, &p, &dom).unwrap();
            assert!(r.passed(), "{src}: {:?} {:?}", r.unsound, r.incomplete);
        }
    }

    #[test]
    fn random_pi_agents_correspond() {
        let pi = registry_lookup("pi").unwrap();
        let cfg = GenConfig::pi(3, &["a", "b"]);
        let dom = DomainConfig::labels(&["a", "b"]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = random_agent(&cfg, &mut rng);
            let r = check_correspondence(&*pi, &p, &dom).unwrap();
            assert!(r.passed(), "{p}: {:?} {:?}", r.unsound, r.incomplete);
        }
    }
}
