//! Witness checkers, written against the definitions rather than the
//! game: every clause is re-evaluated on the relation as given.
//!
//! Relations are read up to alpha-conversion and up to renaming of names
//! outside a base set (the domain names and the free names of the root),
//! which is sound because bisimulations are closed under permutations.
//! Agents are compared up to structural congruence (`P | 0 = P` and
//! commutativity and associativity of `|`), and pairs of structurally
//! congruent agents are accepted outright since the identity is a
//! bisimulation. The checks are therefore for bisimulation up to
//! structural congruence.
//! Pairs of agents with no transitions at all may be left out, as long as
//! they are statically equivalent where they are reached.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::symbolic::settled_transitions;
use super::{closing_space, instantiate_pair, position_domain, position_pool, static_equivalent, ConcreteTriple, SymbolicTriple};
use crate::concrete::{late_transitions, ConcreteAction, ConcreteTransition};
use crate::constraints::{check_solution, Conjunct, Constraint, Solution};
use crate::data::{Assertion, Term};
use crate::domain::DomainConfig;
use crate::nominal::{Name, Nominal, Subst, Substitution};
use crate::params::Instance;
use crate::symbolic::{SymbolicAction, SymbolicTransition};
use crate::syntax::{Agent, Data};

fn term_names(t: &Term, out: &mut Vec<Name>) {
    match t {
        Term::Name(n) => out.push(*n),
        Term::Int(_) => {}
        Term::App(_, args) => args.iter().for_each(|a| term_names(a, out)),
    }
}

fn agent_names(p: &Agent, out: &mut Vec<Name>) {
    p.visit_data(&mut |d| match d {
        Data::Term(t) => term_names(t, out),
        Data::Condition(c) => c.terms().into_iter().for_each(|t| term_names(t, out)),
        Data::Assertion(a) => a.bindings().for_each(|(l, r)| {
            term_names(l, out);
            term_names(r, out);
        }),
    });
}

/// Canonical form of a position up to alpha and up to renaming of names
/// outside `base`.
pub fn normalize(psi: &Assertion, p: &Agent, q: &Agent, base: &BTreeSet<Name>) -> (Assertion, Agent, Agent) {
    let (mut psi, mut p, mut q) = (psi.clone(), p.structural_key(), q.structural_key());
    let mut order = Vec::new();
    agent_names(&p, &mut order);
    agent_names(&q, &mut order);
    for (l, r) in psi.bindings() {
        term_names(l, &mut order);
        term_names(r, &mut order);
    }
    let mut seen = BTreeSet::new();
    let movable: Vec<Name> = order
        .into_iter()
        .filter(|n| !base.contains(n) && !n.is_canonical() && seen.insert(*n))
        .collect();
    for (i, n) in movable.iter().enumerate() {
        let tmp = Name::new(&format!("&t{i}"));
        (psi, p, q) = (psi.swap(*n, tmp), p.swap(*n, tmp), q.swap(*n, tmp));
    }
    for i in 0..movable.len() {
        let (tmp, mark) = (Name::new(&format!("&t{i}")), Name::new(&format!("&{i}")));
        (psi, p, q) = (psi.swap(tmp, mark), p.swap(tmp, mark), q.swap(tmp, mark));
    }
    (psi, p, q)
}

/// Base names for a check rooted at `p` and `q`.
pub fn base_names(dom: &DomainConfig, p: &Agent, q: &Agent) -> BTreeSet<Name> {
    let mut base: BTreeSet<Name> = dom.names.iter().copied().collect();
    base.extend(dom.rigid.iter().copied());
    base.extend(p.support());
    base.extend(q.support());
    base
}

struct ConcreteChecker<'a> {
    inst: &'a dyn Instance,
    dom: &'a DomainConfig,
    base: &'a BTreeSet<Name>,
    members: HashSet<(Assertion, Agent, Agent)>,
    assertions: Vec<Assertion>,
}

impl ConcreteChecker<'_> {
    fn transitions(&self, psi: &Assertion, p: &Agent, q: &Agent) -> Result<(Vec<ConcreteTransition>, Vec<ConcreteTransition>), String> {
        let dom = position_domain(self.dom, &[psi, p, q]);
        let tp = late_transitions(self.inst, psi, p, &dom).map_err(|e| e.to_string())?;
        let tq = late_transitions(self.inst, psi, q, &dom).map_err(|e| e.to_string())?;
        Ok((tp.transitions, tq.transitions))
    }

    /// The extensions of `psi` that stay inside the assertion domain.
    fn extensions(&self, psi: &Assertion) -> Vec<Assertion> {
        self.assertions
            .iter()
            .map(|a| self.inst.compose(psi, a))
            .filter(|c| c != psi && self.assertions.contains(c))
            .collect()
    }

    fn member(&self, psi: &Assertion, p: &Agent, q: &Agent) -> Result<bool, String> {
        if p.structural_key() == q.structural_key() || self.members.contains(&normalize(psi, p, q, self.base)) {
            return Ok(true);
        }
        let (tp, tq) = self.transitions(psi, p, q)?;
        Ok(tp.is_empty()
            && tq.is_empty()
            && std::iter::once(psi.clone())
                .chain(self.extensions(psi))
                .all(|e| static_equivalent(self.inst, &e, p, q, self.dom)))
    }

    fn check(&self, psi: &Assertion, p: &Agent, q: &Agent) -> Result<(), String> {
        let here = format!("({psi}, {p}, {q})");
        if !static_equivalent(self.inst, psi, p, q, self.dom) {
            return Err(format!("{here}: not statically equivalent"));
        }
        for e in self.extensions(psi) {
            if !self.member(&e, p, q)? {
                return Err(format!("{here}: extension to {e} missing"));
            }
        }
        let (tp, tq) = self.transitions(psi, p, q)?;
        let values = self.inst.term_domain(&position_pool(self.dom, &[psi, p, q]), self.dom.term_depth);
        for t in &tp {
            match &t.action {
                ConcreteAction::LateIn { subject, binder } => {
                    for l in &values {
                        let p2 = t.target.subst(&Substitution::single(*binder, l.clone())).map_err(|e| e.to_string())?;
                        let mut ok = false;
                        for u in &tq {
                            if let ConcreteAction::LateIn { subject: k, binder: x } = &u.action {
                                let q2 = u.target.subst(&Substitution::single(*x, l.clone())).map_err(|e| e.to_string())?;
                                if k == subject && self.member(psi, &p2, &q2)? {
                                    ok = true;
                                    break;
                                }
                            }
                        }
                        if !ok {
                            return Err(format!("{here}: input {subject} {l} unanswered"));
                        }
                    }
                }
                ConcreteAction::Out { .. } => {
                    let mut avoid = psi.support();
                    avoid.extend(p.support());
                    avoid.extend(q.support());
                    tq.iter().for_each(|u| u.collect_support(&mut avoid));
                    let t = t.freshen_bn(&avoid);
                    let mut ok = false;
                    for u in &tq {
                        if let Some(q2) = super::concrete::align_output(self.inst, subject_of(&t), &t.action.bn(), object_of(&t), u) {
                            if self.member(psi, &t.target, &q2)? {
                                ok = true;
                                break;
                            }
                        }
                    }
                    if !ok {
                        return Err(format!("{here}: output {} unanswered", t.action));
                    }
                }
                ConcreteAction::Tau => {
                    let mut ok = false;
                    for u in tq.iter().filter(|u| u.action == ConcreteAction::Tau) {
                        if self.member(psi, &t.target, &u.target)? {
                            ok = true;
                            break;
                        }
                    }
                    if !ok {
                        return Err(format!("{here}: tau to {} unanswered", t.target));
                    }
                }
                ConcreteAction::EarlyIn { .. } => return Err("early input in late semantics".into()),
            }
        }
        Ok(())
    }
}

fn subject_of(t: &ConcreteTransition) -> &Term {
    t.action.subject().expect("output has a subject")
}

fn object_of(t: &ConcreteTransition) -> &Term {
    match &t.action {
        ConcreteAction::Out { object, .. } => object,
        _ => unreachable!("outputs only"),
    }
}

/// Checks that `relation` (read symmetrically) is a concrete bisimulation
/// over the domain.
pub fn verify_concrete(
    inst: &dyn Instance,
    dom: &DomainConfig,
    relation: &[ConcreteTriple],
    base: &BTreeSet<Name>,
) -> Result<(), String> {
    let mut members = HashSet::new();
    for t in relation {
        members.insert(normalize(&t.psi, &t.p, &t.q, base));
        members.insert(normalize(&t.psi, &t.q, &t.p, base));
    }
    let checker = ConcreteChecker {
        inst,
        dom,
        base,
        members,
        assertions: inst.assertion_domain(&dom.pool(), dom.assert_depth),
    };
    for t in relation {
        checker.check(&t.psi, &t.p, &t.q)?;
        checker.check(&t.psi, &t.q, &t.p)?;
    }
    Ok(())
}

/// The solutions of a witness constraint: the closing solutions for true,
/// the listed ones for an explicit set, and otherwise the closing
/// solutions that satisfy it.
pub fn witness_solutions(
    inst: &dyn Instance,
    dom: &DomainConfig,
    c: &Constraint,
    p: &Agent,
    q: &Agent,
) -> Vec<Solution> {
    if let Some(Conjunct::Ext(e)) = c.conjuncts.first() {
        return e.sols.iter().filter(|s| check_solution(inst, s, c)).cloned().collect();
    }
    closing_space(inst, p, q, dom)
        .enumerate()
        .into_iter()
        .filter(|s| check_solution(inst, s, c))
        .collect()
}

struct SymbolicChecker<'a> {
    inst: &'a dyn Instance,
    dom: &'a DomainConfig,
    index: HashMap<(Agent, Agent), Vec<&'a Constraint>>,
}

impl SymbolicChecker<'_> {
    /// `(C', P', Q')` is in the relation for some `C'` that `s` solves,
    /// or both agents are stuck and statically equivalent under `s`.
    fn covers(&self, s: &Solution, p: &Agent, q: &Agent) -> Result<bool, String> {
        let key = (p.structural_key(), q.structural_key());
        if key.0 == key.1 {
            return Ok(true);
        }
        if let Some(cs) = self.index.get(&key) {
            if cs.iter().any(|c| check_solution(self.inst, s, c)) {
                return Ok(true);
            }
        }
        let (tp, tq, _) = settled_transitions(self.inst, self.dom, p, q, s).map_err(|e| e.to_string())?;
        let (ps, qs) = instantiate_pair(s, p, q).map_err(|e| e.to_string())?;
        Ok(tp.is_empty() && tq.is_empty() && static_equivalent(self.inst, &s.assertion, &ps, &qs, self.dom))
    }

    /// `u` renamed so that its subject and bound names are those of `t`.
    fn rename_like(t: &SymbolicTransition, u: &SymbolicTransition) -> Option<SymbolicTransition> {
        let same_shape = match (&t.action, &u.action) {
            (SymbolicAction::Tau, SymbolicAction::Tau) | (SymbolicAction::In { .. }, SymbolicAction::In { .. }) => true,
            (SymbolicAction::Out { extruded: a, .. }, SymbolicAction::Out { extruded: b, .. }) => a.len() == b.len(),
            _ => false,
        };
        if !same_shape {
            return None;
        }
        let mut u = u.clone();
        let mine: Vec<Name> = t.action.subject().into_iter().chain(t.action.bn()).collect();
        for (i, to) in mine.iter().enumerate() {
            let theirs: Vec<Name> = u.action.subject().into_iter().chain(u.action.bn()).collect();
            u = u.rename_bn(theirs[i], *to);
        }
        Some(u)
    }

    fn check(&self, c: &Constraint, p: &Agent, q: &Agent) -> Result<(), String> {
        let here = format!("({c}, {p}, {q})");
        for s in witness_solutions(self.inst, self.dom, c, p, q) {
            let (ps, qs) = instantiate_pair(&s, p, q).map_err(|e| e.to_string())?;
            if !static_equivalent(self.inst, &s.assertion, &ps, &qs, self.dom) {
                return Err(format!("{here}: not statically equivalent under {s}"));
            }
            let (tp, tq, _) = settled_transitions(self.inst, self.dom, p, q, &s).map_err(|e| e.to_string())?;
            let pool = position_pool(self.dom, &[&s.assertion, &ps, &qs]);
            let values = self.inst.term_domain(&pool, self.dom.term_depth);
            let mut side = p.support();
            side.extend(q.support());
            for t in &tp {
                // every solution of C /\ C_P, with the subject and the
                // received value instantiated
                let mut challenges = vec![s.clone()];
                if let Some(y) = t.action.subject() {
                    challenges = values.iter().map(|k| s.extend(y, k.clone())).collect();
                }
                if let SymbolicAction::In { binder, .. } = &t.action {
                    challenges = challenges
                        .iter()
                        .flat_map(|s1| values.iter().map(|l| s1.extend(*binder, l.clone())))
                        .collect();
                }
                for s1 in challenges.iter().filter(|s1| check_solution(self.inst, s1, &t.constraint)) {
                    let mut answered = false;
                    for u in tq.iter().filter_map(|u| Self::rename_like(t, u)) {
                        let mut need = u.constraint.clone();
                        if let (SymbolicAction::Out { extruded, object, .. }, SymbolicAction::Out { object: n2, .. }) =
                            (&t.action, &u.action)
                        {
                            need.push(Conjunct::Eq(object.clone(), n2.clone()));
                            for a in extruded {
                                need.push(Conjunct::Fresh(*a, side.clone()));
                            }
                        }
                        if check_solution(self.inst, s1, &need) && self.covers(s1, &t.target, &u.target)? {
                            answered = true;
                            break;
                        }
                    }
                    if !answered {
                        return Err(format!("{here}: {} under {s1} unanswered", t.action));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Checks that `witness` (read symmetrically and closed under stronger
/// constraints) is a symbolic bisimulation relating `p` and `q` under the
/// constraint true.
pub fn verify_symbolic(
    inst: &dyn Instance,
    dom: &DomainConfig,
    witness: &[SymbolicTriple],
    p: &Agent,
    q: &Agent,
) -> Result<(), String> {
    let mut index: HashMap<(Agent, Agent), Vec<&Constraint>> = HashMap::new();
    for t in witness {
        index.entry((t.p.structural_key(), t.q.structural_key())).or_default().push(&t.constraint);
        index.entry((t.q.structural_key(), t.p.structural_key())).or_default().push(&t.constraint);
    }
    let rooted = index
        .get(&(p.structural_key(), q.structural_key()))
        .is_some_and(|cs| cs.iter().any(|c| c.is_true()));
    if !rooted {
        return Err(format!("no triple (true, {p}, {q})"));
    }
    let checker = SymbolicChecker { inst, dom, index };
    for t in witness {
        checker.check(&t.constraint, &t.p, &t.q)?;
        checker.check(&t.constraint, &t.q, &t.p)?;
    }
    Ok(())
}

/// `{(Psi, P sigma, Q sigma) | (sigma, Psi) solves C, (C, P, Q) in S}`
pub fn induced_relation(
    inst: &dyn Instance,
    dom: &DomainConfig,
    witness: &[SymbolicTriple],
) -> Result<Vec<ConcreteTriple>, String> {
    let mut out = Vec::new();
    for t in witness {
        for s in witness_solutions(inst, dom, &t.constraint, &t.p, &t.q) {
            let (p, q) = instantiate_pair(&s, &t.p, &t.q).map_err(|e| e.to_string())?;
            out.push(ConcreteTriple {
                psi: s.assertion.clone(),
                p,
                q,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::{concrete_bisim, symbolic_bisim};
    use crate::instances::registry_lookup;
    use crate::syntax::parse_agent;

    #[test]
    fn normalization_ignores_fresh_names() {
        let base = BTreeSet::from([Name::new("a")]);
        let pi = registry_lookup("pi").unwrap();
        let p = parse_agent(&*pi, "a!k.k!a").unwrap();
        let q = parse_agent(&*pi, "a!m.m!a").unwrap();
        let r = parse_agent(&*pi, "a!a.a!a").unwrap();
        let u = Assertion::unit();
        assert_eq!(normalize(&u, &p, &r, &base), normalize(&u, &q, &r, &base));
        assert_ne!(normalize(&u, &p, &r, &base), normalize(&u, &r, &r, &base));
    }

    #[test]
    fn witnesses_pass_and_broken_ones_fail() {
        let pi = registry_lookup("pi").unwrap();
        let dom = DomainConfig::labels(&["a", "b", "c"]);
        let p = parse_agent(&*pi, "a(x).a!b.a!b").unwrap();
        let q = parse_agent(&*pi, "a(x).case x = b : a!b.a!b [] x <> b : a!b.a!b").unwrap();
        let v = symbolic_bisim(&*pi, &p, &q, &dom).unwrap();
        verify_symbolic(&*pi, &dom, &v.witness, &p, &q).unwrap();
        let induced = induced_relation(&*pi, &dom, &v.witness).unwrap();
        verify_concrete(&*pi, &dom, &induced, &base_names(&dom, &p, &q)).unwrap();
        let mut broken = v.witness.clone();
        broken.remove(1);
        assert!(verify_symbolic(&*pi, &dom, &broken, &p, &q).is_err());

        let c = concrete_bisim(&*pi, &Assertion::unit(), &p, &q, &dom).unwrap();
        let base = base_names(&dom, &p, &q);
        verify_concrete(&*pi, &dom, &c.witness, &base).unwrap();
        let mut broken = c.witness.clone();
        broken.truncate(1);
        assert!(verify_concrete(&*pi, &dom, &broken, &base).is_err());
    }
}
