//! Concrete actions and the late and early operational semantics.
//!
//! Subjects are drawn from the instance's channel candidates over the
//! domain's name pool, so the transition sets are finite under-approximations
//! of the unbounded relation.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::data::{Assertion, Term};
use crate::domain::DomainConfig;
use crate::nominal::{Alpha, CanonEnv, FreshSession, Name, Nominal, NominalError, Subst, Substitution};
use crate::params::{Instance, Pool};
use crate::syntax::{frame_of, freshen_frame_binders, Agent};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("replication bound {bound} reached while exploring `{agent}`")]
    DomainExhausted { bound: usize, agent: String },
    #[error(transparent)]
    Nominal(#[from] NominalError),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ConcreteAction {
    /// `K!(new a1..an)N`; the extruded names bind into the object and the
    /// target.
    Out {
        subject: Term,
        extruded: Vec<Name>,
        object: Term,
    },
    /// `K(x)`; the binder binds into the target.
    LateIn { subject: Term, binder: Name },
    /// `K N`
    EarlyIn { subject: Term, object: Term },
    Tau,
}

impl ConcreteAction {
    pub fn bn(&self) -> Vec<Name> {
        match self {
            ConcreteAction::Out { extruded, .. } => extruded.clone(),
            ConcreteAction::LateIn { binder, .. } => vec![*binder],
            _ => Vec::new(),
        }
    }

    pub fn subject(&self) -> Option<&Term> {
        match self {
            ConcreteAction::Out { subject, .. }
            | ConcreteAction::LateIn { subject, .. }
            | ConcreteAction::EarlyIn { subject, .. } => Some(subject),
            ConcreteAction::Tau => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConcreteAction::Out { .. } => "out",
            ConcreteAction::LateIn { .. } => "in",
            ConcreteAction::EarlyIn { .. } => "early-in",
            ConcreteAction::Tau => "tau",
        }
    }
}

impl Nominal for ConcreteAction {
    fn swap(&self, a: Name, b: Name) -> Self {
        match self {
            ConcreteAction::Out {
                subject,
                extruded,
                object,
            } => ConcreteAction::Out {
                subject: subject.swap(a, b),
                extruded: extruded.swap(a, b),
                object: object.swap(a, b),
            },
            ConcreteAction::LateIn { subject, binder } => ConcreteAction::LateIn {
                subject: subject.swap(a, b),
                binder: binder.swap(a, b),
            },
            ConcreteAction::EarlyIn { subject, object } => ConcreteAction::EarlyIn {
                subject: subject.swap(a, b),
                object: object.swap(a, b),
            },
            ConcreteAction::Tau => ConcreteAction::Tau,
        }
    }

    /// Bound names of an action are part of its support.
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        match self {
            ConcreteAction::Out {
                subject,
                extruded,
                object,
            } => {
                subject.collect_support(out);
                out.extend(extruded.iter().copied());
                object.collect_support(out);
            }
            ConcreteAction::LateIn { subject, binder } => {
                subject.collect_support(out);
                out.insert(*binder);
            }
            ConcreteAction::EarlyIn { subject, object } => {
                subject.collect_support(out);
                object.collect_support(out);
            }
            ConcreteAction::Tau => {}
        }
    }
}

impl fmt::Display for ConcreteAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcreteAction::Out {
                subject,
                extruded,
                object,
            } if extruded.is_empty() => write!(f, "{subject}!{object}"),
            ConcreteAction::Out {
                subject,
                extruded,
                object,
            } => {
                let names: Vec<String> = extruded.iter().map(|n| n.to_string()).collect();
                write!(f, "{subject}!(new {}){object}", names.join(","))
            }
            ConcreteAction::LateIn { subject, binder } => write!(f, "{subject}({binder})"),
            ConcreteAction::EarlyIn { subject, object } => write!(f, "{subject} {object}"),
            ConcreteAction::Tau => f.write_str("tau"),
        }
    }
}

/// A transition `Psi |> P --action--> target`; the environment and source
/// are those passed to the enumerator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ConcreteTransition {
    pub action: ConcreteAction,
    pub target: Agent,
}

impl ConcreteTransition {
    /// Renames the bound names of the action, in object and target alike.
    pub fn rename_bn(&self, from: Name, to: Name) -> ConcreteTransition {
        ConcreteTransition {
            action: self.action.swap(from, to),
            target: self.target.swap(from, to),
        }
    }

    /// Alpha-converts the bound names away from `avoid`.
    pub fn freshen_bn(&self, avoid: &BTreeSet<Name>) -> ConcreteTransition {
        let bn = self.action.bn();
        if bn.iter().all(|b| !avoid.contains(b)) {
            return self.clone();
        }
        let mut all = avoid.clone();
        all.extend(self.names());
        let mut session = FreshSession::new(all);
        let mut t = self.clone();
        for b in bn {
            if avoid.contains(&b) {
                let f = session.fresh_like(b);
                t = t.rename_bn(b, f);
            }
        }
        t
    }
}

impl Nominal for ConcreteTransition {
    fn swap(&self, a: Name, b: Name) -> Self {
        ConcreteTransition {
            action: self.action.swap(a, b),
            target: self.target.swap(a, b),
        }
    }

    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        let bn: BTreeSet<Name> = self.action.bn().into_iter().collect();
        let mut all = self.action.support();
        self.target.collect_support(&mut all);
        out.extend(all.difference(&bn));
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        self.action.collect_support(out);
        self.target.collect_names(out);
    }
}

/// Orders extruded names by first occurrence in the object.
fn occurrence_order(object: &Term, names: &[Name]) -> Vec<Name> {
    let mut order = Vec::new();
    fn walk(t: &Term, names: &[Name], order: &mut Vec<Name>) {
        match t {
            Term::Name(n) => {
                if names.contains(n) && !order.contains(n) {
                    order.push(*n);
                }
            }
            Term::Int(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| walk(a, names, order)),
        }
    }
    walk(object, names, &mut order);
    for n in names {
        if !order.contains(n) {
            order.push(*n);
        }
    }
    order
}

impl Alpha for ConcreteTransition {
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        let mut bound = Vec::new();
        let action = match &self.action {
            ConcreteAction::Out {
                subject,
                extruded,
                object,
            } => {
                let subject = subject.canon_with(env);
                let mut canon = Vec::new();
                for b in occurrence_order(object, extruded) {
                    let (c, prev) = env.bind(b);
                    bound.push((b, prev));
                    canon.push(c);
                }
                ConcreteAction::Out {
                    subject,
                    extruded: canon,
                    object: object.canon_with(env),
                }
            }
            ConcreteAction::LateIn { subject, binder } => {
                let subject = subject.canon_with(env);
                let (c, prev) = env.bind(*binder);
                bound.push((*binder, prev));
                ConcreteAction::LateIn { subject, binder: c }
            }
            other => other.canon_with_free(env),
        };
        let target = self.target.canon_with(env);
        for (b, prev) in bound.into_iter().rev() {
            env.unbind(b, prev);
        }
        ConcreteTransition { action, target }
    }
}

impl ConcreteAction {
    fn canon_with_free(&self, env: &mut CanonEnv) -> ConcreteAction {
        match self {
            ConcreteAction::EarlyIn { subject, object } => ConcreteAction::EarlyIn {
                subject: subject.canon_with(env),
                object: object.canon_with(env),
            },
            ConcreteAction::Tau => ConcreteAction::Tau,
            _ => unreachable!("binding actions are canonicalized with their targets"),
        }
    }
}

impl fmt::Display for ConcreteTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "--{}--> {}", self.action, self.target)
    }
}

/// The transitions of one agent, with a flag recording whether the
/// replication bound cut off some derivation.
#[derive(Clone, Debug, Default)]
pub struct TransitionSet {
    pub transitions: Vec<ConcreteTransition>,
    pub truncated: bool,
}

impl TransitionSet {
    pub fn into_result(self, dom: &DomainConfig, p: &Agent) -> Result<Vec<ConcreteTransition>, SemanticsError> {
        if self.truncated {
            Err(SemanticsError::DomainExhausted {
                bound: dom.rep_bound,
                agent: p.to_string(),
            })
        } else {
            Ok(self.transitions)
        }
    }
}

struct Ctx<'a> {
    inst: &'a dyn Instance,
    dom: &'a DomainConfig,
    pool: Pool,
    pool_names: BTreeSet<Name>,
    early: bool,
    objects: Vec<Term>,
    truncated: bool,
}

impl<'a> Ctx<'a> {
    fn new(inst: &'a dyn Instance, dom: &'a DomainConfig, early: bool) -> Self {
        let pool = dom.pool();
        let objects = inst.term_domain(&pool, dom.term_depth);
        Ctx {
            inst,
            dom,
            pool_names: pool.names.iter().copied().collect(),
            pool,
            early,
            objects,
            truncated: false,
        }
    }

    fn candidates(&self, psi: &Assertion, m: &Term) -> Vec<Term> {
        self.inst.channel_candidates(psi, m, &self.pool, self.dom.term_depth)
    }

    fn derive(
        &mut self,
        psi: &Assertion,
        p: &Agent,
        budget: usize,
        objects: Option<&[Term]>,
    ) -> Result<Vec<ConcreteTransition>, SemanticsError> {
        let mut out = Vec::new();
        match p {
            Agent::Assert(_) => {}
            Agent::Output(m, n, cont) => {
                for k in self.candidates(psi, m) {
                    out.push(ConcreteTransition {
                        action: ConcreteAction::Out {
                            subject: k,
                            extruded: Vec::new(),
                            object: n.clone(),
                        },
                        target: (**cont).clone(),
                    });
                }
            }
            Agent::Input(m, x, cont) => {
                let cands = self.candidates(psi, m);
                if self.early {
                    let objects: Vec<Term> = objects.map(<[Term]>::to_vec).unwrap_or_else(|| self.objects.clone());
                    for k in &cands {
                        for n in &objects {
                            let target = cont.subst(&Substitution::single(*x, n.clone()))?;
                            out.push(ConcreteTransition {
                                action: ConcreteAction::EarlyIn {
                                    subject: k.clone(),
                                    object: n.clone(),
                                },
                                target,
                            });
                        }
                    }
                } else {
                    let mut avoid = psi.support();
                    avoid.extend(self.pool_names.iter().copied());
                    avoid.extend(m.support());
                    for k in cands {
                        let mut avoid = avoid.clone();
                        avoid.extend(k.support());
                        // rename the binder before it meets the subject, so
                        // that renaming never touches a free occurrence
                        let (binder, target) = if avoid.contains(x) {
                            let mut all = avoid.clone();
                            all.extend(cont.names());
                            let f = FreshSession::new(all).fresh_like(*x);
                            (f, cont.swap(*x, f))
                        } else {
                            (*x, (**cont).clone())
                        };
                        out.push(ConcreteTransition {
                            action: ConcreteAction::LateIn { subject: k, binder },
                            target,
                        });
                    }
                }
            }
            Agent::Case(branches) => {
                for (phi, q) in branches {
                    if self.inst.entails(psi, phi) {
                        out.extend(self.derive(psi, q, budget, objects)?);
                    }
                }
            }
            Agent::Rep(q) => {
                if budget == 0 {
                    self.truncated = true;
                } else {
                    let unfolded = Agent::par((**q).clone(), p.clone());
                    out.extend(self.derive(psi, &unfolded, budget - 1, objects)?);
                }
            }
            Agent::Res(b, body) => {
                let mut clash = psi.support();
                clash.extend(self.pool_names.iter().copied());
                if let Some(objs) = objects {
                    objs.iter().for_each(|o| o.collect_support(&mut clash));
                }
                let (b, body) = if clash.contains(b) {
                    let mut avoid = clash.clone();
                    avoid.extend(p.names());
                    let f = FreshSession::new(avoid).fresh_like(*b);
                    (f, body.swap(*b, f))
                } else {
                    (*b, (**body).clone())
                };
                for t in self.derive(psi, &body, budget, objects)? {
                    let t = t.freshen_bn(&[b].into_iter().collect());
                    match &t.action {
                        ConcreteAction::Out {
                            subject,
                            extruded,
                            object,
                        } if object.support().contains(&b) && !subject.support().contains(&b) => {
                            let mut ext = extruded.clone();
                            ext.push(b);
                            out.push(ConcreteTransition {
                                action: ConcreteAction::Out {
                                    subject: subject.clone(),
                                    extruded: occurrence_order(object, &ext),
                                    object: object.clone(),
                                },
                                target: t.target.clone(),
                            });
                        }
                        a if !a.support().contains(&b) => out.push(ConcreteTransition {
                            action: t.action.clone(),
                            target: Agent::res(b, t.target.clone()),
                        }),
                        _ => {}
                    }
                }
            }
            Agent::Par(l, r) => out.extend(self.par(psi, l, r, budget, objects)?),
        }
        Ok(dedup(out))
    }

    fn par(
        &mut self,
        psi: &Assertion,
        l: &Agent,
        r: &Agent,
        budget: usize,
        objects: Option<&[Term]>,
    ) -> Result<Vec<ConcreteTransition>, SemanticsError> {
        let mut base = psi.support();
        base.extend(self.pool_names.iter().copied());
        if let Some(objs) = objects {
            objs.iter().for_each(|o| o.collect_support(&mut base));
        }
        let mut avoid_l = base.clone();
        avoid_l.extend(r.names());
        let l = freshen_frame_binders(l, &avoid_l);
        let mut avoid_r = base.clone();
        avoid_r.extend(l.names());
        let r = freshen_frame_binders(r, &avoid_r);
        let fl = frame_of(self.inst, &l);
        let fr = frame_of(self.inst, &r);
        let env_l = self.inst.compose(psi, &fr.assertion);
        let env_r = self.inst.compose(psi, &fl.assertion);
        let env_all = self.inst.compose(&env_l, &fl.assertion);

        let tl = self.derive(&env_l, &l, budget, objects)?;
        let tr = self.derive(&env_r, &r, budget, objects)?;
        let mut out = Vec::new();

        let mut avoid = base.clone();
        avoid.extend(r.support());
        for t in &tl {
            let t = t.freshen_bn(&avoid);
            out.push(ConcreteTransition {
                target: Agent::par(t.target.clone(), r.clone()),
                action: t.action,
            });
        }
        let mut avoid = base.clone();
        avoid.extend(l.support());
        for t in &tr {
            let t = t.freshen_bn(&avoid);
            out.push(ConcreteTransition {
                target: Agent::par(l.clone(), t.target.clone()),
                action: t.action,
            });
        }

        // communication, both directions
        for (sender, receiver, receiver_env, sends, left_sends) in
            [(&l, &r, &env_r, &tl, true), (&r, &l, &env_l, &tr, false)]
        {
            for t in sends.iter() {
                let ConcreteAction::Out { .. } = t.action else { continue };
                // extruded names must be fresh for the receiver
                let mut avoid = base.clone();
                avoid.extend(receiver.names());
                avoid.extend(sender.support());
                let t = t.freshen_bn(&avoid);
                let ConcreteAction::Out {
                    subject: m,
                    extruded,
                    object,
                } = &t.action
                else {
                    unreachable!()
                };
                let receives = if self.early {
                    self.derive(receiver_env, receiver, budget, Some(std::slice::from_ref(object)))?
                } else {
                    let mut avoid = base.clone();
                    avoid.extend(object.support());
                    avoid.extend(extruded.iter().copied());
                    self.derive(receiver_env, receiver, budget, objects)?
                        .into_iter()
                        .map(|u| u.freshen_bn(&avoid))
                        .collect()
                };
                for u in receives {
                    let (k, received) = match &u.action {
                        ConcreteAction::LateIn { subject, binder } if !self.early => {
                            (subject, u.target.subst(&Substitution::single(*binder, object.clone()))?)
                        }
                        ConcreteAction::EarlyIn { subject, object: o } if self.early && o == object => {
                            (subject, u.target.clone())
                        }
                        _ => continue,
                    };
                    if !self.inst.entails(&env_all, &self.inst.chan_eq(m, k)) {
                        continue;
                    }
                    let inner = if left_sends {
                        Agent::par(t.target.clone(), received)
                    } else {
                        Agent::par(received, t.target.clone())
                    };
                    out.push(ConcreteTransition {
                        action: ConcreteAction::Tau,
                        target: Agent::res_all(extruded, inner),
                    });
                }
            }
        }
        Ok(out)
    }
}

fn dedup(ts: Vec<ConcreteTransition>) -> Vec<ConcreteTransition> {
    let mut seen = HashSet::new();
    ts.into_iter().filter(|t| seen.insert(t.canonical())).collect()
}

/// Late transitions of `P` in environment `Psi`.
pub fn late_transitions(inst: &dyn Instance, psi: &Assertion, p: &Agent, dom: &DomainConfig) -> Result<TransitionSet, SemanticsError> {
    let mut ctx = Ctx::new(inst, dom, false);
    let transitions = ctx.derive(psi, p, dom.rep_bound, None)?;
    Ok(TransitionSet {
        transitions,
        truncated: ctx.truncated,
    })
}

/// Early transitions of `P` in environment `Psi`; input objects range over
/// the domain's terms.
pub fn early_transitions(inst: &dyn Instance, psi: &Assertion, p: &Agent, dom: &DomainConfig) -> Result<TransitionSet, SemanticsError> {
    let mut ctx = Ctx::new(inst, dom, true);
    let transitions = ctx.derive(psi, p, dom.rep_bound, None)?;
    Ok(TransitionSet {
        transitions,
        truncated: ctx.truncated,
    })
}

/// Early transitions with an explicit input-object domain.
pub fn early_transitions_with_objects(
    inst: &dyn Instance,
    psi: &Assertion,
    p: &Agent,
    dom: &DomainConfig,
    objects: &[Term],
) -> Result<TransitionSet, SemanticsError> {
    let mut ctx = Ctx::new(inst, dom, true);
    ctx.objects = objects.to_vec();
    let transitions = ctx.derive(psi, p, dom.rep_bound, None)?;
    Ok(TransitionSet {
        transitions,
        truncated: ctx.truncated,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LateEarlyReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl LateEarlyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that early inputs are exactly the late inputs instantiated with
/// each object, and that outputs and silent steps coincide.
pub fn check_late_early(
    inst: &dyn Instance,
    psi: &Assertion,
    p: &Agent,
    dom: &DomainConfig,
    objects: &[Term],
) -> Result<LateEarlyReport, SemanticsError> {
    let late = late_transitions(inst, psi, p, dom)?.transitions;
    let early = early_transitions_with_objects(inst, psi, p, dom, objects)?.transitions;
    let mut report = LateEarlyReport::default();

    let late_inst: HashSet<(Term, Term, Agent)> = late
        .iter()
        .filter_map(|t| match &t.action {
            ConcreteAction::LateIn { subject, binder } => Some((subject, binder, &t.target)),
            _ => None,
        })
        .flat_map(|(k, x, target)| {
            objects.iter().filter_map(move |n| {
                let q = target.subst(&Substitution::single(*x, n.clone())).ok()?;
                Some((k.clone(), n.clone(), q.canonical()))
            })
        })
        .collect();
    let early_in: HashSet<(Term, Term, Agent)> = early
        .iter()
        .filter_map(|t| match &t.action {
            ConcreteAction::EarlyIn { subject, object } => Some((subject.clone(), object.clone(), t.target.canonical())),
            _ => None,
        })
        .collect();
    for e in &early_in {
        report.checked += 1;
        if !late_inst.contains(e) {
            report.violations.push(format!("{p}: early input {} {} --> {} has no late counterpart", e.0, e.1, e.2));
        }
    }
    for l in &late_inst {
        report.checked += 1;
        if !early_in.contains(l) {
            report.violations.push(format!("{p}: late input {}({}) instantiated to {} has no early counterpart", l.0, l.1, l.2));
        }
    }

    let others = |ts: &[ConcreteTransition]| -> HashSet<ConcreteTransition> {
        ts.iter()
            .filter(|t| matches!(t.action, ConcreteAction::Out { .. } | ConcreteAction::Tau))
            .map(Alpha::canonical)
            .collect()
    };
    let (lo, eo) = (others(&late), others(&early));
    for t in lo.symmetric_difference(&eo) {
        report.checked += 1;
        let side = if lo.contains(t) { "late" } else { "early" };
        report.violations.push(format!("{p}: {side}-only transition {t}"));
    }
    report.checked += lo.intersection(&eo).count();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{AssignInstance, PiInstance};
    use crate::syntax::parse_agent;

    fn pi(s: &str) -> Agent {
        parse_agent(&PiInstance, s).unwrap()
    }

    fn dom() -> DomainConfig {
        DomainConfig::labels(&["a", "b"])
    }

    #[test]
    fn input_prefix() {
        let ts = late_transitions(&PiInstance, &Assertion::unit(), &pi("a(x).0"), &dom()).unwrap();
        assert_eq!(ts.transitions.len(), 1);
        assert!(matches!(&ts.transitions[0].action, ConcreteAction::LateIn { subject, .. } if *subject == Term::name("a")));
        assert!(ts.transitions[0].target.is_nil());
    }

    #[test]
    fn communication() {
        let ts = late_transitions(&PiInstance, &Assertion::unit(), &pi("a!b.0 | a(x).0"), &dom()).unwrap();
        let taus: Vec<_> = ts.transitions.iter().filter(|t| t.action == ConcreteAction::Tau).collect();
        assert_eq!(taus.len(), 1);
        assert_eq!(taus[0].target, pi("0 | 0"));
        let early = early_transitions(&PiInstance, &Assertion::unit(), &pi("a!b.0 | a(x).0"), &dom()).unwrap();
        let etaus: Vec<_> = early.transitions.iter().filter(|t| t.action == ConcreteAction::Tau).collect();
        assert_eq!(etaus.len(), 1);
    }

    #[test]
    fn early_inputs_range_over_objects() {
        let ts = early_transitions(&PiInstance, &Assertion::unit(), &pi("a(x).x!x.0"), &dom()).unwrap();
        let targets: BTreeSet<Agent> = ts.transitions.iter().map(|t| t.target.clone()).collect();
        assert_eq!(targets, [pi("a!a"), pi("b!b")].into_iter().collect());
        assert!(early_transitions(&PiInstance, &Assertion::unit(), &Agent::nil(), &dom())
            .unwrap()
            .transitions
            .is_empty());
    }

    #[test]
    fn case_under_assertion() {
        let x = Name::new("x");
        let p = parse_agent(&AssignInstance, "case prime(x) : a!b").unwrap();
        let three = Assertion::assign(x, Term::Int(3));
        let d = dom();
        assert_eq!(late_transitions(&AssignInstance, &three, &p, &d).unwrap().transitions.len(), 1);
        let four = Assertion::assign(x, Term::Int(4));
        assert!(late_transitions(&AssignInstance, &four, &p, &d).unwrap().transitions.is_empty());
    }

    #[test]
    fn scope_extrusion() {
        let ts = late_transitions(&PiInstance, &Assertion::unit(), &pi("(new c)a!c.c!b"), &dom()).unwrap();
        assert_eq!(ts.transitions.len(), 1);
        let ConcreteAction::Out { extruded, object, .. } = &ts.transitions[0].action else { panic!() };
        assert_eq!(extruded.len(), 1);
        assert_eq!(*object, Term::Name(extruded[0]));
        // a restricted subject blocks the action
        let blocked = late_transitions(&PiInstance, &Assertion::unit(), &pi("(new a)a!b"), &dom()).unwrap();
        assert!(blocked.transitions.is_empty());
    }

    #[test]
    fn extrusion_into_receiver() {
        let p = pi("(new c)a!c | a(x).x!b");
        let ts = late_transitions(&PiInstance, &Assertion::unit(), &p, &dom()).unwrap();
        let tau = ts.transitions.iter().find(|t| t.action == ConcreteAction::Tau).unwrap();
        assert!(tau.target.alpha_eq(&pi("(new c)(0 | c!b)")));
    }

    #[test]
    fn replication_truncates() {
        let ts = late_transitions(&PiInstance, &Assertion::unit(), &pi("!a!b"), &dom()).unwrap();
        assert!(ts.truncated);
        assert_eq!(ts.transitions.len(), 1);
        assert!(ts.into_result(&dom(), &pi("!a!b")).is_err());
    }

    #[test]
    fn late_early_agree_on_examples() {
        let objs = vec![Term::name("a"), Term::name("b")];
        for src in ["a(x).x!x.0", "a(x).case x=b : a!b.a!b [] x<>b : a!b.a!b", "a!b | a(x).x!a"] {
            let r = check_late_early(&PiInstance, &Assertion::unit(), &pi(src), &dom(), &objs).unwrap();
            assert!(r.passed(), "{src}: {:?}", r.violations);
        }
    }
}
