//! The symbolic operational semantics.
//!
//! Subjects are fresh names standing for any channel-equivalent term; the
//! transition constraint records what must hold for a concrete instance of
//! the step to exist. Input objects stay symbolic (late style).

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde_json::{json, Value};
use thiserror::Error;

use crate::concrete::{ConcreteAction, ConcreteTransition, SemanticsError};
use crate::constraints::{restrict, restrict_all, Atom, Conjunct, Constraint, Solution};
use crate::data::{Assertion, Term};
use crate::nominal::{FreshSession, Name, Nominal, NominalError, Subst, Substitution};
use crate::params::Instance;
use crate::syntax::{frame_of, freshen_frame_binders, Agent};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SymbolicAction {
    Out {
        subject: Name,
        extruded: Vec<Name>,
        object: Term,
    },
    In {
        subject: Name,
        binder: Name,
    },
    Tau,
}

impl SymbolicAction {
    pub fn bn(&self) -> Vec<Name> {
        match self {
            SymbolicAction::Out { extruded, .. } => extruded.clone(),
            SymbolicAction::In { binder, .. } => vec![*binder],
            SymbolicAction::Tau => Vec::new(),
        }
    }

    pub fn subject(&self) -> Option<Name> {
        match self {
            SymbolicAction::Out { subject, .. } | SymbolicAction::In { subject, .. } => Some(*subject),
            SymbolicAction::Tau => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SymbolicAction::Out { .. } => "out",
            SymbolicAction::In { .. } => "in",
            SymbolicAction::Tau => "tau",
        }
    }

    /// The concrete action obtained by instantiating the subject and
    /// applying the solution's substitution; bound names must be fresh for
    /// it.
    pub fn instantiate(&self, s: &Solution) -> Result<ConcreteAction, NominalError> {
        Ok(match self {
            SymbolicAction::Out {
                subject,
                extruded,
                object,
            } => ConcreteAction::Out {
                subject: s.apply_name(*subject),
                extruded: extruded.clone(),
                object: object.subst(&s.subst)?,
            },
            SymbolicAction::In { subject, binder } => ConcreteAction::LateIn {
                subject: s.apply_name(*subject),
                binder: *binder,
            },
            SymbolicAction::Tau => ConcreteAction::Tau,
        })
    }
}

impl Nominal for SymbolicAction {
    fn swap(&self, a: Name, b: Name) -> Self {
        match self {
            SymbolicAction::Out {
                subject,
                extruded,
                object,
            } => SymbolicAction::Out {
                subject: subject.swap(a, b),
                extruded: extruded.swap(a, b),
                object: object.swap(a, b),
            },
            SymbolicAction::In { subject, binder } => SymbolicAction::In {
                subject: subject.swap(a, b),
                binder: binder.swap(a, b),
            },
            SymbolicAction::Tau => SymbolicAction::Tau,
        }
    }

    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        match self {
            SymbolicAction::Out {
                subject,
                extruded,
                object,
            } => {
                out.insert(*subject);
                out.extend(extruded.iter().copied());
                object.collect_support(out);
            }
            SymbolicAction::In { subject, binder } => {
                out.insert(*subject);
                out.insert(*binder);
            }
            SymbolicAction::Tau => {}
        }
    }
}

impl fmt::Display for SymbolicAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicAction::Out {
                subject,
                extruded,
                object,
            } if extruded.is_empty() => write!(f, "{subject}!{object}"),
            SymbolicAction::Out {
                subject,
                extruded,
                object,
            } => write!(f, "{subject}!(new {}){object}", extruded.iter().join(",")),
            SymbolicAction::In { subject, binder } => write!(f, "{subject}({binder})"),
            SymbolicAction::Tau => f.write_str("tau"),
        }
    }
}

/// The leading conjunct `(nu binders){env |- term <-> subject}` of a
/// visible transition, kept structurally for the communication rule.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Anchor {
    pub binders: Vec<Name>,
    pub env: Assertion,
    pub term: Term,
    pub subject: Name,
}

impl Nominal for Anchor {
    fn swap(&self, a: Name, b: Name) -> Self {
        Anchor {
            binders: self.binders.swap(a, b),
            env: self.env.swap(a, b),
            term: self.term.swap(a, b),
            subject: self.subject.swap(a, b),
        }
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        let mut body = self.env.support();
        self.term.collect_support(&mut body);
        body.insert(self.subject);
        for b in &self.binders {
            body.remove(b);
        }
        out.extend(body);
    }
    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        out.extend(self.binders.iter().copied());
        self.env.collect_support(out);
        self.term.collect_support(out);
        out.insert(self.subject);
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("silent transitions carry no subject constraint")]
pub struct NotAnchored;

/// `Psi |> P --action, constraint--> target`
#[derive(Clone, Debug)]
pub struct SymbolicTransition {
    pub env: Assertion,
    pub source: Agent,
    pub action: SymbolicAction,
    pub constraint: Constraint,
    pub anchor: Option<Anchor>,
    pub target: Agent,
}

impl SymbolicTransition {
    /// Renames a bound name of the action in action, constraint and target.
    pub fn rename_bn(&self, from: Name, to: Name) -> SymbolicTransition {
        SymbolicTransition {
            env: self.env.clone(),
            source: self.source.clone(),
            action: self.action.swap(from, to),
            constraint: self.constraint.swap(from, to),
            anchor: self.anchor.as_ref().map(|a| a.swap(from, to)),
            target: self.target.swap(from, to),
        }
    }

    /// Alpha-converts the bound names of the action away from `avoid`.
    pub fn freshen_bn(&self, avoid: &BTreeSet<Name>, session: &mut FreshSession) -> SymbolicTransition {
        let mut t = self.clone();
        for b in self.action.bn() {
            if avoid.contains(&b) {
                session.avoid(avoid.iter().copied());
                let f = session.fresh_like(b);
                t = t.rename_bn(b, f);
            }
        }
        t
    }

    /// The concrete transition `Psi' |> P sigma --alpha sigma--> P' sigma`
    /// for a solution whose substitution covers the subject.
    pub fn instantiate(&self, s: &Solution) -> Result<ConcreteTransition, NominalError> {
        let bn: BTreeSet<Name> = self.action.bn().into_iter().collect();
        let inner = Substitution::from_map(
            s.subst
                .iter()
                .filter(|(n, _)| !bn.contains(n))
                .map(|(n, t)| (*n, t.clone()))
                .collect(),
        );
        let local = Solution::new(inner, s.assertion.clone());
        Ok(ConcreteTransition {
            action: self.action.instantiate(&local)?,
            target: self.target.subst(&local.subst)?,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "action": self.action.to_string(),
            "constraint": self.constraint.to_json(),
            "target": self.target.to_string(),
        })
    }
}

impl fmt::Display for SymbolicTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "--{}, {}--> {}", self.action, self.constraint, self.target)
    }
}

pub fn anchor_of(t: &SymbolicTransition) -> Result<&Anchor, NotAnchored> {
    t.anchor.as_ref().ok_or(NotAnchored)
}

#[derive(Clone, Debug, Default)]
pub struct SymbolicSet {
    pub transitions: Vec<SymbolicTransition>,
    pub truncated: bool,
}

impl SymbolicSet {
    pub fn into_result(self, rep_bound: usize, p: &Agent) -> Result<Vec<SymbolicTransition>, SemanticsError> {
        if self.truncated {
            Err(SemanticsError::DomainExhausted {
                bound: rep_bound,
                agent: p.to_string(),
            })
        } else {
            Ok(self.transitions)
        }
    }
}

/// One derived step before it is attached to its source.
#[derive(Clone)]
struct Step {
    action: SymbolicAction,
    constraint: Constraint,
    anchor: Option<Anchor>,
    target: Agent,
}

impl Step {
    fn rename_bn(&self, from: Name, to: Name) -> Step {
        Step {
            action: self.action.swap(from, to),
            constraint: self.constraint.swap(from, to),
            anchor: self.anchor.as_ref().map(|a| a.swap(from, to)),
            target: self.target.swap(from, to),
        }
    }

    fn freshen_bn(&self, avoid: &BTreeSet<Name>, session: &mut FreshSession) -> Step {
        let mut t = self.clone();
        for b in self.action.bn() {
            if avoid.contains(&b) {
                let f = session.fresh_like(b);
                t = t.rename_bn(b, f);
            }
        }
        t
    }

    fn names(&self) -> BTreeSet<Name> {
        let mut out = self.action.support();
        self.constraint.collect_names(&mut out);
        if let Some(a) = &self.anchor {
            a.collect_names(&mut out);
        }
        self.target.collect_names(&mut out);
        out
    }
}

struct Ctx<'a> {
    inst: &'a dyn Instance,
    session: &'a mut FreshSession,
    truncated: bool,
}

impl Ctx<'_> {
    fn prefix(&mut self, psi: &Assertion, m: &Term, action: impl FnOnce(Name) -> SymbolicAction, cont: &Agent) -> Step {
        let y = self.session.fresh("y");
        Step {
            action: action(y),
            constraint: Constraint::atom(psi.clone(), self.inst.chan_eq(m, &Term::Name(y))),
            anchor: Some(Anchor {
                binders: Vec::new(),
                env: psi.clone(),
                term: m.clone(),
                subject: y,
            }),
            target: cont.clone(),
        }
    }

    fn derive(&mut self, psi: &Assertion, p: &Agent, budget: usize) -> Result<Vec<Step>, SemanticsError> {
        self.session.avoid(p.names());
        let mut out = Vec::new();
        match p {
            Agent::Assert(_) => {}
            Agent::Output(m, n, cont) => {
                let step = self.prefix(
                    psi,
                    m,
                    |y| SymbolicAction::Out {
                        subject: y,
                        extruded: Vec::new(),
                        object: n.clone(),
                    },
                    cont,
                );
                out.push(step);
            }
            Agent::Input(m, x, cont) => {
                // the binder must not occur free in the constraint
                let mut clash = psi.support();
                m.collect_support(&mut clash);
                let (x, cont) = if clash.contains(x) {
                    let f = self.session.fresh_like(*x);
                    (f, cont.swap(*x, f))
                } else {
                    (*x, (**cont).clone())
                };
                let step = self.prefix(psi, m, |y| SymbolicAction::In { subject: y, binder: x }, &cont);
                out.push(step);
            }
            Agent::Case(branches) => {
                for (phi, q) in branches {
                    let clash = phi.support();
                    for s in self.derive(psi, q, budget)? {
                        // binders must stay clear of the guard
                        let mut s = s.freshen_bn(&clash, self.session);
                        s.constraint.push(Conjunct::Atom(Atom::new(psi.clone(), phi.clone())));
                        out.push(s);
                    }
                }
            }
            Agent::Rep(q) => {
                if budget == 0 {
                    self.truncated = true;
                } else {
                    let unfolded = Agent::par((**q).clone(), p.clone());
                    out.extend(self.derive(psi, &unfolded, budget - 1)?);
                }
            }
            Agent::Res(b, body) => {
                let (b, body) = if psi.support().contains(b) {
                    let f = self.session.fresh_like(*b);
                    (f, body.swap(*b, f))
                } else {
                    (*b, (**body).clone())
                };
                let only_b: BTreeSet<Name> = [b].into_iter().collect();
                for s in self.derive(psi, &body, budget)? {
                    let s = s.freshen_bn(&only_b, self.session);
                    let constraint = restrict(b, &s.constraint);
                    let anchor = s.anchor.clone().map(|mut a| {
                        a.binders.insert(0, b);
                        a
                    });
                    match &s.action {
                        a if !a.support().contains(&b) => out.push(Step {
                            action: s.action.clone(),
                            constraint,
                            anchor,
                            target: Agent::res(b, s.target.clone()),
                        }),
                        SymbolicAction::Out {
                            subject,
                            extruded,
                            object,
                        } if object.support().contains(&b) && *subject != b => {
                            let mut ext = extruded.clone();
                            ext.push(b);
                            out.push(Step {
                                action: SymbolicAction::Out {
                                    subject: *subject,
                                    extruded: occurrence_order(object, &ext),
                                    object: object.clone(),
                                },
                                constraint,
                                anchor,
                                target: s.target.clone(),
                            });
                        }
                        _ => {}
                    }
                }
            }
            Agent::Par(l, r) => out.extend(self.par(psi, l, r, budget)?),
        }
        Ok(out)
    }

    fn par(&mut self, psi: &Assertion, l: &Agent, r: &Agent, budget: usize) -> Result<Vec<Step>, SemanticsError> {
        // frame binders must be fresh for the environment and each other
        let mut avoid_l = psi.support();
        avoid_l.extend(r.names());
        let l = freshen_frame_binders(l, &avoid_l);
        let mut avoid_r = psi.support();
        avoid_r.extend(l.names());
        let r = freshen_frame_binders(r, &avoid_r);
        self.session.avoid(l.names());
        self.session.avoid(r.names());
        let fl = frame_of(self.inst, &l);
        let fr = frame_of(self.inst, &r);
        let env_l = self.inst.compose(psi, &fr.assertion);
        let env_r = self.inst.compose(psi, &fl.assertion);

        let tl = self.derive(&env_l, &l, budget)?;
        let tr = self.derive(&env_r, &r, budget)?;
        let mut out = Vec::new();

        for (steps, other, other_frame, left) in [(&tl, &r, &fr, true), (&tr, &l, &fl, false)] {
            let avoid = other.names();
            for s in steps.iter() {
                let s = s.freshen_bn(&avoid, self.session);
                out.push(Step {
                    action: s.action.clone(),
                    constraint: restrict_all(&other_frame.binders, &s.constraint),
                    anchor: s.anchor.clone().map(|mut a| {
                        let mut bs = other_frame.binders.clone();
                        bs.extend(a.binders);
                        a.binders = bs;
                        a
                    }),
                    target: if left {
                        Agent::par(s.target.clone(), (*other).clone())
                    } else {
                        Agent::par((*other).clone(), s.target.clone())
                    },
                });
            }
        }

        for (sends, receives, sender_frame, receiver_frame, receiver, left_sends) in
            [(&tl, &tr, &fl, &fr, &r, true), (&tr, &tl, &fr, &fl, &l, false)]
        {
            for s in sends.iter() {
                if !matches!(s.action, SymbolicAction::Out { .. }) {
                    continue;
                }
                // extruded names must be fresh for the receiver
                let s = s.freshen_bn(&receiver.names(), self.session);
                let SymbolicAction::Out { extruded, object, .. } = &s.action else {
                    unreachable!()
                };
                let ap = s.anchor.as_ref().expect("visible steps are anchored");
                for u in receives.iter() {
                    if !matches!(u.action, SymbolicAction::In { .. }) {
                        continue;
                    }
                    let mut avoid = s.names();
                    avoid.extend(object.support());
                    let u = u.freshen_bn(&avoid, self.session);
                    let SymbolicAction::In { binder, .. } = &u.action else {
                        unreachable!()
                    };
                    let aq = u.anchor.as_ref().expect("visible steps are anchored");
                    let received = u.target.subst(&Substitution::single(*binder, object.clone()))?;
                    let binders: Vec<Name> = ap.binders.iter().chain(&aq.binders).copied().unique().collect();
                    let (mp, mq) = if left_sends { (&ap.term, &aq.term) } else { (&aq.term, &ap.term) };
                    let head = Constraint::atom(self.inst.compose(&ap.env, &aq.env), self.inst.chan_eq(mp, mq));
                    let mut constraint = restrict_all(&binders, &head);
                    let rest_p = Constraint {
                        conjuncts: s.constraint.conjuncts[1..].to_vec(),
                    };
                    let rest_q = Constraint {
                        conjuncts: u.constraint.conjuncts[1..].to_vec(),
                    };
                    let (first, second) = if left_sends {
                        (restrict_all(&receiver_frame.binders, &rest_p), restrict_all(&sender_frame.binders, &rest_q))
                    } else {
                        (restrict_all(&sender_frame.binders, &rest_q), restrict_all(&receiver_frame.binders, &rest_p))
                    };
                    constraint = constraint.and(&first).and(&second);
                    let inner = if left_sends {
                        Agent::par(s.target.clone(), received)
                    } else {
                        Agent::par(received, s.target.clone())
                    };
                    out.push(Step {
                        action: SymbolicAction::Tau,
                        constraint,
                        anchor: None,
                        target: Agent::res_all(extruded, inner),
                    });
                }
            }
        }
        Ok(out)
    }
}

fn occurrence_order(object: &Term, names: &[Name]) -> Vec<Name> {
    let mut order: Vec<Name> = Vec::new();
    object.map_names(&mut |n| {
        if names.contains(&n) && !order.contains(&n) {
            order.push(n);
        }
        Term::Name(n)
    });
    for n in names {
        if !order.contains(n) {
            order.push(*n);
        }
    }
    order
}

/// Symbolic transitions of `P` in environment `Psi`. The session must avoid
/// the support of `Psi` and `P`; subjects and renamed binders are drawn from
/// it.
pub fn symbolic_transitions(
    inst: &dyn Instance,
    psi: &Assertion,
    p: &Agent,
    session: &mut FreshSession,
    rep_bound: usize,
) -> Result<SymbolicSet, SemanticsError> {
    session.avoid(psi.support());
    session.avoid(p.names());
    let mut ctx = Ctx {
        inst,
        session,
        truncated: false,
    };
    let steps = ctx.derive(psi, p, rep_bound)?;
    let truncated = ctx.truncated;
    let transitions = steps
        .into_iter()
        .map(|s| SymbolicTransition {
            env: psi.clone(),
            source: p.clone(),
            action: s.action,
            constraint: s.constraint,
            anchor: s.anchor,
            target: s.target,
        })
        .collect();
    Ok(SymbolicSet { transitions, truncated })
}
