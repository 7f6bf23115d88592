//! Agents, frames of agents, guardedness, and the textual agent language.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::data::{Assertion, Condition, Term};
use crate::nominal::{enter_binder, Alpha, CanonEnv, FreshSession, Name, Nominal, NominalError, Subst, Substitution};
use crate::params::{frame_compose, Frame, Instance};

mod parser;
mod printer;

pub use parser::{parse, parse_agent, ParseError, ParsedUnit};

/// The process syntax. `0` is the unit assertion agent.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Agent {
    Output(Term, Term, Arc<Agent>),
    Input(Term, Name, Arc<Agent>),
    Case(Vec<(Condition, Agent)>),
    Res(Name, Arc<Agent>),
    Par(Arc<Agent>, Arc<Agent>),
    Rep(Arc<Agent>),
    Assert(Assertion),
}

impl Agent {
    pub fn nil() -> Agent {
        Agent::Assert(Assertion::unit())
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Agent::Assert(a) if a.is_unit())
    }

    pub fn output(m: Term, n: Term, p: Agent) -> Agent {
        Agent::Output(m, n, Arc::new(p))
    }

    pub fn input(m: Term, x: Name, p: Agent) -> Agent {
        Agent::Input(m, x, Arc::new(p))
    }

    pub fn case(branches: Vec<(Condition, Agent)>) -> Agent {
        Agent::Case(branches)
    }

    pub fn res(a: Name, p: Agent) -> Agent {
        Agent::Res(a, Arc::new(p))
    }

    /// `(new a1,...,an)P`
    pub fn res_all(names: &[Name], p: Agent) -> Agent {
        names.iter().rev().fold(p, |p, a| Agent::res(*a, p))
    }

    pub fn par(p: Agent, q: Agent) -> Agent {
        Agent::Par(Arc::new(p), Arc::new(q))
    }

    pub fn rep(p: Agent) -> Agent {
        Agent::Rep(Arc::new(p))
    }

    pub fn assertion(a: Assertion) -> Agent {
        Agent::Assert(a)
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        match self {
            Agent::Output(_, _, p) | Agent::Input(_, _, p) | Agent::Res(_, p) | Agent::Rep(p) => 1 + p.size(),
            Agent::Case(bs) => 1 + bs.iter().map(|(_, p)| p.size()).sum::<usize>(),
            Agent::Par(p, q) => 1 + p.size() + q.size(),
            Agent::Assert(_) => 1,
        }
    }

    /// Drops `0` components of parallel compositions and restrictions of
    /// `0`, everywhere. The result is structurally congruent to `self`.
    pub fn prune_nil(&self) -> Agent {
        match self {
            Agent::Par(p, q) => match (p.prune_nil(), q.prune_nil()) {
                (p, q) if q.is_nil() => p,
                (p, q) if p.is_nil() => q,
                (p, q) => Agent::par(p, q),
            },
            Agent::Res(a, p) => match p.prune_nil() {
                p if p.is_nil() => p,
                p => Agent::res(*a, p),
            },
            Agent::Output(m, n, p) => Agent::output(m.clone(), n.clone(), p.prune_nil()),
            Agent::Input(m, x, p) => Agent::input(m.clone(), *x, p.prune_nil()),
            Agent::Case(bs) => Agent::case(bs.iter().map(|(c, p)| (c.clone(), p.prune_nil())).collect()),
            Agent::Rep(p) => Agent::rep(p.prune_nil()),
            Agent::Assert(_) => self.clone(),
        }
    }

    /// A representative of the structural congruence class: alpha, `P | 0
    /// = P` and commutativity and associativity of `|`. Parallel
    /// components are sorted by their own canonical forms.
    pub fn structural_key(&self) -> Agent {
        fn components(p: &Agent, out: &mut Vec<Agent>) {
            match p {
                Agent::Par(l, r) => {
                    components(l, out);
                    components(r, out);
                }
                other => out.push(norm(other)),
            }
        }
        fn norm(p: &Agent) -> Agent {
            match p {
                Agent::Par(..) => {
                    let mut parts = Vec::new();
                    components(p, &mut parts);
                    parts.sort_by_cached_key(|c| c.canonical());
                    let last = parts.pop().expect("a parallel composition has components");
                    parts.into_iter().rev().fold(last, |acc, c| Agent::par(c, acc))
                }
                Agent::Res(a, q) => Agent::res(*a, norm(q)),
                Agent::Output(m, n, q) => Agent::output(m.clone(), n.clone(), norm(q)),
                Agent::Input(m, x, q) => Agent::input(m.clone(), *x, norm(q)),
                Agent::Case(bs) => Agent::case(bs.iter().map(|(c, q)| (c.clone(), norm(q))).collect()),
                Agent::Rep(q) => Agent::rep(norm(q)),
                Agent::Assert(_) => p.clone(),
            }
        }
        norm(&self.prune_nil()).canonical()
    }

    pub fn contains_replication(&self) -> bool {
        match self {
            Agent::Rep(_) => true,
            Agent::Output(_, _, p) | Agent::Input(_, _, p) | Agent::Res(_, p) => p.contains_replication(),
            Agent::Case(bs) => bs.iter().any(|(_, p)| p.contains_replication()),
            Agent::Par(p, q) => p.contains_replication() || q.contains_replication(),
            Agent::Assert(_) => false,
        }
    }

    /// Every term, condition and assertion occurring in the agent.
    pub fn visit_data(&self, f: &mut dyn FnMut(Data<'_>)) {
        match self {
            Agent::Output(m, n, p) => {
                f(Data::Term(m));
                f(Data::Term(n));
                p.visit_data(f);
            }
            Agent::Input(m, _, p) => {
                f(Data::Term(m));
                p.visit_data(f);
            }
            Agent::Case(bs) => {
                for (c, p) in bs {
                    f(Data::Condition(c));
                    p.visit_data(f);
                }
            }
            Agent::Res(_, p) | Agent::Rep(p) => p.visit_data(f),
            Agent::Par(p, q) => {
                p.visit_data(f);
                q.visit_data(f);
            }
            Agent::Assert(a) => f(Data::Assertion(a)),
        }
    }

    /// All conditions occurring in the agent, with names as written.
    pub fn conditions(&self) -> Vec<Condition> {
        let mut out = Vec::new();
        self.visit_data(&mut |d| {
            if let Data::Condition(c) = d {
                out.push(c.clone());
            }
        });
        out
    }
}

/// A view of one data item inside an agent.
pub enum Data<'a> {
    Term(&'a Term),
    Condition(&'a Condition),
    Assertion(&'a Assertion),
}

impl Nominal for Agent {
    fn swap(&self, a: Name, b: Name) -> Self {
        match self {
            Agent::Output(m, n, p) => Agent::output(m.swap(a, b), n.swap(a, b), p.swap(a, b)),
            Agent::Input(m, x, p) => Agent::input(m.swap(a, b), x.swap(a, b), p.swap(a, b)),
            Agent::Case(bs) => Agent::Case(bs.iter().map(|(c, p)| (c.swap(a, b), p.swap(a, b))).collect()),
            Agent::Res(x, p) => Agent::res(x.swap(a, b), p.swap(a, b)),
            Agent::Par(p, q) => Agent::par(p.swap(a, b), q.swap(a, b)),
            Agent::Rep(p) => Agent::rep(p.swap(a, b)),
            Agent::Assert(psi) => Agent::Assert(psi.swap(a, b)),
        }
    }

    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        match self {
            Agent::Output(m, n, p) => {
                m.collect_support(out);
                n.collect_support(out);
                p.collect_support(out);
            }
            Agent::Input(m, x, p) => {
                m.collect_support(out);
                let mut inner = p.support();
                inner.remove(x);
                out.extend(inner);
            }
            Agent::Case(bs) => {
                for (c, p) in bs {
                    c.collect_support(out);
                    p.collect_support(out);
                }
            }
            Agent::Res(x, p) => {
                let mut inner = p.support();
                inner.remove(x);
                out.extend(inner);
            }
            Agent::Par(p, q) => {
                p.collect_support(out);
                q.collect_support(out);
            }
            Agent::Rep(p) => p.collect_support(out),
            Agent::Assert(psi) => psi.collect_support(out),
        }
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Agent::Output(m, n, p) => {
                m.collect_support(out);
                n.collect_support(out);
                p.collect_names(out);
            }
            Agent::Input(m, x, p) => {
                m.collect_support(out);
                out.insert(*x);
                p.collect_names(out);
            }
            Agent::Case(bs) => {
                for (c, p) in bs {
                    c.collect_support(out);
                    p.collect_names(out);
                }
            }
            Agent::Res(x, p) => {
                out.insert(*x);
                p.collect_names(out);
            }
            Agent::Par(p, q) => {
                p.collect_names(out);
                q.collect_names(out);
            }
            Agent::Rep(p) => p.collect_names(out),
            Agent::Assert(psi) => psi.collect_support(out),
        }
    }
}

fn subst_under(x: Name, p: &Agent, s: &Substitution) -> Result<(Name, Agent), NominalError> {
    let body_support = p.support();
    let (x2, inner) = enter_binder(x, &body_support, s);
    let body = if x2 == x { p.clone() } else { p.swap(x, x2) };
    Ok((x2, body.subst(&inner)?))
}

impl Subst for Agent {
    fn subst(&self, s: &Substitution) -> Result<Self, NominalError> {
        if s.is_empty() {
            return Ok(self.clone());
        }
        Ok(match self {
            Agent::Output(m, n, p) => Agent::output(m.subst(s)?, n.subst(s)?, p.subst(s)?),
            Agent::Input(m, x, p) => {
                let m = m.subst(s)?;
                let (x, p) = subst_under(*x, p, s)?;
                Agent::input(m, x, p)
            }
            Agent::Case(bs) => Agent::Case(
                bs.iter()
                    .map(|(c, p)| Ok((c.subst(s)?, p.subst(s)?)))
                    .collect::<Result<_, NominalError>>()?,
            ),
            Agent::Res(x, p) => {
                let (x, p) = subst_under(*x, p, s)?;
                Agent::res(x, p)
            }
            Agent::Par(p, q) => Agent::par(p.subst(s)?, q.subst(s)?),
            Agent::Rep(p) => Agent::rep(p.subst(s)?),
            Agent::Assert(psi) => Agent::Assert(psi.subst(s)?),
        })
    }
}

impl Alpha for Agent {
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        match self {
            Agent::Output(m, n, p) => Agent::output(m.canon_with(env), n.canon_with(env), p.canon_with(env)),
            Agent::Input(m, x, p) => {
                let m = m.canon_with(env);
                let (c, prev) = env.bind(*x);
                let p = p.canon_with(env);
                env.unbind(*x, prev);
                Agent::input(m, c, p)
            }
            Agent::Case(bs) => Agent::Case(bs.iter().map(|(c, p)| (c.canon_with(env), p.canon_with(env))).collect()),
            Agent::Res(x, p) => {
                let (c, prev) = env.bind(*x);
                let p = p.canon_with(env);
                env.unbind(*x, prev);
                Agent::res(c, p)
            }
            Agent::Par(p, q) => Agent::par(p.canon_with(env), q.canon_with(env)),
            Agent::Rep(p) => Agent::rep(p.canon_with(env)),
            Agent::Assert(psi) => Agent::Assert(psi.canon_with(env)),
        }
    }
}

/// `P[x̃ := M̃]`, capture-avoiding.
pub fn agent_substitute(p: &Agent, names: &[Name], terms: &[Term]) -> Result<Agent, NominalError> {
    crate::nominal::substitute(p, names, terms)
}

/// The frame of an agent: the unguarded assertions under the restrictions
/// that scope over them.
pub fn frame_of(inst: &dyn Instance, p: &Agent) -> Frame {
    match p {
        Agent::Assert(psi) => Frame::of_assertion(psi.clone()),
        Agent::Par(p, q) => frame_compose(inst, &frame_of(inst, p), &frame_of(inst, q)),
        Agent::Res(b, p) => {
            let f = frame_of(inst, p);
            if f.binders.contains(b) {
                // shadowed by an inner binder of the same name
                f
            } else {
                f.restrict(*b)
            }
        }
        _ => Frame::unit(),
    }
}

/// Renames the restrictions that contribute binders to the frame of `p`
/// so that they are pairwise distinct and outside `avoid`. The result is
/// alpha-equivalent to `p`, and its frame binders are its own binder names.
pub fn freshen_frame_binders(p: &Agent, avoid: &BTreeSet<Name>) -> Agent {
    fn go(p: &Agent, avoid: &BTreeSet<Name>, used: &mut BTreeSet<Name>, fresh: &mut FreshSession) -> Agent {
        match p {
            Agent::Res(b, body) => {
                let (b2, body2) = if avoid.contains(b) || used.contains(b) {
                    let f = fresh.fresh_like(*b);
                    (f, body.swap(*b, f))
                } else {
                    (*b, (**body).clone())
                };
                used.insert(b2);
                Agent::res(b2, go(&body2, avoid, used, fresh))
            }
            Agent::Par(l, r) => {
                let l2 = go(l, avoid, used, fresh);
                let r2 = go(r, avoid, used, fresh);
                Agent::par(l2, r2)
            }
            _ => p.clone(),
        }
    }
    // a binder that is also free somewhere in `p` would be renamed by
    // frame composition, so it is renamed here instead
    let mut clash = avoid.clone();
    clash.extend(p.support());
    let mut all = clash.clone();
    all.extend(p.names());
    let mut fresh = FreshSession::new(all);
    go(p, &clash, &mut BTreeSet::new(), &mut fresh)
}

/// Names bound at frame positions (restrictions reachable through
/// parallel composition and restriction only).
pub fn frame_binder_names(p: &Agent) -> Vec<Name> {
    match p {
        Agent::Res(b, q) => {
            let mut v = vec![*b];
            v.extend(frame_binder_names(q));
            v
        }
        Agent::Par(l, r) => {
            let mut v = frame_binder_names(l);
            v.extend(frame_binder_names(r));
            v
        }
        _ => Vec::new(),
    }
}

/// An assertion that occurs unguarded under a replication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardViolation {
    pub replication: String,
    pub assertion: String,
}

/// Replication bodies may only contain assertions under an input or
/// output prefix. The unit assertion `0` is exempt.
pub fn check_guarded(p: &Agent) -> Result<(), GuardViolation> {
    fn unguarded(p: &Agent) -> Option<&Assertion> {
        match p {
            Agent::Assert(a) if !a.is_unit() => Some(a),
            Agent::Assert(_) | Agent::Output(..) | Agent::Input(..) => None,
            Agent::Case(bs) => bs.iter().find_map(|(_, q)| unguarded(q)),
            Agent::Res(_, q) | Agent::Rep(q) => unguarded(q),
            Agent::Par(l, r) => unguarded(l).or_else(|| unguarded(r)),
        }
    }
    match p {
        Agent::Rep(body) => {
            if let Some(a) = unguarded(body) {
                return Err(GuardViolation {
                    replication: p.to_string(),
                    assertion: a.to_string(),
                });
            }
            check_guarded(body)
        }
        Agent::Output(_, _, q) | Agent::Input(_, _, q) | Agent::Res(_, q) => check_guarded(q),
        Agent::Case(bs) => bs.iter().try_for_each(|(_, q)| check_guarded(q)),
        Agent::Par(l, r) => {
            check_guarded(l)?;
            check_guarded(r)
        }
        Agent::Assert(_) => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{AssignInstance, PiInstance};

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn t(s: &str) -> Term {
        Term::name(s)
    }

    #[test]
    fn support_removes_binders() {
        let p = Agent::res(n("a"), Agent::output(t("a"), t("b"), Agent::nil()));
        assert_eq!(p.support(), [n("b")].into_iter().collect());
        assert!(p.is_fresh(n("a")));
    }

    #[test]
    fn swap_goes_through_binders() {
        let p = Agent::res(n("a"), Agent::output(t("a"), t("c"), Agent::nil()));
        let q = Agent::res(n("b"), Agent::output(t("b"), t("c"), Agent::nil()));
        assert_eq!(p.swap(n("a"), n("b")), q);
    }

    #[test]
    fn substitution_avoids_capture() {
        // (new a) c!a [a/c] = (new a') a!a'
        let p = Agent::res(n("a"), Agent::output(t("c"), t("a"), Agent::nil()));
        let q = agent_substitute(&p, &[n("c")], &[t("a")]).unwrap();
        let Agent::Res(b, body) = &q else { panic!() };
        assert_ne!(*b, n("a"));
        assert_eq!(**body, Agent::output(t("a"), Term::Name(*b), Agent::nil()));
        assert_eq!(q.support(), [n("a")].into_iter().collect());
    }

    #[test]
    fn substitution_stops_at_binder() {
        let p = Agent::input(t("a"), n("x"), Agent::output(t("x"), t("x"), Agent::nil()));
        assert_eq!(agent_substitute(&p, &[n("x")], &[t("b")]).unwrap(), p);
        let c = Agent::case(vec![(Condition::Eq(t("x"), t("b")), Agent::nil())]);
        let expected = Agent::case(vec![(Condition::Eq(t("b"), t("b")), Agent::nil())]);
        assert_eq!(agent_substitute(&c, &[n("x")], &[t("b")]).unwrap(), expected);
    }

    #[test]
    fn alpha_equivalence_of_inputs() {
        let p = Agent::input(t("a"), n("x"), Agent::output(t("x"), t("x"), Agent::nil()));
        let q = Agent::input(t("a"), n("y"), Agent::output(t("y"), t("y"), Agent::nil()));
        assert!(p.alpha_eq(&q));
        let r = Agent::input(t("a"), n("y"), Agent::output(t("x"), t("x"), Agent::nil()));
        assert!(!p.alpha_eq(&r));
    }

    #[test]
    fn frames() {
        let out = Agent::output(t("m"), t("n"), Agent::nil());
        assert_eq!(frame_of(&PiInstance, &out), Frame::unit());
        let x3 = Assertion::assign(n("x"), Term::Int(3));
        let p = Agent::res(n("b"), Agent::assertion(x3.clone()));
        assert_eq!(frame_of(&AssignInstance, &p), Frame::of_assertion(x3.clone()).restrict(n("b")));
        let q = Agent::par(Agent::assertion(x3.clone()), Agent::input(t("a"), n("y"), Agent::nil()));
        assert_eq!(frame_of(&AssignInstance, &q), Frame::of_assertion(x3));
    }

    #[test]
    fn guardedness() {
        let psi = Assertion::assign(n("x"), Term::Int(1));
        let guarded = Agent::rep(Agent::output(t("a"), t("b"), Agent::assertion(psi.clone())));
        assert!(check_guarded(&guarded).is_ok());
        assert!(check_guarded(&Agent::rep(Agent::assertion(psi.clone()))).is_err());
        assert!(check_guarded(&Agent::rep(Agent::res(n("a"), Agent::assertion(psi)))).is_err());
        assert!(check_guarded(&Agent::rep(Agent::nil())).is_ok());
    }

    #[test]
    fn freshened_frames_are_distinct() {
        let p = Agent::par(
            Agent::res(n("a"), Agent::assertion(Assertion::binding(t("x"), t("a")))),
            Agent::res(n("a"), Agent::assertion(Assertion::binding(t("y"), t("a")))),
        );
        let q = freshen_frame_binders(&p, &[n("x")].into_iter().collect());
        assert!(q.alpha_eq(&p));
        let names = frame_binder_names(&q);
        assert_eq!(names.len(), 2);
        assert_ne!(names[0], names[1]);
    }
}
