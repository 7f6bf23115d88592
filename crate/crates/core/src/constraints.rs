//! Transition constraints, their solutions, and finite-domain solving.
//!
//! A solution is a pair of a substitution and an assertion. Solving is
//! brute-force enumeration over a [`SolutionSpace`]: every target name is
//! either left alone or sent to a value, and the assertion ranges over a
//! finite list.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use serde_json::{json, Value};

use crate::data::{Assertion, Condition, Term};
use crate::domain::DomainConfig;
use crate::nominal::{Alpha, CanonEnv, FreshSession, Name, Nominal, Subst, Substitution};
use crate::params::Instance;

/// A pair `(sigma, Psi)`. Identity bindings are dropped, so `x -> x` and
/// leaving `x` alone are the same solution.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Solution {
    pub subst: Substitution,
    pub assertion: Assertion,
}

impl Solution {
    pub fn new(subst: Substitution, assertion: Assertion) -> Self {
        let map = subst
            .iter()
            .filter(|(n, t)| **t != Term::Name(**n))
            .map(|(n, t)| (*n, t.clone()))
            .collect();
        Solution {
            subst: Substitution::from_map(map),
            assertion,
        }
    }

    pub fn identity() -> Self {
        Solution::default()
    }

    /// The image of a name.
    pub fn apply_name(&self, n: Name) -> Term {
        self.subst.get(n).cloned().unwrap_or(Term::Name(n))
    }

    /// Keeps only the bindings for names in `scope`.
    pub fn project(&self, scope: &BTreeSet<Name>) -> Solution {
        Solution {
            subst: self.subst.restrict(|n| scope.contains(&n)),
            assertion: self.assertion.clone(),
        }
    }

    /// `sigma . [t/y]` for `y` not in the domain of `sigma`.
    pub fn extend(&self, y: Name, t: Term) -> Solution {
        let mut s = self.subst.clone();
        s.insert(y, t);
        Solution::new(s, self.assertion.clone())
    }
}

impl Nominal for Solution {
    fn swap(&self, a: Name, b: Name) -> Self {
        Solution {
            subst: self.subst.swap(a, b),
            assertion: self.assertion.swap(a, b),
        }
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        self.subst.collect_support(out);
        self.assertion.collect_support(out);
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        if self.subst.is_empty() {
            f.write_str("Id")?;
        }
        for (i, (n, t)) in self.subst.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}/{n}")?;
        }
        write!(f, ", {})", self.assertion)
    }
}

/// `(nu binders){env |- cond}`
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub binders: Vec<Name>,
    pub env: Assertion,
    pub cond: Condition,
}

impl Atom {
    pub fn new(env: Assertion, cond: Condition) -> Self {
        Atom {
            binders: Vec::new(),
            env,
            cond,
        }
    }

    /// Renames the binders away from `avoid`.
    fn freshen(&self, avoid: &BTreeSet<Name>) -> Atom {
        let mut all = avoid.clone();
        all.extend(self.names());
        let mut session = FreshSession::new(all);
        let mut out = self.clone();
        for i in 0..out.binders.len() {
            let b = out.binders[i];
            if avoid.contains(&b) {
                let f = session.fresh_like(b);
                out.env = out.env.swap(b, f);
                out.cond = out.cond.swap(b, f);
                for later in out.binders.iter_mut().skip(i + 1) {
                    *later = later.swap(b, f);
                }
                out.binders[i] = f;
            }
        }
        out
    }
}

impl Nominal for Atom {
    fn swap(&self, a: Name, b: Name) -> Self {
        Atom {
            binders: self.binders.swap(a, b),
            env: self.env.swap(a, b),
            cond: self.cond.swap(a, b),
        }
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        let mut body = self.env.support();
        self.cond.collect_support(&mut body);
        for b in &self.binders {
            body.remove(b);
        }
        out.extend(body);
    }
    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        out.extend(self.binders.iter().copied());
        self.env.collect_support(out);
        self.cond.collect_support(out);
    }
}

impl Alpha for Atom {
    /// Vacuous binders are dropped and the rest are numbered in the order
    /// giving the least body.
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        let mut body_support = self.env.support();
        self.cond.collect_support(&mut body_support);
        let mut live: Vec<Name> = Vec::new();
        for b in &self.binders {
            if body_support.contains(b) && !live.contains(b) {
                live.push(*b);
            }
        }
        let mut saved = Vec::new();
        let mut canon = Vec::new();
        for b in &live {
            let (c, prev) = env.bind(*b);
            saved.push((*b, prev));
            canon.push(c);
        }
        let body = |order: &[Name], env: &CanonEnv| {
            let map: HashMap<Name, Name> = order.iter().copied().zip(canon.iter().copied()).collect();
            let mut rn = |t: &Term| t.map_names(&mut |n| Term::Name(map.get(&n).copied().unwrap_or_else(|| env.rename(n))));
            (self.env.map_terms(&mut rn), self.cond.map_terms(&mut rn))
        };
        let (e, c) = if live.len() <= 5 {
            live.iter()
                .copied()
                .permutations(live.len())
                .map(|order| body(&order, env))
                .min()
                .expect("at least one permutation")
        } else {
            body(&live, env)
        };
        for (b, prev) in saved.into_iter().rev() {
            env.unbind(b, prev);
        }
        Atom {
            binders: canon,
            env: e,
            cond: c,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.binders.is_empty() {
            write!(f, "(new {})", self.binders.iter().join(","))?;
        }
        write!(f, "{{{} |- {}}}", self.env, self.cond)
    }
}

/// An explicit finite set of solutions; only bindings for `scope` matter.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Extensional {
    pub scope: BTreeSet<Name>,
    pub sols: BTreeSet<Solution>,
}

impl Extensional {
    pub fn new(scope: BTreeSet<Name>, sols: impl IntoIterator<Item = Solution>) -> Self {
        let sols = sols.into_iter().map(|s| s.project(&scope)).collect();
        Extensional { scope, sols }
    }

    pub fn contains(&self, s: &Solution) -> bool {
        self.sols.contains(&s.project(&self.scope))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Conjunct {
    Atom(Atom),
    /// `M = N` as instance values.
    Eq(Term, Term),
    /// `a # X`, with `X` given by its support; the substitution acts on `X`
    /// but not on `a`, wherever `a` occurs.
    Fresh(Name, BTreeSet<Name>),
    Ext(Arc<Extensional>),
}

impl Conjunct {
    /// Names a substitution acts on.
    fn collect_variables(&self, out: &mut BTreeSet<Name>) {
        match self {
            Conjunct::Atom(a) => a.collect_support(out),
            Conjunct::Eq(m, n) => {
                m.collect_support(out);
                n.collect_support(out);
            }
            Conjunct::Fresh(a, x) => out.extend(x.iter().copied().filter(|n| n != a)),
            Conjunct::Ext(e) => out.extend(e.scope.iter().copied()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Conjunct::Atom(a) => json!({
                "nu": a.binders.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
                "env": a.env.to_string(),
                "cond": a.cond.to_string(),
            }),
            Conjunct::Eq(m, n) => json!({"eq": [m.to_string(), n.to_string()]}),
            Conjunct::Fresh(a, x) => json!({
                "fresh": [a.to_string(), x.iter().map(|n| n.to_string()).collect::<Vec<_>>()]
            }),
            Conjunct::Ext(e) => json!({"sols": e.sols.iter().map(|s| s.to_string()).collect::<Vec<_>>()}),
        }
    }
}

impl Nominal for Conjunct {
    fn swap(&self, a: Name, b: Name) -> Self {
        match self {
            Conjunct::Atom(at) => Conjunct::Atom(at.swap(a, b)),
            Conjunct::Eq(m, n) => Conjunct::Eq(m.swap(a, b), n.swap(a, b)),
            Conjunct::Fresh(c, x) => Conjunct::Fresh(c.swap(a, b), x.swap(a, b)),
            Conjunct::Ext(e) => Conjunct::Ext(Arc::new(Extensional {
                scope: e.scope.swap(a, b),
                sols: e.sols.iter().map(|s| s.swap(a, b)).collect(),
            })),
        }
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        match self {
            Conjunct::Atom(a) => a.collect_support(out),
            Conjunct::Eq(m, n) => {
                m.collect_support(out);
                n.collect_support(out);
            }
            Conjunct::Fresh(a, x) => {
                out.insert(*a);
                out.extend(x.iter().copied());
            }
            Conjunct::Ext(e) => {
                out.extend(e.scope.iter().copied());
                e.sols.iter().for_each(|s| s.collect_support(out));
            }
        }
    }
    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Conjunct::Atom(a) => a.collect_names(out),
            other => other.collect_support(out),
        }
    }
}

impl Alpha for Conjunct {
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        match self {
            Conjunct::Atom(a) => Conjunct::Atom(a.canon_with(env)),
            Conjunct::Eq(m, n) => Conjunct::Eq(m.canon_with(env), n.canon_with(env)),
            Conjunct::Fresh(a, x) => Conjunct::Fresh(env.rename(*a), x.iter().map(|n| env.rename(*n)).collect()),
            Conjunct::Ext(e) => Conjunct::Ext(e.clone()),
        }
    }
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conjunct::Atom(a) => write!(f, "{a}"),
            Conjunct::Eq(m, n) => write!(f, "[{m} == {n}]"),
            Conjunct::Fresh(a, x) => write!(f, "{a} # {{{}}}", x.iter().join(",")),
            Conjunct::Ext(e) => write!(f, "sols{{{}}}", e.sols.iter().join("; ")),
        }
    }
}

/// A conjunction; the empty conjunction is `true`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Constraint {
    pub conjuncts: Vec<Conjunct>,
}

impl Constraint {
    pub fn tt() -> Self {
        Constraint::default()
    }

    pub fn is_true(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn atom(env: Assertion, cond: Condition) -> Self {
        Constraint::from(Conjunct::Atom(Atom::new(env, cond)))
    }

    pub fn eq(m: Term, n: Term) -> Self {
        Constraint::from(Conjunct::Eq(m, n))
    }

    pub fn fresh(a: Name, x: BTreeSet<Name>) -> Self {
        Constraint::from(Conjunct::Fresh(a, x))
    }

    pub fn extensional(ext: Extensional) -> Self {
        Constraint::from(Conjunct::Ext(Arc::new(ext)))
    }

    pub fn and(mut self, other: &Constraint) -> Self {
        self.conjuncts.extend(other.conjuncts.iter().cloned());
        self
    }

    pub fn push(&mut self, c: Conjunct) {
        self.conjuncts.push(c);
    }

    /// Names the solving substitution acts on.
    pub fn variables(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.conjuncts.iter().for_each(|c| c.collect_variables(&mut out));
        out
    }

    pub fn to_json(&self) -> Value {
        match self.conjuncts.as_slice() {
            [one] => one.to_json(),
            all => json!({"and": all.iter().map(Conjunct::to_json).collect::<Vec<_>>()}),
        }
    }
}

impl From<Conjunct> for Constraint {
    fn from(c: Conjunct) -> Self {
        Constraint { conjuncts: vec![c] }
    }
}

impl Nominal for Constraint {
    fn swap(&self, a: Name, b: Name) -> Self {
        Constraint {
            conjuncts: self.conjuncts.iter().map(|c| c.swap(a, b)).collect(),
        }
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        self.conjuncts.iter().for_each(|c| c.collect_support(out));
    }
    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        self.conjuncts.iter().for_each(|c| c.collect_names(out));
    }
}

impl Alpha for Constraint {
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        Constraint {
            conjuncts: self.conjuncts.iter().map(|c| c.canon_with(env)).collect(),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conjuncts.is_empty() {
            return f.write_str("true");
        }
        write!(f, "{}", self.conjuncts.iter().join(" /\\ "))
    }
}

/// `(nu a)C`: the binder is pushed onto every atom that mentions `a`.
/// Equality, freshness and extensional conjuncts are left as they are.
pub fn restrict(a: Name, c: &Constraint) -> Constraint {
    Constraint {
        conjuncts: c
            .conjuncts
            .iter()
            .map(|cj| match cj {
                Conjunct::Atom(at) if at.support().contains(&a) => {
                    let mut at = at.clone();
                    at.binders.insert(0, a);
                    Conjunct::Atom(at)
                }
                other => other.clone(),
            })
            .collect(),
    }
}

pub fn restrict_all(names: &[Name], c: &Constraint) -> Constraint {
    names.iter().rev().fold(c.clone(), |c, a| restrict(*a, &c))
}

fn check_conjunct(inst: &dyn Instance, s: &Solution, c: &Conjunct) -> bool {
    match c {
        Conjunct::Atom(at) => {
            let mut avoid = s.subst.mentioned();
            s.assertion.collect_support(&mut avoid);
            let at = at.freshen(&avoid);
            let (Ok(env), Ok(cond)) = (at.env.subst(&s.subst), at.cond.subst(&s.subst)) else {
                return false;
            };
            inst.entails(&inst.compose(&env, &s.assertion), &cond)
        }
        Conjunct::Eq(m, n) => match (m.subst(&s.subst), n.subst(&s.subst)) {
            (Ok(m), Ok(n)) => {
                let unit = inst.unit();
                inst.evaluate(&unit, &m) == inst.evaluate(&unit, &n)
            }
            _ => false,
        },
        Conjunct::Fresh(a, x) => x.iter().all(|n| n != a && s.apply_name(*n).is_fresh(*a)),
        Conjunct::Ext(e) => e.contains(s),
    }
}

/// `(sigma, Psi) |= C`
pub fn check_solution(inst: &dyn Instance, s: &Solution, c: &Constraint) -> bool {
    c.conjuncts.iter().all(|cj| check_conjunct(inst, s, cj))
}

/// The finite space of candidate solutions.
#[derive(Clone, Debug, Default)]
pub struct SolutionSpace {
    pub targets: Vec<Name>,
    pub values: Vec<Term>,
    pub assertions: Vec<Assertion>,
}

impl SolutionSpace {
    /// Targets are the variables of the constraints minus the rigid names.
    pub fn for_constraints<'a>(
        inst: &dyn Instance,
        cs: impl IntoIterator<Item = &'a Constraint>,
        dom: &DomainConfig,
    ) -> Self {
        let mut vars = BTreeSet::new();
        for c in cs {
            vars.extend(c.variables());
        }
        let pool = dom.pool();
        SolutionSpace {
            targets: vars.into_iter().filter(|n| !dom.rigid.contains(n)).collect(),
            values: inst.term_domain(&pool, dom.term_depth),
            assertions: inst.assertion_domain(&pool, dom.assert_depth),
        }
    }

    /// Every candidate; each target is left alone or sent to a value.
    pub fn enumerate(&self) -> Vec<Solution> {
        let mut substs = vec![Substitution::identity()];
        for n in &self.targets {
            substs = substs
                .into_iter()
                .flat_map(|s| {
                    let mut next = vec![s.clone()];
                    for v in &self.values {
                        let mut s = s.clone();
                        s.insert(*n, v.clone());
                        next.push(s);
                    }
                    next
                })
                .collect();
        }
        let out: BTreeSet<Solution> = substs
            .iter()
            .flat_map(|s| self.assertions.iter().map(move |a| Solution::new(s.clone(), a.clone())))
            .collect();
        out.into_iter().collect()
    }
}

pub fn solutions_in(inst: &dyn Instance, c: &Constraint, space: &SolutionSpace) -> BTreeSet<Solution> {
    space
        .enumerate()
        .into_iter()
        .filter(|s| check_solution(inst, s, c))
        .collect()
}

/// All solutions of `C` relative to `dom`.
pub fn solutions(inst: &dyn Instance, c: &Constraint, dom: &DomainConfig) -> BTreeSet<Solution> {
    solutions_in(inst, c, &SolutionSpace::for_constraints(inst, [c], dom))
}

/// `C => D` relative to `dom`.
pub fn implies(inst: &dyn Instance, c: &Constraint, d: &Constraint, dom: &DomainConfig) -> bool {
    let space = SolutionSpace::for_constraints(inst, [c, d], dom);
    solutions_in(inst, c, &space)
        .iter()
        .all(|s| check_solution(inst, s, d))
}

/// Every solution of `C` solves some member of `ds`.
pub fn implies_disjunction(inst: &dyn Instance, c: &Constraint, ds: &[Constraint], dom: &DomainConfig) -> bool {
    let space = SolutionSpace::for_constraints(inst, std::iter::once(c).chain(ds), dom);
    solutions_in(inst, c, &space)
        .iter()
        .all(|s| ds.iter().any(|d| check_solution(inst, s, d)))
}
