//! Bisimulation checking. Both checkers solve a finite greatest-fixpoint
//! game: a node is removed once it fails static equivalence or some
//! challenge from it has no surviving response. Surviving nodes reachable
//! from the root form the witness; otherwise a trace following the order
//! of removal explains the failure.

mod concrete;
mod crosscheck;
mod symbolic;
pub mod verify;

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::concrete::SemanticsError;
use crate::constraints::{Constraint, Solution, SolutionSpace};
use crate::data::{Assertion, Condition, Term};
use crate::domain::DomainConfig;
use crate::nominal::{Alpha, Name, Nominal, Subst};
use crate::params::{frame_compose, frame_entails, Frame, Instance, Pool};
use crate::syntax::{frame_of, Agent};

pub use self::concrete::concrete_bisim;
pub use self::crosscheck::{crosscheck, Crosscheck};
pub use self::symbolic::symbolic_bisim;

/// Upper bound on explored game nodes.
pub const MAX_NODES: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BisimError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("game exceeded {0} nodes; shrink the domain")]
    TooLarge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// One move of a failing game: a challenge and the best reply, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub side: Side,
    pub action: String,
    /// The solution in force after the move (symbolic checks only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<String>,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Where the game starts: an assertion or a solution.
    pub start: String,
    pub steps: Vec<TraceStep>,
    pub reason: String,
}

impl Counterexample {
    /// Every solution mentioned along the trace.
    pub fn solutions(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.start.as_str()).chain(self.steps.iter().filter_map(|s| s.solution.as_deref()))
    }
}

/// `(Psi, P, Q)`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteTriple {
    pub psi: Assertion,
    pub p: Agent,
    pub q: Agent,
}

/// `(C, P, Q)`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicTriple {
    pub constraint: Constraint,
    pub p: Agent,
    pub q: Agent,
}

#[derive(Clone, Debug)]
pub struct Verdict<W> {
    pub bisimilar: bool,
    /// The relation found when bisimilar. Pairs of agents without any
    /// transition are left out of symbolic witnesses.
    pub witness: Vec<W>,
    pub counterexample: Option<Counterexample>,
    /// Game nodes explored.
    pub nodes: usize,
    /// Some derivation hit the replication bound.
    pub truncated: bool,
}

pub type ConcreteVerdict = Verdict<ConcreteTriple>;
pub type SymbolicVerdict = Verdict<SymbolicTriple>;

impl<W> Verdict<W> {
    fn json_with(&self, kind: &str, triple: impl Fn(&W) -> Value) -> Value {
        let mut v = json!({
            "check": kind,
            "verdict": if self.bisimilar { "bisimilar" } else { "not-bisimilar" },
            "nodes": self.nodes,
            "truncated": self.truncated,
        });
        if self.bisimilar {
            v["witness"] = Value::Array(self.witness.iter().map(triple).collect());
        }
        if let Some(c) = &self.counterexample {
            v["counterexample"] = serde_json::to_value(c).expect("plain data");
        }
        v
    }
}

impl ConcreteVerdict {
    pub fn to_json(&self) -> Value {
        self.json_with("concrete", |t| {
            json!({"env": t.psi.to_string(), "left": t.p.to_string(), "right": t.q.to_string()})
        })
    }
}

impl SymbolicVerdict {
    pub fn to_json(&self) -> Value {
        self.json_with("symbolic", |t| {
            json!({"constraint": t.constraint.to_json(), "left": t.p.to_string(), "right": t.q.to_string()})
        })
    }
}

/// The pool at a game position: the domain names plus the free names of
/// the position.
pub(crate) fn position_pool(dom: &DomainConfig, items: &[&dyn Nominal]) -> Pool {
    let mut extra = BTreeSet::new();
    for i in items {
        i.collect_support(&mut extra);
    }
    dom.pool_with(extra)
}

/// The domain with its names extended by the free names of a position.
pub fn position_domain(dom: &DomainConfig, items: &[&dyn Nominal]) -> DomainConfig {
    let mut d = dom.clone();
    let mut extra = BTreeSet::new();
    for i in items {
        i.collect_support(&mut extra);
    }
    d.extend_names(extra);
    d
}

/// `Psi (x) F(P)`
fn env_frame(inst: &dyn Instance, psi: &Assertion, p: &Agent) -> Frame {
    frame_compose(inst, &Frame::of_assertion(psi.clone()), &frame_of(inst, p))
}

/// Static equivalence of `P` and `Q` in `Psi`, decided on the probe
/// conditions over the position pool. Returns a distinguishing condition.
pub fn static_distinction(
    inst: &dyn Instance,
    psi: &Assertion,
    p: &Agent,
    q: &Agent,
    dom: &DomainConfig,
) -> Option<Condition> {
    let f = env_frame(inst, psi, p);
    let g = env_frame(inst, psi, q);
    if f.alpha_eq(&g) {
        return None;
    }
    let pool = position_pool(dom, &[psi, p, q]);
    inst.probe_conditions(&pool, dom.probe_depth)
        .into_iter()
        .find(|phi| frame_entails(inst, &f, phi) != frame_entails(inst, &g, phi))
}

pub fn static_equivalent(inst: &dyn Instance, psi: &Assertion, p: &Agent, q: &Agent, dom: &DomainConfig) -> bool {
    static_distinction(inst, psi, p, q, dom).is_none()
}

/// The closing solutions of a pair: every non-rigid free name is left
/// alone or sent to a domain value, with every assertion of the domain.
pub fn closing_space(inst: &dyn Instance, p: &Agent, q: &Agent, dom: &DomainConfig) -> SolutionSpace {
    let mut free = p.support();
    free.extend(q.support());
    let pool = dom.pool_with(free.iter().copied());
    SolutionSpace {
        targets: free.into_iter().filter(|n| !dom.rigid.contains(n)).collect(),
        values: inst.term_domain(&pool, dom.term_depth),
        assertions: inst.assertion_domain(&dom.pool(), dom.assert_depth),
    }
}

/// Static equivalence for every solution of `C`: `Psi (x) F(P) sigma` and
/// `Psi (x) F(Q) sigma` entail the same probes.
pub fn symbolic_static_equivalent(
    inst: &dyn Instance,
    c: &Constraint,
    p: &Agent,
    q: &Agent,
    dom: &DomainConfig,
) -> Result<bool, BisimError> {
    let mut space = closing_space(inst, p, q, dom);
    let mut targets: BTreeSet<Name> = space.targets.iter().copied().collect();
    targets.extend(c.variables().into_iter().filter(|n| !dom.rigid.contains(n)));
    space.targets = targets.into_iter().collect();
    for s in crate::constraints::solutions_in(inst, c, &space) {
        let (ps, qs) = instantiate_pair(&s, p, q)?;
        if !static_equivalent(inst, &s.assertion, &ps, &qs, dom) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn instantiate_pair(s: &Solution, p: &Agent, q: &Agent) -> Result<(Agent, Agent), BisimError> {
    let ps = p.subst(&s.subst).map_err(SemanticsError::from)?;
    let qs = q.subst(&s.subst).map_err(SemanticsError::from)?;
    Ok((ps, qs))
}

/// Labels of values compare as instance values.
pub(crate) fn same_value(inst: &dyn Instance, m: &Term, n: &Term) -> bool {
    let unit = inst.unit();
    inst.evaluate(&unit, m) == inst.evaluate(&unit, n)
}

/// Game positions identify agents up to alpha and `P | 0 = P`; without the
/// latter, replication unfolds into ever longer chains of spent
/// components.
pub(crate) fn settle_agent(p: &Agent) -> Agent {
    p.prune_nil()
}

/// Key of an agent pair up to structural congruence. Positions with equal
/// keys are merged, which makes the games decide bisimulation up to
/// structural congruence.
pub(crate) fn pair_key(p: &Agent, q: &Agent) -> (Agent, Agent) {
    (p.structural_key(), q.structural_key())
}

/// Removal order of a greatest-fixpoint game. `good[i]` starts as the
/// local check of node `i`; a node falls once one of its challenges has
/// no good option. Returns, per node, the round it was removed in.
pub(crate) fn solve_game(good_init: &[bool], challenges: &[Vec<Vec<usize>>]) -> Vec<Option<usize>> {
    let mut removed: Vec<Option<usize>> = good_init.iter().map(|g| if *g { None } else { Some(0) }).collect();
    let mut round = 0;
    loop {
        round += 1;
        let mut fallen = Vec::new();
        for (i, cs) in challenges.iter().enumerate() {
            if removed[i].is_some() {
                continue;
            }
            if cs.iter().any(|opts| opts.iter().all(|o| removed[*o].is_some())) {
                fallen.push(i);
            }
        }
        if fallen.is_empty() {
            return removed;
        }
        for i in fallen {
            removed[i] = Some(round);
        }
    }
}

/// The challenge that made a node fall and the reply that held out the
/// longest.
pub(crate) fn blame(
    removed: &[Option<usize>],
    node: usize,
    challenges: &[Vec<usize>],
) -> Option<(usize, Option<usize>)> {
    let at = removed[node]?;
    challenges.iter().enumerate().find_map(|(ci, opts)| {
        let before = |o: &usize| removed[*o].is_some_and(|r| r < at);
        if opts.iter().all(before) {
            let best = opts.iter().copied().max_by_key(|o| (removed[*o], std::cmp::Reverse(*o)));
            Some((ci, best))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::registry_lookup;
    use crate::syntax::parse_agent;

    #[test]
    fn static_equivalence_sees_assertions() {
        let inst = registry_lookup("assign").unwrap();
        let mut dom = DomainConfig::labels(&["u"]);
        dom.literals = vec![Term::Int(2), Term::Int(3)];
        let p = parse_agent(&*inst, "(|u:=2|)").unwrap();
        let q = parse_agent(&*inst, "(|u:=3|)").unwrap();
        let unit = inst.unit();
        assert!(static_distinction(&*inst, &unit, &p, &q, &dom).is_some());
        assert!(static_equivalent(&*inst, &unit, &p, &p, &dom));
        let r = parse_agent(&*inst, "(new u)(|u:=2|)").unwrap();
        assert!(static_equivalent(&*inst, &unit, &r, &Agent::nil(), &dom));
    }

    #[test]
    fn game_removal_order() {
        // 0 -> {1}, 1 -> {2}, 2 bad
        let removed = solve_game(&[true, true, false], &[vec![vec![1]], vec![vec![2]], vec![]]);
        assert_eq!(removed, vec![Some(2), Some(1), Some(0)]);
        let removed = solve_game(&[true, true], &[vec![vec![1]], vec![vec![0]]]);
        assert_eq!(removed, vec![None, None]);
    }
}
