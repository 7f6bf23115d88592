//! The concrete game over positions `(Psi, P, Q)`.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{
    blame, pair_key, position_domain, settle_agent, same_value, solve_game, static_distinction, BisimError, ConcreteTriple,
    ConcreteVerdict, Counterexample, Side, TraceStep, MAX_NODES,
};
use crate::concrete::{late_transitions, ConcreteAction, ConcreteTransition};
use crate::data::{Assertion, Condition, Term};
use crate::domain::DomainConfig;
use crate::nominal::{Name, Nominal, Subst, Substitution};
use crate::params::Instance;
use crate::syntax::Agent;

struct Challenge {
    side: Side,
    action: String,
    options: Vec<usize>,
}

struct Node {
    psi: Assertion,
    p: Agent,
    q: Agent,
    distinction: Option<Condition>,
    challenges: Vec<Challenge>,
}

struct Game<'a> {
    inst: &'a dyn Instance,
    dom: &'a DomainConfig,
    assertions: Vec<Assertion>,
    assertion_set: BTreeSet<Assertion>,
    index: HashMap<(Assertion, (Agent, Agent)), usize>,
    nodes: Vec<Node>,
    queue: VecDeque<usize>,
    truncated: bool,
}

/// One challenge with the targets of the challenger and of every reply.
type Move = (String, Agent, Vec<Agent>);

impl Game<'_> {
    fn node(&mut self, psi: Assertion, p: Agent, q: Agent) -> Result<usize, BisimError> {
        let (p, q) = (settle_agent(&p), settle_agent(&q));
        let key = (psi.clone(), pair_key(&p, &q));
        if let Some(i) = self.index.get(&key) {
            return Ok(*i);
        }
        if self.nodes.len() >= MAX_NODES {
            return Err(BisimError::TooLarge(MAX_NODES));
        }
        let i = self.nodes.len();
        self.nodes.push(Node {
            psi,
            p,
            q,
            distinction: None,
            challenges: Vec::new(),
        });
        self.index.insert(key, i);
        self.queue.push_back(i);
        Ok(i)
    }

    /// The moves answering `t` among `theirs`.
    fn moves(
        &self,
        t: &ConcreteTransition,
        theirs: &[ConcreteTransition],
        values: &[Term],
        avoid: &BTreeSet<Name>,
    ) -> Result<Vec<Move>, BisimError> {
        let mut out = Vec::new();
        match &t.action {
            ConcreteAction::LateIn { subject, binder } => {
                for l in values {
                    let mine = t.target.subst(&Substitution::single(*binder, l.clone())).map_err(to_err)?;
                    let mut replies = Vec::new();
                    for u in theirs {
                        if let ConcreteAction::LateIn { subject: k, binder: x } = &u.action {
                            if k == subject {
                                replies.push(u.target.subst(&Substitution::single(*x, l.clone())).map_err(to_err)?);
                            }
                        }
                    }
                    out.push((format!("{subject} {l}"), mine, replies));
                }
            }
            ConcreteAction::Out { .. } => {
                let mut all = avoid.clone();
                theirs.iter().for_each(|u| u.collect_support(&mut all));
                let t = t.freshen_bn(&all);
                let ConcreteAction::Out { subject, extruded, object } = &t.action else {
                    unreachable!("freshening keeps the action kind")
                };
                let mut replies = Vec::new();
                for u in theirs {
                    if let Some(target) = align_output(self.inst, subject, extruded, object, u) {
                        replies.push(target);
                    }
                }
                out.push((t.action.to_string(), t.target.clone(), replies));
            }
            ConcreteAction::Tau => {
                let replies = theirs
                    .iter()
                    .filter(|u| u.action == ConcreteAction::Tau)
                    .map(|u| u.target.clone())
                    .collect();
                out.push(("tau".to_string(), t.target.clone(), replies));
            }
            ConcreteAction::EarlyIn { .. } => unreachable!("late semantics only"),
        }
        Ok(out)
    }

    fn expand(&mut self, i: usize) -> Result<(), BisimError> {
        let (psi, p, q) = {
            let n = &self.nodes[i];
            (n.psi.clone(), n.p.clone(), n.q.clone())
        };
        if let Some(phi) = static_distinction(self.inst, &psi, &p, &q, self.dom) {
            self.nodes[i].distinction = Some(phi);
            return Ok(());
        }
        if p.structural_key() == q.structural_key() {
            // the identity is a bisimulation
            return Ok(());
        }
        let dom = position_domain(self.dom, &[&psi, &p, &q]);
        let tp = late_transitions(self.inst, &psi, &p, &dom)?;
        let tq = late_transitions(self.inst, &psi, &q, &dom)?;
        self.truncated |= tp.truncated || tq.truncated;
        let values = self.inst.term_domain(&dom.pool(), dom.term_depth);
        let mut avoid = psi.support();
        p.collect_support(&mut avoid);
        q.collect_support(&mut avoid);

        let mut challenges = Vec::new();
        for a in self.assertions.clone() {
            let c = self.inst.compose(&psi, &a);
            if c != psi && self.assertion_set.contains(&c) {
                let n = self.node(c, p.clone(), q.clone())?;
                challenges.push(Challenge {
                    side: Side::Left,
                    action: format!("extend by {a}"),
                    options: vec![n],
                });
            }
        }
        for (side, mine, theirs) in [(Side::Left, &tp, &tq), (Side::Right, &tq, &tp)] {
            for t in &mine.transitions {
                for (action, target, replies) in self.moves(t, &theirs.transitions, &values, &avoid)? {
                    let mut options = Vec::new();
                    for r in replies {
                        let (l, r) = match side {
                            Side::Left => (target.clone(), r),
                            Side::Right => (r, target.clone()),
                        };
                        options.push(self.node(psi.clone(), l, r)?);
                    }
                    challenges.push(Challenge { side, action, options });
                }
            }
        }
        self.nodes[i].challenges = challenges;
        Ok(())
    }
}

fn to_err(e: crate::nominal::NominalError) -> BisimError {
    BisimError::Semantics(e.into())
}

/// The target of `u` if it is an output on `subject` that, after renaming
/// its extruded names to `extruded`, carries the same object.
pub(crate) fn align_output(
    inst: &dyn Instance,
    subject: &Term,
    extruded: &[Name],
    object: &Term,
    u: &ConcreteTransition,
) -> Option<Agent> {
    let ConcreteAction::Out { subject: k, extruded: b, .. } = &u.action else {
        return None;
    };
    if k != subject || b.len() != extruded.len() {
        return None;
    }
    let mut u = u.clone();
    for (i, to) in extruded.iter().enumerate() {
        let from = u.action.bn()[i];
        u = u.rename_bn(from, *to);
    }
    let ConcreteAction::Out { object: n, .. } = &u.action else {
        return None;
    };
    same_value(inst, n, object).then_some(u.target)
}

/// Decides `Psi |> P ~ Q` over the domain. Inputs are answered for every
/// received value separately, and assertions are extended only within the
/// domain's assertion list.
pub fn concrete_bisim(
    inst: &dyn Instance,
    psi: &Assertion,
    p: &Agent,
    q: &Agent,
    dom: &DomainConfig,
) -> Result<ConcreteVerdict, BisimError> {
    let assertions = inst.assertion_domain(&dom.pool(), dom.assert_depth);
    let mut game = Game {
        inst,
        dom,
        assertion_set: assertions.iter().cloned().collect(),
        assertions,
        index: HashMap::new(),
        nodes: Vec::new(),
        queue: VecDeque::new(),
        truncated: false,
    };
    let root = game.node(psi.clone(), p.clone(), q.clone())?;
    while let Some(i) = game.queue.pop_front() {
        game.expand(i)?;
    }
    let local: Vec<bool> = game.nodes.iter().map(|n| n.distinction.is_none()).collect();
    let options: Vec<Vec<Vec<usize>>> = game
        .nodes
        .iter()
        .map(|n| n.challenges.iter().map(|c| c.options.clone()).collect())
        .collect();
    let removed = solve_game(&local, &options);
    let bisimilar = removed[root].is_none();

    let mut witness = Vec::new();
    let mut counterexample = None;
    if bisimilar {
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let n = &game.nodes[i];
            witness.push(ConcreteTriple {
                psi: n.psi.clone(),
                p: n.p.clone(),
                q: n.q.clone(),
            });
            for c in &n.challenges {
                let next = c.options.iter().find(|o| removed[**o].is_none()).expect("good node");
                if seen.insert(*next) {
                    queue.push_back(*next);
                }
            }
        }
    } else {
        counterexample = Some(trace(&game, &removed, &options, root));
    }
    Ok(ConcreteVerdict {
        bisimilar,
        witness,
        counterexample,
        nodes: game.nodes.len(),
        truncated: game.truncated,
    })
}

fn trace(game: &Game<'_>, removed: &[Option<usize>], options: &[Vec<Vec<usize>>], root: usize) -> Counterexample {
    let mut steps = Vec::new();
    let mut i = root;
    let reason = loop {
        let n = &game.nodes[i];
        if let Some(phi) = &n.distinction {
            break format!("{phi} holds on one side only in {}", n.psi);
        }
        let Some((ci, best)) = blame(removed, i, &options[i]) else {
            break "no failing challenge".to_string();
        };
        let c = &n.challenges[ci];
        let at = best.map_or(n, |b| &game.nodes[b]);
        steps.push(TraceStep {
            side: c.side,
            action: c.action.clone(),
            solution: None,
            left: at.p.to_string(),
            right: at.q.to_string(),
        });
        match best {
            Some(b) => i = b,
            None => break format!("no reply to {} {}", side_name(c.side), c.action),
        }
    };
    Counterexample {
        start: game.nodes[root].psi.to_string(),
        steps,
        reason,
    }
}

pub(crate) fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::registry_lookup;
    use crate::syntax::parse_agent;

    fn check(key: &str, names: &[&str], p: &str, q: &str) -> ConcreteVerdict {
        let inst = registry_lookup(key).unwrap();
        let dom = DomainConfig::labels(names);
        let p = parse_agent(&*inst, p).unwrap();
        let q = parse_agent(&*inst, q).unwrap();
        concrete_bisim(&*inst, &inst.unit(), &p, &q, &dom).unwrap()
    }

    #[test]
    fn simple_verdicts() {
        assert!(check("pi", &["a", "b"], "a!b | 0", "a!b").bisimilar);
        assert!(check("pi", &["a", "b"], "a!b.b!a", "a!b.b!a").bisimilar);
        assert!(!check("pi", &["a", "b"], "a!b", "a!a").bisimilar);
        assert!(!check("pi", &["a", "b"], "a!b.0", "a!b.b!b").bisimilar);
        assert!(check("pi", &["a", "b"], "(new c)a!c", "(new z)a!z").bisimilar);
        assert!(!check("pi", &["a", "b"], "(new c)a!c", "a!b").bisimilar);
    }

    #[test]
    fn inputs_are_answered_per_value() {
        let v = check("pi", &["a", "b", "c"], "a(x).a!b", "a(x).case x = b : a!b [] x <> b : a!b");
        assert!(v.bisimilar);
        let v = check("pi", &["a", "b", "c"], "a(x).a!b", "a(x).case x = b : a!b");
        assert!(!v.bisimilar);
        let c = v.counterexample.unwrap();
        assert_eq!(c.steps[0].action, "a a");
    }

    #[test]
    fn communication_needs_a_matching_tau() {
        assert!(!check("pi", &["a", "b"], "a!b | a(x).0", "a!b | b(x).0").bisimilar);
        assert!(!check("pi", &["a", "b"], "(new a)(a!b | a(x).0)", "0").bisimilar);
        assert!(check("pi", &["a", "b"], "(new a)(a!b | a(x).0)", "(new c)(c!a | c(z).0)").bisimilar);
    }
}
