//! The symbolic game. A position is a pair of symbolic agents with one
//! solution of the constraint accumulated so far; the subject variables
//! are dropped after each move and the input variables kept. Positions are
//! identified up to structural congruence. Surviving positions are grouped into constraint triples by the path and reply
//! that produced them.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use super::concrete::side_name;
use super::{
    blame, closing_space, instantiate_pair, pair_key, position_pool, settle_agent, solve_game, static_distinction, BisimError,
    Counterexample, Side, SymbolicTriple, SymbolicVerdict, TraceStep, MAX_NODES,
};
use crate::constraints::{check_solution, Conjunct, Constraint, Extensional, Solution};
use crate::data::{Condition, Term};
use crate::domain::DomainConfig;
use crate::nominal::{FreshSession, Name, Nominal};
use crate::params::Instance;
use crate::symbolic::{symbolic_transitions, SymbolicAction, SymbolicTransition};
use crate::syntax::Agent;

/// Symbolic transitions of both agents from the unit environment, with
/// bound names fresh for the agents, the solution and the domain names.
/// Each bound name is renamed to the first free variant of its label, so
/// the choice does not depend on which agent was explored first.
pub(crate) fn settled_transitions(
    inst: &dyn Instance,
    dom: &DomainConfig,
    p: &Agent,
    q: &Agent,
    s: &Solution,
) -> Result<(Vec<SymbolicTransition>, Vec<SymbolicTransition>, bool), BisimError> {
    let mut base = p.support();
    base.extend(q.support());
    base.extend(s.subst.mentioned());
    s.assertion.collect_support(&mut base);
    base.extend(dom.names.iter().copied());
    let mut session = FreshSession::new(base.clone());
    let unit = inst.unit();
    let sp = symbolic_transitions(inst, &unit, p, &mut session, dom.rep_bound)?;
    let sq = symbolic_transitions(inst, &unit, q, &mut session, dom.rep_bound)?;
    let settle = |ts: Vec<SymbolicTransition>| -> Vec<SymbolicTransition> { ts.iter().map(|t| settle(t, &base)).collect() };
    Ok((settle(sp.transitions), settle(sq.transitions), sp.truncated || sq.truncated))
}

/// Renames the bound names of `t` to the first variants of their labels
/// outside `base` and the free names of `t`.
fn settle(t: &SymbolicTransition, base: &BTreeSet<Name>) -> SymbolicTransition {
    let bn = t.action.bn();
    let mut free = t.action.support();
    t.constraint.collect_support(&mut free);
    t.target.collect_support(&mut free);
    let mut avoid = base.clone();
    avoid.extend(free.into_iter().filter(|n| !bn.contains(n)));
    avoid.extend(t.action.subject());
    let mut t = t.clone();
    for (i, b) in bn.iter().enumerate() {
        let label = b.label();
        let root = label.split('\'').next().unwrap_or(&label);
        let taken = |n: &Name| avoid.contains(n) || bn.iter().enumerate().any(|(j, c)| j != i && c == n);
        let mut k = 0;
        let to = loop {
            let cand = if k == 0 { Name::new(root) } else { Name::new(&format!("{root}'{k}")) };
            if !taken(&cand) {
                break cand;
            }
            k += 1;
        };
        t = t.rename_bn(*b, to);
        avoid.insert(to);
    }
    t
}

/// The extensions `sigma . [K/y] . [L/x]` of `s` that solve the
/// constraint of `t`, with `K` and `L` drawn from `values`.
pub(crate) fn challenge_solutions(
    inst: &dyn Instance,
    t: &SymbolicTransition,
    s: &Solution,
    values: &[Term],
) -> Vec<Solution> {
    let Some(y) = t.action.subject() else {
        return if check_solution(inst, s, &t.constraint) {
            vec![s.clone()]
        } else {
            Vec::new()
        };
    };
    let mut out = Vec::new();
    for k in values {
        let s1 = s.extend(y, k.clone());
        if !check_solution(inst, &s1, &t.constraint) {
            continue;
        }
        match &t.action {
            SymbolicAction::In { binder, .. } => out.extend(values.iter().map(|l| s1.extend(*binder, l.clone()))),
            _ => out.push(s1),
        }
    }
    out
}

/// `u` with its subject and bound names renamed to those of `t`, when the
/// two actions have the same shape.
pub(crate) fn align(t: &SymbolicTransition, u: &SymbolicTransition) -> Option<SymbolicTransition> {
    let mut u = match (&t.action, &u.action) {
        (SymbolicAction::Tau, SymbolicAction::Tau) => return Some(u.clone()),
        (SymbolicAction::In { subject: y, binder: x }, SymbolicAction::In { subject: y2, binder: x2 }) => {
            u.rename_bn(*y2, *y).rename_bn(x2.swap(*y2, *y), *x)
        }
        (SymbolicAction::Out { subject: y, extruded: a, .. }, SymbolicAction::Out { subject: y2, extruded: b, .. })
            if a.len() == b.len() =>
        {
            u.rename_bn(*y2, *y)
        }
        _ => return None,
    };
    for (i, to) in t.action.bn().iter().enumerate() {
        let from = u.action.bn()[i];
        u = u.rename_bn(from, *to);
    }
    Some(u)
}

/// Whether the aligned reply `u` answers `t` under `s`.
pub(crate) fn answers(
    inst: &dyn Instance,
    t: &SymbolicTransition,
    u: &SymbolicTransition,
    s: &Solution,
    p: &Agent,
    q: &Agent,
) -> bool {
    if !check_solution(inst, s, &u.constraint) {
        return false;
    }
    match (&t.action, &u.action) {
        (SymbolicAction::Out { extruded, object: n, .. }, SymbolicAction::Out { object: n2, .. }) => {
            let mut side = p.support();
            side.extend(q.support());
            let mut c = Constraint::eq(n.clone(), n2.clone());
            for a in extruded {
                c.push(Conjunct::Fresh(*a, side.clone()));
            }
            check_solution(inst, s, &c)
        }
        _ => true,
    }
}

/// Drops the subject variable of a move.
pub(crate) fn without_subject(s: &Solution, t: &SymbolicTransition) -> Solution {
    match t.action.subject() {
        Some(y) => Solution::new(s.subst.without(y), s.assertion.clone()),
        None => s.clone(),
    }
}

struct Challenge {
    side: Side,
    transition: usize,
    action: String,
    solution: Solution,
    /// `(reply index, successor)`
    options: Vec<(usize, usize)>,
}

struct Node {
    p: Agent,
    q: Agent,
    s: Solution,
    distinction: Option<Condition>,
    terminal: bool,
    challenges: Vec<Challenge>,
}

struct Game<'a> {
    inst: &'a dyn Instance,
    dom: &'a DomainConfig,
    index: HashMap<((Agent, Agent), Solution), usize>,
    nodes: Vec<Node>,
    queue: VecDeque<usize>,
    truncated: bool,
}

impl Game<'_> {
    fn node(&mut self, p: Agent, q: Agent, s: Solution) -> Result<usize, BisimError> {
        let (p, q) = (settle_agent(&p), settle_agent(&q));
        let key = (pair_key(&p, &q), s.clone());
        if let Some(i) = self.index.get(&key) {
            return Ok(*i);
        }
        if self.nodes.len() >= MAX_NODES {
            return Err(BisimError::TooLarge(MAX_NODES));
        }
        let i = self.nodes.len();
        self.nodes.push(Node {
            p,
            q,
            s,
            distinction: None,
            terminal: false,
            challenges: Vec::new(),
        });
        self.index.insert(key, i);
        self.queue.push_back(i);
        Ok(i)
    }

    fn expand(&mut self, i: usize) -> Result<(), BisimError> {
        let (p, q, s) = {
            let n = &self.nodes[i];
            (n.p.clone(), n.q.clone(), n.s.clone())
        };
        if p.structural_key() == q.structural_key() {
            // the identity is a bisimulation
            return Ok(());
        }
        let (ps, qs) = instantiate_pair(&s, &p, &q)?;
        if let Some(phi) = static_distinction(self.inst, &s.assertion, &ps, &qs, self.dom) {
            self.nodes[i].distinction = Some(phi);
            return Ok(());
        }
        let (tp, tq, truncated) = settled_transitions(self.inst, self.dom, &p, &q, &s)?;
        self.truncated |= truncated;
        self.nodes[i].terminal = tp.is_empty() && tq.is_empty();
        let pool = position_pool(self.dom, &[&s.assertion, &ps, &qs]);
        let values = self.inst.term_domain(&pool, self.dom.term_depth);

        let mut challenges = Vec::new();
        for (side, mine, theirs) in [(Side::Left, &tp, &tq), (Side::Right, &tq, &tp)] {
            let (me, them) = match side {
                Side::Left => (&p, &q),
                Side::Right => (&q, &p),
            };
            for (ti, t) in mine.iter().enumerate() {
                for s1 in challenge_solutions(self.inst, t, &s, &values) {
                    let next = without_subject(&s1, t);
                    let mut options = Vec::new();
                    for (ui, u) in theirs.iter().enumerate() {
                        let Some(u) = align(t, u) else { continue };
                        if !answers(self.inst, t, &u, &s1, me, them) {
                            continue;
                        }
                        let (l, r) = match side {
                            Side::Left => (t.target.clone(), u.target),
                            Side::Right => (u.target, t.target.clone()),
                        };
                        options.push((ui, self.node(l, r, next.clone())?));
                    }
                    challenges.push(Challenge {
                        side,
                        transition: ti,
                        action: t.action.to_string(),
                        solution: next,
                        options,
                    });
                }
            }
        }
        self.nodes[i].challenges = challenges;
        Ok(())
    }
}

/// Decides symbolic bisimilarity of `P` and `Q` from the constraint true,
/// over every closing solution of the domain.
pub fn symbolic_bisim(
    inst: &dyn Instance,
    p: &Agent,
    q: &Agent,
    dom: &DomainConfig,
) -> Result<SymbolicVerdict, BisimError> {
    let mut game = Game {
        inst,
        dom,
        index: HashMap::new(),
        nodes: Vec::new(),
        queue: VecDeque::new(),
        truncated: false,
    };
    let closing = closing_space(inst, p, q, dom);
    let mut roots = Vec::new();
    for s in closing.enumerate() {
        roots.push(game.node(p.clone(), q.clone(), s)?);
    }
    while let Some(i) = game.queue.pop_front() {
        game.expand(i)?;
    }
    let local: Vec<bool> = game.nodes.iter().map(|n| n.distinction.is_none()).collect();
    let options: Vec<Vec<Vec<usize>>> = game
        .nodes
        .iter()
        .map(|n| {
            n.challenges
                .iter()
                .map(|c| c.options.iter().map(|o| o.1).collect())
                .collect()
        })
        .collect();
    let removed = solve_game(&local, &options);
    let failing = roots.iter().copied().find(|r| removed[*r].is_some());

    let (witness, counterexample) = match failing {
        None => (witness(&game, &removed, &roots, &closing.targets), None),
        Some(r) => (Vec::new(), Some(trace(&game, &removed, &options, r))),
    };
    Ok(SymbolicVerdict {
        bisimilar: failing.is_none(),
        witness,
        counterexample,
        nodes: game.nodes.len(),
        truncated: game.truncated,
    })
}

/// Groups the surviving positions into triples. Positions reached from
/// one triple by the same challenge and the same first surviving reply
/// form one triple; the root triple carries the constraint true.
type GroupKey = (Side, usize, usize, (Agent, Agent));

fn witness(game: &Game<'_>, removed: &[Option<usize>], roots: &[usize], targets: &[Name]) -> Vec<SymbolicTriple> {
    let root: BTreeSet<usize> = roots.iter().copied().collect();
    let mut groups = vec![root.clone()];
    let mut seen = BTreeSet::from([root]);
    let mut k = 0;
    while k < groups.len() {
        // (challenger, transition, reply, successor pair) -> successors
        let mut next: BTreeMap<GroupKey, BTreeSet<usize>> = BTreeMap::new();
        for n in &groups[k] {
            for c in &game.nodes[*n].challenges {
                let (ui, succ) = *c
                    .options
                    .iter()
                    .find(|o| removed[o.1].is_none())
                    .expect("surviving position answers every challenge");
                let m = &game.nodes[succ];
                next.entry((c.side, c.transition, ui, pair_key(&m.p, &m.q)))
                    .or_default()
                    .insert(succ);
            }
        }
        for g in next.into_values() {
            if seen.insert(g.clone()) {
                groups.push(g);
            }
        }
        k += 1;
    }

    let mut out = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let first = &game.nodes[*g.first().expect("non-empty group")];
        if gi > 0 && g.iter().all(|n| game.nodes[*n].terminal) {
            continue;
        }
        let constraint = if gi == 0 {
            Constraint::tt()
        } else {
            let mut scope: BTreeSet<Name> = targets.iter().copied().collect();
            for n in g {
                scope.extend(game.nodes[*n].s.subst.domain());
            }
            let sols = g.iter().map(|n| game.nodes[*n].s.clone());
            Constraint::from(Conjunct::Ext(Arc::new(Extensional::new(scope, sols))))
        };
        out.push(SymbolicTriple {
            constraint,
            p: first.p.clone(),
            q: first.q.clone(),
        });
    }
    out
}

fn trace(game: &Game<'_>, removed: &[Option<usize>], options: &[Vec<Vec<usize>>], root: usize) -> Counterexample {
    let mut steps = Vec::new();
    let mut i = root;
    let reason = loop {
        let n = &game.nodes[i];
        if let Some(phi) = &n.distinction {
            break format!("{phi} holds on one side only under {}", n.s);
        }
        let Some((ci, best)) = blame(removed, i, &options[i]) else {
            break "no failing challenge".to_string();
        };
        let c = &n.challenges[ci];
        let at = best.map_or(n, |b| &game.nodes[b]);
        steps.push(TraceStep {
            side: c.side,
            action: c.action.clone(),
            solution: Some(c.solution.to_string()),
            left: at.p.to_string(),
            right: at.q.to_string(),
        });
        match best {
            Some(b) => i = b,
            None => break format!("no reply to {} {} under {}", side_name(c.side), c.action, c.solution),
        }
    };
    Counterexample {
        start: game.nodes[root].s.to_string(),
        steps,
        reason,
    }
}
