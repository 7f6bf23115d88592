//! Seeded random agents for the randomized cross-checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::{Assertion, Condition, Term};
use crate::nominal::Name;
use crate::syntax::Agent;

/// Shape of generated agents.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub depth: usize,
    /// Free channel names.
    pub names: Vec<Name>,
    /// Input binders, restricted names are drawn from the same list.
    pub binders: Vec<Name>,
    /// Assignable variables; empty for the pi-calculus.
    pub vars: Vec<Name>,
    pub ints: Vec<i64>,
    pub replication: bool,
}

impl GenConfig {
    /// Pi-calculus agents over the given free names.
    pub fn pi(depth: usize, names: &[&str]) -> Self {
        GenConfig {
            depth,
            names: names.iter().map(|n| Name::new(n)).collect(),
            binders: ["x", "z", "c"].iter().map(|n| Name::new(n)).collect(),
            vars: Vec::new(),
            ints: Vec::new(),
            replication: false,
        }
    }

    /// Agents with assignments and integer tests.
    pub fn assign(depth: usize, names: &[&str], vars: &[&str], ints: &[i64]) -> Self {
        GenConfig {
            depth,
            names: names.iter().map(|n| Name::new(n)).collect(),
            binders: ["x", "z"].iter().map(|n| Name::new(n)).collect(),
            vars: vars.iter().map(|n| Name::new(n)).collect(),
            ints: ints.to_vec(),
            replication: false,
        }
    }
}

struct Gen<'a, R> {
    cfg: &'a GenConfig,
    rng: &'a mut R,
}

impl<R: Rng> Gen<'_, R> {
    fn pick<T: Clone>(&mut self, v: &[T]) -> T {
        v.choose(self.rng).expect("non-empty choice").clone()
    }

    /// A channel in scope.
    fn channel(&mut self, scope: &[Name]) -> Term {
        let mut all = self.cfg.names.clone();
        all.extend(scope.iter().copied());
        Term::Name(self.pick(&all))
    }

    /// A data term in scope.
    fn datum(&mut self, scope: &[Name]) -> Term {
        if !self.cfg.ints.is_empty() && self.rng.gen_bool(0.4) {
            return Term::Int(self.pick(&self.cfg.ints.clone()));
        }
        if !self.cfg.vars.is_empty() && self.rng.gen_bool(0.3) {
            return Term::Name(self.pick(&self.cfg.vars.clone()));
        }
        self.channel(scope)
    }

    fn condition(&mut self, scope: &[Name]) -> Condition {
        let a = self.datum(scope);
        let b = self.datum(scope);
        match self.rng.gen_range(0..3) {
            0 if !self.cfg.ints.is_empty() => Condition::Pred("prime".into(), vec![a]),
            1 => Condition::Neq(a, b),
            _ => Condition::Eq(a, b),
        }
    }

    fn leaf(&mut self) -> Agent {
        if !self.cfg.vars.is_empty() && self.rng.gen_bool(0.5) {
            let x = self.pick(&self.cfg.vars.clone());
            let v = self.pick(&self.cfg.ints.clone());
            Agent::assertion(Assertion::assign(x, Term::Int(v)))
        } else {
            Agent::nil()
        }
    }

    fn agent(&mut self, depth: usize, scope: &mut Vec<Name>) -> Agent {
        if depth == 0 {
            return self.leaf();
        }
        let choices = if self.cfg.replication { 9 } else { 8 };
        match self.rng.gen_range(0..choices) {
            0 => self.leaf(),
            1 | 2 => {
                let m = self.channel(scope);
                let n = self.datum(scope);
                Agent::output(m, n, self.agent(depth - 1, scope))
            }
            3 => {
                let m = self.channel(scope);
                let x = self.pick(&self.cfg.binders.clone());
                scope.push(x);
                let body = self.agent(depth - 1, scope);
                scope.pop();
                Agent::input(m, x, body)
            }
            4 => {
                let n = self.rng.gen_range(1..=2);
                let branches = (0..n)
                    .map(|_| {
                        let c = self.condition(scope);
                        (c, self.agent(depth - 1, scope))
                    })
                    .collect();
                Agent::case(branches)
            }
            5 => {
                let a = self.pick(&self.cfg.binders.clone());
                scope.push(a);
                let body = self.agent(depth - 1, scope);
                scope.pop();
                Agent::res(a, body)
            }
            6 => {
                let l = self.agent(depth - 1, scope);
                let r = self.agent(depth - 1, scope);
                Agent::par(l, r)
            }
            7 => {
                // an output and an input on one channel, side by side
                let m = self.channel(scope);
                let n = self.datum(scope);
                let sender = Agent::output(m.clone(), n, self.agent(depth - 1, scope));
                let x = self.pick(&self.cfg.binders.clone());
                scope.push(x);
                let body = self.agent(depth - 1, scope);
                scope.pop();
                Agent::par(sender, Agent::input(m, x, body))
            }
            _ => {
                // a guarded replication body
                let m = self.channel(scope);
                let n = self.datum(scope);
                Agent::rep(Agent::output(m, n, Agent::nil()))
            }
        }
    }
}

/// A random agent. Free names are drawn from the configured names and
/// variables only.
pub fn random_agent<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Agent {
    Gen { cfg, rng }.agent(cfg.depth, &mut Vec::new())
}

/// A pair that is bisimilar by construction about half of the time: either
/// two independent agents or an agent and a structural variant of it.
pub fn random_pair<R: Rng>(cfg: &GenConfig, rng: &mut R) -> (Agent, Agent) {
    let p = random_agent(cfg, rng);
    let q = if rng.gen_bool(0.5) {
        random_agent(cfg, rng)
    } else {
        variant(&p, rng)
    };
    (p, q)
}

/// A structurally congruent variant: parallel components swapped, `| 0`
/// added, case branches reordered, or a branch duplicated.
fn variant<R: Rng>(p: &Agent, rng: &mut R) -> Agent {
    match p {
        Agent::Par(l, r) if rng.gen_bool(0.5) => Agent::par((**r).clone(), (**l).clone()),
        Agent::Case(bs) if bs.len() > 1 => {
            let mut bs = bs.clone();
            bs.reverse();
            Agent::case(bs)
        }
        Agent::Case(bs) if bs.len() == 1 => {
            let mut bs = bs.clone();
            bs.push(bs[0].clone());
            Agent::case(bs)
        }
        Agent::Output(m, n, q) => Agent::output(m.clone(), n.clone(), variant(q, rng)),
        Agent::Input(m, x, q) => Agent::input(m.clone(), *x, variant(q, rng)),
        _ => Agent::par(p.clone(), Agent::nil()),
    }
}
