//! Reachable transition graphs in the late, early or symbolic semantics.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::bisim::position_domain;
use crate::concrete::{early_transitions, late_transitions, SemanticsError};
use crate::constraints::Constraint;
use crate::data::Assertion;
use crate::domain::DomainConfig;
use crate::nominal::{Alpha, FreshSession, Nominal};
use crate::params::Instance;
use crate::symbolic::symbolic_transitions;
use crate::syntax::Agent;

/// Default cap on explored states.
pub const MAX_STATES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LtsMode {
    Late,
    Early,
    Symbolic,
}

impl FromStr for LtsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "late" => Ok(LtsMode::Late),
            "early" => Ok(LtsMode::Early),
            "symbolic" => Ok(LtsMode::Symbolic),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LtsState {
    pub agent: Agent,
    /// Some derivation from this state hit the replication bound.
    pub truncated: bool,
}

#[derive(Clone, Debug)]
pub struct LtsEdge {
    pub source: usize,
    pub target: usize,
    /// `in`, `early-in`, `out` or `tau`.
    pub kind: &'static str,
    pub action: String,
    /// Only in symbolic graphs.
    pub constraint: Option<Constraint>,
}

#[derive(Clone, Debug)]
pub struct Lts {
    pub mode: LtsMode,
    pub states: Vec<LtsState>,
    pub edges: Vec<LtsEdge>,
    /// False when exploration stopped at the state cap.
    pub complete: bool,
}

impl Lts {
    pub fn edges_of_kind(&self, kind: &str) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    pub fn to_json(&self) -> Value {
        let states: Vec<Value> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| json!({"id": i, "agent": s.agent.to_string(), "truncated": s.truncated}))
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                let mut v = json!({"source": e.source, "target": e.target, "kind": e.kind, "action": e.action});
                if let Some(c) = &e.constraint {
                    v["constraint"] = c.to_json();
                }
                v
            })
            .collect();
        json!({"mode": self.mode, "complete": self.complete, "states": states, "edges": edges})
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lts {\n");
        for (i, s) in self.states.iter().enumerate() {
            let shape = if s.truncated { ", style=dashed" } else { "" };
            let _ = writeln!(out, "  s{i} [label={:?}{shape}];", s.agent.to_string());
        }
        for e in &self.edges {
            let label = match &e.constraint {
                Some(c) => format!("{}, {}", e.action, c),
                None => e.action.clone(),
            };
            let _ = writeln!(out, "  s{} -> s{} [label={:?}];", e.source, e.target, label);
        }
        out.push_str("}\n");
        out
    }
}

struct Builder {
    states: Vec<LtsState>,
    index: HashMap<Agent, usize>,
    queue: VecDeque<usize>,
    cap: usize,
    complete: bool,
}

impl Builder {
    fn state(&mut self, a: Agent) -> Option<usize> {
        let a = a.prune_nil();
        let key = a.canonical();
        if let Some(i) = self.index.get(&key) {
            return Some(*i);
        }
        if self.states.len() >= self.cap {
            self.complete = false;
            return None;
        }
        let i = self.states.len();
        self.states.push(LtsState {
            agent: a,
            truncated: false,
        });
        self.index.insert(key, i);
        self.queue.push_back(i);
        Some(i)
    }
}

/// Explores every state reachable from `P` in environment `Psi`, up to
/// `cap` states. Concrete subjects and early inputs range over the domain
/// extended by the free names of each state, so the concrete graphs are
/// finite under-approximations.
pub fn build_lts(
    inst: &dyn Instance,
    psi: &Assertion,
    p: &Agent,
    dom: &DomainConfig,
    mode: LtsMode,
    cap: usize,
) -> Result<Lts, SemanticsError> {
    let mut b = Builder {
        states: Vec::new(),
        index: HashMap::new(),
        queue: VecDeque::new(),
        cap: cap.max(1),
        complete: true,
    };
    let mut edges = Vec::new();
    b.state(p.clone());
    while let Some(i) = b.queue.pop_front() {
        let agent = b.states[i].agent.clone();
        let mut found = Vec::new();
        let truncated = match mode {
            LtsMode::Late | LtsMode::Early => {
                let d = position_domain(dom, &[psi, &agent]);
                let set = if mode == LtsMode::Late {
                    late_transitions(inst, psi, &agent, &d)?
                } else {
                    early_transitions(inst, psi, &agent, &d)?
                };
                for t in set.transitions {
                    found.push((t.action.kind(), t.action.to_string(), None, t.target));
                }
                set.truncated
            }
            LtsMode::Symbolic => {
                let mut session = FreshSession::new(psi.support());
                let set = symbolic_transitions(inst, psi, &agent, &mut session, dom.rep_bound)?;
                for t in set.transitions {
                    found.push((t.action.kind(), t.action.to_string(), Some(t.constraint), t.target));
                }
                set.truncated
            }
        };
        b.states[i].truncated = truncated;
        for (kind, action, constraint, target) in found {
            if let Some(j) = b.state(target) {
                edges.push(LtsEdge {
                    source: i,
                    target: j,
                    kind,
                    action,
                    constraint,
                });
            }
        }
    }
    Ok(Lts {
        mode,
        states: b.states,
        edges,
        complete: b.complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::registry_lookup;
    use crate::syntax::parse_agent;

    fn lts(key: &str, names: &[&str], depth: usize, src: &str, mode: LtsMode) -> Lts {
        let inst = registry_lookup(key).unwrap();
        let mut dom = DomainConfig::labels(names);
        dom.term_depth = depth;
        let p = parse_agent(&*inst, src).unwrap();
        build_lts(&*inst, &inst.unit(), &p, &dom, mode, MAX_STATES).unwrap()
    }

    #[test]
    fn nil_has_one_state_and_no_edges() {
        let g = lts("pi", &["a"], 0, "0", LtsMode::Late);
        assert_eq!(g.states.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn tuple_output_collapses_symbolically() {
        let late = lts("tuple", &["m", "n", "k"], 2, "m!n.0", LtsMode::Late);
        let sym = lts("tuple", &["m", "n", "k"], 2, "m!n.0", LtsMode::Symbolic);
        assert!(late.edges_of_kind("out") >= 4, "{}", late.edges_of_kind("out"));
        assert_eq!(sym.edges.len(), 1);
    }

    #[test]
    fn early_inputs_branch_per_value() {
        let late = lts("pi", &["a", "b"], 0, "a(x).0", LtsMode::Late);
        let early = lts("pi", &["a", "b"], 0, "a(x).0", LtsMode::Early);
        assert_eq!(late.edges_of_kind("in"), 1);
        assert_eq!(early.edges_of_kind("early-in"), 2);
    }

    #[test]
    fn state_cap_marks_incomplete() {
        let inst = registry_lookup("pi").unwrap();
        let dom = DomainConfig::labels(&["a"]);
        let p = parse_agent(&*inst, "a!a.a!a.a!a.0").unwrap();
        let g = build_lts(&*inst, &inst.unit(), &p, &dom, LtsMode::Late, 2).unwrap();
        assert!(!g.complete);
        assert_eq!(g.states.len(), 2);
    }
}
