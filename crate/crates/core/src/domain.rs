//! Finite domains for enumeration: name pools and depth bounds.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::data::Term;
use crate::nominal::Name;
use crate::params::{Instance, Pool};
use crate::syntax::{Agent, Data};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DomainConfig {
    /// Free names that terms, channel candidates and substitutions range
    /// over.
    pub names: Vec<Name>,
    /// Literal leaves (integers for the assignment instance).
    pub literals: Vec<Term>,
    pub term_depth: usize,
    pub assert_depth: usize,
    /// How many times a replication may be unfolded along one derivation.
    pub rep_bound: usize,
    pub probe_depth: usize,
    /// Names that are never substituted (channel constants).
    pub rigid: BTreeSet<Name>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            names: Vec::new(),
            literals: Vec::new(),
            term_depth: 0,
            assert_depth: 0,
            rep_bound: 1,
            probe_depth: 0,
            rigid: BTreeSet::new(),
        }
    }
}

impl DomainConfig {
    pub fn with_names(names: impl IntoIterator<Item = Name>) -> Self {
        DomainConfig {
            names: names.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn labels(labels: &[&str]) -> Self {
        Self::with_names(labels.iter().map(|l| Name::new(l)))
    }

    pub fn pool(&self) -> Pool {
        Pool::new(self.names.iter().copied(), self.literals.clone())
    }

    /// The pool extended with extra names, e.g. the support of the agents
    /// under test.
    pub fn pool_with(&self, extra: impl IntoIterator<Item = Name>) -> Pool {
        self.pool().with_names(extra)
    }

    /// Adds names to the pool, keeping order and skipping duplicates.
    pub fn extend_names(&mut self, extra: impl IntoIterator<Item = Name>) {
        for n in extra {
            if !self.names.contains(&n) {
                self.names.push(n);
            }
        }
    }

    /// The domain with `a` and `b` exchanged everywhere.
    pub fn swap_names(&self, a: Name, b: Name) -> Self {
        DomainConfig {
            names: self.names.iter().map(|n| n.swap(a, b)).collect(),
            rigid: self.rigid.iter().map(|n| n.swap(a, b)).collect(),
            ..self.clone()
        }
    }

    pub fn terms(&self, inst: &dyn Instance) -> Vec<Term> {
        inst.term_domain(&self.pool(), self.term_depth)
    }
}

/// Integer literals occurring anywhere in the agents, in order of first
/// occurrence.
pub fn int_literals(agents: &[&Agent]) -> Vec<Term> {
    fn walk(t: &Term, out: &mut Vec<Term>) {
        match t {
            Term::Int(_) if !out.contains(t) => out.push(t.clone()),
            Term::App(_, args) => args.iter().for_each(|a| walk(a, out)),
            _ => {}
        }
    }
    let mut out = Vec::new();
    for a in agents {
        a.visit_data(&mut |d| match d {
            Data::Term(t) => walk(t, &mut out),
            Data::Condition(c) => c.terms().into_iter().for_each(|t| walk(t, &mut out)),
            Data::Assertion(psi) => psi.bindings().for_each(|(l, r)| {
                walk(l, &mut out);
                walk(r, &mut out);
            }),
        });
    }
    out
}
