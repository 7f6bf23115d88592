//! The shipped instances and the registry that selects them by key.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::data::{Assertion, Term};
use crate::nominal::Name;
use crate::params::{Instance, Pool};

mod assign;
mod crypto;
mod pi;
mod tuple;

pub use assign::AssignInstance;
pub use crypto::{normalize, CryptoInstance};
pub use pi::{NonChannelExtension, PiInstance};
pub use tuple::{head, TupleInstance};

pub const INSTANCE_KEYS: [&str; 5] = ["pi", "tuple", "assign", "crypto", "pi-nonchan"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("unknown instance `{0}` (expected one of: pi, tuple, assign, crypto, pi-nonchan)")]
    UnknownInstance(String),
}

pub fn registry_lookup(key: &str) -> Result<Arc<dyn Instance>, InstanceError> {
    Ok(match key {
        "pi" => Arc::new(PiInstance),
        "tuple" => Arc::new(TupleInstance),
        "assign" => Arc::new(AssignInstance),
        "crypto" => Arc::new(CryptoInstance),
        "pi-nonchan" => Arc::new(NonChannelExtension),
        other => return Err(InstanceError::UnknownInstance(other.to_string())),
    })
}

/// The pool requisite checks draw from: three names, plus two integer
/// literals for the assignment instance.
pub fn requisite_pool(key: &str) -> Pool {
    let names = ["a", "b", "c"].map(Name::new);
    let literals = if key == "assign" { vec![Term::Int(0), Term::Int(1)] } else { Vec::new() };
    Pool::new(names, literals)
}

pub fn evaluate(inst: &dyn Instance, psi: &Assertion, m: &Term) -> Term {
    inst.evaluate(psi, m)
}

/// Every way of picking one binding per assigned variable.
///
/// Conflicting assignments are read existentially: a condition holds if it
/// holds under some choice.
pub(crate) fn choices(psi: &Assertion) -> Vec<BTreeMap<Name, Term>> {
    let mut groups: BTreeMap<Name, Vec<Term>> = BTreeMap::new();
    for (l, r) in psi.bindings() {
        if let Term::Name(x) = l {
            groups.entry(*x).or_default().push(r.clone());
        }
    }
    let mut out = vec![BTreeMap::new()];
    for (x, values) in groups {
        out = out
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.insert(x, v.clone());
                    c
                })
            })
            .collect();
    }
    out
}

/// Replaces assigned variables by their values, leaving a variable in place
/// when it recurs inside its own expansion.
pub(crate) fn expand(t: &Term, choice: &BTreeMap<Name, Term>) -> Term {
    fn go(t: &Term, choice: &BTreeMap<Name, Term>, stack: &mut Vec<Name>) -> Term {
        match t {
            Term::Name(n) => match choice.get(n) {
                Some(v) if !stack.contains(n) => {
                    stack.push(*n);
                    let r = go(v, choice, stack);
                    stack.pop();
                    r
                }
                _ => t.clone(),
            },
            Term::Int(_) => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| go(a, choice, stack)).collect()),
        }
    }
    go(t, choice, &mut Vec::new())
}

pub(crate) fn check_symbols(
    t: &Term,
    symbols: &[(&str, usize)],
    constants: &[&str],
    ints: bool,
) -> Result<(), String> {
    match t {
        Term::Name(_) => Ok(()),
        Term::Int(_) if ints => Ok(()),
        Term::Int(i) => Err(format!("integer literal `{i}` is not a term of this instance")),
        Term::App(f, args) if args.is_empty() && constants.contains(&&**f) => Ok(()),
        Term::App(f, args) => match symbols.iter().find(|(s, _)| **s == **f) {
            Some((_, arity)) if *arity == args.len() => {
                args.iter().try_for_each(|a| check_symbols(a, symbols, constants, ints))
            }
            Some((_, arity)) => Err(format!("`{f}` takes {arity} arguments, got {}", args.len())),
            None => Err(format!("unknown function symbol `{f}`")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{check_requisites, RequisiteSamples};

    #[test]
    fn shipped_instances_meet_the_requisites() {
        for key in INSTANCE_KEYS {
            let inst = registry_lookup(key).unwrap();
            let report = check_requisites(&*inst, &RequisiteSamples::new(requisite_pool(key), 100, 3));
            assert!(report.all_passed(), "{key}: {:?}", report.laws);
        }
    }
}
