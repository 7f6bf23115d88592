//! Shared fixtures and property checks for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use psi_core::bisim::verify::{base_names, induced_relation, verify_concrete, verify_symbolic};
use psi_core::gen::{random_agent, GenConfig};
use psi_core::{
    late_transitions, parse, Agent, Alpha, ConcreteVerdict, DomainConfig, Instance, Name, Nominal, ParsedUnit, Subst,
    Substitution, SymbolicVerdict, Term,
};

pub fn example_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples_psi").join(name)
}

pub fn load_example(name: &str) -> ParsedUnit {
    let text = std::fs::read_to_string(example_file(name)).expect("example file");
    parse(&text).expect("example parses")
}

/// The command line defaults: depth 1 everywhere, names from the file.
pub fn example_domain(unit: &ParsedUnit, rigid: &[&str]) -> DomainConfig {
    DomainConfig {
        names: unit.names.clone().unwrap_or_default(),
        term_depth: 1,
        assert_depth: 1,
        probe_depth: 1,
        rep_bound: 1,
        rigid: rigid.iter().map(|n| Name::new(n)).collect(),
        ..Default::default()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Replays a symbolic witness against the definition, and the concrete
/// relation it induces against the concrete one.
pub fn replay_symbolic(inst: &dyn Instance, dom: &DomainConfig, v: &SymbolicVerdict, p: &Agent, q: &Agent) -> Result<(), String> {
    verify_symbolic(inst, dom, &v.witness, p, q)?;
    let induced = induced_relation(inst, dom, &v.witness)?;
    verify_concrete(inst, dom, &induced, &base_names(dom, p, q)).map_err(|e| format!("induced: {e}"))
}

pub fn replay_concrete(inst: &dyn Instance, dom: &DomainConfig, v: &ConcreteVerdict, p: &Agent, q: &Agent) -> Result<(), String> {
    let root = v.witness.first().ok_or("empty witness")?;
    if root.p.structural_key() != p.structural_key() || root.q.structural_key() != q.structural_key() {
        return Err("witness does not start at the root".into());
    }
    verify_concrete(inst, dom, &v.witness, &base_names(dom, p, q))
}

// Strategies. Agents come from the seeded generator so that they respect
// the binder discipline of the shipped syntax.

pub const LABELS: [&str; 5] = ["a", "b", "c", "x", "z"];

pub fn name() -> impl Strategy<Value = Name> {
    prop::sample::select(LABELS.to_vec()).prop_map(Name::new)
}

/// Crypto-shaped terms over the label pool.
pub fn term() -> impl Strategy<Value = Term> {
    let leaf = name().prop_map(Term::Name);
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(m, k)| Term::app("enc", vec![m, k])),
            (inner.clone(), inner.clone()).prop_map(|(m, k)| Term::app("dec", vec![m, k])),
            (inner.clone(), inner).prop_map(|(m, n)| Term::app("pair", vec![m, n])),
        ]
    })
}

pub fn pi_agent() -> impl Strategy<Value = Agent> {
    any::<u64>().prop_map(|seed| random_agent(&GenConfig::pi(3, &["a", "b"]), &mut rng(seed)))
}

pub fn assign_agent() -> impl Strategy<Value = Agent> {
    any::<u64>().prop_map(|seed| random_agent(&GenConfig::assign(3, &["a"], &["u", "v"], &[2, 3]), &mut rng(seed)))
}

// Kernel laws.

pub fn swap_involution(p: &Agent, m: &Term, a: Name, b: Name) -> Result<(), String> {
    if p.swap(a, b).swap(a, b) != *p || m.swap(a, b).swap(a, b) != *m {
        return Err(format!("({a} {b}) is not an involution on {p}"));
    }
    if p.swap(a, b) != p.swap(b, a) {
        return Err(format!("({a} {b}) and ({b} {a}) differ on {p}"));
    }
    let expect: BTreeSet<Name> = p.support().into_iter().map(|n| n.swap(a, b)).collect();
    if p.swap(a, b).support() != expect {
        return Err(format!("support of {p} is not equivariant under ({a} {b})"));
    }
    Ok(())
}

/// Substitution, alpha-equivalence and the late transitions commute with
/// swapping.
pub fn equivariance(inst: &dyn Instance, p: &Agent, m: &Term, x: Name, a: Name, b: Name) -> Result<(), String> {
    let s = Substitution::single(x, m.clone());
    let swapped_s = Substitution::single(x.swap(a, b), m.swap(a, b));
    let lhs = p.subst(&s).map_err(|e| e.to_string())?.swap(a, b);
    let rhs = p.swap(a, b).subst(&swapped_s).map_err(|e| e.to_string())?;
    if !lhs.alpha_eq(&rhs) {
        return Err(format!("substitution not equivariant: {lhs} vs {rhs}"));
    }
    if p.canonical().swap(a, b).canonical() != p.swap(a, b).canonical() {
        return Err(format!("canonical form of {p} not equivariant"));
    }
    let dom = DomainConfig::labels(&["a", "b", "c"]);
    let unit = inst.unit();
    let mine: BTreeSet<_> = late_transitions(inst, &unit, p, &dom)
        .map_err(|e| e.to_string())?
        .transitions
        .iter()
        .map(|t| t.swap(a, b).canonical())
        .collect();
    let theirs: BTreeSet<_> = late_transitions(inst, &unit, &p.swap(a, b), &dom.swap_names(a, b))
        .map_err(|e| e.to_string())?
        .transitions
        .iter()
        .map(|t| t.canonical())
        .collect();
    if mine != theirs {
        return Err(format!("transitions of {p} not equivariant under ({a} {b})"));
    }
    Ok(())
}

pub fn subst_identity(p: &Agent, m: &Term, x: Name) -> Result<(), String> {
    let id = p.subst(&Substitution::single(x, Term::Name(x))).map_err(|e| e.to_string())?;
    if !id.alpha_eq(p) {
        return Err(format!("[{x}:={x}] changed {p} to {id}"));
    }
    let empty = p.subst(&Substitution::identity()).map_err(|e| e.to_string())?;
    if !empty.alpha_eq(p) {
        return Err(format!("the empty substitution changed {p}"));
    }
    if p.is_fresh(x) {
        let vacuous = p.subst(&Substitution::single(x, m.clone())).map_err(|e| e.to_string())?;
        if !vacuous.alpha_eq(p) {
            return Err(format!("substituting the absent {x} changed {p}"));
        }
    }
    let mx = m.subst(&Substitution::single(x, Term::Name(x))).map_err(|e| e.to_string())?;
    if mx != *m {
        return Err(format!("[{x}:={x}] changed {m}"));
    }
    Ok(())
}

pub fn alpha_laws(p: &Agent, a: Name, b: Name) -> Result<(), String> {
    let c = p.canonical();
    if c.canonical() != c {
        return Err(format!("canonical form of {p} is not idempotent"));
    }
    if !c.alpha_eq(p) || c.support() != p.support() {
        return Err(format!("{p} differs from its canonical form"));
    }
    // (new a)P = (new b)((a b) P) when b is fresh for P
    if a != b && p.is_fresh(b) {
        let left = Agent::res(a, p.clone());
        let right = Agent::res(b, p.swap(a, b));
        if !left.alpha_eq(&right) {
            return Err(format!("{left} and {right} should be alpha-equivalent"));
        }
    }
    // binders never make a free name bound
    if Agent::res(a, p.clone()).support() != p.support().into_iter().filter(|n| *n != a).collect() {
        return Err(format!("restricting {a} in {p} changed the support wrongly"));
    }
    Ok(())
}
