//! Fixtures shared by the benchmarks in `benches/`.

use std::sync::Arc;

use psi_core::{parse_agent, registry_lookup, Agent, DomainConfig, Instance};

/// An instance, a pool and a pair of agents to exercise.
pub struct Fixture {
    pub name: &'static str,
    pub inst: Arc<dyn Instance>,
    pub dom: DomainConfig,
    pub p: Agent,
    pub q: Agent,
}

/// name, instance, pool, term depth, left, right
type Pair = (&'static str, &'static str, &'static [&'static str], usize, &'static str, &'static str);

const PAIRS: &[Pair] = &[
    (
        "pi-case-split",
        "pi",
        &["a", "b", "c"],
        1,
        "a(x).a!b.a!b",
        "a(x).case x = b : a!b.a!b [] x <> b : a!b.a!b",
    ),
    ("pi-handshake", "pi", &["a", "b"], 1, "(new c)(a!c.c!b | a(y).y(z).0)", "(new c)(a(y).y(z).0 | a!c.c!b)"),
    ("tuple-output", "tuple", &["m", "n", "k"], 2, "m!n.0", "m!n.0"),
];

pub fn fixtures() -> Vec<Fixture> {
    PAIRS
        .iter()
        .map(|(name, key, names, depth, p, q)| {
            let inst = registry_lookup(key).expect("shipped instance");
            let mut dom = DomainConfig::labels(names);
            dom.term_depth = *depth;
            let p = parse_agent(&*inst, p).expect("fixture parses");
            let q = parse_agent(&*inst, q).expect("fixture parses");
            Fixture { name, inst, dom, p, q }
        })
        .collect()
}
