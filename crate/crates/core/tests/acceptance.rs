//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if
//! any criterion fails. Runs without the libtest harness so the report is
//! printed in order.

mod common;

use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestCaseError, TestRunner};

use common::*;
use psi_core::concrete::check_late_early;
use psi_core::correspondence::{check_correspondence, CorrespondenceReport};
use psi_core::gen::{random_agent, random_pair, GenConfig};
use psi_core::lts::{build_lts, LtsMode, MAX_STATES};
use psi_core::{
    check_requisites, concrete_bisim, registry_lookup, requisite_pool, symbolic_bisim, DomainConfig, RequisiteSamples,
    Subst, Term,
};

/// Witnesses checked by the independent verifier, across all criteria.
#[derive(Default)]
struct Replays {
    checked: usize,
    failures: Vec<String>,
}

impl Replays {
    fn record(&mut self, what: &str, r: Result<(), String>) {
        self.checked += 1;
        if let Err(e) = r {
            self.failures.push(format!("{what}: {e}"));
        }
    }
}

type Outcome = Result<String, String>;

fn within(budget: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took <= budget {
        Ok(format!("{detail} in {took:.2?}"))
    } else {
        Err(format!("{detail}, but took {took:.2?} (budget {budget:?})"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden(replays: &mut Replays) -> Outcome {
    let budget = Duration::from_secs(10);
    let mut parts = Vec::new();

    let t = Instant::now();
    let unit = load_example("p1.psi");
    let dom = example_domain(&unit, &[]);
    let (p, q) = (unit.get("P1").unwrap(), unit.get("Q1").unwrap());
    let v = symbolic_bisim(&*unit.instance, p, q, &dom).map_err(|e| e.to_string())?;
    ensure(v.bisimilar, || "P1 and Q1 not bisimilar".into())?;
    ensure(v.witness.len() == 4, || format!("P1/Q1 witness has {} triples", v.witness.len()))?;
    replays.record("P1/Q1", replay_symbolic(&*unit.instance, &dom, &v, p, q));
    parts.push(within(budget, t, "P1~Q1 with 4 triples".into())?);

    let t = Instant::now();
    let unit = load_example("p2.psi");
    let dom = example_domain(&unit, &[]);
    let inst = &*unit.instance;
    let (p, q) = (unit.get("P2").unwrap(), unit.get("Q2").unwrap());
    let v = symbolic_bisim(inst, p, q, &dom).map_err(|e| e.to_string())?;
    ensure(v.bisimilar && v.witness.len() == 1, || {
        format!("P2/Q2: bisimilar {} with {} triples", v.bisimilar, v.witness.len())
    })?;
    replays.record("P2/Q2", replay_symbolic(inst, &dom, &v, p, q));
    let c = concrete_bisim(inst, &inst.unit(), p, q, &dom).map_err(|e| e.to_string())?;
    ensure(c.bisimilar, || "P2 and Q2 not concretely bisimilar in 1".into())?;
    replays.record("P2/Q2 concrete", replay_concrete(inst, &dom, &c, p, q));
    parts.push(within(budget, t, "P2~Q2 both ways".into())?);

    let t = Instant::now();
    let unit = load_example("p3.psi");
    let dom = example_domain(&unit, &["b", "c", "d", "x"]);
    let (p, q) = (unit.get("P3").unwrap(), unit.get("Q3").unwrap());
    let v = symbolic_bisim(&*unit.instance, p, q, &dom).map_err(|e| e.to_string())?;
    ensure(v.bisimilar, || "P3 and Q3 not bisimilar".into())?;
    replays.record("P3/Q3", replay_symbolic(&*unit.instance, &dom, &v, p, q));
    parts.push(within(budget, t, "P3~Q3".into())?);

    let t = Instant::now();
    let unit = load_example("p3_swapped.psi");
    let dom = example_domain(&unit, &["b", "c", "d", "x"]);
    let (p, q) = (unit.get("P3s").unwrap(), unit.get("Q3s").unwrap());
    let v = symbolic_bisim(&*unit.instance, p, q, &dom).map_err(|e| e.to_string())?;
    ensure(!v.bisimilar, || "swapped P3/Q3 reported bisimilar".into())?;
    let cex = v.counterexample.as_ref().ok_or("no counterexample")?;
    ensure(cex.solutions().any(|s| s == "(dec(x,k)/z, 1)"), || {
        format!("counterexample lacks (dec(x,k)/z, 1): {:?}", cex.solutions().collect::<Vec<_>>())
    })?;
    parts.push(within(budget, t, "swapped variant refuted by (dec(x,k)/z, 1)".into())?);
    Ok(parts.join("; "))
}

fn state_space() -> Outcome {
    let t = Instant::now();
    let unit = load_example("r_tuple.psi");
    let mut dom = example_domain(&unit, &[]);
    dom.term_depth = 2;
    ensure(dom.names.len() == 3, || "pool should have three names".into())?;
    let inst = &*unit.instance;
    let r = unit.get("R").unwrap();
    let late = build_lts(inst, &inst.unit(), r, &dom, LtsMode::Late, MAX_STATES).map_err(|e| e.to_string())?;
    let sym = build_lts(inst, &inst.unit(), r, &dom, LtsMode::Symbolic, MAX_STATES).map_err(|e| e.to_string())?;
    let outs = late.edges_of_kind("out");
    ensure(outs >= 4, || format!("late graph has {outs} output edges"))?;
    ensure(sym.edges.len() == 1, || format!("symbolic graph has {} edges", sym.edges.len()))?;
    within(Duration::from_secs(1), t, format!("late {outs} output edges, symbolic 1 edge"))
}

fn late_early() -> Outcome {
    let t = Instant::now();
    let pi = registry_lookup("pi").unwrap();
    let cfg = GenConfig::pi(3, &["a", "b"]);
    let dom = DomainConfig::labels(&["a", "b"]);
    let objects = [Term::name("a"), Term::name("b")];
    let mut rng = rng(301);
    let mut checked = 0;
    for _ in 0..100 {
        let p = random_agent(&cfg, &mut rng);
        let r = check_late_early(&*pi, &pi.unit(), &p, &dom, &objects).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("{p}: {:?}", r.violations))?;
        checked += r.checked;
    }
    within(Duration::from_secs(30), t, format!("100 agents, {checked} transitions, 0 violations"))
}

fn correspondence() -> Outcome {
    let t = Instant::now();
    let mut total = CorrespondenceReport::default();

    let pi = registry_lookup("pi").unwrap();
    let cfg = GenConfig::pi(3, &["a", "b"]);
    let dom = DomainConfig::labels(&["a", "b"]);
    let mut rng = rng(401);
    for _ in 0..50 {
        let p = random_agent(&cfg, &mut rng);
        total.merge(check_correspondence(&*pi, &p, &dom).map_err(|e| format!("{p}: {e}"))?);
    }

    let assign = registry_lookup("assign").unwrap();
    let cfg = GenConfig::assign(3, &["a"], &["u"], &[2, 4]);
    let mut dom = DomainConfig::labels(&["a", "u"]);
    dom.literals = vec![Term::Int(2), Term::Int(4)];
    dom.assert_depth = 1;
    dom.rigid.insert(psi_core::Name::new("u"));
    for _ in 0..50 {
        let p = random_agent(&cfg, &mut rng);
        total.merge(check_correspondence(&*assign, &p, &dom).map_err(|e| format!("{p}: {e}"))?);
    }

    ensure(total.passed(), || {
        format!("unsound {:?} incomplete {:?}", total.unsound.first(), total.incomplete.first())
    })?;
    for kind in ["in", "out", "tau"] {
        ensure(total.kinds.contains(kind), || format!("no `{kind}` transition exercised"))?;
    }
    within(
        Duration::from_secs(60),
        t,
        format!("100 agents, {} solution instances, kinds {:?}", total.checked, total.kinds),
    )
}

fn full_abstraction(replays: &mut Replays) -> Outcome {
    let t = Instant::now();
    let pi = registry_lookup("pi").unwrap();
    let cfg = GenConfig::pi(3, &["a", "b"]);
    let dom = DomainConfig::labels(&["a", "b", "c"]);
    let mut rng = rng(501);
    let (mut agree, mut bisimilar) = (0, 0);
    for _ in 0..50 {
        let (p, q) = random_pair(&cfg, &mut rng);
        let v = symbolic_bisim(&*pi, &p, &q, &dom).map_err(|e| e.to_string())?;
        if v.bisimilar {
            bisimilar += 1;
            replays.record(&format!("{p} ~ {q}"), replay_symbolic(&*pi, &dom, &v, &p, &q));
        }
        let mut concrete = true;
        for s in psi_core::bisim::closing_space(&*pi, &p, &q, &dom).enumerate() {
            let ps = p.subst(&s.subst).map_err(|e| e.to_string())?;
            let qs = q.subst(&s.subst).map_err(|e| e.to_string())?;
            let c = concrete_bisim(&*pi, &s.assertion, &ps, &qs, &dom).map_err(|e| e.to_string())?;
            if c.bisimilar {
                replays.record(&format!("{ps} ~ {qs}"), replay_concrete(&*pi, &dom, &c, &ps, &qs));
            } else {
                concrete = false;
                break;
            }
        }
        if concrete == v.bisimilar {
            agree += 1;
        } else {
            return Err(format!("{p} vs {q}: symbolic {} concrete {concrete}", v.bisimilar));
        }
    }
    within(
        Duration::from_secs(120),
        t,
        format!("{agree}/50 pairs agree ({bisimilar} bisimilar)"),
    )
}

fn requisites() -> Outcome {
    let mut parts = Vec::new();
    for key in ["pi", "tuple", "assign", "crypto"] {
        let inst = registry_lookup(key).unwrap();
        let report = check_requisites(&*inst, &RequisiteSamples::new(requisite_pool(key), 500, 601));
        if let Some(l) = report.laws.iter().find(|l| !l.passed) {
            return Err(format!("{key}: {:?} fails: {:?}", l.law, l.counterexample));
        }
        parts.push(key);
    }
    Ok(format!("{} pass 500 samples (seed 601)", parts.join(", ")))
}

fn kernel() -> Outcome {
    let pi = registry_lookup("pi").unwrap();
    let config = Config {
        cases: 1000,
        failure_persistence: None,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        ..Config::default()
    };
    let seeded = || TestRunner::new_with_rng(config.clone(), proptest::test_runner::TestRng::deterministic_rng(config.rng_algorithm));
    let fail = TestCaseError::fail;

    seeded()
        .run(&(pi_agent(), name(), name(), name()), |(p, x, a, b)| {
            equivariance(&*pi, &p, &Term::Name(x), x, a, b).map_err(fail)
        })
        .map_err(|e| format!("equivariance: {e}"))?;
    seeded()
        .run(&(pi_agent(), term(), name(), name()), |(p, m, a, b)| swap_involution(&p, &m, a, b).map_err(fail))
        .map_err(|e| format!("swap involution: {e}"))?;
    seeded()
        .run(&(pi_agent(), term(), name()), |(p, m, x)| subst_identity(&p, &m, x).map_err(fail))
        .map_err(|e| format!("substitution identity: {e}"))?;
    seeded()
        .run(&(pi_agent(), name(), name()), |(p, a, b)| alpha_laws(&p, a, b).map_err(fail))
        .map_err(|e| format!("alpha laws: {e}"))?;
    Ok("equivariance, swap involution, substitution identity, alpha laws: 1000 cases each".into())
}

type Criterion = Box<dyn FnOnce(&mut Replays) -> Outcome>;

fn main() {
    let mut replays = Replays::default();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("golden example verdicts", Box::new(golden)),
        ("symbolic state-space reduction", Box::new(|_: &mut Replays| state_space())),
        ("late/early correspondence", Box::new(|_: &mut Replays| late_early())),
        ("symbolic/concrete correspondence", Box::new(|_: &mut Replays| correspondence())),
        ("full abstraction on random pairs", Box::new(full_abstraction)),
        ("instance requisites", Box::new(|_: &mut Replays| requisites())),
        ("kernel properties", Box::new(|_: &mut Replays| kernel())),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.into_iter().enumerate() {
        let outcome = check(&mut replays);
        report(i + 1, title, &outcome);
        failed += usize::from(outcome.is_err());
    }
    let replay = if replays.failures.is_empty() && replays.checked > 0 {
        Ok(format!("{} witnesses replayed clause by clause", replays.checked))
    } else {
        Err(format!(
            "{} of {} witnesses rejected, first: {:?}",
            replays.failures.len(),
            replays.checked,
            replays.failures.first()
        ))
    };
    report(8, "witness replay", &replay);
    failed += usize::from(replay.is_err());

    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn report(n: usize, title: &str, outcome: &Outcome) {
    match outcome {
        Ok(detail) => println!("PASS [{n}] {title}: {detail}"),
        Err(detail) => println!("FAIL [{n}] {title}: {detail}"),
    }
}
