//! The parameter interface of a psi-calculus, frames, and the requisite
//! checker.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::{Assertion, Condition, Term};
use crate::nominal::{
    Alpha, CanonEnv, FreshSession, Name, NameSeq, Nominal, NominalError, Subst, Substitution,
};

/// Names and literal leaves from which finite domains are generated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pool {
    pub names: Vec<Name>,
    pub literals: Vec<Term>,
}

impl Pool {
    pub fn new(names: impl IntoIterator<Item = Name>, literals: Vec<Term>) -> Self {
        let mut seen = BTreeSet::new();
        let names = names.into_iter().filter(|n| seen.insert(*n)).collect();
        Pool { names, literals }
    }

    pub fn with_names(&self, extra: impl IntoIterator<Item = Name>) -> Pool {
        Pool::new(self.names.iter().copied().chain(extra), self.literals.clone())
    }
}

/// A psi-calculus instance: terms, conditions, assertions, channel
/// equivalence, composition, unit and entailment, plus finite enumerators
/// used for solving at desk scale.
pub trait Instance: Send + Sync {
    fn key(&self) -> &'static str;

    /// Function symbols with their arities. Used by the parser and by
    /// [`Instance::term_domain`].
    fn function_symbols(&self) -> &'static [(&'static str, usize)] {
        &[]
    }

    /// Nullary constants written as bare identifiers.
    fn constants(&self) -> &'static [&'static str] {
        &[]
    }

    /// Predicate symbols usable as conditions.
    fn predicates(&self) -> &'static [(&'static str, usize)] {
        &[]
    }

    fn validate_term(&self, t: &Term) -> Result<(), String>;
    fn validate_condition(&self, c: &Condition) -> Result<(), String>;
    fn validate_assertion(&self, a: &Assertion) -> Result<(), String>;

    fn chan_eq(&self, m: &Term, n: &Term) -> Condition {
        Condition::chan(m, n)
    }

    fn compose(&self, a: &Assertion, b: &Assertion) -> Assertion {
        a.compose(b)
    }

    fn unit(&self) -> Assertion {
        Assertion::unit()
    }

    fn entails(&self, psi: &Assertion, phi: &Condition) -> bool;

    /// Instance normal form of a term under an assertion.
    fn evaluate(&self, _psi: &Assertion, m: &Term) -> Term {
        m.clone()
    }

    /// Depth-0 terms.
    fn leaves(&self, pool: &Pool) -> Vec<Term> {
        let mut out: Vec<Term> = pool.names.iter().map(|n| Term::Name(*n)).collect();
        out.extend(pool.literals.iter().cloned());
        out.extend(self.constants().iter().map(|c| Term::app(c, vec![])));
        dedup(out)
    }

    /// Every legal term of depth at most `depth` over the pool.
    fn term_domain(&self, pool: &Pool, depth: usize) -> Vec<Term> {
        grow_terms(self.leaves(pool), self.function_symbols(), depth)
    }

    fn probe_conditions(&self, pool: &Pool, depth: usize) -> Vec<Condition>;

    fn assertion_domain(&self, _pool: &Pool, _depth: usize) -> Vec<Assertion> {
        vec![self.unit()]
    }

    /// Every term `K` up to `depth` with `psi |- M <-> K`.
    fn channel_candidates(&self, psi: &Assertion, m: &Term, pool: &Pool, depth: usize) -> Vec<Term> {
        let pool = pool.with_names(m.support());
        self.term_domain(&pool, depth)
            .into_iter()
            .filter(|k| self.entails(psi, &self.chan_eq(m, k)))
            .collect()
    }
}

pub(crate) fn dedup<T: Ord + Clone>(v: Vec<T>) -> Vec<T> {
    let mut seen = BTreeSet::new();
    v.into_iter().filter(|x| seen.insert(x.clone())).collect()
}

/// Closes `leaves` under `symbols` up to constructor depth `depth`.
pub fn grow_terms(leaves: Vec<Term>, symbols: &[(&str, usize)], depth: usize) -> Vec<Term> {
    let mut all = dedup(leaves);
    for _ in 0..depth {
        let mut next = all.clone();
        for (f, arity) in symbols.iter().filter(|(_, a)| *a > 0) {
            for args in product(&all, *arity) {
                next.push(Term::app(f, args));
            }
        }
        all = dedup(next);
    }
    all
}

pub(crate) fn product<T: Clone>(items: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                items.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Equality, inequality and channel probes over all pairs of terms.
pub fn pair_probes(terms: &[Term], eq: bool, neq: bool, chan: bool) -> Vec<Condition> {
    let mut out = Vec::new();
    for a in terms {
        for b in terms {
            if eq {
                out.push(Condition::Eq(a.clone(), b.clone()));
            }
            if neq {
                out.push(Condition::Neq(a.clone(), b.clone()));
            }
            if chan {
                out.push(Condition::Chan(a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Equivalence of assertions over a finite probe set.
pub fn assertion_equivalent(
    inst: &dyn Instance,
    a: &Assertion,
    b: &Assertion,
    probes: &[Condition],
) -> bool {
    a == b || probes.iter().all(|phi| inst.entails(a, phi) == inst.entails(b, phi))
}

/// An assertion under a sequence of bound names.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Frame {
    pub binders: NameSeq,
    pub assertion: Assertion,
}

impl Frame {
    pub fn unit() -> Frame {
        Frame::default()
    }

    pub fn of_assertion(assertion: Assertion) -> Frame {
        Frame {
            binders: Vec::new(),
            assertion,
        }
    }

    /// `(nu b)F`, prepending the binder.
    pub fn restrict(mut self, b: Name) -> Frame {
        self.binders.insert(0, b);
        self
    }

    /// Renames binders that occur in `avoid` (or repeat) to fresh names.
    pub fn freshen(&self, avoid: &BTreeSet<Name>) -> Frame {
        let mut all = avoid.clone();
        all.extend(self.names());
        let mut session = FreshSession::new(all);
        let mut used = BTreeSet::new();
        let mut out = self.clone();
        for i in 0..out.binders.len() {
            let b = out.binders[i];
            if avoid.contains(&b) || !used.insert(b) {
                let f = session.fresh_like(b);
                // only the occurrences under this binder are renamed
                out.assertion = out.assertion.swap(b, f);
                for later in out.binders.iter_mut().skip(i + 1) {
                    *later = later.swap(b, f);
                }
                out.binders[i] = f;
                used.insert(f);
            }
        }
        out
    }

    /// Applies a substitution, renaming binders that would capture.
    pub fn subst(&self, s: &Substitution) -> Result<Frame, NominalError> {
        let mut avoid = s.mentioned();
        avoid.extend(self.support());
        let f = self.freshen(&avoid);
        let inner = f.binders.iter().fold(s.clone(), |s, b| s.without(*b));
        Ok(Frame {
            binders: f.binders,
            assertion: f.assertion.subst(&inner)?,
        })
    }
}

impl Nominal for Frame {
    fn swap(&self, a: Name, b: Name) -> Self {
        Frame {
            binders: self.binders.iter().map(|n| n.swap(a, b)).collect(),
            assertion: self.assertion.swap(a, b),
        }
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        let bound: BTreeSet<Name> = self.binders.iter().copied().collect();
        out.extend(self.assertion.support().difference(&bound));
    }
    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        out.extend(self.binders.iter().copied());
        self.assertion.collect_support(out);
    }
}

impl Alpha for Frame {
    /// Vacuous binders are dropped. The remaining binders are assigned
    /// canonical names in the order that minimizes the resulting assertion,
    /// since the assertion is an unordered set.
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        let support = self.assertion.support();
        let live: Vec<Name> = dedup(self.binders.iter().copied().filter(|b| support.contains(b)).collect());
        let mut saved = Vec::new();
        let mut canon = Vec::new();
        for b in &live {
            let (c, prev) = env.bind(*b);
            saved.push((*b, prev));
            canon.push(c);
        }
        let body = |order: &[Name], env: &CanonEnv| {
            let map: std::collections::HashMap<Name, Name> =
                order.iter().copied().zip(canon.iter().copied()).collect();
            self.assertion.map_terms(&mut |t| {
                t.map_names(&mut |n| Term::Name(map.get(&n).copied().unwrap_or_else(|| env.rename(n))))
            })
        };
        let assertion = if live.len() <= 5 {
            live.iter()
                .copied()
                .permutations(live.len())
                .map(|order| body(&order, env))
                .min()
                .unwrap_or_else(|| self.assertion.canon_with(env))
        } else {
            body(&live, env)
        };
        for (b, prev) in saved.into_iter().rev() {
            env.unbind(b, prev);
        }
        Frame {
            binders: canon,
            assertion,
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.binders.is_empty() {
            return write!(f, "{}", self.assertion);
        }
        f.write_str("(new ")?;
        for (i, b) in self.binders.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")({})", self.assertion)
    }
}

/// Composition of frames with binders renamed apart.
pub fn frame_compose(inst: &dyn Instance, f: &Frame, g: &Frame) -> Frame {
    let f2 = f.freshen(&g.names());
    let g2 = g.freshen(&f2.names());
    let mut binders = f2.binders.clone();
    binders.extend(g2.binders.iter().copied());
    Frame {
        binders,
        assertion: inst.compose(&f2.assertion, &g2.assertion),
    }
}

/// `F |- phi`: some alpha-variant of `F` with binders fresh for `phi`
/// entails `phi`.
pub fn frame_entails(inst: &dyn Instance, f: &Frame, phi: &Condition) -> bool {
    let variant = f.freshen(&phi.support());
    inst.entails(&variant.assertion, phi)
}

pub fn frame_equivalent(inst: &dyn Instance, f: &Frame, g: &Frame, probes: &[Condition]) -> bool {
    if f.alpha_eq(g) {
        return true;
    }
    probes
        .iter()
        .all(|phi| frame_entails(inst, f, phi) == frame_entails(inst, g, phi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Law {
    ChannelSymmetry,
    ChannelTransitivity,
    Weakening,
    Composition,
    Identity,
    Associativity,
    Commutativity,
}

impl Law {
    pub const ALL: [Law; 7] = [
        Law::ChannelSymmetry,
        Law::ChannelTransitivity,
        Law::Weakening,
        Law::Composition,
        Law::Identity,
        Law::Associativity,
        Law::Commutativity,
    ];
}

#[derive(Clone, Debug, Serialize)]
pub struct LawResult {
    pub law: Law,
    pub passed: bool,
    /// Instances whose antecedent held and were therefore checked.
    pub checked: usize,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RequisiteReport {
    pub instance: String,
    pub samples: usize,
    pub seed: u64,
    pub laws: Vec<LawResult>,
}

impl RequisiteReport {
    pub fn all_passed(&self) -> bool {
        self.laws.iter().all(|l| l.passed)
    }
}

#[derive(Clone, Debug)]
pub struct RequisiteSamples {
    pub pool: Pool,
    pub term_depth: usize,
    pub assertion_depth: usize,
    pub probe_depth: usize,
    pub samples: usize,
    pub seed: u64,
}

impl RequisiteSamples {
    pub fn new(pool: Pool, samples: usize, seed: u64) -> Self {
        RequisiteSamples {
            pool,
            term_depth: 1,
            assertion_depth: 2,
            probe_depth: 1,
            samples,
            seed,
        }
    }
}

/// Property-tests the requisites on valid parameters over random draws.
pub fn check_requisites(inst: &dyn Instance, cfg: &RequisiteSamples) -> RequisiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let terms = inst.term_domain(&cfg.pool, cfg.term_depth);
    let assertions = inst.assertion_domain(&cfg.pool, cfg.assertion_depth);
    let probes = inst.probe_conditions(&cfg.pool, cfg.probe_depth);
    assert!(!terms.is_empty() && !assertions.is_empty() && !probes.is_empty());

    let mut results: Vec<LawResult> = Law::ALL
        .iter()
        .map(|&law| LawResult {
            law,
            passed: true,
            checked: 0,
            counterexample: None,
        })
        .collect();
    let mut record = |law: Law, antecedent: bool, ok: bool, witness: &dyn Fn() -> String| {
        let r = results.iter_mut().find(|r| r.law == law).unwrap();
        if !antecedent {
            return;
        }
        r.checked += 1;
        if !ok && r.passed {
            r.passed = false;
            r.counterexample = Some(witness());
        }
    };
    let equiv = |a: &Assertion, b: &Assertion| assertion_equivalent(inst, a, b, &probes);

    for _ in 0..cfg.samples {
        let pick_a = |rng: &mut ChaCha8Rng| -> Assertion {
            let a = assertions.choose(rng).unwrap();
            let b = assertions.choose(rng).unwrap();
            if rand::Rng::gen_bool(rng, 0.5) {
                inst.compose(a, b)
            } else {
                a.clone()
            }
        };
        let psi = pick_a(&mut rng);
        let psi1 = pick_a(&mut rng);
        let psi2 = pick_a(&mut rng);
        let m = terms.choose(&mut rng).unwrap();
        let n = terms.choose(&mut rng).unwrap();
        let l = terms.choose(&mut rng).unwrap();
        let phi = probes.choose(&mut rng).unwrap();

        let mn = inst.entails(&psi, &inst.chan_eq(m, n));
        let nm = inst.entails(&psi, &inst.chan_eq(n, m));
        record(Law::ChannelSymmetry, mn, nm, &|| format!("{psi} |- {m}<->{n} but not {n}<->{m}"));

        // bias transitivity towards chains that exist
        let chain: Vec<&Term> = terms
            .iter()
            .filter(|k| inst.entails(&psi, &inst.chan_eq(n, k)))
            .collect();
        let l2 = chain.choose(&mut rng).copied().unwrap_or(l);
        let nl = inst.entails(&psi, &inst.chan_eq(n, l2));
        let ml = inst.entails(&psi, &inst.chan_eq(m, l2));
        record(Law::ChannelTransitivity, mn && nl, ml, &|| {
            format!("{psi} |- {m}<->{n}, {n}<->{l2} but not {m}<->{l2}")
        });

        let both = inst.compose(&psi, &psi1);
        let ent = inst.entails(&psi, phi);
        record(Law::Weakening, ent, inst.entails(&both, phi), &|| {
            format!("{psi} |- {phi} but not {both}")
        });

        for other in [psi1.clone(), inst.compose(&psi, &inst.unit()), inst.compose(&psi, &psi)] {
            let ante = equiv(&psi, &other);
            let lhs = inst.compose(&psi, &psi2);
            let rhs = inst.compose(&other, &psi2);
            record(Law::Composition, ante, equiv(&lhs, &rhs), &|| {
                format!("{psi} ~ {other} but {lhs} !~ {rhs}")
            });
        }

        let with_unit = inst.compose(&psi, &inst.unit());
        record(Law::Identity, true, equiv(&with_unit, &psi), &|| format!("{psi} * 1 !~ {psi}"));

        let left = inst.compose(&inst.compose(&psi, &psi1), &psi2);
        let right = inst.compose(&psi, &inst.compose(&psi1, &psi2));
        record(Law::Associativity, true, equiv(&left, &right), &|| {
            format!("({psi} * {psi1}) * {psi2} !~ {psi} * ({psi1} * {psi2})")
        });

        let ab = inst.compose(&psi, &psi1);
        let ba = inst.compose(&psi1, &psi);
        record(Law::Commutativity, true, equiv(&ab, &ba), &|| format!("{psi} * {psi1} !~ {psi1} * {psi}"));
    }

    RequisiteReport {
        instance: inst.key().to_string(),
        samples: cfg.samples,
        seed: cfg.seed,
        laws: results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{AssignInstance, CryptoInstance, PiInstance};

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn assertion_equivalence_examples() {
        let x = n("x");
        let three = Assertion::assign(x, Term::Int(3));
        let four = Assertion::assign(x, Term::Int(4));
        let probe = [Condition::Eq(Term::Name(x), Term::Int(3))];
        assert!(!assertion_equivalent(&AssignInstance, &three, &four, &probe));
        let probes = [
            Condition::Eq(Term::name("a"), Term::name("a")),
            Condition::Eq(Term::name("a"), Term::name("b")),
        ];
        assert!(assertion_equivalent(&PiInstance, &Assertion::unit(), &Assertion::unit(), &probes));
    }

    #[test]
    fn frame_entailment_renames_binders() {
        let x = n("x");
        let f = Frame::of_assertion(Assertion::assign(x, Term::Int(3))).restrict(x);
        let phi = Condition::Eq(Term::Name(x), Term::Int(3));
        assert!(!frame_entails(&AssignInstance, &f, &phi));
        assert!(frame_entails(&AssignInstance, &Frame::of_assertion(f.assertion.clone()), &phi));

        let enc = Term::app("enc", vec![Term::name("a"), Term::name("k")]);
        let g = Frame::of_assertion(Assertion::assign(x, enc)).restrict(n("k")).restrict(n("a"));
        assert!(frame_entails(&CryptoInstance, &g, &Condition::Eq(Term::Name(x), Term::Name(x))));
    }

    #[test]
    fn frame_equivalence_examples() {
        let pool = Pool::new([n("y")], vec![Term::Int(3)]);
        let probes = AssignInstance.probe_conditions(&pool, 1);
        let x = n("x");
        let f = Frame::of_assertion(Assertion::assign(x, Term::Int(3))).restrict(x);
        assert!(frame_equivalent(&AssignInstance, &f, &Frame::unit(), &probes));
        let vacuous = Frame::unit().restrict(n("a"));
        let pi_probes = PiInstance.probe_conditions(&Pool::new([n("a"), n("b")], vec![]), 0);
        assert!(frame_equivalent(&PiInstance, &vacuous, &Frame::unit(), &pi_probes));
    }

    #[test]
    fn frame_compose_renames_apart() {
        let (a, c, d) = (n("a"), n("c"), n("d"));
        let f = Frame::of_assertion(Assertion::binding(Term::Name(c), Term::Name(a))).restrict(a);
        let g = Frame::of_assertion(Assertion::binding(Term::Name(d), Term::Name(a))).restrict(a);
        let h = frame_compose(&CryptoInstance, &f, &g);
        assert_eq!(h.binders.len(), 2);
        assert_ne!(h.binders[0], h.binders[1]);
        assert_eq!(h.support(), [c, d].into_iter().collect());
    }

    #[test]
    fn frame_alpha_ignores_binder_names_and_order() {
        let (a, b, x) = (n("a"), n("b"), n("x"));
        let mk = |p: Name, q: Name| {
            Frame::of_assertion(
                Assertion::binding(Term::Name(x), Term::Name(p))
                    .compose(&Assertion::binding(Term::Name(n("z")), Term::Name(q))),
            )
            .restrict(q)
            .restrict(p)
        };
        assert!(mk(a, b).alpha_eq(&mk(b, a)));
        assert!(mk(a, b).alpha_eq(&mk(n("u"), n("v"))));
    }

    #[test]
    fn pi_passes_requisites() {
        let cfg = RequisiteSamples::new(Pool::new([n("a"), n("b"), n("c")], vec![]), 200, 7);
        let report = check_requisites(&PiInstance, &cfg);
        assert!(report.all_passed(), "{report:?}");
    }
}
