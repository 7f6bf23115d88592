use crate::data::{Assertion, Condition, Term};
use crate::params::{pair_probes, Instance, Pool};

use super::check_symbols;

/// Names as the only terms, unit as the only assertion, and equality,
/// inequality and channel equivalence tests on names.
#[derive(Clone, Copy, Debug, Default)]
pub struct PiInstance;

fn names_only(t: &Term) -> Result<(), String> {
    match t {
        Term::Name(_) => Ok(()),
        other => Err(format!("`{other}` is not a name")),
    }
}

fn unit_only(a: &Assertion) -> Result<(), String> {
    if a.is_unit() {
        Ok(())
    } else {
        Err(format!("only the unit assertion is allowed, got `{a}`"))
    }
}

fn pi_entails(phi: &Condition) -> bool {
    match phi {
        Condition::Eq(a, b) | Condition::Chan(a, b) => a == b,
        Condition::Neq(a, b) => a != b,
        Condition::Pred(..) => false,
    }
}

impl Instance for PiInstance {
    fn key(&self) -> &'static str {
        "pi"
    }

    fn validate_term(&self, t: &Term) -> Result<(), String> {
        names_only(t)
    }

    fn validate_condition(&self, c: &Condition) -> Result<(), String> {
        match c {
            Condition::Pred(p, _) => Err(format!("unknown predicate `{p}`")),
            _ => c.terms().into_iter().try_for_each(names_only),
        }
    }

    fn validate_assertion(&self, a: &Assertion) -> Result<(), String> {
        unit_only(a)
    }

    fn entails(&self, _psi: &Assertion, phi: &Condition) -> bool {
        pi_entails(phi)
    }

    fn probe_conditions(&self, pool: &Pool, _depth: usize) -> Vec<Condition> {
        let names: Vec<Term> = pool.names.iter().map(|n| Term::Name(*n)).collect();
        pair_probes(&names, true, true, true)
    }

    fn channel_candidates(&self, _psi: &Assertion, m: &Term, _pool: &Pool, _depth: usize) -> Vec<Term> {
        match m {
            Term::Name(_) => vec![m.clone()],
            _ => Vec::new(),
        }
    }
}

/// The pi instance extended with a constant `F` that is not channel
/// equivalent to anything, itself included.
#[derive(Clone, Copy, Debug, Default)]
pub struct NonChannelExtension;

impl Instance for NonChannelExtension {
    fn key(&self) -> &'static str {
        "pi-nonchan"
    }

    fn constants(&self) -> &'static [&'static str] {
        &["F"]
    }

    fn validate_term(&self, t: &Term) -> Result<(), String> {
        check_symbols(t, &[], self.constants(), false)
    }

    fn validate_condition(&self, c: &Condition) -> Result<(), String> {
        match c {
            Condition::Pred(p, _) => Err(format!("unknown predicate `{p}`")),
            _ => c.terms().into_iter().try_for_each(|t| self.validate_term(t)),
        }
    }

    fn validate_assertion(&self, a: &Assertion) -> Result<(), String> {
        unit_only(a)
    }

    fn entails(&self, _psi: &Assertion, phi: &Condition) -> bool {
        match phi {
            Condition::Chan(a, b) => a == b && a.as_name().is_some(),
            _ => pi_entails(phi),
        }
    }

    fn probe_conditions(&self, pool: &Pool, depth: usize) -> Vec<Condition> {
        pair_probes(&self.term_domain(pool, depth), true, true, true)
    }

    fn channel_candidates(&self, _psi: &Assertion, m: &Term, _pool: &Pool, _depth: usize) -> Vec<Term> {
        match m {
            Term::Name(_) => vec![m.clone()],
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nominal::Name;

    #[test]
    fn pi_entailment_table() {
        let (a, b) = (Term::name("a"), Term::name("b"));
        let one = Assertion::unit();
        let pi = PiInstance;
        assert!(pi.entails(&one, &Condition::Eq(a.clone(), a.clone())));
        assert!(pi.entails(&one, &Condition::chan(&a, &a)));
        assert!(pi.entails(&one, &Condition::Neq(a.clone(), b.clone())));
        assert!(!pi.entails(&one, &Condition::Eq(a.clone(), b.clone())));
        assert!(!pi.entails(&one, &Condition::Neq(a.clone(), a.clone())));
        assert!(!pi.entails(&one, &Condition::chan(&a, &b)));
    }

    #[test]
    fn pi_candidates_are_reflexive_only() {
        let pool = Pool::new([Name::new("a"), Name::new("b")], vec![]);
        let a = Term::name("a");
        assert_eq!(PiInstance.channel_candidates(&Assertion::unit(), &a, &pool, 3), vec![a.clone()]);
        // agrees with exhaustive filtering
        let filtered: Vec<Term> = PiInstance
            .term_domain(&pool, 3)
            .into_iter()
            .filter(|k| PiInstance.entails(&Assertion::unit(), &Condition::chan(&a, k)))
            .collect();
        assert_eq!(filtered, vec![a]);
    }

    #[test]
    fn f_is_not_a_channel() {
        let f = Term::app("F", vec![]);
        let pool = Pool::new([Name::new("a")], vec![]);
        let inst = NonChannelExtension;
        assert!(inst.channel_candidates(&Assertion::unit(), &f, &pool, 2).is_empty());
        for m in inst.term_domain(&pool, 1) {
            assert!(!inst.entails(&Assertion::unit(), &Condition::chan(&f, &m)));
            assert!(!inst.entails(&Assertion::unit(), &Condition::chan(&m, &f)));
        }
    }
}
