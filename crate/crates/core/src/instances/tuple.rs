use crate::data::{Assertion, Condition, Term};
use crate::nominal::Name;
use crate::params::{pair_probes, Instance, Pool};

use super::check_symbols;

const SYMBOLS: &[(&str, usize)] = &[("first", 2)];

/// Names closed under a projection constructor `first(M,N)`, where
/// `first(M,N)` is channel equivalent to `M`.
#[derive(Clone, Copy, Debug, Default)]
pub struct TupleInstance;

/// The channel a term projects to: the leftmost name under `first`.
pub fn head(t: &Term) -> Option<Name> {
    match t {
        Term::Name(n) => Some(*n),
        Term::App(f, args) if &**f == "first" && args.len() == 2 => head(&args[0]),
        _ => None,
    }
}

impl Instance for TupleInstance {
    fn key(&self) -> &'static str {
        "tuple"
    }

    fn function_symbols(&self) -> &'static [(&'static str, usize)] {
        SYMBOLS
    }

    fn validate_term(&self, t: &Term) -> Result<(), String> {
        check_symbols(t, SYMBOLS, &[], false)
    }

    fn validate_condition(&self, c: &Condition) -> Result<(), String> {
        match c {
            Condition::Pred(p, _) => Err(format!("unknown predicate `{p}`")),
            _ => c.terms().into_iter().try_for_each(|t| self.validate_term(t)),
        }
    }

    fn validate_assertion(&self, a: &Assertion) -> Result<(), String> {
        if a.is_unit() {
            Ok(())
        } else {
            Err(format!("only the unit assertion is allowed, got `{a}`"))
        }
    }

    fn entails(&self, _psi: &Assertion, phi: &Condition) -> bool {
        match phi {
            Condition::Eq(a, b) => a == b,
            Condition::Neq(a, b) => a != b,
            Condition::Chan(a, b) => matches!((head(a), head(b)), (Some(x), Some(y)) if x == y),
            Condition::Pred(..) => false,
        }
    }

    fn probe_conditions(&self, pool: &Pool, depth: usize) -> Vec<Condition> {
        pair_probes(&self.term_domain(pool, depth), true, true, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections_are_candidates() {
        let names = [Name::new("m"), Name::new("k1"), Name::new("k2")];
        let pool = Pool::new(names, vec![]);
        let m = Term::name("m");
        let cands = TupleInstance.channel_candidates(&Assertion::unit(), &m, &pool, 1);
        assert!(cands.contains(&m));
        for k in &names {
            assert!(cands.contains(&Term::app("first", vec![m.clone(), Term::Name(*k)])));
        }
        assert!(!cands.contains(&Term::name("k1")));
    }

    #[test]
    fn first_is_equivalent_to_its_head() {
        let (m, n) = (Term::name("m"), Term::name("n"));
        let f = Term::app("first", vec![m.clone(), n.clone()]);
        assert!(TupleInstance.entails(&Assertion::unit(), &Condition::chan(&f, &m)));
        assert!(!TupleInstance.entails(&Assertion::unit(), &Condition::chan(&f, &n)));
    }
}
