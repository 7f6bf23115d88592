use crate::data::{Assertion, Condition, Term};
use crate::params::{dedup, pair_probes, Instance, Pool};

use super::{choices, expand};

const PREDICATES: &[(&str, usize)] = &[("prime", 1)];

/// Names and integer literals, with assertions assigning integers to
/// variables. Channels are names.
#[derive(Clone, Copy, Debug, Default)]
pub struct AssignInstance;

fn is_prime(n: i64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

impl AssignInstance {
    fn holds(phi: &Condition, choice: &std::collections::BTreeMap<crate::nominal::Name, Term>) -> bool {
        let ev = |t: &Term| expand(t, choice);
        match phi {
            Condition::Eq(a, b) => ev(a) == ev(b),
            Condition::Neq(a, b) => matches!((ev(a), ev(b)), (Term::Int(x), Term::Int(y)) if x != y),
            Condition::Chan(a, b) => a == b && a.as_name().is_some(),
            Condition::Pred(p, args) if &**p == "prime" && args.len() == 1 => {
                matches!(ev(&args[0]), Term::Int(n) if is_prime(n))
            }
            Condition::Pred(..) => false,
        }
    }
}

impl Instance for AssignInstance {
    fn key(&self) -> &'static str {
        "assign"
    }

    fn predicates(&self) -> &'static [(&'static str, usize)] {
        PREDICATES
    }

    fn validate_term(&self, t: &Term) -> Result<(), String> {
        match t {
            Term::Name(_) | Term::Int(_) => Ok(()),
            other => Err(format!("`{other}` is not a name or integer")),
        }
    }

    fn validate_condition(&self, c: &Condition) -> Result<(), String> {
        match c {
            Condition::Pred(p, args) if &**p == "prime" && args.len() == 1 => self.validate_term(&args[0]),
            Condition::Pred(p, _) => Err(format!("unknown predicate `{p}`")),
            Condition::Chan(a, b) if a.as_name().is_none() || b.as_name().is_none() => {
                Err(format!("channel test `{c}` must relate names"))
            }
            _ => c.terms().into_iter().try_for_each(|t| self.validate_term(t)),
        }
    }

    fn validate_assertion(&self, a: &Assertion) -> Result<(), String> {
        for (l, r) in a.bindings() {
            if l.as_name().is_none() || !matches!(r, Term::Int(_)) {
                return Err(format!("`{l}:={r}` must assign an integer to a variable"));
            }
        }
        Ok(())
    }

    fn entails(&self, psi: &Assertion, phi: &Condition) -> bool {
        choices(psi).iter().any(|c| Self::holds(phi, c))
    }

    fn evaluate(&self, psi: &Assertion, m: &Term) -> Term {
        match choices(psi).first() {
            Some(c) => expand(m, c),
            None => m.clone(),
        }
    }

    fn leaves(&self, pool: &Pool) -> Vec<Term> {
        let mut out: Vec<Term> = pool.names.iter().map(|n| Term::Name(*n)).collect();
        out.extend(pool.literals.iter().filter(|t| matches!(t, Term::Int(_))).cloned());
        dedup(out)
    }

    fn probe_conditions(&self, pool: &Pool, _depth: usize) -> Vec<Condition> {
        let leaves = self.leaves(pool);
        let names: Vec<Term> = pool.names.iter().map(|n| Term::Name(*n)).collect();
        let mut out = pair_probes(&leaves, true, true, false);
        out.extend(pair_probes(&names, false, false, true));
        out.extend(leaves.iter().map(|t| Condition::Pred("prime".into(), vec![t.clone()])));
        out
    }

    /// Sets of at most `depth` bindings from pool names to pool integers.
    fn assertion_domain(&self, pool: &Pool, depth: usize) -> Vec<Assertion> {
        let ints: Vec<Term> = pool.literals.iter().filter(|t| matches!(t, Term::Int(_))).cloned().collect();
        let singles: Vec<(Term, Term)> = pool
            .names
            .iter()
            .flat_map(|x| ints.iter().map(move |v| (Term::Name(*x), v.clone())))
            .collect();
        let mut out = vec![Assertion::unit()];
        let mut frontier = vec![Assertion::unit()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for a in &frontier {
                for b in &singles {
                    if a.bindings().last().is_none_or(|last| last < b) {
                        next.push(a.compose(&Assertion::binding(b.0.clone(), b.1.clone())));
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    fn channel_candidates(&self, _psi: &Assertion, m: &Term, _pool: &Pool, _depth: usize) -> Vec<Term> {
        match m {
            Term::Name(_) => vec![m.clone()],
            _ => Vec::new(),
        }
    }
}
