use crate::data::{Assertion, Condition, Term};
use crate::params::{grow_terms, pair_probes, Instance, Pool};

use super::{check_symbols, choices, expand};

const SYMBOLS: &[(&str, usize)] = &[("enc", 2), ("dec", 2)];

/// Symmetric encryption: terms built from names with `enc` and `dec`,
/// equality modulo `dec(enc(M,k),k) = M`, assertions assigning terms to
/// variables.
#[derive(Clone, Copy, Debug, Default)]
pub struct CryptoInstance;

/// Innermost normal form under `dec(enc(M,k),k) -> M`.
pub fn normalize(t: &Term) -> Term {
    match t {
        Term::App(f, args) => {
            let args: Vec<Term> = args.iter().map(normalize).collect();
            if &**f == "dec" && args.len() == 2 {
                if let Term::App(g, inner) = &args[0] {
                    if &**g == "enc" && inner.len() == 2 && inner[1] == args[1] {
                        return inner[0].clone();
                    }
                }
            }
            Term::App(f.clone(), args)
        }
        _ => t.clone(),
    }
}

impl Instance for CryptoInstance {
    fn key(&self) -> &'static str {
        "crypto"
    }

    fn function_symbols(&self) -> &'static [(&'static str, usize)] {
        SYMBOLS
    }

    fn validate_term(&self, t: &Term) -> Result<(), String> {
        check_symbols(t, SYMBOLS, &[], false)
    }

    fn validate_condition(&self, c: &Condition) -> Result<(), String> {
        match c {
            Condition::Eq(a, b) => {
                self.validate_term(a)?;
                self.validate_term(b)
            }
            Condition::Chan(a, b) if a.as_name().is_some() && b.as_name().is_some() => Ok(()),
            Condition::Chan(..) => Err(format!("channel test `{c}` must relate names")),
            _ => Err(format!("condition `{c}` is not an equality or channel test")),
        }
    }

    fn validate_assertion(&self, a: &Assertion) -> Result<(), String> {
        for (l, r) in a.bindings() {
            if l.as_name().is_none() {
                return Err(format!("`{l}:={r}` must assign to a variable"));
            }
            self.validate_term(r)?;
        }
        Ok(())
    }

    fn entails(&self, psi: &Assertion, phi: &Condition) -> bool {
        match phi {
            Condition::Eq(a, b) => choices(psi)
                .iter()
                .any(|c| normalize(&expand(a, c)) == normalize(&expand(b, c))),
            Condition::Chan(a, b) => a == b && a.as_name().is_some(),
            _ => false,
        }
    }

    fn evaluate(&self, psi: &Assertion, m: &Term) -> Term {
        match choices(psi).first() {
            Some(c) => normalize(&expand(m, c)),
            None => normalize(m),
        }
    }

    fn probe_conditions(&self, pool: &Pool, depth: usize) -> Vec<Condition> {
        let names: Vec<Term> = pool.names.iter().map(|n| Term::Name(*n)).collect();
        let mut out = pair_probes(&self.term_domain(pool, depth), true, false, false);
        out.extend(pair_probes(&names, false, false, true));
        out
    }

    /// The first half of the pool names act as variables and are assigned
    /// terms over the second half, so sampled assertions are acyclic. At most
    /// `depth` bindings.
    fn assertion_domain(&self, pool: &Pool, depth: usize) -> Vec<Assertion> {
        if pool.names.len() < 2 {
            return vec![Assertion::unit()];
        }
        let split = pool.names.len() / 2;
        let vars = &pool.names[..split];
        let values = grow_terms(
            pool.names[split..].iter().map(|n| Term::Name(*n)).collect(),
            SYMBOLS,
            1,
        );
        let singles: Vec<(Term, Term)> = vars
            .iter()
            .flat_map(|x| values.iter().map(move |v| (Term::Name(*x), v.clone())))
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nominal::Name;

    fn enc(m: Term, k: Term) -> Term {
        Term::app("enc", vec![m, k])
    }

    fn dec(m: Term, k: Term) -> Term {
        Term::app("dec", vec![m, k])
    }

    #[test]
    fn decryption_cancels() {
        let (a, k) = (Term::name("a"), Term::name("k"));
        let inst = CryptoInstance;
        assert_eq!(inst.evaluate(&Assertion::unit(), &dec(enc(a.clone(), k.clone()), k.clone())), a);
        let x = Name::new("x");
        let psi = Assertion::assign(x, enc(a.clone(), k.clone()));
        assert_eq!(inst.evaluate(&psi, &dec(Term::Name(x), k.clone())), a);
        // wrong key does not cancel
        let j = Term::name("j");
        assert_eq!(
            inst.evaluate(&Assertion::unit(), &dec(enc(a.clone(), k.clone()), j.clone())),
            dec(enc(a, k), j)
        );
    }

    #[test]
    fn reflexive_equality_always_holds() {
        let x = Term::name("x");
        let psi = Assertion::assign(Name::new("x"), enc(Term::name("a"), Term::name("k")));
        assert!(CryptoInstance.entails(&psi, &Condition::Eq(x.clone(), x)));
    }

    #[test]
    fn cyclic_assignments_terminate() {
        let x = Name::new("x");
        let psi = Assertion::assign(x, enc(Term::Name(x), Term::name("k")));
        let t = CryptoInstance.evaluate(&psi, &Term::Name(x));
        assert_eq!(t, enc(Term::Name(x), Term::name("k")));
    }
}
