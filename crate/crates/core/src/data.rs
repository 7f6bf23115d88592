//! Terms, conditions and assertions.
//!
//! All shipped instances share these representations; an instance decides
//! which function symbols and condition forms are legal and what they mean.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::nominal::{Alpha, CanonEnv, Name, Nominal, NominalError, Subst, Substitution};

pub type Sym = Arc<str>;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Name(Name),
    Int(i64),
    App(Sym, Vec<Term>),
}

impl Term {
    pub fn name(label: &str) -> Term {
        Term::Name(Name::new(label))
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::from(f), args)
    }

    pub fn as_name(&self) -> Option<Name> {
        match self {
            Term::Name(n) => Some(*n),
            _ => None,
        }
    }

    /// Constructor nesting depth; names, literals and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Name(_) | Term::Int(_) => 0,
            Term::App(_, args) if args.is_empty() => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn map_names(&self, f: &mut impl FnMut(Name) -> Term) -> Term {
        match self {
            Term::Name(n) => f(*n),
            Term::Int(i) => Term::Int(*i),
            Term::App(s, args) => Term::App(s.clone(), args.iter().map(|a| a.map_names(f)).collect()),
        }
    }
}

impl Nominal for Term {
    fn swap(&self, a: Name, b: Name) -> Self {
        self.map_names(&mut |n| Term::Name(n.swap(a, b)))
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Name(n) => {
                out.insert(*n);
            }
            Term::Int(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_support(out)),
        }
    }
}

impl Subst for Term {
    fn subst(&self, s: &Substitution) -> Result<Self, NominalError> {
        Ok(self.map_names(&mut |n| s.get(n).cloned().unwrap_or(Term::Name(n))))
    }
}

impl Alpha for Term {
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        self.map_names(&mut |n| Term::Name(env.rename(n)))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name(n) => write!(f, "{n}"),
            Term::Int(i) => write!(f, "{i}"),
            Term::App(s, args) if args.is_empty() => write!(f, "{s}"),
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Condition {
    Eq(Term, Term),
    Neq(Term, Term),
    /// Channel equivalence `M <-> N`.
    Chan(Term, Term),
    Pred(Sym, Vec<Term>),
}

impl Condition {
    pub fn chan(m: &Term, n: &Term) -> Condition {
        Condition::Chan(m.clone(), n.clone())
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Condition::Eq(a, b) | Condition::Neq(a, b) | Condition::Chan(a, b) => vec![a, b],
            Condition::Pred(_, args) => args.iter().collect(),
        }
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Condition {
        match self {
            Condition::Eq(a, b) => Condition::Eq(f(a), f(b)),
            Condition::Neq(a, b) => Condition::Neq(f(a), f(b)),
            Condition::Chan(a, b) => Condition::Chan(f(a), f(b)),
            Condition::Pred(p, args) => Condition::Pred(p.clone(), args.iter().map(f).collect()),
        }
    }
}

impl Nominal for Condition {
    fn swap(&self, a: Name, b: Name) -> Self {
        self.map_terms(&mut |t| t.swap(a, b))
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        self.terms().into_iter().for_each(|t| t.collect_support(out))
    }
}

impl Subst for Condition {
    fn subst(&self, s: &Substitution) -> Result<Self, NominalError> {
        let mut err = None;
        let c = self.map_terms(&mut |t| match t.subst(s) {
            Ok(t) => t,
            Err(e) => {
                err = Some(e);
                t.clone()
            }
        });
        err.map_or(Ok(c), Err)
    }
}

impl Alpha for Condition {
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        self.map_terms(&mut |t| t.canon_with(env))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Eq(a, b) => write!(f, "{a}={b}"),
            Condition::Neq(a, b) => write!(f, "{a}<>{b}"),
            Condition::Chan(a, b) => write!(f, "{a}<->{b}"),
            Condition::Pred(p, args) => {
                write!(f, "{p}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A finite set of bindings `lhs := rhs`; the empty set is the unit.
///
/// Composition is set union, so composition is commutative, associative and
/// has the unit as identity on the nose.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Assertion {
    bindings: BTreeSet<(Term, Term)>,
}

impl Assertion {
    pub fn unit() -> Assertion {
        Assertion::default()
    }

    pub fn is_unit(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn binding(lhs: Term, rhs: Term) -> Assertion {
        let mut bindings = BTreeSet::new();
        bindings.insert((lhs, rhs));
        Assertion { bindings }
    }

    pub fn assign(var: Name, value: Term) -> Assertion {
        Assertion::binding(Term::Name(var), value)
    }

    pub fn from_bindings(it: impl IntoIterator<Item = (Term, Term)>) -> Assertion {
        Assertion {
            bindings: it.into_iter().collect(),
        }
    }

    pub fn bindings(&self) -> impl Iterator<Item = &(Term, Term)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn compose(&self, other: &Assertion) -> Assertion {
        let mut bindings = self.bindings.clone();
        bindings.extend(other.bindings.iter().cloned());
        Assertion { bindings }
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Assertion {
        Assertion {
            bindings: self.bindings.iter().map(|(l, r)| (f(l), f(r))).collect(),
        }
    }
}

impl Nominal for Assertion {
    fn swap(&self, a: Name, b: Name) -> Self {
        self.map_terms(&mut |t| t.swap(a, b))
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        for (l, r) in &self.bindings {
            l.collect_support(out);
            r.collect_support(out);
        }
    }
}

impl Subst for Assertion {
    fn subst(&self, s: &Substitution) -> Result<Self, NominalError> {
        let mut out = BTreeSet::new();
        for (l, r) in &self.bindings {
            out.insert((l.subst(s)?, r.subst(s)?));
        }
        Ok(Assertion { bindings: out })
    }
}

impl Alpha for Assertion {
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        self.map_terms(&mut |t| t.canon_with(env))
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bindings.is_empty() {
            return f.write_str("1");
        }
        for (i, (l, r)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}:={r}")?;
        }
        Ok(())
    }
}

macro_rules! serialize_as_text {
    ($($t:ty),*) => {$(
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
    )*};
}

serialize_as_text!(Term, Condition, Assertion);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_counts_nesting() {
        let a = Term::name("a");
        let k = Term::name("k");
        assert_eq!(a.depth(), 0);
        assert_eq!(Term::app("F", vec![]).depth(), 0);
        let e = Term::app("enc", vec![a.clone(), k.clone()]);
        assert_eq!(e.depth(), 1);
        assert_eq!(Term::app("dec", vec![e, k]).depth(), 2);
    }

    #[test]
    fn composition_is_union() {
        let x = Name::new("x");
        let p = Assertion::assign(x, Term::Int(3));
        let q = Assertion::assign(x, Term::Int(4));
        assert_eq!(p.compose(&q), q.compose(&p));
        assert_eq!(p.compose(&Assertion::unit()), p);
        assert_eq!(p.compose(&q).len(), 2);
    }

    #[test]
    fn swap_pair() {
        let (a, b) = (Name::new("a"), Name::new("b"));
        let t = Term::app("pair", vec![Term::Name(a), Term::Name(b)]);
        assert_eq!(t.swap(a, b), Term::app("pair", vec![Term::Name(b), Term::Name(a)]));
        assert_eq!(t.swap(a, a), t);
        assert_eq!(t.support(), [a, b].into_iter().collect());
    }
}
