//! Names, swapping, support, freshness, capture-avoiding substitution and
//! alpha-equivalence.
//!
//! Every syntactic category in the crate implements [`Nominal`]. Categories
//! with binders (agents, frames, constraints, transitions) additionally
//! implement [`Alpha`], which renames bound names to a canonical sequence so
//! that alpha-equivalence becomes structural equality.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::data::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NominalError {
    #[error("substitution domain has {names} names but {terms} terms")]
    LengthMismatch { names: usize, terms: usize },
    #[error("name `{0}` occurs twice in a substitution domain")]
    DuplicateDomainName(Name),
    #[error("cannot substitute non-name term `{term}` for `{name}` in a name position")]
    NotAName { name: Name, term: String },
}

struct Interner {
    strings: Vec<Arc<str>>,
    ids: HashMap<Arc<str>, u32>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(|| {
    RwLock::new(Interner {
        strings: Vec::new(),
        ids: HashMap::new(),
    })
});

/// An atomic name. Names are interned: equality is identity of the interned id.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(u32);

impl Name {
    pub fn new(label: &str) -> Name {
        if let Some(&id) = INTERNER.read().unwrap().ids.get(label) {
            return Name(id);
        }
        let mut guard = INTERNER.write().unwrap();
        if let Some(&id) = guard.ids.get(label) {
            return Name(id);
        }
        let id = guard.strings.len() as u32;
        let s: Arc<str> = Arc::from(label);
        guard.strings.push(s.clone());
        guard.ids.insert(s, id);
        Name(id)
    }

    pub fn label(&self) -> Arc<str> {
        INTERNER.read().unwrap().strings[self.0 as usize].clone()
    }

    /// Reserved names used by canonicalization. The `%` prefix cannot be
    /// produced by the parser.
    pub fn canonical(index: usize) -> Name {
        Name::new(&format!("%{index}"))
    }

    pub fn is_canonical(&self) -> bool {
        self.label().starts_with('%')
    }

    pub fn swap(self, a: Name, b: Name) -> Name {
        if self == a {
            b
        } else if self == b {
            a
        } else {
            self
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

/// A sequence of names; as a binder sequence it has no duplicates.
pub type NameSeq = Vec<Name>;

pub fn has_duplicates(names: &[Name]) -> bool {
    let mut seen = BTreeSet::new();
    !names.iter().all(|n| seen.insert(*n))
}

/// Source of fresh names for one derivation.
///
/// Generated names have the shape `hint'N`; a candidate is skipped if it is
/// in `avoid` or was handed out before. The counter starts at zero, so two
/// sessions built from the same avoid set produce the same names.
#[derive(Debug, Clone, Default)]
pub struct FreshSession {
    counter: u64,
    avoid: BTreeSet<Name>,
}

impl FreshSession {
    pub fn new(avoid: BTreeSet<Name>) -> Self {
        FreshSession { counter: 0, avoid }
    }

    pub fn avoid(&mut self, names: impl IntoIterator<Item = Name>) {
        self.avoid.extend(names);
    }

    pub fn avoids(&self, n: Name) -> bool {
        self.avoid.contains(&n)
    }

    /// Everything the session will not hand out.
    pub fn avoided(&self) -> &BTreeSet<Name> {
        &self.avoid
    }

    pub fn fresh(&mut self, hint: &str) -> Name {
        let base = hint
            .split('\'')
            .next()
            .filter(|b| !b.is_empty() && !b.starts_with('%'))
            .unwrap_or("n")
            .to_string();
        loop {
            self.counter += 1;
            let candidate = Name::new(&format!("{base}'{}", self.counter));
            if self.avoid.insert(candidate) {
                return candidate;
            }
        }
    }

    pub fn fresh_like(&mut self, n: Name) -> Name {
        self.fresh(&n.label())
    }
}

/// A value in a nominal set: it admits swapping and has finite support.
pub trait Nominal {
    fn swap(&self, a: Name, b: Name) -> Self
    where
        Self: Sized;

    /// Adds the free names to `out`.
    fn collect_support(&self, out: &mut BTreeSet<Name>);

    /// Adds every name, bound or free, to `out`.
    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        self.collect_support(out)
    }

    fn support(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_support(&mut out);
        out
    }

    fn names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn is_fresh(&self, a: Name) -> bool {
        !self.support().contains(&a)
    }
}

pub fn support_of<T: Nominal + ?Sized>(x: &T) -> BTreeSet<Name> {
    x.support()
}

pub fn is_fresh<T: Nominal + ?Sized>(a: Name, x: &T) -> bool {
    x.is_fresh(a)
}

pub fn swap<T: Nominal>(a: Name, b: Name, x: &T) -> T {
    x.swap(a, b)
}

impl Nominal for Name {
    fn swap(&self, a: Name, b: Name) -> Self {
        Name::swap(*self, a, b)
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        out.insert(*self);
    }
}

impl<T: Nominal + Clone> Nominal for Vec<T> {
    fn swap(&self, a: Name, b: Name) -> Self {
        self.iter().map(|x| x.swap(a, b)).collect()
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        self.iter().for_each(|x| x.collect_support(out))
    }
    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        self.iter().for_each(|x| x.collect_names(out))
    }
}

impl<A: Nominal, B: Nominal> Nominal for (A, B) {
    fn swap(&self, a: Name, b: Name) -> Self {
        (self.0.swap(a, b), self.1.swap(a, b))
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        self.0.collect_support(out);
        self.1.collect_support(out);
    }
    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        self.0.collect_names(out);
        self.1.collect_names(out);
    }
}

impl Nominal for BTreeSet<Name> {
    fn swap(&self, a: Name, b: Name) -> Self {
        self.iter().map(|n| n.swap(a, b)).collect()
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        out.extend(self.iter().copied())
    }
}

/// Simultaneous substitution of terms for names.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    map: BTreeMap<Name, Term>,
}

impl Substitution {
    pub fn identity() -> Self {
        Substitution::default()
    }

    pub fn new(names: &[Name], terms: &[Term]) -> Result<Self, NominalError> {
        if names.len() != terms.len() {
            return Err(NominalError::LengthMismatch {
                names: names.len(),
                terms: terms.len(),
            });
        }
        let mut map = BTreeMap::new();
        for (n, t) in names.iter().zip(terms) {
            if map.insert(*n, t.clone()).is_some() {
                return Err(NominalError::DuplicateDomainName(*n));
            }
        }
        Ok(Substitution { map })
    }

    pub fn single(name: Name, term: Term) -> Self {
        let mut map = BTreeMap::new();
        map.insert(name, term);
        Substitution { map }
    }

    pub fn from_map(map: BTreeMap<Name, Term>) -> Self {
        Substitution { map }
    }

    pub fn get(&self, n: Name) -> Option<&Term> {
        self.map.get(&n)
    }

    pub fn insert(&mut self, n: Name, t: Term) {
        self.map.insert(n, t);
    }

    pub fn remove(&mut self, n: Name) -> Option<Term> {
        self.map.remove(&n)
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(n, t)| *t == Term::Name(*n))
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = Name> + '_ {
        self.map.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.map.iter()
    }

    pub fn as_map(&self) -> &BTreeMap<Name, Term> {
        &self.map
    }

    /// Names occurring in the range.
    pub fn range_support(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.map.values().for_each(|t| t.collect_support(&mut out));
        out
    }

    /// Drops the binding for a name going under a binder.
    pub fn without(&self, n: Name) -> Substitution {
        let mut s = self.clone();
        s.map.remove(&n);
        s
    }

    /// Keeps only the bindings whose names satisfy `keep`.
    pub fn restrict(&self, keep: impl Fn(Name) -> bool) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(n, _)| keep(**n))
                .map(|(n, t)| (*n, t.clone()))
                .collect(),
        }
    }

    /// Names mentioned by the substitution at all: domain and range.
    pub fn mentioned(&self) -> BTreeSet<Name> {
        let mut out = self.range_support();
        out.extend(self.map.keys().copied());
        out
    }

    /// Whether descending under a binder `b` would capture a range name of a
    /// binding that is relevant for `body_support`.
    pub fn captures(&self, b: Name, body_support: &BTreeSet<Name>) -> bool {
        self.map
            .iter()
            .any(|(n, t)| *n != b && body_support.contains(n) && !t.is_fresh(b))
    }
}

impl Nominal for Substitution {
    fn swap(&self, a: Name, b: Name) -> Self {
        Substitution {
            map: self
                .map
                .iter()
                .map(|(n, t)| (n.swap(a, b), t.swap(a, b)))
                .collect(),
        }
    }
    fn collect_support(&self, out: &mut BTreeSet<Name>) {
        out.extend(self.mentioned());
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.map.is_empty() {
            return f.write_str("Id");
        }
        f.write_str("[")?;
        for (i, (n, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}/{n}")?;
        }
        f.write_str("]")
    }
}

/// Capture-avoiding simultaneous substitution.
pub trait Subst: Nominal + Sized {
    fn subst(&self, s: &Substitution) -> Result<Self, NominalError>;
}

pub fn substitute<T: Subst>(x: &T, names: &[Name], terms: &[Term]) -> Result<T, NominalError> {
    let s = Substitution::new(names, terms)?;
    x.subst(&s)
}

impl Subst for Name {
    /// Names in name positions may only be renamed.
    fn subst(&self, s: &Substitution) -> Result<Self, NominalError> {
        match s.get(*self) {
            None => Ok(*self),
            Some(Term::Name(m)) => Ok(*m),
            Some(t) => Err(NominalError::NotAName {
                name: *self,
                term: t.to_string(),
            }),
        }
    }
}

impl<T: Subst + Clone> Subst for Vec<T> {
    fn subst(&self, s: &Substitution) -> Result<Self, NominalError> {
        self.iter().map(|x| x.subst(s)).collect()
    }
}

/// Prepares descent under binder `b` into a body with support `body_support`.
///
/// Returns the binder to use (renamed when the substitution would capture it)
/// and the substitution to apply underneath.
pub fn enter_binder(
    b: Name,
    body_support: &BTreeSet<Name>,
    s: &Substitution,
) -> (Name, Substitution) {
    let inner = s.without(b);
    if !inner.captures(b, body_support) {
        return (b, inner);
    }
    let mut avoid = body_support.clone();
    avoid.extend(inner.mentioned());
    avoid.insert(b);
    let fresh = FreshSession::new(avoid).fresh_like(b);
    (fresh, inner)
}

/// Scoped renaming environment used while computing canonical forms.
#[derive(Debug, Default)]
pub struct CanonEnv {
    map: HashMap<Name, Name>,
    next: usize,
}

impl CanonEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `b` to the next canonical name and returns it together with the
    /// previous mapping, to be restored with [`CanonEnv::unbind`].
    pub fn bind(&mut self, b: Name) -> (Name, Option<Name>) {
        let c = Name::canonical(self.next);
        self.next += 1;
        (c, self.map.insert(b, c))
    }

    pub fn unbind(&mut self, b: Name, previous: Option<Name>) {
        match previous {
            Some(p) => self.map.insert(b, p),
            None => self.map.remove(&b),
        };
    }

    pub fn rename(&self, n: Name) -> Name {
        self.map.get(&n).copied().unwrap_or(n)
    }
}

/// Types identified up to renaming of bound names.
pub trait Alpha: Nominal + Sized {
    fn canon_with(&self, env: &mut CanonEnv) -> Self;

    fn canonical(&self) -> Self {
        self.canon_with(&mut CanonEnv::new())
    }

    fn alpha_eq(&self, other: &Self) -> bool
    where
        Self: PartialEq,
    {
        self.canonical() == other.canonical()
    }
}

pub fn alpha_eq<T: Alpha + PartialEq>(x: &T, y: &T) -> bool {
    x.alpha_eq(y)
}

impl Alpha for Name {
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        env.rename(*self)
    }
}

impl<T: Alpha + Clone> Alpha for Vec<T> {
    fn canon_with(&self, env: &mut CanonEnv) -> Self {
        self.iter().map(|x| x.canon_with(env)).collect()
    }
}

/// Renames `from` to `to` in `x`, where `to` is fresh for `x`.
pub fn rename<T: Nominal>(x: &T, from: Name, to: Name) -> T {
    x.swap(from, to)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_names_distinct_and_avoiding() {
        let a = Name::new("a");
        let mut s = FreshSession::new([a].into_iter().collect());
        let mut seen = BTreeSet::new();
        for _ in 0..10_000 {
            let n = s.fresh("a");
            assert_ne!(n, a);
            assert!(seen.insert(n));
        }
    }

    #[test]
    fn fresh_is_deterministic_per_avoid_set() {
        let avoid: BTreeSet<Name> = [Name::new("x"), Name::new("x'1")].into_iter().collect();
        let n1 = FreshSession::new(avoid.clone()).fresh("x");
        let n2 = FreshSession::new(avoid).fresh("x");
        assert_eq!(n1, n2);
        assert_eq!(&*n1.label(), "x'2");
    }

    #[test]
    fn substitution_errors() {
        let a = Name::new("a");
        assert_eq!(
            Substitution::new(&[a], &[]),
            Err(NominalError::LengthMismatch { names: 1, terms: 0 })
        );
        let t = Term::Name(a);
        assert_eq!(
            Substitution::new(&[a, a], &[t.clone(), t]),
            Err(NominalError::DuplicateDomainName(a))
        );
    }

    #[test]
    fn name_position_rejects_terms() {
        let a = Name::new("a");
        let s = Substitution::single(a, Term::Int(3));
        assert!(matches!(a.subst(&s), Err(NominalError::NotAName { .. })));
        let s = Substitution::single(a, Term::Name(Name::new("b")));
        assert_eq!(a.subst(&s).unwrap(), Name::new("b"));
    }
}
