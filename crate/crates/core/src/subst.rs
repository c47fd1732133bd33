use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::term::{canonical_app, Node, Signature, Term, Var};

/// Finite map from variables to terms.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a substitution, rejecting bindings that do not preserve sorts.
    pub fn from_pairs(
        sig: &Signature,
        pairs: impl IntoIterator<Item = (Var, Term)>,
    ) -> Result<Self> {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            if !sig.leq(t.sort(), &v.sort) {
                return Err(Error::Sort(format!(
                    "cannot bind {}:{} to {t:?} of sort {}",
                    v.name,
                    v.sort,
                    t.sort()
                )));
            }
            s.insert(v, t);
        }
        Ok(s)
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: Var, t: Term) {
        self.0.insert(v, t);
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.0.contains_key(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn lookup_name(&self, name: &str) -> Option<(&Var, &Term)> {
        self.0.iter().find(|(v, _)| &*v.name == name)
    }

    /// Adds all bindings of `other`; bindings already present win.
    pub fn extend(&mut self, other: &Substitution) {
        for (v, t) in other.iter() {
            self.0.entry(v.clone()).or_insert_with(|| t.clone());
        }
    }

    /// Homomorphic replacement followed by canonicalization.
    pub fn apply(&self, t: &Term) -> Term {
        if self.0.is_empty() {
            return t.clone();
        }
        match t.node() {
            Node::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| t.clone()),
            Node::App(op, args) => {
                if t.is_ground() {
                    return t.clone();
                }
                canonical_app(op.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// `self` followed by `other`: (other ∘ self)(x) = other(self(x)).
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out: BTreeMap<Var, Term> =
            self.0.iter().map(|(v, t)| (v.clone(), other.apply(t))).collect();
        for (v, t) in other.iter() {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        out.retain(|v, t| t.as_var() != Some(v));
        Substitution(out)
    }

    pub fn restrict(&self, keep: &dyn Fn(&Var) -> bool) -> Substitution {
        Substitution(
            self.0
                .iter()
                .filter(|(v, _)| keep(v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        )
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} -> {t:?}", v.name)?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}
