//! System modules: signature, variables, equations, rules and native attachments.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::term::{Signature, Term, Var};

/// One conjunct of a rule or equation condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fragment {
    /// `t = t'`: equal normal forms.
    Equal(Term, Term),
    /// `t =/= t'`: distinct normal forms.
    NotEqual(Term, Term),
    /// `p := t`: match `p` against the normal form of `t`.
    Assign(Term, Term),
    /// Application of a native boolean test, e.g. `s > t`.
    Native(Term),
    /// `t => p`: some term reachable from `t` matches `p`.
    Rewrite(Term, Term),
}

impl Fragment {
    pub fn is_rewrite(&self) -> bool {
        matches!(self, Fragment::Rewrite(..))
    }

    fn terms(&self) -> Vec<&Term> {
        match self {
            Fragment::Equal(a, b)
            | Fragment::NotEqual(a, b)
            | Fragment::Assign(a, b)
            | Fragment::Rewrite(a, b) => vec![a, b],
            Fragment::Native(t) => vec![t],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Condition(pub Vec<Fragment>);

impl Condition {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rewrite_fragments(&self) -> usize {
        self.0.iter().filter(|f| f.is_rewrite()).count()
    }

    pub fn vars(&self) -> std::collections::BTreeSet<Var> {
        let mut out = std::collections::BTreeSet::new();
        for f in &self.0 {
            for t in f.terms() {
                t.collect_vars(&mut out);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub label: Arc<str>,
    pub lhs: Term,
    pub rhs: Term,
    pub condition: Condition,
}

impl Rule {
    pub fn vars(&self) -> std::collections::BTreeSet<Var> {
        let mut vs = self.lhs.vars();
        vs.extend(self.rhs.vars());
        vs.extend(self.condition.vars());
        vs
    }
}

pub type NativeTest = Arc<dyn Fn(&[Term]) -> Result<bool> + Send + Sync>;
pub type NativeFunction = Arc<dyn Fn(&[Term]) -> Result<Option<Term>> + Send + Sync>;

/// Native implementation of an operator marked `native`.
#[derive(Clone)]
pub enum Native {
    /// Boolean test usable as a bare condition fragment.
    Test(NativeTest),
    /// Partial function evaluated during normalization; `None` leaves the call stuck.
    Function(NativeFunction),
}

/// Attachment name to native implementation.
#[derive(Clone, Default)]
pub struct AttachmentRegistry(BTreeMap<String, Native>);

impl AttachmentRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_test(&mut self, name: &str, f: impl Fn(&[Term]) -> Result<bool> + Send + Sync + 'static) {
        self.0.insert(name.to_string(), Native::Test(Arc::new(f)));
    }

    pub fn insert_function(
        &mut self,
        name: &str,
        f: impl Fn(&[Term]) -> Result<Option<Term>> + Send + Sync + 'static,
    ) {
        self.0.insert(name.to_string(), Native::Function(Arc::new(f)));
    }

    pub fn get(&self, name: &str) -> Result<&Native> {
        self.0
            .get(name)
            .ok_or_else(|| Error::Config(format!("no native attachment named `{name}`")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn extend(&mut self, other: &AttachmentRegistry) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }
}

impl fmt::Debug for AttachmentRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.keys()).finish()
    }
}

/// A loaded system module.
#[derive(Debug, Clone, Default)]
pub struct Module {
    pub name: String,
    pub sig: Signature,
    pub vars: BTreeMap<String, Var>,
    pub equations: Vec<Equation>,
    pub rules: Vec<Rule>,
    pub attachments: AttachmentRegistry,
    /// Raw `prec f > g > h .` chains, in declaration order.
    pub precedence: Vec<Vec<String>>,
    /// Named identity sets for completion.
    pub identities: BTreeMap<String, Vec<(Term, Term)>>,
    /// Names the term parser expands to fixed terms.
    pub aliases: BTreeMap<String, Term>,
}

impl Module {
    pub fn new(name: &str) -> Self {
        Module {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn rules_labeled(&self, label: &str) -> Vec<&Rule> {
        self.rules.iter().filter(|r| &*r.label == label).collect()
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.rules.iter().any(|r| &*r.label == label)
    }

    pub fn declare_var(&mut self, name: &str, sort: &str) -> Result<()> {
        let sort = self.sig.sort(sort)?;
        self.vars.insert(
            name.to_string(),
            Var {
                name: name.into(),
                sort,
            },
        );
        Ok(())
    }

    /// Checks rule and equation invariants after loading.
    pub fn validate(&self) -> Result<()> {
        for eq in &self.equations {
            self.sig.check(&eq.lhs)?;
            self.sig.check(&eq.rhs)?;
            let mut bound = eq.lhs.vars();
            for f in &eq.condition.0 {
                if let Fragment::Assign(p, _) | Fragment::Rewrite(_, p) = f {
                    bound.extend(p.vars());
                }
            }
            if let Some(v) = eq.rhs.vars().difference(&bound).next() {
                return Err(Error::Sort(format!(
                    "equation {:?} = {:?}: variable `{}` of the right-hand side is unbound",
                    eq.lhs, eq.rhs, v.name
                )));
            }
        }
        for r in &self.rules {
            if r.lhs.is_var() {
                return Err(Error::Sort(format!("rule [{}] has a variable left-hand side", r.label)));
            }
            self.sig.check(&r.lhs)?;
            self.sig.check(&r.rhs)?;
            if !self.sig.leq(r.rhs.sort(), r.lhs.sort()) && !self.sig.leq(r.lhs.sort(), r.rhs.sort())
            {
                return Err(Error::Sort(format!(
                    "rule [{}] relates sorts {} and {}",
                    r.label,
                    r.lhs.sort(),
                    r.rhs.sort()
                )));
            }
        }
        Ok(())
    }

    /// Every `native` operator must have a registered attachment.
    pub fn check_attachments(&self) -> Result<()> {
        for op in self.sig.ops() {
            if op.attrs.native && !self.attachments.contains(&op.name) {
                return Err(Error::Config(format!(
                    "operator `{}` is native but no attachment is registered",
                    op.name
                )));
            }
        }
        Ok(())
    }

    /// Imports everything from `other` (used for `protecting`).
    pub fn import(&mut self, other: &Module) -> Result<()> {
        self.sig.import(&other.sig)?;
        for (k, v) in &other.vars {
            self.vars.entry(k.clone()).or_insert_with(|| v.clone());
        }
        self.equations.extend(other.equations.iter().cloned());
        self.rules.extend(other.rules.iter().cloned());
        self.attachments.extend(&other.attachments);
        self.precedence.extend(other.precedence.iter().cloned());
        for (k, v) in &other.identities {
            self.identities.entry(k.clone()).or_insert_with(|| v.clone());
        }
        for (k, v) in &other.aliases {
            self.aliases.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Ok(())
    }
}
