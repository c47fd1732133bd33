use std::collections::BTreeMap;
use std::sync::Arc;

use crate::module::Condition;
use crate::term::{Sort, Term, Var};

/// Where a test or `matchrew` looks for its pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Top,
    Anywhere,
}

/// Strategy expressions, one constructor per combinator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Idle,
    Fail,
    /// `label[x <- t ; ...]{s1, ..., sn}`, optionally wrapped in `top(...)`.
    Rule {
        label: Arc<str>,
        subst: Vec<(Arc<str>, Term)>,
        cond_strats: Vec<Strategy>,
        top: bool,
    },
    /// `match p s.t. C` / `amatch p s.t. C`.
    Test {
        kind: MatchKind,
        pattern: Term,
        cond: Condition,
    },
    Concat(Box<Strategy>, Box<Strategy>),
    Union(Box<Strategy>, Box<Strategy>),
    Plus(Box<Strategy>),
    Star(Box<Strategy>),
    Bang(Box<Strategy>),
    /// `s ? s' : s''`.
    Cond(Box<Strategy>, Box<Strategy>, Box<Strategy>),
    OrElse(Box<Strategy>, Box<Strategy>),
    Not(Box<Strategy>),
    Try(Box<Strategy>),
    TestOf(Box<Strategy>),
    /// `matchrew p s.t. C by p1 using s1, ...` / `amatchrew ...`.
    MatchRew {
        kind: MatchKind,
        pattern: Term,
        cond: Condition,
        subs: Vec<(Term, Strategy)>,
    },
    /// Call of a named strategy with data arguments.
    Call { name: Arc<str>, args: Vec<Term> },
}

impl Strategy {
    pub fn rule(label: &str) -> Strategy {
        Strategy::Rule {
            label: label.into(),
            subst: Vec::new(),
            cond_strats: Vec::new(),
            top: false,
        }
    }

    pub fn call(name: &str) -> Strategy {
        Strategy::Call {
            name: name.into(),
            args: Vec::new(),
        }
    }

    pub fn then(self, next: Strategy) -> Strategy {
        Strategy::Concat(Box::new(self), Box::new(next))
    }

    pub fn or(self, other: Strategy) -> Strategy {
        Strategy::Union(Box::new(self), Box::new(other))
    }

    pub fn star(self) -> Strategy {
        Strategy::Star(Box::new(self))
    }

    pub fn plus(self) -> Strategy {
        Strategy::Plus(Box::new(self))
    }

    pub fn bang(self) -> Strategy {
        Strategy::Bang(Box::new(self))
    }

    pub fn or_else(self, other: Strategy) -> Strategy {
        Strategy::OrElse(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Strategy {
        Strategy::Not(Box::new(self))
    }

    pub fn try_(self) -> Strategy {
        Strategy::Try(Box::new(self))
    }

    pub fn test(self) -> Strategy {
        Strategy::TestOf(Box::new(self))
    }

    pub fn ite(self, then: Strategy, otherwise: Strategy) -> Strategy {
        Strategy::Cond(Box::new(self), Box::new(then), Box::new(otherwise))
    }

    /// Names of strategies called anywhere inside.
    pub fn called_names(&self, out: &mut Vec<Arc<str>>) {
        match self {
            Strategy::Idle | Strategy::Fail | Strategy::Test { .. } => {}
            Strategy::Rule { cond_strats, .. } => cond_strats.iter().for_each(|s| s.called_names(out)),
            Strategy::Concat(a, b) | Strategy::Union(a, b) | Strategy::OrElse(a, b) => {
                a.called_names(out);
                b.called_names(out);
            }
            Strategy::Plus(a)
            | Strategy::Star(a)
            | Strategy::Bang(a)
            | Strategy::Not(a)
            | Strategy::Try(a)
            | Strategy::TestOf(a) => a.called_names(out),
            Strategy::Cond(a, b, c) => {
                a.called_names(out);
                b.called_names(out);
                c.called_names(out);
            }
            Strategy::MatchRew { subs, .. } => subs.iter().for_each(|(_, s)| s.called_names(out)),
            Strategy::Call { name, .. } => out.push(name.clone()),
        }
    }
}

/// `strat id : S1 ... Sn @ K .`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratDecl {
    pub name: Arc<str>,
    pub arg_sorts: Vec<Sort>,
    pub subject: Sort,
}

/// `sd id(p1, ..., pn) := body .` or `csd ... if cond .`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratDef {
    pub name: Arc<str>,
    pub params: Vec<Term>,
    pub body: Strategy,
    pub cond: Condition,
}

/// A strategy module over one system module.
#[derive(Debug, Clone, Default)]
pub struct StrategyModule {
    pub name: String,
    pub system: String,
    pub includes: Vec<String>,
    pub vars: BTreeMap<String, Var>,
    pub decls: BTreeMap<Arc<str>, StratDecl>,
    pub defs: Vec<StratDef>,
}

impl StrategyModule {
    pub fn definitions<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a StratDef> + 'a {
        self.defs.iter().filter(move |d| &*d.name == name)
    }

    /// Adds the declarations and definitions of an included module.
    pub fn include(&mut self, other: &StrategyModule) {
        for (k, v) in &other.decls {
            self.decls.entry(k.clone()).or_insert_with(|| v.clone());
        }
        for d in &other.defs {
            if !self.defs.contains(d) {
                self.defs.push(d.clone());
            }
        }
        for (k, v) in &other.vars {
            self.vars.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }
}
