//! Term rewriting with a strategy language and Knuth-Bendix completion
//! procedures written as strategies over inference rules.

pub mod completion;
pub mod error;
pub mod matching;
pub mod module;
pub mod rewrite;
pub mod session;
pub mod strategy;
pub mod subst;
pub mod syntax;
pub mod term;
pub mod unify;

pub use error::{Error, Result};
pub use module::{AttachmentRegistry, Condition, Equation, Fragment, Module, Rule};
pub use rewrite::{Budgets, Rewriter, Where};
pub use session::{Flow, Session};
pub use strategy::{Evaluator, Strategy, StrategyModule, TermSet};
pub use subst::Substitution;
pub use term::{canonicalize, term_order, Op, OpAttrs, Position, Signature, Term, Var};
