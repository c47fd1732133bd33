//! Strategy expressions, strategy modules and their evaluation.

pub mod ast;
pub mod eval;

pub use ast::{MatchKind, StratDecl, StratDef, Strategy, StrategyModule};
pub use eval::{Evaluator, Step, TermSet};
