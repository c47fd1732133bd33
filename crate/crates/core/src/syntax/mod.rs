//! Surface syntax: tokens, mixfix terms, strategies, modules, printing.

pub mod lexer;
pub mod parser;
pub mod printer;
pub mod terms;

pub use lexer::{tokenize, Cursor, Token};
pub use parser::{parse_condition, parse_module, parse_smod, parse_strategy, strat_scope, Library, StratContext};
pub use printer::show;
pub use terms::{parse_term, Scope, TermParser};
