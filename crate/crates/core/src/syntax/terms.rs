//! Mixfix term syntax: prefix `f(a, b)`, constants, infix `_op_`,
//! juxtaposition `__`, and bracket forms such as `<_,_,_>`.

use std::collections::{BTreeMap, HashMap};

use super::lexer::Cursor;
use crate::error::{Error, Result};
use crate::term::{canonical_app, Signature, Term, Var};

pub const DEFAULT_PREC: u32 = 41;
const MAX_PREC: u32 = u32::MAX;

/// Names visible while parsing a term.
pub struct Scope<'a> {
    pub sig: &'a Signature,
    /// Variable tables, searched in order.
    pub vars: Vec<&'a BTreeMap<String, Var>>,
    pub aliases: Option<&'a BTreeMap<String, Term>>,
}

impl<'a> Scope<'a> {
    pub fn new(sig: &'a Signature, vars: &'a BTreeMap<String, Var>) -> Self {
        Scope {
            sig,
            vars: vec![vars],
            aliases: None,
        }
    }

    fn var(&self, name: &str) -> Option<&Var> {
        self.vars.iter().find_map(|m| m.get(name))
    }

    fn alias(&self, name: &str) -> Option<&Term> {
        self.aliases.and_then(|a| a.get(name))
    }
}

/// Shape of an operator name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpShape {
    Prefix,
    Infix(String),
    Juxtaposition,
    /// Literal tokens around and between the holes, e.g. `<`, `,`, `,`, `>`.
    Bracket(Vec<String>),
    Other,
}

pub fn op_shape(name: &str, arity: usize) -> OpShape {
    if !name.contains('_') {
        return OpShape::Prefix;
    }
    let parts: Vec<&str> = name.split('_').collect();
    if parts.len() != arity + 1 {
        return OpShape::Other;
    }
    if arity == 2 && parts[0].is_empty() && parts[2].is_empty() {
        return if parts[1].is_empty() {
            OpShape::Juxtaposition
        } else {
            OpShape::Infix(parts[1].to_string())
        };
    }
    if parts.iter().all(|p| !p.is_empty()) {
        return OpShape::Bracket(parts.iter().map(|s| s.to_string()).collect());
    }
    OpShape::Other
}

#[derive(Default)]
struct Tables {
    infix: HashMap<String, (String, u32)>,
    juxt: Option<u32>,
    brackets: HashMap<String, Vec<(String, Vec<String>)>>,
}

impl Tables {
    fn build(sig: &Signature) -> Self {
        let mut t = Tables::default();
        for op in sig.ops() {
            let prec = op.attrs.prec.unwrap_or(DEFAULT_PREC);
            match op_shape(&op.name, op.arity()) {
                OpShape::Infix(tok) => {
                    t.infix.insert(tok, (op.name.to_string(), prec));
                }
                OpShape::Juxtaposition => {
                    t.juxt = Some(t.juxt.map_or(prec, |p| p.max(prec)));
                }
                OpShape::Bracket(parts) => {
                    let entry = t.brackets.entry(parts[0].clone()).or_default();
                    if !entry.iter().any(|(n, _)| *n == *op.name) {
                        entry.push((op.name.to_string(), parts));
                    }
                }
                OpShape::Prefix | OpShape::Other => {}
            }
        }
        t
    }
}

enum Raw {
    Leaf(String, usize, usize),
    Node(String, Vec<Raw>, usize, usize),
}

pub struct TermParser<'s, 'c> {
    scope: &'s Scope<'s>,
    cur: &'c mut Cursor,
    tables: Tables,
}

impl<'s, 'c> TermParser<'s, 'c> {
    pub fn new(scope: &'s Scope<'s>, cur: &'c mut Cursor) -> Self {
        let tables = Tables::build(scope.sig);
        TermParser { scope, cur, tables }
    }

    /// Parses one term; stops before any token in `stops` or any token that
    /// cannot continue a term.
    pub fn term(&mut self, stops: &[&str]) -> Result<Term> {
        let raw = self.expr(MAX_PREC, stops)?;
        self.resolve(&raw)
    }

    fn starts_primary(&self, tok: &str, stops: &[&str]) -> bool {
        if stops.contains(&tok) {
            return false;
        }
        tok == "("
            || self.tables.brackets.contains_key(tok)
            || self.scope.var(tok).is_some()
            || self.scope.alias(tok).is_some()
            || (self.scope.sig.has_op_name(tok) && !tok.contains('_'))
    }

    fn expr(&mut self, max_prec: u32, stops: &[&str]) -> Result<Raw> {
        let mut left = self.primary(stops)?;
        while let Some(tok) = self.cur.peek().map(str::to_string) {
            if stops.contains(&tok.as_str()) {
                break;
            }
            if let Some((name, prec)) = self.tables.infix.get(&tok).cloned() {
                if prec > max_prec {
                    break;
                }
                let (line, col) = self.loc();
                self.cur.next();
                let right = self.expr(prec.saturating_sub(1), stops)?;
                left = Raw::Node(name, vec![left, right], line, col);
                continue;
            }
            if let Some(prec) = self.tables.juxt {
                if prec <= max_prec && self.starts_primary(&tok, stops) {
                    let (line, col) = self.loc();
                    let right = self.expr(prec.saturating_sub(1), stops)?;
                    left = Raw::Node("__".into(), vec![left, right], line, col);
                    continue;
                }
            }
            break;
        }
        Ok(left)
    }

    fn loc(&self) -> (usize, usize) {
        self.cur
            .peek_token()
            .map(|t| (t.line, t.column))
            .unwrap_or((0, 0))
    }

    fn primary(&mut self, stops: &[&str]) -> Result<Raw> {
        let Some(tok) = self.cur.peek().map(str::to_string) else {
            return Err(Error::UnexpectedEof("expected a term".into()));
        };
        let (line, col) = self.loc();
        if tok == "(" {
            self.cur.next();
            let inner = self.expr(MAX_PREC, &[")"])?;
            self.cur.expect(")")?;
            return Ok(inner);
        }
        if let Some(templates) = self.tables.brackets.get(&tok).cloned() {
            return self.bracket(&templates, line, col);
        }
        if stops.contains(&tok.as_str()) || !self.starts_primary(&tok, &[]) {
            if self.scope.sig.has_op_name(&tok) && self.cur.peek_at(1) == Some("(") {
                // Full mixfix name used in prefix form, e.g. `_+_(a, b)`.
            } else {
                return Err(self.cur.error("expected a term"));
            }
        }
        self.cur.next();
        let takes_args = self.cur.peek() == Some("(")
            && self
                .scope
                .sig
                .ops_named(&tok)
                .iter()
                .any(|o| o.arity() > 0);
        if takes_args {
            self.cur.next();
            let mut args = Vec::new();
            loop {
                args.push(self.expr(MAX_PREC, &[",", ")"])?);
                if self.cur.eat(",") {
                    continue;
                }
                self.cur.expect(")")?;
                break;
            }
            return Ok(Raw::Node(tok, args, line, col));
        }
        Ok(Raw::Leaf(tok, line, col))
    }

    fn bracket(&mut self, templates: &[(String, Vec<String>)], line: usize, col: usize) -> Result<Raw> {
        self.cur.next();
        let mut literals = vec![templates[0].1[0].clone()];
        let mut args = Vec::new();
        // Tokens that may follow a hole in any template with this opening.
        let mut seps: Vec<String> = templates
            .iter()
            .flat_map(|(_, parts)| parts[1..].iter().cloned())
            .collect();
        seps.sort();
        seps.dedup();
        let seps_ref: Vec<&str> = seps.iter().map(String::as_str).collect();
        loop {
            args.push(self.expr(MAX_PREC, &seps_ref)?);
            let Some(t) = self.cur.next().map(|t| t.text.clone()) else {
                return Err(Error::UnexpectedEof("unterminated bracket term".into()));
            };
            literals.push(t);
            if let Some((name, _)) = templates.iter().find(|(_, parts)| *parts == literals) {
                return Ok(Raw::Node(name.clone(), args, line, col));
            }
            if !templates
                .iter()
                .any(|(_, parts)| parts.len() > literals.len() && parts[..literals.len()] == literals[..])
            {
                return Err(Error::Parse {
                    line,
                    column: col,
                    message: format!("no operator matches `{}`", literals.join(" _ ")),
                });
            }
        }
    }

    fn resolve(&self, raw: &Raw) -> Result<Term> {
        match raw {
            Raw::Leaf(name, line, col) => {
                if let Some(t) = self.scope.alias(name) {
                    return Ok(t.clone());
                }
                if let Some(v) = self.scope.var(name) {
                    return Ok(Term::var(v.clone()));
                }
                let consts: Vec<_> = self
                    .scope
                    .sig
                    .ops_named(name)
                    .iter()
                    .filter(|o| o.arity() == 0)
                    .collect();
                match consts.as_slice() {
                    [c] => Ok(Term::constant(c)),
                    [] => Err(Error::Parse {
                        line: *line,
                        column: *col,
                        message: format!("unknown constant or variable `{name}`"),
                    }),
                    _ => Err(Error::Parse {
                        line: *line,
                        column: *col,
                        message: format!("ambiguous constant `{name}`"),
                    }),
                }
            }
            Raw::Node(name, args, line, col) => {
                let args = args
                    .iter()
                    .map(|a| self.resolve(a))
                    .collect::<Result<Vec<_>>>()?;
                let sorts: Vec<&str> = args.iter().map(|a| &**a.sort()).collect();
                let op = self.scope.sig.resolve(name, &sorts).map_err(|e| Error::Parse {
                    line: *line,
                    column: *col,
                    message: e.to_string(),
                })?;
                Ok(canonical_app(op, args))
            }
        }
    }
}

/// Parses a complete term from text.
pub fn parse_term(scope: &Scope<'_>, text: &str) -> Result<Term> {
    let mut cur = Cursor::new(text);
    if cur.at_end() {
        return Err(Error::EmptyInput);
    }
    let t = TermParser::new(scope, &mut cur).term(&[])?;
    if !cur.at_end() {
        return Err(cur.error("unexpected token after term"));
    }
    Ok(t)
}
