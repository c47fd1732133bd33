//! Parsers for conditions, strategy expressions, `mod` and `smod` blocks.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::lexer::Cursor;
use super::terms::{Scope, TermParser};
use crate::error::{Error, Result};
use crate::module::{Condition, Equation, Fragment, Module, Rule};
use crate::strategy::{MatchKind, StratDecl, StratDef, Strategy, StrategyModule};
use crate::term::{OpAttrs, Term, Var};

/// Modules loaded so far, by name.
#[derive(Debug, Clone, Default)]
pub struct Library {
    pub modules: BTreeMap<String, Module>,
    pub smods: BTreeMap<String, StrategyModule>,
}

fn term(scope: &Scope<'_>, cur: &mut Cursor, stops: &[&str]) -> Result<Term> {
    TermParser::new(scope, cur).term(stops)
}

fn with<'a>(stops: &[&'a str], more: &[&'a str]) -> Vec<&'a str> {
    let mut v = more.to_vec();
    v.extend_from_slice(stops);
    v
}

/// Parses `frag /\ frag /\ ...`, stopping before any of `stops`.
pub fn parse_condition(scope: &Scope<'_>, cur: &mut Cursor, stops: &[&str]) -> Result<Condition> {
    let mut frags = Vec::new();
    let lhs_stops = with(stops, &["=", "=/=", ":=", "=>", "/\\"]);
    let rhs_stops = with(stops, &["/\\"]);
    loop {
        let (line, column) = cur.peek_token().map(|t| (t.line, t.column)).unwrap_or((0, 0));
        let lhs = term(scope, cur, &lhs_stops)?;
        let frag = match cur.peek() {
            Some("=") => {
                cur.next();
                Fragment::Equal(lhs, term(scope, cur, &rhs_stops)?)
            }
            Some("=/=") => {
                cur.next();
                Fragment::NotEqual(lhs, term(scope, cur, &rhs_stops)?)
            }
            Some(":=") => {
                cur.next();
                Fragment::Assign(lhs, term(scope, cur, &rhs_stops)?)
            }
            Some("=>") => {
                cur.next();
                Fragment::Rewrite(lhs, term(scope, cur, &rhs_stops)?)
            }
            _ => {
                if !lhs.op().is_some_and(|o| o.attrs.native) {
                    return Err(Error::Parse {
                        line,
                        column,
                        message: "a bare condition fragment must apply a native test".into(),
                    });
                }
                Fragment::Native(lhs)
            }
        };
        frags.push(frag);
        if !cur.eat("/\\") {
            return Ok(Condition(frags));
        }
    }
}

/// Names a strategy expression may refer to.
pub struct StratContext<'a> {
    pub scope: Scope<'a>,
    pub system: &'a Module,
    pub strategies: &'a BTreeSet<String>,
}

/// Parses a strategy expression.
pub fn parse_strategy(ctx: &StratContext<'_>, cur: &mut Cursor) -> Result<Strategy> {
    stacker::maybe_grow(32 * 1024, 1024 * 1024, || strat_cond(ctx, cur))
}

fn strat_cond(ctx: &StratContext<'_>, cur: &mut Cursor) -> Result<Strategy> {
    let first = strat_union(ctx, cur)?;
    if cur.eat("?") {
        let then = parse_strategy(ctx, cur)?;
        cur.expect(":")?;
        let otherwise = parse_strategy(ctx, cur)?;
        return Ok(first.ite(then, otherwise));
    }
    if cur.eat("orelse") {
        let rest = parse_strategy(ctx, cur)?;
        return Ok(first.or_else(rest));
    }
    Ok(first)
}

fn strat_union(ctx: &StratContext<'_>, cur: &mut Cursor) -> Result<Strategy> {
    let mut s = strat_concat(ctx, cur)?;
    while cur.eat("|") {
        s = s.or(strat_concat(ctx, cur)?);
    }
    Ok(s)
}

fn strat_concat(ctx: &StratContext<'_>, cur: &mut Cursor) -> Result<Strategy> {
    let mut s = strat_postfix(ctx, cur)?;
    while cur.eat(";") {
        s = s.then(strat_postfix(ctx, cur)?);
    }
    Ok(s)
}

fn strat_postfix(ctx: &StratContext<'_>, cur: &mut Cursor) -> Result<Strategy> {
    let mut s = strat_atom(ctx, cur)?;
    loop {
        s = match cur.peek() {
            Some("+") => s.plus(),
            Some("*") => s.star(),
            Some("!") => s.bang(),
            _ => return Ok(s),
        };
        cur.next();
    }
}

const PATTERN_STOPS: &[&str] = &[
    ".", ";", "|", "?", ":", "orelse", "s.t.", "by", "using", ",", ")", "]", "}", "if",
];
const MATCH_COND_STOPS: &[&str] = &[
    ".", ";", "|", "?", ":", "orelse", "by", "using", ",", ")", "]", "}", "if",
];

fn strat_atom(ctx: &StratContext<'_>, cur: &mut Cursor) -> Result<Strategy> {
    let Some(tok) = cur.peek().map(str::to_string) else {
        return Err(Error::UnexpectedEof("expected a strategy".into()));
    };
    let kind = |t: &str| if t.starts_with('a') { MatchKind::Anywhere } else { MatchKind::Top };
    match tok.as_str() {
        "idle" => {
            cur.next();
            Ok(Strategy::Idle)
        }
        "fail" => {
            cur.next();
            Ok(Strategy::Fail)
        }
        "(" => {
            cur.next();
            let s = parse_strategy(ctx, cur)?;
            cur.expect(")")?;
            Ok(s)
        }
        "not" | "try" | "test" if cur.peek_at(1) == Some("(") => {
            cur.next();
            cur.next();
            let s = parse_strategy(ctx, cur)?;
            cur.expect(")")?;
            Ok(match tok.as_str() {
                "not" => s.not(),
                "try" => s.try_(),
                _ => s.test(),
            })
        }
        "top" if cur.peek_at(1) == Some("(") => {
            cur.next();
            cur.next();
            let s = strat_atom(ctx, cur)?;
            cur.expect(")")?;
            match s {
                Strategy::Rule {
                    label,
                    subst,
                    cond_strats,
                    ..
                } => Ok(Strategy::Rule {
                    label,
                    subst,
                    cond_strats,
                    top: true,
                }),
                _ => Err(cur.error("`top` applies only to a rule application")),
            }
        }
        "match" | "amatch" => {
            cur.next();
            let pattern = term(&ctx.scope, cur, PATTERN_STOPS)?;
            let cond = if cur.eat("s.t.") {
                parse_condition(&ctx.scope, cur, MATCH_COND_STOPS)?
            } else {
                Condition::default()
            };
            Ok(Strategy::Test {
                kind: kind(&tok),
                pattern,
                cond,
            })
        }
        "matchrew" | "amatchrew" => {
            cur.next();
            let pattern = term(&ctx.scope, cur, PATTERN_STOPS)?;
            let cond = if cur.eat("s.t.") {
                parse_condition(&ctx.scope, cur, MATCH_COND_STOPS)?
            } else {
                Condition::default()
            };
            cur.expect("by")?;
            let mut subs = Vec::new();
            loop {
                let p = term(&ctx.scope, cur, &["using"])?;
                cur.expect("using")?;
                let s = parse_strategy(ctx, cur)?;
                subs.push((p, s));
                if !cur.eat(",") {
                    break;
                }
            }
            check_matchrew(&pattern, &subs).map_err(|m| cur.error(&m))?;
            Ok(Strategy::MatchRew {
                kind: kind(&tok),
                pattern,
                cond,
                subs,
            })
        }
        _ => named(ctx, cur, tok),
    }
}

/// Subpatterns must be distinct, non-overlapping subterms of the main pattern.
fn check_matchrew(pattern: &Term, subs: &[(Term, Strategy)]) -> std::result::Result<(), String> {
    let positions = pattern.positions();
    let mut chosen = Vec::new();
    for (p, _) in subs {
        let Some(pos) = positions
            .iter()
            .find(|q| pattern.subterm(q) == Some(p) && !chosen.contains(*q))
        else {
            return Err("matchrew subpattern is not a subterm of the pattern".into());
        };
        if chosen.iter().any(|c: &crate::term::Position| c.overlaps(pos)) {
            return Err("matchrew subpatterns must be disjoint".into());
        }
        chosen.push(pos.clone());
    }
    Ok(())
}

fn named(ctx: &StratContext<'_>, cur: &mut Cursor, name: String) -> Result<Strategy> {
    let (line, column) = cur.peek_token().map(|t| (t.line, t.column)).unwrap_or((0, 0));
    cur.next();
    if ctx.strategies.contains(&name) {
        let mut args = Vec::new();
        if cur.eat("(") {
            loop {
                args.push(term(&ctx.scope, cur, &[",", ")"])?);
                if cur.eat(",") {
                    continue;
                }
                cur.expect(")")?;
                break;
            }
        }
        return Ok(Strategy::Call {
            name: name.into(),
            args,
        });
    }
    if !ctx.system.has_label(&name) {
        return Err(Error::Name(format!(
            "`{name}` at line {line}, column {column} is neither a strategy nor a rule label"
        )));
    }
    let mut subst = Vec::new();
    if cur.eat("[") {
        loop {
            let var = cur.ident("a variable")?;
            let known = ctx
                .system
                .rules_labeled(&name)
                .iter()
                .any(|r| r.vars().iter().any(|v| *v.name == *var));
            if !known {
                return Err(Error::Name(format!("rule [{name}] has no variable `{var}`")));
            }
            cur.expect("<-")?;
            let value = term(&ctx.scope, cur, &[";", "]"])?;
            subst.push((Arc::<str>::from(var), value));
            if cur.eat(";") {
                continue;
            }
            cur.expect("]")?;
            break;
        }
    }
    let mut cond_strats = Vec::new();
    if cur.eat("{") {
        loop {
            cond_strats.push(parse_strategy(ctx, cur)?);
            if cur.eat(",") {
                continue;
            }
            cur.expect("}")?;
            break;
        }
    }
    Ok(Strategy::Rule {
        label: name.into(),
        subst,
        cond_strats,
        top: false,
    })
}

fn parse_attrs(words: &[String], module: &Module) -> Result<OpAttrs> {
    let joined = words.join(" ");
    let inner = joined
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Signature(format!("malformed attributes `{joined}`")))?;
    let mut attrs = OpAttrs::default();
    let mut it = inner.split_whitespace();
    while let Some(w) = it.next() {
        match w {
            "assoc" => attrs.assoc = true,
            "comm" => attrs.comm = true,
            "native" => attrs.native = true,
            "id:" => {
                let name = it
                    .next()
                    .ok_or_else(|| Error::Signature("`id:` needs a constant".into()))?;
                let op = module.sig.op(name, 0)?;
                attrs.identity = Some(Term::constant(&op));
            }
            "prec" => {
                let n = it
                    .next()
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| Error::Signature("`prec` needs a number".into()))?;
                attrs.prec = Some(n);
            }
            other => return Err(Error::Signature(format!("unknown operator attribute `{other}`"))),
        }
    }
    Ok(attrs)
}

fn op_decl(module: &mut Module, words: &[String]) -> Result<()> {
    let colon = words
        .iter()
        .position(|w| w == ":")
        .ok_or_else(|| Error::Signature("operator declaration without `:`".into()))?;
    let arrow = words[colon..]
        .iter()
        .position(|w| w == "->")
        .map(|i| i + colon)
        .ok_or_else(|| Error::Signature("operator declaration without `->`".into()))?;
    let result = words
        .get(arrow + 1)
        .ok_or_else(|| Error::Signature("operator declaration without result sort".into()))?;
    let attrs = if words.len() > arrow + 2 {
        parse_attrs(&words[arrow + 2..], module)?
    } else {
        OpAttrs::default()
    };
    let args: Vec<&str> = words[colon + 1..arrow].iter().map(String::as_str).collect();
    for name in &words[..colon] {
        module.sig.add_op(name, &args, result, attrs.clone())?;
    }
    Ok(())
}

fn sort_list<'a>(words: &'a [String], sep: &str) -> Vec<&'a str> {
    words
        .iter()
        .map(String::as_str)
        .filter(|w| *w != sep)
        .collect()
}

fn expect_dot(cur: &mut Cursor) -> Result<()> {
    cur.expect(".")
}

fn label(cur: &mut Cursor) -> Result<String> {
    cur.expect("[")?;
    let l = cur.ident("a rule label")?;
    cur.expect("]")?;
    cur.expect(":")?;
    Ok(l)
}

/// Parses `mod NAME is ... endm`; the cursor is at `mod`.
pub fn parse_module(cur: &mut Cursor, lib: &Library) -> Result<Module> {
    cur.expect("mod")?;
    let name = cur.ident("a module name")?;
    cur.expect("is")?;
    let mut m = Module::new(&name);
    loop {
        let Some(kw) = cur.peek().map(str::to_string) else {
            return Err(Error::UnexpectedEof(format!("module `{name}` lacks `endm`")));
        };
        if kw == "endm" {
            cur.next();
            break;
        }
        let (line, column) = cur.peek_token().map(|t| (t.line, t.column)).unwrap_or((0, 0));
        let at = |e: Error| match e {
            Error::Parse { .. } | Error::UnexpectedEof(_) => e,
            other => Error::Parse {
                line,
                column,
                message: other.to_string(),
            },
        };
        statement(cur, lib, &mut m, &kw).map_err(at)?;
    }
    m.validate()?;
    Ok(m)
}

fn statement(cur: &mut Cursor, lib: &Library, m: &mut Module, kw: &str) -> Result<()> {
    match kw {
        "protecting" | "pr" | "including" | "inc" | "extending" | "ex" => {
            cur.next();
            let words = cur.words_until_dot()?;
            for w in words {
                let other = lib
                    .modules
                    .get(&w)
                    .ok_or_else(|| Error::Name(format!("module `{w}` is not loaded")))?;
                m.import(other)?;
            }
        }
        "sort" | "sorts" => {
            cur.next();
            for w in cur.words_until_dot()? {
                m.sig.add_sort(&w);
            }
        }
        "subsort" | "subsorts" => {
            cur.next();
            let words = cur.words_until_dot()?;
            let chain = sort_list(&words, "<");
            for pair in chain.windows(2) {
                m.sig.add_subsort(pair[0], pair[1])?;
            }
        }
        "op" | "ops" => {
            cur.next();
            let words = cur.words_until_dot()?;
            op_decl(m, &words)?;
        }
        "var" | "vars" => {
            cur.next();
            let words = cur.words_until_dot()?;
            let (names, sort) = var_decl(&words)?;
            for n in names {
                m.declare_var(n, sort)?;
            }
        }
        "prec" => {
            cur.next();
            let words = cur.words_until_dot()?;
            let chain: Vec<String> = sort_list(&words, ">").into_iter().map(str::to_string).collect();
            if chain.len() < 2 {
                return Err(Error::Config("`prec` needs at least two symbols".into()));
            }
            m.precedence.push(chain);
        }
        "eq" | "ceq" => {
            cur.next();
            let scope = module_scope(m);
            let lhs = term(&scope, cur, &["="])?;
            cur.expect("=")?;
            let rhs = term(&scope, cur, &["if", "."])?;
            let condition = if kw == "ceq" {
                cur.expect("if")?;
                parse_condition(&scope, cur, &["."])?
            } else {
                Condition::default()
            };
            expect_dot(cur)?;
            m.equations.push(Equation { lhs, rhs, condition });
        }
        "rl" | "crl" => {
            cur.next();
            let label = label(cur)?;
            let scope = module_scope(m);
            let lhs = term(&scope, cur, &["=>"])?;
            cur.expect("=>")?;
            let rhs = term(&scope, cur, &["if", "."])?;
            let condition = if kw == "crl" {
                cur.expect("if")?;
                parse_condition(&scope, cur, &["."])?
            } else {
                Condition::default()
            };
            expect_dot(cur)?;
            m.rules.push(Rule {
                label: label.into(),
                lhs,
                rhs,
                condition,
            });
        }
        "ident" => {
            cur.next();
            let set = cur.ident("an identity set name")?;
            cur.expect(":")?;
            let scope = module_scope(m);
            let lhs = term(&scope, cur, &["="])?;
            cur.expect("=")?;
            let rhs = term(&scope, cur, &["."])?;
            expect_dot(cur)?;
            m.identities.entry(set).or_default().push((lhs, rhs));
        }
        _ => return Err(cur.error("expected a module statement")),
    }
    Ok(())
}

fn module_scope(m: &Module) -> Scope<'_> {
    let mut s = Scope::new(&m.sig, &m.vars);
    s.aliases = Some(&m.aliases);
    s
}

fn var_decl(words: &[String]) -> Result<(&[String], &str)> {
    match words {
        [names @ .., colon, sort] if colon == ":" && !names.is_empty() => Ok((names, sort)),
        _ => Err(Error::Sort("malformed variable declaration".into())),
    }
}

/// Collects the names declared by `strat` statements up to `endsm`.
fn declared_strategies(cur: &Cursor) -> BTreeSet<String> {
    let mut probe = cur.clone();
    let mut out = BTreeSet::new();
    while let Some(t) = probe.next().map(|t| t.text.clone()) {
        match t.as_str() {
            "endsm" => break,
            "strat" | "strats" => {
                while let Some(n) = probe.peek() {
                    if n == ":" || n == "." {
                        break;
                    }
                    out.insert(n.to_string());
                    probe.next();
                }
            }
            _ => {}
        }
    }
    out
}

/// Parses `smod NAME is ... endsm`; the cursor is at `smod`.
pub fn parse_smod(cur: &mut Cursor, lib: &Library) -> Result<StrategyModule> {
    cur.expect("smod")?;
    let name = cur.ident("a strategy module name")?;
    cur.expect("is")?;
    let mut sm = StrategyModule {
        name: name.clone(),
        ..Default::default()
    };
    let mut names = declared_strategies(cur);
    loop {
        let Some(kw) = cur.peek().map(str::to_string) else {
            return Err(Error::UnexpectedEof(format!("strategy module `{name}` lacks `endsm`")));
        };
        match kw.as_str() {
            "endsm" => {
                cur.next();
                break;
            }
            "protecting" | "pr" | "including" | "inc" | "extending" | "ex" => {
                cur.next();
                for w in cur.words_until_dot()? {
                    if let Some(other) = lib.smods.get(&w) {
                        sm.include(other);
                        sm.includes.push(w.clone());
                        names.extend(other.decls.keys().map(|k| k.to_string()));
                        if sm.system.is_empty() {
                            sm.system = other.system.clone();
                        }
                    } else if lib.modules.contains_key(&w) {
                        sm.system = w.clone();
                    } else {
                        return Err(Error::Name(format!("module `{w}` is not loaded")));
                    }
                }
            }
            "var" | "vars" => {
                cur.next();
                let words = cur.words_until_dot()?;
                let (vs, sort) = var_decl(&words)?;
                let system = system_of(&sm, lib)?;
                let sort = system.sig.sort(sort)?;
                for v in vs {
                    sm.vars.insert(
                        v.clone(),
                        Var {
                            name: v.as_str().into(),
                            sort: sort.clone(),
                        },
                    );
                }
            }
            "strat" | "strats" => {
                cur.next();
                let words = cur.words_until_dot()?;
                let system = system_of(&sm, lib)?;
                let colon = words
                    .iter()
                    .position(|w| w == ":")
                    .ok_or_else(|| cur.error("strategy declaration without `:`"))?;
                let at = words
                    .iter()
                    .position(|w| w == "@")
                    .ok_or_else(|| cur.error("strategy declaration without `@`"))?;
                let arg_sorts = words[colon + 1..at]
                    .iter()
                    .map(|s| system.sig.sort(s))
                    .collect::<Result<Vec<_>>>()?;
                let subject = system.sig.sort(
                    words
                        .get(at + 1)
                        .ok_or_else(|| cur.error("strategy declaration without subject sort"))?,
                )?;
                for n in &words[..colon] {
                    sm.decls.insert(
                        n.as_str().into(),
                        StratDecl {
                            name: n.as_str().into(),
                            arg_sorts: arg_sorts.clone(),
                            subject: subject.clone(),
                        },
                    );
                }
            }
            "sd" | "csd" => {
                cur.next();
                let def = {
                    let system = system_of(&sm, lib)?;
                    strat_def(cur, &sm, system, &names, kw == "csd")?
                };
                sm.defs.push(def);
            }
            _ => return Err(cur.error("expected a strategy module statement")),
        }
    }
    for d in &sm.defs {
        let decl = sm
            .decls
            .get(&d.name)
            .ok_or_else(|| Error::Name(format!("strategy `{}` is defined but not declared", d.name)))?;
        if decl.arg_sorts.len() != d.params.len() {
            return Err(Error::Arity(format!(
                "strategy `{}` declared with {} arguments but defined with {}",
                d.name,
                decl.arg_sorts.len(),
                d.params.len()
            )));
        }
    }
    Ok(sm)
}

fn system_of<'l>(sm: &StrategyModule, lib: &'l Library) -> Result<&'l Module> {
    lib.modules
        .get(&sm.system)
        .ok_or_else(|| Error::Name(format!("strategy module `{}` protects no loaded system module", sm.name)))
}

/// Scope for strategy text: strategy-module variables shadow system ones.
pub fn strat_scope<'a>(sm: &'a StrategyModule, system: &'a Module) -> Scope<'a> {
    Scope {
        sig: &system.sig,
        vars: vec![&sm.vars, &system.vars],
        aliases: Some(&system.aliases),
    }
}

fn strat_def(
    cur: &mut Cursor,
    sm: &StrategyModule,
    system: &Module,
    names: &BTreeSet<String>,
    conditional: bool,
) -> Result<StratDef> {
    let name = cur.ident("a strategy name")?;
    if !names.contains(&name) {
        return Err(Error::Name(format!("strategy `{name}` is not declared")));
    }
    let ctx = StratContext {
        scope: strat_scope(sm, system),
        system,
        strategies: names,
    };
    let mut params = Vec::new();
    if cur.eat("(") {
        loop {
            params.push(term(&ctx.scope, cur, &[",", ")"])?);
            if cur.eat(",") {
                continue;
            }
            cur.expect(")")?;
            break;
        }
    }
    cur.expect(":=")?;
    let body = parse_strategy(&ctx, cur)?;
    let cond = if conditional {
        cur.expect("if")?;
        parse_condition(&ctx.scope, cur, &["."])?
    } else {
        Condition::default()
    };
    expect_dot(cur)?;
    Ok(StratDef {
        name: name.into(),
        params,
        body,
        cond,
    })
}
