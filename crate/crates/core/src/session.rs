//! Batch and interactive command sessions over loaded modules.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use crate::completion::{
    build_completion_theory, run_completion, validate_convergent, CompletionTheory, Identity, Status, Variant,
};
use crate::error::{Error, Result};
use crate::module::Module;
use crate::rewrite::{Budgets, Rewriter};
use crate::strategy::{Evaluator, Strategy, StrategyModule, TermSet};
use crate::syntax::{parse_module, parse_smod, parse_strategy, show, strat_scope, Cursor, Library, Scope, StratContext, TermParser};
use crate::term::{term_order, Term};

/// The river-crossing puzzle and its strategy module.
pub const RIVER: &str = include_str!("river.strk");

/// Results kept for `cont`.
#[derive(Debug, Clone)]
struct Stored {
    smod: Option<String>,
    system: String,
    terms: TermSet,
}

/// Loaded modules, the active module, budgets and the last result set.
#[derive(Default)]
pub struct Session {
    pub lib: Library,
    pub budgets: Budgets,
    /// Budgets for `complete`; `None` uses the completion defaults.
    pub completion_budgets: Option<Budgets>,
    system: Option<String>,
    smod: Option<String>,
    last: Option<Stored>,
    /// Completion theories, by system module name, with the user module they extend.
    theories: BTreeMap<String, (String, CompletionTheory)>,
}

/// What a command asks the caller to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Quit,
}

impl Session {
    pub fn new(budgets: Budgets) -> Self {
        Session {
            budgets,
            ..Default::default()
        }
    }

    /// Name of the active system module.
    pub fn active_system(&self) -> Option<&str> {
        self.system.as_deref()
    }

    /// Name of the active strategy module, if any.
    pub fn active_smod(&self) -> Option<&str> {
        self.smod.as_deref()
    }

    /// The last result set, in listing order.
    pub fn last_results(&self) -> Vec<Term> {
        self.last.as_ref().map(|s| sorted(&s.terms)).unwrap_or_default()
    }

    pub fn module(&self, name: &str) -> Result<&Module> {
        self.lib
            .modules
            .get(name)
            .ok_or_else(|| Error::Name(format!("module `{name}` is not loaded")))
    }

    /// Executes every module and command in `text`, stopping at the first error.
    pub fn run(&mut self, text: &str, out: &mut dyn Write) -> Result<Flow> {
        let mut cur = Cursor::new(text);
        if cur.at_end() {
            return Err(Error::EmptyInput);
        }
        while !cur.at_end() {
            if self.step(&mut cur, out)? == Flow::Quit {
                return Ok(Flow::Quit);
            }
        }
        Ok(Flow::Continue)
    }

    /// Loads the modules in a file; commands in it are executed too.
    pub fn load(&mut self, path: &Path, out: &mut dyn Write) -> Result<Flow> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if text.trim().is_empty() {
            return Err(Error::EmptyInput);
        }
        self.run(&text, out)
    }

    fn step(&mut self, cur: &mut Cursor, out: &mut dyn Write) -> Result<Flow> {
        let kw = cur.peek().unwrap_or_default().to_string();
        match kw.as_str() {
            "mod" | "fmod" => {
                let m = parse_module(cur, &self.lib)?;
                m.check_attachments()?;
                self.system = Some(m.name.clone());
                self.smod = None;
                self.theories.remove(&m.name);
                self.lib.modules.insert(m.name.clone(), m);
            }
            "smod" => {
                let sm = parse_smod(cur, &self.lib)?;
                self.system = Some(sm.system.clone());
                self.smod = Some(sm.name.clone());
                self.lib.smods.insert(sm.name.clone(), sm);
            }
            "load" => {
                cur.next();
                let path = cur.words_until_dot()?.join(" ");
                if path == "river" {
                    return self.run(RIVER, out);
                }
                return self.load(Path::new(&path), out);
            }
            "select" => {
                cur.next();
                let name = cur.ident("a module name")?;
                cur.expect(".")?;
                self.select(&name)?;
            }
            "red" | "reduce" => {
                cur.next();
                let t = self.command_term(cur, &["."])?;
                cur.expect(".")?;
                let sys = self.module(self.system_name()?)?;
                let nf = Rewriter::new(sys, self.budgets).normalize(&t)?;
                writeln!(out, "result {} : {}", nf.sort(), show(&nf)).map_err(io)?;
            }
            "srew" => {
                cur.next();
                let t = self.command_term(cur, &["using"])?;
                cur.expect("using")?;
                let s = self.command_strategy(cur)?;
                cur.expect(".")?;
                let sys = self.module(self.system_name()?)?;
                let t = Rewriter::new(sys, self.budgets).normalize(&t)?;
                let res = self.with_evaluator(|ev| ev.eval(&s, &t))?;
                self.report(res, out)?;
            }
            "cont" => {
                cur.next();
                cur.expect("using")?;
                let Some(prev) = self.last.clone().filter(|s| !s.terms.is_empty()) else {
                    return Err(Error::State("`cont` needs a previous nonempty result".into()));
                };
                if prev.system.as_str() != self.system_name()? || prev.smod != self.smod {
                    return Err(Error::State("the active module changed since the last result".into()));
                }
                let s = self.command_strategy(cur)?;
                cur.expect(".")?;
                let res = self.with_evaluator(|ev| {
                    let mut all = TermSet::new();
                    for t in &prev.terms {
                        all.extend(ev.eval(&s, t)?);
                    }
                    Ok(all)
                })?;
                self.report(res, out)?;
            }
            "completion" => {
                cur.next();
                let v: Variant = cur.ident("a completion variant")?.parse()?;
                cur.expect(".")?;
                let name = self.install_theory(v)?;
                writeln!(out, "active: {name}").map_err(io)?;
            }
            "complete" => {
                cur.next();
                let set = cur.ident("an identity set name")?;
                let v = if cur.eat("with") {
                    cur.ident("a completion variant")?.parse()?
                } else {
                    Variant::N
                };
                cur.expect(".")?;
                self.complete(&set, v, out)?;
            }
            "quit" | "q" => {
                cur.next();
                cur.eat(".");
                return Ok(Flow::Quit);
            }
            "" => {}
            _ => return Err(cur.error("expected a module or a command")),
        }
        Ok(Flow::Continue)
    }

    fn select(&mut self, name: &str) -> Result<()> {
        if let Some(sm) = self.lib.smods.get(name) {
            self.system = Some(sm.system.clone());
            self.smod = Some(name.to_string());
        } else if self.lib.modules.contains_key(name) {
            self.system = Some(name.to_string());
            self.smod = None;
        } else {
            return Err(Error::Name(format!("module `{name}` is not loaded")));
        }
        Ok(())
    }

    fn system_name(&self) -> Result<&str> {
        self.system
            .as_deref()
            .ok_or_else(|| Error::State("no module is loaded".into()))
    }

    fn active_smod_module(&self) -> Result<StrategyModule> {
        match &self.smod {
            Some(n) => Ok(self.lib.smods[n].clone()),
            None => Ok(StrategyModule {
                name: String::new(),
                system: self.system_name()?.to_string(),
                ..Default::default()
            }),
        }
    }

    fn command_term(&self, cur: &mut Cursor, stops: &[&str]) -> Result<Term> {
        let sys = self.module(self.system_name()?)?;
        let sm = self.active_smod_module()?;
        let scope: Scope<'_> = strat_scope(&sm, sys);
        TermParser::new(&scope, cur).term(stops)
    }

    fn command_strategy(&self, cur: &mut Cursor) -> Result<Strategy> {
        let sys = self.module(self.system_name()?)?;
        let sm = self.active_smod_module()?;
        let names: BTreeSet<String> = sm.decls.keys().map(|k| k.to_string()).collect();
        let ctx = StratContext {
            scope: strat_scope(&sm, sys),
            system: sys,
            strategies: &names,
        };
        parse_strategy(&ctx, cur)
    }

    fn with_evaluator<T>(&self, f: impl FnOnce(&Evaluator<'_>) -> Result<T>) -> Result<T> {
        let sys = self.module(self.system_name()?)?;
        let sm = self.active_smod_module()?;
        let ev = Evaluator::new(sys, &sm, self.budgets);
        f(&ev)
    }

    fn report(&mut self, res: TermSet, out: &mut dyn Write) -> Result<()> {
        if res.is_empty() {
            writeln!(out, "no solutions").map_err(io)?;
        }
        for t in sorted(&res) {
            writeln!(out, "result {} : {}", t.sort(), show(&t)).map_err(io)?;
        }
        self.last = Some(Stored {
            smod: self.smod.clone(),
            system: self.system_name()?.to_string(),
            terms: res,
        });
        Ok(())
    }

    /// The user module behind the active module.
    fn user_module(&self) -> Result<&Module> {
        let name = self.system_name()?;
        match self.theories.get(name) {
            Some((base, _)) => self.module(base),
            None => self.module(name),
        }
    }

    fn install_theory(&mut self, v: Variant) -> Result<String> {
        let user = self.user_module()?.clone();
        let th = build_completion_theory(v, &user)?;
        let name = th.system.name.clone();
        let sname = th.strategies.name.clone();
        self.lib.modules.insert(name.clone(), th.system.clone());
        self.lib.smods.insert(sname.clone(), th.strategies.clone());
        self.theories.insert(name, (user.name.clone(), th));
        self.select(&sname)?;
        Ok(sname)
    }

    fn complete(&mut self, set: &str, v: Variant, out: &mut dyn Write) -> Result<()> {
        let user = self.user_module()?;
        let e0: Vec<Identity> = if set == "mtEqS" {
            Vec::new()
        } else {
            user.identities
                .get(set)
                .ok_or_else(|| Error::Name(format!("no identity set `{set}` in module `{}`", user.name)))?
                .clone()
        };
        let th = build_completion_theory(v, user)?;
        let budgets = self.completion_budgets.unwrap_or_else(crate::completion::completion_budgets);
        let outcome = run_completion(&th, &e0, budgets)?;
        let n = outcome.inferences;
        match outcome.status {
            Status::Success(rules) => {
                writeln!(out, "SUCCESS ({v}-COMP, {n} inferences)").map_err(io)?;
                for (l, r) in &rules {
                    writeln!(out, "  {} -> {}", show(l), show(r)).map_err(io)?;
                }
                let rep = validate_convergent(&th.system.sig, &rules, &e0, &th.precedence)?;
                let yn = |b: bool| if b { "yes" } else { "no" };
                writeln!(
                    out,
                    "terminating: {}  confluent: {}  equivalent: {}  interreduced: {}",
                    yn(rep.terminating()),
                    yn(rep.confluent()),
                    yn(rep.equivalent()),
                    yn(rep.interreduced())
                )
                .map_err(io)?;
                Ok(())
            }
            Status::Failure(stuck) => {
                writeln!(out, "FAILURE ({v}-COMP, {n} inferences)").map_err(io)?;
                writeln!(out, "stuck {} : {}", stuck.sort(), show(&stuck)).map_err(io)?;
                Err(Error::CompletionFailed(v.to_string()))
            }
            Status::Budget(e) => {
                writeln!(out, "BUDGET ({v}-COMP, {n} inferences)").map_err(io)?;
                Err(e)
            }
        }
    }
}

fn sorted(ts: &TermSet) -> Vec<Term> {
    let mut v: Vec<Term> = ts.iter().cloned().collect();
    v.sort_by(term_order);
    v
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}
