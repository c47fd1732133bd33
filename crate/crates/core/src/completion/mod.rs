//! Knuth-Bendix completion: inference rules as rewrite rules of an object
//! theory over systems of rules and identities, driven by strategies.

mod order;
mod pairs;

pub use order::{lpo_greater, Precedence};
pub use pairs::{
    cp_with_set, critical_pairs, identity, least_rule, normal_form, reduce, reduce_encompass,
    rename_apart, rename_with, tidy, CRule, Identity,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::module::Module;
use crate::rewrite::Budgets;
use crate::strategy::{Evaluator, Strategy, StrategyModule};
use crate::syntax::{parse_module, parse_smod, Cursor, Library};
use crate::term::{ac_elements, ac_term, canonical_app, Op, Signature, Term};

const CRITICAL_PAIRS: &str = include_str!("critical_pairs.strk");
const N_TEXT: &str = include_str!("n.strk");
const S_TEXT: &str = include_str!("s.strk");
const ANS_TEXT: &str = include_str!("ans.strk");

/// Default fixpoint state budget for completion runs.
pub const COMPLETION_MAX_STATES: usize = 1_000;
/// Default budget of rule applications for completion runs.
pub const COMPLETION_MAX_INFERENCES: usize = 10_000;

/// Which completion procedure to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    N,
    S,
    Ans,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::N, Variant::S, Variant::Ans];

    pub fn name(self) -> &'static str {
        match self {
            Variant::N => "N",
            Variant::S => "S",
            Variant::Ans => "ANS",
        }
    }

    fn text(self) -> &'static str {
        match self {
            Variant::N => N_TEXT,
            Variant::S => S_TEXT,
            Variant::Ans => ANS_TEXT,
        }
    }

    /// Number of components of the system tuple.
    pub fn width(self) -> usize {
        match self {
            Variant::N => 3,
            Variant::S => 4,
            Variant::Ans => 6,
        }
    }

    pub fn module_name(self) -> String {
        format!("{}-COMPLETION", self.name())
    }

    pub fn strat_module_name(self) -> String {
        format!("{}-COMPLETION-STRAT", self.name())
    }

    /// Name of the top-level strategy.
    pub fn entry(self) -> String {
        format!("{}-COMP", self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "N" => Ok(Variant::N),
            "S" => Ok(Variant::S),
            "ANS" => Ok(Variant::Ans),
            _ => Err(Error::Config(format!("unknown completion variant `{s}` (expected N, S or ANS)"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Operators of the object theory needed to build and take apart systems.
#[derive(Debug, Clone)]
pub struct TheoryOps {
    pub rule: Op,
    pub ident: Op,
    pub rules: Op,
    pub idents: Op,
    pub system: Op,
}

impl TheoryOps {
    fn find(sig: &Signature, variant: Variant) -> Result<Self> {
        let bracket = format!("<{}>", vec!["_"; variant.width()].join(","));
        Ok(TheoryOps {
            rule: sig.resolve("_->_", &["Term", "Term"])?,
            ident: sig.resolve("_=._", &["Term", "Term"])?,
            rules: sig.resolve("__", &["RlS", "RlS"])?,
            idents: sig.resolve("__", &["EqS", "EqS"])?,
            system: sig.op(&bracket, variant.width())?,
        })
    }

    pub fn rule_term(&self, r: &CRule) -> Term {
        Term::app(self.rule.clone(), vec![r.0.clone(), r.1.clone()])
    }

    pub fn ident_term(&self, e: &Identity) -> Term {
        canonical_app(self.ident.clone(), vec![e.0.clone(), e.1.clone()])
    }

    pub fn rule_set(&self, rules: &[CRule]) -> Term {
        ac_term(&self.rules, rules.iter().map(|r| self.rule_term(r)).collect()).expect("identity element")
    }

    pub fn ident_set(&self, ids: &[Identity]) -> Term {
        ac_term(&self.idents, ids.iter().map(|e| self.ident_term(e)).collect()).expect("identity element")
    }

    /// Rules of an `RlS` term, or `None` if it is not a ground set of rules.
    pub fn rules_of(&self, t: &Term) -> Option<Vec<CRule>> {
        ac_elements(&self.rules, t)
            .into_iter()
            .map(|e| match e.as_app() {
                Some((op, args)) if op.same(&self.rule) => Some((args[0].clone(), args[1].clone())),
                _ => None,
            })
            .collect()
    }

    /// Identities of an `EqS` term.
    pub fn idents_of(&self, t: &Term) -> Option<Vec<Identity>> {
        ac_elements(&self.idents, t)
            .into_iter()
            .map(|e| match e.as_app() {
                Some((op, args)) if op.same(&self.ident) => Some(identity(args[0].clone(), args[1].clone())),
                _ => None,
            })
            .collect()
    }
}

/// The object theory and strategy module of one completion procedure,
/// extended with a user signature.
#[derive(Debug, Clone)]
pub struct CompletionTheory {
    pub variant: Variant,
    pub system: Module,
    pub strategies: StrategyModule,
    pub ops: TheoryOps,
    pub precedence: Precedence,
}

fn parse_theory(variant: Variant) -> Result<(Module, StrategyModule)> {
    let mut lib = Library::default();
    let mut cur = Cursor::new(CRITICAL_PAIRS);
    let base = parse_module(&mut cur, &lib)?;
    lib.modules.insert(base.name.clone(), base);
    let mut cur = Cursor::new(variant.text());
    let sys = parse_module(&mut cur, &lib)?;
    lib.modules.insert(sys.name.clone(), sys.clone());
    let smod = parse_smod(&mut cur, &lib)?;
    Ok((sys, smod))
}

/// Builds the completion theory for `variant` over the signature, variables,
/// identity sets and precedence of `user`.
pub fn build_completion_theory(variant: Variant, user: &Module) -> Result<CompletionTheory> {
    let (mut sys, mut smod) = parse_theory(variant)?;
    for s in user.sig.sorts() {
        if sys.sig.has_sort(s) {
            return Err(Error::Name(format!(
                "sort `{s}` is reserved by the completion theory"
            )));
        }
    }
    for op in user.sig.ops() {
        if sys.sig.ops_named(&op.name).iter().any(|o| o.args == op.args) {
            return Err(Error::Name(format!(
                "operator `{}` is reserved by the completion theory",
                op.name
            )));
        }
    }
    sys.sig.import(&user.sig)?;
    for s in user.sig.sorts() {
        if !sys.sig.leq(s, "Term") {
            sys.sig.add_subsort(s, "Term")?;
        }
    }
    // The theory's own variables are only needed to parse its rules and
    // strategies; from here on terms are written with the user's variables.
    sys.vars = user.vars.clone();
    smod.vars.clear();
    sys.name = variant.module_name();
    smod.system = sys.name.clone();
    sys.precedence = user.precedence.clone();
    sys.identities = user.identities.clone();
    let precedence = Precedence::from_chains(&user.precedence)?;
    let ops = TheoryOps::find(&sys.sig, variant)?;
    for (name, ids) in &user.identities {
        let ids: Vec<Identity> = ids.iter().map(|(l, r)| identity(l.clone(), r.clone())).collect();
        sys.aliases.insert(name.clone(), ops.ident_set(&ids));
    }
    attach(&mut sys, &ops, &precedence);
    sys.check_attachments()?;
    Ok(CompletionTheory {
        variant,
        system: sys,
        strategies: smod,
        ops,
        precedence,
    })
}

fn attach(sys: &mut Module, ops: &TheoryOps, prec: &Precedence) {
    let sig = sys.sig.clone();
    let p = prec.clone();
    sys.attachments
        .insert_test("_>_", move |args| lpo_greater(&args[0], &args[1], &p));
    let (o, g) = (ops.clone(), sig.clone());
    sys.attachments.insert_function("reduce", move |args| {
        let Some(rules) = o.rules_of(&args[1]) else { return Ok(None) };
        Ok(reduce(&g, &args[0], &rules))
    });
    let (o, g) = (ops.clone(), sig.clone());
    sys.attachments.insert_function("reduce>", move |args| {
        let (Some(rule), Some(rules)) = (o.rules_of(&args[0]), o.rules_of(&args[1])) else {
            return Ok(None);
        };
        let [rule] = rule.as_slice() else { return Ok(None) };
        Ok(reduce_encompass(&g, rule, &rules))
    });
    let o = ops.clone();
    sys.attachments.insert_function("CP", move |args| {
        let (Some(rule), Some(rules)) = (o.rules_of(&args[0]), o.rules_of(&args[1])) else {
            return Ok(None);
        };
        let [rule] = rule.as_slice() else { return Ok(None) };
        Ok(Some(o.ident_set(&cp_with_set(rule, &rules)?)))
    });
    let o = ops.clone();
    sys.attachments.insert_function("least-rule", move |args| {
        let Some(rules) = o.rules_of(&args[0]) else { return Ok(None) };
        Ok(least_rule(&rules).map(|r| o.rule_term(&r)))
    });
}

impl CompletionTheory {
    /// `< mtRlS, ..., mtRlS, E0 >`.
    pub fn initial_system(&self, e0: &[Identity]) -> Term {
        let mut args = vec![self.ops.rule_set(&[]); self.variant.width() - 1];
        args.push(self.ops.ident_set(e0));
        Term::app(self.ops.system.clone(), args)
    }

    /// The rule components and identity component of a system term.
    pub fn components(&self, system: &Term) -> Option<(Vec<Vec<CRule>>, Vec<Identity>)> {
        let (op, args) = system.as_app()?;
        if !op.same(&self.ops.system) {
            return None;
        }
        let (last, rules) = args.split_last()?;
        let rules = rules.iter().map(|c| self.ops.rules_of(c)).collect::<Option<Vec<_>>>()?;
        Some((rules, self.ops.idents_of(last)?))
    }

    /// Rules of a successful final system: `R` for N and S, `A ∪ N` for ANS,
    /// with variables renamed by [`tidy`] and sorted.
    pub fn result_rules(&self, system: &Term) -> Option<Vec<CRule>> {
        let (comps, ids) = self.components(system)?;
        let done = match self.variant {
            Variant::N | Variant::S => comps[1..].iter().all(Vec::is_empty),
            Variant::Ans => comps[2..].iter().all(Vec::is_empty),
        };
        if !done || !ids.is_empty() {
            return None;
        }
        let mut rules: Vec<CRule> = match self.variant {
            Variant::N | Variant::S => comps[0].clone(),
            Variant::Ans => comps[0].iter().chain(&comps[1]).cloned().collect(),
        };
        for r in &mut rules {
            *r = tidy(r, &self.system.vars);
        }
        rules.sort();
        Some(rules)
    }

    pub fn evaluator(&self, budgets: Budgets) -> Evaluator<'_> {
        Evaluator::new(&self.system, &self.strategies, budgets)
    }
}

/// How a completion run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    /// Every component but the rules is empty; the rules are sorted.
    Success(Vec<CRule>),
    /// The strategy produced no result; the last system a rule was tried on.
    Failure(Term),
    /// A resource limit was hit.
    Budget(Error),
}

#[derive(Debug, Clone)]
pub struct CompletionOutcome {
    pub status: Status,
    /// Rule applications performed.
    pub inferences: usize,
}

/// Budgets used by [`run_completion`] unless overridden.
pub fn completion_budgets() -> Budgets {
    Budgets {
        max_states: COMPLETION_MAX_STATES,
        max_inferences: Some(COMPLETION_MAX_INFERENCES),
        ..Budgets::default()
    }
}

/// Runs `X-COMP` on `< mtRlS, ..., E0 >`, keeping the first solution found depth-first.
pub fn run_completion(theory: &CompletionTheory, e0: &[Identity], budgets: Budgets) -> Result<CompletionOutcome> {
    let ev = theory.evaluator(budgets);
    let start = theory.initial_system(e0);
    let entry = Strategy::call(&theory.variant.entry());
    let status = match ev.first(&entry, &start) {
        Ok(Some(fin)) => match theory.result_rules(&fin) {
            Some(rules) => Status::Success(rules),
            None => Status::Failure(fin),
        },
        Ok(None) => Status::Failure(ev.last_subject().unwrap_or(start)),
        Err(e) if e.is_budget() => Status::Budget(e),
        Err(e) => return Err(e),
    };
    Ok(CompletionOutcome {
        status,
        inferences: ev.inferences(),
    })
}

/// Outcome of [`validate_convergent`]; each list holds the violations found.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConvergenceReport {
    /// Rules whose lhs is not LPO-greater than their rhs.
    pub not_decreasing: Vec<CRule>,
    /// Critical pairs with distinct normal forms.
    pub unjoinable_pairs: Vec<Identity>,
    /// Input identities whose sides have distinct normal forms.
    pub unjoinable_inputs: Vec<Identity>,
    /// Rules whose lhs is reducible by another rule or whose rhs is reducible.
    pub not_interreduced: Vec<CRule>,
}

impl ConvergenceReport {
    pub fn terminating(&self) -> bool {
        self.not_decreasing.is_empty()
    }

    pub fn confluent(&self) -> bool {
        self.unjoinable_pairs.is_empty()
    }

    pub fn equivalent(&self) -> bool {
        self.unjoinable_inputs.is_empty()
    }

    pub fn interreduced(&self) -> bool {
        self.not_interreduced.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.terminating() && self.confluent() && self.equivalent() && self.interreduced()
    }
}

const NORMAL_FORM_STEPS: usize = 100_000;

/// Checks termination by LPO, joinability of all critical pairs and of the
/// input identities, and interreduction.
pub fn validate_convergent(
    sig: &Signature,
    rules: &[CRule],
    e0: &[Identity],
    prec: &Precedence,
) -> Result<ConvergenceReport> {
    let mut report = ConvergenceReport::default();
    for r in rules {
        if !lpo_greater(&r.0, &r.1, prec)? {
            report.not_decreasing.push(r.clone());
        }
    }
    if !report.terminating() {
        // Normal forms are not guaranteed to exist; report the other checks as failed.
        report.unjoinable_inputs = e0.to_vec();
        return Ok(report);
    }
    let nf = |t: &Term| normal_form(sig, t, rules, NORMAL_FORM_STEPS);
    for r1 in rules {
        for r2 in rules {
            for (a, b) in critical_pairs(r1, r2)? {
                if nf(&a)? != nf(&b)? {
                    report.unjoinable_pairs.push((a, b));
                }
            }
        }
    }
    for (a, b) in e0 {
        if nf(a)? != nf(b)? {
            report.unjoinable_inputs.push((a.clone(), b.clone()));
        }
    }
    for (i, r) in rules.iter().enumerate() {
        let others: Vec<CRule> = rules
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| q.clone())
            .collect();
        if reduce(sig, &r.0, &others).is_some() || reduce(sig, &r.1, rules).is_some() {
            report.not_interreduced.push(r.clone());
        }
    }
    report.unjoinable_pairs.sort();
    report.unjoinable_pairs.dedup();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::show;

    const WORKED: &str = "mod EX is
      sort S .
      ops a : -> S .
      op f : S -> S .
      ops g h : S S -> S .
      vars x y : S .
      prec g > h > f > a .
      ident eqs : g(x, y) = a .
      ident eqs : g(x, y) = h(x, y) .
      ident eqs : h(x, y) = f(x) .
      ident eqs : h(x, y) = f(y) .
    endm";

    const GROUP: &str = "mod GROUP is
      sort G .
      op e : -> G .
      op i : G -> G .
      op _*_ : G G -> G .
      vars x y z : G .
      prec i > _*_ > e .
      ident grp : e * x = x .
      ident grp : i(x) * x = e .
      ident grp : (x * y) * z = x * (y * z) .
    endm";

    fn user(text: &str) -> Module {
        let mut cur = Cursor::new(text);
        parse_module(&mut cur, &Library::default()).unwrap()
    }

    fn run(text: &str, set: &str, v: Variant) -> (CompletionTheory, Vec<Identity>, CompletionOutcome) {
        let m = user(text);
        let th = build_completion_theory(v, &m).unwrap();
        let e0 = m.identities[set].clone();
        let out = run_completion(&th, &e0, completion_budgets()).unwrap();
        (th, e0, out)
    }

    fn shown(rules: &[CRule]) -> Vec<String> {
        rules.iter().map(|(l, r)| format!("{} -> {}", show(l), show(r))).collect()
    }

    #[test]
    fn worked_example_all_variants() {
        for v in Variant::ALL {
            let (th, e0, out) = run(WORKED, "eqs", v);
            let Status::Success(rules) = out.status else { panic!("{v}: {:?}", out.status) };
            assert_eq!(shown(&rules), ["f(x) -> a", "g(x, y) -> a", "h(x, y) -> a"], "{v}");
            let rep = validate_convergent(&th.system.sig, &rules, &e0, &th.precedence).unwrap();
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn group_all_variants() {
        let mut prev: Option<Vec<String>> = None;
        for v in Variant::ALL {
            let t0 = std::time::Instant::now();
            let (th, e0, out) = run(GROUP, "grp", v);
            let Status::Success(rules) = out.status else { panic!("{v}: {:?}", out.status) };
            eprintln!("{v}: {} inferences, {:?}", out.inferences, t0.elapsed());
            let rep = validate_convergent(&th.system.sig, &rules, &e0, &th.precedence).unwrap();
            assert!(rep.passed(), "{rep:?}");
            let s = shown(&rules);
            if let Some(p) = &prev {
                assert_eq!(p, &s);
            }
            prev = Some(s);
        }
    }

    #[test]
    fn empty_input_succeeds() {
        let m = user(WORKED);
        let th = build_completion_theory(Variant::N, &m).unwrap();
        let out = run_completion(&th, &[], completion_budgets()).unwrap();
        assert_eq!(out.status, Status::Success(vec![]));
    }
}
