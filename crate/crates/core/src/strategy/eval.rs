//! Set-semantics evaluation `σ @ t` and a depth-first variant that stops at
//! the first solution.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use super::ast::{MatchKind, Strategy, StrategyModule};
use crate::error::{Error, Result};
use crate::matching::{match_anywhere, match_term, Match};
use crate::module::{Condition, Module, Rule};
use crate::rewrite::{Budgets, DefaultSearch, FragmentSolver, Rewriter, Where};
use crate::subst::Substitution;
use crate::term::{Position, Term, Var};

pub type TermSet = BTreeSet<Term>;

/// Continuation used by [`Evaluator::search`].
pub type Visit<'k> = dyn FnMut(&Term) -> Result<ControlFlow<()>> + 'k;

const RED_ZONE: usize = 64 * 1024;
const STACK_GROWTH: usize = 4 * 1024 * 1024;

/// Evaluation environment: a system module, its strategy definitions and budgets.
pub struct Evaluator<'a> {
    pub system: &'a Module,
    pub smod: &'a StrategyModule,
    pub rw: Rewriter<'a>,
    depth: Cell<usize>,
    inferences: Cell<usize>,
    memo: RefCell<HashMap<CallKey, TermSet>>,
    last_subject: RefCell<Option<Term>>,
    trace: RefCell<Option<Vec<Step>>>,
}

/// A strategy call: name, argument terms, subject.
type CallKey = (Arc<str>, Vec<Term>, Term);

/// One successful rule application recorded by [`Evaluator::record`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub label: Arc<str>,
    pub from: Term,
    pub to: TermSet,
}

/// Answers rewrite-condition fragments with the strategies given in `l{...}`.
struct Controlled<'e, 'a> {
    ev: &'e Evaluator<'a>,
    strats: &'e [Strategy],
    bindings: &'e Substitution,
}

impl FragmentSolver for Controlled<'_, '_> {
    fn reach(&self, _rw: &Rewriter<'_>, index: usize, start: &Term) -> Result<Vec<Term>> {
        Ok(self
            .ev
            .eval_with(&self.strats[index], start, self.bindings)?
            .into_iter()
            .collect())
    }
}

impl<'a> Evaluator<'a> {
    pub fn new(system: &'a Module, smod: &'a StrategyModule, budgets: Budgets) -> Self {
        Evaluator {
            system,
            smod,
            rw: Rewriter::new(system, budgets),
            depth: Cell::new(0),
            inferences: Cell::new(0),
            memo: RefCell::new(HashMap::new()),
            last_subject: RefCell::new(None),
            trace: RefCell::new(None),
        }
    }

    pub fn budgets(&self) -> &Budgets {
        &self.rw.budgets
    }

    /// Rule applications that produced at least one result so far.
    pub fn inferences(&self) -> usize {
        self.inferences.get()
    }

    /// The term the most recent rule application was attempted on.
    pub fn last_subject(&self) -> Option<Term> {
        self.last_subject.borrow().clone()
    }

    /// Starts recording every successful rule application.
    pub fn record(&self) {
        *self.trace.borrow_mut() = Some(Vec::new());
    }

    /// The applications recorded since [`Evaluator::record`].
    pub fn take_trace(&self) -> Vec<Step> {
        self.trace.borrow_mut().take().unwrap_or_default()
    }

    /// `σ @ t`.
    pub fn eval(&self, s: &Strategy, t: &Term) -> Result<TermSet> {
        self.eval_with(s, t, &Substitution::new())
    }

    /// `σ @ t` with variables bound by an enclosing `matchrew` or call.
    pub fn eval_with(&self, s: &Strategy, t: &Term, b: &Substitution) -> Result<TermSet> {
        stacker::maybe_grow(RED_ZONE, STACK_GROWTH, || self.eval_inner(s, t, b))
    }

    fn eval_inner(&self, s: &Strategy, t: &Term, b: &Substitution) -> Result<TermSet> {
        match s {
            Strategy::Idle => Ok(TermSet::from([t.clone()])),
            Strategy::Fail => Ok(TermSet::new()),
            Strategy::Rule {
                label,
                subst,
                cond_strats,
                top,
            } => self.apply_rule(label, subst, cond_strats, *top, t, b),
            Strategy::Test { kind, pattern, cond } => {
                Ok(if self.test(*kind, pattern, cond, t, b)? {
                    TermSet::from([t.clone()])
                } else {
                    TermSet::new()
                })
            }
            Strategy::Concat(x, y) => {
                let mut out = TermSet::new();
                for u in self.eval_with(x, t, b)? {
                    out.extend(self.eval_with(y, &u, b)?);
                }
                Ok(out)
            }
            Strategy::Union(x, y) => {
                let mut out = self.eval_with(x, t, b)?;
                out.extend(self.eval_with(y, t, b)?);
                Ok(out)
            }
            Strategy::Star(x) => Ok(self.closure(x, [t.clone()], b)?.0),
            Strategy::Plus(x) => {
                let first = self.eval_with(x, t, b)?;
                Ok(self.closure(x, first, b)?.0)
            }
            Strategy::Bang(x) => Ok(self.closure(x, [t.clone()], b)?.1),
            Strategy::Cond(c, th, el) => {
                let r = self.eval_with(c, t, b)?;
                if r.is_empty() {
                    return self.eval_with(el, t, b);
                }
                let mut out = TermSet::new();
                for u in r {
                    out.extend(self.eval_with(th, &u, b)?);
                }
                Ok(out)
            }
            Strategy::OrElse(x, y) => {
                let r = self.eval_with(x, t, b)?;
                if r.is_empty() {
                    self.eval_with(y, t, b)
                } else {
                    Ok(r)
                }
            }
            Strategy::Not(x) => Ok(if self.eval_with(x, t, b)?.is_empty() {
                TermSet::from([t.clone()])
            } else {
                TermSet::new()
            }),
            Strategy::Try(x) => {
                let r = self.eval_with(x, t, b)?;
                Ok(if r.is_empty() { TermSet::from([t.clone()]) } else { r })
            }
            Strategy::TestOf(x) => Ok(if self.eval_with(x, t, b)?.is_empty() {
                TermSet::new()
            } else {
                TermSet::from([t.clone()])
            }),
            Strategy::MatchRew {
                kind,
                pattern,
                cond,
                subs,
            } => {
                let mut out = TermSet::new();
                for (m, theta, ctx, holes) in self.matchrew_sites(*kind, pattern, cond, subs, t, b)? {
                    let mut partial = vec![theta.clone()];
                    for (hole, (p, st)) in holes.iter().zip(subs) {
                        let results = self.eval_with(st, &theta.apply(p), &theta)?;
                        let mut next = Vec::new();
                        for acc in &partial {
                            for u in &results {
                                let mut a = acc.clone();
                                a.insert(hole.clone(), u.clone());
                                next.push(a);
                            }
                        }
                        partial = next;
                    }
                    for filled in partial {
                        let r = m.plug(t, filled.apply(&ctx));
                        out.insert(self.rw.normalize(&r)?);
                    }
                }
                Ok(out)
            }
            Strategy::Call { name, args } => {
                let args = self.call_args(args, b)?;
                let key = (name.clone(), args.clone(), t.clone());
                if let Some(hit) = self.memo.borrow().get(&key) {
                    return Ok(hit.clone());
                }
                let mut out = TermSet::new();
                self.enter()?;
                let res = (|| {
                    for (body, theta) in self.call_sites(name, &args)? {
                        out.extend(self.eval_with(&body, t, &theta)?);
                    }
                    Ok(())
                })();
                self.leave();
                res?;
                self.memo.borrow_mut().insert(key, out.clone());
                Ok(out)
            }
        }
    }

    /// Reflexive-transitive closure from `start`, plus its `σ`-irreducible members.
    fn closure(
        &self,
        s: &Strategy,
        start: impl IntoIterator<Item = Term>,
        b: &Substitution,
    ) -> Result<(TermSet, TermSet)> {
        let mut seen = TermSet::new();
        let mut work = Vec::new();
        for t in start {
            if seen.insert(t.clone()) {
                work.push(t);
            }
        }
        let mut irreducible = TermSet::new();
        while let Some(u) = work.pop() {
            let next = self.eval_with(s, &u, b)?;
            if next.is_empty() {
                irreducible.insert(u);
                continue;
            }
            for v in next {
                if seen.insert(v.clone()) {
                    if seen.len() > self.budgets().max_states {
                        return Err(Error::StateBudgetExceeded(self.budgets().max_states));
                    }
                    work.push(v);
                }
            }
        }
        Ok((seen, irreducible))
    }

    fn enter(&self) -> Result<()> {
        let d = self.depth.get() + 1;
        if d > self.budgets().max_depth {
            return Err(Error::DepthExceeded(self.budgets().max_depth));
        }
        self.depth.set(d);
        Ok(())
    }

    fn leave(&self) {
        self.depth.set(self.depth.get() - 1);
    }

    fn call_args(&self, args: &[Term], b: &Substitution) -> Result<Vec<Term>> {
        args.iter().map(|a| self.rw.normalize(&b.apply(a))).collect()
    }

    /// Definition bodies of `name` applicable to `args`, with their bindings.
    fn call_sites(&self, name: &Arc<str>, args: &[Term]) -> Result<Vec<(Strategy, Substitution)>> {
        if !self.smod.decls.contains_key(name) {
            return Err(Error::Name(format!("strategy `{name}` is not declared")));
        }
        let sig = &self.system.sig;
        let mut out = Vec::new();
        for def in self.smod.definitions(name) {
            if def.params.len() != args.len() {
                return Err(Error::Arity(format!(
                    "strategy `{name}` called with {} arguments, defined with {}",
                    args.len(),
                    def.params.len()
                )));
            }
            let mut partial = vec![Substitution::new()];
            for (p, a) in def.params.iter().zip(args) {
                partial = partial
                    .iter()
                    .flat_map(|s| match_term(sig, p, a, s))
                    .collect();
            }
            for sigma in partial {
                for theta in self.rw.eval_condition(&def.cond.0, &sigma, &DefaultSearch)? {
                    out.push((def.body.clone(), theta));
                }
            }
        }
        Ok(out)
    }

    fn test(&self, kind: MatchKind, pattern: &Term, cond: &Condition, t: &Term, b: &Substitution) -> Result<bool> {
        let sig = &self.system.sig;
        let candidates: Vec<Substitution> = match kind {
            MatchKind::Top => match_term(sig, pattern, t, b),
            MatchKind::Anywhere => match_anywhere(sig, pattern, t, b).into_iter().map(|m| m.subst).collect(),
        };
        for sigma in candidates {
            if !self.rw.eval_condition(&cond.0, &sigma, &DefaultSearch)?.is_empty() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Bindings for `l[x <- t ; ...]`, naming variables of `rule`.
    fn rule_init(&self, rule: &Rule, subst: &[(Arc<str>, Term)], b: &Substitution) -> Result<Substitution> {
        let vars = rule.vars();
        let mut init = Substitution::new();
        for (name, value) in subst {
            let Some(var) = vars.iter().find(|v| v.name == *name) else {
                continue;
            };
            let value = self.rw.normalize(&b.apply(value))?;
            if !self.system.sig.leq(value.sort(), &var.sort) {
                return Err(Error::Sort(format!(
                    "cannot instantiate {}:{} with a term of sort {}",
                    var.name,
                    var.sort,
                    value.sort()
                )));
            }
            init.insert(var.clone(), value);
        }
        Ok(init)
    }

    fn apply_rule(
        &self,
        label: &str,
        subst: &[(Arc<str>, Term)],
        cond_strats: &[Strategy],
        top: bool,
        t: &Term,
        b: &Substitution,
    ) -> Result<TermSet> {
        let rules = self.system.rules_labeled(label);
        if rules.is_empty() {
            return Err(Error::Name(format!("no rule labeled `{label}`")));
        }
        if let Some((name, _)) = subst
            .iter()
            .find(|(n, _)| !rules.iter().any(|r| r.vars().iter().any(|v| v.name == *n)))
        {
            return Err(Error::Name(format!("rule [{label}] has no variable `{name}`")));
        }
        let place = if top { Where::Top } else { Where::Anywhere };
        *self.last_subject.borrow_mut() = Some(t.clone());
        let mut out = TermSet::new();
        for rule in rules {
            let init = self.rule_init(rule, subst, b)?;
            let n = rule.condition.rewrite_fragments();
            let res = if cond_strats.is_empty() {
                self.rw.rewrite_one(t, rule, place, &init, &DefaultSearch)?
            } else {
                if cond_strats.len() != n {
                    return Err(Error::Arity(format!(
                        "rule [{label}] has {n} rewrite conditions but {} strategies were given",
                        cond_strats.len()
                    )));
                }
                let solver = Controlled {
                    ev: self,
                    strats: cond_strats,
                    bindings: b,
                };
                self.rw.rewrite_one(t, rule, place, &init, &solver)?
            };
            out.extend(res);
        }
        if !out.is_empty() {
            if let Some(tr) = self.trace.borrow_mut().as_mut() {
                tr.push(Step {
                    label: label.into(),
                    from: t.clone(),
                    to: out.clone(),
                });
            }
            let k = self.inferences.get() + 1;
            self.inferences.set(k);
            if let Some(limit) = self.budgets().max_inferences {
                if k > limit {
                    return Err(Error::InferenceBudgetExceeded(limit));
                }
            }
        }
        Ok(out)
    }

    /// Matches of a `matchrew` pattern with condition solutions, the pattern
    /// with its subpatterns replaced by hole variables, and those holes.
    #[allow(clippy::type_complexity)]
    fn matchrew_sites(
        &self,
        kind: MatchKind,
        pattern: &Term,
        cond: &Condition,
        subs: &[(Term, Strategy)],
        t: &Term,
        b: &Substitution,
    ) -> Result<Vec<(Match, Substitution, Term, Vec<Var>)>> {
        let sig = &self.system.sig;
        let matches: Vec<Match> = match kind {
            MatchKind::Top => match_term(sig, pattern, t, b)
                .into_iter()
                .map(|subst| Match {
                    position: Position::root(),
                    subst,
                    remainder: Vec::new(),
                })
                .collect(),
            MatchKind::Anywhere => match_anywhere(sig, pattern, t, b),
        };
        let (ctx, holes) = hole_context(pattern, subs);
        let mut out = Vec::new();
        for m in matches {
            for theta in self.rw.eval_condition(&cond.0, &m.subst, &DefaultSearch)? {
                out.push((m.clone(), theta, ctx.clone(), holes.clone()));
            }
        }
        Ok(out)
    }

    /// Depth-first evaluation: calls `k` on results of `σ @ t` (possibly with
    /// repeats) until it breaks. Every reported term belongs to `σ @ t`.
    pub fn search(&self, s: &Strategy, t: &Term, b: &Substitution, k: &mut Visit<'_>) -> Result<ControlFlow<()>> {
        stacker::maybe_grow(RED_ZONE, STACK_GROWTH, || self.search_inner(s, t, b, k))
    }

    /// First result of `σ @ t` in depth-first order, if any.
    pub fn first(&self, s: &Strategy, t: &Term) -> Result<Option<Term>> {
        let mut found = None;
        let _ = self.search(s, t, &Substitution::new(), &mut |u| {
            found = Some(u.clone());
            Ok(ControlFlow::Break(()))
        })?;
        Ok(found)
    }

    fn nonempty(&self, s: &Strategy, t: &Term, b: &Substitution) -> Result<bool> {
        Ok(self
            .search(s, t, b, &mut |_| Ok(ControlFlow::Break(())))?
            .is_break())
    }

    fn search_inner(&self, s: &Strategy, t: &Term, b: &Substitution, k: &mut Visit<'_>) -> Result<ControlFlow<()>> {
        use ControlFlow::{Break, Continue};
        match s {
            Strategy::Idle => k(t),
            Strategy::Fail => Ok(Continue(())),
            Strategy::Rule { .. } | Strategy::Test { .. } => {
                for u in self.eval_with(s, t, b)? {
                    if k(&u)?.is_break() {
                        return Ok(Break(()));
                    }
                }
                Ok(Continue(()))
            }
            Strategy::Concat(x, y) => self.search(x, t, b, &mut |u| self.search(y, u, b, k)),
            Strategy::Union(x, y) => {
                if self.search(x, t, b, k)?.is_break() {
                    return Ok(Break(()));
                }
                self.search(y, t, b, k)
            }
            Strategy::Star(x) => {
                let mut seen = HashSet::new();
                self.dfs_closure(x, t, b, &mut seen, false, k)
            }
            Strategy::Plus(x) => {
                let mut seen = HashSet::new();
                self.search(x, t, b, &mut |u| self.dfs_closure(x, u, b, &mut seen, false, k))
            }
            Strategy::Bang(x) => {
                let mut seen = HashSet::new();
                self.dfs_closure(x, t, b, &mut seen, true, k)
            }
            Strategy::Cond(c, th, el) => {
                let mut any = false;
                let flow = self.search(c, t, b, &mut |u| {
                    any = true;
                    self.search(th, u, b, k)
                })?;
                if any {
                    Ok(flow)
                } else {
                    self.search(el, t, b, k)
                }
            }
            Strategy::OrElse(x, y) => {
                let mut any = false;
                let flow = self.search(x, t, b, &mut |u| {
                    any = true;
                    k(u)
                })?;
                if any {
                    Ok(flow)
                } else {
                    self.search(y, t, b, k)
                }
            }
            Strategy::Try(x) => {
                let mut any = false;
                let flow = self.search(x, t, b, &mut |u| {
                    any = true;
                    k(u)
                })?;
                if any {
                    Ok(flow)
                } else {
                    k(t)
                }
            }
            Strategy::Not(x) => {
                if self.nonempty(x, t, b)? {
                    Ok(Continue(()))
                } else {
                    k(t)
                }
            }
            Strategy::TestOf(x) => {
                if self.nonempty(x, t, b)? {
                    k(t)
                } else {
                    Ok(Continue(()))
                }
            }
            Strategy::MatchRew {
                kind,
                pattern,
                cond,
                subs,
            } => {
                for (m, theta, ctx, holes) in self.matchrew_sites(*kind, pattern, cond, subs, t, b)? {
                    let flow = self.fill_holes(&m, &theta, &ctx, &holes, subs, 0, theta.clone(), t, k)?;
                    if flow.is_break() {
                        return Ok(Break(()));
                    }
                }
                Ok(Continue(()))
            }
            Strategy::Call { name, args } => {
                let args = self.call_args(args, b)?;
                self.enter()?;
                let res = (|| {
                    for (body, theta) in self.call_sites(name, &args)? {
                        if self.search(&body, t, &theta, k)?.is_break() {
                            return Ok(Break(()));
                        }
                    }
                    Ok(Continue(()))
                })();
                self.leave();
                res
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn fill_holes(
        &self,
        m: &Match,
        theta: &Substitution,
        ctx: &Term,
        holes: &[Var],
        subs: &[(Term, Strategy)],
        i: usize,
        acc: Substitution,
        t: &Term,
        k: &mut Visit<'_>,
    ) -> Result<ControlFlow<()>> {
        if i == holes.len() {
            let r = self.rw.normalize(&m.plug(t, acc.apply(ctx)))?;
            return k(&r);
        }
        let (p, st) = &subs[i];
        self.search(st, &theta.apply(p), theta, &mut |u| {
            let mut a = acc.clone();
            a.insert(holes[i].clone(), u.clone());
            self.fill_holes(m, theta, ctx, holes, subs, i + 1, a, t, k)
        })
    }

    fn dfs_closure(
        &self,
        s: &Strategy,
        t: &Term,
        b: &Substitution,
        seen: &mut HashSet<Term>,
        only_irreducible: bool,
        k: &mut Visit<'_>,
    ) -> Result<ControlFlow<()>> {
        if !seen.insert(t.clone()) {
            return Ok(ControlFlow::Continue(()));
        }
        if seen.len() > self.budgets().max_states {
            return Err(Error::StateBudgetExceeded(self.budgets().max_states));
        }
        if !only_irreducible && k(t)?.is_break() {
            return Ok(ControlFlow::Break(()));
        }
        let mut successors = false;
        let flow = self.search(s, t, b, &mut |u| {
            successors = true;
            self.dfs_closure(s, u, b, seen, only_irreducible, k)
        })?;
        if flow.is_break() {
            return Ok(flow);
        }
        if only_irreducible && !successors {
            return k(t);
        }
        Ok(ControlFlow::Continue(()))
    }
}

/// Replaces each `matchrew` subpattern in `pattern` by a fresh hole variable.
fn hole_context(pattern: &Term, subs: &[(Term, Strategy)]) -> (Term, Vec<Var>) {
    let mut ctx = pattern.clone();
    let mut holes = Vec::new();
    let mut taken: Vec<Position> = Vec::new();
    for (i, (p, _)) in subs.iter().enumerate() {
        let hole = Var {
            name: format!("%hole{i}").into(),
            sort: p.sort().clone(),
        };
        let pos = pattern
            .positions()
            .into_iter()
            .find(|q| pattern.subterm(q) == Some(p) && !taken.iter().any(|t| t.overlaps(q)))
            .expect("matchrew subpatterns are checked at parse time");
        ctx = replace_raw(&ctx, &pos.0, Term::var(hole.clone()));
        taken.push(pos);
        holes.push(hole);
    }
    (ctx, holes)
}

/// Positional replacement without re-canonicalizing, so sibling positions stay valid.
fn replace_raw(t: &Term, pos: &[usize], new: Term) -> Term {
    match pos.split_first() {
        None => new,
        Some((&i, rest)) => {
            let (op, args) = t.as_app().expect("valid position");
            let mut args = args.to_vec();
            args[i - 1] = replace_raw(&args[i - 1], rest, new);
            Term::app(op.clone(), args)
        }
    }
}
