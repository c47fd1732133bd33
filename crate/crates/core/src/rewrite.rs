//! Equational normalization, condition solving and one-step rule application.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::matching::{match_anywhere, match_term, match_top, Match};
use crate::module::{Fragment, Module, Native, Rule};
use crate::subst::Substitution;
use crate::term::{canonical_app, Node, Term};

/// Resource limits shared by the engine and the strategy evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Equation applications per normalization.
    pub max_eq_steps: usize,
    /// Distinct states per fixpoint (`*`, `+`, `!`, condition search).
    pub max_states: usize,
    /// Nested strategy calls.
    pub max_depth: usize,
    /// Rule applications per evaluation, if limited.
    pub max_inferences: Option<usize>,
    /// Depth of the default search for uncontrolled rewrite conditions.
    pub search_depth: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_eq_steps: 100_000,
            max_states: 100_000,
            max_depth: 10_000,
            max_inferences: None,
            search_depth: 16,
        }
    }
}

/// Where a rule may be applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Where {
    Top,
    Anywhere,
}

/// Supplies the terms reachable from `start` for the `index`-th rewrite
/// fragment of a condition.
pub trait FragmentSolver {
    fn reach(&self, rw: &Rewriter<'_>, index: usize, start: &Term) -> Result<Vec<Term>>;
}

/// Breadth-first search over all rules of the module, bounded by
/// [`Budgets::search_depth`].
pub struct DefaultSearch;

impl FragmentSolver for DefaultSearch {
    fn reach(&self, rw: &Rewriter<'_>, _index: usize, start: &Term) -> Result<Vec<Term>> {
        let mut seen: HashSet<Term> = HashSet::from([start.clone()]);
        let mut order = vec![start.clone()];
        let mut queue = VecDeque::from([(start.clone(), 0usize)]);
        while let Some((t, d)) = queue.pop_front() {
            if d >= rw.budgets.search_depth {
                continue;
            }
            for u in rw.one_step(&t)? {
                if seen.insert(u.clone()) {
                    if seen.len() > rw.budgets.max_states {
                        return Err(Error::StateBudgetExceeded(rw.budgets.max_states));
                    }
                    order.push(u.clone());
                    queue.push_back((u, d + 1));
                }
            }
        }
        Ok(order)
    }
}

/// Rewriting context over one module.
pub struct Rewriter<'m> {
    pub module: &'m Module,
    pub budgets: Budgets,
    trivial_eqs: bool,
}

impl<'m> Rewriter<'m> {
    pub fn new(module: &'m Module, budgets: Budgets) -> Self {
        let trivial_eqs =
            module.equations.is_empty() && !module.sig.ops().any(|o| o.attrs.native);
        Rewriter {
            module,
            budgets,
            trivial_eqs,
        }
    }

    /// Leftmost-innermost normal form under the module's equations and
    /// native functions.
    pub fn normalize(&self, t: &Term) -> Result<Term> {
        if self.trivial_eqs {
            return Ok(t.clone());
        }
        let mut steps = 0;
        self.norm(t, &mut steps)
    }

    fn norm(&self, t: &Term, steps: &mut usize) -> Result<Term> {
        let Node::App(op, args) = t.node() else {
            return Ok(t.clone());
        };
        let args = args
            .iter()
            .map(|a| self.norm(a, steps))
            .collect::<Result<Vec<_>>>()?;
        let u = canonical_app(op.clone(), args);
        let Some((op, args)) = u.as_app() else {
            return Ok(u);
        };
        if op.attrs.native {
            if let Native::Function(f) = self.module.attachments.get(&op.name)? {
                if let Some(r) = f(args)? {
                    self.tick(steps)?;
                    return self.norm(&r, steps);
                }
            }
            return Ok(u);
        }
        for eq in &self.module.equations {
            for m in match_top(&self.module.sig, &eq.lhs, &u, &Substitution::new()) {
                let sols = self.eval_condition(&eq.condition.0, &m.subst, &DefaultSearch)?;
                if let Some(theta) = sols.into_iter().next() {
                    self.tick(steps)?;
                    let r = m.plug(&u, theta.apply(&eq.rhs));
                    return self.norm(&r, steps);
                }
            }
        }
        Ok(u)
    }

    fn tick(&self, steps: &mut usize) -> Result<()> {
        *steps += 1;
        if *steps > self.budgets.max_eq_steps {
            return Err(Error::NonTerminationSuspected(self.budgets.max_eq_steps));
        }
        Ok(())
    }

    fn has_native_call(&self, t: &Term) -> bool {
        t.contains_op(&|op| op.attrs.native)
    }

    /// Solves condition fragments left to right, threading bindings.
    pub fn eval_condition(
        &self,
        fragments: &[Fragment],
        sigma: &Substitution,
        solver: &dyn FragmentSolver,
    ) -> Result<Vec<Substitution>> {
        let sig = &self.module.sig;
        let mut partial = vec![sigma.clone()];
        let mut rewrite_index = 0;
        for frag in fragments {
            let mut next = Vec::new();
            for s in &partial {
                match frag {
                    Fragment::Equal(a, b) => {
                        if self.normalize(&s.apply(a))? == self.normalize(&s.apply(b))? {
                            next.push(s.clone());
                        }
                    }
                    Fragment::NotEqual(a, b) => {
                        if self.normalize(&s.apply(a))? != self.normalize(&s.apply(b))? {
                            next.push(s.clone());
                        }
                    }
                    Fragment::Assign(p, t) => {
                        let v = self.normalize(&s.apply(t))?;
                        if !self.has_native_call(&v) {
                            next.extend(match_term(sig, p, &v, s));
                        }
                    }
                    Fragment::Native(t) => {
                        let t = s.apply(t);
                        let (op, args) = t
                            .as_app()
                            .ok_or_else(|| Error::Config("native test must be an application".into()))?;
                        let args = args
                            .iter()
                            .map(|a| self.normalize(a))
                            .collect::<Result<Vec<_>>>()?;
                        match self.module.attachments.get(&op.name)? {
                            Native::Test(f) => {
                                if f(&args)? {
                                    next.push(s.clone());
                                }
                            }
                            Native::Function(_) => {
                                return Err(Error::Config(format!(
                                    "`{}` is a native function, not a test",
                                    op.name
                                )))
                            }
                        }
                    }
                    Fragment::Rewrite(t, p) => {
                        let start = self.normalize(&s.apply(t))?;
                        for u in solver.reach(self, rewrite_index, &start)? {
                            next.extend(match_term(sig, p, &u, s));
                        }
                    }
                }
            }
            if frag.is_rewrite() {
                rewrite_index += 1;
            }
            next.sort();
            next.dedup();
            partial = next;
            if partial.is_empty() {
                break;
            }
        }
        Ok(partial)
    }

    /// Matches of `rule` in `t` together with every solution of its condition.
    pub fn redexes(
        &self,
        t: &Term,
        rule: &Rule,
        place: Where,
        init: &Substitution,
        solver: &dyn FragmentSolver,
    ) -> Result<Vec<(Match, Substitution)>> {
        let sig = &self.module.sig;
        let matches = match place {
            Where::Top => match_top(sig, &rule.lhs, t, init),
            Where::Anywhere => match_anywhere(sig, &rule.lhs, t, init),
        };
        let mut out = Vec::new();
        for m in matches {
            for theta in self.eval_condition(&rule.condition.0, &m.subst, solver)? {
                out.push((m.clone(), theta));
            }
        }
        Ok(out)
    }

    /// One-step rewrites of `t` with `rule`, normalized and deduplicated.
    pub fn rewrite_one(
        &self,
        t: &Term,
        rule: &Rule,
        place: Where,
        init: &Substitution,
        solver: &dyn FragmentSolver,
    ) -> Result<BTreeSet<Term>> {
        let mut out = BTreeSet::new();
        for (m, theta) in self.redexes(t, rule, place, init, solver)? {
            if let Some(v) = rule.rhs.vars().into_iter().find(|v| !theta.contains(v)) {
                return Err(Error::Application(format!(
                    "variable `{}` of rule [{}] is not bound by matching, the condition or the substitution",
                    v.name, rule.label
                )));
            }
            let r = m.plug(t, theta.apply(&rule.rhs));
            out.insert(self.normalize(&r)?);
        }
        Ok(out)
    }

    /// All one-step rewrites with every rule, conditions solved by default search.
    pub fn one_step(&self, t: &Term) -> Result<BTreeSet<Term>> {
        let mut out = BTreeSet::new();
        for rule in &self.module.rules {
            match self.rewrite_one(t, rule, Where::Anywhere, &Substitution::new(), &DefaultSearch) {
                Ok(s) => out.extend(s),
                // Rules needing an explicit substitution cannot fire on their own.
                Err(Error::Application(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}
