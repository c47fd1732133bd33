//! Object-level rules: renaming, critical pairs, one-step reduction.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::matching::match_term;
use crate::subst::Substitution;
use crate::term::{term_order, Signature, Term, Var};
use crate::unify::unify;

/// An oriented rule `lhs -> rhs` over the user signature.
pub type CRule = (Term, Term);
/// An unordered identity; kept with the smaller side first.
pub type Identity = (Term, Term);

pub fn identity(a: Term, b: Term) -> Identity {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn rule_vars(r: &CRule) -> BTreeSet<Var> {
    let mut vs = r.0.vars();
    vs.extend(r.1.vars());
    vs
}

/// Renames every variable `v` of `r` to `v` followed by the smallest index
/// `k >= 1` that makes the copy variable-disjoint from `avoid`.
pub fn rename_apart(r: &CRule, avoid: &BTreeSet<Var>) -> CRule {
    let vars = rule_vars(r);
    if vars.is_empty() {
        return r.clone();
    }
    let avoid_names: BTreeSet<&str> = avoid.iter().map(|v| &*v.name).collect();
    let mut k = 1;
    loop {
        let clash = vars
            .iter()
            .any(|v| avoid_names.contains(format!("{}{k}", v.name).as_str()));
        if !clash {
            break;
        }
        k += 1;
    }
    rename_with(r, k)
}

/// Renames every variable `v` of `r` to `v` followed by `k`.
pub fn rename_with(r: &CRule, k: usize) -> CRule {
    let f = |v: &Var| Var {
        name: format!("{}{k}", v.name).into(),
        sort: v.sort.clone(),
    };
    (r.0.map_vars(&f), r.1.map_vars(&f))
}

fn occurrence_order(t: &Term, out: &mut Vec<Var>) {
    match t.as_var() {
        Some(v) => {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        None => t.args().iter().for_each(|a| occurrence_order(a, out)),
    }
}

/// Renames the variables of `r` in order of first occurrence (lhs, then rhs)
/// to the declared variables of the same sort, taken in name order. Sorts
/// that run out of declared names continue with `v1`, `v2`, ...
///
/// Two rules are variants of each other iff they tidy to the same rule.
pub fn tidy(r: &CRule, declared: &BTreeMap<String, Var>) -> CRule {
    let mut order = Vec::new();
    occurrence_order(&r.0, &mut order);
    occurrence_order(&r.1, &mut order);
    let mut pools: BTreeMap<&str, Vec<&Var>> = BTreeMap::new();
    for v in declared.values() {
        pools.entry(&v.sort).or_default().push(v);
    }
    let mut used: BTreeMap<&str, usize> = BTreeMap::new();
    let mut map: BTreeMap<Var, Var> = BTreeMap::new();
    for v in &order {
        let n = used.entry(&v.sort).or_default();
        let fresh = match pools.get(&*v.sort).and_then(|p| p.get(*n)) {
            Some(d) => (*d).clone(),
            None => Var {
                name: format!("v{}", *n + 1).into(),
                sort: v.sort.clone(),
            },
        };
        *n += 1;
        map.insert(v.clone(), fresh);
    }
    let f = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
    (r.0.map_vars(&f), r.1.map_vars(&f))
}

/// Critical pairs from overlapping a renamed copy of `r2` into `r1.lhs`.
/// The root overlap of a rule with itself is skipped.
pub fn critical_pairs(r1: &CRule, r2: &CRule) -> Result<Vec<Identity>> {
    let same = r1 == r2;
    let r2 = rename_apart(r2, &rule_vars(r1));
    let mut out = Vec::new();
    for pos in r1.0.positions() {
        if same && pos.is_root() {
            continue;
        }
        let sub = r1.0.subterm(&pos).expect("own position");
        if sub.is_var() {
            continue;
        }
        if let Some(sigma) = unify(sub, &r2.0)? {
            let left = sigma.apply(&r1.0.replace_at(&pos.0, r2.1.clone()));
            let right = sigma.apply(&r1.1);
            out.push(identity(left, right));
        }
    }
    Ok(out)
}

/// Critical pairs between `r` and each rule of `set`, in both directions, without duplicates.
pub fn cp_with_set(r: &CRule, set: &[CRule]) -> Result<Vec<Identity>> {
    let mut out = BTreeSet::new();
    for q in set {
        out.extend(critical_pairs(r, q)?);
        out.extend(critical_pairs(q, r)?);
    }
    Ok(out.into_iter().collect())
}

fn sorted(rules: &[CRule]) -> Vec<&CRule> {
    let mut rs: Vec<&CRule> = rules.iter().collect();
    rs.sort_by(|a, b| term_order(&a.0, &b.0).then_with(|| term_order(&a.1, &b.1)));
    rs
}

/// Positions in leftmost-innermost order: children left to right, then the node.
fn innermost_positions(t: &Term) -> Vec<Vec<usize>> {
    fn walk(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for (i, a) in t.args().iter().enumerate() {
            path.push(i + 1);
            walk(a, path, out);
            path.pop();
        }
        out.push(path.clone());
    }
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut out);
    out
}

fn step_with(sig: &Signature, t: &Term, rules: &[&CRule]) -> Option<Term> {
    for pos in innermost_positions(t) {
        let sub = t.subterm(&crate::term::Position(pos.clone())).unwrap();
        for (l, r) in rules {
            if let Some(sigma) = match_term(sig, l, sub, &Substitution::new()).into_iter().next() {
                return Some(t.replace_at(&pos, sigma.apply(r)));
            }
        }
    }
    None
}

/// One rewrite step: leftmost-innermost redex, first applicable rule in term order.
pub fn reduce(sig: &Signature, t: &Term, rules: &[CRule]) -> Option<Term> {
    step_with(sig, t, &sorted(rules))
}

/// One step on the lhs of `rule`, using only rules whose lhs `rule` cannot rewrite.
pub fn reduce_encompass(sig: &Signature, rule: &CRule, rules: &[CRule]) -> Option<Term> {
    let allowed: Vec<&CRule> = sorted(rules)
        .into_iter()
        .filter(|(l, _)| {
            !l.positions().iter().any(|p| {
                !match_term(sig, &rule.0, l.subterm(p).unwrap(), &Substitution::new()).is_empty()
            })
        })
        .collect();
    step_with(sig, &rule.0, &allowed)
}

/// The rule with the fewest symbols, ties broken by term order of lhs then rhs.
pub fn least_rule(rules: &[CRule]) -> Option<CRule> {
    rules
        .iter()
        .min_by(|a, b| {
            (a.0.size() + a.1.size())
                .cmp(&(b.0.size() + b.1.size()))
                .then_with(|| term_order(&a.0, &b.0))
                .then_with(|| term_order(&a.1, &b.1))
        })
        .cloned()
}

/// Normal form under `rules` by repeated [`reduce`].
pub fn normal_form(sig: &Signature, t: &Term, rules: &[CRule], max_steps: usize) -> Result<Term> {
    let rs = sorted(rules);
    let mut cur = t.clone();
    for _ in 0..max_steps {
        match step_with(sig, &cur, &rs) {
            Some(next) => cur = next,
            None => return Ok(cur),
        }
    }
    Err(Error::NonTerminationSuspected(max_steps))
}
