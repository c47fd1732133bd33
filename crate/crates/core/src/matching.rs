//! Syntactic, commutative and AC matching, at the top and anywhere.
//!
//! AC operators may carry an identity element; a variable whose sort admits
//! the AC sort absorbs a sub-multiset (possibly empty when an identity exists).
//! Top matching against an AC subject also reports extension matches: the
//! pattern matches a proper sub-multiset of at least two arguments and the
//! unmatched siblings are returned as the remainder.

use crate::subst::Substitution;
use crate::term::{ac_elements, ac_term, canonical_app, Op, Position, Signature, Term, Var};

/// A match of a pattern at some position of a subject.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Match {
    pub position: Position,
    pub subst: Substitution,
    /// Unmatched AC siblings at `position`; empty when the whole subterm matched.
    pub remainder: Vec<Term>,
}

impl Match {
    /// Puts `replacement` back in place of the matched part of `subject`.
    pub fn plug(&self, subject: &Term, replacement: Term) -> Term {
        let new = if self.remainder.is_empty() {
            replacement
        } else {
            let node = subject.subterm(&self.position).expect("match position");
            let op = node.op().expect("AC node").clone();
            let mut elems = self.remainder.clone();
            elems.push(replacement);
            canonical_app(op, elems)
        };
        subject.replace_at(&self.position.0, new)
    }
}

fn is_collection_var(sig: &Signature, op: &Op, v: &Var) -> bool {
    sig.leq(&op.result, &v.sort)
}

/// All substitutions extending `init` with `init'(pattern) = subject` modulo AC.
pub fn match_term(
    sig: &Signature,
    pattern: &Term,
    subject: &Term,
    init: &Substitution,
) -> Vec<Substitution> {
    let mut out = Vec::new();
    match_rec(sig, pattern, subject, init.clone(), &mut out);
    out.sort();
    out.dedup();
    out
}

fn match_rec(
    sig: &Signature,
    pattern: &Term,
    subject: &Term,
    sub: Substitution,
    out: &mut Vec<Substitution>,
) {
    if let Some(v) = pattern.as_var() {
        match sub.get(v) {
            Some(bound) => {
                if bound == subject {
                    out.push(sub);
                }
            }
            None => {
                if sig.leq(subject.sort(), &v.sort) {
                    let mut sub = sub;
                    sub.insert(v.clone(), subject.clone());
                    out.push(sub);
                }
            }
        }
        return;
    }
    if pattern.is_ground() {
        if pattern == subject {
            out.push(sub);
        }
        return;
    }
    let (f, ps) = pattern.as_app().unwrap();
    if f.is_ac() {
        let elems = ac_elements(f, subject);
        if elems.len() == 1 && subject.op().is_some_and(|g| g.same(f)) {
            return;
        }
        if elems.len() == 1 && !sig.leq(subject.sort(), &f.args[0]) {
            return;
        }
        for (s, _) in match_ac(sig, f, ps, &elems, sub, false) {
            out.push(s);
        }
        return;
    }
    let Some((g, ss)) = subject.as_app() else {
        return;
    };
    if !f.same(g) || ps.len() != ss.len() {
        return;
    }
    if f.is_comm_only() {
        match_args(sig, ps, ss, sub.clone(), out);
        if ss[0] != ss[1] {
            let swapped = [ss[1].clone(), ss[0].clone()];
            match_args(sig, ps, &swapped, sub, out);
        }
    } else {
        match_args(sig, ps, ss, sub, out);
    }
}

fn match_args(
    sig: &Signature,
    ps: &[Term],
    ss: &[Term],
    sub: Substitution,
    out: &mut Vec<Substitution>,
) {
    let mut partial = vec![sub];
    for (p, s) in ps.iter().zip(ss) {
        let mut next = Vec::new();
        for sub in partial {
            match_rec(sig, p, s, sub, &mut next);
        }
        if next.is_empty() {
            return;
        }
        partial = next;
    }
    out.extend(partial);
}

/// Matches the AC argument list `ps` of `op` against the multiset `elems`.
/// Returns each solution with its unmatched elements; unless `allow_remainder`,
/// only solutions consuming every element are returned.
pub fn match_ac(
    sig: &Signature,
    op: &Op,
    ps: &[Term],
    elems: &[Term],
    sub: Substitution,
    allow_remainder: bool,
) -> Vec<(Substitution, Vec<Term>)> {
    // Most constrained first: non-variables, then element variables, then
    // variables that can absorb sub-multisets.
    let mut order: Vec<&Term> = ps.iter().collect();
    order.sort_by_key(|p| match p.as_var() {
        None => 0,
        Some(v) if sub.contains(v) => 1,
        Some(v) if !is_collection_var(sig, op, v) => 2,
        Some(_) => 3,
    });
    let mut used = vec![false; elems.len()];
    let mut out = Vec::new();
    ac_rec(sig, op, &order, 0, elems, &mut used, sub, allow_remainder, &mut out);
    out.sort();
    out.dedup();
    out
}

#[allow(clippy::too_many_arguments)]
fn ac_rec(
    sig: &Signature,
    op: &Op,
    ps: &[&Term],
    idx: usize,
    elems: &[Term],
    used: &mut Vec<bool>,
    sub: Substitution,
    allow_remainder: bool,
    out: &mut Vec<(Substitution, Vec<Term>)>,
) {
    if idx == ps.len() {
        let rest: Vec<Term> = elems
            .iter()
            .zip(used.iter())
            .filter(|(_, u)| !**u)
            .map(|(e, _)| e.clone())
            .collect();
        if allow_remainder || rest.is_empty() {
            out.push((sub, rest));
        }
        return;
    }
    let p = ps[idx];
    let last = idx + 1 == ps.len();
    match p.as_var() {
        Some(v) if sub.contains(v) => {
            // Bound variable: its elements must all be present.
            let want = ac_elements(op, sub.get(v).unwrap());
            let mut taken = Vec::new();
            for w in &want {
                let hit = (0..elems.len()).find(|&j| !used[j] && &elems[j] == w);
                match hit {
                    Some(j) => {
                        used[j] = true;
                        taken.push(j);
                    }
                    None => {
                        for j in taken {
                            used[j] = false;
                        }
                        return;
                    }
                }
            }
            ac_rec(sig, op, ps, idx + 1, elems, used, sub, allow_remainder, out);
            for j in taken {
                used[j] = false;
            }
        }
        Some(v) if is_collection_var(sig, op, v) => {
            let free: Vec<usize> = (0..elems.len()).filter(|&j| !used[j]).collect();
            if last && !allow_remainder {
                bind_collection(sig, op, ps, idx, elems, used, &sub, v, &free, allow_remainder, out);
                return;
            }
            // Group equal free elements so each sub-multiset is produced once.
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for &j in &free {
                match groups.iter_mut().find(|g| elems[g[0]] == elems[j]) {
                    Some(g) => g.push(j),
                    None => groups.push(vec![j]),
                }
            }
            let mut counts = vec![0usize; groups.len()];
            loop {
                let chosen: Vec<usize> = groups
                    .iter()
                    .zip(&counts)
                    .flat_map(|(g, &c)| g[..c].iter().copied())
                    .collect();
                bind_collection(sig, op, ps, idx, elems, used, &sub, v, &chosen, allow_remainder, out);
                // next combination
                let mut k = 0;
                loop {
                    if k == groups.len() {
                        return;
                    }
                    if counts[k] < groups[k].len() {
                        counts[k] += 1;
                        break;
                    }
                    counts[k] = 0;
                    k += 1;
                }
            }
        }
        _ => {
            let mut tried: Vec<&Term> = Vec::new();
            for j in 0..elems.len() {
                if used[j] || tried.contains(&&elems[j]) {
                    continue;
                }
                tried.push(&elems[j]);
                let mut subs = Vec::new();
                match_rec(sig, p, &elems[j], sub.clone(), &mut subs);
                if subs.is_empty() {
                    continue;
                }
                used[j] = true;
                for s in subs {
                    ac_rec(sig, op, ps, idx + 1, elems, used, s, allow_remainder, out);
                }
                used[j] = false;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn bind_collection(
    sig: &Signature,
    op: &Op,
    ps: &[&Term],
    idx: usize,
    elems: &[Term],
    used: &mut Vec<bool>,
    sub: &Substitution,
    v: &Var,
    chosen: &[usize],
    allow_remainder: bool,
    out: &mut Vec<(Substitution, Vec<Term>)>,
) {
    let value = ac_term(op, chosen.iter().map(|&j| elems[j].clone()).collect());
    let Some(value) = value else { return };
    if !sig.leq(value.sort(), &v.sort) {
        return;
    }
    for &j in chosen {
        used[j] = true;
    }
    let mut s = sub.clone();
    s.insert(v.clone(), value);
    ac_rec(sig, op, ps, idx + 1, elems, used, s, allow_remainder, out);
    for &j in chosen {
        used[j] = false;
    }
}

/// Matches at the root of `subject`, including AC extension matches.
pub fn match_top(
    sig: &Signature,
    pattern: &Term,
    subject: &Term,
    init: &Substitution,
) -> Vec<Match> {
    match_top_at(sig, pattern, subject, init, &Position::root())
}

fn match_top_at(
    sig: &Signature,
    pattern: &Term,
    subject: &Term,
    init: &Substitution,
    pos: &Position,
) -> Vec<Match> {
    let mut out: Vec<Match> = match_term(sig, pattern, subject, init)
        .into_iter()
        .map(|subst| Match {
            position: pos.clone(),
            subst,
            remainder: Vec::new(),
        })
        .collect();
    if let (Some((f, ps)), Some((g, ss))) = (pattern.as_app(), subject.as_app()) {
        if f.is_ac() && f.same(g) && ss.len() > 2 {
            for (subst, rest) in match_ac(sig, f, ps, ss, init.clone(), true) {
                if !rest.is_empty() && ss.len() - rest.len() >= 2 {
                    out.push(Match {
                        position: pos.clone(),
                        subst,
                        remainder: rest,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| a.remainder.cmp(&b.remainder).then_with(|| a.subst.cmp(&b.subst)));
    out.dedup();
    out
}

/// Matches at every position of `subject` in pre-order.
pub fn match_anywhere(
    sig: &Signature,
    pattern: &Term,
    subject: &Term,
    init: &Substitution,
) -> Vec<Match> {
    let mut out = Vec::new();
    for pos in subject.positions() {
        let sub = subject.subterm(&pos).unwrap();
        out.extend(match_top_at(sig, pattern, sub, init, &pos));
    }
    out
}
