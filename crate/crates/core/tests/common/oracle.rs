//! Brute-force oracles and the instance families they are checked on.
use std::collections::BTreeSet;
use std::sync::OnceLock;

use super::*;
use stratkit::completion::{build_completion_theory, completion_budgets, critical_pairs, CRule, Variant};
use stratkit::Strategy as Strat;
use stratkit::matching::{match_anywhere, Match};
use stratkit::syntax::{parse_module, parse_term, Cursor, Library, Scope};
use stratkit::term::{ac_term, Op};
use stratkit::unify::unify;
use stratkit::{canonicalize, term_order, Module, Position, Substitution, Term, Var};

pub mod brute {
    use super::*;

    /// Every multiset of `k` elements drawn from `items`, as index lists.
    pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for rest in multisets(n, k - 1) {
            let lo = rest.last().copied().unwrap_or(0);
            for i in lo..n {
                let mut v = rest.clone();
                v.push(i);
                out.push(v);
            }
        }
        out
    }

    /// Subterms of `t`, plus the term built from every sub-multiset of at
    /// least two arguments of each AC node.
    pub fn universe(t: &Term) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        fn walk(t: &Term, out: &mut BTreeSet<Term>) {
            out.insert(t.clone());
            if let Some((op, args)) = t.as_app() {
                if op.is_ac() {
                    for mask in 1u32..(1 << args.len()) {
                        if mask.count_ones() >= 2 {
                            let pick = (0..args.len()).filter(|i| mask & (1 << i) != 0).map(|i| args[i].clone());
                            out.insert(ac_term(op, pick.collect()).unwrap());
                        }
                    }
                }
                args.iter().for_each(|a| walk(a, out));
            }
        }
        walk(t, &mut out);
        out
    }

    fn positions(t: &Term, here: Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position(here.clone()));
        for (i, a) in t.args().iter().enumerate() {
            let mut p = here.clone();
            p.push(i + 1);
            positions(a, p, out);
        }
    }

    fn assignments(vars: &[Var], values: &[Term]) -> Vec<Substitution> {
        let mut out = vec![Substitution::new()];
        for v in vars {
            let mut next = Vec::new();
            for s in &out {
                for t in values.iter().filter(|t| t.sort() == &v.sort) {
                    let mut s = s.clone();
                    s.insert(v.clone(), t.clone());
                    next.push(s);
                }
            }
            out = next;
        }
        out
    }

    pub type Found = BTreeSet<(Position, Substitution, Vec<Term>)>;

    /// Every (position, substitution, remainder) with `σ(p)` equal to the
    /// subterm at the position, or to a proper sub-multiset of at least two of
    /// its arguments when `p` is rooted by the same AC symbol.
    pub fn match_anywhere(p: &Term, s: &Term) -> Found {
        let vars: Vec<Var> = p.vars().into_iter().collect();
        let values: Vec<Term> = universe(s).into_iter().collect();
        let sigmas = assignments(&vars, &values);
        let instances: Vec<(Term, &Substitution)> = sigmas.iter().map(|g| (canonicalize(&g.apply(p)), g)).collect();
        let mut ps = Vec::new();
        positions(s, vec![], &mut ps);
        let mut out = Found::new();
        for pos in ps {
            let node = s.subterm(&pos).unwrap();
            let mut targets = vec![(node.clone(), Vec::new())];
            if let (Some((f, _)), Some((g, args))) = (p.as_app(), node.as_app()) {
                if f.is_ac() && f.same(g) && args.len() > 2 {
                    for mask in 1u32..(1 << args.len()) - 1 {
                        if mask.count_ones() >= 2 {
                            let (inside, outside): (Vec<usize>, Vec<usize>) =
                                (0..args.len()).partition(|i| mask & (1 << i) != 0);
                            let mut rest: Vec<Term> = outside.iter().map(|&i| args[i].clone()).collect();
                            rest.sort_by(term_order);
                            let picked = ac_term(f, inside.iter().map(|&i| args[i].clone()).collect()).unwrap();
                            targets.push((picked, rest));
                        }
                    }
                }
            }
            for (target, rest) in targets {
                for (inst, sigma) in &instances {
                    if *inst == target {
                        out.insert((pos.clone(), (*sigma).clone(), rest.clone()));
                    }
                }
            }
        }
        out
    }

    fn rename(t: &Term) -> Term {
        t.map_vars(&|v| Var::new(&format!("{}'", v.name), &v.sort))
    }

    fn replace(t: &Term, pos: &[usize], new: &Term) -> Term {
        match pos.split_first() {
            None => new.clone(),
            Some((&i, rest)) => {
                let (op, args) = t.as_app().unwrap();
                let mut args = args.to_vec();
                args[i - 1] = replace(&args[i - 1], rest, new);
                Term::app(op.clone(), args)
            }
        }
    }

    /// Critical pairs by direct enumeration of the positions of `r1.lhs`.
    pub fn critical_pairs(r1: &CRule, r2: &CRule) -> Vec<(Term, Term)> {
        let (l2, rhs2) = (rename(&r2.0), rename(&r2.1));
        let mut ps = Vec::new();
        positions(&r1.0, vec![], &mut ps);
        let mut out = Vec::new();
        for pos in ps {
            if pos.0.is_empty() && r1 == r2 {
                continue;
            }
            let sub = r1.0.subterm(&pos).unwrap();
            if sub.is_var() {
                continue;
            }
            if let Some(s) = unify(sub, &l2).unwrap() {
                out.push((s.apply(&replace(&r1.0, &pos.0, &rhs2)), s.apply(&r1.1)));
            }
        }
        out
    }
}

pub fn found(ms: &[Match]) -> brute::Found {
    ms.iter()
        .map(|m| {
            let mut r = m.remainder.clone();
            r.sort_by(term_order);
            (m.position.clone(), m.subst.clone(), r)
        })
        .collect()
}

pub const AC_SIG: &str = "mod M is sort S . ops a b : -> S . op f : S -> S .
  op _+_ : S S -> S [assoc comm] . vars x y : S . endm";

pub fn ac_module() -> &'static Module {
    static M: OnceLock<Module> = OnceLock::new();
    M.get_or_init(|| parse_module(&mut Cursor::new(AC_SIG), &Library::default()).unwrap())
}

pub fn pt(m: &Module, s: &str) -> Term {
    parse_term(&Scope::new(&m.sig, &m.vars), s).unwrap()
}

pub fn ac_of(plus: &Op, items: &[Term], k: usize) -> Vec<Term> {
    brute::multisets(items.len(), k)
        .into_iter()
        .map(|ix| ac_term(plus, ix.into_iter().map(|i| items[i].clone()).collect()).unwrap())
        .collect()
}

/// Small subjects and patterns with AC nodes of up to five arguments.
pub fn ac_instances() -> (Vec<Term>, Vec<Term>) {
    let m = ac_module();
    let plus = m.sig.op("_+_", 2).unwrap();
    let f = m.sig.op("f", 1).unwrap();
    let t = |s: &str| pt(m, s);
    let app = |x: &Term| Term::app(f.clone(), vec![x.clone()]);
    let mut lvl1 = vec![t("a"), t("b"), t("f(a)"), t("f(b)")];
    for k in 2..=3 {
        lvl1.extend(ac_of(&plus, &[t("a"), t("b")], k));
    }
    let mut subjects: BTreeSet<Term> = lvl1.iter().cloned().collect();
    subjects.extend(lvl1.iter().map(app));
    for k in 2..=5 {
        subjects.extend(ac_of(&plus, &[t("a"), t("b"), t("f(a)")], k));
    }
    for k in 2..=3 {
        subjects.extend(ac_of(&plus, &[t("a"), t("f(a)"), t("f(a + b)"), t("f(f(b))")], k));
    }
    let p0 = [t("x"), t("y"), t("a"), t("f(x)"), t("f(a)")];
    let mut patterns: BTreeSet<Term> = p0.iter().cloned().collect();
    patterns.extend(p0.iter().map(app));
    for k in 2..=3 {
        patterns.extend(ac_of(&plus, &p0, k));
    }
    patterns.extend([t("f(x + y)"), t("f(x + a)"), t("x + f(y + a)")]);
    (subjects.into_iter().collect(), patterns.into_iter().collect())
}

/// Pairs on which `match_anywhere` and the oracle disagree.
pub fn match_discrepancies() -> (usize, Vec<String>) {
    let m = ac_module();
    let (subjects, patterns) = ac_instances();
    let mut bad = Vec::new();
    let mut n = 0;
    for p in &patterns {
        for s in &subjects {
            n += 1;
            let got = match_anywhere(&m.sig, p, s, &Substitution::new());
            let set = found(&got);
            if set.len() != got.len() || set != brute::match_anywhere(p, s) {
                bad.push(format!("{p:?} in {s:?}"));
            }
        }
    }
    (n, bad)
}

pub const CP_SIG: &str = "mod C is sort S . ops a b : -> S . op f : S -> S . op g : S S -> S .
  vars x y : S . endm";

pub fn cp_module() -> &'static Module {
    static M: OnceLock<Module> = OnceLock::new();
    M.get_or_init(|| parse_module(&mut Cursor::new(CP_SIG), &Library::default()).unwrap())
}

/// Non-variable terms of depth at most three over `a b f g` and `x y`, each
/// paired with a right-hand side: its first variable, or a constant.
pub fn cp_rules() -> Vec<CRule> {
    let m = cp_module();
    let t = |s: &str| pt(m, s);
    let f = m.sig.op("f", 1).unwrap();
    let g = m.sig.op("g", 2).unwrap();
    let mut all = vec![t("a"), t("b"), t("x"), t("y")];
    for _ in 0..2 {
        let mut next = all.clone();
        for s in &all {
            next.push(Term::app(f.clone(), vec![s.clone()]));
            for u in &all {
                next.push(Term::app(g.clone(), vec![s.clone(), u.clone()]));
            }
        }
        next.sort();
        next.dedup();
        all = next;
    }
    all.into_iter()
        .filter(|l| !l.is_var())
        .map(|l| {
            let mut order = Vec::new();
            first_var(&l, &mut order);
            let r = match order.first() {
                Some(v) => Term::var(v.clone()),
                None if l == t("b") => t("a"),
                None => t("b"),
            };
            (l, r)
        })
        .collect()
}

pub fn first_var(t: &Term, out: &mut Vec<Var>) {
    match t.as_var() {
        Some(v) => out.push(v.clone()),
        None => t.args().iter().for_each(|a| first_var(a, out)),
    }
}

pub fn keys(ids: &[(Term, Term)]) -> Vec<String> {
    let mut v: Vec<String> = ids.iter().map(|(a, b)| identity_key(a, b)).collect();
    v.sort();
    v
}

/// Rule pairs on which `critical_pairs` and the oracle disagree.
pub fn cp_discrepancies(rules: &[CRule]) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut n = 0;
    for r1 in rules {
        for r2 in rules {
            n += 1;
            let got = critical_pairs(r1, r2).unwrap();
            if keys(&got) != keys(&brute::critical_pairs(r1, r2)) {
                bad.push(format!("{r1:?} / {r2:?}"));
            }
        }
    }
    (n, bad)
}

/// Reachable states of `(eating ; oneCrossing) *`, by explicit search.
pub fn river_reachable(start: [Option<bool>; 4]) -> BTreeSet<[Option<bool>; 4]> {
    type St = [Option<bool>; 4];
    let eat_steps = |s: &St| -> Vec<St> {
        let mut out = Vec::new();
        let [sh, w, g, c] = *s;
        if let (Some(sh), Some(w), Some(g)) = (sh, w, g) {
            if w == g && sh != w {
                out.push([Some(sh), Some(w), None, c]);
            }
        }
        if let (Some(sh), Some(g), Some(c)) = (sh, g, c) {
            if g == c && sh != g {
                out.push([Some(sh), s[1], Some(g), None]);
            }
        }
        out
    };
    let eaten = |s: &St| -> BTreeSet<St> {
        let mut done = BTreeSet::new();
        let mut seen = BTreeSet::from([*s]);
        let mut stack = vec![*s];
        while let Some(u) = stack.pop() {
            let next = eat_steps(&u);
            if next.is_empty() {
                done.insert(u);
            }
            for v in next {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        done
    };
    let crossings = |s: &St| -> Vec<St> {
        let mut out = Vec::new();
        let Some(sh) = s[0] else { return out };
        let mut alone = *s;
        alone[0] = Some(!sh);
        out.push(alone);
        for i in 1..4 {
            if s[i] == Some(sh) {
                let mut v = *s;
                v[0] = Some(!sh);
                v[i] = Some(!sh);
                out.push(v);
            }
        }
        out
    };
    let mut seen = BTreeSet::from([start]);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for e in eaten(&u) {
            for v in crossings(&e) {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
    }
    seen
}

/// Ground terms over `a b c f g h` of depth at most `d`.
pub fn ground(m: &Module, d: usize) -> Vec<Term> {
    let sc = Scope::new(&m.sig, &m.vars);
    let mut all: Vec<Term> = ["a", "b", "c"].iter().map(|s| parse_term(&sc, s).unwrap()).collect();
    let f = m.sig.op("f", 1).unwrap();
    let bin = [m.sig.op("g", 2).unwrap(), m.sig.op("h", 2).unwrap()];
    for _ in 1..d {
        let mut next = all.clone();
        for s in &all {
            next.push(Term::app(f.clone(), vec![s.clone()]));
            for u in &all {
                for op in &bin {
                    next.push(Term::app(op.clone(), vec![s.clone(), u.clone()]));
                }
            }
        }
        next.sort();
        next.dedup();
        all = next;
    }
    all
}

pub fn find(uf: &mut [usize], i: usize) -> usize {
    if uf[i] != i {
        let r = find(uf, uf[i]);
        uf[i] = r;
    }
    uf[i]
}

/// Ground congruence closure of `ids` over `big`, read back on `small`.
pub fn ground_partition(ids: &[(Term, Term)], big: &[Term], small: &[Term]) -> BTreeSet<BTreeSet<Term>> {
    let index: std::collections::BTreeMap<&Term, usize> = big.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut uf: Vec<usize> = (0..big.len()).collect();
    for (l, r) in ids {
        let vars: Vec<Var> = l.vars().into_iter().chain(r.vars()).collect::<BTreeSet<_>>().into_iter().collect();
        let mut idx = vec![0usize; vars.len()];
        loop {
            let mut s = Substitution::new();
            for (v, &i) in vars.iter().zip(&idx) {
                s.insert(v.clone(), small[i].clone());
            }
            if let (Some(&i), Some(&j)) = (index.get(&s.apply(l)), index.get(&s.apply(r))) {
                let (a, b) = (find(&mut uf, i), find(&mut uf, j));
                uf[a] = b;
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < small.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    loop {
        let mut seen: std::collections::BTreeMap<(String, Vec<usize>), usize> = Default::default();
        let mut changed = false;
        for (i, t) in big.iter().enumerate() {
            let Some((op, args)) = t.as_app() else { continue };
            let key = (op.name.to_string(), args.iter().map(|a| find(&mut uf, index[a])).collect());
            match seen.get(&key) {
                Some(&j) => {
                    let (a, b) = (find(&mut uf, i), find(&mut uf, j));
                    if a != b {
                        uf[a] = b;
                        changed = true;
                    }
                }
                None => {
                    seen.insert(key, i);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut classes: std::collections::BTreeMap<usize, BTreeSet<Term>> = Default::default();
    for t in small {
        let r = find(&mut uf, index[t]);
        classes.entry(r).or_default().insert(t.clone());
    }
    classes.into_values().collect()
}

/// For each completion variant on the worked example, the recorded steps
/// whose source and target systems induce different ground theories.
pub fn unsound_steps() -> Vec<(Variant, &'static str, usize, String)> {
    let module = parse_module(&mut Cursor::new(WORKED), &Library::default()).unwrap();
    let mut bad = Vec::new();
    for (v, set) in Variant::ALL.into_iter().flat_map(|v| [(v, "eqs"), (v, "overlap")]) {
        let th = build_completion_theory(v, &module).unwrap();
        let big = ground(&th.system, 3);
        let small = ground(&th.system, 2);
        let theory_of = |sys: &Term| {
            let (rules, ids) = th.components(sys).expect("system term");
            let all: Vec<(Term, Term)> = rules.into_iter().flatten().chain(ids).collect();
            ground_partition(&all, &big, &small)
        };
        let e0 = &module.identities[set];
        let initial = ground_partition(e0, &big, &small);
        assert!(initial.len() > 2 && initial.len() < small.len(), "{initial:?}");
        let ev = th.evaluator(completion_budgets());
        ev.record();
        let fin = ev.first(&Strat::call(&v.entry()), &th.initial_system(e0)).unwrap().expect("success");
        assert_eq!(theory_of(&fin), initial);
        let trace = ev.take_trace();
        assert!(trace.iter().any(|s| &*s.label == "Deduce") || set == "eqs");
        for (i, step) in trace.iter().enumerate() {
            let before = theory_of(&step.from);
            for to in step.to.iter() {
                if th.components(to).is_some() && theory_of(to) != before {
                    bad.push((v, set, i, step.label.to_string()));
                }
            }
        }
    }
    bad
}
