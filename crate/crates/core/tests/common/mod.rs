//! Fixtures shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

pub mod oracle;

use proptest::prelude::*;
use stratkit::syntax::{parse_strategy, parse_term, show, strat_scope, StratContext};
use stratkit::term::{ac_elements, ac_term, canonical_app};
use stratkit::{Budgets, Evaluator, Module, Session, Strategy as Strat, StrategyModule, Term, TermSet, Var};

/// A system module and a strategy module loaded through a session.
pub struct Theory {
    pub session: Session,
    pub system: String,
    pub smod: String,
}

impl Theory {
    pub fn load(text: &str, system: &str, smod: &str) -> Self {
        let mut session = Session::default();
        session.run(text, &mut Vec::new()).unwrap();
        Theory {
            session,
            system: system.into(),
            smod: smod.into(),
        }
    }

    pub fn module(&self) -> &Module {
        &self.session.lib.modules[&self.system]
    }

    pub fn strategies(&self) -> &StrategyModule {
        &self.session.lib.smods[&self.smod]
    }

    pub fn term(&self, text: &str) -> Term {
        parse_term(&strat_scope(self.strategies(), self.module()), text)
            .unwrap_or_else(|e| panic!("{text}: {e}"))
    }

    pub fn strat(&self, text: &str) -> Strat {
        let sm = self.strategies();
        let names: BTreeSet<String> = sm.decls.keys().map(|k| k.to_string()).collect();
        let ctx = StratContext {
            scope: strat_scope(sm, self.module()),
            system: self.module(),
            strategies: &names,
        };
        parse_strategy(&ctx, &mut stratkit::syntax::Cursor::new(text)).unwrap_or_else(|e| panic!("{text}: {e}"))
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::new(self.module(), self.strategies(), Budgets::default())
    }

    pub fn eval(&self, s: &str, t: &Term) -> TermSet {
        self.evaluator()
            .eval(&self.strat(s), t)
            .unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    pub fn set(&self, ts: &[&str]) -> TermSet {
        ts.iter().map(|t| self.term(t)).collect()
    }
}

/// River crossing plus a strategy module with extra variables. `H` and `Q`
/// never occur in generated strategies, so the law patterns cannot capture them.
pub fn river() -> Theory {
    let text = format!(
        "{}\nsmod LAWS is including RIVER-CROSSING-STRAT . var G : Group . var H : Group . var Q : Side . endsm",
        stratkit::session::RIVER
    );
    Theory::load(&text, "RIVER-CROSSING", "LAWS")
}

pub const OBJECTS: [&str; 4] = ["s", "w", "g", "c"];

/// A river state as text; `None` marks an eaten object.
pub fn state_text(sides: &[Option<bool>; 4]) -> String {
    OBJECTS
        .iter()
        .zip(sides)
        .filter_map(|(o, s)| s.map(|left| format!("{o}({})", if left { "left" } else { "right" })))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Nonempty river states, shepherd possibly absent.
pub fn arb_state() -> impl Strategy<Value = String> {
    proptest::array::uniform4(prop_oneof![Just(None), Just(Some(true)), Just(Some(false))])
        .prop_filter("nonempty", |s| s.iter().any(Option::is_some))
        .prop_map(|s| state_text(&s))
}

const LEAVES: &[&str] = &[
    "idle",
    "fail",
    "wolf-eats",
    "goat-eats",
    "shepherd-alone",
    "wolf",
    "goat",
    "cabbage",
    "top(shepherd-alone)",
    "top(goat)",
    "eating",
    "oneCrossing",
    "match s(S) G",
    "amatch w(S) g(S)",
    "amatch g(S) c(S') s.t. S =/= S'",
];

pub const RULES: [&str; 6] = ["wolf-eats", "goat-eats", "shepherd-alone", "wolf", "goat", "cabbage"];

/// Strategy expressions over the river theory, as text.
pub fn arb_strategy() -> impl Strategy<Value = String> {
    let leaf = proptest::sample::select(LEAVES).prop_map(str::to_string);
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) ; ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) | ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) orelse ({b})")),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, b, c)| format!("({a}) ? ({b}) : ({c})")),
            inner.clone().prop_map(|a| format!("not({a})")),
            inner.clone().prop_map(|a| format!("try({a})")),
            inner.clone().prop_map(|a| format!("test({a})")),
            inner.clone().prop_map(|a| format!("({a}) *")),
            inner.clone().prop_map(|a| format!("({a}) +")),
            inner.clone().prop_map(|a| format!("({a}) !")),
            inner.clone().prop_map(|a| format!("matchrew s(S) G by G using ({a})")),
            inner.prop_map(|a| format!("amatchrew g(S) by g(S) using ({a})")),
        ]
    })
}

/// One sample for the strategy-algebra laws.
#[derive(Debug, Clone)]
pub struct LawCase {
    pub s1: String,
    pub s2: String,
    pub s3: String,
    pub rule: &'static str,
    pub state: String,
}

pub fn arb_law_case() -> impl Strategy<Value = LawCase> {
    (
        arb_strategy(),
        arb_strategy(),
        arb_strategy(),
        proptest::sample::select(&RULES[..]),
        arb_state(),
    )
        .prop_map(|(s1, s2, s3, rule, state)| LawCase { s1, s2, s3, rule, state })
}

/// Checks every strategy-algebra law on one sample; returns the violated ones.
pub fn law_violations(th: &Theory, c: &LawCase) -> Vec<String> {
    let t = th.term(&c.state);
    let ev = |s: &str| th.eval(s, &t);
    let (a, b, d) = (&c.s1, &c.s2, &c.s3);
    let mut bad = Vec::new();
    let mut law = |name: &str, ok: bool| {
        if !ok {
            bad.push(format!("{name}: s1 = {a}, s2 = {b}, s3 = {d}, t = {}", c.state));
        }
    };
    law("idle", ev("idle") == TermSet::from([t.clone()]));
    law("fail", ev("fail").is_empty());
    law("union commutes", ev(&format!("({a}) | ({b})")) == ev(&format!("({b}) | ({a})")));
    law(
        "union associates",
        ev(&format!("(({a}) | ({b})) | ({d})")) == ev(&format!("({a}) | (({b}) | ({d}))")),
    );
    law(
        "concatenation associates",
        ev(&format!("(({a}) ; ({b})) ; ({d})")) == ev(&format!("({a}) ; (({b}) ; ({d}))")),
    );
    let first = ev(a);
    let expected = if first.is_empty() { ev(b) } else { first.clone() };
    law("orelse", ev(&format!("({a}) orelse ({b})")) == expected);
    law("test is not not", ev(&format!("test({a})")) == ev(&format!("not(not({a}))")));
    for u in ev(&format!("({a}) !")) {
        law("normal forms are irreducible", th.eval(a, &u).is_empty());
    }
    let star = ev(&format!("({a}) *"));
    for u in &star {
        law("star is closed", th.eval(a, u).is_subset(&star));
    }
    law("top within anywhere", ev(&format!("top({})", c.rule)).is_subset(&ev(c.rule)));
    law("matchrew on a variable", ev(&format!("matchrew H by H using ({a})")) == first);
    let group = th.module().sig.resolve("__", &["Group", "Group"]).unwrap();
    let mut elems = ac_elements(&group, &t);
    if let Some(i) = elems.iter().position(|e| e.op().is_some_and(|o| &*o.name == "s")) {
        let shepherd = elems.remove(i);
        if !elems.is_empty() {
            let rest = ac_term(&group, elems).unwrap();
            let expected: TermSet = th
                .evaluator()
                .eval(&th.strat(a), &rest)
                .unwrap()
                .into_iter()
                .map(|u| canonical_app(group.clone(), vec![shepherd.clone(), u]))
                .collect();
            law("matchrew congruence", ev(&format!("matchrew s(Q) H by H using ({a})")) == expected);
        }
    }
    bad
}

/// Variables in order of first occurrence.
fn occurrences(t: &Term, out: &mut Vec<Var>) {
    match t.as_var() {
        Some(v) if !out.contains(v) => out.push(v.clone()),
        Some(_) => {}
        None => t.args().iter().for_each(|a| occurrences(a, out)),
    }
}

/// Renames variables to `_1`, `_2`, ... by first occurrence across `ts`.
pub fn rename_canonically(ts: &[&Term]) -> Vec<Term> {
    let mut order = Vec::new();
    for t in ts {
        occurrences(t, &mut order);
    }
    let f = |v: &Var| {
        let i = order.iter().position(|w| w == v).unwrap();
        Var::new(&format!("_{}", i + 1), &v.sort)
    };
    ts.iter().map(|t| t.map_vars(&f)).collect()
}

/// Key of an unordered identity that ignores variable names.
pub fn identity_key(a: &Term, b: &Term) -> String {
    let one = rename_canonically(&[a, b]);
    let two = rename_canonically(&[b, a]);
    let k1 = format!("{} =. {}", show(&one[0]), show(&one[1]));
    let k2 = format!("{} =. {}", show(&two[0]), show(&two[1]));
    k1.min(k2)
}

/// Key of an oriented rule that ignores variable names.
pub fn rule_key(l: &Term, r: &Term) -> String {
    let v = rename_canonically(&[l, r]);
    format!("{} -> {}", show(&v[0]), show(&v[1]))
}

pub fn rule_keys(rules: &[(Term, Term)]) -> BTreeSet<String> {
    rules.iter().map(|(l, r)| rule_key(l, r)).collect()
}

pub const WORKED: &str = "mod EX is
  sort S .
  ops a b c : -> S .
  op f : S -> S .
  ops g h : S S -> S .
  vars x y : S .
  prec g > h > f > a .
  ident eqs : g(x, y) = a .
  ident eqs : g(x, y) = h(x, y) .
  ident eqs : h(x, y) = f(x) .
  ident eqs : h(x, y) = f(y) .
  ident overlap : f(g(x, y)) = a .
  ident overlap : g(x, b) = h(x, x) .
endm";

pub const GROUP: &str = "mod GROUP is
  sort G .
  op e : -> G .
  op i : G -> G .
  op _*_ : G G -> G .
  vars x y z : G .
  prec i > _*_ > e .
  ident axioms : e * x = x .
  ident axioms : i(x) * x = e .
  ident axioms : (x * y) * z = x * (y * z) .
endm";
