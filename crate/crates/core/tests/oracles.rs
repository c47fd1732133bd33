mod common;

use std::collections::BTreeSet;

use common::oracle::*;
use common::*;
use stratkit::matching::{match_anywhere, match_top, match_term};
use stratkit::syntax::{parse_module, Cursor, Library};
use stratkit::unify::unify;
use stratkit::{Substitution, Term, Var};

#[test]
fn match_anywhere_agrees_with_enumeration() {
    let (n, bad) = match_discrepancies();
    assert!(n > 4000, "{n} pairs");
    assert!(bad.is_empty(), "{} of {n}: {:?}", bad.len(), &bad[..bad.len().min(5)]);
}

#[test]
fn critical_pairs_agree_with_enumeration() {
    let rules = cp_rules();
    assert!(rules.len() > 500);
    let (n, bad) = cp_discrepancies(&rules);
    assert!(bad.is_empty(), "{} of {n}: {:?}", bad.len(), &bad[..bad.len().min(5)]);
}

#[test]
fn river_extension_match_and_unique_anywhere_match() {
    let th = river();
    let m = th.module();
    let p = th.term("w(S) g(S) s(S')");
    let subject = th.term("w(left) g(left) s(right) c(left)");
    let got = match_top(&m.sig, &p, &subject, &Substitution::new());
    assert_eq!(found(&got), brute::match_anywhere(&p, &subject)
        .into_iter().filter(|(pos, _, _)| pos.is_root()).collect());
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].remainder, vec![th.term("c(left)")]);
    let p = th.term("s(S) g(S)");
    let full = th.term("s(left) w(right) g(left) c(right)");
    let got = match_anywhere(&m.sig, &p, &full, &Substitution::new());
    assert_eq!(found(&got), brute::match_anywhere(&p, &full));
    assert_eq!(got.len(), 1);
}

#[test]
fn river_reachability_agrees_with_search() {
    let th = river();
    let start = [Some(true); 4];
    let expected: BTreeSet<Term> = river_reachable(start).iter().map(|s| th.term(&state_text(s))).collect();
    let init = th.term(&state_text(&start));
    assert_eq!(th.eval("allCE", &init), expected);
    assert_eq!(th.eval("solve", &init), th.set(&["s(right) w(right) g(right) c(right)"]));
}

#[test]
fn unifiers_are_most_general_on_regression_pairs() {
    let m = cp_module();
    let text = CP_SIG.replace("vars x y : S .", "vars x y u v : S .");
    let m2 = parse_module(&mut Cursor::new(&text), &Library::default()).unwrap();
    let t = |s: &str| pt(&m2, s);
    let values: Vec<Term> = ["a", "b", "f(a)", "f(b)", "g(a, b)", "g(a, a)", "f(f(a))"].iter().map(|s| t(s)).collect();
    let pairs = [
        ("g(x, f(y))", "g(f(u), v)"),
        ("f(x)", "f(g(u, v))"),
        ("g(x, x)", "g(u, f(v))"),
        ("g(x, y)", "g(y, a)"),
        ("g(x, f(x))", "g(f(u), u)"),
        ("g(x, y)", "g(u, u)"),
        ("f(x)", "g(u, v)"),
        ("g(f(x), y)", "g(u, f(u))"),
    ];
    let all_vars: Vec<Var> = ["x", "y", "u", "v"].iter().map(|n| Var::new(n, "S")).collect();
    for (l, r) in pairs {
        let (l, r) = (t(l), t(r));
        let mgu = unify(&l, &r).unwrap();
        let mut instances = 0;
        let mut idx = [0usize; 4];
        loop {
            let theta = Substitution::from_pairs(&m.sig, all_vars.iter().cloned().zip(idx.iter().map(|&i| values[i].clone()))).unwrap();
            if theta.apply(&l) == theta.apply(&r) {
                instances += 1;
                let sigma = mgu.as_ref().expect("a unifier exists, so unify must succeed");
                let mut rho = Substitution::new();
                for v in &all_vars {
                    let img = sigma.apply(&Term::var(v.clone()));
                    let target = theta.apply(&Term::var(v.clone()));
                    let ext = match_term(&m.sig, &img, &target, &rho);
                    assert_eq!(ext.len(), 1, "{theta:?} is not an instance of {sigma:?}");
                    rho = ext.into_iter().next().unwrap();
                }
            }
            let mut k = 0;
            while k < 4 {
                idx[k] += 1;
                if idx[k] < values.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == 4 {
                break;
            }
        }
        if mgu.is_some() {
            assert!(instances > 0, "{l:?} =? {r:?}");
        }
    }
}


#[test]
fn completion_steps_preserve_the_ground_theory() {
    let bad = unsound_steps();
    assert!(bad.is_empty(), "{bad:?}");
}

