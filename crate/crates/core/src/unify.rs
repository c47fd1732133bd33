//! Syntactic first-order unification with occurs check.

use crate::error::{Error, Result};
use crate::subst::Substitution;
use crate::term::{Node, Term};

/// Most general unifier of `a` and `b`, or `None` if they do not unify.
///
/// When a variable of `a` meets a variable of `b`, the variable of `a` is
/// bound. The result is idempotent. Operators with equational attributes are
/// rejected with [`Error::UnsupportedAcUnification`].
pub fn unify(a: &Term, b: &Term) -> Result<Option<Substitution>> {
    let mut sub = Substitution::new();
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((s, t)) = stack.pop() {
        let s = sub.apply(&s);
        let t = sub.apply(&t);
        if s == t {
            continue;
        }
        match (s.node(), t.node()) {
            (Node::Var(v), _) => {
                if t.occurs(v) {
                    return Ok(None);
                }
                bind(&mut sub, v.clone(), t);
            }
            (_, Node::Var(v)) => {
                if s.occurs(v) {
                    return Ok(None);
                }
                bind(&mut sub, v.clone(), s);
            }
            (Node::App(f, xs), Node::App(g, ys)) => {
                for op in [f, g] {
                    if op.attrs.comm || op.attrs.assoc {
                        return Err(Error::UnsupportedAcUnification(op.name.to_string()));
                    }
                }
                if !f.same(g) || xs.len() != ys.len() {
                    return Ok(None);
                }
                for (x, y) in xs.iter().zip(ys).rev() {
                    stack.push((x.clone(), y.clone()));
                }
            }
        }
    }
    Ok(Some(sub))
}

fn bind(sub: &mut Substitution, v: crate::term::Var, t: Term) {
    let single: Substitution = [(v, t)].into_iter().collect();
    *sub = sub.compose(&single);
}
