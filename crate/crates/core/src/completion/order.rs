//! Symbol precedences and the lexicographic path order.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::term::{Node, Term};

/// Strict partial order on operator names, closed under transitivity.
///
/// Mixfix names are compared without their underscores, so `*` and `_*_`
/// denote the same symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Precedence {
    greater: BTreeSet<(String, String)>,
}

fn key(name: &str) -> String {
    let k: String = name.chars().filter(|c| *c != '_').collect();
    if k.is_empty() {
        name.to_string()
    } else {
        k
    }
}

impl Precedence {
    /// Builds the order from chains `f > g > h`; a cycle is an error.
    pub fn from_chains(chains: &[Vec<String>]) -> Result<Self> {
        let mut succ: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for chain in chains {
            for pair in chain.windows(2) {
                succ.entry(key(&pair[0])).or_default().insert(key(&pair[1]));
            }
        }
        let mut greater = BTreeSet::new();
        for start in succ.keys() {
            let mut stack: Vec<&String> = succ[start].iter().collect();
            let mut seen = BTreeSet::new();
            while let Some(g) = stack.pop() {
                if !seen.insert(g.clone()) {
                    continue;
                }
                if g == start {
                    return Err(Error::Config(format!("precedence cycle through `{start}`")));
                }
                greater.insert((start.clone(), g.clone()));
                if let Some(next) = succ.get(g) {
                    stack.extend(next.iter());
                }
            }
        }
        Ok(Precedence { greater })
    }

    /// Parses `f > g > h` chains separated by commas or semicolons.
    pub fn parse(text: &str) -> Result<Self> {
        let chains: Vec<Vec<String>> = text
            .split([',', ';'])
            .filter(|c| !c.trim().is_empty())
            .map(|c| c.split('>').map(|s| s.trim().to_string()).collect())
            .collect();
        if chains.iter().flatten().any(|s| s.is_empty()) {
            return Err(Error::Config(format!("malformed precedence `{text}`")));
        }
        Self::from_chains(&chains)
    }

    pub fn gt(&self, f: &str, g: &str) -> bool {
        self.greater.contains(&(key(f), key(g)))
    }
}

/// `s >lpo t` with left-to-right lexicographic status for every symbol.
pub fn lpo_greater(s: &Term, t: &Term, prec: &Precedence) -> Result<bool> {
    for u in [s, t] {
        if let Some(op) = first_ac(u) {
            return Err(Error::UnsupportedAcOrder(op));
        }
    }
    Ok(lpo(s, t, prec))
}

fn first_ac(t: &Term) -> Option<String> {
    match t.node() {
        Node::Var(_) => None,
        Node::App(op, args) => {
            if op.is_ac() {
                Some(op.name.to_string())
            } else {
                args.iter().find_map(first_ac)
            }
        }
    }
}

fn lpo(s: &Term, t: &Term, prec: &Precedence) -> bool {
    if s == t {
        return false;
    }
    let Some((f, ss)) = s.as_app() else {
        return false;
    };
    let Some((g, ts)) = t.as_app() else {
        return s.occurs(t.as_var().unwrap());
    };
    if ss.iter().any(|si| si == t || lpo(si, t, prec)) {
        return true;
    }
    if f.same(g) {
        let Some(i) = (0..ss.len()).find(|&i| ss[i] != ts[i]) else {
            return false;
        };
        lpo(&ss[i], &ts[i], prec) && ts.iter().all(|tj| lpo(s, tj, prec))
    } else if prec.gt(&f.name, &g.name) {
        ts.iter().all(|tj| lpo(s, tj, prec))
    } else {
        false
    }
}
