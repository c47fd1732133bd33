//! Many-sorted first-order terms with flattened, sorted AC arguments.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Sort = Arc<str>;

/// Equational and syntactic attributes of an operator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpAttrs {
    pub assoc: bool,
    pub comm: bool,
    /// Identity element of an AC operator.
    pub identity: Option<Term>,
    /// Evaluated by a native attachment during normalization.
    pub native: bool,
    /// Mixfix precedence, lower binds tighter.
    pub prec: Option<u32>,
}

#[derive(Debug)]
pub struct OpDecl {
    pub name: Arc<str>,
    pub args: Vec<Sort>,
    pub result: Sort,
    pub attrs: OpAttrs,
}

pub type Op = Arc<OpDecl>;

impl OpDecl {
    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ac(&self) -> bool {
        self.attrs.assoc && self.attrs.comm
    }

    pub fn is_comm_only(&self) -> bool {
        self.attrs.comm && !self.attrs.assoc
    }

    /// Operators are identified by name and sort profile.
    pub fn same(&self, other: &OpDecl) -> bool {
        std::ptr::eq(self, other)
            || (self.name == other.name && self.args == other.args && self.result == other.result)
    }

    fn profile_cmp(&self, other: &OpDecl) -> Ordering {
        self.name
            .cmp(&other.name)
            .then(self.args.len().cmp(&other.args.len()))
            .then_with(|| self.result.cmp(&other.result))
            .then_with(|| self.args.cmp(&other.args))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: &str) -> Self {
        Var {
            name: name.into(),
            sort: sort.into(),
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Var(Var),
    App(Op, Vec<Term>),
}

/// A shared, immutable term. Equality, hashing and ordering are structural.
#[derive(Clone)]
pub struct Term {
    node: Arc<Node>,
    hash: u64,
    size: usize,
}

impl Term {
    pub fn var(v: Var) -> Term {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        0u8.hash(&mut h);
        v.hash(&mut h);
        Term {
            hash: h.finish(),
            size: 1,
            node: Arc::new(Node::Var(v)),
        }
    }

    /// Builds an application without canonicalizing it.
    pub fn app(op: Op, args: Vec<Term>) -> Term {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        1u8.hash(&mut h);
        op.name.hash(&mut h);
        op.result.hash(&mut h);
        args.len().hash(&mut h);
        let mut size = 1;
        for a in &args {
            a.hash.hash(&mut h);
            size += a.size;
        }
        Term {
            hash: h.finish(),
            size,
            node: Arc::new(Node::App(op, args)),
        }
    }

    pub fn constant(op: &Op) -> Term {
        Term::app(op.clone(), Vec::new())
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn as_var(&self) -> Option<&Var> {
        match &*self.node {
            Node::Var(v) => Some(v),
            Node::App(..) => None,
        }
    }

    pub fn as_app(&self) -> Option<(&Op, &[Term])> {
        match &*self.node {
            Node::App(op, args) => Some((op, args)),
            Node::Var(_) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        self.as_var().is_some()
    }

    pub fn op(&self) -> Option<&Op> {
        self.as_app().map(|(op, _)| op)
    }

    pub fn args(&self) -> &[Term] {
        match &*self.node {
            Node::App(_, args) => args,
            Node::Var(_) => &[],
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Sort of the top symbol (the least sort, since operators are not overloaded
    /// on the same argument sorts).
    pub fn sort(&self) -> &Sort {
        match &*self.node {
            Node::Var(v) => &v.sort,
            Node::App(op, _) => &op.result,
        }
    }

    pub fn is_ground(&self) -> bool {
        match &*self.node {
            Node::Var(_) => false,
            Node::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match &*self.node {
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match &*self.node {
            Node::Var(w) => w == v,
            Node::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn contains_op(&self, pred: &dyn Fn(&OpDecl) -> bool) -> bool {
        match &*self.node {
            Node::Var(_) => false,
            Node::App(op, args) => pred(op) || args.iter().any(|a| a.contains_op(pred)),
        }
    }

    /// Renames every variable through `f`, canonicalizing the result.
    pub fn map_vars(&self, f: &dyn Fn(&Var) -> Var) -> Term {
        match &*self.node {
            Node::Var(v) => Term::var(f(v)),
            Node::App(op, args) => {
                canonical_app(op.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    pub fn subterm(&self, pos: &Position) -> Option<&Term> {
        let mut cur = self;
        for &i in &pos.0 {
            cur = cur.args().get(i.checked_sub(1)?)?;
        }
        Some(cur)
    }

    /// Replaces the subterm at `pos` and re-canonicalizes the spine.
    pub fn replace_at(&self, pos: &[usize], new: Term) -> Term {
        match pos.split_first() {
            None => new,
            Some((&i, rest)) => {
                let (op, args) = self.as_app().expect("valid position");
                let mut args = args.to_vec();
                args[i - 1] = args[i - 1].replace_at(rest, new);
                canonical_app(op.clone(), args)
            }
        }
    }

    /// All positions in pre-order.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        fn walk(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Position>) {
            out.push(Position(path.clone()));
            for (i, a) in t.args().iter().enumerate() {
                path.push(i + 1);
                walk(a, path, out);
                path.pop();
            }
        }
        walk(self, &mut path, &mut out);
        out
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash && self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.hash.hash(state);
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        term_order(self, other)
    }
}

/// Total order on terms: variables before applications, then operator name,
/// arity, sort profile, and arguments left to right.
pub fn term_order(a: &Term, b: &Term) -> Ordering {
    if Arc::ptr_eq(&a.node, &b.node) {
        return Ordering::Equal;
    }
    match (&*a.node, &*b.node) {
        (Node::Var(x), Node::Var(y)) => x.cmp(y),
        (Node::Var(_), Node::App(..)) => Ordering::Less,
        (Node::App(..), Node::Var(_)) => Ordering::Greater,
        (Node::App(f, xs), Node::App(g, ys)) => f
            .profile_cmp(g)
            .then_with(|| xs.len().cmp(&ys.len()))
            .then_with(|| {
                for (x, y) in xs.iter().zip(ys) {
                    match term_order(x, y) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            }),
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::Var(v) => write!(f, "{}:{}", v.name, v.sort),
            Node::App(op, args) if args.is_empty() => write!(f, "{}", op.name),
            Node::App(op, args) => {
                write!(f, "{}(", op.name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a:?}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Builds `op(args)` in canonical form, assuming the arguments are canonical.
pub fn canonical_app(op: Op, args: Vec<Term>) -> Term {
    if op.is_ac() {
        let mut flat = Vec::with_capacity(args.len());
        for a in args {
            match a.as_app() {
                Some((g, inner)) if g.same(&op) => flat.extend(inner.iter().cloned()),
                _ => flat.push(a),
            }
        }
        if let Some(id) = &op.attrs.identity {
            flat.retain(|a| a != id);
            match flat.len() {
                0 => return id.clone(),
                1 => return flat.pop().unwrap(),
                _ => {}
            }
        }
        flat.sort();
        Term::app(op, flat)
    } else if op.is_comm_only() && args.len() == 2 {
        let mut args = args;
        if args[0] > args[1] {
            args.swap(0, 1);
        }
        Term::app(op, args)
    } else {
        Term::app(op, args)
    }
}

/// AC-flattened, argument-sorted equivalent of `t`. Idempotent.
pub fn canonicalize(t: &Term) -> Term {
    match t.node() {
        Node::Var(_) => t.clone(),
        Node::App(op, args) => canonical_app(op.clone(), args.iter().map(canonicalize).collect()),
    }
}

/// Arguments of `t` viewed as an AC multiset of `op` (identity gives the empty multiset).
pub fn ac_elements(op: &Op, t: &Term) -> Vec<Term> {
    match t.as_app() {
        Some((g, args)) if g.same(op) => args.to_vec(),
        _ if op.attrs.identity.as_ref() == Some(t) => Vec::new(),
        _ => vec![t.clone()],
    }
}

/// Rebuilds an AC term from a multiset of elements.
pub fn ac_term(op: &Op, elems: Vec<Term>) -> Option<Term> {
    match elems.len() {
        0 => op.attrs.identity.clone(),
        1 => elems.into_iter().next(),
        _ => Some(canonical_app(op.clone(), elems)),
    }
}

/// Sequence of 1-based child indices; empty is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    /// True if one position is a prefix of the other.
    pub fn overlaps(&self, other: &Position) -> bool {
        let n = self.0.len().min(other.0.len());
        self.0[..n] == other.0[..n]
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Sorts, subsort relation and operator declarations.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    sorts: BTreeSet<Sort>,
    /// Reflexive-transitive supersorts of each sort.
    supersorts: BTreeMap<Sort, BTreeSet<Sort>>,
    direct_subsorts: Vec<(Sort, Sort)>,
    ops: BTreeMap<Arc<str>, Vec<Op>>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, name: &str) -> Sort {
        if let Some(s) = self.sorts.get(name) {
            return s.clone();
        }
        let s: Sort = name.into();
        self.sorts.insert(s.clone());
        self.supersorts.insert(s.clone(), BTreeSet::from([s.clone()]));
        s
    }

    pub fn has_sort(&self, name: &str) -> bool {
        self.sorts.contains(name)
    }

    pub fn sort(&self, name: &str) -> Result<Sort> {
        self.sorts
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Sort(format!("undeclared sort `{name}`")))
    }

    pub fn sorts(&self) -> impl Iterator<Item = &Sort> {
        self.sorts.iter()
    }

    pub fn subsort_pairs(&self) -> &[(Sort, Sort)] {
        &self.direct_subsorts
    }

    /// Declares `sub < sup`. Cycles are rejected.
    pub fn add_subsort(&mut self, sub: &str, sup: &str) -> Result<()> {
        let sub = self.sort(sub)?;
        let sup = self.sort(sup)?;
        if self.leq(&sup, &sub) {
            return Err(Error::Sort(format!("subsort cycle between `{sub}` and `{sup}`")));
        }
        self.direct_subsorts.push((sub, sup.clone()));
        let above: BTreeSet<Sort> = self.supersorts[&sup].clone();
        for supers in self.supersorts.values_mut() {
            if supers.contains(&self.direct_subsorts.last().unwrap().0) {
                supers.extend(above.iter().cloned());
            }
        }
        Ok(())
    }

    pub fn leq(&self, a: &str, b: &str) -> bool {
        a == b || self.supersorts.get(a).is_some_and(|s| s.contains(b))
    }

    pub fn add_op(
        &mut self,
        name: &str,
        args: &[&str],
        result: &str,
        attrs: OpAttrs,
    ) -> Result<Op> {
        let args: Vec<Sort> = args.iter().map(|s| self.sort(s)).collect::<Result<_>>()?;
        let result = self.sort(result)?;
        if attrs.assoc && !attrs.comm {
            return Err(Error::Signature(format!(
                "operator `{name}`: assoc is only supported together with comm"
            )));
        }
        if attrs.comm && (args.len() != 2 || args[0] != args[1]) {
            return Err(Error::Signature(format!(
                "operator `{name}`: comm requires two arguments of the same sort"
            )));
        }
        if attrs.assoc && (args[0] != result) {
            return Err(Error::Signature(format!(
                "operator `{name}`: assoc requires argument sorts equal to the result sort"
            )));
        }
        if let Some(id) = &attrs.identity {
            if !attrs.assoc {
                return Err(Error::Signature(format!(
                    "operator `{name}`: identity elements require assoc comm"
                )));
            }
            if !self.leq(id.sort(), &result) || !id.is_ground() {
                return Err(Error::Signature(format!(
                    "operator `{name}`: identity must be a ground term of sort {result}"
                )));
            }
        }
        let entry = self.ops.entry(name.into()).or_default();
        if entry.iter().any(|o| o.args == args) {
            return Err(Error::Signature(format!(
                "operator `{name}` already declared with this argument profile"
            )));
        }
        let op = Arc::new(OpDecl {
            name: name.into(),
            args,
            result,
            attrs,
        });
        entry.push(op.clone());
        Ok(op)
    }

    /// Imports an already-built operator (used when merging modules).
    pub fn import_op(&mut self, op: &Op) -> Result<()> {
        for s in op.args.iter().chain(std::iter::once(&op.result)) {
            self.add_sort(s);
        }
        let entry = self.ops.entry(op.name.clone()).or_default();
        if let Some(existing) = entry.iter().find(|o| o.args == op.args) {
            if existing.same(op) {
                return Ok(());
            }
            return Err(Error::Signature(format!(
                "operator `{}` clashes with an existing declaration",
                op.name
            )));
        }
        entry.push(op.clone());
        Ok(())
    }

    /// Imports sorts, subsorts and operators of another signature.
    pub fn import(&mut self, other: &Signature) -> Result<()> {
        for s in &other.sorts {
            self.add_sort(s);
        }
        for (a, b) in &other.direct_subsorts {
            if !self.leq(a, b) {
                self.add_subsort(a, b)?;
            }
        }
        for ops in other.ops.values() {
            for op in ops {
                self.import_op(op)?;
            }
        }
        Ok(())
    }

    pub fn ops_named(&self, name: &str) -> &[Op] {
        self.ops.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_op_name(&self, name: &str) -> bool {
        self.ops.contains_key(name)
    }

    pub fn ops(&self) -> impl Iterator<Item = &Op> {
        self.ops.values().flatten()
    }

    /// Unique operator with this name and arity, if any.
    pub fn op(&self, name: &str, arity: usize) -> Result<Op> {
        let cands: Vec<&Op> = self
            .ops_named(name)
            .iter()
            .filter(|o| o.arity() == arity)
            .collect();
        match cands.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(Error::Name(format!("no operator `{name}` with {arity} arguments"))),
            _ => Err(Error::Name(format!("operator `{name}`/{arity} is overloaded"))),
        }
    }

    /// Resolves an overloaded operator by the sorts of its arguments.
    pub fn resolve(&self, name: &str, arg_sorts: &[&str]) -> Result<Op> {
        let cands: Vec<&Op> = self
            .ops_named(name)
            .iter()
            .filter(|o| {
                o.arity() == arg_sorts.len()
                    && o.args.iter().zip(arg_sorts).all(|(want, got)| self.leq(got, want))
            })
            .collect();
        match cands.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(Error::Sort(format!(
                "no operator `{name}` accepts argument sorts ({})",
                arg_sorts.join(", ")
            ))),
            many => {
                // Prefer the declaration with the least argument sorts.
                let best = many.iter().find(|o| {
                    many.iter()
                        .all(|p| o.args.iter().zip(&p.args).all(|(x, y)| self.leq(x, y)))
                });
                best.map(|o| (*o).clone()).ok_or_else(|| {
                    Error::Sort(format!("ambiguous operator `{name}` for these arguments"))
                })
            }
        }
    }

    /// Checks that every argument sort is a subsort of the declared one.
    pub fn check(&self, t: &Term) -> Result<()> {
        if let Some((op, args)) = t.as_app() {
            if op.is_ac() && args.len() >= 2 {
                for a in args {
                    if !self.leq(a.sort(), &op.args[0]) {
                        return Err(Error::Sort(format!(
                            "argument {a:?} of `{}` has sort {}, expected {}",
                            op.name,
                            a.sort(),
                            op.args[0]
                        )));
                    }
                    self.check(a)?;
                }
                return Ok(());
            }
            if args.len() != op.arity() {
                return Err(Error::Sort(format!("`{}` applied to {} arguments", op.name, args.len())));
            }
            for (a, want) in args.iter().zip(&op.args) {
                if !self.leq(a.sort(), want) {
                    return Err(Error::Sort(format!(
                        "argument {a:?} of `{}` has sort {}, expected {want}",
                        op.name,
                        a.sort()
                    )));
                }
                self.check(a)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn river_sig() -> (Signature, Op, Op, Op) {
        let mut sig = Signature::new();
        sig.add_sort("Side");
        sig.add_sort("Group");
        let left = sig.add_op("left", &[], "Side", OpAttrs::default()).unwrap();
        sig.add_op("right", &[], "Side", OpAttrs::default()).unwrap();
        let s = sig.add_op("s", &["Side"], "Group", OpAttrs::default()).unwrap();
        let group = sig
            .add_op(
                "__",
                &["Group", "Group"],
                "Group",
                OpAttrs {
                    assoc: true,
                    comm: true,
                    ..Default::default()
                },
            )
            .unwrap();
        (sig, left, s, group)
    }

    fn c(op: &Op) -> Term {
        Term::constant(op)
    }

    #[test]
    fn canonicalize_constant_is_identity() {
        let (_, left, _, _) = river_sig();
        assert_eq!(canonicalize(&c(&left)), c(&left));
    }

    #[test]
    fn canonicalize_flattens_and_sorts() {
        let (mut sig, left, s, group) = river_sig();
        let w = sig.add_op("w", &["Side"], "Group", OpAttrs::default()).unwrap();
        let g = sig.add_op("g", &["Side"], "Group", OpAttrs::default()).unwrap();
        let l = c(&left);
        let wl = Term::app(w, vec![l.clone()]);
        let sl = Term::app(s, vec![l.clone()]);
        let gl = Term::app(g, vec![l]);
        let nested = Term::app(
            group.clone(),
            vec![Term::app(group.clone(), vec![wl.clone(), sl.clone()]), gl.clone()],
        );
        let canon = canonicalize(&nested);
        let (op, args) = canon.as_app().unwrap();
        assert!(op.same(&group));
        assert_eq!(args, &[gl, sl, wl]);
        assert_eq!(canonicalize(&canon), canon);
    }

    #[test]
    fn term_order_examples() {
        let mut sig = Signature::new();
        sig.add_sort("S");
        let a = sig.add_op("a", &[], "S", OpAttrs::default()).unwrap();
        let b = sig.add_op("b", &[], "S", OpAttrs::default()).unwrap();
        let f = sig.add_op("f", &["S"], "S", OpAttrs::default()).unwrap();
        let g = sig.add_op("g", &["S"], "S", OpAttrs::default()).unwrap();
        let x = Term::var(Var::new("x", "S"));
        let fx = Term::app(f.clone(), vec![x.clone()]);
        assert_eq!(term_order(&x, &fx), Ordering::Less);
        let fa = Term::app(f.clone(), vec![c(&a)]);
        assert_eq!(term_order(&fa, &fa.clone()), Ordering::Equal);
        let ga = Term::app(g, vec![c(&a)]);
        let fb = Term::app(f, vec![c(&b)]);
        assert_eq!(term_order(&ga, &fb), Ordering::Greater);
    }

    #[test]
    fn signature_rejects_bad_attributes() {
        let mut sig = Signature::new();
        sig.add_sort("S");
        sig.add_sort("T");
        let assoc_only = OpAttrs {
            assoc: true,
            ..Default::default()
        };
        assert!(sig.add_op("f", &["S", "S"], "S", assoc_only).is_err());
        let ac = OpAttrs {
            assoc: true,
            comm: true,
            ..Default::default()
        };
        assert!(sig.add_op("g", &["S", "S"], "T", ac.clone()).is_err());
        assert!(sig.add_op("h", &["S"], "S", ac).is_err());
    }

    #[test]
    fn subsorts_are_transitive_and_acyclic() {
        let mut sig = Signature::new();
        for s in ["A", "B", "C"] {
            sig.add_sort(s);
        }
        sig.add_subsort("A", "B").unwrap();
        sig.add_subsort("B", "C").unwrap();
        assert!(sig.leq("A", "C"));
        assert!(!sig.leq("C", "A"));
        assert!(sig.add_subsort("C", "A").is_err());
    }

    #[test]
    fn identity_elements_collapse() {
        let mut sig = Signature::new();
        sig.add_sort("Set");
        let mt = sig.add_op("mt", &[], "Set", OpAttrs::default()).unwrap();
        let x = sig.add_op("x", &[], "Set", OpAttrs::default()).unwrap();
        let u = sig
            .add_op(
                "__",
                &["Set", "Set"],
                "Set",
                OpAttrs {
                    assoc: true,
                    comm: true,
                    identity: Some(c(&mt)),
                    ..Default::default()
                },
            )
            .unwrap();
        let t = canonical_app(u.clone(), vec![c(&mt), c(&x)]);
        assert_eq!(t, c(&x));
        let t = canonical_app(u, vec![c(&mt), c(&mt)]);
        assert_eq!(t, c(&mt));
    }
}
