//! First-order terms, substitutions, head reduction and unification.
//!
//! Everything the resolution engine manipulates is a [`Term`]: class goals,
//! instance heads, the synthesized instance terms themselves and the field
//! values compared by the diamond linter.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;

/// Metavariable identifier, allocated per synthesis call.
pub type MetaId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// A constant head applied to arguments. Nullary constants have no args.
    Const(String, Vec<Term>),
    /// A rigid, named variable (binder variable or unknown in a goal).
    Var(String),
    /// A unification variable.
    Meta(MetaId),
    /// A natural number literal.
    Nat(BigUint),
}

pub const ADD: &str = "add";
pub const MUL: &str = "mul";

impl Term {
    pub fn constant(name: impl Into<String>) -> Term {
        Term::Const(name.into(), Vec::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Const(name.into(), args)
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn nat(n: u64) -> Term {
        Term::Nat(BigUint::from(n))
    }

    /// Head constant name, if any.
    pub fn head(&self) -> Option<&str> {
        match self {
            Term::Const(name, _) => Some(name),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Const(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(self, Term::Const(_, args) if !args.is_empty())
    }

    pub fn contains_meta(&self) -> bool {
        match self {
            Term::Meta(_) => true,
            Term::Const(_, args) => args.iter().any(Term::contains_meta),
            _ => false,
        }
    }

    pub fn metas(&self, out: &mut Vec<MetaId>) {
        match self {
            Term::Meta(m) => {
                if !out.contains(m) {
                    out.push(*m);
                }
            }
            Term::Const(_, args) => args.iter().for_each(|a| a.metas(out)),
            _ => {}
        }
    }

    /// Rigid variables in order of first occurrence.
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_, args) => args.iter().for_each(|a| a.vars(out)),
            _ => {}
        }
    }

    pub fn mentions_var(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => v == name,
            Term::Const(_, args) => args.iter().any(|a| a.mentions_var(name)),
            _ => false,
        }
    }

    /// Replace rigid variables by the mapped terms.
    pub fn subst_vars(&self, map: &HashMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(name, args) => Term::Const(
                name.clone(),
                args.iter().map(|a| a.subst_vars(map)).collect(),
            ),
            _ => self.clone(),
        }
    }

    /// Renumber metavariables by first occurrence, starting at zero.
    ///
    /// Two goals that differ only in the naming of their metavariables map to
    /// the same normalized term.
    pub fn normalize_metas(&self) -> Term {
        fn go(t: &Term, seen: &mut HashMap<MetaId, MetaId>) -> Term {
            match t {
                Term::Meta(m) => {
                    let next = seen.len() as MetaId;
                    Term::Meta(*seen.entry(*m).or_insert(next))
                }
                Term::Const(name, args) => {
                    Term::Const(name.clone(), args.iter().map(|a| go(a, seen)).collect())
                }
                _ => t.clone(),
            }
        }
        go(self, &mut HashMap::new())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Meta(m) => write!(f, "?m{m}"),
            Term::Nat(n) => write!(f, "{n}"),
            Term::Const(name, args) if args.is_empty() => f.write_str(name),
            Term::Const(name, args)
                if (name == ADD || name == MUL)
                    && args.len() == 2
                    && args.iter().all(Term::is_atomic) =>
            {
                let op = if name == ADD { "+" } else { "*" };
                write!(f, "{} {op} {}", args[0], args[1])
            }
            Term::Const(name, args) => {
                f.write_str(name)?;
                for arg in args {
                    if arg.is_atomic() && !is_infix(arg) {
                        write!(f, " {arg}")?;
                    } else {
                        write!(f, " ({arg})")?;
                    }
                }
                Ok(())
            }
        }
    }
}

fn is_infix(t: &Term) -> bool {
    matches!(t, Term::Const(n, a) if (n == ADD || n == MUL) && a.len() == 2 && a.iter().all(Term::is_atomic))
}

/// Node count: 1 for leaves, 1 + the argument sizes for applications.
pub fn term_size(t: &Term) -> u64 {
    match t {
        Term::Const(_, args) => 1 + args.iter().map(term_size).sum::<u64>(),
        _ => 1,
    }
}

/// Source of head unfoldings for [`whnf`].
///
/// The environment implements this for reducible definitions and for class
/// field projections applied to known instances.
pub trait Unfold {
    /// Unfold `head` applied to `args` one step, if it is reducible.
    fn unfold(&self, head: &str, args: &[Term]) -> Option<Term>;

    /// Cheap test whether `head` could ever unfold.
    fn is_reducible(&self, head: &str) -> bool;
}

impl Unfold for () {
    fn unfold(&self, _: &str, _: &[Term]) -> Option<Term> {
        None
    }

    fn is_reducible(&self, _: &str) -> bool {
        false
    }
}

/// Weak head normal form.
///
/// `add`/`mul` on two literals reduce (arguments are reduced first), and
/// reducible heads unfold until stuck. Anything else is returned unchanged.
pub fn whnf<U: Unfold + ?Sized>(t: &Term, env: &U) -> Term {
    let mut cur = t.clone();
    loop {
        let next = match &cur {
            Term::Const(name, args) if (name == ADD || name == MUL) && args.len() == 2 => {
                match (whnf(&args[0], env), whnf(&args[1], env)) {
                    (Term::Nat(a), Term::Nat(b)) => {
                        return Term::Nat(if name == ADD { a + b } else { a * b });
                    }
                    _ => return cur,
                }
            }
            Term::Const(name, args) => match env.unfold(name, args) {
                Some(u) => u,
                None => return cur,
            },
            _ => return cur,
        };
        cur = next;
    }
}

/// Normalize everywhere: whnf at the head, then recursively in arguments.
pub fn normalize<U: Unfold + ?Sized>(t: &Term, env: &U) -> Term {
    match whnf(t, env) {
        Term::Const(name, args) => {
            Term::Const(name, args.iter().map(|a| normalize(a, env)).collect())
        }
        other => other,
    }
}

/// Finite map from metavariables to terms.
///
/// Bindings are kept acyclic by the occurs check in [`unify`]; `apply`
/// resolves chains to a fixpoint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<MetaId, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, m: MetaId) -> Option<&Term> {
        self.bindings.get(&m)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MetaId, &Term)> {
        self.bindings.iter()
    }

    /// Insert a binding without checks. Callers that need the occurs check go
    /// through [`unify`].
    pub fn bind(&mut self, m: MetaId, t: Term) {
        self.bindings.insert(m, t);
    }

    pub fn unbind(&mut self, m: MetaId) {
        self.bindings.remove(&m);
    }

    /// Follow metavariable bindings at the root only.
    pub fn deref<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Meta(m) = t {
            match self.bindings.get(m) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    pub fn apply(&self, t: &Term) -> Term {
        apply_subst(self, t)
    }
}

/// Replace every bound metavariable, recursively, until none remains.
pub fn apply_subst(s: &Substitution, t: &Term) -> Term {
    match s.deref(t) {
        Term::Const(name, args) => {
            Term::Const(name.clone(), args.iter().map(|a| apply_subst(s, a)).collect())
        }
        other => other.clone(),
    }
}

fn occurs(m: MetaId, t: &Term, s: &Substitution) -> bool {
    match s.deref(t) {
        Term::Meta(n) => *n == m,
        Term::Const(_, args) => args.iter().any(|a| occurs(m, a, s)),
        _ => false,
    }
}

fn reduce_head<U: Unfold + ?Sized>(t: &Term, env: &U, s: &Substitution) -> Term {
    match t {
        Term::Const(name, _) if name == ADD || name == MUL || env.is_reducible(name) => {
            whnf(&apply_subst(s, t), env)
        }
        _ => t.clone(),
    }
}

/// Unify in place, recording every new binding on `trail`.
///
/// On failure some bindings may already have been made; the caller rolls them
/// back by unbinding everything pushed on the trail since its mark.
pub fn unify_in<U: Unfold + ?Sized>(
    t1: &Term,
    t2: &Term,
    env: &U,
    s: &mut Substitution,
    trail: &mut Vec<MetaId>,
) -> bool {
    let a = s.deref(t1).clone();
    let b = s.deref(t2).clone();
    match (&a, &b) {
        (Term::Meta(x), Term::Meta(y)) if x == y => true,
        (Term::Meta(x), other) | (other, Term::Meta(x)) => {
            if occurs(*x, other, s) {
                return false;
            }
            s.bind(*x, other.clone());
            trail.push(*x);
            true
        }
        _ => {
            let a = reduce_head(&a, env, s);
            let b = reduce_head(&b, env, s);
            match (&a, &b) {
                // reduction may have exposed a metavariable
                (Term::Meta(_), _) | (_, Term::Meta(_)) => unify_in(&a, &b, env, s, trail),
                (Term::Var(x), Term::Var(y)) => x == y,
                (Term::Nat(x), Term::Nat(y)) => x == y,
                (Term::Const(f, xs), Term::Const(g, ys)) => {
                    f == g
                        && xs.len() == ys.len()
                        && xs
                            .iter()
                            .zip(ys)
                            .all(|(x, y)| unify_in(x, y, env, s, trail))
                }
                _ => false,
            }
        }
    }
}

/// Unify two terms under `s`, returning the extended substitution.
///
/// Matching is first-order and syntactic after head reduction at every
/// compared node, with the occurs check. Failure is an ordinary `None`.
pub fn unify<U: Unfold + ?Sized>(
    t1: &Term,
    t2: &Term,
    env: &U,
    s: &Substitution,
) -> Option<Substitution> {
    let mut out = s.clone();
    let mut trail = Vec::new();
    unify_in(t1, t2, env, &mut out, &mut trail).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(name: &str, args: Vec<Term>) -> Term {
        Term::app(name, args)
    }

    fn k(name: &str) -> Term {
        Term::constant(name)
    }

    #[test]
    fn whnf_reduces_literal_arithmetic() {
        let two_plus_two = c(ADD, vec![Term::nat(2), Term::nat(2)]);
        assert_eq!(whnf(&two_plus_two, &()), Term::nat(4));
        assert_eq!(whnf(&Term::nat(4), &()), Term::nat(4));
        let nested = c(MUL, vec![Term::nat(3), c(ADD, vec![Term::nat(1), Term::nat(1)])]);
        assert_eq!(whnf(&nested, &()), Term::nat(6));
    }

    #[test]
    fn whnf_leaves_stuck_arithmetic_alone() {
        let stuck = c(ADD, vec![Term::var("n"), Term::nat(1)]);
        assert_eq!(whnf(&stuck, &()), stuck);
    }

    #[test]
    fn unify_up_to_literal_reduction() {
        let lhs = c("char_p", vec![c("zmod", vec![Term::nat(4)]), c(ADD, vec![Term::nat(2), Term::nat(2)])]);
        let rhs = c("char_p", vec![c("zmod", vec![Term::nat(4)]), Term::nat(4)]);
        let s = unify(&lhs, &rhs, &(), &Substitution::new()).expect("unifies");
        assert!(s.is_empty());
    }

    #[test]
    fn unify_binds_flex_rigid() {
        let goal = c("monoid", vec![k("nat")]);
        let s = unify(&Term::Meta(0), &goal, &(), &Substitution::new()).unwrap();
        assert_eq!(s.get(0), Some(&goal));
    }

    #[test]
    fn unify_occurs_check() {
        let looped = c("list", vec![Term::Meta(0)]);
        assert!(unify(&Term::Meta(0), &looped, &(), &Substitution::new()).is_none());
    }

    #[test]
    fn unify_mismatches_fail() {
        let s = Substitution::new();
        assert!(unify(&k("nat"), &k("int"), &(), &s).is_none());
        assert!(unify(&c("f", vec![k("a")]), &c("f", vec![k("a"), k("b")]), &(), &s).is_none());
        assert!(unify(&Term::nat(3), &Term::nat(4), &(), &s).is_none());
        assert!(unify(&Term::var("x"), &Term::var("y"), &(), &s).is_none());
    }

    #[test]
    fn apply_follows_chains() {
        let mut s = Substitution::new();
        s.bind(0, Term::Meta(1));
        s.bind(1, k("int"));
        let t = c("add_group", vec![Term::Meta(0)]);
        assert_eq!(apply_subst(&s, &t), c("add_group", vec![k("int")]));
        assert_eq!(apply_subst(&Substitution::new(), &t), t);

        let mut one = Substitution::new();
        one.bind(0, k("nat"));
        assert_eq!(apply_subst(&one, &c("monoid", vec![Term::Meta(0)])), c("monoid", vec![k("nat")]));
    }

    #[test]
    fn sizes() {
        assert_eq!(term_size(&Term::nat(4)), 1);
        assert_eq!(term_size(&c("monoid", vec![k("nat")])), 2);
        let cp = c("char_p", vec![c("zmod", vec![Term::nat(4)]), Term::nat(4)]);
        assert_eq!(term_size(&cp), 4);
    }

    #[test]
    fn display_is_lean_like() {
        let cp = c("char_p", vec![c("zmod", vec![Term::nat(4)]), c(ADD, vec![Term::nat(2), Term::nat(2)])]);
        assert_eq!(cp.to_string(), "char_p (zmod 4) (2 + 2)");
        assert_eq!(Term::Meta(3).to_string(), "?m3");
    }

    #[test]
    fn normalize_metas_numbers_by_first_occurrence() {
        let t = c("f", vec![Term::Meta(7), Term::Meta(3), Term::Meta(7)]);
        assert_eq!(
            t.normalize_metas(),
            c("f", vec![Term::Meta(0), Term::Meta(1), Term::Meta(0)])
        );
    }
}
