use std::collections::{BTreeMap, BTreeSet};

use super::render::print_formula;
use super::{ActExpr, Arg, Formula, Term};

/// Variable bindings produced by [`match_formula`]. Values are arguments so
/// that a variable in an action-parameter slot can stand for a proposition.
pub type Bindings = BTreeMap<String, Arg>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("substituted term `{0}` is not ground")]
    NonGroundSubstitution(String),
}

// ---------------------------------------------------------------- normalize

/// Negation normal form with modal opacity, flattened and sorted connectives,
/// and canonical action expressions. Idempotent.
pub fn normalize(f: &Formula) -> Formula {
    nnf(f, false)
}

fn lit(f: Formula, neg: bool) -> Formula {
    if neg {
        Formula::Not(Box::new(f))
    } else {
        f
    }
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match f {
        Formula::True => {
            if neg {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::False => {
            if neg {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Atom(p, args) => lit(
            Formula::Atom(p.clone(), args.iter().map(normalize_term).collect()),
            neg,
        ),
        Formula::Equals(l, r) => lit(Formula::Equals(normalize_term(l), normalize_term(r)), neg),
        Formula::Not(g) => nnf(g, !neg),
        Formula::And(v) => {
            let kids = v.iter().map(|c| nnf(c, neg)).collect();
            if neg {
                mk_or(kids)
            } else {
                mk_and(kids)
            }
        }
        Formula::Or(v) => {
            let kids = v.iter().map(|c| nnf(c, neg)).collect();
            if neg {
                mk_and(kids)
            } else {
                mk_or(kids)
            }
        }
        Formula::Implies(a, b) => {
            if neg {
                mk_and(vec![nnf(a, false), nnf(b, true)])
            } else {
                Formula::Implies(Box::new(nnf(a, false)), Box::new(nnf(b, false)))
            }
        }
        Formula::Exists(v, b) => {
            if neg {
                Formula::Forall(v.clone(), Box::new(nnf(b, true)))
            } else {
                Formula::Exists(v.clone(), Box::new(nnf(b, false)))
            }
        }
        Formula::Forall(v, b) => {
            if neg {
                Formula::Exists(v.clone(), Box::new(nnf(b, true)))
            } else {
                Formula::Forall(v.clone(), Box::new(nnf(b, false)))
            }
        }
        Formula::Bel(a, g) => lit(Formula::Bel(a.clone(), Box::new(normalize(g))), neg),
        Formula::Int(a, g) => lit(Formula::Int(a.clone(), Box::new(normalize(g))), neg),
        Formula::MB(a, b, g) => lit(
            Formula::MB(a.clone(), b.clone(), Box::new(normalize(g))),
            neg,
        ),
        Formula::CollInt(a, b, g) => lit(
            Formula::CollInt(a.clone(), b.clone(), Box::new(normalize(g))),
            neg,
        ),
        Formula::CollAcc(a, b, g) => lit(
            Formula::CollAcc(a.clone(), b.clone(), Box::new(normalize(g))),
            neg,
        ),
        Formula::Done(a, p) => lit(
            Formula::Done(Box::new(normalize_act(a)), Box::new(normalize(p))),
            neg,
        ),
        Formula::Possible(g) => lit(Formula::Possible(Box::new(normalize(g))), neg),
    }
}

fn mk_and(kids: Vec<Formula>) -> Formula {
    mk_junction(kids, true)
}

fn mk_or(kids: Vec<Formula>) -> Formula {
    mk_junction(kids, false)
}

fn mk_junction(kids: Vec<Formula>, conj: bool) -> Formula {
    let (unit, zero) = if conj {
        (Formula::True, Formula::False)
    } else {
        (Formula::False, Formula::True)
    };
    let mut flat = Vec::new();
    for k in kids {
        match k {
            Formula::And(v) if conj => flat.extend(v),
            Formula::Or(v) if !conj => flat.extend(v),
            other => flat.push(other),
        }
    }
    if flat.contains(&zero) {
        return zero;
    }
    let mut keyed: Vec<(String, Formula)> = flat
        .into_iter()
        .filter(|k| *k != unit)
        .map(|k| (print_formula(&k), k))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    let mut kids: Vec<Formula> = keyed.into_iter().map(|(_, k)| k).collect();
    match kids.len() {
        0 => unit,
        1 => kids.pop().unwrap(),
        _ => {
            if conj {
                Formula::And(kids)
            } else {
                Formula::Or(kids)
            }
        }
    }
}

/// Normalizes the formulas inside a term.
pub fn normalize_term(t: &Term) -> Term {
    match t {
        Term::Const(_) | Term::Var(_) => t.clone(),
        Term::App(n, args) => Term::App(n.clone(), args.iter().map(normalize_term).collect()),
        Term::Descr(v, body) => Term::Descr(v.clone(), Box::new(normalize(body))),
    }
}

/// Canonical argument form: applications become atoms and zero-ary atoms
/// become constants.
pub(crate) fn canonical_arg(a: &Arg) -> Arg {
    match a {
        Arg::Term(Term::App(n, args)) => Arg::Formula(Formula::Atom(
            n.clone(),
            args.iter().map(normalize_term).collect(),
        )),
        Arg::Term(t) => Arg::Term(normalize_term(t)),
        Arg::Formula(f) => match normalize(f) {
            Formula::Atom(n, args) if args.is_empty() => Arg::Term(Term::Const(n)),
            g => Arg::Formula(g),
        },
    }
}

pub fn normalize_act(a: &ActExpr) -> ActExpr {
    match a {
        ActExpr::Atomic { act, actor, args } => ActExpr::Atomic {
            act: act.clone(),
            actor: normalize_term(actor),
            args: args.iter().map(canonical_arg).collect(),
        },
        ActExpr::Choice(..) => {
            let mut parts = Vec::new();
            flatten_choice(a, &mut parts);
            left_fold(
                parts.iter().map(|p| normalize_act(p)).collect(),
                ActExpr::Choice,
            )
        }
        ActExpr::Seq(..) => {
            let mut parts = Vec::new();
            flatten_seq(a, &mut parts);
            left_fold(
                parts.iter().map(|p| normalize_act(p)).collect(),
                ActExpr::Seq,
            )
        }
    }
}

fn flatten_choice<'a>(a: &'a ActExpr, out: &mut Vec<&'a ActExpr>) {
    match a {
        ActExpr::Choice(l, r) => {
            flatten_choice(l, out);
            flatten_choice(r, out);
        }
        other => out.push(other),
    }
}

fn flatten_seq<'a>(a: &'a ActExpr, out: &mut Vec<&'a ActExpr>) {
    match a {
        ActExpr::Seq(l, r) => {
            flatten_seq(l, out);
            flatten_seq(r, out);
        }
        other => out.push(other),
    }
}

fn left_fold(parts: Vec<ActExpr>, build: fn(Box<ActExpr>, Box<ActExpr>) -> ActExpr) -> ActExpr {
    let mut it = parts.into_iter();
    let first = it.next().expect("non-empty action chain");
    it.fold(first, |acc, p| build(Box::new(acc), Box::new(p)))
}

// ---------------------------------------------------------------- unfolding

/// Replaces `MB(i,j,p)` by `Bel(i, p and MB(j,i,p))`, `depth` levels deep.
/// The result is not normalized, so it can be compared against hand-built
/// trees.
pub fn unfold_mb(f: &Formula, depth: usize) -> Formula {
    if depth == 0 {
        return f.clone();
    }
    let rec = |g: &Formula| Box::new(unfold_mb(g, depth));
    match f {
        Formula::MB(i, j, p) => Formula::Bel(
            i.clone(),
            Box::new(Formula::And(vec![
                unfold_mb(p, depth - 1),
                unfold_mb(&Formula::MB(j.clone(), i.clone(), p.clone()), depth - 1),
            ])),
        ),
        Formula::Not(g) => Formula::Not(rec(g)),
        Formula::And(v) => Formula::And(v.iter().map(|g| unfold_mb(g, depth)).collect()),
        Formula::Or(v) => Formula::Or(v.iter().map(|g| unfold_mb(g, depth)).collect()),
        Formula::Implies(a, b) => Formula::Implies(rec(a), rec(b)),
        Formula::Exists(v, b) => Formula::Exists(v.clone(), rec(b)),
        Formula::Forall(v, b) => Formula::Forall(v.clone(), rec(b)),
        Formula::Bel(a, g) => Formula::Bel(a.clone(), rec(g)),
        Formula::Int(a, g) => Formula::Int(a.clone(), rec(g)),
        Formula::CollInt(a, b, g) => Formula::CollInt(a.clone(), b.clone(), rec(g)),
        Formula::CollAcc(a, b, g) => Formula::CollAcc(a.clone(), b.clone(), rec(g)),
        Formula::Possible(g) => Formula::Possible(rec(g)),
        Formula::True
        | Formula::False
        | Formula::Atom(..)
        | Formula::Equals(..)
        | Formula::Done(..) => f.clone(),
    }
}

/// Number of nested attitude operators (Bel, Int, MB, CollInt, CollAcc).
pub fn modal_depth(f: &Formula) -> usize {
    match f {
        Formula::True | Formula::False | Formula::Atom(..) | Formula::Equals(..) => 0,
        Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) | Formula::Possible(g) => {
            modal_depth(g)
        }
        Formula::And(v) | Formula::Or(v) => v.iter().map(modal_depth).max().unwrap_or(0),
        Formula::Implies(a, b) => modal_depth(a).max(modal_depth(b)),
        Formula::Bel(_, g)
        | Formula::Int(_, g)
        | Formula::MB(_, _, g)
        | Formula::CollInt(_, _, g)
        | Formula::CollAcc(_, _, g) => 1 + modal_depth(g),
        Formula::Done(a, p) => act_depth(a).max(modal_depth(p)),
    }
}

fn act_depth(a: &ActExpr) -> usize {
    match a {
        ActExpr::Atomic { args, .. } => args
            .iter()
            .map(|x| match x {
                Arg::Formula(f) => modal_depth(f),
                Arg::Term(_) => 0,
            })
            .max()
            .unwrap_or(0),
        ActExpr::Seq(l, r) | ActExpr::Choice(l, r) => act_depth(l).max(act_depth(r)),
    }
}

// ------------------------------------------------------------- substitution

pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    let mut out = Vec::new();
    formula_free_vars(f, &mut Vec::new(), &mut out);
    out.into_iter().collect()
}

fn formula_free_vars(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(_, args) => args.iter().for_each(|t| term_free_vars(t, bound, out)),
        Formula::Equals(l, r) => {
            term_free_vars(l, bound, out);
            term_free_vars(r, bound, out);
        }
        Formula::Not(g)
        | Formula::Bel(_, g)
        | Formula::Int(_, g)
        | Formula::MB(_, _, g)
        | Formula::CollInt(_, _, g)
        | Formula::CollAcc(_, _, g)
        | Formula::Possible(g) => formula_free_vars(g, bound, out),
        Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| formula_free_vars(g, bound, out)),
        Formula::Implies(a, b) => {
            formula_free_vars(a, bound, out);
            formula_free_vars(b, bound, out);
        }
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            bound.push(v.clone());
            formula_free_vars(b, bound, out);
            bound.pop();
        }
        Formula::Done(a, p) => {
            act_free_vars(a, bound, out);
            formula_free_vars(p, bound, out);
        }
    }
}

pub(crate) fn term_free_vars(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match t {
        Term::Const(_) => {}
        Term::Var(v) => {
            if !bound.contains(v) {
                out.push(v.clone());
            }
        }
        Term::App(_, args) => args.iter().for_each(|a| term_free_vars(a, bound, out)),
        Term::Descr(v, body) => {
            bound.push(v.clone());
            formula_free_vars(body, bound, out);
            bound.pop();
        }
    }
}

fn act_free_vars(a: &ActExpr, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match a {
        ActExpr::Atomic { actor, args, .. } => {
            term_free_vars(actor, bound, out);
            for x in args {
                match x {
                    Arg::Term(t) => term_free_vars(t, bound, out),
                    Arg::Formula(f) => formula_free_vars(f, bound, out),
                }
            }
        }
        ActExpr::Seq(l, r) | ActExpr::Choice(l, r) => {
            act_free_vars(l, bound, out);
            act_free_vars(r, bound, out);
        }
    }
}

/// Replaces free occurrences of `var` by the ground term `t`.
pub fn substitute(f: &Formula, var: &str, t: &Term) -> Result<Formula, SubstError> {
    if !t.is_ground() {
        return Err(SubstError::NonGroundSubstitution(super::print_term(t)));
    }
    let mut b = Bindings::new();
    b.insert(var.to_string(), Arg::Term(t.clone()));
    Ok(substitute_all(f, &b))
}

/// Simultaneous substitution. Values are expected to be ground, which makes
/// capture impossible; binders shadow their variable.
pub fn substitute_all(f: &Formula, b: &Bindings) -> Formula {
    if b.is_empty() {
        return f.clone();
    }
    let rec = |g: &Formula| Box::new(substitute_all(g, b));
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(p, args) => {
            Formula::Atom(p.clone(), args.iter().map(|t| subst_term(t, b)).collect())
        }
        Formula::Equals(l, r) => Formula::Equals(subst_term(l, b), subst_term(r, b)),
        Formula::Not(g) => Formula::Not(rec(g)),
        Formula::And(v) => Formula::And(v.iter().map(|g| substitute_all(g, b)).collect()),
        Formula::Or(v) => Formula::Or(v.iter().map(|g| substitute_all(g, b)).collect()),
        Formula::Implies(x, y) => Formula::Implies(rec(x), rec(y)),
        Formula::Exists(v, body) => Formula::Exists(v.clone(), Box::new(shadowed(body, v, b))),
        Formula::Forall(v, body) => Formula::Forall(v.clone(), Box::new(shadowed(body, v, b))),
        Formula::Bel(a, g) => Formula::Bel(a.clone(), rec(g)),
        Formula::Int(a, g) => Formula::Int(a.clone(), rec(g)),
        Formula::MB(x, y, g) => Formula::MB(x.clone(), y.clone(), rec(g)),
        Formula::CollInt(x, y, g) => Formula::CollInt(x.clone(), y.clone(), rec(g)),
        Formula::CollAcc(x, y, g) => Formula::CollAcc(x.clone(), y.clone(), rec(g)),
        Formula::Done(a, p) => Formula::Done(Box::new(subst_act(a, b)), rec(p)),
        Formula::Possible(g) => Formula::Possible(rec(g)),
    }
}

fn shadowed(body: &Formula, v: &str, b: &Bindings) -> Formula {
    if b.contains_key(v) {
        let mut inner = b.clone();
        inner.remove(v);
        substitute_all(body, &inner)
    } else {
        substitute_all(body, b)
    }
}

fn arg_as_term(a: &Arg) -> Option<Term> {
    match a {
        Arg::Term(t) => Some(t.clone()),
        Arg::Formula(Formula::Atom(n, args)) if args.is_empty() => Some(Term::Const(n.clone())),
        Arg::Formula(Formula::Atom(n, args)) => Some(Term::App(n.clone(), args.clone())),
        Arg::Formula(_) => None,
    }
}

fn subst_term(t: &Term, b: &Bindings) -> Term {
    match t {
        Term::Const(_) => t.clone(),
        Term::Var(v) => b.get(v).and_then(arg_as_term).unwrap_or_else(|| t.clone()),
        Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| subst_term(a, b)).collect()),
        Term::Descr(v, body) => Term::Descr(v.clone(), Box::new(shadowed(body, v, b))),
    }
}

fn subst_act(a: &ActExpr, b: &Bindings) -> ActExpr {
    match a {
        ActExpr::Atomic { act, actor, args } => ActExpr::Atomic {
            act: act.clone(),
            actor: subst_term(actor, b),
            args: args
                .iter()
                .map(|x| match x {
                    Arg::Term(Term::Var(v)) if b.contains_key(v) => b[v].clone(),
                    Arg::Term(t) => Arg::Term(subst_term(t, b)),
                    Arg::Formula(f) => Arg::Formula(substitute_all(f, b)),
                })
                .collect(),
        },
        ActExpr::Seq(l, r) => ActExpr::Seq(Box::new(subst_act(l, b)), Box::new(subst_act(r, b))),
        ActExpr::Choice(l, r) => {
            ActExpr::Choice(Box::new(subst_act(l, b)), Box::new(subst_act(r, b)))
        }
    }
}

// ----------------------------------------------------------------- matching

/// One-way matching: free variables of `pattern` bind to the corresponding
/// parts of `target`. Variables bound inside the pattern are compared by
/// name. On failure `bindings` is left untouched.
pub fn match_formula(pattern: &Formula, target: &Formula, bindings: &mut Bindings) -> bool {
    let mut m = Matcher {
        b: bindings.clone(),
        bound: Vec::new(),
    };
    if m.formula(pattern, target) {
        *bindings = m.b;
        true
    } else {
        false
    }
}

struct Matcher {
    b: Bindings,
    bound: Vec<String>,
}

impl Matcher {
    fn bind(&mut self, v: &str, value: Arg) -> bool {
        let value = canonical_arg(&value);
        match self.b.get(v) {
            Some(old) => *old == value,
            None => {
                self.b.insert(v.to_string(), value);
                true
            }
        }
    }

    fn formula(&mut self, p: &Formula, t: &Formula) -> bool {
        match (p, t) {
            (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
            (Formula::Atom(a, xs), Formula::Atom(b, ys)) => a == b && self.terms(xs, ys),
            (Formula::Equals(a, b), Formula::Equals(c, d)) => self.term(a, c) && self.term(b, d),
            (Formula::Not(a), Formula::Not(b)) | (Formula::Possible(a), Formula::Possible(b)) => {
                self.formula(a, b)
            }
            (Formula::And(xs), Formula::And(ys)) | (Formula::Or(xs), Formula::Or(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.formula(x, y))
            }
            (Formula::Implies(a, b), Formula::Implies(c, d)) => {
                self.formula(a, c) && self.formula(b, d)
            }
            (Formula::Exists(v, a), Formula::Exists(w, b))
            | (Formula::Forall(v, a), Formula::Forall(w, b)) => {
                if v != w {
                    return false;
                }
                self.bound.push(v.clone());
                let ok = self.formula(a, b);
                self.bound.pop();
                ok
            }
            (Formula::Bel(a, x), Formula::Bel(b, y)) | (Formula::Int(a, x), Formula::Int(b, y)) => {
                a == b && self.formula(x, y)
            }
            (Formula::MB(a, b, x), Formula::MB(c, d, y))
            | (Formula::CollInt(a, b, x), Formula::CollInt(c, d, y))
            | (Formula::CollAcc(a, b, x), Formula::CollAcc(c, d, y)) => {
                a == c && b == d && self.formula(x, y)
            }
            (Formula::Done(a, x), Formula::Done(b, y)) => self.act(a, b) && self.formula(x, y),
            _ => false,
        }
    }

    fn terms(&mut self, xs: &[Term], ys: &[Term]) -> bool {
        xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.term(x, y))
    }

    fn term(&mut self, p: &Term, t: &Term) -> bool {
        match (p, t) {
            (Term::Var(v), _) if !self.bound.contains(v) => self.bind(v, Arg::Term(t.clone())),
            (Term::Var(v), Term::Var(w)) => v == w,
            (Term::Const(a), Term::Const(b)) => a == b,
            (Term::App(f, xs), Term::App(g, ys)) => f == g && self.terms(xs, ys),
            (Term::Descr(v, a), Term::Descr(w, b)) => {
                if v != w {
                    return false;
                }
                self.bound.push(v.clone());
                let ok = self.formula(a, b);
                self.bound.pop();
                ok
            }
            _ => false,
        }
    }

    fn act(&mut self, p: &ActExpr, t: &ActExpr) -> bool {
        match (p, t) {
            (
                ActExpr::Atomic {
                    act: a,
                    actor: x,
                    args: xs,
                },
                ActExpr::Atomic {
                    act: b,
                    actor: y,
                    args: ys,
                },
            ) => {
                a == b
                    && self.term(x, y)
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| self.arg(x, y))
            }
            (ActExpr::Seq(a, b), ActExpr::Seq(c, d))
            | (ActExpr::Choice(a, b), ActExpr::Choice(c, d)) => self.act(a, c) && self.act(b, d),
            _ => false,
        }
    }

    fn arg(&mut self, p: &Arg, t: &Arg) -> bool {
        match (p, t) {
            (Arg::Term(Term::Var(v)), _) if !self.bound.contains(v) => self.bind(v, t.clone()),
            (Arg::Term(x), Arg::Term(y)) => self.term(x, y),
            (Arg::Formula(x), Arg::Formula(y)) => self.formula(x, y),
            _ => false,
        }
    }
}

pub(crate) fn collect_agents(f: &Formula, out: &mut Vec<String>) {
    match f {
        Formula::True | Formula::False | Formula::Atom(..) | Formula::Equals(..) => {}
        Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) | Formula::Possible(g) => {
            collect_agents(g, out)
        }
        Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| collect_agents(g, out)),
        Formula::Implies(a, b) => {
            collect_agents(a, out);
            collect_agents(b, out);
        }
        Formula::Bel(a, g) | Formula::Int(a, g) => {
            out.push(a.clone());
            collect_agents(g, out);
        }
        Formula::MB(a, b, g) | Formula::CollInt(a, b, g) | Formula::CollAcc(a, b, g) => {
            out.push(a.clone());
            out.push(b.clone());
            collect_agents(g, out);
        }
        Formula::Done(a, p) => {
            collect_act_agents(a, out);
            collect_agents(p, out);
        }
    }
}

fn collect_act_agents(a: &ActExpr, out: &mut Vec<String>) {
    match a {
        ActExpr::Atomic { actor, args, .. } => {
            if let Term::Const(c) = actor {
                out.push(c.clone());
            }
            for x in args {
                if let Arg::Formula(f) = x {
                    collect_agents(f, out);
                }
            }
        }
        ActExpr::Seq(l, r) | ActExpr::Choice(l, r) => {
            collect_act_agents(l, out);
            collect_act_agents(r, out);
        }
    }
}
