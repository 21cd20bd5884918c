//! Modal formula language: terms, formulas and action expressions.
//!
//! Every piece of agent state, every act template and every trace payload is
//! expressed in this language. Values are immutable once built; all
//! transformations return fresh values.
//!
//! The concrete grammar is documented in `docs/grammar.md` at the repository
//! root. In short:
//!
//! ```text
//! formula  := quant | implies
//! quant    := ("exists" | "forall") VAR "." formula
//! implies  := or ("=>" implies)?
//! or       := and ("or" and)*
//! and      := unary ("and" unary)*
//! unary    := "not" unary | quant | primary
//! primary  := "(" formula ")" | "true" | "false" | modal | term ("=" term)?
//! modal    := Bel(a, f) | Int(a, f) | MB(a, b, f) | CollInt(a, b, f)
//!           | CollAcc(a, b, f) | Done(act [, f]) | Possible(f)
//! term     := IDENT ["(" term {"," term} ")"] | VAR | "iota" VAR "." unary
//! act      := seq ("|" seq)*          seq := aprim (";" aprim)*
//! aprim    := "(" act ")" | IDENT "(" (IDENT | VAR) {"," arg} ")"
//! ```

mod parse;
mod render;
mod transform;

pub use parse::{parse_act, parse_formula, parse_term, SyntaxError};
pub use render::{print_act, print_formula, print_term, render_act, render_formula};
pub use transform::{
    free_vars, match_formula, modal_depth, normalize, normalize_act, normalize_term, substitute,
    substitute_all, unfold_mb, Bindings, SubstError,
};

use std::fmt;

/// A first-order term. Distinct constants denote distinct objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
    App(String, Vec<Term>),
    /// Definite description `iota ?x . body`.
    Descr(String, Box<Formula>),
}

/// Parameter of an atomic action: either a term or an embedded proposition.
///
/// Canonical form (enforced by [`normalize`]): a zero-ary atom is stored as a
/// constant term and a function application as an atom formula, so the
/// printed text always reparses to the same variant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arg {
    Term(Term),
    Formula(Formula),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActExpr {
    Atomic {
        act: String,
        actor: Term,
        args: Vec<Arg>,
    },
    Seq(Box<ActExpr>, Box<ActExpr>),
    Choice(Box<ActExpr>, Box<ActExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<Term>),
    Equals(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    Bel(String, Box<Formula>),
    Int(String, Box<Formula>),
    MB(String, String, Box<Formula>),
    CollInt(String, String, Box<Formula>),
    CollAcc(String, String, Box<Formula>),
    /// `Done(a, p)`: `a` has just taken place and `p` held before it.
    Done(Box<ActExpr>, Box<Formula>),
    Possible(Box<Formula>),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(name.into(), args)
    }

    pub fn descr(var: impl Into<String>, body: Formula) -> Self {
        Term::Descr(var.into(), Box::new(body))
    }

    pub fn is_ground(&self) -> bool {
        let mut vars = Vec::new();
        transform::term_free_vars(self, &mut Vec::new(), &mut vars);
        vars.is_empty()
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(c) => Some(c),
            _ => None,
        }
    }
}

impl Arg {
    pub fn term(t: Term) -> Self {
        Arg::Term(t)
    }

    pub fn formula(f: Formula) -> Self {
        Arg::Formula(f)
    }

    pub fn as_formula(&self) -> Option<Formula> {
        match self {
            Arg::Formula(f) => Some(f.clone()),
            Arg::Term(Term::Const(c)) => Some(Formula::Atom(c.clone(), vec![])),
            Arg::Term(Term::App(n, args)) => Some(Formula::Atom(n.clone(), args.clone())),
            _ => None,
        }
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            Arg::Term(t) => Some(t),
            _ => None,
        }
    }
}

impl ActExpr {
    pub fn atomic(act: impl Into<String>, actor: impl Into<String>, args: Vec<Arg>) -> Self {
        ActExpr::Atomic {
            act: act.into(),
            actor: Term::Const(actor.into()),
            args,
        }
    }

    pub fn seq(a: ActExpr, b: ActExpr) -> Self {
        ActExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: ActExpr, b: ActExpr) -> Self {
        ActExpr::Choice(Box::new(a), Box::new(b))
    }
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom(pred.into(), args)
    }

    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Atom(name.into(), vec![])
    }

    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Formula::Equals(lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Self {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Self {
        Formula::Or(fs)
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(var.into(), Box::new(body))
    }

    pub fn bel(agent: impl Into<String>, f: Formula) -> Self {
        Formula::Bel(agent.into(), Box::new(f))
    }

    pub fn int(agent: impl Into<String>, f: Formula) -> Self {
        Formula::Int(agent.into(), Box::new(f))
    }

    pub fn mb(i: impl Into<String>, j: impl Into<String>, f: Formula) -> Self {
        Formula::MB(i.into(), j.into(), Box::new(f))
    }

    pub fn coll_int(i: impl Into<String>, j: impl Into<String>, f: Formula) -> Self {
        Formula::CollInt(i.into(), j.into(), Box::new(f))
    }

    pub fn coll_acc(i: impl Into<String>, j: impl Into<String>, f: Formula) -> Self {
        Formula::CollAcc(i.into(), j.into(), Box::new(f))
    }

    pub fn done(a: ActExpr) -> Self {
        Formula::Done(Box::new(a), Box::new(Formula::True))
    }

    pub fn possible(f: Formula) -> Self {
        Formula::Possible(Box::new(f))
    }

    /// True when the formula has no free variables.
    pub fn is_ground(&self) -> bool {
        free_vars(self).is_empty()
    }

    /// Modal agent arguments and action actors mentioned anywhere in the formula.
    pub fn agents(&self) -> Vec<String> {
        let mut out = Vec::new();
        transform::collect_agents(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Top-level conjuncts (the formula itself when it is not a conjunction).
    pub fn conjuncts(&self) -> Vec<Formula> {
        match self {
            Formula::And(cs) => cs.iter().flat_map(|c| c.conjuncts()).collect(),
            Formula::True => vec![],
            other => vec![other.clone()],
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Display for ActExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_act(self))
    }
}
