//! Proptest strategies for well-formed formulas.

use collacc::logic::{ActExpr, Arg, Formula, Term};
use proptest::prelude::*;

const PREDS: [&str; 3] = ["p", "q", "rel"];
const CONSTS: [&str; 3] = ["a", "b", "c"];
const AGENTS: [&str; 2] = ["tom", "laura"];
const VARS: [&str; 2] = ["x", "y"];

fn name(pool: &'static [&'static str]) -> impl Strategy<Value = String> {
    proptest::sample::select(pool).prop_map(str::to_string)
}

pub fn term(depth: u32) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        name(&CONSTS).prop_map(Term::Const),
        name(&VARS).prop_map(Term::Var),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    prop_oneof![
        3 => leaf,
        1 => (name(&["f", "g"]), proptest::collection::vec(term(depth - 1), 1..3))
            .prop_map(|(n, args)| Term::App(n, args)),
        1 => (name(&VARS), formula(depth - 1)).prop_map(|(v, b)| Term::Descr(v, Box::new(b))),
    ]
    .boxed()
}

fn act(depth: u32) -> BoxedStrategy<ActExpr> {
    let atomic = (
        name(&["inform", "prop", "request"]),
        name(&AGENTS),
        name(&AGENTS),
        formula(depth),
    )
        .prop_map(|(a, i, j, f)| {
            ActExpr::atomic(a, i, vec![Arg::Term(Term::constant(j)), Arg::Formula(f)])
        })
        .boxed();
    prop_oneof![
        3 => atomic.clone(),
        1 => (atomic.clone(), atomic.clone()).prop_map(|(l, r)| ActExpr::seq(l, r)),
        1 => (atomic.clone(), atomic).prop_map(|(l, r)| ActExpr::choice(l, r)),
    ]
    .boxed()
}

/// Formulas up to `depth` levels of nesting over a small vocabulary.
pub fn formula(depth: u32) -> BoxedStrategy<Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        (name(&PREDS), proptest::collection::vec(term(0), 0..3))
            .prop_map(|(p, args)| Formula::Atom(p, args)),
        (term(0), term(0)).prop_map(|(l, r)| Formula::Equals(l, r)),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let sub = || formula(depth - 1);
    prop_oneof![
        4 => leaf,
        1 => (name(&PREDS), proptest::collection::vec(term(depth - 1), 1..3))
            .prop_map(|(p, args)| Formula::Atom(p, args)),
        1 => (term(depth - 1), term(depth - 1)).prop_map(|(l, r)| Formula::Equals(l, r)),
        1 => sub().prop_map(Formula::not),
        1 => proptest::collection::vec(sub(), 2..4).prop_map(Formula::And),
        1 => proptest::collection::vec(sub(), 2..4).prop_map(Formula::Or),
        1 => (sub(), sub()).prop_map(|(a, b)| Formula::implies(a, b)),
        1 => (name(&VARS), sub()).prop_map(|(v, b)| Formula::exists(v, b)),
        1 => (name(&VARS), sub()).prop_map(|(v, b)| Formula::forall(v, b)),
        1 => (name(&AGENTS), sub()).prop_map(|(a, g)| Formula::bel(a, g)),
        1 => (name(&AGENTS), sub()).prop_map(|(a, g)| Formula::int(a, g)),
        1 => (name(&AGENTS), name(&AGENTS), sub()).prop_map(|(i, j, g)| Formula::mb(i, j, g)),
        1 => (name(&AGENTS), name(&AGENTS), sub()).prop_map(|(i, j, g)| Formula::coll_int(i, j, g)),
        1 => (name(&AGENTS), name(&AGENTS), sub()).prop_map(|(i, j, g)| Formula::coll_acc(i, j, g)),
        1 => (act(depth - 1), sub()).prop_map(|(a, pre)| Formula::Done(Box::new(a), Box::new(pre))),
        1 => sub().prop_map(Formula::possible),
    ]
    .boxed()
}
