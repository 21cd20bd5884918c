//! Act selection and the per-turn cycle.
//!
//! A turn is: perceive the other agent's new acts (reactions may push
//! goals), drop task goals that already hold, pick at most one act for the
//! first goal that admits one, and perform it.
//!
//! An act is a candidate for a goal when its effect, together with the fact
//! that it was done, yields the goal (or the sub-goal it was generated for).
//! Candidates must also have ground parameters, must not be ruled out by an
//! `Int(self, not Possible(Done(a)))` fact, and must be feasible.

use std::collections::BTreeSet;

use crate::acts::{feasible, ActType, DialogAct};
use crate::logic::{
    match_formula, normalize, substitute_all, ActExpr, Arg, Bindings, Formula, Term,
};
use crate::mental::{conflicts_with_beliefs, derive, refered_by, AgentState, Origin, View};
use crate::reference::{apply_description, choose_description_with, identify, Identification};
use crate::sim::{perform, SimError, World};

/// Pushes `goal` (with the trigger's bindings) when a perceived act matches
/// `trigger`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactionRule {
    /// Restricts the rule to one agent; `None` applies it to both.
    pub agent: Option<String>,
    pub trigger: Formula,
    pub goal: Formula,
}

/// What deliberation needs besides the agent's own state.
#[derive(Debug, Clone, Copy)]
pub struct Situation<'a> {
    pub context: &'a str,
    pub truth_critical: &'a BTreeSet<String>,
}

/// `exists ?alt . exists ?clar . Done(accept(me, i, p) | prop(me, i, ?alt) | request(me, i, ?clar))`
pub fn obligation_goal(me: &str, proposer: &str, content: &Formula) -> Formula {
    let to = || Arg::Term(Term::constant(proposer));
    let accept = ActExpr::atomic("accept", me, vec![to(), Arg::Formula(content.clone())]);
    let counter = ActExpr::atomic("prop", me, vec![to(), Arg::Term(Term::var("alt"))]);
    let clarify = ActExpr::atomic("request", me, vec![to(), Arg::Term(Term::var("clar"))]);
    let body = Formula::done(ActExpr::choice(ActExpr::choice(accept, counter), clarify));
    normalize(&Formula::exists("alt", Formula::exists("clar", body)))
}

/// The proposer and content of an obligation goal held by `me`.
pub fn obligation_of(goal: &Formula, me: &str) -> Option<(String, Formula)> {
    let Formula::Exists(_, inner) = goal else {
        return None;
    };
    let Formula::Exists(_, body) = &**inner else {
        return None;
    };
    let Formula::Done(act, _) = &**body else {
        return None;
    };
    let ActExpr::Choice(left, _) = &**act else {
        return None;
    };
    let ActExpr::Choice(accept, _) = &**left else {
        return None;
    };
    match &**accept {
        ActExpr::Atomic { act, actor, args }
            if act == "accept" && actor.as_const() == Some(me) && args.len() == 2 =>
        {
            let proposer = args[0].as_term()?.as_const()?.to_string();
            let content = args[1].as_formula()?;
            (normalize(goal) == obligation_goal(me, &proposer, &content))
                .then_some((proposer, content))
        }
        _ => None,
    }
}

/// Perception of one act. Proposals addressed to the agent create an
/// obligation to answer; requests are adopted as goals; scenario rules fire
/// on a match.
pub fn react(state: &AgentState, act: &DialogAct, rules: &[ReactionRule]) -> AgentState {
    let mut next = state.clone();
    if act.addressee == state.id {
        match act.act_type {
            ActType::Propose | ActType::Refer => {
                next.agenda.push(
                    obligation_goal(&state.id, &act.actor, &act.content()),
                    Origin::Reaction,
                );
            }
            ActType::Request => {
                next.agenda.push(act.content(), Origin::Reaction);
            }
            ActType::Inform | ActType::AcceptAct => {}
        }
    }
    let done = act.done();
    for rule in rules {
        if rule.agent.as_deref().is_some_and(|a| a != state.id) {
            continue;
        }
        let mut b = Bindings::new();
        if match_formula(&rule.trigger, &done, &mut b) {
            let goal = substitute_all(&rule.goal, &b);
            if goal.is_ground() {
                next.agenda.push(goal, Origin::Reaction);
            }
        }
    }
    next
}

/// Whether a goal already holds in the agent's state. A collective intention
/// held by the agent counts as met once its content holds.
pub fn goal_holds(state: &AgentState, goal: &Formula) -> bool {
    match goal {
        Formula::CollInt(a, _, inner) if *a == state.id => state.entails(inner),
        _ => state.entails(goal),
    }
}

/// Whether `target` follows from the effect of `act` plus its `Done` fact,
/// seen from the actor.
pub fn effect_yields(act: &DialogAct, target: &Formula) -> bool {
    let me = act.actor.as_str();
    let mut facts = BTreeSet::new();
    for piece in act.effect().conjuncts().iter().chain([act.done()].iter()) {
        facts.extend(derive(me, piece, 2));
    }
    let view = View {
        self_id: me,
        derived: &facts,
        agenda: None,
        pacts: None,
        reps: &[],
        introspective: true,
    };
    let target = match target {
        Formula::CollInt(a, _, inner) if a == me => &**inner,
        other => other,
    };
    view.holds(&normalize(target))
}

/// Goals in the order deliberation visits them: obligations first, then the
/// rest of the agenda.
fn scan_order(state: &AgentState) -> Vec<(Formula, Origin, bool)> {
    let mut obligations = Vec::new();
    let mut rest = Vec::new();
    for i in state.agenda.iter() {
        let is_obligation =
            i.origin == Origin::Reaction && obligation_of(&i.goal, &state.id).is_some();
        let item = (i.goal.clone(), i.origin.clone(), is_obligation);
        if is_obligation {
            obligations.push(item);
        } else {
            rest.push(item);
        }
    }
    obligations.extend(rest);
    obligations
}

/// Picks at most one act. Goals are scanned in order and the first goal with
/// a surviving candidate decides. An obligation without candidates stops the
/// scan; any other stuck goal is skipped.
pub fn deliberate(state: &AgentState, situation: &Situation) -> Option<DialogAct> {
    for (goal, _, is_obligation) in scan_order(state) {
        let mut survivors: Vec<DialogAct> = candidates(state, situation, &goal)
            .into_iter()
            .filter(|(act, target)| admissible(state, situation, act) && effect_yields(act, target))
            .map(|(act, _)| act)
            .collect();
        survivors.sort_by_key(|a| a.sort_key());
        survivors.dedup();
        if let Some(best) = survivors.into_iter().next() {
            return Some(best);
        }
        if is_obligation {
            return None;
        }
    }
    None
}

fn admissible(state: &AgentState, situation: &Situation, act: &DialogAct) -> bool {
    if !act.content().is_ground() || act.actor == act.addressee {
        return false;
    }
    let vetoed = normalize(&Formula::int(
        state.id.clone(),
        Formula::not(Formula::possible(act.done())),
    ));
    if state.beliefs.derived().contains(&vetoed) {
        return false;
    }
    feasible(state, act, situation.context)
}

/// Candidate acts for a goal, each paired with the formula its effect must
/// yield.
pub fn candidates(
    state: &AgentState,
    situation: &Situation,
    goal: &Formula,
) -> Vec<(DialogAct, Formula)> {
    if let Some((proposer, content)) = obligation_of(goal, &state.id) {
        return obligation_candidates(state, situation, &proposer, &content)
            .into_iter()
            .map(|a| (a, goal.clone()))
            .collect();
    }
    let mut out = Vec::new();
    let target = match goal {
        Formula::CollInt(a, _, inner) if *a == state.id => (**inner).clone(),
        other => other.clone(),
    };
    walk(state, situation, &target, &target, &mut out);
    out
}

fn walk(
    state: &AgentState,
    situation: &Situation,
    node: &Formula,
    target: &Formula,
    out: &mut Vec<(DialogAct, Formula)>,
) {
    let me = state.id.as_str();
    match node {
        Formula::CollInt(a, _, inner) if a == me => walk(state, situation, inner, inner, out),
        Formula::And(v) | Formula::Or(v) => {
            for g in v {
                walk(state, situation, g, target, out);
            }
        }
        Formula::Exists(_, body) => walk(state, situation, body, target, out),
        Formula::MB(a, other, inner) if a == me => {
            if let Some(rep) = refer_intention_rep(inner, me, other) {
                let sub = heard_intention(me, other);
                for act in refer_candidates(state, situation, other, Some(&rep)) {
                    out.push((act, sub.clone()));
                }
            }
        }
        Formula::Bel(other, inner) if other != me => {
            if let Formula::Exists(o, body) = &**inner {
                if **body == Formula::int(me, refer_pattern(me, other, Term::var(o.clone()))) {
                    for act in refer_candidates(state, situation, other, None) {
                        out.push((act, target.clone()));
                    }
                    return;
                }
            }
            if !inner.is_ground() {
                return;
            }
            match &**inner {
                Formula::Int(a, g) if a == me => {
                    out.push((DialogAct::request(me, other, g), target.clone()));
                }
                p => out.push((DialogAct::inform(me, other, p), target.clone())),
            }
        }
        Formula::Done(act, _) => walk_act(state, situation, act, target, out),
        _ => {}
    }
}

fn walk_act(
    state: &AgentState,
    situation: &Situation,
    act: &ActExpr,
    target: &Formula,
    out: &mut Vec<(DialogAct, Formula)>,
) {
    let me = state.id.as_str();
    let (name, args) = match act {
        ActExpr::Choice(l, r) => {
            walk_act(state, situation, l, target, out);
            walk_act(state, situation, r, target, out);
            return;
        }
        ActExpr::Seq(..) => return,
        ActExpr::Atomic { act, actor, args } if actor.as_const() == Some(me) => (act, args),
        ActExpr::Atomic { .. } => return,
    };
    let Some(other) = args.first().and_then(Arg::as_term).and_then(Term::as_const) else {
        return;
    };
    if other == me {
        return;
    }
    if name == "refer" && args.len() == 3 {
        if let (Some(d @ Term::Descr(..)), Some(Term::Const(r))) =
            (args[1].as_term(), args[2].as_term())
        {
            if d.is_ground() {
                out.push((DialogAct::refer(me, other, d, r), target.clone()));
            }
        }
        return;
    }
    if args.len() != 2 {
        return;
    }
    let Some(content) = args[1].as_formula() else {
        return;
    };
    let ground = content.is_ground();
    match name.as_str() {
        "prop" if ground => {
            if state
                .acceptance_conflict(&content, situation.context)
                .is_none()
            {
                out.push((DialogAct::propose(me, other, &content), target.clone()));
            }
        }
        "prop" => {
            // A fresh description for one of our own representations.
            let Some((Term::Var(d), Term::Const(rep))) = refered_by(&content) else {
                return;
            };
            if state.rep(rep).is_none() {
                return;
            }
            let mut exclude = excluded_descriptions(target, d);
            exclude.extend(proposed_descriptions(state, other, rep));
            let chosen = choose_description_with(
                state,
                rep,
                other,
                situation.context,
                &exclude,
                |descr, _| {
                    let pact = Formula::atom("referedBy", vec![descr.clone(), Term::constant(rep)]);
                    state
                        .acceptance_conflict(&pact, situation.context)
                        .is_none()
                },
            );
            if let Ok(descr) = chosen {
                let pact = Formula::atom("referedBy", vec![descr, Term::constant(rep.clone())]);
                out.push((DialogAct::propose(me, other, &pact), target.clone()));
            }
        }
        "accept" if ground => out.push((DialogAct::accept(me, other, &content), target.clone())),
        "request" if ground => out.push((DialogAct::request(me, other, &content), target.clone())),
        "inform" if ground => out.push((DialogAct::inform(me, other, &content), target.clone())),
        _ => {}
    }
}

fn refer_pattern(me: &str, other: &str, rep: Term) -> Formula {
    Formula::atom(
        "refer",
        vec![Term::constant(me), Term::constant(other), rep],
    )
}

/// `Bel(other, exists ?o . Int(me, refer(me, other, ?o)))`
fn heard_intention(me: &str, other: &str) -> Formula {
    Formula::bel(
        other,
        Formula::exists(
            "o",
            Formula::int(me, refer_pattern(me, other, Term::var("o"))),
        ),
    )
}

fn refer_intention_rep(f: &Formula, me: &str, other: &str) -> Option<String> {
    match f {
        Formula::Int(a, g) if a == me => match &**g {
            Formula::Atom(p, args)
                if p == "refer"
                    && args.len() == 3
                    && args[0].as_const() == Some(me)
                    && args[1].as_const() == Some(other) =>
            {
                args[2].as_const().map(str::to_string)
            }
            _ => None,
        },
        _ => None,
    }
}

/// Refer acts for own representations the agent intends to refer to.
fn refer_candidates(
    state: &AgentState,
    situation: &Situation,
    other: &str,
    only: Option<&str>,
) -> Vec<DialogAct> {
    let me = state.id.as_str();
    state
        .reps
        .iter()
        .filter(|r| only.is_none_or(|o| o == r.id))
        .filter(|r| {
            state.entails(&Formula::int(
                me,
                refer_pattern(me, other, Term::constant(r.id.clone())),
            ))
        })
        .filter_map(|r| {
            let exclude = proposed_descriptions(state, other, &r.id);
            choose_description_with(state, &r.id, other, situation.context, &exclude, |_, _| {
                true
            })
            .ok()
            .map(|d| DialogAct::refer(me, other, &d, &r.id))
        })
        .collect()
}

/// Descriptions `D` with `not ?var = D` somewhere in the goal.
fn excluded_descriptions(goal: &Formula, var: &str) -> Vec<Term> {
    let mut out = Vec::new();
    let mut stack = vec![goal];
    while let Some(f) = stack.pop() {
        match f {
            Formula::Not(g) => match &**g {
                Formula::Equals(Term::Var(v), t) | Formula::Equals(t, Term::Var(v)) if v == var => {
                    out.push(t.clone());
                }
                other => stack.push(other),
            },
            Formula::And(v) | Formula::Or(v) => stack.extend(v.iter()),
            Formula::Exists(_, g) | Formula::Forall(_, g) => stack.push(g),
            _ => {}
        }
    }
    out
}

/// Descriptions the agent already proposed for `rep`.
fn proposed_descriptions(state: &AgentState, other: &str, rep: &str) -> Vec<Term> {
    let me = state.id.as_str();
    state
        .beliefs
        .derived()
        .iter()
        .filter_map(|f| {
            let Formula::Done(act, _) = f else {
                return None;
            };
            let ActExpr::Atomic { act, actor, args } = &**act else {
                return None;
            };
            if act != "prop" || actor.as_const() != Some(me) || args.len() != 2 {
                return None;
            }
            if args[0].as_term().and_then(Term::as_const) != Some(other) {
                return None;
            }
            let content = args[1].as_formula()?;
            match refered_by(&content) {
                Some((d, Term::Const(r))) if r == rep => Some(d.clone()),
                _ => None,
            }
        })
        .collect()
}

/// Predicate a truth-critical check looks at: the atom's predicate, or the
/// function on either side of an equality.
fn predicate_of(f: &Formula) -> Option<&str> {
    match f {
        Formula::Atom(p, _) => Some(p),
        Formula::Equals(Term::App(p, _), _) | Formula::Equals(_, Term::App(p, _)) => Some(p),
        Formula::Not(g) => predicate_of(g),
        _ => None,
    }
}

/// Truth-critical conjuncts that contradict the agent's beliefs.
fn critical_conflicts(
    state: &AgentState,
    situation: &Situation,
    conjuncts: &[Formula],
) -> Vec<String> {
    let mut preds: Vec<String> = conjuncts
        .iter()
        .filter(|c| predicate_of(c).is_some_and(|p| situation.truth_critical.contains(p)))
        .filter(|c| conflicts_with_beliefs(state, c))
        .filter_map(|c| predicate_of(c).map(str::to_string))
        .collect();
    preds.sort();
    preds.dedup();
    preds
}

/// Answers to a proposal of `content` by `proposer`: accept when the content
/// is acceptable, counter-propose on a truth-critical conflict, and always a
/// request for something else.
fn obligation_candidates(
    state: &AgentState,
    situation: &Situation,
    proposer: &str,
    content: &Formula,
) -> Vec<DialogAct> {
    let me = state.id.as_str();
    let mut out = Vec::new();
    match refered_by(content) {
        Some((d @ Term::Descr(..), Term::Const(rep))) => {
            if let Identification::Unique(own) = identify(state, d, situation.context) {
                let body = apply_description(d, &own)
                    .map(|b| b.conjuncts())
                    .unwrap_or_default();
                let critical = critical_conflicts(state, situation, &body);
                let own_pact =
                    Formula::atom("referedBy", vec![d.clone(), Term::constant(own.clone())]);
                if critical.is_empty() {
                    if state
                        .acceptance_conflict(&own_pact, situation.context)
                        .is_none()
                    {
                        out.push(DialogAct::accept(me, proposer, content));
                    }
                } else if let Some(alt) =
                    counter_description(state, situation, proposer, d, &own, &critical)
                {
                    let pact = Formula::atom("referedBy", vec![alt, Term::constant(rep.clone())]);
                    out.push(DialogAct::propose(me, proposer, &pact));
                }
            }
            let clarify = Formula::exists(
                "d",
                Formula::and(vec![
                    Formula::done(ActExpr::atomic(
                        "prop",
                        proposer,
                        vec![
                            Arg::Term(Term::constant(me)),
                            Arg::Formula(Formula::atom(
                                "referedBy",
                                vec![Term::var("d"), Term::constant(rep.clone())],
                            )),
                        ],
                    )),
                    Formula::not(Formula::eq(Term::var("d"), d.clone())),
                ]),
            );
            out.push(DialogAct::request(me, proposer, &clarify));
        }
        _ => {
            let critical = critical_conflicts(state, situation, &content.conjuncts());
            if critical.is_empty()
                && state
                    .acceptance_conflict(content, situation.context)
                    .is_none()
            {
                out.push(DialogAct::accept(me, proposer, content));
            }
            let alternative = Formula::done(ActExpr::atomic(
                "prop",
                proposer,
                vec![Arg::Term(Term::constant(me)), Arg::Term(Term::var("q"))],
            ));
            let clarify = match content {
                Formula::Atom(n, args) => {
                    let as_term = if args.is_empty() {
                        Term::constant(n.clone())
                    } else {
                        Term::app(n.clone(), args.clone())
                    };
                    Formula::and(vec![
                        alternative,
                        Formula::not(Formula::eq(Term::var("q"), as_term)),
                    ])
                }
                _ => alternative,
            };
            out.push(DialogAct::request(
                me,
                proposer,
                &Formula::exists("q", clarify),
            ));
        }
    }
    out
}

/// A description of `own` that states the believed value of every conflicting
/// truth-critical predicate and contradicts no belief on a truth-critical
/// predicate.
fn counter_description(
    state: &AgentState,
    situation: &Situation,
    addressee: &str,
    rejected: &Term,
    own: &str,
    critical: &[String],
) -> Option<Term> {
    let ok = |descr: &Term, body: &[Formula]| {
        let covers = critical.iter().all(|p| {
            body.iter()
                .any(|c| predicate_of(c) == Some(p.as_str()) && state.entails(c))
        });
        covers
            && critical_conflicts(state, situation, body).is_empty()
            && identify(state, descr, situation.context) == Identification::Unique(own.to_string())
    };
    choose_description_with(
        state,
        own,
        addressee,
        situation.context,
        &[rejected.clone()],
        ok,
    )
    .ok()
}

/// One turn of `agent`: perceive, prune, deliberate, and perform at most one
/// act. Returns the emitted act event's index, if any.
pub fn step_turn(world: &mut World, agent: &str) -> Result<Option<usize>, SimError> {
    world.perceive(agent);
    let state = world
        .agent_mut(agent)
        .ok_or_else(|| SimError::UnknownAgent(agent.to_string()))?;
    let snapshot = state.clone();
    state
        .agenda
        .retain(|i| i.origin != Origin::Task || !goal_holds(&snapshot, &i.goal));

    let situation = Situation {
        context: &world.context,
        truth_critical: &world.truth_critical,
    };
    let state = world.agent(agent).expect("checked above");
    match deliberate(state, &situation) {
        Some(act) => perform(world, &act).map(Some),
        None => Ok(None),
    }
}

/// Goals removed from the actor's agenda once `act` is performed: every task
/// goal the act achieves, and the first reaction goal it answers.
pub(crate) fn discharge(state: &mut AgentState, act: &DialogAct) {
    let achieved: Vec<Formula> = scan_order(state)
        .into_iter()
        .filter(|(g, _, _)| effect_yields(act, g))
        .scan(false, |reaction_done, (g, origin, _)| {
            Some(match origin {
                Origin::Task => Some(g),
                Origin::Reaction if !*reaction_done => {
                    *reaction_done = true;
                    Some(g)
                }
                Origin::Reaction => None,
            })
        })
        .flatten()
        .collect();
    for g in achieved {
        state.agenda.remove(&g);
    }
}
