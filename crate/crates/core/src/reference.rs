//! Referent identification, description choice and conceptual pacts.

use std::collections::BTreeSet;

use crate::acts::{ActType, DialogAct};
use crate::logic::{
    normalize, render_formula, substitute, substitute_all, Arg, Bindings, Formula, Term,
};
use crate::mental::{refered_by, AgentState, View, SELF_VAR};
use crate::sim::{CcgMode, World};

/// Bound variable of generated descriptions.
pub const DESCR_VAR: &str = "x";

// Subsets are enumerated exhaustively, so the descriptor count is capped.
const MAX_DESCRIPTORS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReferenceError {
    #[error("no description of `{rep}` is believed to single it out for {addressee}")]
    NoDistinguishingDescription { rep: String, addressee: String },
    #[error("agent `{agent}` has no representation `{rep}`")]
    UnknownRep { agent: String, rep: String },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("no proposal and acceptance of `{0}` in the trace")]
    MissingPactPreconditions(String),
    #[error("`{0}` is not a description")]
    NotADescription(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Identification {
    Unique(String),
    Ambiguous(Vec<String>),
    NoMatch,
}

impl Identification {
    fn from_matches(mut ids: Vec<String>) -> Self {
        match ids.len() {
            0 => Identification::NoMatch,
            1 => Identification::Unique(ids.remove(0)),
            _ => Identification::Ambiguous(ids),
        }
    }
}

/// Instantiates a description body for one candidate referent.
pub fn apply_description(description: &Term, referent: &str) -> Option<Formula> {
    match description {
        Term::Descr(v, body) => substitute(body, v, &Term::constant(referent))
            .ok()
            .map(|f| normalize(&f)),
        _ => None,
    }
}

/// Every representation whose descriptors, together with the pacts of
/// `context`, satisfy each conjunct of the description.
pub fn identify(state: &AgentState, description: &Term, context: &str) -> Identification {
    let pacts = state.pact_knowledge(context);
    let matches = state
        .reps
        .iter()
        .filter(|rep| {
            let Some(body) = apply_description(description, &rep.id) else {
                return false;
            };
            let mut known: BTreeSet<Formula> = pacts.clone();
            for fact in rep.facts() {
                known.extend(crate::mental::split(&state.id, &fact));
            }
            let view = View {
                self_id: &state.id,
                derived: &known,
                agenda: None,
                pacts: None,
                reps: &[],
                introspective: false,
            };
            body.conjuncts().iter().all(|c| view.holds(c))
        })
        .map(|rep| rep.id.clone())
        .collect();
    Identification::from_matches(matches)
}

/// `iota ?x . d1 and .. and dn` over descriptors written with `?self`.
pub fn describe(descriptors: &[Formula]) -> Term {
    let mut b = Bindings::new();
    b.insert(SELF_VAR.to_string(), Arg::Term(Term::var(DESCR_VAR)));
    let body: Vec<Formula> = descriptors.iter().map(|d| substitute_all(d, &b)).collect();
    let body = match body.len() {
        1 => body.into_iter().next().unwrap(),
        _ => Formula::And(body),
    };
    Term::descr(DESCR_VAR, normalize(&body))
}

/// Smallest descriptor subset of `rep_id` that the speaker believes lets
/// `addressee` single out the representation.
pub fn choose_description(
    state: &AgentState,
    rep_id: &str,
    addressee: &str,
    context: &str,
) -> Result<Term, ReferenceError> {
    choose_description_with(state, rep_id, addressee, context, &[], |_, _| true)
}

/// As [`choose_description`], skipping `exclude` and any description that
/// `accept` rejects. `accept` sees the description and its body instantiated
/// for `rep_id`.
pub fn choose_description_with(
    state: &AgentState,
    rep_id: &str,
    addressee: &str,
    context: &str,
    exclude: &[Term],
    accept: impl Fn(&Term, &[Formula]) -> bool,
) -> Result<Term, ReferenceError> {
    let rep = state
        .rep(rep_id)
        .ok_or_else(|| ReferenceError::UnknownRep {
            agent: state.id.clone(),
            rep: rep_id.to_string(),
        })?;
    let pacts = state.pact_knowledge(context);
    let pact_view = View {
        self_id: &state.id,
        derived: &pacts,
        agenda: None,
        pacts: None,
        reps: &[],
        introspective: false,
    };
    let for_addressee =
        |c: &Formula| pact_view.holds(c) || state.entails(&Formula::bel(addressee, c.clone()));

    let descriptors: Vec<Formula> = rep
        .descriptors
        .iter()
        .take(MAX_DESCRIPTORS)
        .cloned()
        .collect();
    let mut options: Vec<(usize, bool, String, Term)> = Vec::new();
    for mask in 1u32..(1 << descriptors.len()) {
        let subset: Vec<Formula> = descriptors
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, d)| d.clone())
            .collect();
        let d = describe(&subset);
        if exclude.contains(&d) {
            continue;
        }
        let Some(own) = apply_description(&d, rep_id) else {
            continue;
        };
        let own = own.conjuncts();
        if !accept(&d, &own) {
            continue;
        }
        let matching: Vec<&str> = state
            .reps
            .iter()
            .filter(|r| {
                apply_description(&d, &r.id)
                    .is_some_and(|b| b.conjuncts().iter().all(for_addressee))
            })
            .map(|r| r.id.as_str())
            .collect();
        if matching != [rep_id] {
            continue;
        }
        let fresh_vocabulary = own.iter().any(|c| !pact_view.holds(c));
        options.push((subset.len(), fresh_vocabulary, print_descr(&d), d));
    }
    options.sort();
    options.into_iter().next().map(|o| o.3).ok_or_else(|| {
        ReferenceError::NoDistinguishingDescription {
            rep: rep_id.to_string(),
            addressee: addressee.to_string(),
        }
    })
}

fn print_descr(d: &Term) -> String {
    crate::logic::print_term(d)
}

/// The two goals governing a reference by `speaker` to `rep`.
pub fn meta_goals(speaker: &str, addressee: &str, rep: &str) -> (Formula, Formula) {
    let refer = refer_intention(speaker, addressee, rep);
    let understanding = Formula::coll_int(
        speaker,
        addressee,
        Formula::mb(speaker, addressee, Formula::int(speaker, refer)),
    );
    let pact = Formula::coll_int(
        speaker,
        addressee,
        Formula::exists(
            "d",
            Formula::coll_acc(
                speaker,
                addressee,
                Formula::atom("referedBy", vec![Term::var("d"), Term::constant(rep)]),
            ),
        ),
    );
    (normalize(&understanding), normalize(&pact))
}

/// `refer(i, j, o)`, the communicative intention kept inside `Int` facts.
pub fn refer_intention(speaker: &str, addressee: &str, rep: &str) -> Formula {
    Formula::atom(
        "refer",
        vec![
            Term::constant(speaker),
            Term::constant(addressee),
            Term::constant(rep),
        ],
    )
}

/// Harness oracle: whether two representations anchor to the same object.
pub fn rep_same_obj(
    world: &World,
    (agent_a, rep_a): (&str, &str),
    (agent_b, rep_b): (&str, &str),
) -> Result<bool, ReferenceError> {
    let anchor = |agent: &str, rep: &str| -> Result<String, ReferenceError> {
        let state = world
            .agent(agent)
            .ok_or_else(|| ReferenceError::UnknownAgent(agent.to_string()))?;
        state
            .rep(rep)
            .map(|r| r.anchor.clone())
            .ok_or_else(|| ReferenceError::UnknownRep {
                agent: agent.to_string(),
                rep: rep.to_string(),
            })
    };
    Ok(anchor(agent_a, rep_a)? == anchor(agent_b, rep_b)?)
}

/// What one agent took on when a pact formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PactOutcome {
    pub agent: String,
    /// Representation the agent tied the description to, for references.
    pub rep: Option<String>,
    /// Assertions refused because they contradicted the agent's beliefs.
    pub refused: Vec<Formula>,
}

/// Forms the pact for `content`, proposed by `proposer` and accepted by
/// `accepter`, in both agents' states.
///
/// In collective-acceptance mode each agent accepts the content with its own
/// representation substituted. In mutual-belief mode the same content is
/// asserted as a mutual belief instead, which may be refused.
pub fn register_pact(
    world: &mut World,
    proposer: &str,
    accepter: &str,
    content: &Formula,
) -> Result<Vec<PactOutcome>, ReferenceError> {
    let content = normalize(content);
    let proposed = DialogAct::propose(proposer, accepter, &content).done();
    let accepted = DialogAct::accept(accepter, proposer, &content).done();
    let in_trace = |f: &Formula| {
        world
            .trace
            .events
            .iter()
            .filter_map(|e| e.act.as_ref())
            .any(|a| a.done() == *f || a.effect().conjuncts().contains(f))
    };
    if !in_trace(&proposed) || !in_trace(&accepted) {
        return Err(ReferenceError::MissingPactPreconditions(render_formula(
            &content,
        )));
    }
    for a in [proposer, accepter] {
        if world.agent(a).is_none() {
            return Err(ReferenceError::UnknownAgent(a.to_string()));
        }
    }

    // The agent who first referred to the representation, if any.
    let referrer = refered_by(&content).and_then(|(_, r)| {
        world.trace.events.iter().find_map(|e| match &e.act {
            Some(DialogAct {
                act_type: ActType::Refer,
                actor,
                payload: crate::acts::Payload::Reference { rep, .. },
                ..
            }) if Term::constant(rep.clone()) == *r => Some(actor.clone()),
            _ => None,
        })
    });
    let referrer = referrer.unwrap_or_else(|| proposer.to_string());
    let addressee_of = |x: &str| if x == proposer { accepter } else { proposer };

    let context = world.context.clone();
    let mode = world.mode;
    let task = world.task.clone();
    let mut outcomes = Vec::new();
    for (me, other) in [(proposer, accepter), (accepter, proposer)] {
        let state = world.agent_mut(me).expect("checked above");
        let mut outcome = PactOutcome {
            agent: me.to_string(),
            rep: None,
            refused: Vec::new(),
        };
        let (own_content, own_rep) = match refered_by(&content) {
            Some((d, Term::Const(r))) => {
                let own = if state.rep(r).is_some() {
                    Some(r.clone())
                } else {
                    match identify(state, d, &context) {
                        Identification::Unique(o) => Some(o),
                        _ => None,
                    }
                };
                match own {
                    Some(o) => (
                        Formula::atom("referedBy", vec![d.clone(), Term::constant(o.clone())]),
                        Some(o),
                    ),
                    None => (content.clone(), None),
                }
            }
            _ => (content.clone(), None),
        };
        outcome.rep = own_rep.clone();
        let assert = |f: Formula, state: &mut AgentState, out: &mut PactOutcome| {
            for piece in f.conjuncts() {
                if let Some(v) = state.assert_or_refuse(&piece) {
                    out.refused.push(v.formula);
                }
            }
        };
        match mode {
            CcgMode::CollectiveAcceptance => {
                if let Err(e) = state.accept_in_place(&own_content, other, &context) {
                    tracing::warn!(agent = me, error = %e, "pact not recorded");
                }
            }
            CcgMode::MutualBelief => {
                let mut shared = vec![own_content.clone()];
                if let (Some((d, _)), Some(o)) = (refered_by(&own_content), &own_rep) {
                    if let Some(body) = apply_description(d, o) {
                        shared.push(body);
                    }
                }
                let f = Formula::mb(me, other, normalize(&Formula::And(shared)));
                assert(f, state, &mut outcome);
            }
        }
        if let Some(o) = &own_rep {
            let understanding = Formula::mb(
                me,
                other,
                Formula::int(
                    referrer.clone(),
                    refer_intention(&referrer, addressee_of(&referrer), o),
                ),
            );
            assert(understanding, state, &mut outcome);
            if let Some(t) = &task {
                if let Ok(goal) = substitute(t, SELF_VAR, &Term::constant(o.clone())) {
                    assert(Formula::mb(me, other, goal), state, &mut outcome);
                }
            }
        }
        outcomes.push(outcome);
    }
    Ok(outcomes)
}
