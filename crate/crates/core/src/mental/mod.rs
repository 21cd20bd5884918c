//! Per-agent mental state: beliefs, collective acceptances, the intention
//! agenda and the private representation store.
//!
//! State is perspectival. A belief of the owning agent is stored without its
//! outer `Bel(self, ..)`, so `Bel(tom, p)` asserted into Tom's state is kept
//! as `p`. Operations are functional: they return a new state and leave the
//! receiver untouched.

mod entail;
mod report;

pub(crate) use entail::View;
pub use report::{AcceptanceViolation, BeliefViolation, CrossConflict, Report};

use std::collections::BTreeSet;

use crate::logic::{
    free_vars, modal_depth, normalize, render_formula, substitute, unfold_mb, Formula, Term,
};

pub const DEFAULT_MAX_NESTING: usize = 2;

/// Reserved variable standing for the representation in its descriptors.
pub const SELF_VAR: &str = "self";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MentalError {
    #[error("inconsistent belief: `{formula}` conflicts with `{conflict}`")]
    InconsistentBelief { formula: Formula, conflict: Formula },
    #[error("inconsistent acceptance: `{content}` conflicts with pact `{conflict}`")]
    InconsistentAcceptance { content: Formula, conflict: Formula },
    #[error("formula `{0}` is not ground")]
    NonGround(Formula),
}

/// An agent-private handle on some object. The anchor names the world object
/// and is only read by the simulator's oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MentalRepresentation {
    pub id: String,
    pub descriptors: Vec<Formula>,
    pub anchor: String,
}

impl MentalRepresentation {
    pub fn new(
        id: impl Into<String>,
        descriptors: Vec<Formula>,
        anchor: impl Into<String>,
    ) -> Self {
        MentalRepresentation {
            id: id.into(),
            descriptors: descriptors.iter().map(normalize).collect(),
            anchor: anchor.into(),
        }
    }

    /// Descriptors with `?self` replaced by this representation's id.
    pub fn facts(&self) -> Vec<Formula> {
        let me = Term::constant(self.id.clone());
        self.descriptors
            .iter()
            .map(|d| normalize(&substitute(d, SELF_VAR, &me).expect("constant is ground")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pact {
    pub content: Formula,
    pub counterpart: String,
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Reaction,
    Task,
}

impl Origin {
    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::Reaction => "reaction",
            Origin::Task => "task",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intention {
    pub goal: Formula,
    pub origin: Origin,
}

/// Ordered goals: reactions first, then tasks, each group first-in first-out.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntentionAgenda {
    items: Vec<Intention>,
}

impl IntentionAgenda {
    pub fn push(&mut self, goal: Formula, origin: Origin) -> bool {
        let goal = normalize(&goal);
        if self.items.iter().any(|i| i.goal == goal) {
            return false;
        }
        let at = match origin {
            Origin::Reaction => self
                .items
                .iter()
                .position(|i| i.origin == Origin::Task)
                .unwrap_or(self.items.len()),
            Origin::Task => self.items.len(),
        };
        self.items.insert(at, Intention { goal, origin });
        true
    }

    pub fn remove(&mut self, goal: &Formula) {
        self.items.retain(|i| i.goal != *goal);
    }

    pub fn retain(&mut self, keep: impl FnMut(&Intention) -> bool) {
        self.items.retain(keep);
    }

    pub fn contains(&self, goal: &Formula) -> bool {
        self.items.iter().any(|i| i.goal == *goal)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Intention> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefBase {
    facts: BTreeSet<Formula>,
    // Every stored fact split after MB unfolding up to `max_nesting` levels.
    derived: BTreeSet<Formula>,
    max_nesting: usize,
}

impl BeliefBase {
    pub fn new(max_nesting: usize) -> Self {
        BeliefBase {
            facts: BTreeSet::new(),
            derived: BTreeSet::new(),
            max_nesting,
        }
    }

    pub fn facts(&self) -> &BTreeSet<Formula> {
        &self.facts
    }

    pub fn derived(&self) -> &BTreeSet<Formula> {
        &self.derived
    }

    pub fn max_nesting(&self) -> usize {
        self.max_nesting
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcceptanceStore {
    pacts: BTreeSet<Pact>,
}

impl AcceptanceStore {
    pub fn iter(&self) -> impl Iterator<Item = &Pact> {
        self.pacts.iter()
    }

    pub fn in_context<'a>(&'a self, context: &'a str) -> impl Iterator<Item = &'a Pact> + 'a {
        self.pacts.iter().filter(move |p| p.context == context)
    }

    pub fn len(&self) -> usize {
        self.pacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pacts.is_empty()
    }

    /// Drops every pact of a context at once, as when a conversation ends.
    pub fn drop_context(&mut self, context: &str) {
        self.pacts.retain(|p| p.context != context);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    pub id: String,
    pub beliefs: BeliefBase,
    pub acceptances: AcceptanceStore,
    pub agenda: IntentionAgenda,
    pub reps: Vec<MentalRepresentation>,
    /// Assertions turned away because they contradicted the base.
    pub refusals: Vec<BeliefViolation>,
}

impl AgentState {
    pub fn new(id: impl Into<String>) -> Self {
        Self::with_nesting(id, DEFAULT_MAX_NESTING)
    }

    pub fn with_nesting(id: impl Into<String>, max_nesting: usize) -> Self {
        AgentState {
            id: id.into(),
            beliefs: BeliefBase::new(max_nesting),
            acceptances: AcceptanceStore::default(),
            agenda: IntentionAgenda::default(),
            reps: Vec::new(),
            refusals: Vec::new(),
        }
    }

    pub fn rep(&self, id: &str) -> Option<&MentalRepresentation> {
        self.reps.iter().find(|r| r.id == id)
    }

    pub(crate) fn view(&self) -> View<'_> {
        View {
            self_id: &self.id,
            derived: &self.beliefs.derived,
            agenda: Some(&self.agenda),
            pacts: Some(&self.acceptances),
            reps: &self.reps,
            introspective: true,
        }
    }

    /// Adds `f` (split into conjuncts) to the belief base.
    pub fn assert_fact(&self, f: &Formula) -> Result<AgentState, MentalError> {
        let mut next = self.clone();
        next.assert_in_place(f)?;
        Ok(next)
    }

    pub(crate) fn assert_in_place(&mut self, f: &Formula) -> Result<(), MentalError> {
        if !free_vars(f).is_empty() {
            return Err(MentalError::NonGround(f.clone()));
        }
        let max = self.beliefs.max_nesting;
        let mut pieces = Vec::new();
        for piece in split(&self.id, &normalize(f)) {
            if modal_depth(&piece) > max {
                let cut = normalize(&truncate(&piece, 0, max));
                tracing::warn!(
                    agent = %self.id,
                    formula = %render_formula(&piece),
                    kept = %render_formula(&cut),
                    "nesting bound exceeded, innermost modal layer dropped"
                );
                pieces.extend(split(&self.id, &cut));
            } else {
                pieces.push(piece);
            }
        }
        let mut fresh: BTreeSet<Formula> = BTreeSet::new();
        for piece in &pieces {
            fresh.extend(derive(&self.id, piece, max));
        }
        for d in &fresh {
            if self_conflicting(d) {
                return Err(MentalError::InconsistentBelief {
                    formula: normalize(f),
                    conflict: d.clone(),
                });
            }
            let clash = self
                .beliefs
                .derived
                .iter()
                .chain(fresh.iter())
                .find(|e| conflicts(d, e));
            if let Some(e) = clash {
                return Err(MentalError::InconsistentBelief {
                    formula: normalize(f),
                    conflict: e.clone(),
                });
            }
        }
        self.beliefs.facts.extend(pieces);
        self.beliefs.derived.extend(fresh);
        Ok(())
    }

    /// Asserts `f`, recording a refusal instead of failing on inconsistency.
    pub(crate) fn assert_or_refuse(&mut self, f: &Formula) -> Option<BeliefViolation> {
        match self.assert_in_place(f) {
            Ok(()) => None,
            Err(MentalError::InconsistentBelief { formula, conflict }) => {
                let v = BeliefViolation { formula, conflict };
                self.refusals.push(v.clone());
                Some(v)
            }
            Err(e) => panic!("assertion of open formula: {e}"),
        }
    }

    pub fn entails(&self, f: &Formula) -> bool {
        self.view().holds(&normalize(f))
    }

    /// Records a pact. Beliefs are not consulted: a pact may contradict them.
    pub fn accept(
        &self,
        content: &Formula,
        counterpart: &str,
        context: &str,
    ) -> Result<AgentState, MentalError> {
        let mut next = self.clone();
        next.accept_in_place(content, counterpart, context)?;
        Ok(next)
    }

    pub(crate) fn accept_in_place(
        &mut self,
        content: &Formula,
        counterpart: &str,
        context: &str,
    ) -> Result<(), MentalError> {
        if let Some(conflict) = self.acceptance_conflict(content, context) {
            return Err(MentalError::InconsistentAcceptance {
                content: normalize(content),
                conflict,
            });
        }
        self.acceptances.pacts.insert(Pact {
            content: normalize(content),
            counterpart: counterpart.to_string(),
            context: context.to_string(),
        });
        Ok(())
    }

    /// The pact in `context` that `content` would contradict, if any.
    pub fn acceptance_conflict(&self, content: &Formula, context: &str) -> Option<Formula> {
        let content = normalize(content);
        let new = pact_pieces(&self.id, &content);
        for pact in self.acceptances.in_context(context) {
            let old = pact_pieces(&self.id, &pact.content);
            let clash = new
                .iter()
                .any(|n| self_conflicting(n) || old.iter().any(|o| conflicts(n, o)));
            if clash {
                return Some(pact.content.clone());
            }
        }
        None
    }

    /// Acceptance-aware query: true when the pacts of `context` yield `f`, or
    /// failing that when the beliefs do.
    pub fn presumes(&self, f: &Formula, context: &str) -> bool {
        let q = normalize(f);
        let derived = self.pact_knowledge(context);
        let pact_view = View {
            self_id: &self.id,
            derived: &derived,
            agenda: None,
            pacts: None,
            reps: &[],
            introspective: false,
        };
        pact_view.holds(&q) || self.view().holds(&q)
    }

    /// Facts implied by the pacts of one context, description bodies included.
    pub(crate) fn pact_knowledge(&self, context: &str) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        for pact in self.acceptances.in_context(context) {
            for piece in pact_pieces(&self.id, &pact.content) {
                out.extend(derive(&self.id, &piece, self.beliefs.max_nesting));
            }
        }
        out
    }

    pub fn consistency_report(&self) -> Report {
        report::build(self)
    }

    /// Canonical text of the whole state, used for digests and trace blocks.
    pub fn canonical_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        let mut facts: Vec<String> = self.beliefs.facts.iter().map(render_formula).collect();
        facts.sort();
        lines.extend(facts.into_iter().map(|f| format!("belief {f}")));
        let mut pacts: Vec<String> = self
            .acceptances
            .iter()
            .map(|p| {
                format!(
                    "pact {} {} {}",
                    p.context,
                    p.counterpart,
                    render_formula(&p.content)
                )
            })
            .collect();
        pacts.sort();
        lines.extend(pacts);
        for i in self.agenda.iter() {
            lines.push(format!(
                "goal {} {}",
                i.origin.as_str(),
                render_formula(&i.goal)
            ));
        }
        for r in &self.refusals {
            lines.push(format!("refused {}", render_formula(&r.formula)));
        }
        lines
    }
}

/// Splits a normalized formula into storable pieces from `agent`'s
/// perspective: conjunctions are split, the agent's own outer belief
/// operator is dropped, and Bel/MB distribute over conjunction.
pub(crate) fn split(agent: &str, f: &Formula) -> Vec<Formula> {
    match f {
        Formula::True => vec![],
        Formula::And(v) => v.iter().flat_map(|g| split(agent, g)).collect(),
        Formula::Bel(a, g) if a == agent => split(agent, g),
        other => distribute(other),
    }
}

fn distribute(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::True => vec![],
        Formula::And(v) => v.iter().flat_map(distribute).collect(),
        Formula::Bel(a, g) => distribute(g)
            .into_iter()
            .map(|p| Formula::Bel(a.clone(), Box::new(p)))
            .collect(),
        Formula::MB(a, b, g) => distribute(g)
            .into_iter()
            .map(|p| Formula::MB(a.clone(), b.clone(), Box::new(p)))
            .collect(),
        other => vec![other.clone()],
    }
}

/// All pieces a stored fact contributes to the closure: its MB unfoldings up
/// to `max` levels, each normalized and split.
pub(crate) fn derive(agent: &str, fact: &Formula, max: usize) -> Vec<Formula> {
    let mut out = Vec::new();
    for k in 0..=max {
        for p in split(agent, &normalize(&unfold_mb(fact, k))) {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Pieces of a pact's content, with `referedBy(D, r)` also contributing the
/// body of `D` applied to `r`.
pub(crate) fn pact_pieces(agent: &str, content: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    for piece in split(agent, &normalize(content)) {
        if let Some((Term::Descr(v, body), r)) = refered_by(&piece) {
            if let Ok(inst) = substitute(body, v, r) {
                out.extend(split(agent, &normalize(&inst)));
            }
        }
        out.push(piece);
    }
    out
}

/// Splits `referedBy(D, r)` into its description and referent.
pub fn refered_by(f: &Formula) -> Option<(&Term, &Term)> {
    match f {
        Formula::Atom(p, args) if p == "referedBy" && args.len() == 2 => Some((&args[0], &args[1])),
        _ => None,
    }
}

fn truncate(f: &Formula, level: usize, max: usize) -> Formula {
    let down = |g: &Formula| Box::new(truncate(g, level + 1, max));
    let same = |g: &Formula| Box::new(truncate(g, level, max));
    match f {
        Formula::Bel(_, g)
        | Formula::Int(_, g)
        | Formula::MB(_, _, g)
        | Formula::CollInt(_, _, g)
        | Formula::CollAcc(_, _, g)
            if level >= max =>
        {
            truncate(g, level, max)
        }
        Formula::Bel(a, g) => Formula::Bel(a.clone(), down(g)),
        Formula::Int(a, g) => Formula::Int(a.clone(), down(g)),
        Formula::MB(a, b, g) => Formula::MB(a.clone(), b.clone(), down(g)),
        Formula::CollInt(a, b, g) => Formula::CollInt(a.clone(), b.clone(), down(g)),
        Formula::CollAcc(a, b, g) => Formula::CollAcc(a.clone(), b.clone(), down(g)),
        Formula::Not(g) => Formula::Not(same(g)),
        Formula::And(v) => Formula::And(v.iter().map(|g| truncate(g, level, max)).collect()),
        Formula::Or(v) => Formula::Or(v.iter().map(|g| truncate(g, level, max)).collect()),
        Formula::Implies(a, b) => Formula::Implies(same(a), same(b)),
        Formula::Exists(v, g) => Formula::Exists(v.clone(), same(g)),
        Formula::Forall(v, g) => Formula::Forall(v.clone(), same(g)),
        Formula::Possible(g) => Formula::Possible(same(g)),
        other => other.clone(),
    }
}

fn distinct_constants(a: &Term, b: &Term) -> bool {
    matches!((a, b), (Term::Const(x), Term::Const(y)) if x != y)
}

/// Direct contradiction between two normalized pieces.
pub(crate) fn conflicts(a: &Formula, b: &Formula) -> bool {
    match (a, b) {
        (Formula::Not(x), y) if **x == *y => true,
        (x, Formula::Not(y)) if **y == *x => true,
        (Formula::Equals(s1, t1), Formula::Equals(s2, t2)) => {
            (s1 == s2 && distinct_constants(t1, t2))
                || (t1 == t2 && distinct_constants(s1, s2))
                || (s1 == t2 && distinct_constants(t1, s2))
                || (t1 == s2 && distinct_constants(s1, t2))
        }
        (Formula::Bel(x, p), Formula::Bel(y, q)) if x == y => conflicts(p, q),
        _ => false,
    }
}

/// Whether `f` contradicts something the agent believes.
pub(crate) fn conflicts_with_beliefs(state: &AgentState, f: &Formula) -> bool {
    let f = normalize(f);
    self_conflicting(&f) || state.beliefs.derived.iter().any(|b| conflicts(&f, b))
}

pub(crate) fn self_conflicting(a: &Formula) -> bool {
    match a {
        Formula::False => true,
        Formula::Equals(s, t) => distinct_constants(s, t),
        Formula::Not(g) => {
            matches!(**g, Formula::True) || matches!(&**g, Formula::Equals(s, t) if s == t)
        }
        Formula::Bel(_, g) => self_conflicting(g),
        _ => false,
    }
}
