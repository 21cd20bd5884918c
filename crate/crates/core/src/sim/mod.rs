//! Two-agent worlds, the turn loop and trace recording.

mod scenario;
mod trace;

pub use scenario::{load_scenario, validate_scenario, ScenarioError, ScenarioErrors};
pub use trace::{
    digest_lines, AgentSummary, Event, FinalState, RunStatus, Trace, TraceError, REFUSED,
    TRACE_SCHEMA,
};

use std::collections::{BTreeMap, BTreeSet};

use crate::acts::{unmet_precondition, ActError, ActType, DialogAct};
use crate::engine::{discharge, react, step_turn, ReactionRule};
use crate::logic::{render_formula, Formula};
use crate::mental::AgentState;
use crate::reference::register_pact;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcgMode {
    /// Pacts are collective acceptances, kept apart from beliefs.
    CollectiveAcceptance,
    /// Pacts are asserted as mutual beliefs.
    MutualBelief,
}

impl CcgMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CcgMode::CollectiveAcceptance => "collective-acceptance",
            CcgMode::MutualBelief => "mutual-belief",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "collective-acceptance" => Some(CcgMode::CollectiveAcceptance),
            "mutual-belief" => Some(CcgMode::MutualBelief),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error(transparent)]
    Act(#[from] ActError),
}

pub const DEFAULT_MAX_TURNS: usize = 20;

#[derive(Debug, Clone)]
pub struct World {
    pub name: String,
    /// In turn order; the first agent opens.
    pub agents: Vec<AgentState>,
    pub context: String,
    pub mode: CcgMode,
    pub max_turns: usize,
    pub truth_critical: BTreeSet<String>,
    /// Task-level content agreed on once a reference succeeds, with `?self`
    /// standing for the agreed representation.
    pub task: Option<Formula>,
    pub reactions: Vec<ReactionRule>,
    pub trace: Trace,
    /// Current turn, from 1.
    pub turn: usize,
    // Number of trace events each agent has perceived.
    perceived: BTreeMap<String, usize>,
}

impl World {
    pub fn new(name: &str, context: &str, agents: Vec<AgentState>) -> Self {
        let mode = CcgMode::CollectiveAcceptance;
        World {
            name: name.to_string(),
            trace: Trace {
                scenario: name.to_string(),
                mode: mode.as_str().to_string(),
                context: context.to_string(),
                ..Trace::default()
            },
            perceived: agents.iter().map(|a| (a.id.clone(), 0)).collect(),
            agents,
            context: context.to_string(),
            mode,
            max_turns: DEFAULT_MAX_TURNS,
            truth_critical: BTreeSet::new(),
            task: None,
            reactions: Vec::new(),
            turn: 0,
        }
    }

    pub fn set_mode(&mut self, mode: CcgMode) {
        self.mode = mode;
        self.trace.mode = mode.as_str().to_string();
    }

    pub fn agent(&self, id: &str) -> Option<&AgentState> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn agent_mut(&mut self, id: &str) -> Option<&mut AgentState> {
        self.agents.iter_mut().find(|a| a.id == id)
    }

    /// Digest over both agents' canonical state.
    pub fn digest(&self) -> String {
        let lines: Vec<String> = self
            .agents
            .iter()
            .flat_map(|a| a.canonical_lines())
            .collect();
        digest_lines(&lines)
    }

    /// Whether acts addressed to `agent` wait to be perceived.
    pub fn has_pending(&self, agent: &str) -> bool {
        let seen = self.perceived.get(agent).copied().unwrap_or(0);
        self.trace.events[seen.min(self.trace.events.len())..]
            .iter()
            .any(|e| e.act.as_ref().is_some_and(|a| a.addressee == agent))
    }

    pub fn quiescent(&self) -> bool {
        self.agents
            .iter()
            .all(|a| a.agenda.is_empty() && !self.has_pending(&a.id))
    }

    /// Runs reactions for every act `agent` has not perceived yet.
    pub(crate) fn perceive(&mut self, agent: &str) {
        let seen = self.perceived.get(agent).copied().unwrap_or(0);
        let acts: Vec<DialogAct> = self.trace.events[seen..]
            .iter()
            .filter_map(|e| e.act.clone())
            .filter(|a| a.actor != agent)
            .collect();
        let rules = self.reactions.clone();
        if let Some(state) = self.agent_mut(agent) {
            for act in &acts {
                *state = react(state, act, &rules);
            }
        }
        self.perceived
            .insert(agent.to_string(), self.trace.events.len());
    }

    /// Alternates turns until quiescence, a stall or the turn limit, then
    /// records the final states.
    pub fn run(mut self) -> World {
        let order: Vec<String> = self.agents.iter().map(|a| a.id.clone()).collect();
        let mut status = RunStatus::TurnLimit;
        let mut idle = 0;
        if order.is_empty() {
            status = RunStatus::Quiescent;
        }
        for turn in 1..=if order.is_empty() { 0 } else { self.max_turns } {
            self.turn = turn;
            self.trace.turns = turn;
            let agent = &order[(turn - 1) % order.len()];
            let emitted = match step_turn(&mut self, agent) {
                Ok(e) => {
                    tracing::debug!(turn, agent = %agent, emitted = ?e, "turn");
                    e
                }
                Err(e) => {
                    tracing::warn!(agent = %agent, error = %e, "turn failed");
                    None
                }
            };
            if self.quiescent() {
                status = RunStatus::Quiescent;
                break;
            }
            idle = if emitted.is_some() { 0 } else { idle + 1 };
            if idle >= order.len() && order.iter().all(|a| !self.has_pending(a)) {
                status = RunStatus::Stalled;
                break;
            }
        }
        self.trace.status = Some(status);
        self.trace.finals = self
            .agents
            .iter()
            .map(|a| {
                let mut lines = a.canonical_lines();
                let digest = digest_lines(&lines);
                lines.extend(a.consistency_report().lines());
                FinalState {
                    agent: a.id.clone(),
                    digest,
                    lines,
                }
            })
            .collect();
        self
    }
}

/// Runs the world and returns its trace.
pub fn run(world: World) -> Trace {
    world.run().trace
}

/// Performs `act`: the effect goes to the addressee, `Done` facts to both,
/// achieved goals leave the actor's agenda, and an acceptance that closes a
/// proposal forms the pact. Returns the index of the act's event.
pub fn perform(world: &mut World, act: &DialogAct) -> Result<usize, SimError> {
    let actor = world
        .agent(&act.actor)
        .ok_or_else(|| SimError::UnknownAgent(act.actor.clone()))?;
    if world.agent(&act.addressee).is_none() {
        return Err(SimError::UnknownAgent(act.addressee.clone()));
    }
    if let Some(conjunct) = unmet_precondition(actor, act, &world.context) {
        return Err(ActError::InfeasibleAct {
            act: act.to_string(),
            conjunct,
        }
        .into());
    }

    let first = world.trace.events.len();
    let effect = act.effect().conjuncts();
    let mut done = vec![act.done()];
    if act.act_type == ActType::Refer {
        done.extend(
            effect
                .iter()
                .filter(|c| matches!(c, Formula::Done(..)))
                .cloned(),
        );
    }
    let mut refused: Vec<(String, Formula)> = Vec::new();

    let state = world.agent_mut(&act.actor).expect("checked above");
    for d in &done {
        if let Some(v) = state.assert_or_refuse(d) {
            refused.push((act.actor.clone(), v.formula));
        }
    }
    discharge(state, act);

    let state = world.agent_mut(&act.addressee).expect("checked above");
    for f in done.iter().chain(effect.iter()) {
        if let Some(v) = state.assert_or_refuse(f) {
            refused.push((act.addressee.clone(), v.formula));
        }
    }

    world.trace.events.push(Event {
        index: first,
        turn: world.turn,
        actor: act.actor.clone(),
        addressee: act.addressee.clone(),
        act_type: act.act_type.name().to_string(),
        payload: act.payload_text(),
        digest: String::new(),
        act: Some(act.clone()),
        after: Vec::new(),
    });

    if act.act_type == ActType::AcceptAct {
        match register_pact(world, &act.addressee, &act.actor, &act.content()) {
            Ok(outcomes) => {
                for o in outcomes {
                    refused.extend(o.refused.into_iter().map(|f| (o.agent.clone(), f)));
                }
            }
            Err(e) => tracing::warn!(error = %e, "no pact formed"),
        }
    }

    for (agent, f) in refused {
        let index = world.trace.events.len();
        world.trace.events.push(Event {
            index,
            turn: world.turn,
            actor: agent,
            addressee: "-".to_string(),
            act_type: REFUSED.to_string(),
            payload: render_formula(&f),
            digest: String::new(),
            act: None,
            after: Vec::new(),
        });
    }

    let digest = world.digest();
    let after: Vec<AgentSummary> = world.agents.iter().map(AgentSummary::of).collect();
    for e in &mut world.trace.events[first..] {
        e.digest = digest.clone();
        e.after = after.clone();
    }
    world
        .perceived
        .insert(act.actor.clone(), world.trace.events.len());
    Ok(first)
}
