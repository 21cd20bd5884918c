//! Scenario documents (TOML, `schema = 1`).
//!
//! ```toml
//! schema = 1
//! name = "restaurant"
//! context = "dinner"
//! ccg_mode = "collective-acceptance"   # or "mutual-belief"
//! max_turns = 20
//! nesting_depth = 2
//! initiator = "tom"
//! truth_critical = ["postalAddress"]
//! task = "meetingPlace(?self)"
//!
//! [[agent]]
//! id = "tom"
//! beliefs = ["..."]
//! intentions = ["refer(tom, laura, l)"]
//!
//! [[agent.rep]]
//! id = "l"
//! anchor = "restaurant1"
//! descriptors = ["lunchedTogether(?self)"]
//!
//! [[reaction]]
//! agent = "laura"
//! trigger = "Done(inform(tom, laura, ?p))"
//! goal = "Bel(laura, ?p)"
//! ```
//!
//! An intention `refer(i, j, o)` stands for the speaker's communicative
//! intention: it is stored as the fact `Int(i, refer(i, j, o))` and the two
//! reference meta-goals join the agenda after the other intentions.

use std::collections::BTreeSet;
use std::fmt;

use serde::Deserialize;
use toml::Spanned;

use super::{CcgMode, World, DEFAULT_MAX_TURNS};
use crate::engine::ReactionRule;
use crate::logic::{free_vars, parse_formula, Formula, Term};
use crate::mental::{AgentState, MentalRepresentation, Origin, DEFAULT_MAX_NESTING, SELF_VAR};
use crate::reference::{meta_goals, refer_intention};

pub const SCENARIO_SCHEMA: i64 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    UnknownAgentReference {
        line: usize,
        column: usize,
        agent: String,
    },
    FormulaSyntax {
        line: usize,
        column: usize,
        message: String,
    },
}

impl ScenarioError {
    pub fn line(&self) -> usize {
        match self {
            ScenarioError::Schema { line, .. }
            | ScenarioError::UnknownAgentReference { line, .. }
            | ScenarioError::FormulaSyntax { line, .. } => *line,
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Schema {
                line,
                column,
                message,
            } => write!(f, "{line}:{column}: schema error: {message}"),
            ScenarioError::UnknownAgentReference {
                line,
                column,
                agent,
            } => write!(f, "{line}:{column}: unknown agent reference `{agent}`"),
            ScenarioError::FormulaSyntax {
                line,
                column,
                message,
            } => write!(f, "{line}:{column}: syntax error: {message}"),
        }
    }
}

/// Every problem found in one document.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ScenarioErrors(pub Vec<ScenarioError>);

impl fmt::Display for ScenarioErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    schema: Spanned<i64>,
    name: String,
    context: String,
    ccg_mode: Option<Spanned<String>>,
    max_turns: Option<usize>,
    nesting_depth: Option<usize>,
    initiator: Option<Spanned<String>>,
    #[serde(default)]
    truth_critical: Vec<String>,
    task: Option<Spanned<String>>,
    #[serde(default)]
    agent: Vec<AgentDoc>,
    #[serde(default)]
    reaction: Vec<ReactionDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    id: Spanned<String>,
    #[serde(default)]
    beliefs: Vec<Spanned<String>>,
    #[serde(default)]
    intentions: Vec<Spanned<String>>,
    #[serde(default)]
    rep: Vec<RepDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RepDoc {
    id: Spanned<String>,
    anchor: String,
    descriptors: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReactionDoc {
    agent: Option<Spanned<String>>,
    trigger: Spanned<String>,
    goal: Spanned<String>,
}

struct Loader<'a> {
    text: &'a str,
    agents: BTreeSet<String>,
    errors: Vec<ScenarioError>,
}

impl Loader<'_> {
    fn position(&self, offset: usize) -> (usize, usize) {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
        (line, column)
    }

    fn schema<T>(&mut self, at: &Spanned<T>, message: impl Into<String>) {
        let (line, column) = self.position(at.span().start);
        self.errors.push(ScenarioError::Schema {
            line,
            column,
            message: message.into(),
        });
    }

    fn agent_ref(&mut self, s: &Spanned<String>) -> bool {
        if self.agents.contains(s.get_ref()) {
            return true;
        }
        let (line, column) = self.position(s.span().start);
        self.errors.push(ScenarioError::UnknownAgentReference {
            line,
            column,
            agent: s.get_ref().clone(),
        });
        false
    }

    /// Parses a formula string and checks the agents it mentions.
    fn formula(&mut self, s: &Spanned<String>) -> Option<Formula> {
        match parse_formula(s.get_ref()) {
            Ok(f) => {
                let unknown: Vec<String> = f
                    .agents()
                    .into_iter()
                    .filter(|a| !self.agents.contains(a))
                    .collect();
                if unknown.is_empty() {
                    return Some(f);
                }
                for agent in unknown {
                    let offset = s.get_ref().find(&agent).unwrap_or(0);
                    let (line, column) = self.position(s.span().start + 1 + offset);
                    self.errors.push(ScenarioError::UnknownAgentReference {
                        line,
                        column,
                        agent,
                    });
                }
                None
            }
            Err(e) => {
                // Formula strings are single-line basic strings: the text
                // starts one byte after the opening quote.
                let (line, column) = self.position(s.span().start + 1);
                self.errors.push(ScenarioError::FormulaSyntax {
                    line: line + e.line - 1,
                    column: if e.line == 1 {
                        column + e.column - 1
                    } else {
                        e.column
                    },
                    message: e.to_string(),
                });
                None
            }
        }
    }

    /// A formula that must not contain free variables other than `allowed`.
    fn closed(&mut self, s: &Spanned<String>, allowed: &[&str], what: &str) -> Option<Formula> {
        let f = self.formula(s)?;
        let extra: Vec<String> = free_vars(&f)
            .into_iter()
            .filter(|v| !allowed.contains(&v.as_str()))
            .collect();
        if extra.is_empty() {
            Some(f)
        } else {
            self.schema(
                s,
                format!("{what} has free variables: ?{}", extra.join(", ?")),
            );
            None
        }
    }
}

/// Parses and builds a world, reporting every problem found.
pub fn load_scenario(text: &str) -> Result<World, ScenarioErrors> {
    let doc: Doc = match toml::from_str(text) {
        Ok(d) => d,
        Err(e) => {
            let loader = Loader {
                text,
                agents: BTreeSet::new(),
                errors: Vec::new(),
            };
            let (line, column) = loader.position(e.span().map_or(0, |s| s.start));
            return Err(ScenarioErrors(vec![ScenarioError::Schema {
                line,
                column,
                message: e.message().to_string(),
            }]));
        }
    };

    let mut l = Loader {
        text,
        agents: doc.agent.iter().map(|a| a.id.get_ref().clone()).collect(),
        errors: Vec::new(),
    };

    if *doc.schema.get_ref() != SCENARIO_SCHEMA {
        l.schema(
            &doc.schema,
            format!("unsupported schema {}", doc.schema.get_ref()),
        );
    }
    if doc.agent.len() != 2 || l.agents.len() != 2 {
        let (line, column) = (1, 1);
        l.errors.push(ScenarioError::Schema {
            line,
            column,
            message: format!(
                "expected exactly 2 distinct agents, found {}",
                l.agents.len()
            ),
        });
    }
    let mode = match &doc.ccg_mode {
        None => CcgMode::CollectiveAcceptance,
        Some(m) => CcgMode::parse(m.get_ref()).unwrap_or_else(|| {
            l.schema(m, format!("unknown ccg_mode `{}`", m.get_ref()));
            CcgMode::CollectiveAcceptance
        }),
    };
    let mut order: Vec<String> = doc.agent.iter().map(|a| a.id.get_ref().clone()).collect();
    if let Some(init) = &doc.initiator {
        if l.agent_ref(init) {
            order.retain(|a| a != init.get_ref());
            order.insert(0, init.get_ref().clone());
        }
    }
    let task = doc
        .task
        .as_ref()
        .and_then(|t| l.closed(t, &[SELF_VAR], "task"));
    let nesting = doc.nesting_depth.unwrap_or(DEFAULT_MAX_NESTING);

    let mut agents = Vec::new();
    for a in &doc.agent {
        let id = a.id.get_ref().clone();
        let mut state = AgentState::with_nesting(id.clone(), nesting);
        for r in &a.rep {
            let descriptors: Vec<Formula> = r
                .descriptors
                .iter()
                .filter_map(|d| l.closed(d, &[SELF_VAR], "descriptor"))
                .collect();
            if state.rep(r.id.get_ref()).is_some() {
                l.schema(
                    &r.id,
                    format!("duplicate representation `{}`", r.id.get_ref()),
                );
                continue;
            }
            state.reps.push(MentalRepresentation::new(
                r.id.get_ref().clone(),
                descriptors,
                r.anchor.clone(),
            ));
        }
        for b in &a.beliefs {
            if let Some(f) = l.closed(b, &[], "belief") {
                if let Err(e) = state.assert_in_place(&f) {
                    l.schema(b, e.to_string());
                }
            }
        }
        let mut meta = Vec::new();
        for i in &a.intentions {
            let Some(f) = l.closed(i, &[], "intention") else {
                continue;
            };
            if let Some((speaker, addressee, rep)) = refer_triple(&f) {
                if speaker != id || addressee == id || !l.agents.contains(&addressee) {
                    l.schema(
                        i,
                        "a refer intention must go from its agent to the other agent",
                    );
                    continue;
                }
                if state.rep(&rep).is_none() {
                    l.schema(i, format!("`{id}` has no representation `{rep}`"));
                    continue;
                }
                let fact = Formula::int(id.clone(), refer_intention(&id, &addressee, &rep));
                if let Err(e) = state.assert_in_place(&fact) {
                    l.schema(i, e.to_string());
                }
                let (g1, g2) = meta_goals(&id, &addressee, &rep);
                meta.push(g1);
                meta.push(g2);
            } else {
                state.agenda.push(f, Origin::Task);
            }
        }
        for g in meta {
            state.agenda.push(g, Origin::Task);
        }
        agents.push(state);
    }

    let mut reactions = Vec::new();
    for r in &doc.reaction {
        let agent = match &r.agent {
            Some(a) if l.agent_ref(a) => Some(a.get_ref().clone()),
            Some(_) => continue,
            None => None,
        };
        let (Some(trigger), Some(goal)) = (l.formula(&r.trigger), l.formula(&r.goal)) else {
            continue;
        };
        if !matches!(trigger, Formula::Done(..)) {
            l.schema(&r.trigger, "a reaction trigger must be a Done(..) pattern");
            continue;
        }
        let bound = free_vars(&trigger);
        if let Some(v) = free_vars(&goal).into_iter().find(|v| !bound.contains(v)) {
            l.schema(&r.goal, format!("?{v} is not bound by the trigger"));
            continue;
        }
        reactions.push(ReactionRule {
            agent,
            trigger,
            goal,
        });
    }

    if !l.errors.is_empty() {
        l.errors.sort_by_key(|e| e.line());
        return Err(ScenarioErrors(l.errors));
    }

    agents.sort_by_key(|a| order.iter().position(|o| *o == a.id));
    let mut world = World::new(&doc.name, &doc.context, agents);
    world.set_mode(mode);
    world.max_turns = doc.max_turns.unwrap_or(DEFAULT_MAX_TURNS);
    world.truth_critical = doc.truth_critical.into_iter().collect();
    world.task = task;
    world.reactions = reactions;
    Ok(world)
}

/// All problems in a document; empty when it loads.
pub fn validate_scenario(text: &str) -> Vec<ScenarioError> {
    match load_scenario(text) {
        Ok(_) => Vec::new(),
        Err(ScenarioErrors(es)) => es,
    }
}

fn refer_triple(f: &Formula) -> Option<(String, String, String)> {
    match f {
        Formula::Atom(p, args) if p == "refer" && args.len() == 3 => {
            let c = |t: &Term| t.as_const().map(str::to_string);
            Some((c(&args[0])?, c(&args[1])?, c(&args[2])?))
        }
        _ => None,
    }
}
