//! Trace records and their line-oriented file format.
//!
//! ```text
//! # trace schema=1 scenario=<name> mode=<mode> context=<tag>
//! <index>\t<turn>\t<actor>\t<addressee>\t<actType>\t<payload>\t<digest>
//! # after <index> <agent> beliefs=.. pacts=.. goals=.. refused=.. belief-violations=.. acceptance-violations=.. cross-conflicts=..
//! # status <status> turns=<n>
//! # final <agent> digest=<digest>
//! # final <agent> <state or report line>
//! ```

use std::fmt;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::acts::DialogAct;
use crate::mental::AgentState;

pub const TRACE_SCHEMA: u32 = 1;

/// Act type written for an assertion an agent refused.
pub const REFUSED: &str = "refused";

/// First 16 hex digits of the SHA-256 of the lines, newline-terminated.
pub fn digest_lines<'a>(lines: impl IntoIterator<Item = &'a String>) -> String {
    let mut h = Sha256::new();
    for l in lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())[..16].to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSummary {
    pub agent: String,
    pub beliefs: usize,
    pub pacts: usize,
    pub goals: usize,
    pub refused: usize,
    pub belief_violations: usize,
    pub acceptance_violations: usize,
    pub cross_conflicts: usize,
}

impl AgentSummary {
    pub fn of(state: &AgentState) -> Self {
        let report = state.consistency_report();
        AgentSummary {
            agent: state.id.clone(),
            beliefs: state.beliefs.len(),
            pacts: state.acceptances.len(),
            goals: state.agenda.len(),
            refused: state.refusals.len(),
            belief_violations: report.belief_violations.len(),
            acceptance_violations: report.acceptance_violations.len(),
            cross_conflicts: report.cross_conflicts.len(),
        }
    }

    fn fields(&self) -> String {
        format!(
            "beliefs={} pacts={} goals={} refused={} belief-violations={} acceptance-violations={} cross-conflicts={}",
            self.beliefs,
            self.pacts,
            self.goals,
            self.refused,
            self.belief_violations,
            self.acceptance_violations,
            self.cross_conflicts
        )
    }
}

impl fmt::Display for AgentSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.agent, self.fields())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub index: usize,
    pub turn: usize,
    pub actor: String,
    /// `-` for refusals.
    pub addressee: String,
    pub act_type: String,
    pub payload: String,
    pub digest: String,
    /// The performed act; absent for refusals and for parsed traces.
    pub act: Option<DialogAct>,
    /// Both agents' summaries once the step that emitted the event ended.
    pub after: Vec<AgentSummary>,
}

impl Event {
    pub fn is_refusal(&self) -> bool {
        self.act_type == REFUSED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Both agendas empty and nothing left to perceive.
    Quiescent,
    /// Two idle turns in a row with goals left but nothing to perceive.
    Stalled,
    TurnLimit,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Quiescent => "quiescent",
            RunStatus::Stalled => "stalled",
            RunStatus::TurnLimit => "turn-limit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quiescent" => Some(RunStatus::Quiescent),
            "stalled" => Some(RunStatus::Stalled),
            "turn-limit" => Some(RunStatus::TurnLimit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalState {
    pub agent: String,
    pub digest: String,
    /// Canonical state lines followed by consistency-report lines.
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub scenario: String,
    pub mode: String,
    pub context: String,
    pub events: Vec<Event>,
    pub status: Option<RunStatus>,
    pub turns: usize,
    pub finals: Vec<FinalState>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

impl Trace {
    /// Acts only, refusals skipped.
    pub fn acts(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| !e.is_refusal())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# trace schema={TRACE_SCHEMA} scenario={} mode={} context={}",
            self.scenario, self.mode, self.context
        );
        for e in &self.events {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                e.index, e.turn, e.actor, e.addressee, e.act_type, e.payload, e.digest
            );
            for s in &e.after {
                let _ = writeln!(out, "# after {} {s}", e.index);
            }
        }
        if let Some(status) = self.status {
            let _ = writeln!(out, "# status {} turns={}", status.as_str(), self.turns);
        }
        for f in &self.finals {
            let _ = writeln!(out, "# final {} digest={}", f.agent, f.digest);
            for l in &f.lines {
                let _ = writeln!(out, "# final {} {l}", f.agent);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Trace, TraceError> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
        let err = |line: usize, message: String| TraceError { line, message };

        let (n, header) = lines.next().ok_or_else(|| err(1, "empty trace".into()))?;
        let rest = header
            .strip_prefix("# trace ")
            .ok_or_else(|| err(n, "missing `# trace` header".into()))?;
        let mut trace = Trace::default();
        let mut schema_seen = false;
        for kv in rest.split(' ') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| err(n, format!("malformed header field `{kv}`")))?;
            match k {
                "schema" => {
                    if v != TRACE_SCHEMA.to_string() {
                        return Err(err(n, format!("unsupported schema `{v}`")));
                    }
                    schema_seen = true;
                }
                "scenario" => trace.scenario = v.to_string(),
                "mode" => trace.mode = v.to_string(),
                "context" => trace.context = v.to_string(),
                _ => return Err(err(n, format!("unknown header field `{k}`"))),
            }
        }
        if !schema_seen {
            return Err(err(n, "header lacks schema".into()));
        }

        for (n, line) in lines {
            if let Some(rest) = line.strip_prefix("# after ") {
                let mut parts = rest.splitn(3, ' ');
                let index: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(n, "bad event index".into()))?;
                let agent = parts.next().ok_or_else(|| err(n, "missing agent".into()))?;
                let fields = parts.next().unwrap_or("");
                let event = trace
                    .events
                    .last_mut()
                    .filter(|e| e.index == index)
                    .ok_or_else(|| err(n, format!("summary for unknown event {index}")))?;
                event
                    .after
                    .push(parse_summary(agent, fields).map_err(|m| err(n, m))?);
            } else if let Some(rest) = line.strip_prefix("# status ") {
                let (status, turns) = rest
                    .split_once(' ')
                    .ok_or_else(|| err(n, "malformed status line".into()))?;
                trace.status = Some(
                    RunStatus::parse(status)
                        .ok_or_else(|| err(n, format!("unknown status `{status}`")))?,
                );
                trace.turns = turns
                    .strip_prefix("turns=")
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(n, "malformed turn count".into()))?;
            } else if let Some(rest) = line.strip_prefix("# final ") {
                let (agent, body) = rest
                    .split_once(' ')
                    .ok_or_else(|| err(n, "malformed final line".into()))?;
                if let Some(d) = body.strip_prefix("digest=") {
                    trace.finals.push(FinalState {
                        agent: agent.to_string(),
                        digest: d.to_string(),
                        lines: Vec::new(),
                    });
                } else {
                    let last = trace
                        .finals
                        .last_mut()
                        .filter(|f| f.agent == agent)
                        .ok_or_else(|| {
                            err(n, format!("final line for `{agent}` before its digest"))
                        })?;
                    last.lines.push(body.to_string());
                }
            } else if line.starts_with('#') || line.is_empty() {
                return Err(err(n, format!("unexpected line `{line}`")));
            } else {
                let f: Vec<&str> = line.split('\t').collect();
                if f.len() != 7 {
                    return Err(err(
                        n,
                        format!("expected 7 tab-separated fields, found {}", f.len()),
                    ));
                }
                let index: usize = f[0].parse().map_err(|_| err(n, "bad event index".into()))?;
                if index != trace.events.len() {
                    return Err(err(n, format!("event index {index} out of sequence")));
                }
                let turn: usize = f[1].parse().map_err(|_| err(n, "bad turn".into()))?;
                trace.events.push(Event {
                    index,
                    turn,
                    actor: f[2].to_string(),
                    addressee: f[3].to_string(),
                    act_type: f[4].to_string(),
                    payload: f[5].to_string(),
                    digest: f[6].to_string(),
                    act: None,
                    after: Vec::new(),
                });
            }
        }
        Ok(trace)
    }
}

fn parse_summary(agent: &str, fields: &str) -> Result<AgentSummary, String> {
    let mut s = AgentSummary {
        agent: agent.to_string(),
        beliefs: 0,
        pacts: 0,
        goals: 0,
        refused: 0,
        belief_violations: 0,
        acceptance_violations: 0,
        cross_conflicts: 0,
    };
    for kv in fields.split(' ').filter(|x| !x.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or(format!("malformed field `{kv}`"))?;
        let v: usize = v.parse().map_err(|_| format!("bad count in `{kv}`"))?;
        match k {
            "beliefs" => s.beliefs = v,
            "pacts" => s.pacts = v,
            "goals" => s.goals = v,
            "refused" => s.refused = v,
            "belief-violations" => s.belief_violations = v,
            "acceptance-violations" => s.acceptance_violations = v,
            "cross-conflicts" => s.cross_conflicts = v,
            _ => return Err(format!("unknown field `{k}`")),
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# trace schema=1 scenario=s mode=collective-acceptance context=c\n\
        0\t1\ttom\tlaura\tinform\tp\t0123456789abcdef\n\
        # after 0 tom beliefs=1 pacts=0 goals=0 refused=0 belief-violations=0 acceptance-violations=0 cross-conflicts=0\n\
        # after 0 laura beliefs=2 pacts=0 goals=0 refused=0 belief-violations=0 acceptance-violations=0 cross-conflicts=0\n\
        # status quiescent turns=2\n\
        # final tom digest=0123456789abcdef\n\
        # final tom belief p\n";

    #[test]
    fn round_trip() {
        let t = Trace::parse(SAMPLE).unwrap();
        assert_eq!(t.events.len(), 1);
        assert_eq!(t.events[0].after[1].beliefs, 2);
        assert_eq!(t.status, Some(RunStatus::Quiescent));
        assert_eq!(t.finals[0].lines, ["belief p"]);
        assert_eq!(t.to_text(), SAMPLE);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Trace::parse("").is_err());
        assert!(Trace::parse("# trace schema=2 scenario=s mode=m context=c\n").is_err());
        let bad = "# trace schema=1 scenario=s mode=m context=c\n1\t1\ta\tb\tinform\tp\td\n";
        assert_eq!(Trace::parse(bad).unwrap_err().line, 2);
        let short = "# trace schema=1 scenario=s mode=m context=c\n0\t1\ta\n";
        assert!(Trace::parse(short).is_err());
    }

    #[test]
    fn digest_is_sixteen_hex_digits() {
        let d = digest_lines(&["a".to_string()]);
        assert_eq!(d.len(), 16);
        assert!(d.chars().all(|c| c.is_ascii_hexdigit()));
    }
}
