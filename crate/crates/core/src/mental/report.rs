use std::fmt::Write as _;

use crate::logic::{render_formula, Formula};

use super::{conflicts, pact_pieces, self_conflicting, AgentState};

/// A belief that could not coexist with the base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefViolation {
    pub formula: Formula,
    pub conflict: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptanceViolation {
    pub context: String,
    pub first: Formula,
    pub second: Formula,
}

/// A pact whose content contradicts a belief. Expected, never an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossConflict {
    pub context: String,
    pub pact: Formula,
    pub belief: Formula,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    /// Refused assertions plus any contradiction found in the stored base.
    pub belief_violations: Vec<BeliefViolation>,
    pub acceptance_violations: Vec<AcceptanceViolation>,
    pub cross_conflicts: Vec<CrossConflict>,
}

impl Report {
    pub fn is_empty(&self) -> bool {
        self.belief_violations.is_empty()
            && self.acceptance_violations.is_empty()
            && self.cross_conflicts.is_empty()
    }

    /// One-line counts, as embedded after each trace event.
    pub fn summary(&self) -> String {
        format!(
            "belief-violations={} acceptance-violations={} cross-conflicts={}",
            self.belief_violations.len(),
            self.acceptance_violations.len(),
            self.cross_conflicts.len()
        )
    }

    /// Detail lines in a fixed order.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in &self.belief_violations {
            out.push(format!(
                "belief-violation {} | {}",
                render_formula(&v.formula),
                render_formula(&v.conflict)
            ));
        }
        for v in &self.acceptance_violations {
            out.push(format!(
                "acceptance-violation {} {} | {}",
                v.context,
                render_formula(&v.first),
                render_formula(&v.second)
            ));
        }
        for c in &self.cross_conflicts {
            let mut line = String::new();
            let _ = write!(
                line,
                "cross-conflict {} {} | {}",
                c.context,
                render_formula(&c.pact),
                render_formula(&c.belief)
            );
            out.push(line);
        }
        out
    }
}

pub(super) fn build(state: &AgentState) -> Report {
    let mut report = Report {
        belief_violations: state.refusals.clone(),
        ..Report::default()
    };

    let derived: Vec<&Formula> = state.beliefs.derived.iter().collect();
    for (k, a) in derived.iter().enumerate() {
        if self_conflicting(a) {
            report.belief_violations.push(BeliefViolation {
                formula: (*a).clone(),
                conflict: (*a).clone(),
            });
        }
        for b in &derived[k + 1..] {
            if conflicts(a, b) {
                report.belief_violations.push(BeliefViolation {
                    formula: (*a).clone(),
                    conflict: (*b).clone(),
                });
            }
        }
    }

    let pacts: Vec<_> = state.acceptances.iter().collect();
    for (k, p) in pacts.iter().enumerate() {
        let mine = pact_pieces(&state.id, &p.content);
        for q in pacts[k + 1..].iter().filter(|q| q.context == p.context) {
            let theirs = pact_pieces(&state.id, &q.content);
            if mine.iter().any(|a| theirs.iter().any(|b| conflicts(a, b))) {
                report.acceptance_violations.push(AcceptanceViolation {
                    context: p.context.clone(),
                    first: p.content.clone(),
                    second: q.content.clone(),
                });
            }
        }
        for belief in &derived {
            if mine.iter().any(|a| conflicts(a, belief)) {
                report.cross_conflicts.push(CrossConflict {
                    context: p.context.clone(),
                    pact: p.content.clone(),
                    belief: (*belief).clone(),
                });
            }
        }
    }
    report
}
