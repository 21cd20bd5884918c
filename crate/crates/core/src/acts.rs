//! Communicative act models and their instantiation.
//!
//! Each model carries a feasibility precondition (FP) and a perlocutionary
//! effect (PE) as formula templates. Placeholders are `$i` (actor), `$j`
//! (addressee), `$p` (content formula), `$d` (description) and `$o`
//! (representation id).

use std::fmt;

use crate::logic::{
    normalize, normalize_act, normalize_term, parse_formula, print_formula, print_term,
    render_formula, ActExpr, Arg, Formula, Term,
};
use crate::mental::{refered_by, AgentState};
use crate::reference::{identify, Identification};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActError {
    #[error("unknown act type `{0}`")]
    UnknownActType(String),
    #[error("act `{act}` is not feasible: `{conjunct}` does not hold")]
    InfeasibleAct { act: String, conjunct: Formula },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActType {
    Inform,
    Propose,
    AcceptAct,
    Request,
    Refer,
}

impl ActType {
    pub const ALL: [ActType; 5] = [
        ActType::Inform,
        ActType::Propose,
        ActType::AcceptAct,
        ActType::Request,
        ActType::Refer,
    ];

    /// Name used in traces.
    pub fn name(self) -> &'static str {
        match self {
            ActType::Inform => "inform",
            ActType::Propose => "propose",
            ActType::AcceptAct => "accept",
            ActType::Request => "request",
            ActType::Refer => "refer",
        }
    }

    /// Action name inside `Done(..)` facts.
    pub fn done_name(self) -> &'static str {
        match self {
            ActType::Propose => "prop",
            other => other.name(),
        }
    }

    /// Position in the tie-break order; lower wins.
    pub fn rank(self) -> u8 {
        match self {
            ActType::AcceptAct => 0,
            ActType::Propose => 1,
            ActType::Request => 2,
            ActType::Refer => 3,
            ActType::Inform => 4,
        }
    }

    pub fn from_name(s: &str) -> Option<ActType> {
        match s {
            "inform" => Some(ActType::Inform),
            "propose" | "prop" => Some(ActType::Propose),
            "accept" | "acceptAct" => Some(ActType::AcceptAct),
            "request" => Some(ActType::Request),
            "refer" => Some(ActType::Refer),
            _ => None,
        }
    }
}

impl fmt::Display for ActType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    Content(Formula),
    Reference { description: Term, rep: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DialogAct {
    pub act_type: ActType,
    pub actor: String,
    pub addressee: String,
    pub payload: Payload,
}

impl DialogAct {
    pub fn new(act_type: ActType, actor: &str, addressee: &str, content: &Formula) -> Self {
        DialogAct {
            act_type,
            actor: actor.to_string(),
            addressee: addressee.to_string(),
            payload: Payload::Content(normalize(content)),
        }
    }

    pub fn inform(actor: &str, addressee: &str, content: &Formula) -> Self {
        Self::new(ActType::Inform, actor, addressee, content)
    }

    pub fn propose(actor: &str, addressee: &str, content: &Formula) -> Self {
        Self::new(ActType::Propose, actor, addressee, content)
    }

    pub fn accept(actor: &str, addressee: &str, content: &Formula) -> Self {
        Self::new(ActType::AcceptAct, actor, addressee, content)
    }

    pub fn request(actor: &str, addressee: &str, content: &Formula) -> Self {
        Self::new(ActType::Request, actor, addressee, content)
    }

    pub fn refer(actor: &str, addressee: &str, description: &Term, rep: &str) -> Self {
        let description = normalize_term(description);
        DialogAct {
            act_type: ActType::Refer,
            actor: actor.to_string(),
            addressee: addressee.to_string(),
            payload: Payload::Reference {
                description,
                rep: rep.to_string(),
            },
        }
    }

    /// The proposition carried: the content itself, or `referedBy(D, o)`.
    pub fn content(&self) -> Formula {
        match &self.payload {
            Payload::Content(f) => f.clone(),
            Payload::Reference { description, rep } => Formula::atom(
                "referedBy",
                vec![description.clone(), Term::constant(rep.clone())],
            ),
        }
    }

    pub fn action(&self) -> ActExpr {
        let mut args = vec![Arg::Term(Term::constant(self.addressee.clone()))];
        match &self.payload {
            Payload::Content(f) => args.push(Arg::Formula(f.clone())),
            Payload::Reference { description, rep } => {
                args.push(Arg::Term(description.clone()));
                args.push(Arg::Term(Term::constant(rep.clone())));
            }
        }
        normalize_act(&ActExpr::atomic(
            self.act_type.done_name(),
            self.actor.clone(),
            args,
        ))
    }

    /// `Done(..)` of this act.
    pub fn done(&self) -> Formula {
        normalize(&Formula::done(self.action()))
    }

    pub fn payload_text(&self) -> String {
        render_formula(&self.content())
    }

    /// Key for the deterministic tie-break between candidate acts.
    pub fn sort_key(&self) -> (u8, String) {
        (self.act_type.rank(), self.payload_text())
    }

    /// FP instantiated for this act.
    pub fn precondition(&self) -> Formula {
        model(self.act_type).fill(model(self.act_type).fp, self)
    }

    /// PE instantiated for this act.
    pub fn effect(&self) -> Formula {
        model(self.act_type).fill(model(self.act_type).pe, self)
    }
}

impl fmt::Display for DialogAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -> {} : {}({})",
            self.actor,
            self.addressee,
            self.act_type,
            self.payload_text()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActModel {
    pub act_type: ActType,
    pub params: &'static [&'static str],
    pub fp: &'static str,
    pub pe: &'static str,
}

static CATALOG: [ActModel; 5] = [
    ActModel {
        act_type: ActType::Inform,
        params: &["i", "j", "p"],
        fp: "Bel($i, $p) and not Bel($i, Bel($j, $p))",
        pe: "Bel($j, $p)",
    },
    ActModel {
        act_type: ActType::Propose,
        params: &["i", "j", "p"],
        fp: "not Done(prop($i, $j, $p))",
        pe: "Done(prop($i, $j, $p)) and Bel($j, Done(prop($i, $j, $p)))",
    },
    ActModel {
        act_type: ActType::AcceptAct,
        params: &["i", "j", "p"],
        fp: "Done(prop($j, $i, $p))",
        pe: "Done(accept($i, $j, $p)) and Bel($j, Done(accept($i, $j, $p)))",
    },
    ActModel {
        act_type: ActType::Request,
        params: &["i", "j", "p"],
        fp: "not Done(request($i, $j, $p))",
        pe: "Bel($j, Int($i, $p))",
    },
    ActModel {
        act_type: ActType::Refer,
        params: &["i", "j", "d", "o"],
        fp: "Int($i, refer($i, $j, $o)) and Bref($i, $o)",
        pe: "Bel($j, exists ?o . Int($i, refer($i, $j, ?o))) \
             and Int($j, Bref($j, $o)) \
             and Done(prop($i, $j, referedBy($d, $o))) \
             and Bel($j, Done(prop($i, $j, referedBy($d, $o))))",
    },
];

pub fn catalog() -> &'static [ActModel] {
    &CATALOG
}

pub fn act_model(name: &str) -> Result<&'static ActModel, ActError> {
    ActType::from_name(name)
        .map(model)
        .ok_or_else(|| ActError::UnknownActType(name.to_string()))
}

fn model(t: ActType) -> &'static ActModel {
    CATALOG
        .iter()
        .find(|m| m.act_type == t)
        .expect("every act type has a model")
}

impl ActModel {
    /// Template text with the act's parameters spliced in.
    pub fn instantiate(&self, template: &str, act: &DialogAct) -> String {
        let mut out = template
            .replace("$i", &act.actor)
            .replace("$j", &act.addressee);
        if let Payload::Reference { description, rep } = &act.payload {
            out = out
                .replace("$d", &print_term(description))
                .replace("$o", rep);
        }
        out.replace("$p", &format!("({})", print_formula(&act.content())))
    }

    fn fill(&self, template: &str, act: &DialogAct) -> Formula {
        let text = self.instantiate(template, act);
        normalize(&parse_formula(&text).unwrap_or_else(|e| panic!("template `{text}`: {e}")))
    }
}

/// FP holds in the actor's state; accepting a reference additionally needs
/// the description to single out one representation.
pub fn feasible(state: &AgentState, act: &DialogAct, context: &str) -> bool {
    unmet_precondition(state, act, context).is_none()
}

/// The first FP conjunct that does not hold, if any.
pub fn unmet_precondition(state: &AgentState, act: &DialogAct, context: &str) -> Option<Formula> {
    for c in act.precondition().conjuncts() {
        if !state.entails(&c) {
            return Some(c);
        }
    }
    if act.act_type == ActType::AcceptAct {
        if let Some((d @ Term::Descr(..), _)) = refered_by(&act.content()) {
            if !matches!(identify(state, d, context), Identification::Unique(_)) {
                return Some(Formula::atom(
                    "identified",
                    vec![Term::constant(act.actor.clone()), d.clone()],
                ));
            }
        }
    }
    None
}
