//! Bounded closure queries over a belief base.
//!
//! A query holds when it is reachable from the derived fact set under:
//! membership, conjunction and disjunction introduction, MB unfolding (already
//! folded into the derived set), one-step substitution of stored equalities
//! into atom arguments, introspection on the agent's own beliefs and
//! intentions, closed-world treatment of `Done`, unique names for constants
//! and descriptions, and witness search for existentials. Anything outside
//! that closure is not derived.

use std::collections::BTreeSet;

use crate::logic::{
    free_vars, match_formula, normalize, substitute_all, ActExpr, Arg, Bindings, Formula, Term,
};

use super::{pact_pieces, split, AcceptanceStore, IntentionAgenda, MentalRepresentation};

#[derive(Clone, Copy)]
pub(crate) struct View<'a> {
    pub self_id: &'a str,
    pub derived: &'a BTreeSet<Formula>,
    pub agenda: Option<&'a IntentionAgenda>,
    pub pacts: Option<&'a AcceptanceStore>,
    pub reps: &'a [MentalRepresentation],
    /// Closed-world answers about the agent's own attitudes. Off for views
    /// over pacts or descriptors alone, which say nothing about what the
    /// agent does not believe.
    pub introspective: bool,
}

impl<'a> View<'a> {
    /// `q` must be normalized.
    pub fn holds(&self, q: &Formula) -> bool {
        match q {
            Formula::True => true,
            Formula::False => false,
            Formula::And(v) => v.iter().all(|g| self.holds(g)),
            Formula::Or(v) => v.iter().any(|g| self.holds(g)),
            _ if self.derived.contains(q) => true,
            Formula::Implies(a, b) => {
                self.holds(b) || self.holds(&normalize(&Formula::Not(a.clone())))
            }
            Formula::Atom(p, args) if p == "Bref" && args.len() == 2 => {
                args[0].as_const() == Some(self.self_id) && self.knows_term(&args[1])
            }
            Formula::Atom(p, args) => self.atom_by_equality(p, args),
            Formula::Equals(s, t) => s == t || self.equal_fact(s, t),
            Formula::Not(g) => self.holds_negation(g),
            Formula::Bel(a, g) if a == self.self_id => self.holds(g),
            Formula::Bel(..) | Formula::MB(..) => {
                let pieces = split(self.self_id, q);
                !pieces.is_empty() && pieces.iter().all(|p| self.derived.contains(p))
            }
            Formula::Int(a, g) if a == self.self_id => self.agenda.is_some_and(|ag| ag.contains(g)),
            Formula::CollAcc(a, b, g) if a == self.self_id => self.pact_yields(b, g),
            Formula::Exists(x, body) => self.exists(x, body),
            Formula::Done(act, pre) => match &**act {
                ActExpr::Choice(l, r) => {
                    self.holds(&Formula::Done(l.clone(), pre.clone()))
                        || self.holds(&Formula::Done(r.clone(), pre.clone()))
                }
                _ => false,
            },
            _ => false,
        }
    }

    fn holds_negation(&self, g: &Formula) -> bool {
        match g {
            Formula::Equals(s, t) => {
                distinct(s, t)
                    || self
                        .derived
                        .contains(&Formula::Not(Box::new(Formula::Equals(
                            t.clone(),
                            s.clone(),
                        ))))
            }
            _ if !self.introspective => false,
            Formula::Bel(a, inner) if a == self.self_id => !self.holds(inner),
            Formula::Int(a, _) | Formula::CollAcc(a, _, _) if a == self.self_id => !self.holds(g),
            Formula::Done(_, pre) if **pre == Formula::True => !self.holds(g),
            _ => false,
        }
    }

    fn equal_fact(&self, s: &Term, t: &Term) -> bool {
        self.derived
            .contains(&Formula::Equals(s.clone(), t.clone()))
            || self
                .derived
                .contains(&Formula::Equals(t.clone(), s.clone()))
    }

    // P(t1..tn) holds when some stored P(s1..sn) has each si equal to ti,
    // syntactically or through one stored equality.
    fn atom_by_equality(&self, p: &str, args: &[Term]) -> bool {
        self.derived.iter().any(|f| match f {
            Formula::Atom(q, stored) if q == p && stored.len() == args.len() => stored
                .iter()
                .zip(args)
                .all(|(s, t)| s == t || self.equal_fact(s, t)),
            _ => false,
        })
    }

    fn knows_term(&self, t: &Term) -> bool {
        if let Term::Const(c) = t {
            if self.reps.iter().any(|r| r.id == *c) {
                return true;
            }
        }
        t.is_ground() && self.derived.iter().any(|f| mentions(f, t))
    }

    fn pact_yields(&self, counterpart: &str, g: &Formula) -> bool {
        let Some(store) = self.pacts else {
            return false;
        };
        store
            .iter()
            .filter(|p| p.counterpart == counterpart)
            .any(|p| {
                p.content == *g || {
                    let want = split(self.self_id, g);
                    let have = pact_pieces(self.self_id, &p.content);
                    !want.is_empty() && want.iter().all(|w| have.contains(w))
                }
            })
    }

    fn exists(&self, x: &str, body: &Formula) -> bool {
        let mut candidates: BTreeSet<Arg> = BTreeSet::new();
        let mut leaves = Vec::new();
        collect_leaves(body, x, &mut leaves);
        let pseudo: Vec<Formula> = self
            .pacts
            .map(|s| {
                s.iter()
                    .map(|p| {
                        Formula::CollAcc(
                            self.self_id.to_string(),
                            p.counterpart.clone(),
                            Box::new(p.content.clone()),
                        )
                    })
                    .collect()
            })
            .unwrap_or_default();
        for leaf in &leaves {
            for fact in self.derived.iter().chain(pseudo.iter()) {
                let mut b = Bindings::new();
                if match_formula(leaf, fact, &mut b) {
                    if let Some(v) = b.remove(x) {
                        candidates.insert(v);
                    }
                }
            }
        }
        for c in candidates {
            let mut b = Bindings::new();
            b.insert(x.to_string(), c);
            if self.holds(&normalize(&substitute_all(body, &b))) {
                return true;
            }
        }
        // The variable may only occur in parts of the body that are not needed.
        self.holds(body)
    }
}

/// Subformulas of `f` mentioning `x` that can be matched against facts.
fn collect_leaves(f: &Formula, x: &str, out: &mut Vec<Formula>) {
    if !free_vars(f).contains(x) {
        return;
    }
    match f {
        Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| collect_leaves(g, x, out)),
        Formula::Not(g) => collect_leaves(g, x, out),
        Formula::Implies(a, b) => {
            collect_leaves(a, x, out);
            collect_leaves(b, x, out);
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) if v != x => collect_leaves(g, x, out),
        Formula::Done(act, pre) => match &**act {
            ActExpr::Choice(l, r) => {
                collect_leaves(&Formula::Done(l.clone(), pre.clone()), x, out);
                collect_leaves(&Formula::Done(r.clone(), pre.clone()), x, out);
            }
            _ => out.push(f.clone()),
        },
        Formula::Exists(..) | Formula::Forall(..) => {}
        other => out.push(other.clone()),
    }
}

/// Unique names: distinct constants, and syntactically distinct descriptions.
pub(crate) fn distinct(s: &Term, t: &Term) -> bool {
    match (s, t) {
        (Term::Const(a), Term::Const(b)) => a != b,
        (Term::Descr(..), Term::Descr(..)) => s != t,
        _ => false,
    }
}

fn mentions(f: &Formula, t: &Term) -> bool {
    match f {
        Formula::True | Formula::False => false,
        Formula::Atom(_, args) => args.iter().any(|a| term_mentions(a, t)),
        Formula::Equals(a, b) => term_mentions(a, t) || term_mentions(b, t),
        Formula::Not(g)
        | Formula::Exists(_, g)
        | Formula::Forall(_, g)
        | Formula::Bel(_, g)
        | Formula::Int(_, g)
        | Formula::MB(_, _, g)
        | Formula::CollInt(_, _, g)
        | Formula::CollAcc(_, _, g)
        | Formula::Possible(g) => mentions(g, t),
        Formula::And(v) | Formula::Or(v) => v.iter().any(|g| mentions(g, t)),
        Formula::Implies(a, b) => mentions(a, t) || mentions(b, t),
        Formula::Done(a, p) => act_mentions(a, t) || mentions(p, t),
    }
}

fn term_mentions(s: &Term, t: &Term) -> bool {
    s == t
        || match s {
            Term::App(_, args) => args.iter().any(|a| term_mentions(a, t)),
            Term::Descr(_, body) => mentions(body, t),
            _ => false,
        }
}

fn act_mentions(a: &ActExpr, t: &Term) -> bool {
    match a {
        ActExpr::Atomic { actor, args, .. } => {
            term_mentions(actor, t)
                || args.iter().any(|x| match x {
                    Arg::Term(s) => term_mentions(s, t),
                    Arg::Formula(f) => mentions(f, t),
                })
        }
        ActExpr::Seq(l, r) | ActExpr::Choice(l, r) => act_mentions(l, t) || act_mentions(r, t),
    }
}
