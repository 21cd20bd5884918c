//! Random two-agent scenarios and the trace properties checked over them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use collacc::acts::{ActType, DialogAct};
use collacc::logic::{normalize, ActExpr, Formula, Term};
use collacc::mental::refered_by;
use collacc::sim::{load_scenario, CcgMode, World};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FUZZ_CASES: u64 = 500;

struct Object {
    kind: &'static str,
    name: String,
    old_name: Option<String>,
    near: bool,
}

impl Object {
    fn templates(&self) -> Vec<String> {
        let mut out = vec![format!("{}(?self)", self.kind)];
        out.push(format!("name(?self) = {}", self.name));
        if let Some(old) = &self.old_name {
            out.push(format!("name(?self) = {old}"));
        }
        if self.near {
            out.push("near(?self, station)".to_string());
        }
        out
    }
}

fn subset(rng: &mut impl Rng, pool: &[String]) -> Vec<String> {
    let n = rng.random_range(1..=pool.len());
    let mut out: Vec<String> = pool.choose_multiple(rng, n).cloned().collect();
    out.sort_by_key(|d| pool.iter().position(|p| p == d));
    out
}

fn quote_list(items: &[String]) -> String {
    let q: Vec<String> = items.iter().map(|s| format!("{s:?}")).collect();
    format!("[{}]", q.join(", "))
}

fn on(template: &str, id: &str) -> String {
    template.replace("?self", id)
}

/// A random collective-acceptance scenario as TOML text.
pub fn scenario(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = ["cafe", "park", "shop", "bar"];
    let objects: Vec<Object> = (0..rng.random_range(2..=4))
        .map(|k| Object {
            kind: kinds.choose(&mut rng).unwrap(),
            name: format!("n{k}"),
            old_name: rng.random_bool(0.5).then(|| format!("old{k}")),
            near: rng.random_bool(0.5),
        })
        .collect();

    let mut out = String::new();
    writeln!(out, "schema = 1").unwrap();
    writeln!(out, "name = \"fuzz{seed}\"").unwrap();
    writeln!(out, "context = \"ctx\"").unwrap();
    writeln!(out, "max_turns = 16").unwrap();
    writeln!(out, "nesting_depth = {}", rng.random_range(2..=3)).unwrap();
    writeln!(out, "initiator = \"tom\"").unwrap();
    if rng.random_bool(0.4) {
        writeln!(out, "truth_critical = [\"name\"]").unwrap();
    }
    let task = rng.random_bool(0.5);
    if task {
        writeln!(out, "task = \"meetAt(?self)\"").unwrap();
    }

    // Tom's reps and beliefs, including what he takes Laura to believe.
    let n_tom = rng.random_range(1..=objects.len().min(3));
    let tom_objects: Vec<usize> =
        rand::seq::index::sample(&mut rng, objects.len(), n_tom).into_vec();
    let mut tom_beliefs = Vec::new();
    let mut tom_reps = Vec::new();
    for (k, &o) in tom_objects.iter().enumerate() {
        let id = format!("t{k}");
        let ds = subset(&mut rng, &objects[o].templates());
        let mut named = false;
        for d in &ds {
            let fact = on(d, &id);
            let is_name = d.starts_with("name(");
            if is_name && named {
                continue;
            }
            let is_old = objects[o]
                .old_name
                .as_ref()
                .is_some_and(|n| d.ends_with(n.as_str()));
            match rng.random_range(0..10) {
                0..=3 if !is_old => tom_beliefs.push(format!("MB(tom, laura, {fact})")),
                0..=6 => tom_beliefs.push(format!("Bel(laura, {fact})")),
                _ => continue,
            }
            named |= is_name;
        }
        tom_reps.push((id, objects[o].kind_anchor(o), ds));
    }
    let mut tom_intentions = Vec::new();
    if task {
        tom_intentions.push("exists ?p . MB(tom, laura, meetAt(?p))".to_string());
    }
    tom_intentions.push("refer(tom, laura, t0)".to_string());
    if tom_reps.len() > 1 && rng.random_bool(0.3) {
        tom_intentions.push("refer(tom, laura, t1)".to_string());
    }

    // Laura's reps and her own beliefs about them.
    let n_laura = rng.random_range(1..=objects.len());
    let laura_objects: Vec<usize> =
        rand::seq::index::sample(&mut rng, objects.len(), n_laura).into_vec();
    let mut laura_beliefs = Vec::new();
    let mut laura_reps = Vec::new();
    for (k, &o) in laura_objects.iter().enumerate() {
        let id = format!("u{k}");
        let ds = subset(&mut rng, &objects[o].templates());
        for d in &ds {
            let is_old = objects[o]
                .old_name
                .as_ref()
                .is_some_and(|n| d.ends_with(n.as_str()));
            if is_old {
                continue;
            }
            let fact = on(d, &id);
            match rng.random_range(0..10) {
                0..=3 => laura_beliefs.push(format!("MB(laura, tom, {fact})")),
                4..=5 => laura_beliefs.push(fact),
                _ => {}
            }
        }
        laura_reps.push((id, objects[o].kind_anchor(o), ds));
    }
    let mut laura_intentions = Vec::new();
    if rng.random_bool(0.25) {
        laura_intentions.push("refer(laura, tom, u0)".to_string());
    }

    for (id, beliefs, intentions, reps) in [
        ("tom", &tom_beliefs, &tom_intentions, &tom_reps),
        ("laura", &laura_beliefs, &laura_intentions, &laura_reps),
    ] {
        writeln!(out, "\n[[agent]]\nid = \"{id}\"").unwrap();
        writeln!(out, "beliefs = {}", quote_list(beliefs)).unwrap();
        writeln!(out, "intentions = {}", quote_list(intentions)).unwrap();
        for (rid, anchor, ds) in reps.iter() {
            writeln!(
                out,
                "\n[[agent.rep]]\nid = \"{rid}\"\nanchor = \"{anchor}\""
            )
            .unwrap();
            writeln!(out, "descriptors = {}", quote_list(ds)).unwrap();
        }
    }
    out
}

impl Object {
    fn kind_anchor(&self, index: usize) -> String {
        format!("{}{index}", self.kind)
    }
}

pub fn load(seed: u64) -> World {
    let text = scenario(seed);
    load_scenario(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"))
}

fn acts(world: &World) -> Vec<(usize, DialogAct)> {
    world
        .trace
        .events
        .iter()
        .filter_map(|e| e.act.clone().map(|a| (e.turn, a)))
        .collect()
}

/// Content a referring act proposes.
fn proposed(act: &DialogAct) -> Option<Formula> {
    match act.act_type {
        ActType::Propose | ActType::Refer => Some(normalize(&act.content())),
        _ => None,
    }
}

fn has_prop_of(f: &Formula, proposer: &str) -> bool {
    match f {
        Formula::Done(a, _) => act_has_prop(a, proposer),
        Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => has_prop_of(g, proposer),
        Formula::And(v) | Formula::Or(v) => v.iter().any(|g| has_prop_of(g, proposer)),
        _ => false,
    }
}

fn act_has_prop(a: &ActExpr, proposer: &str) -> bool {
    match a {
        ActExpr::Atomic { act, actor, .. } => act == "prop" && *actor == Term::constant(proposer),
        ActExpr::Seq(l, r) | ActExpr::Choice(l, r) => {
            act_has_prop(l, proposer) || act_has_prop(r, proposer)
        }
    }
}

fn has_inequality(f: &Formula) -> bool {
    match f {
        Formula::Not(g) => matches!(**g, Formula::Equals(..)) || has_inequality(g),
        Formula::Exists(_, g) | Formula::Forall(_, g) => has_inequality(g),
        Formula::And(v) | Formula::Or(v) => v.iter().any(has_inequality),
        _ => false,
    }
}

/// Whether `reply` discharges the obligation to answer `content` proposed
/// by `proposer`.
pub fn answers(reply: &DialogAct, proposer: &str, content: &Formula) -> bool {
    if reply.addressee != proposer {
        return false;
    }
    let got = normalize(&reply.content());
    match reply.act_type {
        ActType::AcceptAct => got == *content,
        ActType::Propose => got != *content,
        ActType::Request => got != *content && has_prop_of(&got, proposer) && has_inequality(&got),
        _ => false,
    }
}

/// Every proposal is answered by the addressee's next act, on the turn that
/// follows it, unless the run ended first. Proposals queue in arrival order.
pub fn check_obligations(world: &World) -> Result<usize, String> {
    let mut pending: BTreeMap<String, VecDeque<(usize, String, Formula)>> = BTreeMap::new();
    let mut seen = 0;
    let last_turn = world.trace.turns;
    for (turn, act) in acts(world) {
        if let Some(queue) = pending.get_mut(&act.actor) {
            if let Some((t, proposer, content)) = queue.pop_front() {
                if !answers(&act, &proposer, &content) {
                    return Err(format!(
                        "turn {turn}: {act} does not answer {proposer}'s proposal of turn {t}"
                    ));
                }
            }
        }
        if let Some(content) = proposed(&act) {
            seen += 1;
            pending
                .entry(act.addressee.clone())
                .or_default()
                .push_back((turn, act.actor.clone(), content));
        }
    }
    for (agent, queue) in &pending {
        if let Some((t, _, content)) = queue.front() {
            if *t < last_turn {
                return Err(format!(
                    "{agent} never answered the proposal {content} of turn {t}"
                ));
            }
        }
    }
    Ok(seen)
}

/// Description of referential content, else the content itself.
fn pact_key(content: &Formula) -> Formula {
    match refered_by(content) {
        Some((d, _)) => Formula::atom("referedBy", vec![d.clone()]),
        None => content.clone(),
    }
}

/// In collective-acceptance mode each final state holds a pact exactly for
/// the proposal and acceptance pairs of the trace, up to the referent.
pub fn check_pacts(world: &World) -> Result<usize, String> {
    let mut proposals: BTreeSet<(String, String, Formula)> = BTreeSet::new();
    let mut formed: BTreeSet<(String, String, Formula)> = BTreeSet::new();
    for (_, act) in acts(world) {
        if let Some(c) = proposed(&act) {
            proposals.insert((act.actor.clone(), act.addressee.clone(), c));
        }
        if act.act_type == ActType::AcceptAct {
            let c = normalize(&act.content());
            if proposals.contains(&(act.addressee.clone(), act.actor.clone(), c.clone())) {
                formed.insert((act.addressee.clone(), act.actor.clone(), c));
            }
        }
    }
    let mut expected: BTreeSet<(String, String, Formula)> = BTreeSet::new();
    for (proposer, accepter, c) in &formed {
        expected.insert((proposer.clone(), accepter.clone(), pact_key(c)));
        expected.insert((accepter.clone(), proposer.clone(), pact_key(c)));
    }
    let mut actual: BTreeSet<(String, String, Formula)> = BTreeSet::new();
    for agent in &world.agents {
        for pact in agent.acceptances.iter() {
            actual.insert((
                agent.id.clone(),
                pact.counterpart.clone(),
                pact_key(&pact.content),
            ));
        }
    }
    if world.mode == CcgMode::MutualBelief && actual.is_empty() {
        return Ok(formed.len());
    }
    if expected == actual {
        Ok(formed.len())
    } else {
        Err(format!("pacts {actual:?}, trace pairs {expected:?}"))
    }
}
