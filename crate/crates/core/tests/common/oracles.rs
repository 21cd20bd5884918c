//! Independent reference implementations used to cross-check the engine.

use std::collections::BTreeSet;

use collacc::logic::{normalize, parse_term, ActExpr, Arg, Formula, Term};
use collacc::mental::{AgentState, MentalRepresentation};
use collacc::reference::{apply_description, choose_description, identify, Identification};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const SELF: &str = "tom";
pub const OTHER: &str = "laura";

// ------------------------------------------------------------ entailment

/// Ground terms of the entailment fragment.
pub const TERMS: [&str; 5] = ["a", "b", "c1", "n(a)", "n(b)"];

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

/// A literal of the fragment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Lit {
    Pos(&'static str, String),
    Neg(&'static str, String),
    Eq(String, String),
    NotEq(String, String),
}

impl Lit {
    pub fn formula(&self) -> Formula {
        match self {
            Lit::Pos(p, x) => Formula::atom(*p, vec![t(x)]),
            Lit::Neg(p, x) => Formula::not(Formula::atom(*p, vec![t(x)])),
            Lit::Eq(x, y) => Formula::eq(t(x), t(y)),
            Lit::NotEq(x, y) => Formula::not(Formula::eq(t(x), t(y))),
        }
    }
}

/// Modal prefix: a chain of `Bel` operators, optionally ending in `MB(i, j, .)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Wrap {
    pub chain: Vec<String>,
    pub mb: Option<(String, String)>,
}

pub fn wrappers() -> Vec<Wrap> {
    let w = |chain: &[&str], mb: Option<(&str, &str)>| Wrap {
        chain: chain.iter().map(|s| s.to_string()).collect(),
        mb: mb.map(|(i, j)| (i.to_string(), j.to_string())),
    };
    vec![
        w(&[], None),
        w(&[OTHER], None),
        w(&[SELF], None),
        w(&[], Some((SELF, OTHER))),
        w(&[], Some((OTHER, SELF))),
        w(&[OTHER, SELF], None),
        w(&[OTHER], Some((SELF, OTHER))),
    ]
}

impl Wrap {
    pub fn apply(&self, lit: &Lit) -> Formula {
        let mut f = lit.formula();
        if let Some((i, j)) = &self.mb {
            f = Formula::mb(i.clone(), j.clone(), f);
        }
        for a in self.chain.iter().rev() {
            f = Formula::bel(a.clone(), f);
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Tail {
    Lit(Lit),
    Mb(String, String, Lit),
}

type Piece = (Vec<String>, Tail);

fn canonical(mut chain: Vec<String>, tail: Tail) -> Piece {
    while chain.first().map(String::as_str) == Some(SELF) {
        chain.remove(0);
    }
    (chain, tail)
}

fn alternate(i: &str, j: &str, n: usize) -> Vec<String> {
    (0..n)
        .map(|k| if k % 2 == 0 { i } else { j }.to_string())
        .collect()
}

/// Closure over the fragment, built from the definition of mutual belief:
/// `MB(i,j,p)` unfolds into the alternating chains `Bel(i, p)`,
/// `Bel(i, Bel(j, p))`, ... with the residual mutual belief at the bottom.
#[derive(Debug, Default)]
pub struct EntailOracle {
    pieces: BTreeSet<Piece>,
}

impl EntailOracle {
    pub fn add(&mut self, w: &Wrap, lit: &Lit, max: usize) {
        match &w.mb {
            None => {
                self.pieces
                    .insert(canonical(w.chain.clone(), Tail::Lit(lit.clone())));
            }
            Some((i, j)) => {
                for k in 0..=max {
                    for m in 1..=k {
                        let mut c = w.chain.clone();
                        c.extend(alternate(i, j, m));
                        self.pieces.insert(canonical(c, Tail::Lit(lit.clone())));
                    }
                    let mut c = w.chain.clone();
                    c.extend(alternate(i, j, k));
                    let (a, b) = if k % 2 == 0 { (i, j) } else { (j, i) };
                    self.pieces
                        .insert(canonical(c, Tail::Mb(a.clone(), b.clone(), lit.clone())));
                }
            }
        }
    }

    fn has_top(&self, lit: &Lit) -> bool {
        self.pieces.contains(&(vec![], Tail::Lit(lit.clone())))
    }

    fn equal(&self, s: &str, u: &str) -> bool {
        self.has_top(&Lit::Eq(s.into(), u.into())) || self.has_top(&Lit::Eq(u.into(), s.into()))
    }

    /// Truth of a literal at the agent's own level.
    pub fn top(&self, lit: &Lit) -> bool {
        if self.has_top(lit) {
            return true;
        }
        match lit {
            Lit::Pos(p, x) => TERMS
                .iter()
                .any(|s| self.has_top(&Lit::Pos(p, s.to_string())) && (s == x || self.equal(s, x))),
            Lit::Eq(x, y) => x == y || self.equal(x, y),
            Lit::NotEq(x, y) => {
                let constant = |s: &str| !s.contains('(');
                (constant(x) && constant(y) && x != y)
                    || self.has_top(&Lit::NotEq(y.clone(), x.clone()))
            }
            Lit::Neg(..) => false,
        }
    }

    pub fn wrapped(&self, w: &Wrap, lit: &Lit) -> bool {
        let tail = match &w.mb {
            None => Tail::Lit(lit.clone()),
            Some((i, j)) => Tail::Mb(i.clone(), j.clone(), lit.clone()),
        };
        let (chain, tail) = canonical(w.chain.clone(), tail);
        match (&chain[..], &tail) {
            ([], Tail::Lit(l)) => self.top(l),
            _ => self.pieces.contains(&(chain, tail)),
        }
    }

    pub fn eval(&self, q: &Query) -> bool {
        match q {
            Query::Wrapped(w, l) => self.wrapped(w, l),
            Query::NotBelieved(l) => !self.top(l),
            Query::And(a, b) => self.eval(a) && self.eval(b),
            Query::Or(a, b) => self.eval(a) || self.eval(b),
            Query::SomeAtom(p) => TERMS.iter().any(|x| self.top(&Lit::Pos(p, x.to_string()))),
            Query::SomeOtherBelieves(p) => TERMS.iter().any(|x| {
                self.pieces.contains(&(
                    vec![OTHER.to_string()],
                    Tail::Lit(Lit::Pos(p, x.to_string())),
                ))
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Query {
    Wrapped(Wrap, Lit),
    /// `not Bel(self, l)`
    NotBelieved(Lit),
    And(Box<Query>, Box<Query>),
    Or(Box<Query>, Box<Query>),
    /// `exists ?v . p(?v)`
    SomeAtom(&'static str),
    /// `exists ?v . Bel(other, p(?v))`
    SomeOtherBelieves(&'static str),
}

impl Query {
    pub fn formula(&self) -> Formula {
        match self {
            Query::Wrapped(w, l) => w.apply(l),
            Query::NotBelieved(l) => Formula::not(Formula::bel(SELF, l.formula())),
            Query::And(a, b) => Formula::And(vec![a.formula(), b.formula()]),
            Query::Or(a, b) => Formula::Or(vec![a.formula(), b.formula()]),
            Query::SomeAtom(p) => Formula::exists("v", Formula::atom(*p, vec![Term::var("v")])),
            Query::SomeOtherBelieves(p) => Formula::exists(
                "v",
                Formula::bel(OTHER, Formula::atom(*p, vec![Term::var("v")])),
            ),
        }
    }
}

pub fn random_lit(rng: &mut impl Rng) -> Lit {
    let pred = *["p", "q"].choose(rng).unwrap();
    let term = TERMS.choose(rng).unwrap().to_string();
    let app = ["n(a)", "n(b)"].choose(rng).unwrap().to_string();
    let name = ["c1", "c2"].choose(rng).unwrap().to_string();
    match rng.random_range(0..10) {
        0..=3 => Lit::Pos(pred, term),
        4..=5 => Lit::Neg(pred, term),
        6..=8 => Lit::Eq(app, name),
        _ => Lit::NotEq(app, name),
    }
}

fn random_query_lit(rng: &mut impl Rng) -> Lit {
    match rng.random_range(0..12) {
        // Reversed orientation and pure constants exercise equality rules.
        0 => Lit::Eq(
            ["c1", "c2"].choose(rng).unwrap().to_string(),
            ["n(a)", "n(b)"].choose(rng).unwrap().to_string(),
        ),
        1 => Lit::NotEq(
            ["c1", "c2", "a"].choose(rng).unwrap().to_string(),
            ["c1", "c2", "n(a)"].choose(rng).unwrap().to_string(),
        ),
        _ => random_lit(rng),
    }
}

pub fn random_query(rng: &mut impl Rng, depth: u32) -> Query {
    let wraps = wrappers();
    let roll = rng.random_range(0..10);
    match roll {
        0 if depth > 0 => Query::And(
            Box::new(random_query(rng, depth - 1)),
            Box::new(random_query(rng, depth - 1)),
        ),
        1 if depth > 0 => Query::Or(
            Box::new(random_query(rng, depth - 1)),
            Box::new(random_query(rng, depth - 1)),
        ),
        2 => Query::NotBelieved(random_query_lit(rng)),
        3 => {
            let p = *["p", "q"].choose(rng).unwrap();
            if rng.random_bool(0.5) {
                Query::SomeAtom(p)
            } else {
                Query::SomeOtherBelieves(p)
            }
        }
        _ => Query::Wrapped(wraps.choose(rng).unwrap().clone(), random_query_lit(rng)),
    }
}

/// A random base of up to `max_facts` facts. Facts the engine refuses as
/// inconsistent are left out of both sides.
pub fn random_base(
    rng: &mut impl Rng,
    max_facts: usize,
    nesting: usize,
) -> (AgentState, EntailOracle) {
    let wraps = wrappers();
    let mut state = AgentState::with_nesting(SELF, nesting);
    let mut oracle = EntailOracle::default();
    let n = rng.random_range(0..=max_facts);
    for _ in 0..n {
        let w = wraps.choose(rng).unwrap().clone();
        let l = random_lit(rng);
        if let Ok(next) = state.assert_fact(&w.apply(&l)) {
            state = next;
            oracle.add(&w, &l, nesting);
        }
    }
    (state, oracle)
}

// --------------------------------------------------------- identification

/// Descriptor templates over `?self`.
pub const TEMPLATES: [&str; 8] = [
    "p(?self)",
    "q(?self)",
    "s(?self, a)",
    "s(a, ?self)",
    "n(?self) = c1",
    "n(?self) = c2",
    "not q(?self)",
    "col(?self) = red",
];

fn on(template: &str, id: &str) -> Formula {
    normalize(&collacc::logic::parse_formula(&template.replace("?self", id)).unwrap())
}

pub fn rep_with(id: &str, templates: &[&str]) -> MentalRepresentation {
    MentalRepresentation::new(
        id,
        templates
            .iter()
            .map(|d| collacc::logic::parse_formula(d).unwrap())
            .collect(),
        id,
    )
}

pub fn description(templates: &[&str]) -> Term {
    let body = templates
        .iter()
        .map(|d| d.replace("?self", "?x"))
        .collect::<Vec<_>>()
        .join(" and ");
    parse_term(&format!("iota ?x . ({body})")).unwrap()
}

/// A store of reps with random descriptors plus pacts in the query context
/// and in another one. Returns the state and, per rep, the templates used.
pub struct IdentifyCase {
    pub state: AgentState,
    pub reps: Vec<(String, Vec<&'static str>)>,
    /// Description templates and referent of each pact in the query context.
    pub pacts: Vec<(Vec<&'static str>, String)>,
    pub context: &'static str,
}

fn pick<'a>(rng: &mut impl Rng, pool: &[&'a str], lo: usize, hi: usize) -> Vec<&'a str> {
    let n = rng.random_range(lo..=hi.min(pool.len()));
    let mut out: Vec<&str> = pool.choose_multiple(rng, n).copied().collect();
    out.sort_by_key(|d| pool.iter().position(|p| p == d));
    out
}

pub fn random_identify_case(rng: &mut impl Rng) -> IdentifyCase {
    let context = "ctx";
    let mut state = AgentState::new(OTHER);
    let mut reps = Vec::new();
    for k in 0..rng.random_range(0..=6) {
        let id = format!("r{k}");
        let ds = pick(rng, &TEMPLATES, 0, 4);
        state.reps.push(rep_with(&id, &ds));
        reps.push((id, ds));
    }
    let mut pacts = Vec::new();
    for _ in 0..rng.random_range(0..=2) {
        if reps.is_empty() {
            break;
        }
        let referent = reps.choose(rng).unwrap().0.clone();
        let ds = pick(rng, &TEMPLATES, 1, 2);
        let ctx = if rng.random_bool(0.7) {
            context
        } else {
            "elsewhere"
        };
        let content = Formula::atom(
            "referedBy",
            vec![description(&ds), Term::constant(referent.clone())],
        );
        if let Ok(next) = state.accept(&content, SELF, ctx) {
            state = next;
            if ctx == context {
                pacts.push((ds, referent));
            }
        }
    }
    IdentifyCase {
        state,
        reps,
        pacts,
        context,
    }
}

/// Matches each rep by plain membership of every instantiated conjunct in
/// its own descriptor facts or the in-context pact facts.
pub fn identify_oracle(case: &IdentifyCase, query: &[&str]) -> Vec<String> {
    let mut shared: BTreeSet<Formula> = BTreeSet::new();
    for (ds, referent) in &case.pacts {
        for d in ds {
            shared.insert(on(d, referent));
        }
    }
    case.reps
        .iter()
        .filter(|(id, ds)| {
            query.iter().all(|q| {
                let want = on(q, id);
                shared.contains(&want) || ds.iter().any(|d| on(d, id) == want)
            })
        })
        .map(|(id, _)| id.clone())
        .collect()
}

pub fn identification_of(ids: Vec<String>) -> Identification {
    match ids.len() {
        0 => Identification::NoMatch,
        1 => Identification::Unique(ids[0].clone()),
        _ => Identification::Ambiguous(ids),
    }
}

pub fn check_identify(case: &IdentifyCase, query: &[&str]) -> Result<(), String> {
    let d = description(query);
    let got = identify(&case.state, &d, case.context);
    let want = identification_of(identify_oracle(case, query));
    if got == want {
        Ok(())
    } else {
        Err(format!(
            "{query:?} over {:?}: engine {got:?}, oracle {want:?}",
            case.reps
        ))
    }
}

// ------------------------------------------------------------- minimality

/// Checks `choose_description` against brute force: the chosen subset must
/// single out the target among the speaker's reps, counting only conjuncts
/// the speaker believes the addressee believes, and no smaller subset may.
pub fn check_minimal(rng: &mut impl Rng) -> Result<(), String> {
    let mut state = AgentState::new(SELF);
    let mut reps = Vec::new();
    for k in 0..rng.random_range(1..=5) {
        let id = format!("r{k}");
        let ds = pick(rng, &TEMPLATES, 1, 4);
        state.reps.push(rep_with(&id, &ds));
        reps.push((id, ds));
    }
    let mut told: BTreeSet<Formula> = BTreeSet::new();
    for (id, ds) in &reps {
        for d in ds {
            if rng.random_bool(0.6) {
                let fact = on(d, id);
                if let Ok(next) = state.assert_fact(&Formula::bel(OTHER, fact.clone())) {
                    state = next;
                    told.insert(fact);
                }
            }
        }
        // Beliefs about templates the rep does not carry must not matter
        // for other reps than the one they are about.
        if rng.random_bool(0.3) {
            let extra = on(TEMPLATES.choose(rng).unwrap(), id);
            if let Ok(next) = state.assert_fact(&Formula::bel(OTHER, extra.clone())) {
                state = next;
                told.insert(extra);
            }
        }
    }
    let (target, tds) = reps.choose(rng).unwrap().clone();
    let unique = |subset: &[&str]| {
        reps.iter()
            .filter(|(id, _)| subset.iter().all(|d| told.contains(&on(d, id))))
            .map(|(id, _)| id.as_str())
            .collect::<Vec<_>>()
            == [target.as_str()]
    };
    let mut best: Option<usize> = None;
    for mask in 1u32..(1 << tds.len()) {
        let subset: Vec<&str> = (0..tds.len())
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| tds[k])
            .collect();
        if unique(&subset) {
            best = Some(best.map_or(subset.len(), |b: usize| b.min(subset.len())));
        }
    }
    match (choose_description(&state, &target, OTHER, "ctx"), best) {
        (Err(_), None) => Ok(()),
        (Ok(d), Some(size)) => {
            let body = apply_description(&d, &target).unwrap();
            let chosen: Vec<Formula> = body.conjuncts();
            let subset: Vec<&str> = tds
                .iter()
                .copied()
                .filter(|t| chosen.contains(&on(t, &target)))
                .collect();
            if subset.len() != chosen.len() {
                return Err(format!("{d:?} uses descriptors outside {tds:?}"));
            }
            if !unique(&subset) {
                return Err(format!("{subset:?} does not single out {target}"));
            }
            if subset.len() != size {
                return Err(format!("{subset:?} is not minimal, {size} suffice"));
            }
            Ok(())
        }
        (got, want) => Err(format!(
            "engine {got:?}, oracle minimum {want:?} for {reps:?}"
        )),
    }
}

// ----------------------------------------------------------- substitution

/// Straightforward recursive substitution of a ground term for a free variable.
pub fn naive_substitute(f: &Formula, v: &str, by: &Term) -> Formula {
    let go = |g: &Formula| Box::new(naive_substitute(g, v, by));
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(p, ts) => {
            Formula::Atom(p.clone(), ts.iter().map(|x| naive_term(x, v, by)).collect())
        }
        Formula::Equals(a, b) => Formula::Equals(naive_term(a, v, by), naive_term(b, v, by)),
        Formula::Not(g) => Formula::Not(go(g)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| naive_substitute(g, v, by)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| naive_substitute(g, v, by)).collect()),
        Formula::Implies(a, b) => Formula::Implies(go(a), go(b)),
        Formula::Exists(x, _) | Formula::Forall(x, _) if x == v => f.clone(),
        Formula::Exists(x, g) => Formula::Exists(x.clone(), go(g)),
        Formula::Forall(x, g) => Formula::Forall(x.clone(), go(g)),
        Formula::Bel(a, g) => Formula::Bel(a.clone(), go(g)),
        Formula::Int(a, g) => Formula::Int(a.clone(), go(g)),
        Formula::MB(a, b, g) => Formula::MB(a.clone(), b.clone(), go(g)),
        Formula::CollInt(a, b, g) => Formula::CollInt(a.clone(), b.clone(), go(g)),
        Formula::CollAcc(a, b, g) => Formula::CollAcc(a.clone(), b.clone(), go(g)),
        Formula::Done(act, pre) => Formula::Done(Box::new(naive_act(act, v, by)), go(pre)),
        Formula::Possible(g) => Formula::Possible(go(g)),
    }
}

fn naive_term(x: &Term, v: &str, by: &Term) -> Term {
    match x {
        Term::Var(w) if w == v => by.clone(),
        Term::Var(_) | Term::Const(_) => x.clone(),
        Term::App(n, ts) => Term::App(n.clone(), ts.iter().map(|s| naive_term(s, v, by)).collect()),
        Term::Descr(w, _) if w == v => x.clone(),
        Term::Descr(w, body) => Term::Descr(w.clone(), Box::new(naive_substitute(body, v, by))),
    }
}

fn naive_act(a: &ActExpr, v: &str, by: &Term) -> ActExpr {
    match a {
        ActExpr::Atomic { act, actor, args } => ActExpr::Atomic {
            act: act.clone(),
            actor: naive_term(actor, v, by),
            args: args
                .iter()
                .map(|x| match x {
                    Arg::Term(s) => Arg::Term(naive_term(s, v, by)),
                    Arg::Formula(g) => Arg::Formula(naive_substitute(g, v, by)),
                })
                .collect(),
        },
        ActExpr::Seq(l, r) => {
            ActExpr::Seq(Box::new(naive_act(l, v, by)), Box::new(naive_act(r, v, by)))
        }
        ActExpr::Choice(l, r) => {
            ActExpr::Choice(Box::new(naive_act(l, v, by)), Box::new(naive_act(r, v, by)))
        }
    }
}
