//! The acceptance criteria, each run against an oracle that shares no code
//! with the component under test. `run` drives them for both the CLI's
//! `selftest` and the `acceptance` integration test.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::formula::{eval_bounded, eval_over_universe, Formula, Term};
use crate::hfset::{universe, HfSet};
use crate::kp::{self, AxiomInstance, EmissionResult, InductionEmission, OmegaCode};
use crate::ordinal::{godel_pair, godel_unpair, ord_add, ord_cmp, ord_mul, pair_nat, Ordinal};
use crate::ordset::{delta, interleave, project, OrdSet, Side};
use crate::otm::library::{godel_text, library_program};
use crate::otm::{run_program, DEFAULT_FUEL};
use crate::proofcalc::{
    check_proof, extract, instance, realize_axiom, ExtractionEnv, Proof, ProofCheck, Schema, Subst,
};
use crate::realizability::{
    canonical_delta0_realizer, canonical_realizer, check, CheckContext, CheckVerdict, Realizer,
};
use crate::recognizer::{
    chain_package, oracle_for, test_recognizer, CandidatePool, RecognitionVerdict, Recognizer,
};
use crate::setcode::{decode, derived_code, encode, SetCode};

/// Seed of every randomized corpus; fixed so runs are reproducible.
pub const SEED: u64 = 0x5eed_2026;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{mark}] {:>2}. {} ({:.2}s of {}s): {}",
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

/// What a criterion body reports: failures found (empty means pass) and a
/// summary of what was covered.
struct Tally {
    failures: Vec<String>,
    summary: String,
}

impl Tally {
    fn new() -> Self {
        Tally {
            failures: Vec::new(),
            summary: String::new(),
        }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg());
        }
    }

    fn done(mut self, summary: impl Into<String>) -> Self {
        self.summary = summary.into();
        self
    }
}

type Body = fn() -> Tally;

const CRITERIA: [(&str, u64, Body); 12] = [
    (
        "ordinal arithmetic vs coefficient triples",
        10,
        ordinal_arithmetic,
    ),
    ("pairing bijectivity", 1, pairing_bijectivity),
    ("interleave/project roundtrip", 5, interleave_roundtrip),
    ("set-code roundtrip", 60, setcode_roundtrip),
    ("bounded evaluator vs brute force", 60, evaluator_agreement),
    ("truth lemma, executable direction", 120, truth_lemma),
    ("recognizer delta law and chains", 30, recognizer_laws),
    ("KP emission suite", 600, kp_suite),
    ("epsilon-induction recursion", 300, induction_suite),
    ("intuitionistic closure", 300, proof_suite),
    ("non-contradiction", 300, non_contradiction),
    ("resource monotonicity", 300, monotonicity),
];

/// Runs the criteria numbered in `only` (all when empty), in order.
pub fn run(only: &[usize]) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c))
        .filter(|(id, _)| only.is_empty() || only.contains(id))
        .map(|(id, &(name, secs, body))| run_one(id, name, Duration::from_secs(secs), body))
        .collect()
}

fn run_one(id: usize, name: &'static str, budget: Duration, body: Body) -> CriterionResult {
    let start = Instant::now();
    let tally = body();
    let elapsed = start.elapsed();
    if std::env::var_os("RREALIZE_VERBOSE").is_some() {
        for f in &tally.failures {
            eprintln!("  criterion {id}: {f}");
        }
    }
    let mut detail = tally.summary;
    if !tally.failures.is_empty() {
        detail = format!(
            "{} failure(s), first: {}; {detail}",
            tally.failures.len(),
            tally.failures[0]
        );
    }
    let in_time = elapsed <= budget;
    if !in_time {
        detail = format!("over budget; {detail}");
    }
    CriterionResult {
        id,
        name,
        passed: tally.failures.is_empty() && in_time,
        detail,
        elapsed,
        budget,
    }
}

fn h(t: &str) -> HfSet {
    t.parse().expect("well-formed set literal")
}

fn f(t: &str) -> Formula {
    crate::formula::parse_formula(t).expect("well-formed formula")
}

// ---------------------------------------------------------------------------
// 1. Ordinal arithmetic

/// Ordinals below omega^5 as coefficient vectors indexed by exponent; the
/// arithmetic is written directly from the definitions on such sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Poly([u64; 5]);

impl Poly {
    fn lead(&self) -> Option<usize> {
        (0..5).rev().find(|&k| self.0[k] != 0)
    }

    fn add(&self, other: &Poly) -> Poly {
        let Some(l) = other.lead() else { return *self };
        let mut out = [0; 5];
        out[(l + 1)..].copy_from_slice(&self.0[(l + 1)..]);
        out[l] = self.0[l] + other.0[l];
        out[..l].copy_from_slice(&other.0[..l]);
        Poly(out)
    }

    fn mul(&self, other: &Poly) -> Poly {
        let Some(a) = self.lead() else {
            return Poly([0; 5]);
        };
        let mut acc = Poly([0; 5]);
        for k in (0..5).rev() {
            let n = other.0[k];
            if n == 0 {
                continue;
            }
            let piece = if k == 0 {
                let mut p = *self;
                p.0[a] *= n;
                p
            } else {
                let mut p = [0; 5];
                p[a + k] = n;
                Poly(p)
            };
            acc = acc.add(&piece);
        }
        acc
    }

    fn cmp(&self, other: &Poly) -> std::cmp::Ordering {
        self.0.iter().rev().cmp(other.0.iter().rev())
    }

    fn to_ordinal(self) -> Ordinal {
        let text: Vec<String> = (0..5)
            .rev()
            .filter(|&k| self.0[k] != 0)
            .map(|k| match k {
                0 => self.0[0].to_string(),
                _ => format!("w^{k}*{}", self.0[k]),
            })
            .collect();
        if text.is_empty() {
            return Ordinal::Fin(0);
        }
        text.join(" + ").parse().expect("polynomial text parses")
    }
}

fn ordinal_arithmetic() -> Tally {
    let mut t = Tally::new();
    let mut polys = Vec::new();
    for a in 0..=4 {
        for b in 0..=4 {
            for c in 0..=4 {
                polys.push(Poly([c, b, a, 0, 0]));
            }
        }
    }
    let ords: Vec<Ordinal> = polys.iter().map(|p| p.to_ordinal()).collect();
    let mut n = 0;
    for (p, x) in polys.iter().zip(&ords) {
        for (q, y) in polys.iter().zip(&ords) {
            n += 1;
            t.expect(ord_add(x, y) == p.add(q).to_ordinal(), || {
                format!("{x} + {y}")
            });
            t.expect(ord_mul(x, y) == p.mul(q).to_ordinal(), || {
                format!("{x} * {y}")
            });
            t.expect(ord_cmp(x, y) == p.cmp(q), || format!("cmp({x}, {y})"));
        }
    }
    t.done(format!("{n} pairs below w^3, coefficients <= 4"))
}

// ---------------------------------------------------------------------------
// 2. Pairing

fn pairing_bijectivity() -> Tally {
    let mut t = Tally::new();
    // The enumeration order itself is the oracle: by maximum, then first,
    // then second component.
    let mut pairs: Vec<(u64, u64)> = (0..100)
        .flat_map(|a| (0..100).map(move |b| (a, b)))
        .collect();
    pairs.sort_by_key(|&(a, b)| (a.max(b), a, b));
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let c = godel_pair(&Ordinal::Fin(a), &Ordinal::Fin(b)).expect("finite pairs code");
        t.expect(c == Ordinal::Fin(i as u64), || {
            format!("pair({a}, {b}) = {c}, expected {i}")
        });
        t.expect(
            godel_unpair(&c).ok() == Some((Ordinal::Fin(a), Ordinal::Fin(b))),
            || format!("unpair {c}"),
        );
    }
    for c in 0..1000u64 {
        let (a, b) = godel_unpair(&Ordinal::Fin(c)).expect("finite codes unpair");
        t.expect(godel_pair(&a, &b).ok() == Some(Ordinal::Fin(c)), || {
            format!("pair(unpair {c})")
        });
    }
    t.done("10000 pairs, 1000 codes, order-monotone")
}

// ---------------------------------------------------------------------------
// 3. Interleave / project

/// Membership in `a (+) b` straight from the definition: `lambda + 2n` for
/// `lambda + n` in `a`, `lambda + 2n + 1` for `lambda + n` in `b`.
fn interleave_member(a: &OrdSet, b: &OrdSet, o: &Ordinal) -> bool {
    let (lam, k) = o.split_limit();
    let half = Ordinal::limit_plus(&lam, k / 2);
    if k % 2 == 0 {
        a.contains(&half)
    } else {
        b.contains(&half)
    }
}

fn limit_elements(rng: &mut StdRng) -> OrdSet {
    let n = rng.gen_range(0..6);
    (0..n)
        .map(|_| {
            let k = rng.gen_range(0..=4u64);
            let m = rng.gen_range(0..8u64);
            Ordinal::limit_plus(&ord_mul(&Ordinal::omega(), &Ordinal::Fin(k)), m)
        })
        .collect()
}

fn interleave_roundtrip() -> Tally {
    let mut t = Tally::new();
    let subsets: Vec<OrdSet> = (0u32..256)
        .map(|m| OrdSet::from_nats((0..8).filter(|i| m & (1 << i) != 0)))
        .collect();
    for a in &subsets {
        t.expect(
            interleave(&project(a, Side::Even), &project(a, Side::Odd)) == *a,
            || format!("split {a}"),
        );
        for b in &subsets {
            let z = interleave(a, b);
            if project(&z, Side::Even) != *a || project(&z, Side::Odd) != *b {
                t.fail(format!("project({a} (+) {b})"));
            }
            for i in 0..16u64 {
                let o = Ordinal::Fin(i);
                if z.contains(&o) != interleave_member(a, b, &o) {
                    t.fail(format!("{i} in {a} (+) {b}"));
                }
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(SEED);
    for _ in 0..500 {
        let (a, b) = (limit_elements(&mut rng), limit_elements(&mut rng));
        let z = interleave(&a, &b);
        t.expect(
            project(&z, Side::Even) == a && project(&z, Side::Odd) == b,
            || format!("project({a} (+) {b})"),
        );
        t.expect(z.iter().all(|o| interleave_member(&a, &b, o)), || {
            format!("stray element in {a} (+) {b}")
        });
        t.expect(z.len() == a.len() + b.len(), || {
            format!("size of {a} (+) {b}")
        });
    }
    t.done("65536 finite pairs, 500 with limits up to w*4")
}

// ---------------------------------------------------------------------------
// 4. Set codes

/// Root members of a code, read straight off the pair list: `i` with
/// `pair(i, 0)` present.
fn root_members(c: &SetCode) -> Vec<u64> {
    let n = c
        .domain_size
        .as_finite()
        .expect("hereditarily finite codes");
    (0..n)
        .filter(|&i| c.code.contains(&Ordinal::Fin(pair_nat(i, 0))))
        .collect()
}

fn setcode_roundtrip() -> Tally {
    let mut t = Tally::new();
    let small = universe(3);
    let mut derived = 0;
    for x in &small {
        let c = encode(x);
        t.expect(decode(&c).ok().as_ref() == Some(x), || {
            format!("decode(encode {x})")
        });
        let n = c.domain_size.as_finite().expect("finite domain");
        let tc = x.tc_with_self();
        t.expect(n as usize == tc.len(), || format!("domain of {x}"));
        let mut seen = BTreeSet::new();
        for i in 0..n {
            derived += 1;
            match derived_code(&c, &Ordinal::Fin(i)).and_then(|d| decode(&d)) {
                Ok(s) => {
                    t.expect(tc.contains(&s), || {
                        format!("index {i} of {x} decodes outside tc")
                    });
                    seen.insert(s);
                }
                Err(e) => t.fail(format!("derive {i} of {x}: {e}")),
            }
        }
        t.expect(seen.len() == tc.len(), || {
            format!("derived codes of {x} are not a bijection")
        });
        let members: BTreeSet<HfSet> = root_members(&c)
            .into_iter()
            .filter_map(|i| {
                derived_code(&c, &Ordinal::Fin(i))
                    .and_then(|d| decode(&d))
                    .ok()
            })
            .collect();
        t.expect(members == x.members().cloned().collect(), || {
            format!("members of {x}")
        });
    }
    let mut rng = StdRng::seed_from_u64(SEED);
    for _ in 0..1000 {
        let x = HfSet::from_members(small.iter().filter(|_| rng.gen_bool(0.5)).cloned());
        t.expect(decode(&encode(&x)).ok() == Some(x.clone()), || {
            format!("decode(encode {x})")
        });
    }
    t.done(format!(
        "{} sets of rank <= 3, {derived} derived codes, 1000 rank-4 samples",
        small.len()
    ))
}

// ---------------------------------------------------------------------------
// 5, 6. Bounded formulas

/// Random bounded sentences over constants from `consts`.
pub struct Delta0Gen {
    rng: StdRng,
    consts: Vec<HfSet>,
    fresh: usize,
}

impl Delta0Gen {
    pub fn new(seed: u64, consts: Vec<HfSet>) -> Self {
        Delta0Gen {
            rng: StdRng::seed_from_u64(seed),
            consts,
            fresh: 0,
        }
    }

    fn term(&mut self, scope: &[String]) -> Term {
        if !scope.is_empty() && self.rng.gen_bool(0.7) {
            Term::Var(scope.choose(&mut self.rng).expect("nonempty").clone())
        } else {
            Term::Const(
                self.consts
                    .choose(&mut self.rng)
                    .expect("constants")
                    .clone(),
            )
        }
    }

    fn formula(&mut self, depth: usize, scope: &mut Vec<String>) -> Formula {
        let pick = if depth == 0 {
            self.rng.gen_range(0..2)
        } else {
            self.rng.gen_range(0..9)
        };
        match pick {
            0 => Formula::Member(self.term(scope), self.term(scope)),
            1 => Formula::Equal(self.term(scope), self.term(scope)),
            2 => Formula::and(
                self.formula(depth - 1, scope),
                self.formula(depth - 1, scope),
            ),
            3 => Formula::or(
                self.formula(depth - 1, scope),
                self.formula(depth - 1, scope),
            ),
            4 => Formula::implies(
                self.formula(depth - 1, scope),
                self.formula(depth - 1, scope),
            ),
            5 => Formula::not(self.formula(depth - 1, scope)),
            6 => Formula::iff(
                self.formula(depth - 1, scope),
                self.formula(depth - 1, scope),
            ),
            k => {
                let bound = self.term(scope);
                let v = format!("v{}", self.fresh);
                self.fresh += 1;
                scope.push(v.clone());
                let body = self.formula(depth - 1, scope);
                scope.pop();
                if k == 7 {
                    Formula::forall_in(&v, bound, body)
                } else {
                    Formula::exists_in(&v, bound, body)
                }
            }
        }
    }

    pub fn sentence(&mut self, max_depth: usize) -> Formula {
        let d = self.rng.gen_range(1..=max_depth);
        self.formula(d, &mut Vec::new())
    }
}

fn evaluator_agreement() -> Tally {
    let mut t = Tally::new();
    let u = universe(3);
    let mut gen = Delta0Gen::new(SEED, u.clone());
    let mut trues = 0;
    for _ in 0..600 {
        let s = gen.sentence(4);
        let fast = eval_bounded(&s, &BTreeMap::new(), DEFAULT_FUEL);
        let slow = eval_over_universe(&s, &u, &BTreeMap::new());
        match (fast, slow) {
            (Ok(a), Ok(b)) => {
                trues += usize::from(b);
                t.expect(a == b, || format!("`{s}`: bounded {a}, brute force {b}"));
            }
            (a, b) => t.fail(format!("`{s}`: {a:?} / {b:?}")),
        }
    }
    t.done(format!(
        "600 sentences over rank <= 3 constants, {trues} true"
    ))
}

/// Realizers a false sentence might be credited with by a careless checker:
/// every shape, plus the programs the canonical construction would use.
fn spurious_candidates(s: &Formula) -> Vec<Realizer> {
    let mut out = vec![
        Realizer::Empty,
        Realizer::pair(Realizer::Empty, Realizer::Empty),
        Realizer::choice(0, Realizer::Empty),
        Realizer::choice(1, Realizer::Empty),
        Realizer::p_empty(),
    ];
    match s {
        Formula::ForAllIn(..) => out.push(Realizer::lib("bt_all", godel_text(&s.to_string()))),
        Formula::Implies(_, b) => out.push(Realizer::lib("bt_imp", godel_text(&b.to_string()))),
        Formula::Not(_) => out.push(Realizer::lib(
            "bt_imp",
            godel_text(&Formula::falsum().to_string()),
        )),
        _ => {}
    }
    out
}

/// True and false bounded sentences from the shared generator.
fn delta0_corpus(n_true: usize, n_false: usize) -> (Vec<Formula>, Vec<Formula>) {
    let u = universe(2);
    let mut gen = Delta0Gen::new(SEED ^ 6, u.clone());
    let (mut yes, mut no) = (Vec::new(), Vec::new());
    while yes.len() < n_true || no.len() < n_false {
        let s = gen.sentence(3);
        if eval_over_universe(&s, &u, &BTreeMap::new()).expect("sentences evaluate") {
            if yes.len() < n_true {
                yes.push(s);
            }
        } else if no.len() < n_false {
            no.push(s);
        }
    }
    (yes, no)
}

fn truth_lemma() -> Tally {
    let mut t = Tally::new();
    let ctx = CheckContext::with_rank(2);
    let (yes, no) = delta0_corpus(300, 300);
    for s in &yes {
        match canonical_delta0_realizer(s, &BTreeMap::new()) {
            Ok(r) => {
                let v = check(&r, s, &ctx);
                t.expect(v.is_realized(), || format!("`{s}`: {v}"));
            }
            Err(e) => t.fail(format!("`{s}`: {e}")),
        }
    }
    let mut tried = 0;
    for s in &no {
        t.expect(
            canonical_delta0_realizer(s, &BTreeMap::new()).is_err(),
            || format!("false `{s}` got a canonical realizer"),
        );
        for r in spurious_candidates(s) {
            tried += 1;
            let v = check(&r, s, &ctx);
            t.expect(v.is_refuted(), || format!("false `{s}` with {r}: {v}"));
        }
    }
    t.done(format!(
        "300 true sentences realized; {tried} candidates for 300 false ones refuted"
    ))
}

// ---------------------------------------------------------------------------
// 7. Recognizers

fn recognizer_laws() -> Tally {
    let mut t = Tally::new();
    let fuel = 100_000;
    // Micro machines compare the positions below the first limit, so the
    // pool stays at the scale of codes of hereditarily finite sets.
    let sets: Vec<OrdSet> = [
        "{}",
        "{0}",
        "{1}",
        "{2}",
        "{0, 1}",
        "{3}",
        "{1, 4}",
        "{0, 2, 5}",
        "{6, 7}",
        "{0, 1, 2, 3, 9}",
    ]
    .iter()
    .map(|s| s.parse().expect("set literal"))
    .collect();
    let pool: CandidatePool = sets.iter().cloned().collect();
    let releq = library_program("releq").expect("library program");
    let rel = OrdSet::new();
    for c in &sets {
        let r = Recognizer::eq_const(c.clone());
        let v = test_recognizer(&r, &pool, None, fuel);
        t.expect(v == RecognitionVerdict::Recognizes(c.clone()), || {
            format!("EQ-constant({c}): {v}")
        });
        for x in &sets {
            let bit = run_program(&r.program, x, c, fuel)
                .ok()
                .and_then(|r| r.accepted());
            t.expect(bit == Some(delta(c, x) == 1), || {
                format!("EQ-constant({c}) on {x}: {bit:?}")
            });
            let micro = run_program(
                &Recognizer::eq_section(c.clone()).program,
                &oracle_for(Some(&rel), x),
                c,
                fuel,
            );
            let mac = run_program(&releq, &oracle_for(Some(&rel), x), c, fuel);
            let (a, b) = (
                micro.ok().and_then(|r| r.accepted()),
                mac.ok().and_then(|r| r.accepted()),
            );
            t.expect(a.is_some() && a == b, || {
                format!("micro/macro section on {c}, {x}: {a:?} vs {b:?}")
            });
        }
    }
    let mut chains = 0;
    for x in &sets[..6] {
        for y in &sets[..6] {
            let links = [
                (Recognizer::eq_section(x.clone()), x.clone()),
                (Recognizer::eq_section(y.clone()), y.clone()),
            ];
            let base = OrdSet::new();
            match chain_package(&links, Some(&base)) {
                Ok((composite, z)) => {
                    chains += 1;
                    t.expect(project(&z, Side::Even) == *x, || {
                        format!("chain {x} <= {y}: project {z}")
                    });
                    let p = CandidatePool::with_mutants(&z, 7);
                    t.expect(p.len() >= 8, || format!("chain pool of {p:?}"));
                    let v = test_recognizer(&composite, &p, Some(&base), fuel);
                    t.expect(v == RecognitionVerdict::Recognizes(z.clone()), || {
                        format!("chain {x} <= {y}: {v}")
                    });
                }
                Err(e) => t.fail(format!("chain {x} <= {y}: {e}")),
            }
        }
    }
    t.done(format!(
        "{} EQ-constant recognizers over a pool of {}; {chains} two-link chains",
        sets.len(),
        pool.len()
    ))
}

// ---------------------------------------------------------------------------
// 8. KP emissions

/// Rank of the universe emitted realizers are checked over.
const CHECK_RANK: usize = 2;

/// An emission with what its witness must decode to.
struct Emitted {
    result: EmissionResult,
    expected: Option<HfSet>,
}

/// Sound emission: realized, every witness recognized uniquely within its
/// mutation pool, and the coded witness equal to the oracle's set.
fn audit_emission(t: &mut Tally, e: &Emitted) {
    let r = &e.result;
    let ctx = r.context(CHECK_RANK, DEFAULT_FUEL);
    let v = r.check(&ctx);
    t.expect(v.is_realized(), || format!("{}: {v}", r.formula));
    for (w, wv) in r.witness_verdicts(DEFAULT_FUEL) {
        t.expect(
            wv == RecognitionVerdict::Recognizes(w.value.clone()),
            || format!("{} witness {}: {wv}", r.formula, w.description),
        );
    }
    if let Some(want) = &e.expected {
        let got = r.decoded();
        t.expect(got.as_ref() == Some(want), || {
            format!("{}: witness {got:?}, oracle {want}", r.formula)
        });
    }
}

fn pick<T: Clone>(rng: &mut StdRng, xs: &[T]) -> T {
    xs.choose(rng).expect("nonempty").clone()
}

/// Members of members, collected one by one.
fn union_oracle(x: &HfSet) -> HfSet {
    let mut out = HfSet::empty();
    for m in x.members() {
        for e in m.members() {
            out.insert(e.clone());
        }
    }
    out
}

fn holds(phi: &Formula, env: &[(&str, &HfSet)]) -> bool {
    let env: BTreeMap<String, HfSet> = env
        .iter()
        .map(|(k, v)| (k.to_string(), (*v).clone()))
        .collect();
    eval_over_universe(phi, &universe(CHECK_RANK), &env).expect("bounded formulas evaluate")
}

const SEPARATION_PHIS: [&str; 5] = [
    "x = {}",
    "x in {{}, {{}}}",
    "(ex w in x)(w = w)",
    "(all w in x)(w = {})",
    "not x in x and not x = {{}}",
];

const REPLACEMENT_PHIS: [&str; 4] = [
    "y = x",
    "y = {}",
    "(all w in y)(w in x) and (all w in x)(w in y)",
    "(x = {} and y = {{}}) or (not x = {} and y = {})",
];

/// Families for choice: every one of rank at most 3 whose members are
/// nonempty, topped up with small rank-4 families.
fn choice_families(rng: &mut StdRng) -> Vec<HfSet> {
    let mut out: Vec<HfSet> = universe(3)
        .into_iter()
        .filter(|x| x.members().all(|m| !m.is_empty()))
        .collect();
    let inner: Vec<HfSet> = universe(3).into_iter().filter(|m| !m.is_empty()).collect();
    while out.len() < 20 {
        let k = rng.gen_range(1..=3);
        let fam = HfSet::from_members((0..k).map(|_| pick(rng, &inner)));
        if !out.contains(&fam) {
            out.push(fam);
        }
    }
    out
}

/// Whether `c` is a choice function on `family`: Kuratowski pairs, one per
/// member, each second coordinate inside the first.
fn is_choice_function(c: &HfSet, family: &HfSet) -> bool {
    let mut covered = BTreeSet::new();
    for p in c.members() {
        let hit = family.members().find_map(|x| {
            x.members()
                .find(|e| HfSet::kpair(x, e) == *p)
                .map(|_| x.clone())
        });
        match hit {
            Some(x) if covered.insert(x.clone()) => {}
            _ => return false,
        }
    }
    covered.len() == family.len()
}

/// Every emission the KP criterion covers, with oracle expectations.
fn kp_corpus() -> Vec<(String, Result<Emitted, String>)> {
    let mut rng = StdRng::seed_from_u64(SEED ^ 8);
    let u3 = universe(3);
    let ctx = CheckContext::with_rank(CHECK_RANK);
    let mut out = Vec::new();
    let mut push = |label: String, e: Result<Emitted, String>| out.push((label, e));
    let basic = |ax: AxiomInstance, expected: Option<HfSet>| {
        kp::emit_basic(&ax)
            .map(|result| Emitted { result, expected })
            .map_err(|e| e.to_string())
    };
    for i in 0..20 {
        let x = pick(&mut rng, &u3);
        let y = if i % 4 == 0 {
            x.clone()
        } else {
            pick(&mut rng, &u3)
        };
        push(
            format!("extensionality {x} {y}"),
            basic(AxiomInstance::Extensionality(x.clone(), y.clone()), None),
        );
        let (a, b) = (pick(&mut rng, &u3), pick(&mut rng, &u3));
        let mut pair = HfSet::empty();
        pair.insert(a.clone());
        pair.insert(b.clone());
        push(
            format!("pairing {a} {b}"),
            basic(AxiomInstance::Pairing(a, b), Some(pair)),
        );
        let x = u3[i % u3.len()].clone();
        push(
            format!("union {x}"),
            basic(AxiomInstance::Union(x.clone()), Some(union_oracle(&x))),
        );
    }
    push(
        "empty set".into(),
        basic(AxiomInstance::EmptySet, Some(HfSet::empty())),
    );
    for (i, phi) in SEPARATION_PHIS.iter().enumerate() {
        for j in 0..4 {
            let domain = u3[(5 * i + 3 * j + 1) % u3.len()].clone();
            let phi = f(phi);
            let want = HfSet::from_members(
                domain
                    .members()
                    .filter(|m| holds(&phi, &[("x", m)]))
                    .cloned(),
            );
            let e = kp::emit_separation(&phi, &BTreeMap::new(), &domain);
            push(
                format!("separation {phi} over {domain}"),
                e.map(|result| Emitted {
                    result,
                    expected: Some(want),
                })
                .map_err(|e| e.to_string()),
            );
        }
    }
    for (i, phi) in REPLACEMENT_PHIS.iter().enumerate() {
        for j in 0..5 {
            let domain = u3[(7 * i + 3 * j + 2) % u3.len()].clone();
            let phi = f(phi);
            let u = universe(CHECK_RANK);
            let want = HfSet::from_members(domain.members().flat_map(|x| {
                u.iter()
                    .filter(|y| holds(&phi, &[("x", x), ("y", y)]))
                    .cloned()
                    .collect::<Vec<_>>()
            }));
            let e = kp::replacement_antecedent(&phi, &BTreeMap::new(), &domain, &ctx.universe)
                .ok_or_else(|| "no antecedent realizer".to_string())
                .and_then(|ante| {
                    kp::emit_replacement(&phi, &BTreeMap::new(), &domain, &ante, &ctx)
                        .map_err(|e| e.to_string())
                });
            push(
                format!("replacement {phi} over {domain}"),
                e.map(|r| Emitted {
                    result: r.result,
                    expected: Some(want),
                }),
            );
        }
    }
    for family in choice_families(&mut rng) {
        let e = kp::choice_premise(&family, &ctx.universe)
            .ok_or_else(|| "no premise realizer".to_string())
            .and_then(|p| kp::emit_choice(&family, &p, &ctx).map_err(|e| e.to_string()));
        push(
            format!("choice {family}"),
            e.map(|result| Emitted {
                result,
                expected: None,
            }),
        );
    }
    out
}

fn kp_suite() -> Tally {
    let mut t = Tally::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (label, e) in kp_corpus() {
        let axiom = label
            .split_whitespace()
            .next()
            .unwrap_or_default()
            .to_string();
        *counts.entry(axiom.clone()).or_default() += 1;
        match e {
            Ok(e) => {
                audit_emission(&mut t, &e);
                if axiom == "choice" {
                    let family: HfSet = label["choice ".len()..].parse().expect("family label");
                    let c = e.result.decoded();
                    t.expect(
                        c.as_ref().is_some_and(|c| is_choice_function(c, &family)),
                        || format!("{label}: {c:?} is no choice function"),
                    );
                }
            }
            Err(msg) => t.fail(format!("{label}: {msg}")),
        }
    }
    for (axiom, n) in &counts {
        if axiom != "empty" {
            t.expect(*n >= 20, || format!("only {n} {axiom} instances"));
        }
    }
    // Infinity: the code of omega is symbolic; its finite windows must
    // code the naturals and its relation must be the order.
    let (_, omega) = kp::emit_infinity();
    check_omega(&mut t, &omega);
    counts.insert("infinity (windows)".into(), 20);
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{k} {v}")).collect();
    t.done(summary.join(", "))
}

fn check_omega(t: &mut Tally, omega: &OmegaCode) {
    for n in 0..20u64 {
        let w = omega.window(n);
        t.expect(decode(&w).ok() == Some(HfSet::nat(n as usize)), || {
            format!("window {n} of omega")
        });
    }
    for i in 1..12u64 {
        for j in 1..12u64 {
            // Index 0 is omega itself; index k >= 1 is the natural k - 1.
            t.expect(omega.relates(i, j) == (i < j), || {
                format!("omega relates {i} {j}")
            });
        }
        t.expect(omega.relates(i, 0), || format!("{} in omega", i - 1));
    }
}

// ---------------------------------------------------------------------------
// 9. Epsilon-induction

const INDUCTION_PHIS: [&str; 3] = ["a = a", "(all w in a)(w = w)", "(all w in a)(not w = a)"];

/// Corruptions of row `i`: a changed step, a changed premise step, and a
/// changed lookup realizer.
fn corruptions(table: &[kp::TableEntry], i: usize) -> Vec<Vec<kp::TableEntry>> {
    let e = &table[i];
    let mut step = table.to_vec();
    step[i].step = crate::recognizer::mutants(&e.step, 1).remove(0);
    let mut premise = table.to_vec();
    premise[i].premise_step = crate::recognizer::mutants(&e.premise_step, 1).remove(0);
    let mut below = table.to_vec();
    below[i].below = if e.below == Realizer::p_empty() {
        Realizer::constant(&Realizer::choice(0, Realizer::Empty))
    } else {
        Realizer::p_empty()
    };
    vec![step, premise, below]
}

fn induction_suite() -> Tally {
    let mut t = Tally::new();
    let ctx = CheckContext::with_rank(CHECK_RANK);
    let (mut emissions, mut corrupted) = (0, 0);
    for phi in INDUCTION_PHIS.map(f) {
        let Some(premise) = kp::induction_premise(&phi, &BTreeMap::new()) else {
            t.fail(format!("no premise realizer for {phi}"));
            continue;
        };
        for y in universe(3) {
            let ind: InductionEmission =
                match kp::emit_induction(&phi, &BTreeMap::new(), &y, &premise, &ctx) {
                    Ok(ind) => ind,
                    Err(e) => {
                        t.fail(format!("{phi} at {y}: {e}"));
                        continue;
                    }
                };
            emissions += 1;
            t.expect(ind.table.len() == y.tc_with_self().len(), || {
                format!("{phi} at {y}: {} rows", ind.table.len())
            });
            let v = ind
                .result
                .check(&ind.result.context(CHECK_RANK, DEFAULT_FUEL));
            t.expect(v.is_realized(), || format!("{phi} at {y}: {v}"));
            let checker = ind.checker();
            let run = |pkg: OrdSet| checker.verdict(&CandidatePool::from_iter([pkg]), DEFAULT_FUEL);
            let honest = ind.package();
            t.expect(
                run(honest.clone()) == RecognitionVerdict::Recognizes(honest),
                || format!("{phi} at {y}: honest table rejected"),
            );
            for i in 0..ind.table.len() {
                for bad in corruptions(&ind.table, i) {
                    corrupted += 1;
                    let v = run(InductionEmission::package_of(&ind.result.realizer, &bad));
                    t.expect(v == RecognitionVerdict::RejectsAll, || {
                        format!("{phi} at {y}, row {i} corrupted: {v}")
                    });
                }
            }
        }
    }
    t.done(format!(
        "{emissions} emissions over rank <= 3, {corrupted} corrupted tables rejected"
    ))
}

// ---------------------------------------------------------------------------
// 10. Proofs

fn identity_proof(phi: &str) -> String {
    format!(
        "axiom P2 phi=\"{phi}\" psi=\"({phi}) -> ({phi})\" xi=\"{phi}\"\n\
         axiom P1 phi=\"{phi}\" psi=\"({phi}) -> ({phi})\"\n\
         mp 2 1\n\
         axiom P1 phi=\"{phi}\" psi=\"{phi}\"\n\
         mp 4 3\n"
    )
}

/// Bounded leaves the corpus is built from, true and false alike.
const LEAVES: [&str; 7] = [
    "{} = {}",
    "{} in {{}}",
    "{} in {}",
    "{{}} = {{}}",
    "(all w in {{}})(w = {})",
    "(ex w in {{}, {{}}})(not w = {})",
    "{} in {} or {} = {}",
];

/// Proofs paired with their conclusions.
pub fn proof_corpus() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for leaf in LEAVES {
        out.push((identity_proof(leaf), format!("({leaf}) -> ({leaf})")));
    }
    for b in ["{} in {}", "{{}} in {{}}", "(all w in {})(w in w)"] {
        out.push((
            format!("axiom Q3 t=\"{{}}\"\naxiom P1 phi=\"{{}} = {{}}\" psi=\"{b}\"\nmp 1 2\n"),
            format!("({b}) -> {{}} = {{}}"),
        ));
    }
    let and_chain = "axiom Q3 t=\"{}\"\naxiom P3 phi=\"{} = {}\" psi=\"{} = {}\"\nmp 1 2\nmp 1 3\n";
    out.push((and_chain.into(), "{} = {} and {} = {}".into()));
    out.push((
        format!("{and_chain}axiom P4 phi=\"{{}} = {{}}\" psi=\"{{}} = {{}}\"\nmp 4 5\n"),
        "{} = {}".into(),
    ));
    out.push((
        "axiom Q3 t=\"{{}}\"\naxiom P5 phi=\"{{}} = {{}}\" psi=\"{} in {}\"\nmp 1 2\n".into(),
        "{{}} = {{}} or {} in {}".into(),
    ));
    out.push((
        "axiom Q3 t=\"{{}}\"\naxiom P5 phi=\"{} in {}\" psi=\"{{}} = {{}}\" side=right\nmp 1 2\n"
            .into(),
        "{} in {} or {{}} = {{}}".into(),
    ));
    for (phi, psi, concl) in [
        (
            "{} = {}",
            "y in {{}}",
            "{} = {} -> (all x)(x in {{}} -> {} = {})",
        ),
        (
            "{} in {{}}",
            "y = y",
            "{} in {{}} -> (all x)(x = x -> {} in {{}})",
        ),
        ("{} = {}", "y = {}", "{} = {} -> (all x)(x = {} -> {} = {})"),
    ] {
        out.push((
            format!("axiom P1 phi=\"{phi}\" psi=\"{psi}\"\ngenimp 1 x y\n"),
            concl.into(),
        ));
    }
    out.push((
        "axiom Q3 t=\"{}\"\naxiom P1 phi=\"{} = {}\" psi=\"y in {{}}\"\ngenimp 2 x y\nmp 1 3\n"
            .into(),
        "(all x)(x in {{}} -> {} = {})".into(),
    ));
    for (text, concl) in [
        (
            "axiom P4 phi=\"{} = {}\" psi=\"y = y\"\nexelim 1 x y\n",
            "(ex x)({} = {} and x = x) -> {} = {}",
        ),
        (
            "axiom P4 phi=\"{{}} in {{{}}}\" psi=\"y in {{}}\"\nexelim 1 x y\n",
            "(ex x)({{}} in {{{}}} and x in {{}}) -> {{}} in {{{}}}",
        ),
        (
            "axiom P4 phi=\"y = y\" psi=\"{} = {}\" side=right\nexelim 1 x y\n",
            "(ex x)(x = x and {} = {}) -> {} = {}",
        ),
    ] {
        out.push((text.into(), concl.into()));
    }
    out
}

/// Five instances of every schema.
pub fn schema_corpus() -> Vec<(Schema, Subst)> {
    let var = |v: &str| Some(v.to_string());
    let c = |s: &str| Some(Term::Const(h(s)));
    let mut out = Vec::new();
    for schema in [
        Schema::P1,
        Schema::P2,
        Schema::P3,
        Schema::P4,
        Schema::P5,
        Schema::P6,
        Schema::P7,
        Schema::P8,
    ] {
        for i in 0..5 {
            let mut sub = Subst::formulas(LEAVES[i], LEAVES[(i + 1) % 7], LEAVES[(i + 2) % 7]);
            sub.right = i % 2 == 1;
            out.push((schema, sub));
        }
    }
    let quant = |phi: &str, t: Option<Term>| Subst {
        x: var("x"),
        t,
        ..Subst::formulas(phi, "", "")
    };
    for (phi, t) in [
        ("x = x", c("{}")),
        ("x = x", Some(Term::var("y"))),
        ("(ex w in x)(w = w) -> x = x", Some(Term::var("y"))),
        ("x in {} -> x = {}", c("{{}}")),
        ("(all w in x)(w = w)", c("{{}}")),
    ] {
        out.push((Schema::Q1, quant(phi, t)));
    }
    for (phi, t) in [
        ("x = {}", c("{}")),
        ("x = x", Some(Term::var("y"))),
        ("x in {{}}", c("{}")),
        ("(all w in x)(w in x)", c("{{}}")),
        ("x = {{}}", c("{{}}")),
    ] {
        out.push((Schema::Q2, quant(phi, t)));
    }
    for t in [
        Term::var("x"),
        Term::var("y"),
        Term::Const(h("{}")),
        Term::Const(h("{{}}")),
        Term::Const(h("{{},{{}}}")),
    ] {
        out.push((
            Schema::Q3,
            Subst {
                t: Some(t),
                ..Default::default()
            },
        ));
    }
    for phi in [
        "z in {{}}",
        "z = z",
        "{} in z",
        "(all w in z)(w = {})",
        "z = {}",
    ] {
        out.push((
            Schema::Q4,
            Subst {
                z: var("z"),
                s: Some(Term::var("a")),
                t: Some(Term::var("b")),
                ..Subst::formulas(phi, "", "")
            },
        ));
    }
    out
}

/// Realized formulas the proof criterion produces, for the cross-suite
/// checks.
fn proof_realized(t: &mut Tally) -> Vec<(Formula, Realizer)> {
    let mut out = Vec::new();
    for (text, concl) in proof_corpus() {
        let concl = f(&concl);
        let proof: Proof = match text.parse() {
            Ok(p) => p,
            Err(e) => {
                t.fail(format!("proof `{}`: {e}", text.replace('\n', "; ")));
                continue;
            }
        };
        match check_proof(&proof) {
            ProofCheck::Valid(fs) => t.expect(fs.last() == Some(&concl), || {
                format!("proof of {concl} concludes {:?}", fs.last())
            }),
            ProofCheck::Invalid { step, reason } => {
                t.fail(format!("proof of {concl}: step {step}: {reason}"));
                continue;
            }
        }
        let mut env = ExtractionEnv::new(CheckContext::with_rank(CHECK_RANK));
        match extract(&proof, &mut env) {
            Ok(r) => {
                let v = check(&r, &concl, &env.ctx);
                t.expect(v.is_realized(), || format!("extracted for {concl}: {v}"));
                out.push((concl, r));
            }
            Err(e) => t.fail(format!("extract {concl}: {e}")),
        }
    }
    let ctx = CheckContext::with_rank(CHECK_RANK);
    for (schema, sub) in schema_corpus() {
        match (instance(schema, &sub), realize_axiom(schema, &sub)) {
            (Ok(phi), Ok(r)) => {
                let v = check(&r, &phi, &ctx);
                t.expect(v.is_realized(), || format!("{schema} {sub}: {v}"));
                out.push((phi, r));
            }
            (a, b) => t.fail(format!("{schema} {sub}: {:?} / {:?}", a.err(), b.err())),
        }
    }
    out
}

fn proof_suite() -> Tally {
    let mut t = Tally::new();
    let realized = proof_realized(&mut t);
    let n = proof_corpus().len();
    t.expect(n >= 20, || format!("only {n} proofs"));
    let per_schema = schema_corpus().len() / 12;
    t.expect(per_schema >= 5, || {
        format!("{per_schema} instances per schema")
    });
    t.done(format!(
        "{n} proofs extracted, {per_schema} instances of each of 12 schemata; {} realizers",
        realized.len()
    ))
}

// ---------------------------------------------------------------------------
// 11. Non-contradiction

/// Every realized pair the suites produce.
fn realized_corpus(t: &mut Tally) -> Vec<(Formula, Realizer)> {
    let mut out = Vec::new();
    let (yes, _) = delta0_corpus(100, 0);
    for s in yes {
        if let Ok(r) = canonical_delta0_realizer(&s, &BTreeMap::new()) {
            out.push((s, r));
        }
    }
    for (_, e) in kp_corpus().into_iter().step_by(3) {
        if let Ok(e) = e {
            out.push((e.result.formula, e.result.realizer));
        }
    }
    out.extend(proof_realized(t));
    out
}

fn non_contradiction() -> Tally {
    let mut t = Tally::new();
    let mut setup = Tally::new();
    let corpus = realized_corpus(&mut setup);
    t.expect(setup.failures.is_empty(), || {
        format!("corpus: {}", setup.failures[0])
    });
    let formulas: BTreeSet<String> = corpus
        .iter()
        .map(|(phi, _)| phi.universal_closure().to_string())
        .collect();
    let mut attempts = 0;
    for (phi, r) in &corpus {
        let closed = phi.universal_closure();
        let neg = Formula::not(closed.clone());
        t.expect(!formulas.contains(&neg.to_string()), || {
            format!("both {closed} and its negation realized")
        });
        let mut ctx = CheckContext::with_rank(CHECK_RANK);
        ctx.add_antecedent(closed.clone(), r.clone());
        let mut candidates = spurious_candidates(&neg);
        candidates.extend(canonical_realizer(&neg).ok());
        candidates.extend(corpus.iter().take(40).map(|(_, r)| r.clone()));
        for c in candidates {
            attempts += 1;
            let v = check(&c, &neg, &ctx);
            t.expect(!v.is_realized(), || format!("{c} realizes {neg}"));
        }
    }
    t.done(format!(
        "{} realized formulas, {attempts} attempts at their negations",
        corpus.len()
    ))
}

// ---------------------------------------------------------------------------
// 12. Monotonicity

/// One checking problem at two resource levels over the same universe.
struct Scaled {
    formula: Formula,
    realizer: Realizer,
    small: CheckContext,
    large: CheckContext,
}

fn monotonicity_cases() -> Vec<Scaled> {
    let (yes, no) = delta0_corpus(18, 17);
    let mut pairs: Vec<(Formula, Realizer)> = Vec::new();
    for s in yes {
        let r = canonical_delta0_realizer(&s, &BTreeMap::new())
            .expect("true sentences have canonical realizers");
        pairs.push((s, r));
    }
    for (i, s) in no.into_iter().enumerate() {
        let cands = spurious_candidates(&s);
        pairs.push((s, cands[i % cands.len()].clone()));
    }
    let mut out: Vec<Scaled> = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (formula, realizer))| {
            let fuel = [40, 400, 4_000, DEFAULT_FUEL][i % 4];
            let small = CheckContext {
                fuel,
                ..CheckContext::with_rank(CHECK_RANK)
            };
            let mut large = CheckContext {
                fuel: fuel * 10,
                ..CheckContext::with_rank(CHECK_RANK)
            };
            large
                .pool
                .extend(universe(3).iter().map(|u| encode(u).code));
            Scaled {
                formula,
                realizer,
                small,
                large,
            }
        })
        .collect();
    // Emissions whose witnesses only the mutation pool and a full budget
    // reach: starved, they can at most stay unknown.
    for (i, (_, e)) in kp_corpus().into_iter().step_by(7).take(15).enumerate() {
        let Ok(e) = e else { continue };
        let large = e.result.context(CHECK_RANK, DEFAULT_FUEL);
        // Same universe, bare pool, a fraction of the fuel.
        let mut small = CheckContext::new(universe(CHECK_RANK), [20, 200, 2_000][i % 3]);
        for (f, r) in &e.result.antecedents {
            small.add_antecedent(f.clone(), r.clone());
        }
        out.push(Scaled {
            formula: e.result.formula,
            realizer: e.result.realizer,
            small,
            large,
        });
    }
    out
}

fn monotonicity() -> Tally {
    let mut t = Tally::new();
    let cases = monotonicity_cases();
    t.expect(cases.len() >= 50, || format!("only {} cases", cases.len()));
    let (mut resolved, mut unknown) = (0, 0);
    for c in &cases {
        let (a, b) = (
            check(&c.realizer, &c.formula, &c.small),
            check(&c.realizer, &c.formula, &c.large),
        );
        match (&a, &b) {
            (CheckVerdict::Unknown { .. }, CheckVerdict::Unknown { .. }) => unknown += 1,
            (CheckVerdict::Unknown { .. }, _) => resolved += 1,
            _ => t.expect(a.label() == b.label(), || {
                format!("{} with {}: {a} became {b}", c.formula, c.realizer)
            }),
        }
    }
    t.done(format!(
        "{} cases; {resolved} unknowns resolved, {unknown} stayed unknown, no flips",
        cases.len()
    ))
}
