//! Realizers for the axioms of Kripke-Platek set theory, plus choice.
//!
//! Every emitter builds its witness directly from the instance, then hands
//! back the realizer together with the programs that must single that
//! witness out of a pool of near misses (construct, then verify).

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::formula::{parse_formula, Formula, Term};
use crate::hfset::{universe, HfSet};
use crate::ordinal::Ordinal;
use crate::ordset::{project, OrdSet, Side};
use crate::otm::library::{godel_text, wire};
use crate::proofcalc::subst_term;
use crate::realizability::{
    check, deserialize, recognize, serialize, witness_realizer, CheckContext, CheckVerdict,
    Realizer,
};
use crate::recognizer::{mutants, test_recognizer, CandidatePool, RecognitionVerdict, Recognizer};
use crate::setcode::{decode, encode, member_codes, SetCode};

/// Mutants added to the pool per witness.
pub const MUTANTS_PER_WITNESS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KpError {
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("separation needs a bounded formula")]
    NotDelta0,
    #[error("the antecedent realizer is not accepted: {0}")]
    AntecedentNotRealized(String),
    #[error("the premise realizer is not accepted: {0}")]
    PremiseNotRealized(String),
    #[error("no realizer recognized at {0}")]
    RecognitionFailed(String),
    #[error("member {0} of the family is empty")]
    EmptyMember(HfSet),
}

/// An axiom together with the data pinning down one instance. Formula
/// parameters are substituted before the instance sentence is formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomInstance {
    Extensionality(HfSet, HfSet),
    Pairing(HfSet, HfSet),
    EmptySet,
    Union(HfSet),
    Infinity,
    /// `phi` in the free variable `x`.
    Delta0Separation {
        phi: Formula,
        params: BTreeMap<String, HfSet>,
        domain: HfSet,
    },
    /// `phi` in the free variables `x` and `y`.
    Replacement {
        phi: Formula,
        params: BTreeMap<String, HfSet>,
        domain: HfSet,
    },
    /// `phi` in the free variable `a`.
    EpsilonInduction {
        phi: Formula,
        params: BTreeMap<String, HfSet>,
        target: HfSet,
    },
    Choice(HfSet),
}

impl AxiomInstance {
    pub fn name(&self) -> &'static str {
        match self {
            AxiomInstance::Extensionality(..) => "extensionality",
            AxiomInstance::Pairing(..) => "pairing",
            AxiomInstance::EmptySet => "empty-set",
            AxiomInstance::Union(_) => "union",
            AxiomInstance::Infinity => "infinity",
            AxiomInstance::Delta0Separation { .. } => "separation",
            AxiomInstance::Replacement { .. } => "replacement",
            AxiomInstance::EpsilonInduction { .. } => "induction",
            AxiomInstance::Choice(_) => "choice",
        }
    }

    /// The sentence a realizer of this instance realizes. For induction
    /// that is the conclusion at the target set.
    pub fn sentence(&self) -> Result<Formula, KpError> {
        let c = |s: &HfSet| s.to_string();
        let text = match self {
            AxiomInstance::Extensionality(x, y) => format!(
                "{} = {} <-> (all z)(z in {} <-> z in {})",
                c(x),
                c(y),
                c(x),
                c(y)
            ),
            AxiomInstance::Pairing(a, b) => format!("(ex w)({} in w and {} in w)", c(a), c(b)),
            AxiomInstance::EmptySet => EMPTY_BODY_EX.to_string(),
            AxiomInstance::Union(x) => format!("(ex w)({})", union_body(x)),
            AxiomInstance::Infinity => INFINITY.to_string(),
            AxiomInstance::Delta0Separation {
                phi,
                params,
                domain,
            } => {
                let phi = with_params(phi, params, &["x"])?;
                return Ok(Formula::exists("w", separation_body(&phi, domain)));
            }
            AxiomInstance::Replacement {
                phi,
                params,
                domain,
            } => {
                let phi = with_params(phi, params, &["x", "y"])?;
                let (ante, body) = replacement_parts(&phi, domain);
                return Ok(Formula::implies(ante, Formula::exists("w", body)));
            }
            AxiomInstance::EpsilonInduction {
                phi,
                params,
                target,
            } => {
                return Ok(with_params(phi, params, &["a"])?.subst("a", target));
            }
            AxiomInstance::Choice(x) => {
                return Ok(Formula::implies(
                    choice_premise_formula(x),
                    Formula::exists("w", choice_body(x)),
                ));
            }
        };
        Ok(parse_formula(&text).expect("instance sentences are well formed"))
    }
}

impl fmt::Display for AxiomInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sentence() {
            Ok(s) => write!(f, "{}: {s}", self.name()),
            Err(e) => write!(f, "{}: <{e}>", self.name()),
        }
    }
}

const EMPTY_BODY: &str = "(all z in w) not z = z";
const EMPTY_BODY_EX: &str = "(ex w)(all z in w) not z = z";
const INFINITY: &str =
    "(ex w)({} in w and (all x in w)(ex s in w)(x in s and (all t in s)(t in x or t = x)))";

fn union_body(x: &HfSet) -> String {
    format!("(all x in {x})(all z in x) z in w")
}

fn separation_body(phi: &Formula, domain: &HfSet) -> Formula {
    let d = Term::Const(domain.clone());
    let inside = Formula::forall_in(
        "x",
        Term::var("w"),
        Formula::and(Formula::Member(Term::var("x"), d.clone()), phi.clone()),
    );
    let complete = Formula::forall_in(
        "x",
        d,
        Formula::implies(phi.clone(), Formula::Member(Term::var("x"), Term::var("w"))),
    );
    Formula::and(inside, complete)
}

/// `(all x in X)(ex y) phi` and `(all x in X)(ex y in w) phi`.
fn replacement_parts(phi: &Formula, domain: &HfSet) -> (Formula, Formula) {
    let d = Term::Const(domain.clone());
    let ante = Formula::forall_in("x", d.clone(), Formula::exists("y", phi.clone()));
    let body = Formula::forall_in("x", d, Formula::exists_in("y", Term::var("w"), phi.clone()));
    (ante, body)
}

/// `p` is the ordered pair `(a, b)`.
fn is_pair(p: &str, a: &str, b: &str) -> String {
    format!(
        "((all u in {p})({a} in u and (all t in u)(t = {a} or t = {b})) and (ex u in {p})(all t in u) t = {a} and (ex u in {p}) {b} in u)"
    )
}

fn choice_premise_formula(x: &HfSet) -> Formula {
    parse_formula(&format!("(all y in {x})(ex x) x in y")).expect("well formed")
}

/// `w` is a function on `X` picking an element of each member.
fn choice_body(x: &HfSet) -> Formula {
    let text = format!(
        "(all p in w)(ex y in {x})(ex x in y) {pyx} and (all y in {x})(ex p in w)(ex x in y) {pyx} \
         and (all p in w)(all q in w)(all y in {x})(all a in y)(all b in y)(({pya} and {qyb}) -> p = q)",
        pyx = is_pair("p", "y", "x"),
        pya = is_pair("p", "y", "a"),
        qyb = is_pair("q", "y", "b"),
    );
    parse_formula(&text).expect("well formed")
}

/// Substitutes `params`; afterwards only `allowed` may be free, and the
/// bound name `w` of the enclosing existential must not be.
fn with_params(
    phi: &Formula,
    params: &BTreeMap<String, HfSet>,
    allowed: &[&str],
) -> Result<Formula, KpError> {
    let f = phi.subst_all(params);
    let stray: Vec<String> = f
        .free_vars()
        .into_iter()
        .filter(|v| !allowed.contains(&v.as_str()))
        .collect();
    if !stray.is_empty() {
        return Err(KpError::MalformedInstance(format!(
            "unexpected free variables {stray:?} in `{f}`"
        )));
    }
    Ok(f)
}

fn godel_of(f: &Formula) -> OrdSet {
    godel_text(&f.to_string())
}

// ---------------------------------------------------------------------------
// Results

/// A set an emitted program is meant to single out, with that program.
#[derive(Debug, Clone)]
pub struct Witness {
    pub description: String,
    pub value: OrdSet,
    pub recognizer: Recognizer,
    pub relative_to: Option<OrdSet>,
}

impl Witness {
    /// The verdict of the witness's recognizer over `pool`; `Recognizes`
    /// the witness itself is the expected outcome.
    pub fn verdict(&self, pool: &CandidatePool, fuel: u64) -> RecognitionVerdict {
        test_recognizer(&self.recognizer, pool, self.relative_to.as_ref(), fuel)
    }
}

#[derive(Debug, Clone)]
pub struct EmissionResult {
    pub axiom: &'static str,
    pub formula: Formula,
    pub realizer: Realizer,
    /// Realizers of antecedents the formula's check should feed in.
    pub antecedents: Vec<(Formula, Realizer)>,
    pub witnesses: Vec<Witness>,
    pub mutation_pool: CandidatePool,
}

impl EmissionResult {
    fn new(
        axiom: &'static str,
        formula: Formula,
        realizer: Realizer,
        witnesses: Vec<Witness>,
    ) -> Self {
        let mut pool = CandidatePool::new();
        for w in &witnesses {
            pool.push(w.value.clone());
            pool.extend(mutants(&w.value, MUTANTS_PER_WITNESS));
        }
        EmissionResult {
            axiom,
            formula,
            realizer,
            antecedents: Vec::new(),
            witnesses,
            mutation_pool: pool,
        }
    }

    /// A checking context over `universe(rank)` whose pool is extended by
    /// the mutation pool and whose antecedent suite knows the emitter's
    /// antecedents.
    pub fn context(&self, rank: usize, fuel: u64) -> CheckContext {
        let mut ctx = CheckContext::new(universe(rank), fuel);
        ctx.pool.extend(self.mutation_pool.iter().cloned());
        for (f, r) in &self.antecedents {
            ctx.add_antecedent(f.clone(), r.clone());
        }
        ctx
    }

    pub fn check(&self, ctx: &CheckContext) -> CheckVerdict {
        check(&self.realizer, &self.formula, ctx)
    }

    /// Every witness with the verdict of its recognizer on the mutation pool.
    pub fn witness_verdicts(&self, fuel: u64) -> Vec<(&Witness, RecognitionVerdict)> {
        self.witnesses
            .iter()
            .map(|w| (w, w.verdict(&self.mutation_pool, fuel)))
            .collect()
    }

    pub fn witness(&self, description: &str) -> Option<&Witness> {
        self.witnesses.iter().find(|w| w.description == description)
    }

    /// The set coded by the witness named `code`, when there is one.
    pub fn decoded(&self) -> Option<HfSet> {
        let c = self.witness("code")?;
        SetCode::from_ordset(c.value.clone())
            .ok()
            .and_then(|c| decode(&c).ok())
    }
}

/// Witnesses for an existential realized by `r`: the package it recognizes
/// and the code inside.
fn existential_witnesses(r: &Realizer, package: OrdSet) -> Vec<Witness> {
    let Realizer::ProgParam(p, q) = r else {
        unreachable!("existential realizers are programs")
    };
    let code = project(&project(&package, Side::Even), Side::Even);
    vec![
        Witness {
            description: "package".into(),
            value: package,
            recognizer: Recognizer {
                program: p.program().clone(),
                param: q.clone(),
            },
            relative_to: Some(OrdSet::new()),
        },
        Witness {
            description: "code".into(),
            value: code,
            recognizer: Recognizer::library("kp_code", serialize(r)).expect("library program"),
            relative_to: Some(OrdSet::new()),
        },
    ]
}

/// `pack((c, ser s))` for the canonical realizer `s` of `body(w := x)`.
fn package(x: &HfSet, body: &Formula) -> Result<OrdSet, KpError> {
    let s = crate::realizability::canonical_realizer(&body.subst("w", x)).map_err(|e| {
        KpError::MalformedInstance(format!("the witness does not satisfy the body: {e}"))
    })?;
    Ok(wire::pack(&wire::ilv(&encode(x).code, &serialize(&s))))
}

// ---------------------------------------------------------------------------
// The finitary axioms

/// Extensionality, pairing, the empty set and union.
pub fn emit_basic(ax: &AxiomInstance) -> Result<EmissionResult, KpError> {
    let formula = ax.sentence()?;
    match ax {
        AxiomInstance::Extensionality(x, y) => {
            let pointwise =
                parse_formula(&format!("(all z)(z in {x} <-> z in {y})")).expect("well formed");
            let forward = Realizer::constant(
                &crate::realizability::canonical_realizer(&pointwise).expect("bounded body"),
            );
            let backward = Realizer::constant(&Realizer::Empty);
            let witnesses = [("forward", &forward), ("backward", &backward)]
                .into_iter()
                .map(|(d, r)| {
                    let Realizer::ProgParam(p, q) = r else {
                        unreachable!()
                    };
                    Witness {
                        description: d.into(),
                        value: q.clone(),
                        recognizer: Recognizer {
                            program: p.program().clone(),
                            param: q.clone(),
                        },
                        relative_to: Some(OrdSet::new()),
                    }
                })
                .collect();
            Ok(EmissionResult::new(
                ax.name(),
                formula,
                Realizer::pair(forward, backward),
                witnesses,
            ))
        }
        AxiomInstance::Pairing(a, b) => {
            let body = parse_formula(&format!("{a} in w and {b} in w")).expect("well formed");
            let q = wire::ilv(
                &godel_of(&body),
                &wire::ilv(&encode(a).code, &encode(b).code),
            );
            let r = Realizer::lib("kp_pair", q);
            let pkg = package(&HfSet::pair(a.clone(), b.clone()), &body)?;
            Ok(EmissionResult::new(
                ax.name(),
                formula,
                r.clone(),
                existential_witnesses(&r, pkg),
            ))
        }
        AxiomInstance::EmptySet => {
            let body = parse_formula(EMPTY_BODY).expect("well formed");
            let r = Realizer::lib("kp_empty", godel_of(&body));
            let pkg = package(&HfSet::empty(), &body)?;
            Ok(EmissionResult::new(
                ax.name(),
                formula,
                r.clone(),
                existential_witnesses(&r, pkg),
            ))
        }
        AxiomInstance::Union(x) => {
            let body = parse_formula(&union_body(x)).expect("well formed");
            let r = Realizer::lib("kp_union", wire::ilv(&godel_of(&body), &encode(x).code));
            let pkg = package(&x.union_members(), &body)?;
            Ok(EmissionResult::new(
                ax.name(),
                formula,
                r.clone(),
                existential_witnesses(&r, pkg),
            ))
        }
        AxiomInstance::Delta0Separation {
            phi,
            params,
            domain,
        } => emit_separation(phi, params, domain),
        other => Err(KpError::MalformedInstance(format!(
            "{} is not a basic axiom",
            other.name()
        ))),
    }
}

/// `{x in X : phi(x)}`, computed by the emitted program from `phi` and a
/// code of `X`.
pub fn emit_separation(
    phi: &Formula,
    params: &BTreeMap<String, HfSet>,
    domain: &HfSet,
) -> Result<EmissionResult, KpError> {
    let phi = with_params(phi, params, &["x"])?;
    if !phi.is_delta0() {
        return Err(KpError::NotDelta0);
    }
    let body = separation_body(&phi, domain);
    let formula = Formula::exists("w", body.clone());
    let q = wire::ilv(
        &godel_of(&body),
        &wire::ilv(&godel_of(&phi), &encode(domain).code),
    );
    let r = Realizer::lib("kp_sep", q);
    let y = HfSet::from_members(
        domain
            .members()
            .filter(|m| crate::realizability::truth(&phi.subst("x", m), &[]))
            .cloned(),
    );
    let pkg = package(&y, &body)?;
    Ok(EmissionResult::new(
        "separation",
        formula,
        r.clone(),
        existential_witnesses(&r, pkg),
    ))
}

// ---------------------------------------------------------------------------
// Infinity

/// The code of omega under the enumeration `0 -> omega`, `n + 1 -> n`:
/// the pairs `(m + 1, 0)` for every `m` and `(m + 1, n + 1)` for `m < n`.
/// It has infinitely many elements and so is only ever inspected through
/// its membership test and finite windows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OmegaCode;

impl OmegaCode {
    pub fn domain_size(&self) -> Ordinal {
        Ordinal::omega()
    }

    /// Whether the coded membership relates index `i` to index `j`.
    pub fn relates(&self, i: u64, j: u64) -> bool {
        i >= 1 && (j == 0 || i < j)
    }

    pub fn contains(&self, o: &Ordinal) -> bool {
        match o.as_finite() {
            Some(n) => {
                let (i, j) = crate::ordinal::unpair_nat(n);
                self.relates(i, j)
            }
            None => false,
        }
    }

    /// The part on indices `0..=n`: with `0` now naming `n`, a code of the
    /// natural number `n`.
    pub fn window(&self, n: u64) -> SetCode {
        let pairs = (0..=n).flat_map(|j| (0..=n).map(move |i| (i, j)));
        let code = pairs
            .filter(|&(i, j)| self.relates(i, j))
            .map(|(i, j)| Ordinal::Fin(crate::ordinal::pair_nat(i, j)))
            .collect();
        SetCode::new(code, Ordinal::Fin(n + 1))
    }
}

/// The infinity axiom: its sentence and the symbolic code of its witness.
pub fn emit_infinity() -> (Formula, OmegaCode) {
    (
        AxiomInstance::Infinity.sentence().expect("fixed sentence"),
        OmegaCode,
    )
}

// ---------------------------------------------------------------------------
// Premises for the schemata

/// `(t, pack(ser r))` entries behind a lookup realizer.
fn lookup(entries: Vec<(OrdSet, Realizer)>, default: &Realizer) -> Realizer {
    let table = wire::list(entries.iter().map(|(k, r)| wire::ilv(k, &serialize(r))));
    Realizer::lib("tlook", wire::ilv(&table, &serialize(default)))
}

/// A realizer of `(all x in X)(ex y) phi(x, y)` naming, for each member,
/// the first witness in `universe`.
pub fn replacement_antecedent(
    phi: &Formula,
    params: &BTreeMap<String, HfSet>,
    domain: &HfSet,
    universe: &[HfSet],
) -> Option<Realizer> {
    let phi = with_params(phi, params, &["x", "y"]).ok()?;
    bounded_existence(domain, universe, |x| {
        Formula::exists("y", phi.subst("x", x))
    })
}

/// A realizer of `(all y in X)(ex x) x in y`.
pub fn choice_premise(family: &HfSet, universe: &[HfSet]) -> Option<Realizer> {
    bounded_existence(family, universe, |y| {
        parse_formula(&format!("(ex x) x in {y}")).expect("well formed")
    })
}

fn bounded_existence(
    domain: &HfSet,
    universe: &[HfSet],
    claim: impl Fn(&HfSet) -> Formula,
) -> Option<Realizer> {
    let mut entries = Vec::new();
    for x in domain.members() {
        let r = witness_realizer(&claim(x), universe)?;
        entries.push((encode(x).code, Realizer::constant(&r)));
    }
    Some(lookup(entries, &Realizer::p_empty()))
}

/// A realizer of `(all a)((all x in a) phi(x) -> phi(a))` for bounded `phi`.
pub fn induction_premise(phi: &Formula, params: &BTreeMap<String, HfSet>) -> Option<Realizer> {
    let f = induction_step(&with_params(phi, params, &["a"]).ok()?)?;
    crate::realizability::canonical_realizer(&f).ok()
}

/// `(all a)((all x in a) phi(x) -> phi(a))`, with `x` renamed away from
/// the variables of `phi` when needed.
pub fn induction_step(phi: &Formula) -> Option<Formula> {
    let x = (0..)
        .map(|i| {
            if i == 0 {
                "x".to_string()
            } else {
                format!("x{i}")
            }
        })
        .find(|v| !phi.to_string().contains(v.as_str()))?;
    let below = Formula::forall_in(&x, Term::var("a"), subst_term(phi, "a", &Term::var(&x))?);
    Some(Formula::forall("a", Formula::implies(below, phi.clone())))
}

// ---------------------------------------------------------------------------
// Replacement and choice

/// Replays `antecedent` on each member of the domain and returns the
/// audit triples together with the values found.
fn audit_triples(
    antecedent: &Realizer,
    domain_code: &OrdSet,
    ctx: &CheckContext,
) -> Result<Vec<(OrdSet, OrdSet, OrdSet)>, KpError> {
    let members = member_codes(&SetCode::from_ordset(domain_code.clone()).expect("canonical code"))
        .expect("canonical code");
    let trivial = wire::pack(&serialize(&Realizer::Empty));
    let mut out = Vec::new();
    for k in members {
        let k = k.code;
        let fail = |_| KpError::RecognitionFailed(format!("member coded by {k}"));
        let z1 = recognize(antecedent, &k, ctx).map_err(fail)?;
        let i = deserialize(&project(&z1, Side::Even))
            .map_err(|_| KpError::RecognitionFailed(format!("member coded by {k}")))?;
        let z2 = recognize(&i, &trivial, ctx).map_err(fail)?;
        let e = deserialize(&project(&z2, Side::Even))
            .map_err(|_| KpError::RecognitionFailed(format!("member coded by {k}")))?;
        let z3 = recognize(&e, &OrdSet::new(), ctx).map_err(fail)?;
        let cy = project(&project(&z3, Side::Even), Side::Even);
        let triple = wire::ilv(&k, &wire::ilv(&cy, &wire::ilv(&z1, &wire::ilv(&z2, &z3))));
        out.push((k, cy, triple));
    }
    Ok(out)
}

/// The audited package `((Y, ser s), W)`.
pub fn audit_package(image: &HfSet, body: &Formula, triples: &[OrdSet]) -> Result<OrdSet, KpError> {
    let s = crate::realizability::canonical_realizer(&body.subst("w", image)).map_err(|e| {
        KpError::MalformedInstance(format!("the image does not satisfy the body: {e}"))
    })?;
    let head = wire::ilv(&encode(image).code, &serialize(&s));
    Ok(wire::ilv(&head, &wire::list(triples.iter().cloned())))
}

/// Replacement and choice share the audit; `pairs` selects the graph
/// (choice) over the plain image (replacement).
fn emit_audited(
    axiom: &'static str,
    ante_formula: Formula,
    body: Formula,
    domain: &HfSet,
    antecedent: &Realizer,
    ctx: &CheckContext,
    pairs: bool,
) -> Result<(EmissionResult, Vec<OrdSet>), KpError> {
    let mut ctx = ctx.clone();
    ctx.add_antecedent(ante_formula.clone(), antecedent.clone());
    match check(antecedent, &ante_formula, &ctx) {
        CheckVerdict::Realized => {}
        v => {
            return Err(if pairs {
                KpError::PremiseNotRealized(v.to_string())
            } else {
                KpError::AntecedentNotRealized(v.to_string())
            })
        }
    }
    let cx = encode(domain).code;
    let triples = audit_triples(antecedent, &cx, &ctx)?;
    let mut image = Vec::new();
    for (k, cy, _) in &triples {
        let y = decode(&SetCode::from_ordset(cy.clone()).expect("recognized codes are valid"))
            .expect("valid code");
        image.push(if pairs {
            let x =
                decode(&SetCode::from_ordset(k.clone()).expect("member code")).expect("valid code");
            HfSet::kpair(&x, &y)
        } else {
            y
        });
    }
    let image = HfSet::from_members(image);
    let just: Vec<OrdSet> = triples.into_iter().map(|t| t.2).collect();
    let pkg = audit_package(&image, &body, &just)?;

    let q = wire::ilv(&OrdSet::bit(pairs), &wire::ilv(&cx, &godel_of(&body)));
    let r = Realizer::lib("audit_imp", q.clone());
    let audit = Realizer::lib("audit", wire::ilv(&serialize(antecedent), &q));
    let formula = Formula::implies(ante_formula.clone(), Formula::exists("w", body));
    let mut res = EmissionResult::new(axiom, formula, r, existential_witnesses(&audit, pkg));
    res.antecedents.push((ante_formula, antecedent.clone()));
    Ok((res, just))
}

/// The image of `X` under the relation `phi(x, y)` singled out by the
/// antecedent's recognitions, audited triple by triple.
pub fn emit_replacement(
    phi: &Formula,
    params: &BTreeMap<String, HfSet>,
    domain: &HfSet,
    antecedent: &Realizer,
    ctx: &CheckContext,
) -> Result<ReplacementEmission, KpError> {
    let phi = with_params(phi, params, &["x", "y"])?;
    let (ante, body) = replacement_parts(&phi, domain);
    let (result, triples) = emit_audited(
        "replacement",
        ante,
        body.clone(),
        domain,
        antecedent,
        ctx,
        false,
    )?;
    Ok(ReplacementEmission {
        result,
        body,
        triples,
    })
}

#[derive(Debug, Clone)]
pub struct ReplacementEmission {
    pub result: EmissionResult,
    /// The consequent's body in the free variable `w`.
    pub body: Formula,
    pub triples: Vec<OrdSet>,
}

impl ReplacementEmission {
    /// The package with its triple list replaced, image kept.
    pub fn with_triples(&self, triples: &[OrdSet]) -> OrdSet {
        let pkg = &self
            .result
            .witness("package")
            .expect("audited emissions have a package")
            .value;
        wire::ilv(
            &project(pkg, Side::Even),
            &wire::list(triples.iter().cloned()),
        )
    }
}

/// A choice function on the family `X`, each value the element the
/// premise names.
pub fn emit_choice(
    family: &HfSet,
    premise: &Realizer,
    ctx: &CheckContext,
) -> Result<EmissionResult, KpError> {
    if let Some(e) = family.members().find(|m| m.is_empty()) {
        return Err(KpError::EmptyMember(e.clone()));
    }
    let (res, _) = emit_audited(
        "choice",
        choice_premise_formula(family),
        choice_body(family),
        family,
        premise,
        ctx,
        true,
    )?;
    Ok(res)
}

// ---------------------------------------------------------------------------
// Epsilon-induction

/// One row of the recursion table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub set: HfSet,
    /// The key: the code of `set` among the members of `tc({y})`.
    pub key: OrdSet,
    /// `c_<x`, realizing `(all u in x) phi(u)`.
    pub below: Realizer,
    /// What the step implication recognizes from `below`; its even half
    /// serializes `c_x`.
    pub step: OrdSet,
    /// What the premise recognizes relative to `key`.
    pub premise_step: OrdSet,
}

impl TableEntry {
    pub fn realizer(&self) -> Realizer {
        deserialize(&project(&self.step, Side::Even)).expect("step packages carry realizers")
    }
}

#[derive(Debug, Clone)]
pub struct InductionEmission {
    pub result: EmissionResult,
    pub phi: Formula,
    pub target: HfSet,
    pub table: Vec<TableEntry>,
}

impl InductionEmission {
    /// `(ser c_y, (T, R))` for a table.
    pub fn package_of(c_y: &Realizer, table: &[TableEntry]) -> OrdSet {
        let t = wire::list(
            table
                .iter()
                .map(|e| wire::ilv(&e.key, &wire::ilv(&serialize(&e.below), &e.step))),
        );
        let r = wire::list(table.iter().map(|e| wire::ilv(&e.key, &e.premise_step)));
        wire::ilv(&serialize(c_y), &wire::ilv(&t, &r))
    }

    pub fn package(&self) -> OrdSet {
        Self::package_of(&self.result.realizer, &self.table)
    }

    pub fn checker(&self) -> &Witness {
        self.result
            .witness("table")
            .expect("induction emissions carry the table")
    }
}

/// `c_<x`: the lookup realizer filing `constant(c_m)` under each member
/// `m` of `x` already in the table, latest first.
fn below_realizer(x: &HfSet, done: &[TableEntry]) -> Realizer {
    let mut entries: Vec<(OrdSet, Realizer)> = done
        .iter()
        .filter(|e| x.contains(&e.set))
        .map(|e| (e.key.clone(), Realizer::constant(&e.realizer())))
        .collect();
    entries.reverse();
    lookup(entries, &Realizer::p_empty())
}

/// Walks `tc({y})` in the order of its canonical code, building for each
/// `x` the realizer of `(all u in x) phi(u)` from the rows below and the
/// realizer of `phi(x)` the premise recognizes from it.
pub fn emit_induction(
    phi: &Formula,
    params: &BTreeMap<String, HfSet>,
    target: &HfSet,
    premise: &Realizer,
    ctx: &CheckContext,
) -> Result<InductionEmission, KpError> {
    let phi = with_params(phi, params, &["a"])?;
    let step_formula = induction_step(&phi)
        .ok_or_else(|| KpError::MalformedInstance(format!("cannot rename in `{phi}`")))?;
    if !matches!(premise, Realizer::ProgParam(..)) {
        return Err(KpError::PremiseNotRealized(format!(
            "{premise} is not a program"
        )));
    }
    let mut ctx = ctx.clone();
    ctx.add_antecedent(step_formula.clone(), premise.clone());
    match check(premise, &step_formula, &ctx) {
        CheckVerdict::Realized => {}
        v => return Err(KpError::PremiseNotRealized(v.to_string())),
    }

    let closure = HfSet::from_members(target.tc_with_self());
    let keys = member_codes(&encode(&closure)).expect("canonical code");
    let mut rows: Vec<(HfSet, OrdSet)> = keys
        .into_iter()
        .map(|k| (decode(&k).expect("member codes decode"), k.code))
        .collect();
    // Rows are filed in code order but computed members-first.
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by_key(|&i| rows[i].0.rank());
    let mut done: Vec<Option<TableEntry>> = vec![None; rows.len()];
    for i in order {
        let (x, key) = rows[i].clone();
        let filed: Vec<TableEntry> = done.iter().flatten().cloned().collect();
        let below = below_realizer(&x, &ordered(&filed, &rows));
        let fail = |_| KpError::RecognitionFailed(x.to_string());
        let premise_step = recognize(premise, &key, &ctx).map_err(fail)?;
        let imp = deserialize(&project(&premise_step, Side::Even))
            .map_err(|_| KpError::RecognitionFailed(x.to_string()))?;
        let step = recognize(&imp, &wire::pack(&serialize(&below)), &ctx).map_err(fail)?;
        deserialize(&project(&step, Side::Even))
            .map_err(|_| KpError::RecognitionFailed(x.to_string()))?;
        done[i] = Some(TableEntry {
            set: x,
            key,
            below,
            step,
            premise_step,
        });
    }
    let table: Vec<TableEntry> = done
        .into_iter()
        .map(|e| e.expect("every row computed"))
        .collect();
    rows.clear();

    let top = table
        .iter()
        .find(|e| &e.set == target)
        .expect("y is in tc({y})");
    let c_y = top.realizer();
    let pkg = InductionEmission::package_of(&c_y, &table);
    let formula = phi.subst("a", target);
    let witnesses = vec![Witness {
        description: "table".into(),
        value: pkg,
        recognizer: Recognizer::library("indchk", serialize(premise)).expect("library program"),
        relative_to: Some(encode(target).code),
    }];
    let mut result = EmissionResult::new("induction", formula, c_y, witnesses);
    result.antecedents.push((step_formula, premise.clone()));
    Ok(InductionEmission {
        result,
        phi,
        target: target.clone(),
        table,
    })
}

/// The computed rows in filing (code) order, as the checker scans them.
fn ordered(filed: &[TableEntry], rows: &[(HfSet, OrdSet)]) -> Vec<TableEntry> {
    rows.iter()
        .filter_map(|(_, k)| filed.iter().find(|e| &e.key == k).cloned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::otm::DEFAULT_FUEL;

    fn h(t: &str) -> HfSet {
        t.parse().unwrap()
    }

    fn f(t: &str) -> Formula {
        parse_formula(t).unwrap()
    }

    fn no_params() -> BTreeMap<String, HfSet> {
        BTreeMap::new()
    }

    fn assert_sound(res: &EmissionResult) {
        let ctx = res.context(2, DEFAULT_FUEL);
        assert_eq!(res.check(&ctx), CheckVerdict::Realized, "{}", res.formula);
        for (w, v) in res.witness_verdicts(DEFAULT_FUEL) {
            assert_eq!(
                v,
                RecognitionVerdict::Recognizes(w.value.clone()),
                "{}",
                w.description
            );
        }
    }

    #[test]
    fn basic_examples() {
        let u = emit_basic(&AxiomInstance::Union(h("{{{}},{{{}}}}"))).unwrap();
        assert_eq!(u.decoded(), Some(h("{{},{{}}}")));
        assert_sound(&u);
        let p = emit_basic(&AxiomInstance::Pairing(h("{}"), h("{{}}"))).unwrap();
        assert_eq!(p.decoded(), Some(h("{{},{{}}}")));
        assert_sound(&p);
        let e = emit_basic(&AxiomInstance::EmptySet).unwrap();
        assert_eq!(
            e.witness("code").unwrap().value,
            encode(&HfSet::empty()).code
        );
        assert_sound(&e);
        for (x, y) in [("{}", "{}"), ("{}", "{{}}")] {
            assert_sound(&emit_basic(&AxiomInstance::Extensionality(h(x), h(y))).unwrap());
        }
    }

    #[test]
    fn separation_examples() {
        let x = h("{{},{{}}}");
        let s = emit_separation(&f("x = {}"), &no_params(), &x).unwrap();
        assert_eq!(s.decoded(), Some(h("{{}}")));
        assert_sound(&s);
        assert_eq!(
            emit_separation(&f("x = x"), &no_params(), &x)
                .unwrap()
                .decoded(),
            Some(x.clone())
        );
        assert_eq!(
            emit_separation(&f("x in {}"), &no_params(), &x)
                .unwrap()
                .decoded(),
            Some(HfSet::empty())
        );
        assert_eq!(
            emit_separation(&f("(ex z) x = z"), &no_params(), &x).unwrap_err(),
            KpError::NotDelta0
        );
    }

    #[test]
    fn infinity_windows_code_naturals() {
        for n in 0..6 {
            assert_eq!(
                decode(&OmegaCode.window(n)).unwrap(),
                HfSet::nat(n as usize)
            );
        }
        assert!(OmegaCode.relates(3, 0) && OmegaCode.relates(1, 2) && !OmegaCode.relates(2, 2));
    }

    fn replacement(phi: &str, x: &str) -> ReplacementEmission {
        let ctx = CheckContext::with_rank(2);
        let ante = replacement_antecedent(&f(phi), &no_params(), &h(x), &ctx.universe).unwrap();
        emit_replacement(&f(phi), &no_params(), &h(x), &ante, &ctx).unwrap()
    }

    #[test]
    fn replacement_examples() {
        let r = replacement("y = x", "{{},{{}}}");
        assert_eq!(r.result.decoded(), Some(h("{{},{{}}}")));
        assert_sound(&r.result);
        let r = replacement("y = {}", "{{},{{}}}");
        assert_eq!(r.result.decoded(), Some(h("{{}}")));
        assert_sound(&r.result);
        let r = replacement("y = x", "{}");
        assert_eq!(r.result.decoded(), Some(HfSet::empty()));
        assert!(r.triples.is_empty());
    }

    #[test]
    fn replacement_audit_rejects_edited_triples() {
        let r = replacement("y = x", "{{},{{}}}");
        let w = r.result.witness("package").unwrap();
        let run = |pkg: &OrdSet| w.verdict(&CandidatePool::from_iter([pkg.clone()]), DEFAULT_FUEL);
        assert_eq!(
            run(&r.with_triples(&r.triples)),
            RecognitionVerdict::Recognizes(w.value.clone())
        );
        for i in 0..r.triples.len() {
            let mut fewer = r.triples.clone();
            fewer.remove(i);
            assert_eq!(run(&r.with_triples(&fewer)), RecognitionVerdict::RejectsAll);
            let mut more = r.triples.clone();
            more.insert(i, r.triples[i].clone());
            assert_eq!(run(&r.with_triples(&more)), RecognitionVerdict::RejectsAll);
        }
    }

    #[test]
    fn choice_examples() {
        let ctx = CheckContext::with_rank(2);
        let x = h("{{{}}}");
        let c = emit_choice(&x, &choice_premise(&x, &ctx.universe).unwrap(), &ctx).unwrap();
        assert_eq!(
            c.decoded(),
            Some(HfSet::from_members([HfSet::kpair(&h("{{}}"), &h("{}"))]))
        );
        assert_sound(&c);
        let x = h("{{{}},{{},{{}}}}");
        let c = emit_choice(&x, &choice_premise(&x, &ctx.universe).unwrap(), &ctx).unwrap();
        assert!(crate::realizability::truth(
            &choice_body(&x).subst("w", &c.decoded().unwrap()),
            &[]
        ));
        assert_sound(&c);
        assert_eq!(
            emit_choice(&h("{{}}"), &Realizer::p_empty(), &ctx).unwrap_err(),
            KpError::EmptyMember(HfSet::empty())
        );
    }

    #[test]
    fn induction_examples() {
        let ctx = CheckContext::with_rank(2);
        for (phi, y) in [("a = a", "{{}}"), ("(all w in a)(w = w)", "{{{}}}")] {
            let premise = induction_premise(&f(phi), &no_params()).unwrap();
            let ind = emit_induction(&f(phi), &no_params(), &h(y), &premise, &ctx).unwrap();
            assert_eq!(ind.table.len(), h(y).tc_with_self().len());
            assert_sound(&ind.result);
        }
        let e = emit_induction(&f("a = a"), &no_params(), &h("{}"), &Realizer::Empty, &ctx);
        assert!(matches!(e, Err(KpError::PremiseNotRealized(_))));
    }
}
