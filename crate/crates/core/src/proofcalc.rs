//! An intuitionistic Hilbert calculus for the membership language: proofs,
//! their syntactic check, realizers for the axiom schemata, realizer
//! transformers for the rules, and extraction.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{parse_formula, Formula, Term};
use crate::ordset::{project, OrdSet, Side};
use crate::otm::library::wire;
use crate::realizability::{deserialize, recognize, serialize, CheckContext, Realizer};
use crate::setcode::encode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schema {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    Q1,
    Q2,
    Q3,
    Q4,
}

pub const SCHEMATA: [Schema; 12] = [
    Schema::P1,
    Schema::P2,
    Schema::P3,
    Schema::P4,
    Schema::P5,
    Schema::P6,
    Schema::P7,
    Schema::P8,
    Schema::Q1,
    Schema::Q2,
    Schema::Q3,
    Schema::Q4,
];

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Schema {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        SCHEMATA
            .iter()
            .copied()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| format!("unknown schema `{s}`"))
    }
}

/// Metavariable bindings of a schema instance. `phi`, `psi`, `xi` are
/// formulas; `x` and `z` variables; `s` and `t` terms; `side` picks the
/// right-hand form of the two-sided schemata P4 and P5.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subst {
    pub phi: Option<Formula>,
    pub psi: Option<Formula>,
    pub xi: Option<Formula>,
    pub x: Option<String>,
    pub z: Option<String>,
    pub s: Option<Term>,
    pub t: Option<Term>,
    pub right: bool,
}

impl Subst {
    pub fn formulas(phi: &str, psi: &str, xi: &str) -> Self {
        let f = |t: &str| (!t.is_empty()).then(|| parse_formula(t).expect("valid formula"));
        Subst {
            phi: f(phi),
            psi: f(psi),
            xi: f(xi),
            ..Default::default()
        }
    }
}

fn write_term(t: &Term) -> String {
    t.to_string()
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, v) in [("phi", &self.phi), ("psi", &self.psi), ("xi", &self.xi)] {
            if let Some(v) = v {
                parts.push(format!("{k}=\"{v}\""));
            }
        }
        for (k, v) in [("x", &self.x), ("z", &self.z)] {
            if let Some(v) = v {
                parts.push(format!("{k}={v}"));
            }
        }
        for (k, v) in [("s", &self.s), ("t", &self.t)] {
            if let Some(v) = v {
                parts.push(format!("{k}=\"{}\"", write_term(v)));
            }
        }
        if self.right {
            parts.push("side=right".into());
        }
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Mp,
    GenImp,
    ExElim,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Step {
    Premise(Formula),
    Axiom(Schema, Subst),
    /// Step references are 0-based here, 1-based in the file format. `Mp`
    /// takes `[phi, phi -> psi]`; the others one premise and `(x, y)`.
    Rule(Rule, Vec<usize>, Option<(String, String)>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Proof {
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofCheck {
    /// The formula proved at each step.
    Valid(Vec<Formula>),
    Invalid {
        step: usize,
        reason: String,
    },
}

impl ProofCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, ProofCheck::Valid(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("proof file, line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("step {step} is invalid: {reason}")]
    Invalid { step: usize, reason: String },
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("premise not realized: {0}")]
    PremiseNotRealized(String),
    #[error("recognition failed: {0}")]
    RecognitionFailed(String),
}

/// `f[t/x]`, or `None` when a variable of `t` would be captured.
pub fn subst_term(f: &Formula, x: &str, t: &Term) -> Option<Formula> {
    let rt = |u: &Term| match u {
        Term::Var(v) if v == x => t.clone(),
        _ => u.clone(),
    };
    let captures = |y: &str, body: &Formula| {
        matches!(t, Term::Var(v) if v == y) && body.free_vars().contains(x)
    };
    Some(match f {
        Formula::Member(a, b) => Formula::Member(rt(a), rt(b)),
        Formula::Equal(a, b) => Formula::Equal(rt(a), rt(b)),
        Formula::And(a, b) => Formula::and(subst_term(a, x, t)?, subst_term(b, x, t)?),
        Formula::Or(a, b) => Formula::or(subst_term(a, x, t)?, subst_term(b, x, t)?),
        Formula::Implies(a, b) => Formula::implies(subst_term(a, x, t)?, subst_term(b, x, t)?),
        Formula::Iff(a, b) => Formula::iff(subst_term(a, x, t)?, subst_term(b, x, t)?),
        Formula::Not(a) => Formula::not(subst_term(a, x, t)?),
        Formula::ForAll(y, _) | Formula::Exists(y, _) if y == x => f.clone(),
        Formula::ForAll(y, a) | Formula::Exists(y, a) => {
            if captures(y, a) {
                return None;
            }
            let a = subst_term(a, x, t)?;
            if matches!(f, Formula::ForAll(..)) {
                Formula::forall(y, a)
            } else {
                Formula::exists(y, a)
            }
        }
        Formula::ForAllIn(y, b, a) | Formula::ExistsIn(y, b, a) => {
            let a = if y == x {
                (**a).clone()
            } else if captures(y, a) {
                return None;
            } else {
                subst_term(a, x, t)?
            };
            if matches!(f, Formula::ForAllIn(..)) {
                Formula::forall_in(y, rt(b), a)
            } else {
                Formula::exists_in(y, rt(b), a)
            }
        }
    })
}

fn need<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, ProofError> {
    v.as_ref()
        .ok_or_else(|| ProofError::MalformedInstance(format!("missing `{name}`")))
}

fn free_subst(phi: &Formula, x: &str, t: &Term) -> Result<Formula, ProofError> {
    subst_term(phi, x, t)
        .ok_or_else(|| ProofError::MalformedInstance(format!("`{t}` is not free for `{x}`")))
}

/// The formula a schema instance stands for.
pub fn instance(schema: Schema, sub: &Subst) -> Result<Formula, ProofError> {
    use Formula as F;
    let phi = || need(&sub.phi, "phi").cloned();
    let psi = || need(&sub.psi, "psi").cloned();
    let xi = || need(&sub.xi, "xi").cloned();
    Ok(match schema {
        Schema::P1 => F::implies(phi()?, F::implies(psi()?, phi()?)),
        Schema::P2 => F::implies(
            F::implies(phi()?, F::implies(psi()?, xi()?)),
            F::implies(F::implies(phi()?, psi()?), F::implies(phi()?, xi()?)),
        ),
        Schema::P3 => F::implies(phi()?, F::implies(psi()?, F::and(phi()?, psi()?))),
        Schema::P4 => F::implies(
            F::and(phi()?, psi()?),
            if sub.right { psi()? } else { phi()? },
        ),
        Schema::P5 => F::implies(
            if sub.right { psi()? } else { phi()? },
            F::or(phi()?, psi()?),
        ),
        Schema::P6 => F::implies(
            F::or(phi()?, psi()?),
            F::implies(
                F::implies(phi()?, xi()?),
                F::implies(F::implies(psi()?, xi()?), xi()?),
            ),
        ),
        Schema::P7 => F::implies(
            F::implies(phi()?, psi()?),
            F::implies(F::implies(phi()?, F::not(psi()?)), F::not(phi()?)),
        ),
        Schema::P8 => F::implies(phi()?, F::implies(F::not(phi()?), psi()?)),
        Schema::Q1 => {
            let x = need(&sub.x, "x")?;
            F::implies(
                F::forall(x, phi()?),
                free_subst(&phi()?, x, need(&sub.t, "t")?)?,
            )
        }
        Schema::Q2 => {
            let x = need(&sub.x, "x")?;
            F::implies(
                free_subst(&phi()?, x, need(&sub.t, "t")?)?,
                F::exists(x, phi()?),
            )
        }
        Schema::Q3 => {
            let t = need(&sub.t, "t")?;
            F::Equal(t.clone(), t.clone())
        }
        Schema::Q4 => {
            let z = need(&sub.z, "z")?;
            let (s, t) = (need(&sub.s, "s")?, need(&sub.t, "t")?);
            F::implies(
                F::Equal(s.clone(), t.clone()),
                F::implies(free_subst(&phi()?, z, s)?, free_subst(&phi()?, z, t)?),
            )
        }
    })
}

// ---------------------------------------------------------------------------
// Realizers of schema instances

/// Realizer of the universal closure of `f`, given what to do once every
/// free variable is bound: `Ok(r)` finishes with the fixed realizer `r`,
/// `Err((program, var))` with `program` in parameter
/// `bound codes (+) {index of var in them}`.
fn close(f: &Formula, finish: Result<Realizer, (&str, &str)>) -> Realizer {
    let fv: Vec<String> = f.free_vars().into_iter().collect();
    if fv.is_empty() {
        return finish
            .unwrap_or_else(|_| unreachable!("a variable to pick implies a free variable"));
    }
    spine(
        fv.len(),
        match finish {
            Ok(r) => (false, serialize(&r)),
            Err((prog, var)) => {
                let j = fv
                    .iter()
                    .position(|v| v == var)
                    .expect("picked variable is free");
                let index = OrdSet::from_nats([(fv.len() - 1 - j) as u64]);
                let g = crate::otm::library::library_godel(prog).expect("library program");
                (true, wire::ilv(&g, &index))
            }
        },
    )
}

/// The library spine binding `n` variables, then finishing per `(mode,
/// data)`.
fn spine(n: usize, (mode, data): (bool, OrdSet)) -> Realizer {
    let count = wire::list((0..n).map(|_| OrdSet::new()));
    let head = wire::ilv(&count, &wire::nil());
    let tail = wire::ilv(&OrdSet::bit(mode), &data);
    Realizer::lib("spine", wire::ilv(&head, &tail))
}

fn code_of(t: &Term) -> Option<OrdSet> {
    match t {
        Term::Const(s) => Some(encode(s).code),
        Term::Var(_) => None,
    }
}

/// The realizer of a schema instance (of its universal closure when the
/// instance has free variables).
pub fn realize_axiom(schema: Schema, sub: &Subst) -> Result<Realizer, ProofError> {
    let f = instance(schema, sub)?;
    let none = OrdSet::new;
    let fixed = |r: Realizer| Ok(close(&f, Ok(r)));
    match schema {
        Schema::P1 => fixed(Realizer::lib("k1", none())),
        Schema::P2 => fixed(Realizer::lib("k2a", none())),
        Schema::P3 => fixed(Realizer::lib("k3a", none())),
        Schema::P4 => fixed(Realizer::lib(if sub.right { "k4r" } else { "k4l" }, none())),
        Schema::P5 => fixed(Realizer::lib(if sub.right { "k5r" } else { "k5l" }, none())),
        Schema::P6 => fixed(Realizer::lib("k6a", none())),
        Schema::P7 => fixed(Realizer::lib("k7a", none())),
        Schema::P8 => fixed(Realizer::constant(&Realizer::p_empty())),
        Schema::Q1 | Schema::Q2 => {
            let t = need(&sub.t, "t")?;
            let (constant, picked) = if schema == Schema::Q1 {
                ("app_op", "q1f")
            } else {
                ("q2c", "q2f")
            };
            match (code_of(t), t) {
                (Some(c), _) => fixed(Realizer::lib(constant, c)),
                (None, Term::Var(v)) => Ok(close(&f, Err((picked, v)))),
                (None, Term::Const(_)) => unreachable!(),
            }
        }
        Schema::Q3 => fixed(Realizer::Empty),
        Schema::Q4 => fixed(Realizer::constant(&Realizer::lib("ident", none()))),
    }
}

// ---------------------------------------------------------------------------
// Rules

/// Premise realizers and the context in which recognitions run.
#[derive(Debug, Clone)]
pub struct ExtractionEnv {
    pub premise_realizers: HashMap<Formula, Realizer>,
    pub ctx: CheckContext,
}

impl ExtractionEnv {
    pub fn new(ctx: CheckContext) -> Self {
        ExtractionEnv {
            premise_realizers: HashMap::new(),
            ctx,
        }
    }

    pub fn with_premise(mut self, f: Formula, r: Realizer) -> Self {
        self.premise_realizers.insert(f, r);
        self
    }
}

/// Premise realizer as a realizer of `(all y) premise`, wrapping it when
/// `y` does not occur.
fn over_y(premise: &Formula, y: &str, r: &Realizer) -> Result<Realizer, ProofError> {
    let fv = premise.free_vars();
    if fv.iter().any(|v| v != y) {
        return Err(ProofError::MalformedInstance(format!(
            "`{premise}` has free variables other than `{y}`"
        )));
    }
    Ok(if fv.is_empty() {
        spine(1, (false, serialize(r)))
    } else {
        r.clone()
    })
}

fn as_program(r: &Realizer, what: &str) -> Result<(), ProofError> {
    match r {
        Realizer::ProgParam(..) => Ok(()),
        other => Err(ProofError::PremiseNotRealized(format!(
            "{what} needs a program-parameter realizer, got {other}"
        ))),
    }
}

/// The realizer of a rule's conclusion from realizers of its premises.
/// Modus ponens takes `[(phi, r), (phi -> psi, s)]` with closed premises;
/// generalization and existential elimination one premise whose only free
/// variable is the eigenvariable.
pub fn apply_rule(
    rule: Rule,
    inputs: &[(Formula, Realizer)],
    eigen: Option<(&str, &str)>,
    env: &ExtractionEnv,
) -> Result<Realizer, ProofError> {
    match rule {
        Rule::Mp => {
            let [(phi, r), (imp, s)] = inputs else {
                return Err(ProofError::MalformedInstance(
                    "modus ponens takes two premises".into(),
                ));
            };
            as_program(s, "the implication premise")?;
            if !phi.is_sentence() || !imp.is_sentence() {
                return Err(ProofError::MalformedInstance(
                    "modus ponens is realized for closed premises only".into(),
                ));
            }
            let z = recognize(s, &wire::pack(&serialize(r)), &env.ctx)
                .map_err(|v| ProofError::RecognitionFailed(v.to_string()))?;
            deserialize(&project(&z, Side::Even))
                .map_err(|e| ProofError::RecognitionFailed(e.to_string()))
        }
        Rule::GenImp | Rule::ExElim => {
            let [(premise, r)] = inputs else {
                return Err(ProofError::MalformedInstance(
                    "the rule takes one premise".into(),
                ));
            };
            let (_, y) =
                eigen.ok_or_else(|| ProofError::MalformedInstance("missing variables".into()))?;
            let r = over_y(premise, y, r)?;
            as_program(&r, "the premise")?;
            let prog = if rule == Rule::GenImp {
                "gen_g"
            } else {
                "exe_q"
            };
            Ok(Realizer::lib(prog, serialize(&r)))
        }
    }
}

// ---------------------------------------------------------------------------
// Checking and extraction

fn rule_conclusion(
    rule: Rule,
    premises: &[&Formula],
    eigen: Option<&(String, String)>,
) -> Result<Formula, String> {
    match rule {
        Rule::Mp => {
            let [phi, imp] = premises else {
                return Err("modus ponens takes two premises".into());
            };
            match imp {
                Formula::Implies(a, b) if **a == **phi => Ok((**b).clone()),
                Formula::Implies(a, _) => Err(format!("antecedent `{a}` differs from `{phi}`")),
                _ => Err(format!("`{imp}` is not an implication")),
            }
        }
        Rule::GenImp | Rule::ExElim => {
            let [premise] = premises else {
                return Err("the rule takes one premise".into());
            };
            let (x, y) = eigen.ok_or("missing variables")?;
            let Formula::Implies(a, b) = premise else {
                return Err(format!("`{premise}` is not an implication"));
            };
            // The side that mentions the eigenvariable, and the one that must not.
            let (open, other) = if rule == Rule::GenImp {
                (&**b, &**a)
            } else {
                (&**a, &**b)
            };
            if other.free_vars().contains(y) {
                return Err(format!("`{y}` occurs free in `{other}`"));
            }
            let phi = subst_term(open, y, &Term::var(x))
                .ok_or_else(|| format!("`{x}` is not free for `{y}`"))?;
            if x != y && phi.free_vars().contains(y) {
                return Err(format!("`{y}` occurs free in `{phi}`"));
            }
            if subst_term(&phi, x, &Term::var(y)).as_ref() != Some(open) {
                return Err(format!("`{open}` is not an instance of `{phi}` at `{y}`"));
            }
            Ok(if rule == Rule::GenImp {
                Formula::implies(other.clone(), Formula::forall(x, phi))
            } else {
                Formula::implies(Formula::exists(x, phi), other.clone())
            })
        }
    }
}

/// Schema matches, rule arities, references and variable conditions.
pub fn check_proof(p: &Proof) -> ProofCheck {
    let mut proved: Vec<Formula> = Vec::with_capacity(p.steps.len());
    for (i, step) in p.steps.iter().enumerate() {
        let bad = |reason: String| ProofCheck::Invalid {
            step: i + 1,
            reason,
        };
        let f = match step {
            Step::Premise(f) => f.clone(),
            Step::Axiom(schema, sub) => match instance(*schema, sub) {
                Ok(f) => f,
                Err(e) => return bad(e.to_string()),
            },
            Step::Rule(rule, refs, eigen) => {
                if let Some(&j) = refs.iter().find(|&&j| j >= i) {
                    return bad(format!("reference to step {} is not earlier", j + 1));
                }
                let premises: Vec<&Formula> = refs.iter().map(|&j| &proved[j]).collect();
                match rule_conclusion(*rule, &premises, eigen.as_ref()) {
                    Ok(f) => f,
                    Err(e) => return bad(e),
                }
            }
        };
        proved.push(f);
    }
    if proved.is_empty() {
        return ProofCheck::Invalid {
            step: 0,
            reason: "empty proof".into(),
        };
    }
    ProofCheck::Valid(proved)
}

/// Realizer of the proof's last formula, built step by step; every
/// intermediate realizer joins the context's pool and antecedent suite.
pub fn extract(p: &Proof, env: &mut ExtractionEnv) -> Result<Realizer, ProofError> {
    let formulas = match check_proof(p) {
        ProofCheck::Valid(fs) => fs,
        ProofCheck::Invalid { step, reason } => return Err(ProofError::Invalid { step, reason }),
    };
    let mut realizers: Vec<Realizer> = Vec::with_capacity(formulas.len());
    for (i, step) in p.steps.iter().enumerate() {
        let r = match step {
            Step::Premise(f) => env
                .premise_realizers
                .get(f)
                .cloned()
                .ok_or_else(|| ProofError::PremiseNotRealized(f.to_string()))?,
            Step::Axiom(schema, sub) => realize_axiom(*schema, sub)?,
            Step::Rule(rule, refs, eigen) => {
                let inputs: Vec<(Formula, Realizer)> = refs
                    .iter()
                    .map(|&j| (formulas[j].clone(), realizers[j].clone()))
                    .collect();
                apply_rule(
                    *rule,
                    &inputs,
                    eigen.as_ref().map(|(x, y)| (x.as_str(), y.as_str())),
                    env,
                )?
            }
        };
        env.ctx.add_realizer(&r);
        if formulas[i].is_sentence() {
            env.ctx.add_antecedent(formulas[i].clone(), r.clone());
        }
        realizers.push(r);
    }
    Ok(realizers.pop().expect("nonempty proof"))
}

// ---------------------------------------------------------------------------
// File format

fn tokens(line: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            c if c.is_whitespace() && !quoted => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if quoted {
        return Err("unterminated quote".into());
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

fn parse_term(s: &str) -> Result<Term, String> {
    if s.starts_with('{') {
        s.parse().map(Term::Const).map_err(|e| format!("{e}"))
    } else if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(Term::var(s))
    } else {
        Err(format!("bad term `{s}`"))
    }
}

fn parse_subst(toks: &[String]) -> Result<Subst, String> {
    let mut sub = Subst::default();
    for tok in toks {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{tok}`"))?;
        let formula = || parse_formula(v).map_err(|e| format!("{k}: {e}"));
        match k {
            "phi" => sub.phi = Some(formula()?),
            "psi" => sub.psi = Some(formula()?),
            "xi" => sub.xi = Some(formula()?),
            "x" => sub.x = Some(v.to_string()),
            "z" => sub.z = Some(v.to_string()),
            "s" => sub.s = Some(parse_term(v)?),
            "t" => sub.t = Some(parse_term(v)?),
            "side" => {
                sub.right = match v {
                    "left" => false,
                    "right" => true,
                    _ => return Err("side is left or right".into()),
                }
            }
            _ => return Err(format!("unknown binding `{k}`")),
        }
    }
    Ok(sub)
}

impl FromStr for Proof {
    type Err = ProofError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut steps = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ProofError::Syntax { line: n + 1, msg };
            let (word, rest) = line
                .split_once(char::is_whitespace)
                .map_or((line, ""), |(w, r)| (w, r.trim()));
            let step_ref = |s: &str| -> Result<usize, ProofError> {
                match s.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(err(format!("bad step reference `{s}`"))),
                }
            };
            let step = match word {
                "premise" => Step::Premise(parse_formula(rest).map_err(|e| err(e.to_string()))?),
                "axiom" => {
                    let toks = tokens(rest).map_err(err)?;
                    let (id, binds) = toks
                        .split_first()
                        .ok_or_else(|| err("missing schema".into()))?;
                    Step::Axiom(id.parse().map_err(err)?, parse_subst(binds).map_err(err)?)
                }
                "mp" | "genimp" | "exelim" => {
                    let toks: Vec<&str> = rest.split_whitespace().collect();
                    match (word, toks.as_slice()) {
                        ("mp", [i, j]) => {
                            Step::Rule(Rule::Mp, vec![step_ref(i)?, step_ref(j)?], None)
                        }
                        ("genimp", [i, x, y]) => Step::Rule(
                            Rule::GenImp,
                            vec![step_ref(i)?],
                            Some((x.to_string(), y.to_string())),
                        ),
                        ("exelim", [i, x, y]) => Step::Rule(
                            Rule::ExElim,
                            vec![step_ref(i)?],
                            Some((x.to_string(), y.to_string())),
                        ),
                        _ => return Err(err(format!("wrong operands for `{word}`"))),
                    }
                }
                other => return Err(err(format!("unknown step kind `{other}`"))),
            };
            steps.push(step);
        }
        Ok(Proof { steps })
    }
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            match step {
                Step::Premise(p) => writeln!(f, "premise {p}")?,
                Step::Axiom(s, sub) => writeln!(f, "axiom {s} {sub}")?,
                Step::Rule(Rule::Mp, refs, _) => writeln!(f, "mp {} {}", refs[0] + 1, refs[1] + 1)?,
                Step::Rule(rule, refs, eigen) => {
                    let (x, y) = eigen.clone().unwrap_or_default();
                    let w = if *rule == Rule::GenImp {
                        "genimp"
                    } else {
                        "exelim"
                    };
                    writeln!(f, "{w} {} {x} {y}", refs[0] + 1)?
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realizability::{check, CheckVerdict};

    fn p(t: &str) -> Formula {
        parse_formula(t).unwrap()
    }

    /// phi -> phi from P1, P2 and two modus ponens steps.
    fn identity_proof(phi: &str) -> Proof {
        let text = format!(
            "axiom P2 phi=\"{phi}\" psi=\"({phi}) -> ({phi})\" xi=\"{phi}\"
axiom P1 phi=\"{phi}\" psi=\"({phi}) -> ({phi})\"
mp 2 1
axiom P1 phi=\"{phi}\" psi=\"{phi}\"
mp 4 3
"
        );
        text.parse().unwrap()
    }

    #[test]
    fn identity_proof_checks_and_extracts() {
        let proof = identity_proof("{} = {}");
        let ProofCheck::Valid(fs) = check_proof(&proof) else {
            panic!("{:?}", check_proof(&proof))
        };
        assert_eq!(fs.last(), Some(&p("{} = {} -> {} = {}")));
        let mut env = ExtractionEnv::new(CheckContext::with_rank(2));
        let r = extract(&proof, &mut env).unwrap();
        assert_eq!(
            check(&r, &p("{} = {} -> {} = {}"), &env.ctx),
            CheckVerdict::Realized
        );
    }

    #[test]
    fn mp_mismatch_and_side_conditions() {
        let bad: Proof = "premise {} = {}\npremise {} in {{}} -> {} = {}\nmp 1 2\n"
            .parse()
            .unwrap();
        assert!(!check_proof(&bad).is_valid());
        let bad: Proof = "premise y = y -> y = y\ngenimp 1 x y\n".parse().unwrap();
        assert!(!check_proof(&bad).is_valid());
        let good: Proof = "premise {} = {} -> y = y\ngenimp 1 x y\n".parse().unwrap();
        let ProofCheck::Valid(fs) = check_proof(&good) else {
            panic!()
        };
        assert_eq!(fs[1], p("{} = {} -> (all x) x = x"));
    }

    #[test]
    fn schema_p1_p4() {
        let ctx = CheckContext::with_rank(2);
        let sub = Subst::formulas("{} = {}", "{} = {}", "");
        let r = realize_axiom(Schema::P1, &sub).unwrap();
        assert_eq!(
            check(&r, &instance(Schema::P1, &sub).unwrap(), &ctx),
            CheckVerdict::Realized
        );
        let sub = Subst::formulas("{} in {{}}", "{} = {}", "");
        let r = realize_axiom(Schema::P4, &sub).unwrap();
        assert_eq!(
            check(&r, &instance(Schema::P4, &sub).unwrap(), &ctx),
            CheckVerdict::Realized
        );
    }

    #[test]
    fn q3_closure() {
        let sub = Subst {
            t: Some(Term::var("x")),
            ..Default::default()
        };
        let f = instance(Schema::Q3, &sub).unwrap();
        assert_eq!(f.universal_closure(), p("(all x) x = x"));
        let r = realize_axiom(Schema::Q3, &sub).unwrap();
        assert_eq!(
            check(&r, &f, &CheckContext::with_rank(2)),
            CheckVerdict::Realized
        );
    }

    #[test]
    fn modus_ponens_and_missing_premise() {
        let phi = p("{} = {}");
        let imp = p("{} = {} -> ({} = {} or {} in {})");
        let env = ExtractionEnv::new(CheckContext::with_rank(2));
        let ri = crate::realizability::canonical_realizer(&imp).unwrap();
        let r = apply_rule(
            Rule::Mp,
            &[(phi.clone(), Realizer::Empty), (imp.clone(), ri)],
            None,
            &env,
        )
        .unwrap();
        assert_eq!(
            check(&r, &p("{} = {} or {} in {}"), &env.ctx),
            CheckVerdict::Realized
        );
        let e = apply_rule(
            Rule::Mp,
            &[(phi.clone(), Realizer::Empty), (imp, Realizer::Empty)],
            None,
            &env,
        );
        assert!(matches!(e, Err(ProofError::PremiseNotRealized(_))));
        let proof: Proof = "premise {} = {}\n".parse().unwrap();
        let mut env = env;
        assert!(matches!(
            extract(&proof, &mut env),
            Err(ProofError::PremiseNotRealized(_))
        ));
    }

    #[test]
    fn file_roundtrip() {
        let proof = identity_proof("{} in {{}}");
        let again: Proof = proof.to_string().parse().unwrap();
        assert_eq!(again, proof);
    }

    fn extracts(text: &str, conclusion: &str) {
        let proof: Proof = text.parse().unwrap();
        let ProofCheck::Valid(fs) = check_proof(&proof) else {
            panic!("{:?}", check_proof(&proof))
        };
        assert_eq!(fs.last(), Some(&p(conclusion)));
        let mut env = ExtractionEnv::new(CheckContext::with_rank(2));
        let r = extract(&proof, &mut env).unwrap();
        assert_eq!(
            check(&r, &p(conclusion), &env.ctx),
            CheckVerdict::Realized,
            "{conclusion}"
        );
    }

    #[test]
    fn generalization_extracts() {
        extracts(
            "axiom P1 phi=\"{} = {}\" psi=\"y in {{}}\"\ngenimp 1 x y\n",
            "{} = {} -> (all x)(x in {{}} -> {} = {})",
        );
        extracts(
            "axiom P1 phi=\"{} in {{}}\" psi=\"y = y\"\ngenimp 1 x y\n",
            "{} in {{}} -> (all x)(x = x -> {} in {{}})",
        );
    }

    #[test]
    fn existential_elimination_extracts() {
        extracts(
            "axiom P4 phi=\"{} = {}\" psi=\"y = y\"\nexelim 1 x y\n",
            "(ex x)({} = {} and x = x) -> {} = {}",
        );
    }

    #[test]
    fn every_schema_realizes_an_instance() {
        let ctx = CheckContext::with_rank(2);
        let f = |phi: &str, psi: &str, xi: &str| Subst::formulas(phi, psi, xi);
        let var = |v: &str| Some(v.to_string());
        let cases = [
            (Schema::P1, f("{} = {}", "{} in {{}}", "")),
            (Schema::P2, f("{} = {}", "{} in {{}}", "{{}} = {{}}")),
            (Schema::P3, f("{} = {}", "{} in {{}}", "")),
            (
                Schema::P4,
                Subst {
                    right: true,
                    ..f("{} = {}", "{} in {{}}", "")
                },
            ),
            (
                Schema::P5,
                Subst {
                    right: true,
                    ..f("{} in {}", "{} = {}", "")
                },
            ),
            (Schema::P6, f("{} = {}", "{} in {}", "{{}} = {{}}")),
            (Schema::P7, f("{} in {}", "{} = {}", "")),
            (Schema::P8, f("{} in {}", "{} = {}", "")),
            (
                Schema::Q1,
                Subst {
                    x: var("x"),
                    t: Some("{{}}".parse().map(Term::Const).unwrap()),
                    ..f("x = x", "", "")
                },
            ),
            (
                Schema::Q1,
                Subst {
                    x: var("x"),
                    t: Some(Term::var("y")),
                    ..f("(ex w in x)(w = w) -> x = x", "", "")
                },
            ),
            (
                Schema::Q2,
                Subst {
                    x: var("x"),
                    t: Some("{}".parse().map(Term::Const).unwrap()),
                    ..f("x = {}", "", "")
                },
            ),
            (
                Schema::Q2,
                Subst {
                    x: var("x"),
                    t: Some(Term::var("y")),
                    ..f("x = x", "", "")
                },
            ),
            (
                Schema::Q3,
                Subst {
                    t: Some(Term::var("x")),
                    ..Default::default()
                },
            ),
            (
                Schema::Q4,
                Subst {
                    z: var("z"),
                    s: Some(Term::var("a")),
                    t: Some(Term::var("b")),
                    ..f("z in {{}}", "", "")
                },
            ),
        ];
        for (schema, sub) in cases {
            let formula = instance(schema, &sub).unwrap();
            let r = realize_axiom(schema, &sub).unwrap();
            assert_eq!(
                check(&r, &formula, &ctx),
                CheckVerdict::Realized,
                "{schema}: {formula}"
            );
        }
        // Realizers are not interchangeable across schemata.
        let sub = f("{} = {}", "{} in {{}}", "");
        let k1 = realize_axiom(Schema::P1, &sub).unwrap();
        let split = Subst {
            right: true,
            ..f("{} = {}", "{} = {} or {} in {}", "")
        };
        assert!(check(&k1, &instance(Schema::P4, &split).unwrap(), &ctx).is_refuted());
        let k4 = realize_axiom(Schema::P4, &sub).unwrap();
        assert!(!check(&k4, &instance(Schema::P3, &sub).unwrap(), &ctx).is_realized());
    }
}
