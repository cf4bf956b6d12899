//! Realizers, their serialization into sets of ordinals, the canonical
//! realizers of true bounded sentences, and the bounded-universe checker.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::formula::{classify, eval_over_universe, Formula, FormulaClass, Term};
use crate::hfset::{universe, HfSet};
use crate::ordset::{project, OrdSet, Side};
use crate::otm::library::{self, godel_text, program_from_godel, program_godel, wire};
use crate::otm::{synth_program, Program, RunResult, DEFAULT_FUEL};
use crate::recognizer::{mutants, test_recognizer, CandidatePool, RecognitionVerdict, Recognizer};
use crate::setcode::{decode, encode, SetCode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizerError {
    #[error("formula is not bounded (Delta_0)")]
    NotDelta0,
    #[error("formula is not true")]
    NotTrue,
    #[error("formula has free variables: {0}")]
    NotClosed(String),
    #[error("malformed serialization: {0}")]
    MalformedSerialization(String),
    #[error("unknown program `{0}`")]
    UnknownProgram(String),
    #[error("realizer text, line {line}: {msg}")]
    Text { line: usize, msg: String },
}

/// A program identified by the Goedel number of its text.
#[derive(Debug, Clone)]
pub struct ProgRef {
    godel: OrdSet,
    program: Arc<Program>,
}

impl ProgRef {
    pub fn new(p: Program) -> Self {
        ProgRef {
            godel: program_godel(&p),
            program: Arc::new(p),
        }
    }

    pub fn library(name: &str) -> Option<Self> {
        Some(ProgRef {
            godel: library::library_godel(name)?,
            program: library::library_program(name)?,
        })
    }

    pub fn from_godel(g: &OrdSet) -> Option<Self> {
        Some(ProgRef {
            godel: g.clone(),
            program: program_from_godel(g)?,
        })
    }

    pub fn godel(&self) -> &OrdSet {
        &self.godel
    }

    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    /// The library name, when this is a library program.
    pub fn name(&self) -> Option<&'static str> {
        library::library_name_of(&self.godel)
    }
}

impl PartialEq for ProgRef {
    fn eq(&self, other: &Self) -> bool {
        self.godel == other.godel
    }
}

impl Eq for ProgRef {}

impl Hash for ProgRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.godel.hash(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Realizer {
    Empty,
    Leaf(OrdSet),
    Pair(Box<Realizer>, Box<Realizer>),
    Choice(u8, Box<Realizer>),
    ProgParam(ProgRef, OrdSet),
}

impl Realizer {
    pub fn pair(a: Realizer, b: Realizer) -> Self {
        Realizer::Pair(Box::new(a), Box::new(b))
    }

    pub fn choice(i: u8, r: Realizer) -> Self {
        Realizer::Choice(i, Box::new(r))
    }

    /// A library program in parameter `q`.
    pub fn lib(name: &str, q: OrdSet) -> Self {
        Realizer::ProgParam(
            ProgRef::library(name).unwrap_or_else(|| panic!("no library program `{name}`")),
            q,
        )
    }

    /// The program recognizing the (packed) empty realizer on any input.
    pub fn p_empty() -> Self {
        Realizer::lib("rc", wire::pack(&serialize(&Realizer::Empty)))
    }

    /// The program that on any input recognizes `r`.
    pub fn constant(r: &Realizer) -> Self {
        Realizer::lib("rc", wire::pack(&serialize(r)))
    }

    pub fn depth(&self) -> usize {
        match self {
            Realizer::Empty | Realizer::Leaf(_) | Realizer::ProgParam(..) => 1,
            Realizer::Pair(a, b) => 1 + a.depth().max(b.depth()),
            Realizer::Choice(_, r) => 1 + r.depth(),
        }
    }

    /// Indented text form. Library programs are written `@name`; other
    /// programs are named by `name_program`.
    pub fn to_text(&self, name_program: &mut dyn FnMut(&ProgRef) -> String) -> String {
        let mut out = String::new();
        self.write_text(0, name_program, &mut out);
        out
    }

    fn write_text(
        &self,
        depth: usize,
        name_program: &mut dyn FnMut(&ProgRef) -> String,
        out: &mut String,
    ) {
        let pad = "  ".repeat(depth);
        match self {
            Realizer::Empty => out.push_str(&format!("{pad}empty\n")),
            Realizer::Leaf(s) => out.push_str(&format!("{pad}leaf {s}\n")),
            Realizer::Pair(a, b) => {
                out.push_str(&format!("{pad}pair\n"));
                a.write_text(depth + 1, name_program, out);
                b.write_text(depth + 1, name_program, out);
            }
            Realizer::Choice(i, r) => {
                out.push_str(&format!("{pad}choice {i}\n"));
                r.write_text(depth + 1, name_program, out);
            }
            Realizer::ProgParam(p, q) => {
                let name = match p.name() {
                    Some(n) => format!("@{n}"),
                    None => name_program(p),
                };
                out.push_str(&format!("{pad}progparam {name} {q}\n"));
            }
        }
    }

    /// Parses the indented text form; `load_program` resolves program
    /// references other than `@name`. Two shorthands are accepted:
    /// `constant` over a child node, and `canonical <sentence>`.
    pub fn parse_text(
        text: &str,
        load_program: &mut dyn FnMut(&str) -> Result<Program, String>,
    ) -> Result<Realizer, RealizerError> {
        let lines: Vec<(usize, usize, &str)> = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let body = l.split('#').next().unwrap_or("");
                let t = body.trim();
                (!t.is_empty()).then(|| (i + 1, body.len() - body.trim_start().len(), t))
            })
            .collect();
        let mut pos = 0;
        let r = parse_node(&lines, &mut pos, load_program)?;
        if let Some((line, ..)) = lines.get(pos) {
            return Err(RealizerError::Text {
                line: *line,
                msg: "trailing node".into(),
            });
        }
        Ok(r)
    }
}

type Line<'a> = (usize, usize, &'a str);

fn parse_node(
    lines: &[Line<'_>],
    pos: &mut usize,
    load: &mut dyn FnMut(&str) -> Result<Program, String>,
) -> Result<Realizer, RealizerError> {
    let &(line, indent, text) = lines.get(*pos).ok_or(RealizerError::Text {
        line: lines.last().map_or(1, |l| l.0),
        msg: "missing node".into(),
    })?;
    *pos += 1;
    let err = |msg: String| RealizerError::Text { line, msg };
    let child = |pos: &mut usize,
                 load: &mut dyn FnMut(&str) -> Result<Program, String>|
     -> Result<Realizer, RealizerError> {
        match lines.get(*pos) {
            Some(&(_, i, _)) if i > indent => parse_node(lines, pos, load),
            _ => Err(RealizerError::Text {
                line,
                msg: "missing child node".into(),
            }),
        }
    };
    let (word, rest) = text
        .split_once(char::is_whitespace)
        .map_or((text, ""), |(w, r)| (w, r.trim()));
    match word {
        "empty" => Ok(Realizer::Empty),
        "leaf" => Ok(Realizer::Leaf(
            rest.parse().map_err(|e| err(format!("{e}")))?,
        )),
        "pair" => {
            let a = child(pos, load)?;
            let b = child(pos, load)?;
            Ok(Realizer::pair(a, b))
        }
        "choice" => {
            let i: u8 = rest
                .parse()
                .ok()
                .filter(|i| *i < 2)
                .ok_or_else(|| err("choice index must be 0 or 1".into()))?;
            Ok(Realizer::choice(i, child(pos, load)?))
        }
        "progparam" => {
            let (prog, q) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("progparam needs a program and a parameter".into()))?;
            let q: OrdSet = q.trim().parse().map_err(|e| err(format!("{e}")))?;
            let p = match prog.strip_prefix('@') {
                Some(name) => ProgRef::library(name)
                    .ok_or_else(|| RealizerError::UnknownProgram(name.to_string()))?,
                None => ProgRef::new(load(prog).map_err(err)?),
            };
            Ok(Realizer::ProgParam(p, q))
        }
        // Shorthands, written back in expanded form.
        "constant" => Ok(Realizer::constant(&child(pos, load)?)),
        "canonical" => {
            let f = crate::formula::parse_formula(rest).map_err(|e| err(format!("{e}")))?;
            canonical_realizer(&f).map_err(|e| err(format!("no canonical realizer: {e}")))
        }
        other => Err(err(format!("unknown node `{other}`"))),
    }
}

impl fmt::Display for Realizer {
    /// One-line summary; long parameters are abbreviated.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Realizer::Empty => f.write_str("empty"),
            Realizer::Leaf(s) => write!(f, "leaf {s}"),
            Realizer::Pair(a, b) => write!(f, "pair({a}, {b})"),
            Realizer::Choice(i, r) => write!(f, "choice{i}({r})"),
            Realizer::ProgParam(p, q) => {
                let name = p.name().map_or_else(
                    || format!("<{} byte program>", p.godel.len()),
                    |n| format!("@{n}"),
                );
                if q.len() <= 8 {
                    write!(f, "pp({name}, {q})")
                } else {
                    write!(f, "pp({name}, <{} elements>)", q.len())
                }
            }
        }
    }
}

/// Tagged interleave: the tag in the even half, the payload in the odd.
pub fn serialize(r: &Realizer) -> OrdSet {
    match r {
        Realizer::Empty => wire::empty(),
        Realizer::Leaf(s) => wire::leaf(s),
        Realizer::Pair(a, b) => wire::pair(&serialize(a), &serialize(b)),
        Realizer::Choice(i, r) => wire::choice(u64::from(*i), &serialize(r)),
        Realizer::ProgParam(p, q) => wire::progparam(&p.godel, q),
    }
}

pub fn deserialize(s: &OrdSet) -> Result<Realizer, RealizerError> {
    let bad = |m: &str| RealizerError::MalformedSerialization(m.to_string());
    let (tag, p) = wire::untag(s).ok_or_else(|| bad("no tag"))?;
    let (a, b) = wire::halves(&p);
    match tag {
        0 if p.is_empty() => Ok(Realizer::Empty),
        0 => Err(bad("empty node with a payload")),
        1 => Ok(Realizer::Leaf(p)),
        2 => Ok(Realizer::pair(deserialize(&a)?, deserialize(&b)?)),
        3 => match a.as_nat() {
            Some(i @ (0 | 1)) => Ok(Realizer::choice(i as u8, deserialize(&b)?)),
            _ => Err(bad("choice index")),
        },
        4 => Ok(Realizer::ProgParam(
            ProgRef::from_godel(&a).ok_or_else(|| bad("program text"))?,
            b,
        )),
        _ => Err(bad("unknown tag")),
    }
}

/// Truth of a sentence, unbounded quantifiers ranging over `universe`.
pub fn truth(f: &Formula, universe: &[HfSet]) -> bool {
    eval_over_universe(f, universe, &BTreeMap::new()).unwrap_or(false)
}

fn closed(f: &Formula, env: &BTreeMap<String, HfSet>) -> Result<Formula, RealizerError> {
    let g = f.subst_all(env);
    if g.is_sentence() {
        Ok(g)
    } else {
        let fv: Vec<String> = g.free_vars().into_iter().collect();
        Err(RealizerError::NotClosed(fv.join(", ")))
    }
}

/// The realizer a bounded-truth procedure produces for a true bounded
/// formula: empty at atomics, pairs and choices at connectives, programs
/// at implications and bounded quantifiers.
pub fn canonical_delta0_realizer(
    f: &Formula,
    env: &BTreeMap<String, HfSet>,
) -> Result<Realizer, RealizerError> {
    if !f.is_delta0() {
        return Err(RealizerError::NotDelta0);
    }
    let g = closed(f, env)?;
    if !truth(&g, &[]) {
        return Err(RealizerError::NotTrue);
    }
    Ok(canon(&g))
}

/// `g` is a true closed bounded sentence.
fn canon(g: &Formula) -> Realizer {
    match g {
        Formula::Member(..) | Formula::Equal(..) => Realizer::Empty,
        Formula::And(a, b) => Realizer::pair(canon(a), canon(b)),
        Formula::Or(a, b) => {
            if truth(a, &[]) {
                Realizer::choice(0, canon(a))
            } else {
                Realizer::choice(1, canon(b))
            }
        }
        Formula::Implies(_, b) => Realizer::lib("bt_imp", godel_text(&b.to_string())),
        Formula::Not(_) => Realizer::lib("bt_imp", godel_text(&Formula::falsum().to_string())),
        Formula::Iff(a, b) => Realizer::pair(
            canon(&Formula::implies((**a).clone(), (**b).clone())),
            canon(&Formula::implies((**b).clone(), (**a).clone())),
        ),
        Formula::ExistsIn(x, Term::Const(t), body) => {
            let a = t
                .members()
                .find(|a| truth(&body.subst(x, a), &[]))
                .expect("a true bounded existential has a witness");
            let inner = Realizer::pair(Realizer::Empty, canon(&body.subst(x, a)));
            let w = wire::ilv(&encode(a).code, &serialize(&inner));
            Realizer::lib("rc", wire::pack(&w))
        }
        Formula::ForAllIn(..) => Realizer::lib("bt_all", godel_text(&g.to_string())),
        Formula::ExistsIn(..) | Formula::ForAll(..) | Formula::Exists(..) => {
            unreachable!("closed bounded sentence")
        }
    }
}

fn bt_supported(f: &Formula) -> bool {
    match f {
        Formula::ForAll(_, b) => bt_supported(b),
        f => f.is_delta0(),
    }
}

/// Canonical realizer of a sentence: a true bounded one, or a block of
/// universals over a bounded body (whose truth is then checked instance by
/// instance, not up front).
pub fn canonical_realizer(f: &Formula) -> Result<Realizer, RealizerError> {
    closed(f, &BTreeMap::new())?;
    if f.is_delta0() {
        return canonical_delta0_realizer(f, &BTreeMap::new());
    }
    match f {
        Formula::ForAll(..) if bt_supported(f) => {
            Ok(Realizer::lib("bt_all", godel_text(&f.to_string())))
        }
        _ => Err(RealizerError::NotDelta0),
    }
}

/// Realizer of a true existential sentence over a bounded (or universal
/// block) body, naming the first witness in `universe`.
pub fn witness_realizer(f: &Formula, universe: &[HfSet]) -> Option<Realizer> {
    let Formula::Exists(x, body) = f else {
        return canonical_realizer(f).ok().filter(|_| truth(f, universe));
    };
    universe.iter().find_map(|u| {
        let inner = witness_realizer(&body.subst(x, u), universe)?;
        let w = wire::ilv(&encode(u).code, &serialize(&inner));
        Some(Realizer::lib("rc", wire::pack(&w)))
    })
}

// ---------------------------------------------------------------------------
// Checking

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckVerdict {
    Realized,
    Refuted { reason: String, path: Vec<String> },
    Unknown { reason: String, path: Vec<String> },
}

impl CheckVerdict {
    pub fn is_realized(&self) -> bool {
        matches!(self, CheckVerdict::Realized)
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, CheckVerdict::Refuted { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            CheckVerdict::Realized => "realized",
            CheckVerdict::Refuted { .. } => "refuted",
            CheckVerdict::Unknown { .. } => "unknown",
        }
    }
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckVerdict::Realized => f.write_str("realized"),
            CheckVerdict::Refuted { reason, path } | CheckVerdict::Unknown { reason, path } => {
                write!(f, "{}: {reason} at /{}", self.label(), path.join("/"))
            }
        }
    }
}

/// What the checker quantifies over: the universe for unbounded
/// quantifiers, the pool searched by recognitions, extra realizers fed to
/// implications, and the fuel of each run.
#[derive(Debug, Clone)]
pub struct CheckContext {
    pub universe: Vec<HfSet>,
    pub pool: CandidatePool,
    pub antecedent_suite: HashMap<Formula, Vec<Realizer>>,
    pub fuel: u64,
    /// Mutants of each proposed witness added to its recognition search.
    pub mutants: usize,
}

impl CheckContext {
    /// Pool seeded with the canonical code of every universe element.
    pub fn new(universe: Vec<HfSet>, fuel: u64) -> Self {
        let pool = universe.iter().map(|u| encode(u).code).collect();
        CheckContext {
            universe,
            pool,
            antecedent_suite: HashMap::new(),
            fuel,
            mutants: 7,
        }
    }

    /// All hereditarily finite sets of rank at most `rank`.
    pub fn with_rank(rank: usize) -> Self {
        Self::new(universe(rank), DEFAULT_FUEL)
    }

    /// Registers a realizer for an antecedent; its serialization (bare and
    /// packed) joins the pool.
    pub fn add_antecedent(&mut self, f: Formula, r: Realizer) {
        self.add_realizer(&r);
        let e = self.antecedent_suite.entry(f).or_default();
        if !e.contains(&r) {
            e.push(r);
        }
    }

    pub fn add_realizer(&mut self, r: &Realizer) {
        let s = serialize(r);
        self.pool.push(wire::pack(&s));
        self.pool.push(s);
    }
}

/// Checks `r` against `f` (its universal closure when `f` has free
/// variables).
pub fn check(r: &Realizer, f: &Formula, ctx: &CheckContext) -> CheckVerdict {
    Checker::new(ctx).check(r, f)
}

/// The set a program-parameter realizer recognizes relative to `rel`,
/// searched as the checker does. Errors carry the verdict a check would
/// report.
pub fn recognize(r: &Realizer, rel: &OrdSet, ctx: &CheckContext) -> Result<OrdSet, CheckVerdict> {
    match r {
        Realizer::ProgParam(p, q) => Checker::new(ctx).recognized(p, q, rel, &[]),
        _ => Err(refuted("not a program-parameter pair", &[])),
    }
}

/// Outcome of one recognition search.
enum Search {
    Found(OrdSet),
    /// Nothing recognized; `true` when that is certain rather than a pool
    /// limitation.
    Missing(String, bool),
    Ambiguous(usize),
    Undetermined(String),
}

struct Suite {
    realizers: Vec<Realizer>,
    /// The antecedent is decidably false, so no realizer exists.
    vacuous: bool,
}

/// A checking session: memoizes verdicts and antecedent suites.
pub struct Checker<'a> {
    ctx: &'a CheckContext,
    memo: RefCell<HashMap<(Realizer, Formula), CheckVerdict>>,
    suites: RefCell<HashMap<Formula, Vec<Realizer>>>,
}

const MAX_PATH: usize = 64;

fn at(path: &[String], step: String) -> Vec<String> {
    let mut p = path.to_vec();
    p.push(step);
    p
}

fn refuted(reason: impl Into<String>, path: &[String]) -> CheckVerdict {
    CheckVerdict::Refuted {
        reason: reason.into(),
        path: path.to_vec(),
    }
}

fn unknown(reason: impl Into<String>, path: &[String]) -> CheckVerdict {
    CheckVerdict::Unknown {
        reason: reason.into(),
        path: path.to_vec(),
    }
}

/// Refuted wins over Unknown, which wins over Realized.
struct Combine(Option<CheckVerdict>);

impl Combine {
    fn new() -> Self {
        Combine(None)
    }

    /// Returns the verdict when it settles the whole conjunction.
    fn add(&mut self, v: CheckVerdict) -> Option<CheckVerdict> {
        match v {
            CheckVerdict::Refuted { .. } => Some(v),
            CheckVerdict::Unknown { .. } => {
                self.0.get_or_insert(v);
                None
            }
            CheckVerdict::Realized => None,
        }
    }

    fn finish(self) -> CheckVerdict {
        self.0.unwrap_or(CheckVerdict::Realized)
    }
}

impl<'a> Checker<'a> {
    pub fn new(ctx: &'a CheckContext) -> Self {
        Checker {
            ctx,
            memo: RefCell::default(),
            suites: RefCell::default(),
        }
    }

    pub fn check(&self, r: &Realizer, f: &Formula) -> CheckVerdict {
        let g = f.universal_closure();
        self.chk(r, &g, &[])
    }

    fn chk(&self, r: &Realizer, f: &Formula, path: &[String]) -> CheckVerdict {
        let key = (r.clone(), f.clone());
        if let Some(v) = self.memo.borrow().get(&key) {
            return v.clone();
        }
        let v = if path.len() > MAX_PATH {
            unknown("nesting too deep", path)
        } else {
            self.clause(r, f, path)
        };
        self.memo.borrow_mut().insert(key, v.clone());
        v
    }

    fn clause(&self, r: &Realizer, f: &Formula, path: &[String]) -> CheckVerdict {
        match f {
            Formula::Member(..) | Formula::Equal(..) => {
                if truth(f, &[]) {
                    CheckVerdict::Realized
                } else {
                    refuted(format!("false atomic `{f}`"), path)
                }
            }
            Formula::And(a, b) => match r {
                Realizer::Pair(ra, rb) => {
                    let mut c = Combine::new();
                    if let Some(v) = c.add(self.chk(ra, a, &at(path, "and.0".into()))) {
                        return v;
                    }
                    if let Some(v) = c.add(self.chk(rb, b, &at(path, "and.1".into()))) {
                        return v;
                    }
                    c.finish()
                }
                _ => refuted("conjunction needs a pair", path),
            },
            Formula::Or(a, b) => match r {
                Realizer::Choice(0, ra) => self.chk(ra, a, &at(path, "or.0".into())),
                Realizer::Choice(_, rb) => self.chk(rb, b, &at(path, "or.1".into())),
                _ => refuted("disjunction needs a choice", path),
            },
            Formula::Not(a) => self.chk(
                r,
                &Formula::implies((**a).clone(), Formula::falsum()),
                &at(path, "not".into()),
            ),
            Formula::Iff(a, b) => {
                let g = Formula::and(
                    Formula::implies((**a).clone(), (**b).clone()),
                    Formula::implies((**b).clone(), (**a).clone()),
                );
                self.chk(r, &g, &at(path, "iff".into()))
            }
            Formula::Implies(a, b) => self.implication(r, a, b, path),
            Formula::Exists(x, body) => self.existential(r, x, body, path),
            Formula::ExistsIn(x, t, body) => {
                let body = Formula::and(Formula::Member(Term::var(x), t.clone()), (**body).clone());
                self.existential(r, x, &body, path)
            }
            Formula::ForAll(x, body) => self.universal(r, x, body, None, path),
            Formula::ForAllIn(x, t, body) => {
                let bound = match t {
                    Term::Const(s) => Some(s),
                    Term::Var(_) => None,
                };
                let body =
                    Formula::implies(Formula::Member(Term::var(x), t.clone()), (**body).clone());
                self.universal(r, x, &body, bound, path)
            }
        }
    }

    fn program(r: &Realizer) -> Option<(&ProgRef, &OrdSet)> {
        match r {
            Realizer::ProgParam(p, q) => Some((p, q)),
            _ => None,
        }
    }

    /// Looks for the set the program recognizes relative to `rel`.
    fn search(&self, p: &ProgRef, q: &OrdSet, rel: &OrdSet) -> Search {
        let fuel = self.ctx.fuel;
        if let Program::Macro(m) = &**p.program() {
            if m.is_compute() {
                // A compute block's recognizer accepts exactly its output,
                // so running the block once settles the search.
                return match synth_program(p.program(), rel, q, fuel) {
                    Ok(RunResult::Halted {
                        output_bit: true,
                        output_set,
                        ..
                    }) => Search::Found(output_set),
                    Ok(RunResult::Halted {
                        output_bit: false, ..
                    }) => Search::Missing("the program recognizes nothing".into(), true),
                    Ok(other) => Search::Undetermined(other.status().into()),
                    Err(e) => Search::Undetermined(e.to_string()),
                };
            }
        }
        let mut pool = self.ctx.pool.clone();
        if let Ok(RunResult::Halted {
            output_bit: true,
            output_set,
            ..
        }) = synth_program(p.program(), rel, q, fuel)
        {
            pool.extend(mutants(&output_set, self.ctx.mutants));
            pool.push(output_set);
        }
        let rec = Recognizer {
            program: p.program().clone(),
            param: q.clone(),
        };
        match test_recognizer(&rec, &pool, Some(rel), fuel) {
            RecognitionVerdict::Recognizes(z) => Search::Found(z),
            RecognitionVerdict::RejectsAll => {
                Search::Missing("no pool candidate accepted".into(), false)
            }
            RecognitionVerdict::Ambiguous(ws) => Search::Ambiguous(ws.len()),
            RecognitionVerdict::Undetermined(why) => Search::Undetermined(why),
        }
    }

    /// Runs a search and reads a realizer off the even half of the result.
    fn recognized(
        &self,
        p: &ProgRef,
        q: &OrdSet,
        rel: &OrdSet,
        path: &[String],
    ) -> Result<OrdSet, CheckVerdict> {
        match self.search(p, q, rel) {
            Search::Found(z) => Ok(z),
            Search::Missing(why, true) => Err(refuted(why, path)),
            Search::Missing(why, false) => Err(unknown(why, path)),
            Search::Ambiguous(n) => Err(refuted(format!("{n} candidates accepted"), path)),
            Search::Undetermined(why) => Err(unknown(why, path)),
        }
    }

    fn implication(&self, r: &Realizer, a: &Formula, b: &Formula, path: &[String]) -> CheckVerdict {
        let Some((p, q)) = Self::program(r) else {
            return refuted("implication needs a program-parameter pair", path);
        };
        let suite = self.suite(a, path);
        if suite.realizers.is_empty() {
            return if suite.vacuous {
                CheckVerdict::Realized
            } else {
                unknown(
                    format!("no realizer of the antecedent `{a}` available"),
                    path,
                )
            };
        }
        let mut c = Combine::new();
        for (k, ra) in suite.realizers.iter().enumerate() {
            let here = at(path, format!("->[{k}]"));
            let rel = wire::pack(&serialize(ra));
            let v = match self.recognized(p, q, &rel, &here) {
                Ok(z) => match deserialize(&project(&z, Side::Even)) {
                    Ok(rb) => self.chk(&rb, b, &here),
                    Err(e) => refuted(format!("recognized set is not a realizer: {e}"), &here),
                },
                Err(v) => v,
            };
            if let Some(v) = c.add(v) {
                return v;
            }
        }
        c.finish()
    }

    fn existential(&self, r: &Realizer, x: &str, body: &Formula, path: &[String]) -> CheckVerdict {
        let Some((p, q)) = Self::program(r) else {
            return refuted("existential needs a program-parameter pair", path);
        };
        let here = at(path, "ex".into());
        let z = match self.recognized(p, q, &OrdSet::new(), &here) {
            Ok(z) => z,
            Err(v) => return v,
        };
        let (c, rs) = wire::halves(&project(&z, Side::Even));
        let a = match SetCode::from_ordset(c).and_then(|c| decode(&c)) {
            Ok(a) => a,
            Err(e) => return refuted(format!("witness is not a set code: {e}"), &here),
        };
        match deserialize(&rs) {
            Ok(ra) => self.chk(&ra, &body.subst(x, &a), &at(path, format!("ex[{a}]"))),
            Err(e) => refuted(format!("witness realizer: {e}"), &here),
        }
    }

    fn universal(
        &self,
        r: &Realizer,
        x: &str,
        body: &Formula,
        bound: Option<&HfSet>,
        path: &[String],
    ) -> CheckVerdict {
        let Some((p, q)) = Self::program(r) else {
            return refuted("universal needs a program-parameter pair", path);
        };
        let mut range: Vec<HfSet> = self.ctx.universe.clone();
        if let Some(t) = bound {
            // Members of the bound are always covered; the rest of the
            // universe only meets the vacuous antecedent.
            for m in t.members() {
                if !range.contains(m) {
                    range.push(m.clone());
                }
            }
        }
        let mut c = Combine::new();
        for u in &range {
            let here = at(path, format!("all[{u}]"));
            let v = match self.recognized(p, q, &encode(u).code, &here) {
                Ok(z) => match deserialize(&project(&z, Side::Even)) {
                    Ok(ru) => self.chk(&ru, &body.subst(x, u), &here),
                    Err(e) => refuted(format!("recognized set is not a realizer: {e}"), &here),
                },
                Err(v) => v,
            };
            if let Some(v) = c.add(v) {
                return v;
            }
        }
        c.finish()
    }

    /// Realizers fed to an implication with antecedent `a`: registered
    /// ones that check out, the canonical one when `a` is a true bounded
    /// sentence or a universal block over a bounded body true throughout
    /// the universe.
    fn suite(&self, a: &Formula, path: &[String]) -> Suite {
        let class = classify(a);
        let vacuous = match class {
            FormulaClass::Delta0 => !truth(a, &[]),
            FormulaClass::Pi(1) => !truth(a, &self.ctx.universe),
            _ => false,
        };
        if let Some(rs) = self.suites.borrow().get(a) {
            return Suite {
                realizers: rs.clone(),
                vacuous,
            };
        }
        let mut realizers = Vec::new();
        if let Some(explicit) = self.ctx.antecedent_suite.get(a) {
            for r in explicit {
                if self.chk(r, a, &at(path, "antecedent".into())).is_realized() {
                    realizers.push(r.clone());
                }
            }
        }
        if !vacuous {
            let canonical = match class {
                FormulaClass::Delta0 => canonical_realizer(a).ok(),
                FormulaClass::Pi(_) if bt_supported(a) && truth(a, &self.ctx.universe) => {
                    canonical_realizer(a).ok()
                }
                FormulaClass::Sigma(_) if a.is_sentence() => {
                    witness_realizer(a, &self.ctx.universe)
                }
                _ => None,
            };
            if let Some(r) = canonical {
                if !realizers.contains(&r) {
                    realizers.push(r);
                }
            }
        }
        self.suites
            .borrow_mut()
            .insert(a.clone(), realizers.clone());
        Suite { realizers, vacuous }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn p(t: &str) -> Formula {
        parse_formula(t).unwrap()
    }

    fn ctx() -> CheckContext {
        CheckContext::with_rank(2)
    }

    #[test]
    fn check_examples() {
        assert_eq!(
            check(&Realizer::Empty, &p("{} = {}"), &ctx()),
            CheckVerdict::Realized
        );
        let f = p("({} = {}) or ({} in {})");
        assert_eq!(
            check(&Realizer::choice(0, Realizer::Empty), &f, &ctx()),
            CheckVerdict::Realized
        );
        for r in [
            Realizer::Empty,
            Realizer::p_empty(),
            Realizer::choice(1, Realizer::Empty),
        ] {
            assert!(check(&r, &p("{} in {}"), &ctx()).is_refuted());
        }
    }

    #[test]
    fn serialization_examples() {
        for r in [
            Realizer::Empty,
            Realizer::pair(Realizer::Empty, Realizer::Empty),
            Realizer::p_empty(),
        ] {
            assert_eq!(deserialize(&serialize(&r)), Ok(r));
        }
        assert_eq!(serialize(&Realizer::Empty), OrdSet::from_nats([0]));
        // {1} has tag half {} (not a singleton natural).
        assert!(matches!(
            deserialize(&OrdSet::from_nats([1])),
            Err(RealizerError::MalformedSerialization(_))
        ));
    }

    #[test]
    fn canonical_examples() {
        let none = BTreeMap::new();
        assert_eq!(
            canonical_delta0_realizer(&p("{} = {}"), &none),
            Ok(Realizer::Empty)
        );
        assert_eq!(
            canonical_delta0_realizer(&p("{} in {}"), &none),
            Err(RealizerError::NotTrue)
        );
        let env = BTreeMap::from([("x".to_string(), HfSet::nat(1))]);
        let f = p("(ex y in x)(y = {})");
        let r = canonical_delta0_realizer(&f, &env).unwrap();
        assert!(matches!(r, Realizer::ProgParam(..)));
        assert_eq!(
            check(&r, &f.subst_all(&env), &ctx()),
            CheckVerdict::Realized
        );
    }

    #[test]
    fn implications_and_bounded_universals() {
        let c = ctx();
        for t in [
            "{} = {} -> {} in {{}}",
            "(all x in {{}, {{}}})(x in {{}, {{}}})",
            "not ({} in {})",
            "({} = {}) <-> ({} in {{}})",
        ] {
            let f = p(t);
            let r = canonical_realizer(&f).unwrap();
            assert_eq!(check(&r, &f, &c), CheckVerdict::Realized, "{t}");
        }
        // A false consequent behind a true antecedent is refuted.
        let f = p("{} = {} -> {} in {}");
        assert!(check(&Realizer::lib("bt_imp", godel_text("{} in {}")), &f, &c).is_refuted());
    }

    #[test]
    fn pi1_with_p_empty() {
        let c = ctx();
        assert_eq!(
            check(&Realizer::p_empty(), &p("(all x)(x = x)"), &c),
            CheckVerdict::Realized
        );
        assert!(check(&Realizer::p_empty(), &p("(all x)(x in x)"), &c).is_refuted());
    }

    #[test]
    fn text_roundtrip() {
        let r = Realizer::pair(
            Realizer::choice(1, Realizer::Leaf(OrdSet::from_nats([3]))),
            Realizer::p_empty(),
        );
        let t = r.to_text(&mut |_| unreachable!());
        let back = Realizer::parse_text(&t, &mut |_| Err("no files".into())).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn text_shorthands_expand() {
        let load = &mut |_: &str| Err("no files".to_string());
        let c = Realizer::parse_text("constant\n  choice 0\n    empty\n", load).unwrap();
        assert_eq!(c, Realizer::constant(&Realizer::choice(0, Realizer::Empty)));
        let k = Realizer::parse_text("canonical {} = {} or {} in {}\n", load).unwrap();
        assert_eq!(k, Realizer::choice(0, Realizer::Empty));
        assert!(Realizer::parse_text("canonical {} in {}\n", load).is_err());
    }
}
