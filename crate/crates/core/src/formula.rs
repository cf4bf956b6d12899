//! The ∈-language: syntax, classification, and truth over finite data.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::hfset::{parse_hf_at, HfSet};
use crate::setcode::{encode, CodeError, CodeGraph, SetCode};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(HfSet),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Member(Term, Term),
    Equal(Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
    ForAllIn(String, Term, Box<Formula>),
    ExistsIn(String, Term, Box<Formula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaClass {
    Delta0,
    Sigma(u32),
    Pi(u32),
    Unclassified,
}

impl fmt::Display for FormulaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaClass::Delta0 => f.write_str("Delta0"),
            FormulaClass::Sigma(n) => write!(f, "Sigma{n}"),
            FormulaClass::Pi(n) => write!(f, "Pi{n}"),
            FormulaClass::Unclassified => f.write_str("Unclassified"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("evaluation ran out of fuel")]
    FuelExhausted,
    #[error("formula is not Delta0")]
    NotDelta0,
    #[error(transparent)]
    Code(#[from] CodeError),
}

fn bx(f: Formula) -> Box<Formula> {
    Box::new(f)
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(bx(a), bx(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(bx(a), bx(b))
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(bx(a))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(bx(a), bx(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(bx(a), bx(b))
    }
    pub fn forall(x: &str, a: Formula) -> Formula {
        Formula::ForAll(x.into(), bx(a))
    }
    pub fn exists(x: &str, a: Formula) -> Formula {
        Formula::Exists(x.into(), bx(a))
    }
    pub fn forall_in(x: &str, t: Term, a: Formula) -> Formula {
        Formula::ForAllIn(x.into(), t, bx(a))
    }
    pub fn exists_in(x: &str, t: Term, a: Formula) -> Formula {
        Formula::ExistsIn(x.into(), t, bx(a))
    }

    /// `0 = 1`, the falsum that negations are checked against.
    pub fn falsum() -> Formula {
        Formula::Equal(Term::Const(HfSet::nat(0)), Term::Const(HfSet::nat(1)))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::Member(a, b) | Formula::Equal(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::ForAll(x, a) | Formula::Exists(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
            Formula::ForAllIn(x, t, a) | Formula::ExistsIn(x, t, a) => {
                term(t, bound);
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Replaces the free occurrences of `var` by the constant `value`.
    pub fn subst(&self, var: &str, value: &HfSet) -> Formula {
        let t = |t: &Term| match t {
            Term::Var(v) if v == var => Term::Const(value.clone()),
            _ => t.clone(),
        };
        match self {
            Formula::Member(a, b) => Formula::Member(t(a), t(b)),
            Formula::Equal(a, b) => Formula::Equal(t(a), t(b)),
            Formula::And(a, b) => Formula::and(a.subst(var, value), b.subst(var, value)),
            Formula::Or(a, b) => Formula::or(a.subst(var, value), b.subst(var, value)),
            Formula::Implies(a, b) => Formula::implies(a.subst(var, value), b.subst(var, value)),
            Formula::Iff(a, b) => Formula::iff(a.subst(var, value), b.subst(var, value)),
            Formula::Not(a) => Formula::not(a.subst(var, value)),
            Formula::ForAll(x, _) | Formula::Exists(x, _) if x == var => self.clone(),
            Formula::ForAll(x, a) => Formula::forall(x, a.subst(var, value)),
            Formula::Exists(x, a) => Formula::exists(x, a.subst(var, value)),
            Formula::ForAllIn(x, b, a) => {
                let a = if x == var {
                    (**a).clone()
                } else {
                    a.subst(var, value)
                };
                Formula::forall_in(x, t(b), a)
            }
            Formula::ExistsIn(x, b, a) => {
                let a = if x == var {
                    (**a).clone()
                } else {
                    a.subst(var, value)
                };
                Formula::exists_in(x, t(b), a)
            }
        }
    }

    /// Substitutes every binding of `env` at once.
    pub fn subst_all(&self, env: &BTreeMap<String, HfSet>) -> Formula {
        env.iter().fold(self.clone(), |f, (k, v)| f.subst(k, v))
    }

    /// Universal closure, binding free variables in sorted order.
    pub fn universal_closure(&self) -> Formula {
        self.free_vars()
            .into_iter()
            .rev()
            .fold(self.clone(), |f, v| Formula::forall(&v, f))
    }

    pub fn is_delta0(&self) -> bool {
        match self {
            Formula::Member(..) | Formula::Equal(..) => true,
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.is_delta0() && b.is_delta0(),
            Formula::Not(a) | Formula::ForAllIn(_, _, a) | Formula::ExistsIn(_, _, a) => {
                a.is_delta0()
            }
            Formula::ForAll(..) | Formula::Exists(..) => false,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Member(..) | Formula::Equal(..) => 1,
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.size() + b.size(),
            Formula::Not(a)
            | Formula::ForAll(_, a)
            | Formula::Exists(_, a)
            | Formula::ForAllIn(_, _, a)
            | Formula::ExistsIn(_, _, a) => 1 + a.size(),
        }
    }
}

/// Syntactic classification by unbounded quantifier blocks; no prenexing.
pub fn classify(f: &Formula) -> FormulaClass {
    if f.is_delta0() {
        return FormulaClass::Delta0;
    }
    let universal = match f {
        Formula::ForAll(..) => true,
        Formula::Exists(..) => false,
        _ => return FormulaClass::Unclassified,
    };
    let mut body = f;
    while let (Formula::ForAll(_, b), true) | (Formula::Exists(_, b), false) = (body, universal) {
        body = b;
    }
    let below = match classify(body) {
        FormulaClass::Delta0 => 0,
        FormulaClass::Sigma(n) if universal => n,
        FormulaClass::Pi(n) if !universal => n,
        _ => return FormulaClass::Unclassified,
    };
    if universal {
        FormulaClass::Pi(below + 1)
    } else {
        FormulaClass::Sigma(below + 1)
    }
}

// ---------------------------------------------------------------------------
// Evaluation over codes

struct CodeWorld {
    graphs: Vec<CodeGraph>,
    eq_memo: HashMap<(usize, usize, usize, usize), bool>,
    fuel: u64,
    used: u64,
}

type Node = (usize, usize);

impl CodeWorld {
    fn tick(&mut self) -> Result<(), FormulaError> {
        if self.used >= self.fuel {
            return Err(FormulaError::FuelExhausted);
        }
        self.used += 1;
        Ok(())
    }

    fn add(&mut self, c: &SetCode) -> Result<Node, FormulaError> {
        let g = CodeGraph::raw(c)?;
        g.validate()?;
        self.graphs.push(g);
        Ok((self.graphs.len() - 1, 0))
    }

    fn members(&self, n: Node) -> Vec<Node> {
        self.graphs[n.0].members[n.1]
            .iter()
            .map(|&i| (n.0, i))
            .collect()
    }

    /// Extensional equality of two code nodes, by mutual inclusion.
    fn eq(&mut self, a: Node, b: Node) -> Result<bool, FormulaError> {
        if a == b {
            return Ok(true);
        }
        // Within one validated graph, distinct indices are distinct sets.
        if a.0 == b.0 {
            return Ok(false);
        }
        let key = (a.0, a.1, b.0, b.1);
        if let Some(&v) = self.eq_memo.get(&key) {
            return Ok(v);
        }
        self.tick()?;
        let (ma, mb) = (self.members(a), self.members(b));
        let mut v = ma.len() == mb.len();
        if v {
            'outer: for &x in &ma {
                for &y in &mb {
                    if self.eq(x, y)? {
                        continue 'outer;
                    }
                }
                v = false;
                break;
            }
        }
        self.eq_memo.insert(key, v);
        Ok(v)
    }

    fn member(&mut self, a: Node, b: Node) -> Result<bool, FormulaError> {
        for m in self.members(b) {
            if self.eq(a, m)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn node_of(
    world: &mut CodeWorld,
    t: &Term,
    env: &[(String, Node)],
    consts: &mut HashMap<HfSet, Node>,
) -> Result<Node, FormulaError> {
    match t {
        Term::Var(v) => env
            .iter()
            .rev()
            .find(|(k, _)| k == v)
            .map(|(_, n)| *n)
            .ok_or_else(|| FormulaError::UnboundVariable(v.clone())),
        Term::Const(s) => {
            if let Some(&n) = consts.get(s) {
                return Ok(n);
            }
            let n = world.add(&encode(s))?;
            consts.insert(s.clone(), n);
            Ok(n)
        }
    }
}

fn eval_code(
    world: &mut CodeWorld,
    f: &Formula,
    env: &mut Vec<(String, Node)>,
    consts: &mut HashMap<HfSet, Node>,
) -> Result<bool, FormulaError> {
    world.tick()?;
    Ok(match f {
        Formula::Member(a, b) => {
            let (a, b) = (
                node_of(world, a, env, consts)?,
                node_of(world, b, env, consts)?,
            );
            world.member(a, b)?
        }
        Formula::Equal(a, b) => {
            let (a, b) = (
                node_of(world, a, env, consts)?,
                node_of(world, b, env, consts)?,
            );
            world.eq(a, b)?
        }
        Formula::And(a, b) => {
            eval_code(world, a, env, consts)? && eval_code(world, b, env, consts)?
        }
        Formula::Or(a, b) => eval_code(world, a, env, consts)? || eval_code(world, b, env, consts)?,
        Formula::Implies(a, b) => {
            !eval_code(world, a, env, consts)? || eval_code(world, b, env, consts)?
        }
        Formula::Iff(a, b) => {
            eval_code(world, a, env, consts)? == eval_code(world, b, env, consts)?
        }
        Formula::Not(a) => !eval_code(world, a, env, consts)?,
        Formula::ForAllIn(x, t, a) | Formula::ExistsIn(x, t, a) => {
            let universal = matches!(f, Formula::ForAllIn(..));
            let bound = node_of(world, t, env, consts)?;
            let mut result = universal;
            for m in world.members(bound) {
                env.push((x.clone(), m));
                let v = eval_code(world, a, env, consts);
                env.pop();
                if v? != universal {
                    result = !universal;
                    break;
                }
            }
            result
        }
        Formula::ForAll(..) | Formula::Exists(..) => return Err(FormulaError::NotDelta0),
    })
}

/// Truth of a Δ₀ formula with free variables read as coded sets. Returns
/// the truth value and the number of evaluation steps spent.
pub fn eval_bounded_counted(
    f: &Formula,
    env: &BTreeMap<String, SetCode>,
    fuel: u64,
) -> Result<(bool, u64), FormulaError> {
    if !f.is_delta0() {
        return Err(FormulaError::NotDelta0);
    }
    let mut world = CodeWorld {
        graphs: Vec::new(),
        eq_memo: HashMap::new(),
        fuel,
        used: 0,
    };
    let mut nodes = Vec::new();
    for v in f.free_vars() {
        let c = env
            .get(&v)
            .ok_or_else(|| FormulaError::UnboundVariable(v.clone()))?;
        nodes.push((v, world.add(c)?));
    }
    let v = eval_code(&mut world, f, &mut nodes, &mut HashMap::new())?;
    Ok((v, world.used))
}

pub fn eval_bounded(
    f: &Formula,
    env: &BTreeMap<String, SetCode>,
    fuel: u64,
) -> Result<bool, FormulaError> {
    eval_bounded_counted(f, env, fuel).map(|(v, _)| v)
}

// ---------------------------------------------------------------------------
// Brute-force evaluation over explicit sets

fn term_value<'a>(t: &'a Term, env: &'a [(String, HfSet)]) -> Result<&'a HfSet, FormulaError> {
    match t {
        Term::Const(s) => Ok(s),
        Term::Var(v) => env
            .iter()
            .rev()
            .find(|(k, _)| k == v)
            .map(|(_, s)| s)
            .ok_or_else(|| FormulaError::UnboundVariable(v.clone())),
    }
}

fn eval_sets(
    f: &Formula,
    universe: &[HfSet],
    env: &mut Vec<(String, HfSet)>,
) -> Result<bool, FormulaError> {
    Ok(match f {
        Formula::Member(a, b) => term_value(b, env)?.contains(term_value(a, env)?),
        Formula::Equal(a, b) => term_value(a, env)? == term_value(b, env)?,
        Formula::And(a, b) => eval_sets(a, universe, env)? && eval_sets(b, universe, env)?,
        Formula::Or(a, b) => eval_sets(a, universe, env)? || eval_sets(b, universe, env)?,
        Formula::Implies(a, b) => !eval_sets(a, universe, env)? || eval_sets(b, universe, env)?,
        Formula::Iff(a, b) => eval_sets(a, universe, env)? == eval_sets(b, universe, env)?,
        Formula::Not(a) => !eval_sets(a, universe, env)?,
        Formula::ForAll(x, a) | Formula::Exists(x, a) => {
            let universal = matches!(f, Formula::ForAll(..));
            quantify(x, universe.to_vec(), a, universal, universe, env)?
        }
        Formula::ForAllIn(x, t, a) | Formula::ExistsIn(x, t, a) => {
            let universal = matches!(f, Formula::ForAllIn(..));
            let range: Vec<HfSet> = term_value(t, env)?.members().cloned().collect();
            quantify(x, range, a, universal, universe, env)?
        }
    })
}

fn quantify(
    x: &str,
    range: Vec<HfSet>,
    body: &Formula,
    universal: bool,
    universe: &[HfSet],
    env: &mut Vec<(String, HfSet)>,
) -> Result<bool, FormulaError> {
    for v in range {
        env.push((x.to_string(), v));
        let r = eval_sets(body, universe, env);
        env.pop();
        if r? != universal {
            return Ok(!universal);
        }
    }
    Ok(universal)
}

/// Truth with unbounded quantifiers ranging over `universe`.
pub fn eval_over_universe(
    f: &Formula,
    universe: &[HfSet],
    env: &BTreeMap<String, HfSet>,
) -> Result<bool, FormulaError> {
    let mut e: Vec<(String, HfSet)> = env.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    eval_sets(f, universe, &mut e)
}

// ---------------------------------------------------------------------------
// Concrete syntax

fn write_term(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(v),
        Term::Const(s) => write!(f, "{s}"),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, f)
    }
}

impl fmt::Display for Formula {
    /// Binary connectives are always parenthesised, so printing then
    /// parsing reproduces the tree exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Member(a, b) => write!(f, "{a} in {b}"),
            Formula::Equal(a, b) => write!(f, "{a} = {b}"),
            Formula::And(a, b) => write!(f, "({a} and {b})"),
            Formula::Or(a, b) => write!(f, "({a} or {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <-> {b})"),
            Formula::Not(a) => write!(f, "not {a}"),
            Formula::ForAll(x, a) => write!(f, "(all {x}) {a}"),
            Formula::Exists(x, a) => write!(f, "(ex {x}) {a}"),
            Formula::ForAllIn(x, t, a) => write!(f, "(all {x} in {t}) {a}"),
            Formula::ExistsIn(x, t, a) => write!(f, "(ex {x} in {t}) {a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Ident(String),
    Set(HfSet),
    In,
    Eq,
    And,
    Or,
    Not,
    Arrow,
    DArrow,
    All,
    Ex,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |i: usize, msg: &str| FormulaError::Parse {
        col: i + 1,
        msg: msg.to_string(),
    };
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'=' => {
                i += 1;
                Tok::Eq
            }
            b'-' if b.get(i + 1) == Some(&b'>') => {
                i += 2;
                Tok::Arrow
            }
            b'<' if b.get(i + 1) == Some(&b'-') && b.get(i + 2) == Some(&b'>') => {
                i += 3;
                Tok::DArrow
            }
            b'{' => {
                let (s, end) = parse_hf_at(b, i).map_err(|e| err(e.col - 1, &e.msg))?;
                i = end;
                Tok::Set(s)
            }
            b'0'..=b'9' => {
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let n: usize = src[start..i]
                    .parse()
                    .map_err(|_| err(start, "bad numeral"))?;
                if n > 16 {
                    return Err(err(start, "numeral too large"));
                }
                Tok::Set(HfSet::nat(n))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                match &src[start..i] {
                    "in" => Tok::In,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "all" => Tok::All,
                    "ex" => Tok::Ex,
                    w => Tok::Ident(w.to_string()),
                }
            }
            _ => return Err(err(i, "unexpected character")),
        };
        out.push((tok, start));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }
    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1) + 1
    }
    fn fail<T>(&self, msg: &str) -> Result<T, FormulaError> {
        Err(FormulaError::Parse {
            col: self.col(),
            msg: msg.to_string(),
        })
    }
    fn expect(&mut self, t: Tok, what: &str) -> Result<(), FormulaError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&format!("expected {what}"))
        }
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let mut l = self.implies()?;
        while self.peek() == Some(&Tok::DArrow) {
            self.pos += 1;
            l = Formula::iff(l, self.implies()?);
        }
        Ok(l)
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let l = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            return Ok(Formula::implies(l, self.implies()?));
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut l = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            l = Formula::or(l, self.and()?);
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut l = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            l = Formula::and(l, self.unary()?);
        }
        Ok(l)
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Ident(v)) => {
                self.pos += 1;
                Ok(Term::Var(v))
            }
            Some(Tok::Set(s)) => {
                self.pos += 1;
                Ok(Term::Const(s))
            }
            _ => self.fail("expected a variable or set literal"),
        }
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) if matches!(self.peek_at(1), Some(Tok::All | Tok::Ex)) => {
                let universal = self.peek_at(1) == Some(&Tok::All);
                self.pos += 2;
                let x = match self.peek().cloned() {
                    Some(Tok::Ident(x)) => x,
                    _ => return self.fail("expected a variable"),
                };
                self.pos += 1;
                let bound = if self.peek() == Some(&Tok::In) {
                    self.pos += 1;
                    Some(self.term()?)
                } else {
                    None
                };
                self.expect(Tok::RParen, "')'")?;
                let body = self.unary()?;
                Ok(match (universal, bound) {
                    (true, None) => Formula::forall(&x, body),
                    (false, None) => Formula::exists(&x, body),
                    (true, Some(t)) => Formula::forall_in(&x, t, body),
                    (false, Some(t)) => Formula::exists_in(&x, t, body),
                })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.iff()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            _ => {
                let a = self.term()?;
                let rel = self.peek().cloned();
                match rel {
                    Some(Tok::In) => {
                        self.pos += 1;
                        Ok(Formula::Member(a, self.term()?))
                    }
                    Some(Tok::Eq) => {
                        self.pos += 1;
                        Ok(Formula::Equal(a, self.term()?))
                    }
                    _ => self.fail("expected 'in' or '='"),
                }
            }
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return p.fail("trailing input");
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = FormulaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn codes(pairs: &[(&str, &str)]) -> BTreeMap<String, SetCode> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), encode(&v.parse().unwrap())))
            .collect()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            p("(all x in X)(x = {})"),
            Formula::forall_in(
                "x",
                Term::var("X"),
                Formula::Equal(Term::var("x"), Term::Const(HfSet::empty()))
            )
        );
        assert_eq!(
            p("(ex y)(y in x)"),
            Formula::exists("y", Formula::Member(Term::var("y"), Term::var("x")))
        );
        assert!(matches!(
            parse_formula("(all x"),
            Err(FormulaError::Parse { .. })
        ));
    }

    #[test]
    fn precedence() {
        let f = p("not a in b and c = d or e in f -> g = h -> i in j <-> k = l");
        let expect = Formula::iff(
            Formula::implies(
                Formula::or(
                    Formula::and(
                        Formula::not(Formula::Member(Term::var("a"), Term::var("b"))),
                        Formula::Equal(Term::var("c"), Term::var("d")),
                    ),
                    Formula::Member(Term::var("e"), Term::var("f")),
                ),
                Formula::implies(
                    Formula::Equal(Term::var("g"), Term::var("h")),
                    Formula::Member(Term::var("i"), Term::var("j")),
                ),
            ),
            Formula::Equal(Term::var("k"), Term::var("l")),
        );
        assert_eq!(f, expect);
        assert_eq!(p(&f.to_string()), f);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&p("(all x in X)(x = {})")), FormulaClass::Delta0);
        assert_eq!(
            classify(&p("(all x)(ex y)((all z in y)(z in x))")),
            FormulaClass::Pi(2)
        );
        assert_eq!(
            classify(&p("((ex x)(x = x)) and ((all y)(y = y))")),
            FormulaClass::Unclassified
        );
        assert_eq!(classify(&p("(ex x)(ex y) x in y")), FormulaClass::Sigma(1));
        assert_eq!(
            classify(&p("(ex x)(all y)(ex z) x in y")),
            FormulaClass::Sigma(3)
        );
        assert_eq!(classify(&p("not (ex x) x = x")), FormulaClass::Unclassified);
    }

    #[test]
    fn bounded_examples() {
        let env = codes(&[("x", "{{},{{}}}")]);
        assert!(eval_bounded(&p("(ex y in x)(y = {})"), &env, 10_000).unwrap());
        assert!(!eval_bounded(&p("{} in {}"), &BTreeMap::new(), 10_000).unwrap());
        let env = codes(&[("x", "{{}}")]);
        assert!(!eval_bounded(&p("(all y in x)((ex z in y)(z = z))"), &env, 10_000).unwrap());
        assert!(matches!(
            eval_bounded(&p("y in y"), &env, 100),
            Err(FormulaError::UnboundVariable(_))
        ));
        assert!(matches!(
            eval_bounded(&p("(all y in x)(y = y)"), &env, 1),
            Err(FormulaError::FuelExhausted)
        ));
    }

    #[test]
    fn universe_examples() {
        let u2 = crate::hfset::universe(2);
        let none = BTreeMap::new();
        assert!(eval_over_universe(&p("(all x)(x = x)"), &u2, &none).unwrap());
        assert!(eval_over_universe(
            &p("(ex x)((all y in x)(y = y) and (ex z in x)(z = z))"),
            &u2,
            &none
        )
        .unwrap());
        assert!(!eval_over_universe(&p("(ex x)(x in {})"), &u2, &none).unwrap());
    }

    #[test]
    fn substitution_respects_binding() {
        let f = p("x in y and (all x in y) x = x");
        let g = f.subst("x", &HfSet::nat(1));
        assert_eq!(g.free_vars(), ["y".to_string()].into_iter().collect());
        assert_eq!(g, p("{{}} in y and (all x in y) x = x"));
        assert_eq!(p("x in y").universal_closure(), p("(all x)(all y) x in y"));
    }
}
