//! Recognizers judged against finite candidate pools: the verdicts, the
//! projections of a recognized set, and packaging of recognition chains.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::ordinal::Ordinal;
use crate::ordset::{interleave, pack_right, project, OrdSet, Side};
use crate::otm::library::{self, program_godel, wire};
use crate::otm::micro::{assemble_micro, EQ_CONST_MICRO, EQ_SECTION_MICRO};
use crate::otm::{run_program, Program, RunResult};

/// A program together with its parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Recognizer {
    pub program: Arc<Program>,
    pub param: OrdSet,
}

impl Recognizer {
    pub fn new(program: Program, param: OrdSet) -> Self {
        Recognizer {
            program: Arc::new(program),
            param,
        }
    }

    /// Accepts exactly the oracle `c`. Positions are compared below the
    /// first limit only, so sets differing at transfinite elements are
    /// not told apart.
    pub fn eq_const(c: OrdSet) -> Self {
        Self::new(
            Program::Micro(assemble_micro(EQ_CONST_MICRO).expect("built-in table")),
            c,
        )
    }

    /// Accepts exactly `c` as the candidate half of a relative oracle.
    pub fn eq_section(c: OrdSet) -> Self {
        Self::new(
            Program::Micro(assemble_micro(EQ_SECTION_MICRO).expect("built-in table")),
            c,
        )
    }

    pub fn library(name: &str, param: OrdSet) -> Option<Self> {
        Some(Recognizer {
            program: library::library_program(name)?,
            param,
        })
    }

    /// The program-parameter form in which recognizers travel inside sets.
    pub fn serialize(&self) -> OrdSet {
        wire::progparam(&program_godel(&self.program), &self.param)
    }
}

/// Duplicate-free list of oracle candidates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidatePool {
    items: Vec<OrdSet>,
    seen: HashSet<OrdSet>,
}

impl CandidatePool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `x` unless already present; reports whether it was new.
    pub fn push(&mut self, x: OrdSet) -> bool {
        if self.seen.insert(x.clone()) {
            self.items.push(x);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, x: &OrdSet) -> bool {
        self.seen.contains(x)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, OrdSet> {
        self.items.iter()
    }

    /// `w` together with `n` single-element mutations of it.
    pub fn with_mutants(w: &OrdSet, n: usize) -> Self {
        let mut p = CandidatePool::new();
        p.push(w.clone());
        p.extend(mutants(w, n));
        p
    }
}

impl Extend<OrdSet> for CandidatePool {
    fn extend<T: IntoIterator<Item = OrdSet>>(&mut self, iter: T) {
        for x in iter {
            self.push(x);
        }
    }
}

impl FromIterator<OrdSet> for CandidatePool {
    fn from_iter<T: IntoIterator<Item = OrdSet>>(iter: T) -> Self {
        let mut p = CandidatePool::new();
        p.extend(iter);
        p
    }
}

impl<'a> IntoIterator for &'a CandidatePool {
    type Item = &'a OrdSet;
    type IntoIter = std::slice::Iter<'a, OrdSet>;
    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

impl fmt::Display for CandidatePool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.items {
            writeln!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for CandidatePool {
    type Err = crate::ordinal::OrdinalError;

    /// One set literal per line; blank lines and `#` comments are skipped.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect()
    }
}

/// `n` distinct sets, each differing from `w` in exactly one element:
/// the small naturals are toggled in turn, then the largest element of `w`
/// is moved up by one.
pub fn mutants(w: &OrdSet, n: usize) -> Vec<OrdSet> {
    let mut out = Vec::with_capacity(n);
    if n > 0 {
        if let Some(top) = w.max() {
            let mut m = w.clone();
            m.remove(&top.clone());
            m.insert(top.succ());
            if m != *w {
                out.push(m);
            }
        }
    }
    let mut i = 0u64;
    while out.len() < n {
        let mut m = w.clone();
        let o = Ordinal::Fin(i);
        if !m.remove(&o) {
            m.insert(o);
        }
        if !out.contains(&m) {
            out.push(m);
        }
        i += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecognitionVerdict {
    Recognizes(OrdSet),
    RejectsAll,
    Ambiguous(Vec<OrdSet>),
    Undetermined(String),
}

impl fmt::Display for RecognitionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecognitionVerdict::Recognizes(w) => write!(f, "recognizes {w}"),
            RecognitionVerdict::RejectsAll => f.write_str("rejects-all"),
            RecognitionVerdict::Ambiguous(ws) => write!(f, "ambiguous {}", ws.len()),
            RecognitionVerdict::Undetermined(why) => write!(f, "undetermined {why}"),
        }
    }
}

/// The oracle for `candidate`, relative to `rel` when there is one.
pub fn oracle_for(relative_to: Option<&OrdSet>, candidate: &OrdSet) -> OrdSet {
    match relative_to {
        Some(rel) => interleave(rel, candidate),
        None => candidate.clone(),
    }
}

/// Runs `r` on every candidate and reduces the accept bits to a verdict.
/// Any run that does not halt cleanly makes the verdict undetermined.
pub fn test_recognizer(
    r: &Recognizer,
    pool: &CandidatePool,
    relative_to: Option<&OrdSet>,
    fuel: u64,
) -> RecognitionVerdict {
    assert!(fuel > 0, "fuel must be positive");
    let mut accepted = Vec::new();
    for cand in pool {
        let oracle = oracle_for(relative_to, cand);
        match run_program(&r.program, &oracle, &r.param, fuel) {
            Ok(RunResult::Halted {
                output_bit: true, ..
            }) => accepted.push(cand.clone()),
            Ok(RunResult::Halted {
                output_bit: false, ..
            }) => {}
            Ok(other) => {
                return RecognitionVerdict::Undetermined(format!("{} on {cand}", other.status()))
            }
            Err(e) => return RecognitionVerdict::Undetermined(format!("{e} on {cand}")),
        }
    }
    match accepted.len() {
        0 => RecognitionVerdict::RejectsAll,
        1 => RecognitionVerdict::Recognizes(accepted.pop().expect("one element")),
        _ => RecognitionVerdict::Ambiguous(accepted),
    }
}

/// `(rho_0, rho_1)`: the halves of the set `r` recognizes, or the verdict
/// explaining why there is none.
pub fn rho(
    r: &Recognizer,
    pool: &CandidatePool,
    fuel: u64,
) -> Result<(OrdSet, OrdSet), RecognitionVerdict> {
    match test_recognizer(r, pool, None, fuel) {
        RecognitionVerdict::Recognizes(z) => Ok((project(&z, Side::Even), project(&z, Side::Odd))),
        v => Err(v),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("empty chain")]
    EmptyChain,
}

/// Packages a chain `x_0 <= x_1 <= ... <= x_{k-1} <= base`, where link `i`
/// recognizes `x_i` relative to `x_{i+1}` (the last link relative to
/// `base`, or absolutely when `base` is `None`). Returns the composite and
/// `z = x_0 (+) (x_1 (+) (... (+) (x_{k-1} (+) base)))`; the composite
/// accepts exactly `z` relative to the base (`{}` when absent), and the
/// even half of `z` is the target `x_0`.
pub fn chain_package(
    links: &[(Recognizer, OrdSet)],
    base: Option<&OrdSet>,
) -> Result<(Recognizer, OrdSet), ChainError> {
    if links.is_empty() {
        return Err(ChainError::EmptyChain);
    }
    let b = base.cloned().unwrap_or_default();
    let mut parts: Vec<OrdSet> = links.iter().map(|(_, x)| x.clone()).collect();
    parts.push(b);
    let z = pack_right(&parts);
    let flag = OrdSet::bit(base.is_none());
    let list = wire::list(links.iter().map(|(r, _)| r.serialize()));
    let composite =
        Recognizer::library("chain", interleave(&flag, &list)).expect("chain is in the library");
    Ok((composite, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> OrdSet {
        t.parse().unwrap()
    }

    fn pool(items: &[&str]) -> CandidatePool {
        items.iter().map(|t| s(t)).collect()
    }

    #[test]
    fn eq_constant_examples() {
        let r = Recognizer::eq_const(s("{2}"));
        assert_eq!(
            test_recognizer(&r, &pool(&["{}", "{2}", "{3}"]), None, 10_000),
            RecognitionVerdict::Recognizes(s("{2}"))
        );
        let rej = Recognizer::library("reject", OrdSet::new()).unwrap();
        assert_eq!(
            test_recognizer(&rej, &pool(&["{}", "{2}"]), None, 100),
            RecognitionVerdict::RejectsAll
        );
        let acc = Recognizer::new(crate::otm::assemble("halt 1").unwrap(), OrdSet::new());
        assert!(
            matches!(test_recognizer(&acc, &pool(&["{}", "{2}"]), None, 100), RecognitionVerdict::Ambiguous(w) if w.len() == 2)
        );
    }

    #[test]
    fn rho_examples() {
        let z = interleave(&s("{1}"), &s("{4}"));
        let r = Recognizer::eq_const(z.clone());
        let mut p = CandidatePool::with_mutants(&z, 7);
        p.push(OrdSet::new());
        assert_eq!(rho(&r, &p, 10_000), Ok((s("{1}"), s("{4}"))));
        let absent = Recognizer::eq_const(s("{9}"));
        assert_eq!(
            rho(&absent, &pool(&["{}", "{1}"]), 10_000),
            Err(RecognitionVerdict::RejectsAll)
        );
        let acc = Recognizer::new(crate::otm::assemble("halt 1").unwrap(), OrdSet::new());
        assert!(matches!(
            rho(&acc, &pool(&["{}", "{1}"]), 100),
            Err(RecognitionVerdict::Ambiguous(_))
        ));
    }

    #[test]
    fn mutants_are_distinct_single_changes() {
        let w = s("{0, 3, w}");
        let ms = mutants(&w, 7);
        assert_eq!(ms.len(), 7);
        let all: HashSet<_> = ms.iter().cloned().chain([w.clone()]).collect();
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn single_link_chain() {
        let (c, z) = chain_package(&[(Recognizer::eq_const(s("{5}")), s("{5}"))], None).unwrap();
        assert_eq!(project(&z, Side::Even), s("{5}"));
        let p = CandidatePool::with_mutants(&z, 7);
        assert_eq!(
            test_recognizer(&c, &p, Some(&OrdSet::new()), 100_000),
            RecognitionVerdict::Recognizes(z)
        );
        assert_eq!(chain_package(&[], None), Err(ChainError::EmptyChain));
    }

    #[test]
    fn two_link_chain() {
        let links = [
            (Recognizer::eq_section(s("{1}")), s("{1}")),
            (Recognizer::eq_section(s("{2}")), s("{2}")),
        ];
        let base = OrdSet::new();
        let (c, z) = chain_package(&links, Some(&base)).unwrap();
        assert_eq!(project(&z, Side::Even), s("{1}"));
        let p = CandidatePool::with_mutants(&z, 7);
        assert_eq!(p.len(), 8);
        assert_eq!(
            test_recognizer(&c, &p, Some(&base), 100_000),
            RecognitionVerdict::Recognizes(z)
        );
    }
}
