//! Codes of hereditarily finite sets as sets of ordinals.
//!
//! A code for `x` comes from a bijection `f : alpha -> tc({x})` with
//! `f(0) = x`; it is the set `{ p(i, j) : f(i) in f(j) }` where `p` is the
//! Goedel pairing.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::hfset::HfSet;
use crate::ordinal::{pair_nat, unpair_nat, Ordinal};
use crate::ordset::OrdSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("ill-formed code: {0}")]
    IllFormed(String),
    #[error("index {index} out of range for domain {domain}")]
    IndexOutOfRange { index: Ordinal, domain: Ordinal },
    #[error("code file: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetCode {
    pub code: OrdSet,
    pub domain_size: Ordinal,
}

impl SetCode {
    pub fn new(code: OrdSet, domain_size: Ordinal) -> Self {
        SetCode { code, domain_size }
    }

    /// Reads a bare code, taking the domain to be one past the largest
    /// index that occurs (1 for the empty code).
    pub fn from_ordset(code: OrdSet) -> Result<Self, CodeError> {
        let mut top = 0u64;
        for o in code.iter() {
            let n = o
                .as_finite()
                .ok_or_else(|| CodeError::IllFormed(format!("transfinite pair {o}")))?;
            let (i, j) = unpair_nat(n);
            top = top.max(i).max(j);
        }
        let domain = if code.is_empty() { 1 } else { top + 1 };
        Ok(SetCode {
            code,
            domain_size: Ordinal::Fin(domain),
        })
    }
}

impl fmt::Display for SetCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "domain={}", self.domain_size)?;
        write!(f, "{}", self.code)
    }
}

impl FromStr for SetCode {
    type Err = CodeError;

    /// Code file format: optional `domain=<ordinal>` header line followed by
    /// an OrdSet literal.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut domain = None;
        let mut body = String::new();
        for line in s.lines() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if let Some(d) = t.strip_prefix("domain=") {
                domain = Some(
                    d.trim()
                        .parse::<Ordinal>()
                        .map_err(|e| CodeError::Syntax(e.to_string()))?,
                );
            } else {
                body.push_str(t);
            }
        }
        let code: OrdSet = body
            .parse()
            .map_err(|e: crate::ordinal::OrdinalError| CodeError::Syntax(e.to_string()))?;
        match domain {
            Some(d) => Ok(SetCode::new(code, d)),
            None => SetCode::from_ordset(code),
        }
    }
}

/// The membership relation read off a code, before any well-formedness
/// checks: `members[j]` lists every `i` with `f(i) in f(j)`.
#[derive(Debug, Clone)]
pub struct CodeGraph {
    pub members: Vec<Vec<usize>>,
}

impl CodeGraph {
    pub fn raw(c: &SetCode) -> Result<Self, CodeError> {
        let n = c
            .domain_size
            .as_finite()
            .ok_or_else(|| CodeError::IllFormed("infinite domain".into()))?
            as usize;
        if n == 0 {
            return Err(CodeError::IllFormed("empty domain".into()));
        }
        let mut members = vec![Vec::new(); n];
        for o in c.code.iter() {
            let p = o
                .as_finite()
                .ok_or_else(|| CodeError::IllFormed(format!("transfinite pair {o}")))?;
            let (i, j) = unpair_nat(p);
            if i as usize >= n || j as usize >= n {
                return Err(CodeError::IllFormed(format!(
                    "pair ({i},{j}) leaves the domain {n}"
                )));
            }
            members[j as usize].push(i as usize);
        }
        Ok(CodeGraph { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Indices reachable from `root` (root included), in ascending order.
    pub fn reachable(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(j) = stack.pop() {
            for &i in &self.members[j] {
                if !seen[i] {
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
        (0..self.len()).filter(|&i| seen[i]).collect()
    }

    /// Indices in an order where members precede the sets containing them.
    /// Fails on a membership cycle.
    fn bottom_up(&self) -> Result<Vec<usize>, CodeError> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.len()];
        let mut order = Vec::with_capacity(self.len());
        for start in 0..self.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some(&mut (node, ref mut k)) = stack.last_mut() {
                if *k < self.members[node].len() {
                    let child = self.members[node][*k];
                    *k += 1;
                    match state[child] {
                        0 => {
                            state[child] = 1;
                            stack.push((child, 0));
                        }
                        1 => return Err(CodeError::IllFormed("membership cycle".into())),
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                    order.push(node);
                    stack.pop();
                }
            }
        }
        Ok(order)
    }

    /// Full validation: well-founded, every index reachable from 0, index 0
    /// is nobody's member, and distinct indices denote distinct sets.
    /// Returns the set denoted by each index.
    pub fn validate(&self) -> Result<Vec<HfSet>, CodeError> {
        let order = self.bottom_up()?;
        if self.members.iter().any(|m| m.contains(&0)) {
            return Err(CodeError::IllFormed(
                "the coded set occurs as a member".into(),
            ));
        }
        if self.reachable(0).len() != self.len() {
            return Err(CodeError::IllFormed(
                "index unreachable from the root".into(),
            ));
        }
        let mut value: Vec<Option<HfSet>> = vec![None; self.len()];
        for j in order {
            let set = HfSet::from_members(
                self.members[j]
                    .iter()
                    .map(|&i| value[i].clone().expect("bottom-up order")),
            );
            value[j] = Some(set);
        }
        let value: Vec<HfSet> = value.into_iter().map(Option::unwrap).collect();
        let distinct: BTreeSet<&HfSet> = value.iter().collect();
        if distinct.len() != value.len() {
            return Err(CodeError::IllFormed(
                "not extensional: two indices code the same set".into(),
            ));
        }
        Ok(value)
    }

    /// Re-indexes the sub-relation below `root`: `root` becomes 0, the other
    /// reachable indices keep their relative order.
    pub fn restrict(&self, root: usize) -> SetCode {
        let mut idx: Vec<usize> = self.reachable(root);
        idx.retain(|&i| i != root);
        idx.insert(0, root);
        let pos: HashMap<usize, u64> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| (i, k as u64))
            .collect();
        let code = idx
            .iter()
            .flat_map(|&j| {
                let pos = &pos;
                self.members[j]
                    .iter()
                    .map(move |&i| Ordinal::Fin(pair_nat(pos[&i], pos[&j])))
            })
            .collect();
        SetCode::new(code, Ordinal::Fin(idx.len() as u64))
    }
}

/// Canonical code: index 0 is `x`; the rest of `tc({x})` follows by
/// decreasing rank, ties broken by the canonical codes of the elements.
pub fn encode(x: &HfSet) -> SetCode {
    let mut memo = HashMap::new();
    encode_memo(x, &mut memo)
}

fn encode_memo(x: &HfSet, memo: &mut HashMap<HfSet, SetCode>) -> SetCode {
    if let Some(c) = memo.get(x) {
        return c.clone();
    }
    let mut elems: Vec<HfSet> = x.transitive_closure().members().cloned().collect();
    let mut keyed: Vec<(usize, OrdSet, HfSet)> = elems
        .drain(..)
        .map(|e| {
            let c = encode_memo(&e, memo).code;
            (e.rank(), c, e)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let mut order: Vec<&HfSet> = vec![x];
    order.extend(keyed.iter().map(|k| &k.2));
    let index: BTreeMap<&HfSet, u64> = order
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, i as u64))
        .collect();
    let code = order
        .iter()
        .flat_map(|s| {
            let j = index[s];
            let index = &index;
            s.members()
                .map(move |m| Ordinal::Fin(pair_nat(index[m], j)))
        })
        .collect();
    let c = SetCode::new(code, Ordinal::Fin(order.len() as u64));
    memo.insert(x.clone(), c.clone());
    c
}

/// Any valid code (not only canonical ones) decodes.
pub fn decode(c: &SetCode) -> Result<HfSet, CodeError> {
    let g = CodeGraph::raw(c)?;
    Ok(g.validate()?.swap_remove(0))
}

/// The code of the element at `x_index`, derived from `c_y` by restriction
/// and re-enumeration.
pub fn derived_code(c_y: &SetCode, x_index: &Ordinal) -> Result<SetCode, CodeError> {
    let g = CodeGraph::raw(c_y)?;
    g.validate()?;
    let i = x_index
        .as_finite()
        .filter(|&i| (i as usize) < g.len())
        .ok_or_else(|| CodeError::IndexOutOfRange {
            index: x_index.clone(),
            domain: c_y.domain_size.clone(),
        })?;
    Ok(g.restrict(i as usize))
}

/// Derived codes of the members of the coded set, in index order.
pub fn member_codes(c: &SetCode) -> Result<Vec<SetCode>, CodeError> {
    let g = CodeGraph::raw(c)?;
    g.validate()?;
    let mut idx = g.members[0].clone();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| g.restrict(i)).collect())
}

pub fn code_eq(c: &SetCode, d: &SetCode) -> Result<bool, CodeError> {
    Ok(decode(c)? == decode(d)?)
}

/// A code for `tc(decode(c))`: adjoin a fresh top index holding every
/// non-root index, then re-root at it.
pub fn tc_code(c: &SetCode) -> Result<SetCode, CodeError> {
    let mut g = CodeGraph::raw(c)?;
    g.validate()?;
    let top = g.len();
    g.members.push((1..top).collect());
    Ok(g.restrict(top))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hf(s: &str) -> HfSet {
        s.parse().unwrap()
    }

    fn code_of(pairs: &[(u64, u64)], n: u64) -> SetCode {
        SetCode::new(
            pairs
                .iter()
                .map(|&(i, j)| Ordinal::Fin(pair_nat(i, j)))
                .collect(),
            Ordinal::Fin(n),
        )
    }

    #[test]
    fn encode_examples() {
        let e = encode(&hf("{}"));
        assert!(e.code.is_empty());
        assert_eq!(e.domain_size, Ordinal::Fin(1));
        let one = encode(&hf("{{}}"));
        assert_eq!(one.code, OrdSet::from_nats([2]));
        assert_eq!(one.domain_size, Ordinal::Fin(2));
        let two = encode(&hf("{{{}}}"));
        assert_eq!(two.code, OrdSet::from_nats([2, 7]));
        assert_eq!(two.domain_size, Ordinal::Fin(3));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(&code_of(&[], 1)).unwrap(), hf("{}"));
        assert_eq!(decode(&code_of(&[(1, 0)], 2)).unwrap(), hf("{{}}"));
        assert!(matches!(
            decode(&code_of(&[(0, 1)], 2)),
            Err(CodeError::IllFormed(_))
        ));
    }

    #[test]
    fn decode_rejects_garbage() {
        // cycle
        assert!(decode(&code_of(&[(1, 0), (2, 1), (1, 2)], 3)).is_err());
        // two indices for the empty set
        assert!(decode(&code_of(&[(1, 0), (2, 0)], 3)).is_err());
        // unreachable index
        assert!(decode(&code_of(&[(1, 0)], 3)).is_err());
        // pair outside domain
        assert!(decode(&code_of(&[(5, 0)], 2)).is_err());
    }

    #[test]
    fn non_canonical_enumeration() {
        // {{}, {{}}} with f(1) = {} and f(2) = {{}}, the reverse of canonical.
        let c = code_of(&[(1, 0), (2, 0), (1, 2)], 3);
        assert_eq!(decode(&c).unwrap(), HfSet::nat(2));
        assert_ne!(c, encode(&HfSet::nat(2)));
        assert!(code_eq(&c, &encode(&HfSet::nat(2))).unwrap());
    }

    #[test]
    fn derived_examples() {
        let y = HfSet::nat(2);
        let c = encode(&y);
        for i in 0..3u64 {
            let d = derived_code(&c, &Ordinal::Fin(i)).unwrap();
            let x = decode(&d).unwrap();
            assert!(x == y || y.transitive_closure().contains(&x));
            assert_eq!(
                d,
                encode(&x),
                "derived codes of canonical codes are canonical"
            );
        }
        let one = encode(&hf("{{}}"));
        assert_eq!(derived_code(&one, &Ordinal::ZERO).unwrap(), one);
        assert!(matches!(
            derived_code(&one, &Ordinal::Fin(9)),
            Err(CodeError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn tc_examples() {
        assert_eq!(
            decode(&tc_code(&encode(&hf("{}"))).unwrap()).unwrap(),
            hf("{}")
        );
        assert_eq!(
            decode(&tc_code(&encode(&hf("{{{}}}"))).unwrap()).unwrap(),
            hf("{{{}},{}}")
        );
        assert_eq!(
            decode(&tc_code(&encode(&hf("{{}}"))).unwrap()).unwrap(),
            hf("{{}}")
        );
    }

    #[test]
    fn code_file_roundtrip() {
        let c = encode(&HfSet::nat(3));
        let back: SetCode = c.to_string().parse().unwrap();
        assert_eq!(back, c);
        let bare: SetCode = "{2, 7}".parse().unwrap();
        assert_eq!(bare.domain_size, Ordinal::Fin(3));
    }
}
