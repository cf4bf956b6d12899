//! Hereditarily finite sets.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A hereditarily finite set. Extensional by construction: children are a
/// duplicate-free ordered set.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HfSet(BTreeSet<HfSet>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("set literal parse error at column {col}: {msg}")]
pub struct HfParseError {
    pub col: usize,
    pub msg: String,
}

impl HfSet {
    pub fn empty() -> Self {
        HfSet(BTreeSet::new())
    }

    pub fn from_members<I: IntoIterator<Item = HfSet>>(it: I) -> Self {
        HfSet(it.into_iter().collect())
    }

    pub fn singleton(x: HfSet) -> Self {
        Self::from_members([x])
    }

    pub fn pair(x: HfSet, y: HfSet) -> Self {
        Self::from_members([x, y])
    }

    /// Kuratowski pair `{{a}, {a, b}}`.
    pub fn kpair(a: &HfSet, b: &HfSet) -> Self {
        Self::pair(Self::singleton(a.clone()), Self::pair(a.clone(), b.clone()))
    }

    /// The von Neumann natural `n`.
    pub fn nat(n: usize) -> Self {
        let mut cur = HfSet::empty();
        for _ in 0..n {
            let mut next = cur.0.clone();
            next.insert(cur);
            cur = HfSet(next);
        }
        cur
    }

    pub fn members(&self) -> impl Iterator<Item = &HfSet> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &HfSet) -> bool {
        self.0.contains(x)
    }

    pub fn insert(&mut self, x: HfSet) -> bool {
        self.0.insert(x)
    }

    pub fn rank(&self) -> usize {
        self.0.iter().map(|m| m.rank() + 1).max().unwrap_or(0)
    }

    pub fn union_members(&self) -> HfSet {
        HfSet(self.0.iter().flat_map(|m| m.0.iter().cloned()).collect())
    }

    /// `tc(x)`: every set reachable by a membership path from `x`, excluding `x`.
    pub fn transitive_closure(&self) -> HfSet {
        let mut out = BTreeSet::new();
        let mut stack: Vec<&HfSet> = self.0.iter().collect();
        while let Some(s) = stack.pop() {
            if out.insert(s.clone()) {
                stack.extend(s.0.iter());
            }
        }
        HfSet(out)
    }

    /// `tc({x})` as a plain collection.
    pub fn tc_with_self(&self) -> BTreeSet<HfSet> {
        let mut out = self.transitive_closure().0;
        out.insert(self.clone());
        out
    }
}

/// All sets of rank at most `rank`, in a fixed order.
pub fn universe(rank: usize) -> Vec<HfSet> {
    let mut level = vec![HfSet::empty()];
    for _ in 0..rank {
        let n = level.len();
        assert!(n < 20, "universe too large");
        let mut next = Vec::with_capacity(1 << n);
        for mask in 0u32..(1u32 << n) {
            next.push(HfSet::from_members(
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| level[i].clone()),
            ));
        }
        level = next;
    }
    level
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for HfSet {
    type Err = HfParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (set, end) = parse_hf_at(s.as_bytes(), 0)?;
        if s[end..].trim().is_empty() {
            Ok(set)
        } else {
            Err(HfParseError {
                col: end + 1,
                msg: "trailing input".into(),
            })
        }
    }
}

/// Parses a set literal starting at `pos`; returns the set and the position
/// after its closing brace.
pub(crate) fn parse_hf_at(src: &[u8], pos: usize) -> Result<(HfSet, usize), HfParseError> {
    let skip = |mut p: usize| {
        while p < src.len() && src[p].is_ascii_whitespace() {
            p += 1;
        }
        p
    };
    let mut p = skip(pos);
    if src.get(p) != Some(&b'{') {
        return Err(HfParseError {
            col: p + 1,
            msg: "expected '{'".into(),
        });
    }
    p = skip(p + 1);
    let mut out = HfSet::empty();
    if src.get(p) == Some(&b'}') {
        return Ok((out, p + 1));
    }
    loop {
        let (m, q) = parse_hf_at(src, p)?;
        out.insert(m);
        p = skip(q);
        match src.get(p) {
            Some(b',') => p += 1,
            Some(b'}') => return Ok((out, p + 1)),
            _ => {
                return Err(HfParseError {
                    col: p + 1,
                    msg: "expected ',' or '}'".into(),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        let x: HfSet = "{{}, {{}}}".parse().unwrap();
        assert_eq!(x, HfSet::nat(2));
        assert_eq!(x.to_string(), "{{},{{}}}");
        assert_eq!("{{},{}}".parse::<HfSet>().unwrap(), HfSet::nat(1));
        assert!("{{}".parse::<HfSet>().is_err());
    }

    #[test]
    fn universe_sizes() {
        assert_eq!(universe(0).len(), 1);
        assert_eq!(universe(1).len(), 2);
        assert_eq!(universe(2).len(), 4);
        assert_eq!(universe(3).len(), 16);
        assert!(universe(3).iter().all(|x| x.rank() <= 3));
    }

    #[test]
    fn closure_and_union() {
        let x: HfSet = "{{{}}}".parse().unwrap();
        assert_eq!(x.transitive_closure(), "{{{}}, {}}".parse().unwrap());
        let u: HfSet = "{{{}}, {{{}}}}".parse().unwrap();
        assert_eq!(u.union_members(), HfSet::nat(2));
    }
}
