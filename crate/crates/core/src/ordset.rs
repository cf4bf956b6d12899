//! Finite sets of ordinals, the `a (+) b` interleaving and its projections.

use std::fmt;
use std::str::FromStr;

use crate::ordinal::{OrdParser, Ordinal, OrdinalError};

/// A finite set of ordinals, kept sorted and duplicate-free.
///
/// The derived `Ord` is lexicographic on the sorted element list; it is the
/// canonical total order used wherever sets of ordinals must be sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrdSet(Vec<Ordinal>);

impl OrdSet {
    pub fn new() -> Self {
        OrdSet(Vec::new())
    }

    pub fn singleton(o: Ordinal) -> Self {
        OrdSet(vec![o])
    }

    pub fn from_nats<I: IntoIterator<Item = u64>>(it: I) -> Self {
        it.into_iter().map(Ordinal::Fin).collect()
    }

    /// Machine bits: `0` is the empty set, `1` is `{0}`.
    pub fn bit(b: bool) -> Self {
        if b {
            OrdSet::singleton(Ordinal::ZERO)
        } else {
            OrdSet::new()
        }
    }

    /// Reads a machine bit; anything nonempty counts as 1.
    pub fn as_bit(&self) -> bool {
        !self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, o: &Ordinal) -> bool {
        self.0.binary_search(o).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Ordinal> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Ordinal] {
        &self.0
    }

    pub fn max(&self) -> Option<&Ordinal> {
        self.0.last()
    }

    pub fn insert(&mut self, o: Ordinal) -> bool {
        match self.0.binary_search(&o) {
            Ok(_) => false,
            Err(i) => {
                self.0.insert(i, o);
                true
            }
        }
    }

    pub fn remove(&mut self, o: &Ordinal) -> bool {
        match self.0.binary_search(o) {
            Ok(i) => {
                self.0.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn union(&self, other: &OrdSet) -> OrdSet {
        self.iter().chain(other.iter()).cloned().collect()
    }

    /// Elements below `bound`.
    pub fn below(&self, bound: &Ordinal) -> OrdSet {
        OrdSet(self.0.iter().take_while(|o| *o < bound).cloned().collect())
    }

    /// The singleton `{n}` read back as a natural, when it is one.
    pub fn as_nat(&self) -> Option<u64> {
        match self.0.as_slice() {
            [o] => o.as_finite(),
            _ => None,
        }
    }
}

impl FromIterator<Ordinal> for OrdSet {
    fn from_iter<T: IntoIterator<Item = Ordinal>>(iter: T) -> Self {
        let mut v: Vec<Ordinal> = iter.into_iter().collect();
        v.sort();
        v.dedup();
        OrdSet(v)
    }
}

impl<'a> IntoIterator for &'a OrdSet {
    type Item = &'a Ordinal;
    type IntoIter = std::slice::Iter<'a, Ordinal>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// `2*iota` with 2 multiplied on the left: `lambda + n` goes to `lambda + 2n`.
/// Naturals are machine words; an interleaving nested past their width has
/// no representation, and carrying on with a wrapped value would silently
/// corrupt the set.
fn twice(n: u64) -> u64 {
    n.checked_mul(2)
        .filter(|m| *m < u64::MAX)
        .expect("interleaving overflows the natural-number range")
}

fn double(o: &Ordinal) -> Ordinal {
    match o {
        Ordinal::Fin(n) => Ordinal::Fin(twice(*n)),
        _ => {
            let (lam, n) = o.split_limit();
            Ordinal::limit_plus(&lam, 2 * n)
        }
    }
}

/// `{2i : i in a} u {2i+1 : i in b}`.
pub fn interleave(a: &OrdSet, b: &OrdSet) -> OrdSet {
    if a.0.iter().chain(b.0.iter()).all(Ordinal::is_finite) {
        // Fast path: merge two already sorted streams.
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let ev = |k: usize| twice(a.0[k].as_finite().unwrap());
        let od = |k: usize| twice(b.0[k].as_finite().unwrap()) + 1;
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && ev(i) < od(j)) {
                out.push(Ordinal::Fin(ev(i)));
                i += 1;
            } else {
                out.push(Ordinal::Fin(od(j)));
                j += 1;
            }
        }
        return OrdSet(out);
    }
    a.iter()
        .map(double)
        .chain(b.iter().map(|o| double(o).succ()))
        .collect()
}

/// Which half of an interleaving to read back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Even = 0,
    Odd = 1,
}

impl Side {
    pub fn from_index(i: u64) -> Option<Side> {
        match i {
            0 => Some(Side::Even),
            1 => Some(Side::Odd),
            _ => None,
        }
    }
}

/// `(x)_0` / `(x)_1`: every element `lambda + k` belongs to side `k mod 2`
/// and contributes `lambda + k/2`.
pub fn project(x: &OrdSet, side: Side) -> OrdSet {
    let want = side as u64;
    if x.0.iter().all(Ordinal::is_finite) {
        return OrdSet(
            x.0.iter()
                .filter_map(|o| {
                    let n = o.as_finite().unwrap();
                    (n % 2 == want).then_some(Ordinal::Fin(n / 2))
                })
                .collect(),
        );
    }
    x.iter()
        .filter_map(|o| {
            let (lam, k) = o.split_limit();
            (k % 2 == want).then(|| Ordinal::limit_plus(&lam, k / 2))
        })
        .collect()
}

pub fn delta(x: &OrdSet, y: &OrdSet) -> u8 {
    u8::from(x == y)
}

/// Right-nested packaging `x_0 (+) (x_1 (+) (... (+) x_n))`.
pub fn pack_right(parts: &[OrdSet]) -> OrdSet {
    match parts {
        [] => OrdSet::new(),
        [only] => only.clone(),
        [head, rest @ ..] => interleave(head, &pack_right(rest)),
    }
}

/// Inverse of [`pack_right`] for a known number of parts.
pub fn unpack_right(z: &OrdSet, n: usize) -> Vec<OrdSet> {
    let mut out = Vec::with_capacity(n);
    let mut cur = z.clone();
    for i in 0..n {
        if i + 1 == n {
            out.push(cur);
            break;
        }
        out.push(project(&cur, Side::Even));
        cur = project(&cur, Side::Odd);
    }
    out
}

impl fmt::Display for OrdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{o}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for OrdSet {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (set, end) = parse_ordset_at(s.as_bytes(), 0)?;
        if s[end..].trim().is_empty() {
            Ok(set)
        } else {
            Err(OrdinalError::Parse {
                col: end + 1,
                msg: "trailing input".into(),
            })
        }
    }
}

/// Parses `{a, b, ...}` starting at byte `pos`; returns the set and the
/// position after the closing brace.
pub(crate) fn parse_ordset_at(src: &[u8], mut pos: usize) -> Result<(OrdSet, usize), OrdinalError> {
    let err = |pos: usize, msg: &str| OrdinalError::Parse {
        col: pos + 1,
        msg: msg.to_string(),
    };
    let skip = |mut p: usize| {
        while p < src.len() && src[p].is_ascii_whitespace() {
            p += 1;
        }
        p
    };
    pos = skip(pos);
    if src.get(pos) != Some(&b'{') {
        return Err(err(pos, "expected '{'"));
    }
    pos = skip(pos + 1);
    let mut elems = Vec::new();
    if src.get(pos) == Some(&b'}') {
        return Ok((OrdSet::new(), pos + 1));
    }
    loop {
        let mut p = OrdParser::new(src, pos);
        elems.push(p.sum()?);
        pos = skip(p.pos);
        match src.get(pos) {
            Some(b',') => pos += 1,
            Some(b'}') => return Ok((elems.into_iter().collect(), pos + 1)),
            _ => return Err(err(pos, "expected ',' or '}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> OrdSet {
        t.parse().unwrap()
    }

    #[test]
    fn interleave_examples() {
        assert_eq!(interleave(&s("{0,1}"), &s("{0}")), s("{0,1,2}"));
        assert_eq!(interleave(&s("{w}"), &s("{w}")), s("{w, w+1}"));
        assert_eq!(interleave(&s("{}"), &s("{}")), s("{}"));
        assert_eq!(interleave(&s("{w+1}"), &s("{3}")), s("{7, w+2}"));
    }

    #[test]
    fn project_examples() {
        assert_eq!(project(&s("{0,1,2}"), Side::Even), s("{0,1}"));
        assert_eq!(project(&s("{0,1,2}"), Side::Odd), s("{0}"));
        assert_eq!(project(&s("{w, w+1}"), Side::Odd), s("{w}"));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&s("{2}"), &s("{2}")), 1);
        assert_eq!(delta(&s("{2}"), &s("{3}")), 0);
        assert_eq!(delta(&s("{}"), &s("{}")), 1);
    }

    #[test]
    fn packing() {
        let parts = vec![s("{1}"), s("{2, w}"), s("{}"), s("{0}")];
        let z = pack_right(&parts);
        assert_eq!(unpack_right(&z, 4), parts);
        assert_eq!(project(&z, Side::Even), s("{1}"));
    }

    #[test]
    fn display_parse() {
        let x = s("{ w+1, 0, 2, w }");
        assert_eq!(x.to_string(), "{0, 2, w, w+1}");
        assert!("{1,".parse::<OrdSet>().is_err());
        assert!("1}".parse::<OrdSet>().is_err());
    }
}
