//! Ordinals below epsilon-zero in Cantor normal form.
//!
//! Finite ordinals are stored inline; everything at or above omega carries
//! its term list. The representation is canonical, so derived equality and
//! hashing coincide with ordinal identity.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Maximum nesting depth of exponent towers accepted by the parser.
pub const DEFAULT_TOWER_BOUND: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("exponent tower deeper than {0}")]
    TowerTooDeep(usize),
    #[error("coefficient overflow")]
    Overflow,
    #[error("pairing is only defined on finite ordinals here, got {0}")]
    TransfinitePairing(Ordinal),
}

/// One `w^exp * coeff` summand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub exp: Ordinal,
    pub coeff: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ordinal {
    /// A natural number.
    Fin(u64),
    /// At least omega. Exponents strictly decrease, coefficients are >= 1,
    /// and the leading exponent is nonzero.
    Cnf(Arc<[Term]>),
}

impl Default for Ordinal {
    fn default() -> Self {
        Ordinal::Fin(0)
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::Fin(n)
    }
}

impl Ordinal {
    pub const ZERO: Ordinal = Ordinal::Fin(0);
    pub const ONE: Ordinal = Ordinal::Fin(1);

    pub fn omega() -> Ordinal {
        Ordinal::omega_pow(Ordinal::ONE, 1)
    }

    /// `w^exp * coeff`.
    pub fn omega_pow(exp: Ordinal, coeff: u64) -> Ordinal {
        if coeff == 0 {
            return Ordinal::ZERO;
        }
        if exp.is_zero() {
            return Ordinal::Fin(coeff);
        }
        Ordinal::Cnf(Arc::from(vec![Term { exp, coeff }]))
    }

    /// Builds an ordinal from terms in strictly decreasing exponent order.
    /// Zero coefficients are dropped; out-of-order input is rejected.
    pub fn from_terms(terms: Vec<Term>) -> Option<Ordinal> {
        let terms: Vec<Term> = terms.into_iter().filter(|t| t.coeff > 0).collect();
        for w in terms.windows(2) {
            if w[0].exp <= w[1].exp {
                return None;
            }
        }
        Some(Self::normalize(terms))
    }

    fn normalize(terms: Vec<Term>) -> Ordinal {
        match terms.as_slice() {
            [] => Ordinal::ZERO,
            [t] if t.exp.is_zero() => Ordinal::Fin(t.coeff),
            _ => Ordinal::Cnf(Arc::from(terms)),
        }
    }

    pub fn terms(&self) -> Vec<Term> {
        match self {
            Ordinal::Fin(0) => vec![],
            Ordinal::Fin(n) => vec![Term {
                exp: Ordinal::ZERO,
                coeff: *n,
            }],
            Ordinal::Cnf(ts) => ts.to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Ordinal::Fin(0))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ordinal::Fin(_))
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self {
            Ordinal::Fin(n) => Some(*n),
            Ordinal::Cnf(_) => None,
        }
    }

    /// Splits into limit part and finite remainder: `self = lambda + n`.
    pub fn split_limit(&self) -> (Ordinal, u64) {
        match self {
            Ordinal::Fin(n) => (Ordinal::ZERO, *n),
            Ordinal::Cnf(ts) => {
                let last = ts.last().expect("nonempty");
                if last.exp.is_zero() {
                    let head = ts[..ts.len() - 1].to_vec();
                    (Ordinal::normalize(head), last.coeff)
                } else {
                    (self.clone(), 0)
                }
            }
        }
    }

    pub fn is_limit(&self) -> bool {
        !self.is_zero() && self.split_limit().1 == 0
    }

    /// `lambda + n` for a limit (or zero) `lambda`.
    pub fn limit_plus(lambda: &Ordinal, n: u64) -> Ordinal {
        ord_add(lambda, &Ordinal::Fin(n))
    }

    pub fn succ(&self) -> Ordinal {
        ord_add(self, &Ordinal::ONE)
    }

    /// Immediate predecessor, if `self` is a successor.
    pub fn pred(&self) -> Option<Ordinal> {
        let (lam, n) = self.split_limit();
        (n > 0).then(|| Ordinal::limit_plus(&lam, n - 1))
    }

    fn leading_exp(&self) -> Option<Ordinal> {
        match self {
            Ordinal::Fin(0) => None,
            Ordinal::Fin(_) => Some(Ordinal::ZERO),
            Ordinal::Cnf(ts) => Some(ts[0].exp.clone()),
        }
    }

    /// Height of the exponent tower; finite ordinals have depth 0.
    pub fn tower_depth(&self) -> usize {
        match self {
            Ordinal::Fin(_) => 0,
            Ordinal::Cnf(ts) => 1 + ts.iter().map(|t| t.exp.tower_depth()).max().unwrap_or(0),
        }
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        ord_cmp(self, other)
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic comparison of CNF term lists.
pub fn ord_cmp(a: &Ordinal, b: &Ordinal) -> Ordering {
    match (a, b) {
        (Ordinal::Fin(x), Ordinal::Fin(y)) => x.cmp(y),
        (Ordinal::Fin(_), Ordinal::Cnf(_)) => Ordering::Less,
        (Ordinal::Cnf(_), Ordinal::Fin(_)) => Ordering::Greater,
        (Ordinal::Cnf(xs), Ordinal::Cnf(ys)) => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                match ord_cmp(&x.exp, &y.exp) {
                    Ordering::Equal => {}
                    o => return o,
                }
                match x.coeff.cmp(&y.coeff) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            xs.len().cmp(&ys.len())
        }
    }
}

pub fn ord_add(a: &Ordinal, b: &Ordinal) -> Ordinal {
    if let (Ordinal::Fin(x), Ordinal::Fin(y)) = (a, b) {
        return Ordinal::Fin(x.checked_add(*y).expect("finite ordinal overflow"));
    }
    let Some(lead) = b.leading_exp() else {
        return a.clone();
    };
    let bt = b.terms();
    let mut out: Vec<Term> = Vec::new();
    for t in a.terms() {
        match ord_cmp(&t.exp, &lead) {
            Ordering::Greater => out.push(t),
            Ordering::Equal => {
                let mut rest = bt.clone();
                rest[0].coeff = rest[0]
                    .coeff
                    .checked_add(t.coeff)
                    .expect("coefficient overflow");
                out.extend(rest);
                return Ordinal::normalize(out);
            }
            Ordering::Less => break,
        }
    }
    out.extend(bt);
    Ordinal::normalize(out)
}

pub fn ord_mul(a: &Ordinal, b: &Ordinal) -> Ordinal {
    if let (Ordinal::Fin(x), Ordinal::Fin(y)) = (a, b) {
        return Ordinal::Fin(x.checked_mul(*y).expect("finite ordinal overflow"));
    }
    let Some(a_lead) = a.leading_exp() else {
        return Ordinal::ZERO;
    };
    let a_terms = a.terms();
    let mut acc = Ordinal::ZERO;
    for t in b.terms() {
        let piece = if t.exp.is_zero() {
            // a * n: only the leading coefficient scales.
            let mut ts = a_terms.clone();
            ts[0].coeff = ts[0]
                .coeff
                .checked_mul(t.coeff)
                .expect("coefficient overflow");
            Ordinal::normalize(ts)
        } else {
            Ordinal::omega_pow(ord_add(&a_lead, &t.exp), t.coeff)
        };
        acc = ord_add(&acc, &piece);
    }
    acc
}

/// Goedel pairing: the position of `(a, b)` when pairs are ordered by
/// maximum, then first component, then second component.
pub fn godel_pair(a: &Ordinal, b: &Ordinal) -> Result<Ordinal, OrdinalError> {
    let x = a
        .as_finite()
        .ok_or_else(|| OrdinalError::TransfinitePairing(a.clone()))?;
    let y = b
        .as_finite()
        .ok_or_else(|| OrdinalError::TransfinitePairing(b.clone()))?;
    Ok(Ordinal::Fin(pair_nat(x, y)))
}

pub fn godel_unpair(c: &Ordinal) -> Result<(Ordinal, Ordinal), OrdinalError> {
    let n = c
        .as_finite()
        .ok_or_else(|| OrdinalError::TransfinitePairing(c.clone()))?;
    let (x, y) = unpair_nat(n);
    Ok((Ordinal::Fin(x), Ordinal::Fin(y)))
}

pub fn pair_nat(a: u64, b: u64) -> u64 {
    let m = a.max(b);
    if a < m {
        m * m + a
    } else {
        m * m + m + b
    }
}

pub fn unpair_nat(c: u64) -> (u64, u64) {
    let mut m = (c as f64).sqrt() as u64;
    while m * m > c {
        m -= 1;
    }
    while (m + 1) * (m + 1) <= c {
        m += 1;
    }
    let r = c - m * m;
    if r < m {
        (r, m)
    } else {
        (m, r - m)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ordinal::Fin(n) => write!(f, "{n}"),
            Ordinal::Cnf(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    if t.exp.is_zero() {
                        write!(f, "{}", t.coeff)?;
                        continue;
                    }
                    f.write_str("w")?;
                    match &t.exp {
                        Ordinal::Fin(1) => {}
                        Ordinal::Fin(e) => write!(f, "^{e}")?,
                        e => write!(f, "^({e})")?,
                    }
                    if t.coeff != 1 {
                        write!(f, "*{}", t.coeff)?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = OrdParser {
            src: s.as_bytes(),
            pos: 0,
            depth: 0,
        };
        let o = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(o)
    }
}

/// Parser for `w^2*3+w+4` style expressions. Summands need not be in normal
/// order; the result is normalized through ordinal addition.
pub(crate) struct OrdParser<'a> {
    pub(crate) src: &'a [u8],
    pub(crate) pos: usize,
    depth: usize,
}

impl<'a> OrdParser<'a> {
    pub(crate) fn new(src: &'a [u8], pos: usize) -> Self {
        OrdParser { src, pos, depth: 0 }
    }

    fn err(&self, msg: &str) -> OrdinalError {
        OrdinalError::Parse {
            col: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn nat(&mut self) -> Result<u64, OrdinalError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a natural number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| OrdinalError::Overflow)
    }

    pub(crate) fn sum(&mut self) -> Result<Ordinal, OrdinalError> {
        let mut acc = self.term()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            let t = self.term()?;
            acc = ord_add(&acc, &t);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal, OrdinalError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exp = if self.peek() == Some(b'^') {
                    self.pos += 1;
                    if self.peek() == Some(b'(') {
                        self.pos += 1;
                        self.depth += 1;
                        if self.depth > DEFAULT_TOWER_BOUND {
                            return Err(OrdinalError::TowerTooDeep(DEFAULT_TOWER_BOUND));
                        }
                        let e = self.sum()?;
                        self.depth -= 1;
                        if self.peek() != Some(b')') {
                            return Err(self.err("expected ')'"));
                        }
                        self.pos += 1;
                        e
                    } else if self.peek() == Some(b'w') {
                        self.depth += 1;
                        if self.depth > DEFAULT_TOWER_BOUND {
                            return Err(OrdinalError::TowerTooDeep(DEFAULT_TOWER_BOUND));
                        }
                        let e = self.term_no_coeff()?;
                        self.depth -= 1;
                        e
                    } else {
                        Ordinal::Fin(self.nat()?)
                    }
                } else {
                    Ordinal::ONE
                };
                let coeff = if self.peek() == Some(b'*') {
                    self.pos += 1;
                    self.nat()?
                } else {
                    1
                };
                Ok(Ordinal::omega_pow(exp, coeff))
            }
            Some(c) if c.is_ascii_digit() => Ok(Ordinal::Fin(self.nat()?)),
            _ => Err(self.err("expected 'w' or a natural number")),
        }
    }

    fn term_no_coeff(&mut self) -> Result<Ordinal, OrdinalError> {
        // `w^w` without parentheses: the exponent is a bare `w` power.
        self.pos += 1;
        let exp = if self.peek() == Some(b'^') {
            self.pos += 1;
            Ordinal::Fin(self.nat()?)
        } else {
            Ordinal::ONE
        };
        Ok(Ordinal::omega_pow(exp, 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(ord_add(&o("w"), &o("1")), o("w+1"));
        assert_eq!(ord_add(&o("1"), &o("w")), o("w"));
        assert_eq!(ord_mul(&o("2"), &o("w")), o("w"));
        assert_eq!(ord_mul(&o("w"), &o("2")), o("w*2"));
        assert_eq!(ord_cmp(&o("w"), &o("5")), Ordering::Greater);
        assert_eq!(ord_cmp(&o("w*2"), &o("w^2")), Ordering::Less);
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair_nat(0, 0), 0);
        assert_eq!(pair_nat(1, 0), 2);
        assert_eq!(pair_nat(2, 1), 7);
        assert_eq!(unpair_nat(7), (2, 1));
        assert!(godel_pair(&Ordinal::omega(), &Ordinal::ZERO).is_err());
    }

    #[test]
    fn display_roundtrip() {
        for s in ["0", "5", "w", "w^2*3+w+4", "w^(w+1)", "w^(w^2*2)+w*7+1"] {
            assert_eq!(o(s).to_string(), s);
        }
        assert_eq!(o("w*2 + 3").to_string(), "w*2+3");
        assert_eq!(o("3 + w").to_string(), "w");
    }

    #[test]
    fn limits_and_predecessors() {
        assert!(o("w*3").is_limit());
        assert!(!o("w+2").is_limit());
        assert_eq!(o("w+2").pred(), Some(o("w+1")));
        assert_eq!(o("w").pred(), None);
        assert_eq!(o("w^2+w+5").split_limit(), (o("w^2+w"), 5));
    }

    #[test]
    fn tower_bound() {
        let mut s = String::from("1");
        for _ in 0..40 {
            s = format!("w^({s})");
        }
        assert_eq!(
            s.parse::<Ordinal>(),
            Err(OrdinalError::TowerTooDeep(DEFAULT_TOWER_BOUND))
        );
    }

    #[test]
    fn parse_errors() {
        assert!("w^".parse::<Ordinal>().is_err());
        assert!("x".parse::<Ordinal>().is_err());
        assert!("w+".parse::<Ordinal>().is_err());
    }
}
