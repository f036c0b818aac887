//! Ordinals below epsilon-zero in Cantor normal form.
//!
//! Only what the mind-change machinery needs is provided: canonical
//! construction, comparison, descent validation, the natural (Hessenberg)
//! sum and a text grammar:
//!
//! ```text
//! ordinal  := "0" | term ("+" term)*
//! term     := nat | "w" ["^" exponent] ["*" nat]
//! exponent := nat | "w" | "(" ordinal ")"
//! ```
//!
//! `w` stands for omega. Formatting omits `*1` and `^1`, so omega squared
//! times three plus omega plus five prints as `w^2*3+w+5`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("zero coefficient at index {0}")]
    ZeroCoefficient(usize),
    #[error("exponents not decreasing at index {0}")]
    NotDecreasing(usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// One `w^exponent * coefficient` summand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub exponent: Ordinal,
    pub coefficient: u64,
}

/// An ordinal in Cantor normal form. The empty term list is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

impl Ordinal {
    /// Builds an ordinal from CNF terms, rejecting anything non-canonical.
    pub fn make(terms: Vec<(Ordinal, u64)>) -> Result<Ordinal, OrdinalError> {
        for (i, (_, c)) in terms.iter().enumerate() {
            if *c == 0 {
                return Err(OrdinalError::ZeroCoefficient(i));
            }
        }
        for i in 1..terms.len() {
            if terms[i - 1].0 <= terms[i].0 {
                return Err(OrdinalError::NotDecreasing(i));
            }
        }
        Ok(Ordinal {
            terms: terms
                .into_iter()
                .map(|(exponent, coefficient)| Term { exponent, coefficient })
                .collect(),
        })
    }

    pub fn zero() -> Ordinal {
        Ordinal { terms: Vec::new() }
    }

    pub fn natural(k: u64) -> Ordinal {
        omega_pow(Ordinal::zero(), k)
    }

    pub fn omega() -> Ordinal {
        omega_pow(Ordinal::natural(1), 1)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(k)` when the ordinal is finite.
    pub fn as_natural(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exponent.is_zero() => Some(t.coefficient),
            _ => None,
        }
    }

    /// A limit ordinal is non-zero with no finite tail.
    pub fn is_limit(&self) -> bool {
        self.terms.last().is_some_and(|t| !t.exponent.is_zero())
    }

    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|t| t.exponent.is_zero())
    }

    /// Hessenberg natural sum: merge the CNF terms, adding coefficients of
    /// equal exponents. Commutative and strictly monotone in each argument.
    pub fn natural_sum(&self, other: &Ordinal) -> Ordinal {
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.exponent.cmp(&b.exponent),
                (Some(_), None) => Ordering::Greater,
                (None, _) => Ordering::Less,
            };
            match ord {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let mut t = self.terms[i].clone();
                    t.coefficient = t
                        .coefficient
                        .checked_add(other.terms[j].coefficient)
                        .expect("ordinal coefficient overflow");
                    out.push(t);
                    i += 1;
                    j += 1;
                }
            }
        }
        Ordinal { terms: out }
    }
}

/// `w^e * c` as a single CNF term (zero when `c == 0`).
pub fn omega_pow(e: Ordinal, c: u64) -> Ordinal {
    if c == 0 {
        return Ordinal::zero();
    }
    Ordinal {
        terms: vec![Term { exponent: e, coefficient: c }],
    }
}

/// Ok when every element is strictly greater than its successor; otherwise
/// the index of the first element that fails to drop.
pub fn validate_strictly_decreasing(seq: &[Ordinal]) -> Result<(), usize> {
    match seq.windows(2).position(|w| w[0] <= w[1]) {
        Some(i) => Err(i + 1),
        None => Ok(()),
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let o = a
                .exponent
                .cmp(&b.exponent)
                .then(a.coefficient.cmp(&b.coefficient));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(k: u64) -> Self {
        Ordinal::natural(k)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coefficient)?;
                continue;
            }
            f.write_str("w")?;
            match t.exponent.as_natural() {
                Some(1) => {}
                Some(k) => write!(f, "^{k}")?,
                None if t.exponent == Ordinal::omega() => f.write_str("^w")?,
                None => write!(f, "^({})", t.exponent)?,
            }
            if t.coefficient != 1 {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let o = p.ordinal()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(o)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> OrdinalError {
        OrdinalError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn nat(&mut self) -> Result<u64, OrdinalError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected natural number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| OrdinalError::Parse { pos: start, msg: "number too large".into() })
    }

    fn ordinal(&mut self) -> Result<Ordinal, OrdinalError> {
        let mut terms = vec![self.term()?];
        while self.eat(b'+') {
            terms.push(self.term()?);
        }
        if let [(e, 0)] = terms.as_slice() {
            if e.is_zero() {
                return Ok(Ordinal::zero());
            }
        }
        Ordinal::make(terms)
    }

    fn term(&mut self) -> Result<(Ordinal, u64), OrdinalError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exponent = if self.eat(b'^') { self.exponent()? } else { Ordinal::natural(1) };
                let coefficient = if self.eat(b'*') { self.nat()? } else { 1 };
                Ok((exponent, coefficient))
            }
            Some(b) if b.is_ascii_digit() => Ok((Ordinal::zero(), self.nat()?)),
            _ => Err(self.err("expected term")),
        }
    }

    fn exponent(&mut self) -> Result<Ordinal, OrdinalError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                Ok(Ordinal::omega())
            }
            Some(b'(') => {
                self.pos += 1;
                let o = self.ordinal()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(o)
            }
            _ => Ok(Ordinal::natural(self.nat()?)),
        }
    }
}
