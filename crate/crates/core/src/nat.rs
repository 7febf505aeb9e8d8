//! Positive integers, finite sets of them, and the one-integer-per-line set
//! file format.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Exact rational number used throughout the crate.
pub type Rational = BigRational;

/// An arbitrary-precision integer `>= 1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Nat(BigUint);

impl Nat {
    pub fn new(value: BigUint) -> Result<Self> {
        if value.is_zero() {
            Err(invalid("natural numbers start at 1; got 0"))
        } else {
            Ok(Nat(value))
        }
    }

    /// Panics on zero. Intended for literals and values already known positive.
    pub fn from_u64(value: u64) -> Self {
        assert!(value > 0, "Nat::from_u64(0)");
        Nat(BigUint::from(value))
    }

    pub fn one() -> Self {
        Nat(BigUint::one())
    }

    pub fn get(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn to_bigint(&self) -> BigInt {
        BigInt::from(self.0.clone())
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from_integer(self.to_bigint())
    }

    pub fn checked_mul(&self, other: &Nat) -> Nat {
        Nat(&self.0 * &other.0)
    }

    pub fn add(&self, other: &Nat) -> Nat {
        Nat(&self.0 + &other.0)
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat::from_u64(v as u64)
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Nat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid(format!("not a positive decimal integer: {s:?}")));
        }
        let v: BigUint = s
            .parse()
            .map_err(|_| invalid(format!("not a positive decimal integer: {s:?}")))?;
        Nat::new(v)
    }
}

impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_str_radix(10))
    }
}

impl<'de> Deserialize<'de> for Nat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A sorted, duplicate-free finite set of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Nat>", into = "Vec<Nat>")]
pub struct FiniteSet {
    elements: Vec<Nat>,
}

impl FiniteSet {
    pub fn empty() -> Self {
        FiniteSet::default()
    }

    /// Sorts and deduplicates.
    pub fn new(mut elements: Vec<Nat>) -> Self {
        elements.sort();
        elements.dedup();
        FiniteSet { elements }
    }

    /// Builds a set from machine integers; zeros are rejected.
    pub fn from_u64s<I: IntoIterator<Item = u64>>(values: I) -> Result<Self> {
        let elements = values
            .into_iter()
            .map(|v| Nat::new(BigUint::from(v)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteSet::new(elements))
    }

    /// `{lo, lo+1, ..., hi}`.
    pub fn range(lo: u64, hi: u64) -> Self {
        let lo = lo.max(1);
        FiniteSet {
            elements: (lo..=hi).map(Nat::from_u64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Nat] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Nat> {
        self.elements.iter()
    }

    pub fn max(&self) -> Option<&Nat> {
        self.elements.last()
    }

    pub fn min(&self) -> Option<&Nat> {
        self.elements.first()
    }

    pub fn contains(&self, n: &Nat) -> bool {
        self.elements.binary_search(n).is_ok()
    }

    pub fn contains_big(&self, n: &BigUint) -> bool {
        self.elements.binary_search_by(|e| e.0.cmp(n)).is_ok()
    }

    /// All elements as `u64` when every element fits.
    pub fn to_u64s(&self) -> Option<Vec<u64>> {
        self.elements.iter().map(Nat::to_u64).collect()
    }

    /// `A_n = {a in A : a <= n}`.
    pub fn truncate(&self, n: &Nat) -> FiniteSet {
        let end = self.elements.partition_point(|e| e <= n);
        FiniteSet {
            elements: self.elements[..end].to_vec(),
        }
    }

    /// Number of elements `<= n`.
    pub fn count_le(&self, n: &Nat) -> usize {
        self.elements.partition_point(|e| e <= n)
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.elements.iter().all(|e| other.contains(e))
    }

    /// The dilate `c * A`.
    pub fn dilate(&self, c: &Nat) -> FiniteSet {
        FiniteSet {
            elements: self.elements.iter().map(|e| e.checked_mul(c)).collect(),
        }
    }

    pub fn filter<F: FnMut(&Nat) -> bool>(&self, mut keep: F) -> FiniteSet {
        FiniteSet {
            elements: self.elements.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    /// Parses the set file format: one positive decimal integer per line,
    /// blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut elements = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let n = line.parse::<Nat>().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            elements.push(n);
        }
        Ok(FiniteSet::new(elements))
    }

    /// Renders the set file format (one element per line, trailing newline).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.elements {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements.iter()).finish()
    }
}

impl From<FiniteSet> for Vec<Nat> {
    fn from(set: FiniteSet) -> Self {
        set.elements
    }
}

impl From<Vec<Nat>> for FiniteSet {
    fn from(elements: Vec<Nat>) -> Self {
        FiniteSet::new(elements)
    }
}

impl FromIterator<Nat> for FiniteSet {
    fn from_iter<I: IntoIterator<Item = Nat>>(iter: I) -> Self {
        FiniteSet::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a FiniteSet {
    type Item = &'a Nat;
    type IntoIter = std::slice::Iter<'a, Nat>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

/// Shorthand for building a set in tests and examples. Panics on zero.
pub fn set_of(values: &[u64]) -> FiniteSet {
    FiniteSet::from_u64s(values.iter().copied()).expect("positive elements")
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `p/q` or a plain integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || invalid(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// `p/q` rendering with an explicit denominator, e.g. `1/1`.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Display-only decimal rendering with a fixed number of digits.
pub fn fmt_decimal(r: &Rational, digits: usize) -> String {
    let neg = r < &Rational::zero();
    let abs = if neg { -r.clone() } else { r.clone() };
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (abs * Rational::from_integer(scale.clone())).round().to_integer();
    let int = &scaled / &scale;
    let frac = &scaled % &scale;
    let mut s = String::new();
    if neg && !scaled.is_zero() {
        s.push('-');
    }
    s.push_str(&int.to_string());
    if digits > 0 {
        s.push('.');
        s.push_str(&format!("{:0>width$}", frac.to_string(), width = digits));
    }
    s
}

/// Serde adapter storing a rational as its `p/q` string.
pub mod rational_string {
    use super::{fmt_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
