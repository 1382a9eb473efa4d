//! Polynomials with natural-number coefficients, and sound (incomplete)
//! pointwise comparisons over natural-number inputs.
//!
//! Comparison works on the coefficient level: to certify `p >= q` on all of
//! `N^k`, the difference `p - q` is re-expanded around every 0/1 corner of
//! the input space (each variable either pinned to zero or shifted by one)
//! and all resulting coefficients must be nonnegative.  Every input vector
//! falls in exactly one corner region, so success is sound; polynomials that
//! are pointwise nonnegative for subtler reasons may still be rejected.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A product of variables with positive exponents, sorted by variable name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(name: impl Into<String>) -> Monomial {
        Monomial(vec![(name.into(), 1)])
    }

    fn from_unsorted(mut factors: Vec<(String, u32)>) -> Monomial {
        factors.retain(|(_, e)| *e > 0);
        factors.sort();
        let mut merged: Vec<(String, u32)> = Vec::new();
        for (v, e) in factors {
            match merged.last_mut() {
                Some((last, exp)) if *last == v => *exp += e,
                _ => merged.push((v, e)),
            }
        }
        Monomial(merged)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = self.0.clone();
        factors.extend(other.0.iter().cloned());
        Monomial::from_unsorted(factors)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(v, _)| v.as_str())
    }

    pub fn factors(&self) -> &[(String, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        for (v, e) in &self.0 {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial with `u64` coefficients, kept as a coefficient map without
/// zero entries.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly(BTreeMap<Monomial, u64>);

impl Poly {
    pub fn zero() -> Poly {
        Poly(BTreeMap::new())
    }

    pub fn constant(c: u64) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(name: impl Into<String>) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(name), 1);
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: u64) {
        if c == 0 {
            return;
        }
        let entry = self.0.entry(m).or_insert(0);
        *entry += c;
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u64)> {
        self.0.iter().map(|(m, c)| (m, *c))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.0.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.0
            .keys()
            .flat_map(|m| m.vars().map(str::to_string))
            .collect()
    }

    /// Substitutes polynomials for variables; variables missing from the
    /// environment stay symbolic.
    pub fn substitute(&self, env: &BTreeMap<String, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let mut term = Poly::constant(*c);
            for (v, e) in m.factors() {
                let base = env.get(v).cloned().unwrap_or_else(|| Poly::var(v.clone()));
                for _ in 0..*e {
                    term = term.mul(&base);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Replaces every variable `x` by `x + delta`.
    pub fn shift_vars(&self, delta: u64) -> Poly {
        let env = self
            .vars()
            .into_iter()
            .map(|v| {
                let shifted = Poly::var(v.clone()).add(&Poly::constant(delta));
                (v, shifted)
            })
            .collect();
        self.substitute(&env)
    }

    /// Evaluates at a point; variables missing from the environment count
    /// as zero.
    pub fn eval(&self, env: &BTreeMap<String, u64>) -> u64 {
        let mut total: u64 = 0;
        for (m, c) in &self.0 {
            let mut term = *c;
            for (v, e) in m.factors() {
                let val = env.get(v).copied().unwrap_or(0);
                for _ in 0..*e {
                    term *= val;
                }
            }
            total += term;
        }
        total
    }

    pub fn parse(input: &str) -> Result<Poly, PolyParseError> {
        Parser::new(input).parse()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let mut terms: Vec<(&Monomial, u64)> = self.0.iter().map(|(m, c)| (m, *c)).collect();
        terms.sort_by(|a, b| {
            b.0.degree()
                .cmp(&a.0.degree())
                .then_with(|| a.0.cmp(b.0))
        });
        let mut first = true;
        for (m, c) in terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{c}")?;
            } else if c == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Poly, D::Error> {
        let text = String::deserialize(deserializer)?;
        Poly::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse polynomial at byte {at}: {reason}")]
pub struct PolyParseError {
    pub at: usize,
    pub reason: String,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Parser<'a> {
        Parser {
            bytes: input.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, reason: impl Into<String>) -> PolyParseError {
        PolyParseError {
            at: self.pos,
            reason: reason.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse(&mut self) -> Result<Poly, PolyParseError> {
        let mut poly = self.term()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            poly = poly.add(&self.term()?);
        }
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<Poly, PolyParseError> {
        let mut term = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            term = term.mul(&self.factor()?);
        }
        Ok(term)
    }

    fn factor(&mut self) -> Result<Poly, PolyParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(u8::is_ascii_digit)
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                let value: u64 = text
                    .parse()
                    .map_err(|_| self.error("coefficient out of range"))?;
                Ok(Poly::constant(value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos])
                    .unwrap()
                    .to_string();
                let exp = if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.skip_ws();
                    let start = self.pos;
                    while self
                        .bytes
                        .get(self.pos)
                        .is_some_and(u8::is_ascii_digit)
                    {
                        self.pos += 1;
                    }
                    if start == self.pos {
                        return Err(self.error("expected exponent"));
                    }
                    std::str::from_utf8(&self.bytes[start..self.pos])
                        .unwrap()
                        .parse::<u32>()
                        .map_err(|_| self.error("exponent out of range"))?
                } else {
                    1
                };
                let mut poly = Poly::constant(1);
                for _ in 0..exp {
                    poly = poly.mul(&Poly::var(name.clone()));
                }
                Ok(poly)
            }
            _ => Err(self.error("expected a coefficient or a variable")),
        }
    }
}

// ---------------------------------------------------------------------------
// Pointwise comparison over natural numbers.
// ---------------------------------------------------------------------------

type IPoly = BTreeMap<Monomial, i128>;

fn ipoly_add_term(p: &mut IPoly, m: Monomial, c: i128) {
    if c == 0 {
        return;
    }
    *p.entry(m).or_insert(0) += c;
}

fn ipoly_normalize(p: &mut IPoly) {
    p.retain(|_, c| *c != 0);
}

fn difference(p: &Poly, q: &Poly) -> IPoly {
    let mut d: IPoly = BTreeMap::new();
    for (m, c) in p.terms() {
        ipoly_add_term(&mut d, m.clone(), c as i128);
    }
    for (m, c) in q.terms() {
        ipoly_add_term(&mut d, m.clone(), -(c as i128));
    }
    ipoly_normalize(&mut d);
    d
}

/// Expands `d` with variables outside `kept` pinned to zero and variables
/// inside `kept` replaced by themselves plus one.
fn corner_expand(d: &IPoly, kept: &BTreeSet<&str>) -> IPoly {
    let mut out: IPoly = BTreeMap::new();
    for (m, c) in d {
        if m.vars().any(|v| !kept.contains(v)) {
            continue;
        }
        // Expand the product of (x_i + 1)^e_i term by term.
        let mut partial: IPoly = BTreeMap::from([(Monomial::one(), *c)]);
        for (v, e) in m.factors() {
            for _ in 0..*e {
                let mut next: IPoly = BTreeMap::new();
                for (pm, pc) in &partial {
                    ipoly_add_term(&mut next, pm.mul(&Monomial::var(v.clone())), *pc);
                    ipoly_add_term(&mut next, pm.clone(), *pc);
                }
                partial = next;
            }
        }
        for (pm, pc) in partial {
            ipoly_add_term(&mut out, pm, pc);
        }
    }
    ipoly_normalize(&mut out);
    out
}

fn corners_nonnegative(d: &IPoly, need_constant_one: bool) -> bool {
    let vars: Vec<&str> = d
        .keys()
        .flat_map(Monomial::vars)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for mask in 0u32..(1u32 << vars.len()) {
        let kept: BTreeSet<&str> = vars
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, v)| *v)
            .collect();
        let expanded = corner_expand(d, &kept);
        if expanded.values().any(|c| *c < 0) {
            return false;
        }
        if need_constant_one && expanded.get(&Monomial::one()).copied().unwrap_or(0) < 1 {
            return false;
        }
    }
    true
}

/// Certifies `p(v) >= q(v)` for every assignment of naturals to variables.
pub fn poly_geq(p: &Poly, q: &Poly) -> bool {
    corners_nonnegative(&difference(p, q), false)
}

/// Certifies `p(v) >= q(v) + 1` for every assignment of naturals.
pub fn poly_gt(p: &Poly, q: &Poly) -> bool {
    corners_nonnegative(&difference(p, q), true)
}
