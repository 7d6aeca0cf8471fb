//! The cohomology of a product of three spheres, Q[a,b,c]/(a², b², c²).
//!
//! Monomials are subsets of {a, b, c} stored as a three-bit mask
//! (a = 1, b = 2, c = 4). Signs are fixed by the order a < b < c.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_linalg::{rat, zero_vector, Rational, Vector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("sphere degrees must satisfy 1 <= n <= m <= l, got ({0}, {1}, {2})")]
    OutOfOrder(usize, usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpaceSignature {
    pub n: usize,
    pub m: usize,
    pub l: usize,
}

impl SpaceSignature {
    pub fn new(n: usize, m: usize, l: usize) -> Result<Self, SignatureError> {
        if n == 0 || n > m || m > l {
            return Err(SignatureError::OutOfOrder(n, m, l));
        }
        Ok(SpaceSignature { n, m, l })
    }

    /// Dimension of the product, n + m + l.
    pub fn top(&self) -> usize {
        self.n + self.m + self.l
    }

    pub fn generator_degree(&self, g: Generator) -> usize {
        match g {
            Generator::A => self.n,
            Generator::B => self.m,
            Generator::C => self.l,
        }
    }

    /// The smallest admissible degree window, 2(n+m+l+1).
    pub fn default_window(&self) -> usize {
        2 * (self.top() + 1)
    }

    /// Distinct monomial degrees in increasing order.
    pub fn fiber_degrees(&self) -> Vec<usize> {
        let mut degrees: Vec<usize> = FiberMonomial::all().map(|u| mono_degree(self, u)).collect();
        degrees.sort_unstable();
        degrees.dedup();
        degrees
    }

    /// Monomials of degree `q`, in mask order.
    pub fn monomials_of_degree(&self, q: usize) -> Vec<FiberMonomial> {
        FiberMonomial::all()
            .filter(|&u| mono_degree(self, u) == q)
            .collect()
    }

    pub fn dim(&self, q: usize) -> usize {
        self.monomials_of_degree(q).len()
    }
}

impl fmt::Display for SpaceSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.m, self.l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    A,
    B,
    C,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::A, Generator::B, Generator::C];

    pub fn mono(self) -> FiberMonomial {
        match self {
            Generator::A => FiberMonomial::A,
            Generator::B => FiberMonomial::B,
            Generator::C => FiberMonomial::C,
        }
    }

    fn bit(self) -> u8 {
        self.mono().0
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::A => "a",
            Generator::B => "b",
            Generator::C => "c",
        })
    }
}

impl FromStr for Generator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" => Ok(Generator::A),
            "b" => Ok(Generator::B),
            "c" => Ok(Generator::C),
            other => Err(format!("unknown generator `{other}`")),
        }
    }
}

/// A subset of {a, b, c}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiberMonomial(u8);

impl FiberMonomial {
    pub const ONE: FiberMonomial = FiberMonomial(0);
    pub const A: FiberMonomial = FiberMonomial(1);
    pub const B: FiberMonomial = FiberMonomial(2);
    pub const C: FiberMonomial = FiberMonomial(4);
    pub const TOP: FiberMonomial = FiberMonomial(7);

    pub fn from_mask(mask: u8) -> Option<Self> {
        (mask < 8).then_some(FiberMonomial(mask))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = FiberMonomial> {
        (0u8..8).map(FiberMonomial)
    }

    pub fn contains(self, g: Generator) -> bool {
        self.0 & g.bit() != 0
    }

    pub fn generators(self) -> impl Iterator<Item = Generator> {
        Generator::ALL.into_iter().filter(move |&g| self.contains(g))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn name(self) -> String {
        if self.is_empty() {
            "1".to_string()
        } else {
            self.generators().map(|g| g.to_string()).collect()
        }
    }
}

impl fmt::Display for FiberMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for FiberMonomial {
    type Err = String;

    /// Accepts `1` or letters from {a, b, c}, each at most once, in any order.
    /// The result is the subset; signs from reordering are not applied here.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "1" {
            return Ok(FiberMonomial::ONE);
        }
        if s.is_empty() {
            return Err("empty monomial".to_string());
        }
        let mut mask = 0u8;
        for ch in s.chars() {
            let g: Generator = ch.to_string().parse()?;
            if mask & g.bit() != 0 {
                return Err(format!("repeated generator in `{s}`"));
            }
            mask |= g.bit();
        }
        Ok(FiberMonomial(mask))
    }
}

pub fn mono_degree(sig: &SpaceSignature, mono: FiberMonomial) -> usize {
    mono.generators().map(|g| sig.generator_degree(g)).sum()
}

/// Product of two monomials: `None` when the supports meet, otherwise the
/// Koszul sign (+1 or -1) and the union.
pub fn mono_product(
    sig: &SpaceSignature,
    u: FiberMonomial,
    v: FiberMonomial,
) -> Option<(i32, FiberMonomial)> {
    if u.0 & v.0 != 0 {
        return None;
    }
    let mut exponent = 0usize;
    for x in u.generators() {
        for y in v.generators() {
            if y < x {
                exponent += sig.generator_degree(x) * sig.generator_degree(y);
            }
        }
    }
    let sign = if exponent.is_multiple_of(2) { 1 } else { -1 };
    Some((sign, FiberMonomial(u.0 | v.0)))
}

/// Index of `mono` among the monomials of its degree.
pub fn local_index(sig: &SpaceSignature, mono: FiberMonomial) -> usize {
    let q = mono_degree(sig, mono);
    sig.monomials_of_degree(q)
        .iter()
        .position(|&u| u == mono)
        .expect("monomial has its own degree")
}

/// Product of homogeneous elements given in local coordinates of degrees
/// `p` and `q`; the result is in local coordinates of degree `p + q`.
pub fn multiply_local(sig: &SpaceSignature, p: usize, u: &[Rational], q: usize, v: &[Rational]) -> Vector {
    let left = sig.monomials_of_degree(p);
    let right = sig.monomials_of_degree(q);
    let out_basis = sig.monomials_of_degree(p + q);
    let mut out = zero_vector(out_basis.len());
    for (i, &mu) in left.iter().enumerate() {
        if u[i].is_zero() {
            continue;
        }
        for (j, &mv) in right.iter().enumerate() {
            if v[j].is_zero() {
                continue;
            }
            if let Some((sign, w)) = mono_product(sig, mu, mv) {
                let k = out_basis
                    .iter()
                    .position(|&x| x == w)
                    .expect("product lands in its degree");
                out[k] += &u[i] * &v[j] * rat(sign as i64);
            }
        }
    }
    out
}

/// A homogeneous or inhomogeneous linear combination of monomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FiberElement {
    terms: BTreeMap<FiberMonomial, Rational>,
}

impl FiberElement {
    pub fn zero() -> Self {
        FiberElement::default()
    }

    pub fn monomial(mono: FiberMonomial) -> Self {
        FiberElement::term(Rational::one(), mono)
    }

    pub fn term(coeff: Rational, mono: FiberMonomial) -> Self {
        let mut e = FiberElement::zero();
        e.add_term(coeff, mono);
        e
    }

    pub fn add_term(&mut self, coeff: Rational, mono: FiberMonomial) {
        let entry = self.terms.entry(mono).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (FiberMonomial, &Rational)> {
        self.terms.iter().map(|(&u, c)| (u, c))
    }

    pub fn scaled(&self, s: &Rational) -> FiberElement {
        let mut out = FiberElement::zero();
        for (u, c) in self.terms() {
            out.add_term(c * s, u);
        }
        out
    }

    /// The common degree of all terms, or `None` when empty or mixed.
    pub fn degree(&self, sig: &SpaceSignature) -> Option<usize> {
        let mut degrees = self.terms.keys().map(|&u| mono_degree(sig, u));
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn to_local(&self, sig: &SpaceSignature, q: usize) -> Option<Vector> {
        let basis = sig.monomials_of_degree(q);
        let mut v = zero_vector(basis.len());
        for (u, c) in self.terms() {
            let i = basis.iter().position(|&x| x == u)?;
            v[i] = c.clone();
        }
        Some(v)
    }

    pub fn from_local(sig: &SpaceSignature, q: usize, v: &[Rational]) -> Self {
        let mut e = FiberElement::zero();
        for (u, c) in sig.monomials_of_degree(q).into_iter().zip(v) {
            e.add_term(c.clone(), u);
        }
        e
    }
}
