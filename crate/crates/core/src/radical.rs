//! Exact signed square roots of rationals, and finite sums of them.
//!
//! [`Radical`] is closed under multiplication and division, which is all the
//! angular-momentum kernel and the closed-form matrix elements need.  Matrix
//! products need sums, so [`SurdSum`] carries a canonical linear combination
//! `Σ c_b √b` over square-free integers `b` with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Signed square root of a non-negative rational: `sign · √radicand`.
///
/// The radicand is kept in lowest terms and `sign == 0` exactly when the
/// radicand is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Radical {
    sign: i8,
    radicand: BigRational,
}

impl Radical {
    pub fn zero() -> Self {
        Self {
            sign: 0,
            radicand: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    /// The radical whose value is the rational `q`.
    pub fn from_rational(q: BigRational) -> Self {
        let sign = sign_of(&q);
        Self {
            sign,
            radicand: &q * &q,
        }
    }

    /// `sign · √radicand`; the sign is ignored for a zero radicand.
    ///
    /// Panics on a negative radicand.
    pub fn new(sign: i8, radicand: BigRational) -> Self {
        assert!(!radicand.is_negative(), "negative radicand {radicand}");
        if radicand.is_zero() || sign == 0 {
            Self::zero()
        } else {
            Self {
                sign: sign.signum(),
                radicand,
            }
        }
    }

    /// Positive square root of a non-negative rational.
    pub fn sqrt(radicand: BigRational) -> Self {
        Self::new(1, radicand)
    }

    /// `√(num/den)` for small integers.
    pub fn sqrt_ratio(num: i64, den: i64) -> Self {
        Self::sqrt(BigRational::new(num.into(), den.into()))
    }

    /// Signed square root of a signed rational: `sign(q)·√|q|`.
    pub fn signed_sqrt(q: BigRational) -> Self {
        let s = sign_of(&q);
        Self::new(s, q.abs())
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// `value²`, always exact.
    pub fn square(&self) -> BigRational {
        self.radicand.clone()
    }

    /// `sign · value²`, the representation used for ordering and hashing
    /// of the signed quantity.
    pub fn signed_square(&self) -> BigRational {
        match self.sign {
            0 => BigRational::zero(),
            s if s > 0 => self.radicand.clone(),
            _ => -self.radicand.clone(),
        }
    }

    /// The value as a rational, when the radicand is a perfect square.
    pub fn to_rational(&self) -> Option<BigRational> {
        let n = exact_sqrt(self.radicand.numer())?;
        let d = exact_sqrt(self.radicand.denom())?;
        let r = BigRational::new(n, d);
        Some(if self.sign < 0 { -r } else { r })
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let v = ratio_sqrt_f64(&self.radicand);
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    pub fn abs(&self) -> Self {
        Self::new(self.sign.abs(), self.radicand.clone())
    }

    pub fn pow_i(&self, exponent: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }

    /// Inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self {
                sign: self.sign,
                radicand: self.radicand.recip(),
            })
        }
    }
}

fn sign_of(q: &BigRational) -> i8 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// `√(p/q)` in f64 without overflowing on large radicands.
pub(crate) fn ratio_sqrt_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d > 0.0 => (n / d).sqrt(),
        _ => {
            // scale both sides by a common power of two
            let nb = q.numer().bits() as i64;
            let db = q.denom().bits() as i64;
            let shift = ((nb.max(db) - 900).max(0) / 2) * 2;
            let n = (q.numer() >> (shift as usize)).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> (shift as usize)).to_f64().unwrap_or(1.0);
            (n / d).sqrt()
        }
    }
}

impl Mul for &Radical {
    type Output = Radical;
    fn mul(self, rhs: &Radical) -> Radical {
        if self.is_zero() || rhs.is_zero() {
            return Radical::zero();
        }
        Radical {
            sign: self.sign * rhs.sign,
            radicand: &self.radicand * &rhs.radicand,
        }
    }
}

impl Mul for Radical {
    type Output = Radical;
    fn mul(self, rhs: Radical) -> Radical {
        &self * &rhs
    }
}

impl Div for &Radical {
    type Output = Radical;
    fn div(self, rhs: &Radical) -> Radical {
        let inv = rhs.recip().expect("division of a radical by zero");
        self * &inv
    }
}

impl Div for Radical {
    type Output = Radical;
    fn div(self, rhs: Radical) -> Radical {
        &self / &rhs
    }
}

impl Neg for Radical {
    type Output = Radical;
    fn neg(self) -> Radical {
        Radical {
            sign: -self.sign,
            radicand: self.radicand,
        }
    }
}

impl Neg for &Radical {
    type Output = Radical;
    fn neg(self) -> Radical {
        -self.clone()
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.to_rational() {
            return write!(f, "{q}");
        }
        let s = if self.sign < 0 { "-" } else { "" };
        write!(f, "{s}√({})", self.radicand)
    }
}

#[derive(Serialize, Deserialize)]
struct RadicalRepr {
    sign: i8,
    radicand: String,
}

impl Serialize for Radical {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RadicalRepr {
            sign: self.sign,
            radicand: format!("{}/{}", self.radicand.numer(), self.radicand.denom()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Radical {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = RadicalRepr::deserialize(deserializer)?;
        let q = parse_rational(&repr.radicand).map_err(de::Error::custom)?;
        if q.is_negative() {
            return Err(de::Error::custom("negative radicand"));
        }
        if !(-1..=1).contains(&repr.sign) || (repr.sign == 0) != q.is_zero() {
            return Err(de::Error::custom("sign does not match radicand"));
        }
        Ok(Radical::new(repr.sign, q))
    }
}

/// Parses `"p"`, `"p/q"` or a terminating decimal such as `"3.5"`.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_abs = int.trim_start_matches(['-', '+']);
        let int_part = if int_abs.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int_abs).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let v = BigRational::new(int_part * &scale + frac_part, scale);
        return Ok(if neg { -v } else { v });
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| bad())
}

/// Splits `n > 0` as `a² · b` with `b` square-free.
pub fn square_free_split(n: &BigUint) -> (BigUint, BigUint) {
    if n.is_zero() {
        return (BigUint::zero(), BigUint::one());
    }
    if let Some(small) = n.to_u128() {
        let (a, b) = square_free_split_u128(small);
        return (BigUint::from(a), BigUint::from(b));
    }
    let mut rest = n.clone();
    let mut square = BigUint::one();
    let mut free = BigUint::one();
    let mut p = BigUint::from(2u32);
    loop {
        if &p * &p * &p > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        if e > 0 {
            square *= p.pow(e / 2);
            if e % 2 == 1 {
                free *= &p;
            }
        }
        p += if p == BigUint::from(2u32) { 1u32 } else { 2u32 };
    }
    // rest has at most two prime factors, each larger than the cube root
    let r = rest.sqrt();
    if &r * &r == rest && !rest.is_one() {
        square *= r;
    } else {
        free *= rest;
    }
    (square, free)
}

fn square_free_split_u128(mut n: u128) -> (u128, u128) {
    let mut square = 1u128;
    let mut free = 1u128;
    let mut p = 2u128;
    while p * p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            square *= p;
        }
        if e % 2 == 1 {
            free *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = n.sqrt();
    if r * r == n && n > 1 {
        square *= r;
    } else {
        free *= n;
    }
    (square, free)
}

/// Exact element of the field generated by square roots of rationals,
/// stored as `Σ coeff[b]·√b` over distinct square-free `b ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SurdSum {
    terms: BTreeMap<BigUint, BigRational>,
}

impl SurdSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut out = Self::zero();
        out.add_term(BigUint::one(), q);
        out
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &BigRational)> {
        self.terms.iter()
    }

    /// The value as a single radical, if it has at most one surd term.
    pub fn to_radical(&self) -> Option<Radical> {
        match self.terms.len() {
            0 => Some(Radical::zero()),
            1 => {
                let (b, c) = self.terms.iter().next().unwrap();
                let rad = c * c * BigRational::from_integer(BigInt::from(b.clone()));
                Some(Radical::new(sign_of(c), rad))
            }
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(b, c)| {
                let root = b.to_f64().map(f64::sqrt).unwrap_or(f64::INFINITY);
                c.to_f64().unwrap_or(0.0) * root
            })
            .sum()
    }

    fn add_term(&mut self, root: BigUint, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(root.clone()).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&root);
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(b, c)| (b.clone(), c * q)).collect(),
        }
    }
}

impl From<&Radical> for SurdSum {
    fn from(r: &Radical) -> Self {
        if r.is_zero() {
            return SurdSum::zero();
        }
        // √(p/q) = √(p·q) / q
        let n = r.radicand.numer().magnitude() * r.radicand.denom().magnitude();
        let (a, b) = square_free_split(&n);
        let mut coeff = BigRational::new(BigInt::from(a), r.radicand.denom().clone());
        if r.sign < 0 {
            coeff = -coeff;
        }
        let mut out = SurdSum::zero();
        out.add_term(b, coeff);
        out
    }
}

impl From<Radical> for SurdSum {
    fn from(r: Radical) -> Self {
        SurdSum::from(&r)
    }
}

impl AddAssign<&SurdSum> for SurdSum {
    fn add_assign(&mut self, rhs: &SurdSum) {
        for (b, c) in &rhs.terms {
            self.add_term(b.clone(), c.clone());
        }
    }
}

impl Add for &SurdSum {
    type Output = SurdSum;
    fn add(self, rhs: &SurdSum) -> SurdSum {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Neg for &SurdSum {
    type Output = SurdSum;
    fn neg(self) -> SurdSum {
        SurdSum {
            terms: self.terms.iter().map(|(b, c)| (b.clone(), -c)).collect(),
        }
    }
}

impl Sub for &SurdSum {
    type Output = SurdSum;
    fn sub(self, rhs: &SurdSum) -> SurdSum {
        let mut out = self.clone();
        out += &(-rhs);
        out
    }
}

impl Mul for &SurdSum {
    type Output = SurdSum;
    fn mul(self, rhs: &SurdSum) -> SurdSum {
        let mut out = SurdSum::zero();
        for (b1, c1) in &self.terms {
            for (b2, c2) in &rhs.terms {
                // b1, b2 square-free: b1·b2 = g²·(b1/g)(b2/g), the cofactor square-free
                let g = b1.gcd(b2);
                let root = (b1 / &g) * (b2 / &g);
                let coeff = c1 * c2 * BigRational::from_integer(BigInt::from(g));
                out.add_term(root, coeff);
            }
        }
        out
    }
}

impl fmt::Display for SurdSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(b, c)| {
                if b.is_one() {
                    format!("{c}")
                } else {
                    format!("{c}·√{b}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
