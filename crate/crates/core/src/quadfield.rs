//! Exact arithmetic in the real quadratic field `K = Q(sqrt p)` for primes
//! `p ≡ 1 (mod 4)`, together with the valuation at the ramified prime
//! `𝔭 = (sqrt p)` and the residue map to `F_p`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Checks that `p` is admissible as the field parameter: prime and `≡ 1 (mod 4)`.
pub fn check_field_prime(p: u64) -> Result<()> {
    if p % 4 == 1 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidPrime(p))
    }
}

/// `p`-adic valuation of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `p`-adic valuation of a rational, `None` for zero.
pub fn rational_valuation(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        None
    } else {
        Some(int_valuation(q.numer(), p) - int_valuation(q.denom(), p))
    }
}

/// Valuation at the ramified prime. Zero is a distinguished `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => f.write_str("+inf"),
        }
    }
}

/// An element `x + y·sqrt(p)` of `Q(sqrt p)`.
///
/// Rationals are kept in reduced form with positive denominator, so equality
/// is structural on `(p, x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadElem {
    p: u64,
    x: BigRational,
    y: BigRational,
}

impl QuadElem {
    pub fn new(p: u64, x: BigRational, y: BigRational) -> Result<Self> {
        check_field_prime(p)?;
        Ok(Self::from_parts(p, x, y))
    }

    /// Builds an element without re-validating `p`; callers hold a validated prime.
    pub(crate) fn from_parts(p: u64, x: BigRational, y: BigRational) -> Self {
        // BigRational is always reduced with a positive denominator.
        QuadElem { p, x, y }
    }

    pub fn from_ints(p: u64, x: i64, y: i64) -> Result<Self> {
        Self::new(
            p,
            BigRational::from_integer(x.into()),
            BigRational::from_integer(y.into()),
        )
    }

    pub fn from_rational(p: u64, q: BigRational) -> Result<Self> {
        Self::new(p, q, BigRational::zero())
    }

    pub fn zero(p: u64) -> Result<Self> {
        Self::from_ints(p, 0, 0)
    }

    pub fn one(p: u64) -> Result<Self> {
        Self::from_ints(p, 1, 0)
    }

    /// The uniformizer `sqrt p`.
    pub fn sqrt_p(p: u64) -> Result<Self> {
        Self::from_ints(p, 0, 1)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Rational part.
    pub fn x(&self) -> &BigRational {
        &self.x
    }

    /// Coefficient of `sqrt p`.
    pub fn y(&self) -> &BigRational {
        &self.y
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.x.is_one() && self.y.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(Error::FieldMismatch(self.p, other.p))
        }
    }

    fn p_rat(&self) -> BigRational {
        BigRational::from_integer(self.p.into())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self::from_parts(
            self.p,
            &self.x + &other.x,
            &self.y + &other.y,
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self::from_parts(
            self.p,
            &self.x - &other.x,
            &self.y - &other.y,
        ))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.mul_same(other))
    }

    fn mul_same(&self, other: &Self) -> Self {
        let x = &self.x * &other.x + self.p_rat() * &self.y * &other.y;
        let y = &self.x * &other.y + &self.y * &other.x;
        Self::from_parts(self.p, x, y)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.mul_same(&other.inv()?))
    }

    /// `(x - y sqrt p) / (x^2 - p y^2)`.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // nonzero since sqrt p is irrational
        let n = self.norm();
        Ok(Self::from_parts(self.p, &self.x / &n, -&self.y / &n))
    }

    pub fn neg(&self) -> Self {
        Self::from_parts(self.p, -&self.x, -&self.y)
    }

    /// Multiplies by a rational scalar.
    pub fn scale(&self, q: &BigRational) -> Self {
        Self::from_parts(self.p, &self.x * q, &self.y * q)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<Self> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::from_parts(self.p, BigRational::one(), BigRational::zero());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_same(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_same(&base);
            }
        }
        Ok(acc)
    }

    /// Galois conjugate `x - y sqrt p`.
    pub fn conjugate(&self) -> Self {
        Self::from_parts(self.p, self.x.clone(), -&self.y)
    }

    /// `N(e) = x^2 - p y^2 = e · conjugate(e)`.
    pub fn norm(&self) -> BigRational {
        &self.x * &self.x - self.p_rat() * &self.y * &self.y
    }

    pub fn trace(&self) -> BigRational {
        &self.x + &self.x
    }

    /// Valuation at `𝔭 = (sqrt p)`: `min(2 v_p(x), 2 v_p(y) + 1)`.
    pub fn valuation_ramified(&self) -> Valuation {
        let vx = rational_valuation(&self.x, self.p).map(|v| 2 * v);
        let vy = rational_valuation(&self.y, self.p).map(|v| 2 * v + 1);
        match (vx, vy) {
            (None, None) => Valuation::Infinity,
            (Some(a), None) | (None, Some(a)) => Valuation::Finite(a),
            (Some(a), Some(b)) => Valuation::Finite(a.min(b)),
        }
    }

    /// The least positive integer `c` with `e ≡ c (mod 𝔭)`.
    pub fn residue(&self) -> Result<u64> {
        match self.valuation_ramified() {
            Valuation::Finite(0) => {}
            other => return Err(Error::NotUnit(other.to_string())),
        }
        let p = BigInt::from(self.p);
        // x is a p-adic unit here, so its denominator is invertible mod p.
        let num = self.x.numer().mod_floor(&p);
        let den = self.x.denom().mod_floor(&p);
        let den_inv = den.modpow(&(&p - 2u32), &p);
        let c = (num * den_inv).mod_floor(&p);
        Ok(c.to_u64().expect("residue below p"))
    }

    /// Parses `"x+y*sqrtP"` style input, e.g. `"36+16*sqrt5"`, `"-1/2-sqrt13"`, `"sqrt5"`.
    pub fn parse(s: &str, p: u64) -> Result<Self> {
        check_field_prime(p)?;
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty element".into()));
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-')
                && bytes[i - 1] != b'/'
                && bytes[i - 1] != b'*'
            {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        let radical = format!("sqrt{p}");
        let mut x = BigRational::zero();
        let mut y = BigRational::zero();
        for term in terms {
            if let Some(pos) = term.find("sqrt") {
                if term[pos..] != radical {
                    return Err(Error::Parse(format!(
                        "expected `{radical}` in term `{term}`"
                    )));
                }
                let coeff = match (&term[..pos], term[..pos].strip_suffix('*')) {
                    ("" | "+", _) => BigRational::one(),
                    ("-", _) => -BigRational::one(),
                    (_, Some(c)) if !matches!(c, "" | "+" | "-") => parse_rational(c)?,
                    _ => {
                        return Err(Error::Parse(format!(
                            "malformed coefficient in term `{term}`"
                        )))
                    }
                };
                y += coeff;
            } else {
                x += parse_rational(term)?;
            }
        }
        Ok(Self::from_parts(p, x, y))
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.p;
        if self.y.is_zero() {
            return write!(f, "{}", self.x);
        }
        if !self.x.is_zero() {
            write!(f, "{}", self.x)?;
            f.write_str(if self.y.is_negative() { "-" } else { "+" })?;
        } else if self.y.is_negative() {
            f.write_str("-")?;
        }
        let ay = self.y.abs();
        if ay.is_one() {
            write!(f, "sqrt{p}")
        } else {
            write!(f, "{ay}*sqrt{p}")
        }
    }
}

/// Parses `"num/den"` or `"num"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("malformed rational `{s}`"));
    let s = s.strip_prefix('+').unwrap_or(s);
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n).map_err(|_| bad())?;
            let d = BigInt::from_str(d).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

/// Decimal `"num/den"`, with `/den` omitted when the denominator is 1.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct QuadElemRepr {
    #[serde(with = "rational_string")]
    x: BigRational,
    #[serde(with = "rational_string")]
    y: BigRational,
    p: u64,
}

impl Serialize for QuadElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadElemRepr {
            x: self.x.clone(),
            y: self.y.clone(),
            p: self.p,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = QuadElemRepr::deserialize(d)?;
        QuadElem::new(r.p, r.x, r.y).map_err(serde::de::Error::custom)
    }
}
