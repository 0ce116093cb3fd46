//! Finite-precision arithmetic in `Q_p` and in the ramified quadratic extension
//! `Q_p(π)`, `π² = p`.
//!
//! Precision is data carried by every value, never ambient state. A
//! [`PadicNumber`] is known modulo `p^N` for its absolute precision `N`; a
//! value that is `0 mod p^N` is kept as the explicit marker "valuation ≥ N".
//!
//! Precision rules (all pessimistic):
//! - addition: the minimum of the absolute precisions;
//! - multiplication: the minimum of the relative precisions, shifted by the
//!   sum of the valuations;
//! - inversion: relative precision is preserved.
//!
//! A [`RamifiedElem`] is `A + Bπ` with `A, B ∈ Q_p`. Its π-adic precision is
//! `min(2·prec(A), 2·prec(B) + 1)` and its components are always stored
//! truncated to exactly what that precision determines, so two values are
//! equal iff they agree digit for digit.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadfield::{int_valuation, QuadElem};

/// Default working precision, in base-`p` digits per component.
pub const DEFAULT_PRECISION: i64 = 50;

fn ppow(p: u64, k: i64) -> BigUint {
    debug_assert!(k >= 0);
    BigUint::from(p).pow(k as u32)
}

/// Inverse of `a` modulo `m`, if it exists.
pub(crate) fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    if m.is_one() {
        return Some(BigUint::zero());
    }
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let egcd = a.extended_gcd(&m);
    if !egcd.gcd.is_one() {
        return None;
    }
    egcd.x.mod_floor(&m).to_biguint()
}

/// Valuation of a p-adic value at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PadicValuation {
    Exact(i64),
    /// The value is indistinguishable from zero: its valuation is at least this.
    AtLeast(i64),
}

impl PadicValuation {
    pub fn exact(self) -> Option<i64> {
        match self {
            PadicValuation::Exact(v) => Some(v),
            PadicValuation::AtLeast(_) => None,
        }
    }
}

/// An element of `Q_p` known modulo `p^prec`: `p^val · unit` with
/// `unit ∈ [0, p^(prec - val))` coprime to `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicNumber {
    p: u64,
    prec: i64,
    /// `None` when the value is `0 mod p^prec`.
    val: Option<i64>,
    unit: BigUint,
}

impl PadicNumber {
    /// The marker "valuation ≥ prec".
    pub fn zero(p: u64, prec: i64) -> Self {
        PadicNumber {
            p,
            prec,
            val: None,
            unit: BigUint::zero(),
        }
    }

    /// Builds `p^base · int (mod p^prec)` and normalizes it.
    fn normalize(p: u64, prec: i64, base: i64, int: BigUint) -> Self {
        if base >= prec {
            return Self::zero(p, prec);
        }
        let int = int % ppow(p, prec - base);
        if int.is_zero() {
            return Self::zero(p, prec);
        }
        let pb = BigUint::from(p);
        let mut unit = int;
        let mut val = base;
        loop {
            let (q, r) = unit.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            unit = q;
            val += 1;
        }
        PadicNumber {
            p,
            prec,
            val: Some(val),
            unit,
        }
    }

    /// `p`-adic expansion of `q` modulo `p^prec`.
    pub fn from_rational(q: &BigRational, p: u64, prec: i64) -> Self {
        if q.is_zero() {
            return Self::zero(p, prec);
        }
        let pb = BigInt::from(p);
        let vn = int_valuation(q.numer(), p);
        let vd = int_valuation(q.denom(), p);
        let val = vn - vd;
        if val >= prec {
            return Self::zero(p, prec);
        }
        let num = q.numer() / pb.pow(vn as u32);
        let den = q.denom() / pb.pow(vd as u32);
        let modulus = BigInt::from(ppow(p, prec - val));
        let den_inv = mod_inverse(
            &den.mod_floor(&modulus).to_biguint().unwrap(),
            &modulus.to_biguint().unwrap(),
        )
        .expect("denominator coprime to p");
        let unit = (num.mod_floor(&modulus) * BigInt::from(den_inv)).mod_floor(&modulus);
        PadicNumber {
            p,
            prec,
            val: Some(val),
            unit: unit.to_biguint().unwrap(),
        }
    }

    pub fn from_int(n: i64, p: u64, prec: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(n.into()), p, prec)
    }

    /// The value with residue `int mod p^prec` (an integral element).
    pub fn from_residue(int: BigUint, p: u64, prec: i64) -> Self {
        Self::normalize(p, prec, 0, int)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Absolute precision `N`: the value is known modulo `p^N`.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn valuation(&self) -> PadicValuation {
        match self.val {
            Some(v) => PadicValuation::Exact(v),
            None => PadicValuation::AtLeast(self.prec),
        }
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    pub fn is_distinguishable_from_zero(&self) -> bool {
        self.val.is_some()
    }

    /// Base-`p` digit at absolute position `j` (`j < precision`).
    pub fn digit(&self, j: i64) -> u64 {
        debug_assert!(j < self.prec);
        match self.val {
            Some(v) if j >= v => {
                let shifted = &self.unit / ppow(self.p, j - v);
                (shifted % self.p).to_u64().unwrap()
            }
            _ => 0,
        }
    }

    /// Residue modulo `p^k` of an integral value, `k ≤ precision`.
    pub fn residue_mod(&self, k: i64) -> Option<BigUint> {
        if k > self.prec {
            return None;
        }
        match self.val {
            None => Some(BigUint::zero()),
            Some(v) if v < 0 => None,
            Some(v) if v >= k => Some(BigUint::zero()),
            Some(v) => Some((&self.unit * ppow(self.p, v)) % ppow(self.p, k)),
        }
    }

    /// Lowers the absolute precision to `min(prec, n)`.
    pub fn truncate(&self, n: i64) -> Self {
        if n >= self.prec {
            return self.clone();
        }
        match self.val {
            Some(v) => Self::normalize(self.p, n, v, self.unit.clone()),
            None => Self::zero(self.p, n),
        }
    }

    pub fn neg(&self) -> Self {
        match self.val {
            None => self.clone(),
            Some(v) => {
                let m = ppow(self.p, self.prec - v);
                PadicNumber {
                    unit: &m - &self.unit,
                    ..self.clone()
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        let prec = self.prec.min(other.prec);
        let base = match (self.val, other.val) {
            (None, None) => return Self::zero(self.p, prec),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a.min(b),
        };
        if base >= prec {
            return Self::zero(self.p, prec);
        }
        let mut sum = BigUint::zero();
        for x in [self, other] {
            if let Some(v) = x.val {
                sum += &x.unit * ppow(self.p, v - base);
            }
        }
        Self::normalize(self.p, prec, base, sum)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        match (self.val, other.val) {
            (None, None) => Self::zero(self.p, self.prec + other.prec),
            (None, Some(v)) => Self::zero(self.p, self.prec + v),
            (Some(v), None) => Self::zero(self.p, other.prec + v),
            (Some(a), Some(b)) => {
                let rel = (self.prec - a).min(other.prec - b);
                let val = a + b;
                let unit = (&self.unit * &other.unit) % ppow(self.p, rel);
                PadicNumber {
                    p: self.p,
                    prec: val + rel,
                    val: Some(val),
                    unit,
                }
            }
        }
    }

    /// Multiplies by the exact power `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        PadicNumber {
            prec: self.prec + k,
            val: self.val.map(|v| v + k),
            ..self.clone()
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match self.val {
            None => Err(Error::PrecisionLoss(format!(
                "cannot invert a value indistinguishable from 0 modulo p^{}; precision above {} needed",
                self.prec, self.prec
            ))),
            Some(v) => {
                let rel = self.prec - v;
                let unit = mod_inverse(&self.unit, &ppow(self.p, rel)).expect("unit part coprime to p");
                Ok(PadicNumber { p: self.p, prec: rel - v, val: Some(-v), unit })
            }
        }
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val {
            None => write!(f, "O({}^{})", self.p, self.prec),
            Some(v) => write!(
                f,
                "{}^{} * {} + O({}^{})",
                self.p, v, self.unit, self.p, self.prec
            ),
        }
    }
}

/// An element `A + Bπ` of `Q_p(π)`, `π² = p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RamifiedElem {
    p: u64,
    a: PadicNumber,
    b: PadicNumber,
}

/// π-adic digit form of a [`RamifiedElem`]: `π^valuation · Σ digits[i] π^i + O(π^precision)`.
///
/// A value indistinguishable from zero has `valuation == precision` and no digits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamifiedDigits {
    pub valuation: i64,
    pub digits: Vec<u64>,
    pub precision: i64,
}

fn component_precisions(pi_prec: i64) -> (i64, i64) {
    ((pi_prec + 1).div_euclid(2), pi_prec.div_euclid(2))
}

impl RamifiedElem {
    /// Combines components, truncating them to what the joint π-adic precision determines.
    pub fn from_components(a: PadicNumber, b: PadicNumber) -> Self {
        debug_assert_eq!(a.p, b.p);
        let pi_prec = (2 * a.prec).min(2 * b.prec + 1);
        let (na, nb) = component_precisions(pi_prec);
        RamifiedElem {
            p: a.p,
            a: a.truncate(na),
            b: b.truncate(nb),
        }
    }

    /// Both components known modulo `p^n` (π-adic precision `2n`).
    pub fn from_rational(q: &BigRational, p: u64, n: i64) -> Self {
        Self::from_components(PadicNumber::from_rational(q, p, n), PadicNumber::zero(p, n))
    }

    pub fn one(p: u64, n: i64) -> Self {
        Self::from_rational(&BigRational::one(), p, n)
    }

    /// The uniformizer `π`.
    pub fn pi(p: u64, n: i64) -> Self {
        Self::from_components(PadicNumber::zero(p, n), PadicNumber::from_int(1, p, n))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The `Q_p` component `A`.
    pub fn a(&self) -> &PadicNumber {
        &self.a
    }

    /// The coefficient `B` of `π`.
    pub fn b(&self) -> &PadicNumber {
        &self.b
    }

    /// π-adic absolute precision.
    pub fn precision(&self) -> i64 {
        (2 * self.a.prec).min(2 * self.b.prec + 1)
    }

    /// π-adic valuation; the two components never tie since their parities differ.
    pub fn valuation(&self) -> PadicValuation {
        let va = self.a.val.map(|v| 2 * v);
        let vb = self.b.val.map(|v| 2 * v + 1);
        match (va, vb) {
            (None, None) => PadicValuation::AtLeast(self.precision()),
            (Some(x), None) | (None, Some(x)) => PadicValuation::Exact(x),
            (Some(x), Some(y)) => PadicValuation::Exact(x.min(y)),
        }
    }

    pub fn is_distinguishable_from_zero(&self) -> bool {
        matches!(self.valuation(), PadicValuation::Exact(_))
    }

    /// Whether the value lies in `Q_p`: `Some(false)` when the π-component is
    /// provably nonzero, `None` when it is zero at the available precision.
    pub fn in_base_field(&self) -> Option<bool> {
        if self.b.is_distinguishable_from_zero() {
            Some(false)
        } else {
            None
        }
    }

    /// Decides `self ≡ 1 (mod π)`; `None` if the precision is too low to tell.
    pub fn is_one_mod_pi(&self) -> Option<bool> {
        let diff = self.sub(&Self::one(self.p, self.a.prec.max(1)));
        match diff.valuation() {
            PadicValuation::Exact(v) => Some(v >= 1),
            PadicValuation::AtLeast(v) if v >= 1 => Some(true),
            PadicValuation::AtLeast(_) => None,
        }
    }

    /// Lowers the π-adic precision to `min(precision, n)`.
    pub fn truncate(&self, n: i64) -> Self {
        let (na, nb) = component_precisions(n);
        Self::from_components(self.a.truncate(na), self.b.truncate(nb))
    }

    pub fn neg(&self) -> Self {
        RamifiedElem {
            p: self.p,
            a: self.a.neg(),
            b: self.b.neg(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        Self::from_components(self.a.add(&other.a), self.b.add(&other.b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// `(A + Bπ)(C + Dπ) = (AC + pBD) + (AD + BC)π`.
    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        let a = self.a.mul(&other.a).add(&self.b.mul(&other.b).shift(1));
        let b = self.a.mul(&other.b).add(&self.b.mul(&other.a));
        Self::from_components(a, b)
    }

    /// Galois conjugation `π ↦ -π`.
    pub fn conj(&self) -> Self {
        RamifiedElem {
            p: self.p,
            a: self.a.clone(),
            b: self.b.neg(),
        }
    }

    /// `A² - pB²`, the norm down to `Q_p`.
    pub fn norm(&self) -> PadicNumber {
        self.a.mul(&self.a).sub(&self.b.mul(&self.b).shift(1))
    }

    /// `(A - Bπ) / (A² - pB²)`.
    pub fn inv(&self) -> Result<Self> {
        if !self.is_distinguishable_from_zero() {
            return Err(Error::PrecisionLoss(format!(
                "cannot invert a value indistinguishable from 0 modulo π^{}; precision above {} needed",
                self.precision(),
                self.precision()
            )));
        }
        let n_inv = self.norm().inv()?;
        let c = self.conj();
        Ok(Self::from_components(c.a.mul(&n_inv), c.b.mul(&n_inv)))
    }

    /// Integer power by binary exponentiation; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e == 0 {
            let n = component_precisions(self.precision() - self.valuation_floor()).0;
            return Ok(Self::one(self.p, n));
        }
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc: Option<Self> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(acc) => acc.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc.expect("nonzero exponent"))
    }

    fn valuation_floor(&self) -> i64 {
        match self.valuation() {
            PadicValuation::Exact(v) => v,
            PadicValuation::AtLeast(v) => v,
        }
    }

    /// Canonical π-adic digits: digit `2j` is the `j`-th base-`p` digit of `A`,
    /// digit `2j+1` the `j`-th of `B`.
    pub fn digits(&self) -> RamifiedDigits {
        let precision = self.precision();
        match self.valuation() {
            PadicValuation::AtLeast(_) => RamifiedDigits {
                valuation: precision,
                digits: vec![],
                precision,
            },
            PadicValuation::Exact(v) => {
                let digits = (v..precision)
                    .map(|i| {
                        if i.rem_euclid(2) == 0 {
                            self.a.digit(i.div_euclid(2))
                        } else {
                            self.b.digit(i.div_euclid(2))
                        }
                    })
                    .collect();
                RamifiedDigits {
                    valuation: v,
                    digits,
                    precision,
                }
            }
        }
    }

    /// Rebuilds an element from its canonical digit form, rejecting non-canonical input.
    pub fn from_digits(p: u64, d: &RamifiedDigits) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("π-adic digits: {msg}"));
        if d.valuation > d.precision {
            return Err(bad("valuation exceeds precision"));
        }
        if d.digits.len() as i64 != d.precision - d.valuation {
            return Err(bad("digit count does not match valuation and precision"));
        }
        if d.digits.iter().any(|&x| x >= p) {
            return Err(bad("digit out of range"));
        }
        if d.digits.first() == Some(&0) {
            return Err(bad("leading digit is zero"));
        }
        let (na, nb) = component_precisions(d.precision);
        let lowest = d.valuation.div_euclid(2);
        let mut a = BigUint::zero();
        let mut b = BigUint::zero();
        for (offset, &digit) in d.digits.iter().enumerate().rev() {
            let i = d.valuation + offset as i64;
            let j = i.div_euclid(2) - lowest;
            let term = BigUint::from(digit) * ppow(p, j);
            if i.rem_euclid(2) == 0 {
                a += term;
            } else {
                b += term;
            }
        }
        Ok(Self::from_components(
            PadicNumber::normalize(p, na, lowest, a),
            PadicNumber::normalize(p, nb, lowest, b),
        ))
    }
}

impl fmt::Display for RamifiedElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.digits();
        write!(f, "π^{} · [", d.valuation)?;
        for (i, x) in d.digits.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "] + O(π^{})", d.precision)
    }
}

/// Embeds `x + y sqrt p` into `Q_p(π)` with both components known modulo `p^n`.
pub fn embed(e: &QuadElem, n: i64) -> RamifiedElem {
    let p = e.p();
    RamifiedElem::from_components(
        PadicNumber::from_rational(e.x(), p, n),
        PadicNumber::from_rational(e.y(), p, n),
    )
}

/// Integral elements of `Q_p(π)` reduced modulo `p^k` in both components.
#[derive(Clone)]
struct ResidueElem {
    a: BigUint,
    b: BigUint,
}

struct ResidueRing {
    p: BigUint,
    modulus: BigUint,
}

impl ResidueRing {
    fn new(p: u64, k: i64) -> Self {
        ResidueRing {
            p: BigUint::from(p),
            modulus: ppow(p, k),
        }
    }

    fn reduce(&self, x: &ResidueElem) -> ResidueElem {
        ResidueElem {
            a: &x.a % &self.modulus,
            b: &x.b % &self.modulus,
        }
    }

    fn sub(&self, x: &ResidueElem, y: &ResidueElem) -> ResidueElem {
        let m = &self.modulus;
        ResidueElem {
            a: (&x.a + m - (&y.a % m)) % m,
            b: (&x.b + m - (&y.b % m)) % m,
        }
    }

    fn mul(&self, x: &ResidueElem, y: &ResidueElem) -> ResidueElem {
        let m = &self.modulus;
        ResidueElem {
            a: (&x.a * &y.a + &self.p * &x.b * &y.b) % m,
            b: (&x.a * &y.b + &x.b * &y.a) % m,
        }
    }

    fn scale(&self, x: &ResidueElem, c: u64) -> ResidueElem {
        ResidueElem {
            a: (&x.a * c) % &self.modulus,
            b: (&x.b * c) % &self.modulus,
        }
    }

    fn pow(&self, x: &ResidueElem, mut e: u64) -> ResidueElem {
        let mut acc = ResidueElem {
            a: BigUint::one() % &self.modulus,
            b: BigUint::zero(),
        };
        let mut base = self.reduce(x);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Inverse of an element whose `A` component is a unit.
    fn inv_unit(&self, x: &ResidueElem) -> Option<ResidueElem> {
        let m = &self.modulus;
        let a2 = (&x.a * &x.a) % m;
        let pb2 = (&self.p * &x.b * &x.b) % m;
        let n = (a2 + m - pb2) % m;
        let n_inv = mod_inverse(&n, m)?;
        Some(ResidueElem {
            a: (&x.a * &n_inv) % m,
            b: ((m - &x.b % m) * &n_inv) % m,
        })
    }

    fn is_zero(&self, x: &ResidueElem) -> bool {
        (&x.a % &self.modulus).is_zero() && (&x.b % &self.modulus).is_zero()
    }
}

/// The unique `α ≡ 1 (mod π)` with `α^m ≡ t` modulo `p^n` in both components
/// (so modulo `π^(2n)`), by Newton iteration from `α = 1` with precision doubling.
pub fn hensel_root(t: &RamifiedElem, m: u64, n: i64) -> Result<RamifiedElem> {
    let p = t.p();
    if m == 0 {
        return Err(Error::HenselPrecondition(
            "exponent must be positive".into(),
        ));
    }
    if m.is_multiple_of(p) {
        return Err(Error::HenselPrecondition(format!("gcd({m}, {p}) ≠ 1")));
    }
    if n < 1 {
        return Err(Error::HenselPrecondition(format!(
            "target precision {n} must be at least 1"
        )));
    }
    if t.precision() < 2 * n {
        return Err(Error::PrecisionLoss(format!(
            "hensel_root needs the input known modulo π^{} (component precision {n}), have π^{}",
            2 * n,
            t.precision()
        )));
    }
    match t.is_one_mod_pi() {
        Some(true) => {}
        Some(false) => return Err(Error::HenselPrecondition("t ≢ 1 (mod π)".into())),
        None => {
            return Err(Error::HenselPrecondition(
                "t ≡ 1 (mod π) undecidable at input precision".into(),
            ))
        }
    }
    let target = ResidueElem {
        a: t.a.residue_mod(n).expect("integral"),
        b: t.b.residue_mod(n).expect("integral"),
    };

    // Levels 1, 2, 4, ... ending exactly at n.
    let mut levels = vec![n];
    while *levels.last().unwrap() > 1 {
        let l = *levels.last().unwrap();
        levels.push((l + 1) / 2);
    }
    levels.reverse();

    let mut alpha = ResidueElem {
        a: BigUint::one(),
        b: BigUint::zero(),
    };
    for &level in &levels {
        let ring = ResidueRing::new(p, level);
        let t_l = ring.reduce(&target);
        let power = ring.pow(&alpha, m - 1);
        let residual = ring.sub(&ring.mul(&power, &alpha), &t_l);
        let derivative = ring.scale(&power, m);
        let step = ring.mul(
            &residual,
            &ring
                .inv_unit(&derivative)
                .ok_or_else(|| Error::Internal("Newton derivative is not a unit".into()))?,
        );
        alpha = ring.sub(&alpha, &step);
        let check = ring.sub(&ring.pow(&alpha, m), &t_l);
        if !ring.is_zero(&check) {
            return Err(Error::Internal(format!(
                "Newton residual nonzero modulo p^{level}"
            )));
        }
    }
    Ok(RamifiedElem::from_components(
        PadicNumber::from_residue(alpha.a, p, n),
        PadicNumber::from_residue(alpha.b, p, n),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn q(p: u64, x: i64, y: i64) -> QuadElem {
        QuadElem::from_ints(p, x, y).unwrap()
    }

    #[test]
    fn rational_expansion() {
        let x = PadicNumber::from_rational(&rat(1, 5), 5, 10);
        assert_eq!(x.valuation(), PadicValuation::Exact(-1));
        assert_eq!(x.unit(), &BigUint::one());

        let x = PadicNumber::from_rational(&rat(36, 1), 5, 3);
        assert_eq!(x.valuation(), PadicValuation::Exact(0));
        assert_eq!(
            (0..3).map(|j| x.digit(j)).collect::<Vec<_>>(),
            vec![1, 2, 1]
        );

        let z = PadicNumber::from_rational(&rat(0, 1), 5, 7);
        assert_eq!(z.valuation(), PadicValuation::AtLeast(7));
        assert!(!z.is_distinguishable_from_zero());

        // 125 at precision 3 is zero at that precision
        assert_eq!(
            PadicNumber::from_int(125, 5, 3).valuation(),
            PadicValuation::AtLeast(3)
        );

        // -1 = (p-1)(1 + p + p^2 + ...)
        let m1 = PadicNumber::from_int(-1, 7, 4);
        assert_eq!(
            (0..4).map(|j| m1.digit(j)).collect::<Vec<_>>(),
            vec![6, 6, 6, 6]
        );

        // 1/3 in Z_5: 3 · 2 = 6 ≡ 1 mod 5
        let third = PadicNumber::from_rational(&rat(1, 3), 5, 6);
        assert_eq!(
            third.mul(&PadicNumber::from_int(3, 5, 6)),
            PadicNumber::from_int(1, 5, 6)
        );
    }

    #[test]
    fn padic_precision_rules() {
        let p = 5;
        let a = PadicNumber::from_int(7, p, 10);
        let b = PadicNumber::from_int(3, p, 4);
        assert_eq!(a.add(&b).precision(), 4);
        assert_eq!(a.add(&b), PadicNumber::from_int(10, p, 4));
        // 25 · 7: valuation 2, relative precision 8 → absolute 10
        let c = PadicNumber::from_int(25, p, 10).mul(&a);
        assert_eq!(c.valuation(), PadicValuation::Exact(2));
        assert_eq!(c.precision(), 10);
        let d = PadicNumber::from_int(7, p, 10).mul(&PadicNumber::from_int(2, p, 10));
        assert_eq!(d.precision(), 10);
        // cancellation lowers the valuation but never invents digits
        let e = PadicNumber::from_int(1, p, 10).sub(&PadicNumber::from_int(1, p, 10));
        assert_eq!(e.valuation(), PadicValuation::AtLeast(10));
        let inv = PadicNumber::from_int(50, p, 10).inv().unwrap();
        assert_eq!(inv.valuation(), PadicValuation::Exact(-2));
        assert_eq!(inv.precision(), 6);
        assert!(matches!(
            PadicNumber::zero(p, 3).inv(),
            Err(Error::PrecisionLoss(_))
        ));
    }

    #[test]
    fn ramified_basics() {
        let p = 5;
        let n = 20;
        let one = RamifiedElem::one(p, n);
        let pi = RamifiedElem::pi(p, n);
        let lhs = one.add(&pi).mul(&one.sub(&pi));
        assert_eq!(lhs, RamifiedElem::from_rational(&rat(1 - 5, 1), p, n));

        for c in [2i64, 3, 4, 7, -12] {
            let inv = RamifiedElem::from_rational(&rat(c, 1), p, n).inv().unwrap();
            assert_eq!(inv, RamifiedElem::from_rational(&rat(1, c), p, n));
        }

        let pi_inv = pi.inv().unwrap();
        assert_eq!(pi_inv.valuation(), PadicValuation::Exact(-1));
        let prod = pi_inv.mul(&pi);
        assert_eq!(prod, RamifiedElem::one(p, n).truncate(prod.precision()));
        assert!(prod.precision() >= 2 * n - 2);

        assert_eq!(pi.conj(), pi.neg());
        assert_eq!(embed(&q(5, 0, 1), n), pi);
        assert_eq!(
            embed(&q(5, 36, 16), n).valuation(),
            PadicValuation::Exact(0)
        );
        assert_eq!(embed(&q(5, 10, 4), n).valuation(), PadicValuation::Exact(1));

        let u = embed(&q(13, 18, 5), n);
        let norm = u.conj().mul(&u);
        assert_eq!(norm.in_base_field(), None);
        assert!(!norm.b().is_distinguishable_from_zero());
        assert_eq!(norm.a(), &PadicNumber::from_int(-1, 13, n));

        assert!(matches!(
            RamifiedElem::from_rational(&rat(0, 1), p, 4).inv(),
            Err(Error::PrecisionLoss(_))
        ));
    }

    #[test]
    fn digit_form() {
        let p = 5;
        // 36 + 16π = (1 + 2·5 + 1·25) + (1 + 3·5)π → digits 1,1,2,3,1,0 ...
        let e = embed(&q(5, 36, 16), 3);
        let d = e.digits();
        assert_eq!(d.valuation, 0);
        assert_eq!(d.precision, 6);
        assert_eq!(d.digits, vec![1, 1, 2, 3, 1, 0]);
        assert_eq!(RamifiedElem::from_digits(p, &d).unwrap(), e);

        let small = embed(&QuadElem::new(5, rat(3, 25), rat(2, 5)).unwrap(), 4);
        let d = small.digits();
        assert_eq!(d.valuation, -4);
        assert_eq!(RamifiedElem::from_digits(p, &d).unwrap(), small);

        let z = RamifiedElem::from_rational(&rat(0, 1), p, 4);
        assert_eq!(
            z.digits(),
            RamifiedDigits {
                valuation: 8,
                digits: vec![],
                precision: 8
            }
        );
        assert_eq!(RamifiedElem::from_digits(p, &z.digits()).unwrap(), z);

        let bad = RamifiedDigits {
            valuation: 0,
            digits: vec![1, 5],
            precision: 2,
        };
        assert!(RamifiedElem::from_digits(p, &bad).is_err());
        let bad = RamifiedDigits {
            valuation: 0,
            digits: vec![0, 1],
            precision: 2,
        };
        assert!(RamifiedElem::from_digits(p, &bad).is_err());
        let bad = RamifiedDigits {
            valuation: 0,
            digits: vec![1],
            precision: 2,
        };
        assert!(RamifiedElem::from_digits(p, &bad).is_err());
    }

    /// All `(A, B) ∈ (Z/p²)²` with `A ≡ 1 (mod p)` and `(A + Bπ)^m ≡ t (mod p²)`.
    fn brute_force_roots(p: i64, m: u32, t: (i64, i64)) -> Vec<(i64, i64)> {
        let md = p * p;
        let mut out = Vec::new();
        for a in (1..md).step_by(p as usize) {
            for b in 0..md {
                let (mut x, mut y) = (1i64, 0i64);
                for _ in 0..m {
                    (x, y) = (
                        (x * a + p * y * b).rem_euclid(md),
                        (x * b + y * a).rem_euclid(md),
                    );
                }
                if (x, y) == (t.0.rem_euclid(md), t.1.rem_euclid(md)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    #[test]
    fn hensel_matches_brute_force() {
        let t = embed(&q(5, 36, 16), 50);
        let alpha = hensel_root(&t, 4, 50).unwrap();
        assert_eq!(alpha.pow(4).unwrap(), t);
        assert_eq!(alpha.is_one_mod_pi(), Some(true));
        let roots = brute_force_roots(5, 4, (36, 16));
        assert_eq!(roots.len(), 1);
        let low = alpha.truncate(4);
        let (a, b) = roots[0];
        assert_eq!(
            low,
            RamifiedElem::from_components(
                PadicNumber::from_int(a, 5, 2),
                PadicNumber::from_int(b, 5, 2)
            )
        );
    }

    #[test]
    fn hensel_trivial_cases() {
        let one = RamifiedElem::one(13, 30);
        assert_eq!(hensel_root(&one, 6, 30).unwrap(), one);
        let t = embed(&q(13, 14, 9), 30);
        assert_eq!(hensel_root(&t, 1, 30).unwrap(), t);
    }

    #[test]
    fn hensel_errors() {
        let t = embed(&q(5, 36, 16), 10);
        assert!(matches!(
            hensel_root(&t, 5, 10),
            Err(Error::HenselPrecondition(_))
        ));
        assert!(matches!(
            hensel_root(&t, 4, 11),
            Err(Error::PrecisionLoss(_))
        ));
        let not_one = embed(&q(5, 2, 1), 10);
        assert!(matches!(
            hensel_root(&not_one, 4, 10),
            Err(Error::HenselPrecondition(_))
        ));
        let non_integral = embed(&QuadElem::new(5, rat(1, 5), rat(0, 1)).unwrap(), 10);
        assert!(matches!(
            hensel_root(&non_integral, 4, 10),
            Err(Error::HenselPrecondition(_))
        ));
    }

    fn prime() -> impl Strategy<Value = u64> {
        prop::sample::select(vec![5u64, 13, 17, 29])
    }

    fn quad(p: u64) -> impl Strategy<Value = QuadElem> {
        (-400i64..400, 1i64..60, -400i64..400, 1i64..60)
            .prop_map(move |(a, b, c, d)| QuadElem::new(p, rat(a, b), rat(c, d)).unwrap())
    }

    fn quad_pair() -> impl Strategy<Value = (QuadElem, QuadElem)> {
        prime().prop_flat_map(|p| (quad(p), quad(p)))
    }

    /// `low` is what `high` determines at `low`'s precision.
    fn agrees(low: &RamifiedElem, high: &RamifiedElem) -> bool {
        high.precision() >= low.precision() && &high.truncate(low.precision()) == low
    }

    proptest! {
        #[test]
        fn embed_is_ring_hom((e1, e2) in quad_pair()) {
            let n = 30;
            let prod = embed(&e1.checked_mul(&e2).unwrap(), n);
            let lhs = embed(&e1, n).mul(&embed(&e2, n));
            prop_assert_eq!(&lhs.truncate(prod.precision()), &prod.truncate(lhs.precision()));
            let sum = embed(&e1.checked_add(&e2).unwrap(), n);
            prop_assert_eq!(embed(&e1, n).add(&embed(&e2, n)), sum);
        }

        #[test]
        fn embed_commutes_with_conjugation(e in prime().prop_flat_map(quad)) {
            prop_assert_eq!(embed(&e, 25).conj(), embed(&e.conjugate(), 25));
            prop_assert_eq!(embed(&e, 25).conj().conj(), embed(&e, 25));
        }

        #[test]
        fn valuation_is_additive((e1, e2) in quad_pair()) {
            prop_assume!(!e1.is_zero() && !e2.is_zero());
            let (x, y) = (embed(&e1, 30), embed(&e2, 30));
            let vx = x.valuation().exact().unwrap();
            let vy = y.valuation().exact().unwrap();
            prop_assert_eq!(vx, e1.valuation_ramified().finite().unwrap());
            prop_assert_eq!(x.mul(&y).valuation(), PadicValuation::Exact(vx + vy));
        }

        #[test]
        fn precision_soundness((e1, e2) in quad_pair(), k in -3i64..6) {
            let (n, hi) = (20, 30);
            let (x, y) = (embed(&e1, n), embed(&e2, n));
            let (xh, yh) = (embed(&e1, hi), embed(&e2, hi));
            prop_assert!(agrees(&x.add(&y), &xh.add(&yh)));
            prop_assert!(agrees(&x.mul(&y), &xh.mul(&yh)));
            prop_assert!(agrees(&x.conj(), &xh.conj()));
            if !e1.is_zero() {
                prop_assert!(agrees(&x.inv().unwrap(), &xh.inv().unwrap()));
                prop_assert!(agrees(&x.pow(k).unwrap(), &xh.pow(k).unwrap()));
            }
        }

        #[test]
        fn inverse_is_inverse(e in prime().prop_flat_map(quad)) {
            prop_assume!(!e.is_zero());
            let x = embed(&e, 30);
            let prod = x.mul(&x.inv().unwrap());
            let common = prod.precision().min(60);
            prop_assert!(common >= 50);
            prop_assert_eq!(prod.truncate(common), RamifiedElem::one(e.p(), 30).truncate(common));
        }

        #[test]
        fn digits_round_trip(e in prime().prop_flat_map(quad), n in 1i64..12) {
            let x = embed(&e, n);
            prop_assert_eq!(RamifiedElem::from_digits(e.p(), &x.digits()).unwrap(), x);
        }

        #[test]
        fn hensel_root_is_root(p in prime(), c in 1u64..4, y in -50i64..50, m in 1u64..14) {
            prop_assume!(m % p != 0);
            // t = 1 + p·c + yπ is ≡ 1 mod π
            let t = embed(&QuadElem::from_ints(p, 1 + (p * c) as i64, y).unwrap(), 25);
            let alpha = hensel_root(&t, m, 25).unwrap();
            prop_assert_eq!(alpha.precision(), 50);
            prop_assert_eq!(alpha.pow(m as i64).unwrap(), t.clone());
            prop_assert_eq!(alpha.is_one_mod_pi(), Some(true));
            let high = hensel_root(&embed(&QuadElem::from_ints(p, 1 + (p * c) as i64, y).unwrap(), 35), m, 35).unwrap();
            prop_assert!(agrees(&alpha, &high));
        }
    }
}
