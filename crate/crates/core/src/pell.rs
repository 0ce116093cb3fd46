//! The negative Pell equation `x^2 - p y^2 = -1` via the continued fraction of `sqrt p`.

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadfield::{check_field_prime, QuadElem};

/// A positive solution of `x^2 - p y^2 = -1`.
///
/// `index` k identifies the solution as `v0^(2k+1)` where `v0` is the
/// fundamental one (index 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PellSolution {
    pub p: u64,
    #[serde(with = "bigint_string")]
    pub x: BigInt,
    #[serde(with = "bigint_string")]
    pub y: BigInt,
    pub index: u64,
}

impl PellSolution {
    pub fn to_quad(&self) -> QuadElem {
        QuadElem::from_parts(
            self.p,
            BigRational::from_integer(self.x.clone()),
            BigRational::from_integer(self.y.clone()),
        )
    }

    /// Exact check of `x^2 - p y^2 = -1`.
    pub fn is_valid(&self) -> bool {
        &self.x * &self.x - BigInt::from(self.p) * &self.y * &self.y == BigInt::from(-1)
    }
}

/// Continued fraction of `sqrt n` as `(a0, period)`, with `sqrt n = [a0; period, period, ...]`.
pub fn cf_sqrt(n: u64) -> Result<(u64, Vec<u64>)> {
    let a0 = n.sqrt();
    if a0 * a0 == n {
        return Err(Error::PerfectSquare(n));
    }
    // Standard recurrence on (m, d, a); all quantities stay below 2·sqrt(n).
    let (mut m, mut d, mut a) = (0u64, 1u64, a0);
    let mut period = Vec::new();
    loop {
        m = d * a - m;
        d = (n - m * m) / d;
        a = (a0 + m) / d;
        period.push(a);
        if a == 2 * a0 {
            return Ok((a0, period));
        }
    }
}

/// Numerators and denominators of the convergents `h_i / k_i` for the given partial quotients.
fn convergents(quotients: impl IntoIterator<Item = u64>) -> Vec<(BigInt, BigInt)> {
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::new();
    for a in quotients {
        let a = BigInt::from(a);
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        out.push((h.clone(), k.clone()));
    }
    out
}

/// The minimal positive solution of `x^2 - p y^2 = -1`.
pub fn fundamental_negative(p: u64) -> Result<PellSolution> {
    check_field_prime(p)?;
    let (a0, period) = cf_sqrt(p)?;
    if period.len() % 2 == 0 {
        return Err(Error::Internal(format!(
            "continued fraction of sqrt {p} has even period {}; no norm -1 unit",
            period.len()
        )));
    }
    // The convergent just before the end of the first period.
    let quotients = std::iter::once(a0).chain(period[..period.len() - 1].iter().copied());
    let (x, y) = convergents(quotients).pop().expect("at least a0");
    let sol = PellSolution { p, x, y, index: 0 };
    if !sol.is_valid() {
        return Err(Error::Internal(format!(
            "convergent {}/{} is not a Pell solution",
            sol.x, sol.y
        )));
    }
    Ok(sol)
}

/// The k-th norm -1 solution `v0^(2k+1)` as a field element.
pub fn solution_at(p: u64, k: u64) -> Result<QuadElem> {
    Ok(pell_solution_at(p, k)?.to_quad())
}

/// The k-th norm -1 solution with its index recorded.
pub fn pell_solution_at(p: u64, k: u64) -> Result<PellSolution> {
    let fundamental = fundamental_negative(p)?;
    let v0 = fundamental.to_quad();
    let exponent =
        i64::try_from(2 * k + 1).map_err(|_| Error::Internal("Pell index too large".into()))?;
    let v = v0.pow(exponent)?;
    let sol = PellSolution {
        p,
        x: v.x().to_integer(),
        y: v.y().to_integer(),
        index: k,
    };
    if !sol.is_valid() {
        return Err(Error::Internal(format!(
            "odd power {exponent} lost norm -1"
        )));
    }
    Ok(sol)
}

/// The first `count` solutions, by increasing index.
pub fn solutions(p: u64, count: u64) -> Result<Vec<PellSolution>> {
    (0..count).map(|k| pell_solution_at(p, k)).collect()
}

pub(crate) mod bigint_string {
    use std::str::FromStr;

    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive search for the least y with p·y² - 1 a perfect square.
    fn brute_force(p: u64, bound: u64) -> Option<(u64, u64)> {
        (1..=bound).find_map(|y| {
            let t = p * y * y - 1;
            let x = t.sqrt();
            (x * x == t).then_some((x, y))
        })
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(cf_sqrt(5).unwrap(), (2, vec![4]));
        assert_eq!(cf_sqrt(2).unwrap(), (1, vec![2]));
        assert_eq!(cf_sqrt(13).unwrap(), (3, vec![1, 1, 1, 1, 6]));
        assert_eq!(cf_sqrt(7).unwrap(), (2, vec![1, 1, 1, 4]));
        assert!(matches!(cf_sqrt(16), Err(Error::PerfectSquare(16))));
        assert!(cf_sqrt(0).is_err());
    }

    #[test]
    fn convergents_approach_sqrt() {
        // |h/k - sqrt n| < 1/k^2 for every convergent
        for n in [2u64, 3, 5, 13, 19, 31] {
            let (a0, period) = cf_sqrt(n).unwrap();
            let qs = std::iter::once(a0).chain(period.iter().cycle().take(12).copied());
            for (h, k) in convergents(qs) {
                let h = h.to_string().parse::<f64>().unwrap();
                let k = k.to_string().parse::<f64>().unwrap();
                assert!((h / k - (n as f64).sqrt()).abs() < 1.0 / (k * k) + 1e-12);
            }
        }
    }

    #[test]
    fn fundamental_solutions_match_search() {
        for (p, x, y) in [
            (5u64, 2i64, 1i64),
            (13, 18, 5),
            (17, 4, 1),
            (29, 70, 13),
            (37, 6, 1),
            (41, 32, 5),
        ] {
            let sol = fundamental_negative(p).unwrap();
            assert_eq!(
                (sol.x.clone(), sol.y.clone()),
                (BigInt::from(x), BigInt::from(y))
            );
            assert_eq!(brute_force(p, 100), Some((x as u64, y as u64)));
        }
    }

    #[test]
    fn fundamental_requires_admissible_prime() {
        assert!(matches!(
            fundamental_negative(7),
            Err(Error::InvalidPrime(7))
        ));
        assert!(fundamental_negative(25).is_err());
    }

    #[test]
    fn odd_powers() {
        assert_eq!(
            solution_at(5, 0).unwrap(),
            QuadElem::from_ints(5, 2, 1).unwrap()
        );
        assert_eq!(
            solution_at(5, 1).unwrap(),
            QuadElem::from_ints(5, 38, 17).unwrap()
        );
        for p in [5u64, 13, 17, 29, 37, 41, 53, 61] {
            let sols = solutions(p, 6).unwrap();
            for (k, s) in sols.iter().enumerate() {
                assert!(s.is_valid());
                assert_eq!(s.to_quad().norm(), BigRational::from_integer((-1).into()));
                assert_eq!(s.index, k as u64);
            }
            for w in sols.windows(2) {
                assert!(w[0].x < w[1].x && w[0].y < w[1].y);
            }
        }
    }

    #[test]
    fn json_lines_form() {
        let s = serde_json::to_string(&pell_solution_at(13, 0).unwrap()).unwrap();
        assert_eq!(s, r#"{"p":13,"x":"18","y":"5","index":0}"#);
    }
}
