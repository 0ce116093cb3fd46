//! Filtered period data of `C_a`: the `Fil¹` basis `x^i dx/y`, the diagonal
//! pullback along `φ: C_c → C_a`, `(x, y) ↦ (α⁻¹x, α^-(g+1) y)`, and the
//! minimal period `α^(g(g+1)/2)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{RamifiedDigits, RamifiedElem};
use crate::quadfield::QuadElem;

/// Pullback convention recorded alongside every period.
pub const PULLBACK_CONVENTION: &str =
    "phi: C_c -> C_a, (x, y) -> (alpha^-1 x, alpha^-(g+1) y); phi^*(x^i dx/y) = alpha^(g-i) x^i dx/y";

/// The holomorphic differential `x^i dx/y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Differential {
    pub index: u64,
}

impl fmt::Display for Differential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            0 => f.write_str("dx/y"),
            1 => f.write_str("x dx/y"),
            i => write!(f, "x^{i} dx/y"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredBasis {
    pub g: u64,
    pub forms: Vec<Differential>,
}

pub fn filtered_basis(g: u64) -> FilteredBasis {
    FilteredBasis {
        g,
        forms: (0..g).map(|index| Differential { index }).collect(),
    }
}

/// Matrix of `φ*` on `Fil¹` in the basis `x^i dx/y`; diagonal, entry `i` is `α^(g-i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodMatrix {
    pub g: u64,
    pub diagonal: Vec<RamifiedElem>,
}

impl PeriodMatrix {
    pub fn determinant(&self) -> Option<RamifiedElem> {
        let mut entries = self.diagonal.iter();
        let first = entries.next()?.clone();
        Some(entries.fold(first, |acc, e| acc.mul(e)))
    }
}

fn require_one_mod_pi(alpha: &RamifiedElem) -> Result<()> {
    match alpha.is_one_mod_pi() {
        Some(true) => Ok(()),
        Some(false) => Err(Error::HenselPrecondition("α ≢ 1 (mod π)".into())),
        None => Err(Error::PrecisionLoss(
            "α ≡ 1 (mod π) undecidable at available precision".into(),
        )),
    }
}

fn exponent(k: u64) -> Result<i64> {
    i64::try_from(k).map_err(|_| Error::Internal(format!("exponent {k} too large")))
}

pub fn pullback_matrix(alpha: &RamifiedElem, g: u64) -> Result<PeriodMatrix> {
    require_one_mod_pi(alpha)?;
    let diagonal = (0..g)
        .map(|i| alpha.pow(exponent(g - i)?))
        .collect::<Result<_>>()?;
    Ok(PeriodMatrix { g, diagonal })
}

/// `𝒫_min = α^d`, `d = g(g+1)/2`, with `precision` in π-adic digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalPeriod {
    pub value: RamifiedElem,
    pub d: u64,
    pub precision: i64,
}

pub fn minimal_period(alpha: &RamifiedElem, g: u64) -> Result<MinimalPeriod> {
    if g == 0 {
        return Err(Error::Internal("genus must be positive".into()));
    }
    let matrix = pullback_matrix(alpha, g)?;
    let d = crate::construct::period_exponent(g);
    let value = alpha.pow(exponent(d)?)?;
    let det = matrix.determinant().expect("g ≥ 1");
    if det != value {
        return Err(Error::Internal(format!(
            "det of pullback ≠ α^{d} at precision {}",
            value.precision()
        )));
    }
    let precision = value.precision();
    Ok(MinimalPeriod {
        value,
        d,
        precision,
    })
}

/// JSON form of a minimal period with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalPeriodRecord {
    pub value: RamifiedDigits,
    pub d: u64,
    pub precision: i64,
    pub p: u64,
    pub g: u64,
    pub a: QuadElem,
    pub c: u64,
    pub convention: String,
}

impl MinimalPeriod {
    pub fn record(&self, g: u64, a: &QuadElem, c: u64) -> MinimalPeriodRecord {
        MinimalPeriodRecord {
            value: self.value.digits(),
            d: self.d,
            precision: self.precision,
            p: self.value.p(),
            g,
            a: a.clone(),
            c,
            convention: PULLBACK_CONVENTION.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{embed, hensel_root};

    fn alpha_5_1(n: i64) -> RamifiedElem {
        let t = embed(&QuadElem::from_ints(5, 36, 16).unwrap(), n);
        hensel_root(&t, 4, n).unwrap()
    }

    #[test]
    fn bases() {
        assert_eq!(filtered_basis(1).forms, vec![Differential { index: 0 }]);
        let b2 = filtered_basis(2);
        assert_eq!(
            b2.forms.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            vec!["dx/y", "x dx/y"]
        );
        let b5 = filtered_basis(5);
        assert_eq!(b5.forms.len(), 5);
        assert_eq!(b5.forms.last().unwrap().index, 4);
        assert!(b5.forms.windows(2).all(|w| w[0].index < w[1].index));
        assert_eq!(b5.forms[4].to_string(), "x^4 dx/y");
    }

    #[test]
    fn diagonal_entries() {
        let alpha = alpha_5_1(20);
        assert_eq!(
            pullback_matrix(&alpha, 1).unwrap().diagonal,
            vec![alpha.clone()]
        );
        let m3 = pullback_matrix(&alpha, 3).unwrap();
        let expected: Vec<_> = [3, 2, 1].iter().map(|&k| alpha.pow(k).unwrap()).collect();
        assert_eq!(m3.diagonal, expected);
    }

    #[test]
    fn determinant_is_minimal_period() {
        let alpha = alpha_5_1(50);
        for g in [1u64, 2, 3, 5, 9, 13] {
            let mp = minimal_period(&alpha, g).unwrap();
            assert_eq!(mp.d, g * (g + 1) / 2);
            assert_eq!(
                pullback_matrix(&alpha, g).unwrap().determinant().unwrap(),
                mp.value
            );
            assert_eq!(mp.value.is_one_mod_pi(), Some(true));
        }
        assert_eq!(minimal_period(&alpha, 1).unwrap().value, alpha);
    }

    #[test]
    fn exponent_sum() {
        for g in 1..=10_000u64 {
            assert_eq!((0..g).map(|i| g - i).sum::<u64>(), g * (g + 1) / 2);
        }
    }

    #[test]
    fn period_of_one() {
        let one = RamifiedElem::one(13, 30);
        for g in [1u64, 5, 9] {
            assert_eq!(minimal_period(&one, g).unwrap().value, one);
        }
    }

    #[test]
    fn stable_under_precision_increase() {
        let low = minimal_period(&alpha_5_1(50), 1).unwrap().value;
        let high = minimal_period(&alpha_5_1(60), 1).unwrap().value;
        assert_eq!(high.truncate(low.precision()), low);
        assert_eq!(low.precision(), 100);
    }

    #[test]
    fn rejects_alpha_not_one_mod_pi() {
        let bad = embed(&QuadElem::from_ints(5, 2, 1).unwrap(), 10);
        assert!(pullback_matrix(&bad, 3).is_err());
        assert!(minimal_period(&bad, 3).is_err());
    }
}
