//! Construction of the parameter `a ∈ Q(sqrt p)` with `C_a ≅ C_ā`, where
//! `C_t : y² = x^(2g+2) - t`.
//!
//! From a norm `-1` element `v`: `u = v^(g+1)` has norm 1, Hilbert 90 gives
//! `b` with `u = b / b̄`, and `a = b² pⁿ` with `n` chosen so that `a` is a
//! 𝔭-adic unit. Then `v^(2g+2) = a / ā` and `(x, y) ↦ (vx, v^(g+1) y)` maps
//! `C_ā` onto `C_a`.

use std::collections::{BTreeMap, HashSet};

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, HypothesisFailure, Result};
use crate::pell;
use crate::quadfield::{is_prime, QuadElem, Valuation};

/// `(p, g)` that passed [`check_hypotheses`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    p: u64,
    g: u64,
}

impl Params {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    /// `g(g+1)/2`, the exponent of the minimal period.
    pub fn period_exponent(&self) -> u64 {
        period_exponent(self.g)
    }
}

pub fn period_exponent(g: u64) -> u64 {
    g * (g + 1) / 2
}

/// Checks `p` prime, `p ≡ g ≡ 1 (mod 4)` and `p ∤ g+1`, naming every failed condition.
pub fn check_hypotheses(p: u64, g: u64) -> Result<Params> {
    let mut failures = Vec::new();
    if !is_prime(p) {
        failures.push(HypothesisFailure::PNotPrime);
    }
    if p % 4 != 1 {
        failures.push(HypothesisFailure::PNotOneModFour);
    }
    if g % 4 != 1 {
        failures.push(HypothesisFailure::GNotOneModFour);
    }
    if p != 0 && (g + 1).is_multiple_of(p) {
        failures.push(HypothesisFailure::PDividesGPlusOne);
    }
    if failures.is_empty() {
        Ok(Params { p, g })
    } else {
        Err(Error::Hypothesis(failures))
    }
}

/// Returns `b` with `u = b / conjugate(b)` for a norm-1 element `u`.
pub fn hilbert90(u: &QuadElem) -> Result<QuadElem> {
    let norm = u.norm();
    if !norm.is_one() {
        return Err(Error::WrongNorm(norm.to_string(), "1".into()));
    }
    let p = u.p();
    let minus_one = QuadElem::from_ints(p, -1, 0)?;
    if *u == minus_one {
        return QuadElem::sqrt_p(p);
    }
    QuadElem::one(p)?.checked_add(u)
}

fn check_norm_minus_one(v: &QuadElem) -> Result<()> {
    let norm = v.norm();
    if norm == -BigRational::one() {
        Ok(())
    } else {
        Err(Error::WrongNorm(norm.to_string(), "-1".into()))
    }
}

fn power(e: &QuadElem, k: u64) -> Result<QuadElem> {
    e.pow(i64::try_from(k).map_err(|_| Error::Internal(format!("exponent {k} too large")))?)
}

/// The parameter `a = b² pⁿ` of ramified valuation zero built from `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltParameter {
    pub u: QuadElem,
    pub b: QuadElem,
    pub n: i64,
    pub a: QuadElem,
}

pub fn build_a(v: &QuadElem, g: u64) -> Result<BuiltParameter> {
    check_norm_minus_one(v)?;
    if g.is_multiple_of(2) {
        return Err(Error::Hypothesis(vec![HypothesisFailure::GNotOneModFour]));
    }
    let p = v.p();
    let u = power(v, g + 1)?;
    let b = hilbert90(&u)?;
    let n = match b.valuation_ramified() {
        Valuation::Finite(vb) => -vb,
        Valuation::Infinity => return Err(Error::Internal("Hilbert 90 returned zero".into())),
    };
    let p_n = QuadElem::from_ints(p, p as i64, 0)?.pow(n)?;
    let a = b.checked_mul(&b)?.checked_mul(&p_n)?;
    if a.valuation_ramified() != Valuation::Finite(0) {
        return Err(Error::Internal(format!("a = {a} is not a 𝔭-adic unit")));
    }
    let lhs = power(v, 2 * g + 2)?.checked_mul(&a.conjugate())?;
    if lhs != a {
        return Err(Error::Internal("v^(2g+2) · ā ≠ a".into()));
    }
    Ok(BuiltParameter { u, b, n, a })
}

/// Sparse polynomial in `Q(sqrt p)[X, Y]`, keyed by `(deg_X, deg_Y)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Poly2 {
    terms: BTreeMap<(u64, u64), QuadElem>,
}

impl Poly2 {
    fn add_term(&mut self, i: u64, j: u64, c: QuadElem) -> Result<()> {
        let entry = match self.terms.remove(&(i, j)) {
            Some(old) => old.checked_add(&c)?,
            None => c,
        };
        if !entry.is_zero() {
            self.terms.insert((i, j), entry);
        }
        Ok(())
    }

    /// `Y² - X^(2g+2) + t`.
    fn curve(t: &QuadElem, g: u64) -> Result<Self> {
        let p = t.p();
        let mut f = Poly2::default();
        f.add_term(0, 2, QuadElem::one(p)?)?;
        f.add_term(2 * g + 2, 0, QuadElem::from_ints(p, -1, 0)?)?;
        f.add_term(0, 0, t.clone())?;
        Ok(f)
    }

    /// `F(sx · X, sy · Y)`.
    fn substitute_scaled(&self, sx: &QuadElem, sy: &QuadElem) -> Result<Self> {
        let mut out = Poly2::default();
        for (&(i, j), c) in &self.terms {
            let c = c.checked_mul(&power(sx, i)?)?.checked_mul(&power(sy, j)?)?;
            out.add_term(i, j, c)?;
        }
        Ok(out)
    }

    fn scale(&self, s: &QuadElem) -> Result<Self> {
        let mut out = Poly2::default();
        for (&(i, j), c) in &self.terms {
            out.add_term(i, j, c.checked_mul(s)?)?;
        }
        Ok(out)
    }
}

/// Record of the verified isomorphism `C_ā → C_a`, `(x, y) ↦ (vx, v^(g+1) y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoWitness {
    pub v: QuadElem,
    pub direction: String,
    pub map: String,
}

/// Verifies `F_a(vX, v^(g+1)Y) = v^(2g+2) · F_ā(X, Y)` coefficientwise, where `F_t = Y² - X^(2g+2) + t`.
pub fn iso_witness(a: &QuadElem, v: &QuadElem, g: u64) -> Result<IsoWitness> {
    let lhs = Poly2::curve(a, g)?.substitute_scaled(v, &power(v, g + 1)?)?;
    let rhs = Poly2::curve(&a.conjugate(), g)?.scale(&power(v, 2 * g + 2)?)?;
    if lhs != rhs {
        return Err(Error::Internal(format!(
            "isomorphism identity fails for a = {a}, v = {v}"
        )));
    }
    Ok(IsoWitness {
        v: v.clone(),
        direction: "C_abar -> C_a".into(),
        map: "(x, y) -> (v*x, v^(g+1)*y)".into(),
    })
}

/// Polynomials over `F_p`, coefficients from low to high degree.
fn fp_trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn fp_inv(x: u64, p: u64) -> u64 {
    let (mut acc, mut base, mut e) = (1u128, x as u128 % p as u128, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    acc as u64
}

fn fp_rem(mut f: Vec<u64>, g: &[u64], p: u64) -> Vec<u64> {
    let lead_inv = fp_inv(*g.last().expect("nonzero divisor"), p) as u128;
    while f.len() >= g.len() {
        let shift = f.len() - g.len();
        let coeff = *f.last().unwrap() as u128 * lead_inv % p as u128;
        for (i, &gc) in g.iter().enumerate() {
            let sub = coeff * gc as u128 % p as u128;
            f[shift + i] = ((f[shift + i] as u128 + p as u128 - sub) % p as u128) as u64;
        }
        f = fp_trim(f);
    }
    f
}

/// Degree of `gcd(f, g)` in `F_p[x]`.
fn fp_gcd_degree(f: Vec<u64>, g: Vec<u64>, p: u64) -> usize {
    let (mut a, mut b) = (fp_trim(f), fp_trim(g));
    while !b.is_empty() {
        let r = fp_rem(a, &b, p);
        a = b;
        b = r;
    }
    a.len().saturating_sub(1)
}

/// Checks that `y² = x^(2g+2) - c` has good reduction at `p`.
pub fn check_good_reduction(p: u64, g: u64, c: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::BadReduction("p = 2".into()));
    }
    let deg = 2 * g + 2;
    if deg.is_multiple_of(p) {
        return Err(Error::BadReduction(format!("p divides 2g+2 = {deg}")));
    }
    if c.is_multiple_of(p) {
        return Err(Error::BadReduction(format!(
            "c ≡ 0 mod {p}: x^{deg} has repeated roots"
        )));
    }
    let deg = deg as usize;
    let mut f = vec![0u64; deg + 1];
    f[0] = p - c % p;
    f[deg] = 1;
    let mut df = vec![0u64; deg];
    df[deg - 1] = deg as u64 % p;
    if fp_gcd_degree(f, df, p) != 0 {
        return Err(Error::BadReduction(format!(
            "gcd(x^{deg} - {c}, derivative) ≠ 1 in F_{p}[x]"
        )));
    }
    Ok(())
}

/// The reduction `c = residue(a)` together with the good-reduction checks for `C_c`.
pub fn reduce_and_check(a: &QuadElem, g: u64) -> Result<u64> {
    match a.valuation_ramified() {
        Valuation::Finite(0) => {}
        Valuation::Finite(v) if v > 0 => {
            return Err(Error::BadReduction(format!(
                "a ≡ 0 mod 𝔭 (valuation {v}): c would be 0"
            )))
        }
        other => return Err(Error::NotUnit(other.to_string())),
    }
    let c = a.residue()?;
    check_good_reduction(a.p(), g, c)?;
    Ok(c)
}

/// The full data of one example of the construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentExample {
    pub p: u64,
    pub g: u64,
    pub k: u64,
    pub v: QuadElem,
    pub u: QuadElem,
    pub b: QuadElem,
    pub n: i64,
    pub a: QuadElem,
    pub c: u64,
    pub iso: IsoWitness,
    pub checks: BTreeMap<String, bool>,
}

impl DescentExample {
    /// Runs the construction from the `k`-th norm `-1` solution.
    pub fn build(params: Params, k: u64) -> Result<Self> {
        let (p, g) = (params.p, params.g);
        let v = pell::solution_at(p, k)?;
        let built = build_a(&v, g)?;
        let iso = iso_witness(&built.a, &v, g)?;
        let c = reduce_and_check(&built.a, g)?;
        let example = DescentExample {
            p,
            g,
            k,
            v,
            u: built.u,
            b: built.b,
            n: built.n,
            a: built.a,
            c,
            iso,
            checks: BTreeMap::new(),
        };
        let checks = example.recheck()?;
        if let Some((name, _)) = checks.iter().find(|(_, ok)| !**ok) {
            return Err(Error::Internal(format!(
                "construction check `{name}` failed"
            )));
        }
        Ok(DescentExample { checks, ..example })
    }

    /// Re-derives every invariant of the example from its stored fields.
    pub fn recheck(&self) -> Result<BTreeMap<String, bool>> {
        let p = self.p;
        let mut checks = BTreeMap::new();
        checks.insert("norm_v".into(), self.v.norm() == -BigRational::one());
        checks.insert("norm_u".into(), self.u.norm().is_one());
        checks.insert(
            "u_is_v_pow_g_plus_1".into(),
            power(&self.v, self.g + 1)? == self.u,
        );
        let ratio = if self.b.is_zero() {
            None
        } else {
            Some(self.b.checked_div(&self.b.conjugate())?)
        };
        checks.insert("u_eq_b_over_bbar".into(), ratio.as_ref() == Some(&self.u));
        let p_n = QuadElem::from_ints(p, p as i64, 0)?.pow(self.n)?;
        checks.insert(
            "a_eq_b2_pn".into(),
            self.b.checked_mul(&self.b)?.checked_mul(&p_n)? == self.a,
        );
        checks.insert(
            "a_unit".into(),
            self.a.valuation_ramified() == Valuation::Finite(0),
        );
        checks.insert(
            "v_2g2_abar_eq_a".into(),
            power(&self.v, 2 * self.g + 2)?.checked_mul(&self.a.conjugate())? == self.a,
        );
        checks.insert(
            "iso_identity".into(),
            iso_witness(&self.a, &self.v, self.g).is_ok(),
        );
        checks.insert(
            "residue_a_eq_c".into(),
            self.a.residue().ok() == Some(self.c) && !self.c.is_multiple_of(p),
        );
        checks.insert(
            "good_reduction".into(),
            check_good_reduction(p, self.g, self.c).is_ok(),
        );
        checks.insert("d_odd".into(), period_exponent(self.g) % 2 == 1);
        Ok(checks)
    }

    /// `a / c`, the element whose `(2g+2)`-th root is `α`.
    pub fn a_over_c(&self) -> Result<QuadElem> {
        if self.c == 0 {
            return Err(Error::DivisionByZero);
        }
        let inv_c = BigRational::new(1.into(), self.c.into());
        Ok(self.a.scale(&inv_c))
    }

    pub fn is_genus_one(&self) -> bool {
        self.g == 1
    }
}

/// Examples for Pell indices `0..count`, checked pairwise distinct in `a`.
pub fn generate_family(params: Params, count: u64) -> Result<Vec<DescentExample>> {
    let examples: Vec<DescentExample> = (0..count)
        .map(|k| DescentExample::build(params, k))
        .collect::<Result<_>>()?;
    let mut seen = HashSet::new();
    for ex in &examples {
        if !seen.insert(ex.a.clone()) {
            return Err(Error::Internal(format!(
                "duplicate parameter a = {} in family",
                ex.a
            )));
        }
    }
    Ok(examples)
}

impl Params {
    /// Bypasses validation; for exercising downstream failure paths.
    #[doc(hidden)]
    pub fn unchecked(p: u64, g: u64) -> Self {
        Params { p, g }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: u64, x: i64, y: i64) -> QuadElem {
        QuadElem::from_ints(p, x, y).unwrap()
    }

    fn rational(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn hypotheses() {
        assert_eq!(check_hypotheses(5, 1).unwrap(), Params { p: 5, g: 1 });
        assert!(check_hypotheses(13, 9).is_ok());
        let err = check_hypotheses(5, 9).unwrap_err();
        assert!(
            matches!(&err, Error::Hypothesis(f) if f == &vec![HypothesisFailure::PDividesGPlusOne])
        );
        assert!(err.to_string().contains("p divides g+1"));
        let err = check_hypotheses(7, 1).unwrap_err();
        assert!(err.to_string().contains("p ≢ 1 mod 4"));
        let err = check_hypotheses(21, 3).unwrap_err();
        let Error::Hypothesis(f) = err else { panic!() };
        assert_eq!(
            f,
            vec![
                HypothesisFailure::PNotPrime,
                HypothesisFailure::GNotOneModFour
            ]
        );
    }

    #[test]
    fn hilbert90_examples() {
        let b = hilbert90(&q(5, 9, 4)).unwrap();
        assert_eq!(b, q(5, 10, 4));
        assert_eq!(b.checked_div(&b.conjugate()).unwrap(), q(5, 9, 4));
        assert_eq!(hilbert90(&q(5, 1, 0)).unwrap(), q(5, 2, 0));
        let b = hilbert90(&q(13, -1, 0)).unwrap();
        assert_eq!(b, q(13, 0, 1));
        assert_eq!(b.checked_div(&b.conjugate()).unwrap(), q(13, -1, 0));
        assert!(matches!(
            hilbert90(&q(5, 2, 1)),
            Err(Error::WrongNorm(_, _))
        ));
    }

    #[test]
    fn worked_example() {
        let built = build_a(&q(5, 2, 1), 1).unwrap();
        assert_eq!(built.u, q(5, 9, 4));
        assert_eq!(built.b, q(5, 10, 4));
        assert_eq!(built.n, -1);
        assert_eq!(built.a, q(5, 36, 16));
        assert_eq!(built.a.norm(), rational(16));
        assert_eq!(reduce_and_check(&built.a, 1).unwrap(), 1);
        iso_witness(&built.a, &q(5, 2, 1), 1).unwrap();
    }

    #[test]
    fn p13_example() {
        let v = q(13, 18, 5);
        let built = build_a(&v, 1).unwrap();
        assert_eq!(built.a.valuation_ramified(), Valuation::Finite(0));
        assert_eq!(
            v.pow(4).unwrap().checked_mul(&built.a.conjugate()).unwrap(),
            built.a
        );
        let c = reduce_and_check(&built.a, 1).unwrap();
        assert!((1..13).contains(&c));
    }

    #[test]
    fn build_a_rejects_bad_v() {
        assert!(matches!(
            build_a(&q(5, 9, 4), 1),
            Err(Error::WrongNorm(_, _))
        ));
    }

    #[test]
    fn iso_identity_trivial_and_failing() {
        iso_witness(&q(5, 7, 0), &q(5, 1, 0), 1).unwrap();
        // v = 1 only works for rational a
        assert!(matches!(
            iso_witness(&q(5, 36, 16), &q(5, 1, 0), 1),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn good_reduction() {
        check_good_reduction(5, 1, 1).unwrap();
        check_good_reduction(13, 5, 7).unwrap();
        assert!(matches!(
            check_good_reduction(5, 1, 0),
            Err(Error::BadReduction(_))
        ));
        assert!(matches!(
            check_good_reduction(5, 4, 1),
            Err(Error::BadReduction(_))
        ));
        // a ≡ 0 mod 𝔭
        assert!(matches!(
            reduce_and_check(&q(5, 10, 4), 1),
            Err(Error::BadReduction(_))
        ));
        assert!(matches!(
            reduce_and_check(&q(5, 0, 0), 1),
            Err(Error::NotUnit(_))
        ));
    }

    #[test]
    fn fp_gcd() {
        // x^2 - 1 and 2x over F_5: coprime
        assert_eq!(fp_gcd_degree(vec![4, 0, 1], vec![0, 2], 5), 0);
        // (x-1)^2 = x^2 - 2x + 1 and its derivative 2x - 2 share x - 1
        assert_eq!(fp_gcd_degree(vec![1, 3, 1], vec![3, 2], 5), 1);
    }

    #[test]
    fn families_are_distinct() {
        for (p, g) in [(5, 1), (13, 1), (17, 1), (5, 5)] {
            let fam = generate_family(check_hypotheses(p, g).unwrap(), 5).unwrap();
            assert_eq!(fam.len(), 5);
            for ex in &fam {
                assert!(ex.checks.values().all(|&ok| ok), "{:?}", ex.checks);
                assert_eq!(ex.is_genus_one(), g == 1);
            }
        }
    }

    #[test]
    fn recheck_detects_tampering() {
        let mut ex = DescentExample::build(check_hypotheses(5, 1).unwrap(), 0).unwrap();
        ex.n = -2;
        let checks = ex.recheck().unwrap();
        assert!(!checks["a_eq_b2_pn"]);
        assert!(checks["norm_v"]);
    }

    #[test]
    fn exponent_parity() {
        for g in (1..100_000u64).step_by(4) {
            assert_eq!(period_exponent(g) % 2, 1, "g = {g}");
        }
        assert_eq!(period_exponent(3) % 2, 0);
    }

    fn norm_one() -> impl Strategy<Value = QuadElem> {
        (
            prop::sample::select(vec![5u64, 13, 17, 29, 37]),
            -50i64..50,
            1i64..20,
            -50i64..50,
            1i64..20,
        )
            .prop_filter_map("w nonzero", |(p, a, b, c, d)| {
                let w = QuadElem::new(
                    p,
                    BigRational::new(a.into(), b.into()),
                    BigRational::new(c.into(), d.into()),
                )
                .unwrap();
                (!w.is_zero()).then(|| w.checked_div(&w.conjugate()).unwrap())
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn hilbert90_inverts_ratio(u in norm_one()) {
            let b = hilbert90(&u).unwrap();
            prop_assert_eq!(b.checked_div(&b.conjugate()).unwrap(), u);
        }
    }

    proptest! {
        #[test]
        fn random_families_satisfy_identities(idx in 0usize..5, g_step in 0u64..3, k in 0u64..4) {
            let p = [5u64, 13, 17, 29, 37][idx];
            let g = 1 + 4 * g_step;
            prop_assume!((g + 1) % p != 0);
            let ex = DescentExample::build(check_hypotheses(p, g).unwrap(), k).unwrap();
            prop_assert!(ex.checks.values().all(|&ok| ok));
            iso_witness(&ex.a, &ex.v, g).unwrap();
        }
    }
}
