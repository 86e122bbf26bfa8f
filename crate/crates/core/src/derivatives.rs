//! Derivatives of multipliers of periodic points of `zⁿ` with respect to the
//! family parameters, at `a = 0`.
//!
//! For a finite nonzero point `z₀` of period `m`,
//!
//! ```text
//! dλ/da_j (0) = (j·n^{m−1} − nᵐ) · Σ_{i<m} z₀^{nⁱ(j−n)}
//!             = z₀^{−n^{m−1}} · P_{n,j,m}(z₀)
//! ```
//!
//! and at ∞ the derivative is `−1` for `j = 2n−1` and `0` otherwise.
//! [`dlambda_numeric`] recomputes the same quantity by central differences
//! through the family and Newton continuation, without using either formula.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::periodic::{continue_periodic_point, modulus_for, RootPoint};
use crate::ratmap::{family_map, slot_of, ParamVector, SpherePoint};

/// Default central-difference step of the oracle.
pub const ORACLE_STEP: f64 = 1e-6;
/// Newton residual tolerance used by the oracle.
pub const ORACLE_NEWTON_TOL: f64 = 1e-12;
pub const ORACLE_NEWTON_MAX_ITER: usize = 50;

/// Polynomial with integer coefficients keyed by exponent. Zero coefficients
/// are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparsePolynomial {
    terms: BTreeMap<u64, i128>,
}

impl SparsePolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `coeff · z^exp`, combining with an existing term of that degree.
    pub fn add_term(&mut self, exp: u64, coeff: i128) {
        let c = self.terms.entry(exp).or_insert(0);
        *c += coeff;
        if *c == 0 {
            self.terms.remove(&exp);
        }
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: u64) -> i128 {
        self.terms.get(&exp).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, i128)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn exponents(&self) -> impl Iterator<Item = u64> + '_ {
        self.terms.keys().copied()
    }
}

/// One entry of a derivative table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivTableEntry {
    pub j: u32,
    pub m: u32,
    pub value: Complex64,
}

fn check_index(n: u32, j: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDegree { min: 2, got: n });
    }
    slot_of(n, j).map(|_| ())
}

/// `j·n^{m−1} − nᵐ`; never zero for admissible `j` since `j ≠ n`.
pub fn prefactor(n: u32, j: u32, m: u32) -> Result<i128> {
    check_index(n, j)?;
    let overflow = || Error::Overflow { n, m };
    let n = n as i128;
    let low = n.checked_pow(m - 1).ok_or_else(overflow)?;
    let high = low.checked_mul(n).ok_or_else(overflow)?;
    let value = (j as i128)
        .checked_mul(low)
        .and_then(|v| v.checked_sub(high))
        .ok_or_else(overflow)?;
    assert_ne!(value, 0, "prefactor vanishes for admissible j");
    Ok(value)
}

fn check_root(n: u32, m: u32, z0: &RootPoint) -> Result<()> {
    match *z0 {
        RootPoint::Infinity => Err(Error::InfinityPoint),
        RootPoint::Finite { modulus, .. } => {
            let expected = modulus_for(n, m)?;
            if modulus != expected {
                return Err(Error::InvalidPoint(format!(
                    "modulus {modulus} does not match n^m - 1 = {expected}"
                )));
            }
            Ok(())
        }
    }
}

/// Closed-form `dλ_{z₀}/da_j` at `a = 0` for a finite point of period `m`.
pub fn dlambda_closed(n: u32, m: u32, j: u32, z0: &RootPoint) -> Result<Complex64> {
    let c = prefactor(n, j, m)?;
    check_root(n, m, z0)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let shift = j as i128 - n as i128;
    let mut power = 1i128; // nⁱ, only needed modulo M
    let RootPoint::Finite { modulus, .. } = *z0 else {
        unreachable!()
    };
    for _ in 0..m {
        sum += z0.power(power * shift).expect("finite point");
        power = (power * n as i128) % modulus.max(1) as i128;
    }
    Ok(sum * c as f64)
}

/// `dλ_∞/da_j` at `a = 0`.
pub fn dlambda_infinity(n: u32, j: u32) -> Result<Complex64> {
    check_index(n, j)?;
    Ok(if j == 2 * n - 1 {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    })
}

/// The polynomial `P_{n,j,m}` with `dλ_{z₀}/da_j = z₀^{−n^{m−1}} P_{n,j,m}(z₀)`.
pub fn poly_p(n: u32, j: u32, m: u32) -> Result<SparsePolynomial> {
    let c = prefactor(n, j, m)?;
    let overflow = || Error::Overflow { n, m };
    let nn = n as i128;
    let top = nn.checked_pow(m - 1).ok_or_else(overflow)?;
    let shift = j as i128 - nn;
    let exponent = |i: u32| -> Result<u64> {
        let e = nn
            .checked_pow(i)
            .and_then(|p| p.checked_mul(shift))
            .and_then(|v| v.checked_add(top))
            .ok_or_else(overflow)?;
        u64::try_from(e).map_err(|_| overflow())
    };

    let mut p = SparsePolynomial::new();
    if j + 2 <= n {
        let lead = (j as i128 + 1)
            .checked_mul(top)
            .map(|v| v - 1)
            .ok_or_else(overflow)?;
        p.add_term(u64::try_from(lead).map_err(|_| overflow())?, c);
        for i in 0..m.saturating_sub(1) {
            p.add_term(exponent(i)?, c);
        }
    } else if j + 1 < 2 * n {
        for i in 0..m {
            p.add_term(exponent(i)?, c);
        }
    } else {
        p.add_term(1, c);
        for i in 0..m.saturating_sub(1) {
            p.add_term(exponent(i)?, c);
        }
    }
    Ok(p)
}

/// Degree of `P_{n,j,m}` from its four-case formula.
pub fn deg_p(n: u32, j: u32, m: u32) -> Result<u64> {
    check_index(n, j)?;
    let overflow = || Error::Overflow { n, m };
    let nn = n as u64;
    let top = nn.checked_pow(m - 1).ok_or_else(overflow)?;
    let deg = if j + 2 <= n {
        (j as u64 + 1).checked_mul(top).map(|v| v - 1)
    } else if j + 1 < 2 * n {
        (j as u64 - nn + 1).checked_mul(top)
    } else if m >= 2 {
        top.checked_mul(2).map(|v| v - nn.pow(m - 2))
    } else {
        Some(1)
    };
    deg.ok_or_else(overflow)
}

/// `P(z₀)` with exponents reduced modulo the residue modulus.
pub fn eval_p_at_root(p: &SparsePolynomial, z0: &RootPoint) -> Result<Complex64> {
    if z0.is_infinity() {
        return Err(Error::InfinityPoint);
    }
    Ok(p.terms()
        .map(|(e, c)| z0.power(e as i128).expect("finite point") * c as f64)
        .sum())
}

/// True iff the two polynomials share no exponent.
pub fn support_disjoint(a: &SparsePolynomial, b: &SparsePolynomial) -> bool {
    let (small, large) = if a.terms.len() <= b.terms.len() {
        (a, b)
    } else {
        (b, a)
    };
    small.exponents().all(|e| !large.terms.contains_key(&e))
}

/// Multiplier of the continuation of `z0` for the map `f_a` with `a = t·e_j`.
fn multiplier_along(n: u32, m: u32, j: u32, z0: &RootPoint, t: f64) -> Result<Complex64> {
    let a = ParamVector::unit(n, j, Complex64::new(t, 0.0))?;
    let f = family_map(&a)?;
    match z0 {
        RootPoint::Infinity => f.multiplier(&[SpherePoint::Infinity]),
        RootPoint::Finite { .. } => {
            let z = continue_periodic_point(
                &f,
                z0.to_sphere(),
                m,
                ORACLE_NEWTON_TOL,
                ORACLE_NEWTON_MAX_ITER,
            )?;
            f.multiplier(&f.orbit(z, m))
        }
    }
}

/// Central-difference estimate of `dλ_{z₀}/da_j` at `a = 0`.
///
/// For ∞ (which stays fixed for every map of the family) `m` must be 1.
pub fn dlambda_numeric(n: u32, m: u32, j: u32, z0: &RootPoint, h: f64) -> Result<Complex64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStep(h));
    }
    check_index(n, j)?;
    match z0 {
        RootPoint::Infinity if m != 1 => {
            return Err(Error::InvalidPoint("infinity is a fixed point".into()))
        }
        RootPoint::Infinity => {}
        RootPoint::Finite { .. } => check_root(n, m, z0)?,
    }
    let plus = multiplier_along(n, m, j, z0, h)?;
    let minus = multiplier_along(n, m, j, z0, -h)?;
    Ok((plus - minus) / (2.0 * h))
}

/// `|closed − numeric| / max(1, |closed|)`.
pub fn relative_error(closed: Complex64, numeric: Complex64) -> f64 {
    (closed - numeric).norm() / closed.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::enumerate_periodic;
    use crate::ratmap::param_indices;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sp(terms: &[(u64, i128)]) -> SparsePolynomial {
        let mut p = SparsePolynomial::new();
        for &(e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    #[test]
    fn closed_form_examples() {
        let one = RootPoint::finite(2, 0).unwrap();
        assert!((dlambda_closed(3, 1, 0, &one).unwrap() - c(-3.0, 0.0)).norm() < 1e-15);
        assert!((dlambda_closed(3, 1, 5, &one).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        let w = RootPoint::finite(3, 1).unwrap();
        assert!((dlambda_closed(2, 2, 3, &w).unwrap() - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn closed_form_rejects_bad_inputs() {
        let one = RootPoint::finite(2, 0).unwrap();
        assert!(matches!(
            dlambda_closed(3, 1, 2, &one),
            Err(Error::IndexExcluded { .. })
        ));
        assert!(matches!(
            dlambda_closed(3, 1, 3, &one),
            Err(Error::IndexExcluded { .. })
        ));
        assert!(matches!(
            dlambda_closed(3, 1, 0, &RootPoint::Infinity),
            Err(Error::InfinityPoint)
        ));
        assert!(matches!(
            dlambda_closed(3, 2, 0, &one),
            Err(Error::InvalidPoint(_))
        ));
    }

    #[test]
    fn infinity_derivatives() {
        assert_eq!(dlambda_infinity(3, 5).unwrap(), c(-1.0, 0.0));
        assert_eq!(dlambda_infinity(3, 0).unwrap(), c(0.0, 0.0));
        assert_eq!(dlambda_infinity(4, 7).unwrap(), c(-1.0, 0.0));
        assert!(matches!(
            dlambda_infinity(4, 3),
            Err(Error::IndexExcluded { .. })
        ));
    }

    #[test]
    fn polynomial_examples() {
        assert_eq!(poly_p(3, 0, 1).unwrap(), sp(&[(0, -3)]));
        assert_eq!(poly_p(3, 5, 1).unwrap(), sp(&[(1, 2)]));
        // for n = 2 the index j = 3 is 2n - 1, so the z + Σ form applies
        assert_eq!(poly_p(2, 3, 2).unwrap(), sp(&[(1, 2), (3, 2)]));
        assert_eq!(deg_p(2, 3, 2).unwrap(), 3);
        assert_eq!(poly_p(3, 4, 2).unwrap(), sp(&[(4, 3), (6, 3)]));
        assert_eq!(deg_p(3, 0, 2).unwrap(), 2);
        assert_eq!(deg_p(3, 5, 1).unwrap(), 1);
        assert_eq!(deg_p(3, 5, 3).unwrap(), 15);
    }

    #[test]
    fn combining_equal_exponents() {
        let mut p = sp(&[(3, 2)]);
        p.add_term(3, 5);
        assert_eq!(p.coeff(3), 7);
        p.add_term(3, -7);
        assert!(p.is_zero());
        assert_eq!(p.degree(), None);
    }

    #[test]
    fn evaluation_at_roots() {
        let any = RootPoint::finite(7, 3).unwrap();
        assert_eq!(eval_p_at_root(&sp(&[(0, -3)]), &any).unwrap(), c(-3.0, 0.0));
        let one = RootPoint::finite(2, 0).unwrap();
        assert_eq!(eval_p_at_root(&sp(&[(1, 2)]), &one).unwrap(), c(2.0, 0.0));
        let w = RootPoint::finite(3, 1).unwrap();
        let got = eval_p_at_root(&sp(&[(3, 2), (4, 2)]), &w).unwrap();
        let want = (c(1.0, 0.0) + Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0)) * 2.0;
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn disjointness_examples() {
        let a = poly_p(3, 0, 2).unwrap();
        let b = poly_p(3, 1, 2).unwrap();
        assert!(support_disjoint(&a, &b));
        assert!(!support_disjoint(&a, &a));
        assert!(support_disjoint(
            &poly_p(3, 0, 3).unwrap(),
            &poly_p(3, 5, 3).unwrap()
        ));
        // m = 1: j = 2n-1 collides with j = 1 through the z¹ term
        assert!(!support_disjoint(
            &poly_p(3, 1, 1).unwrap(),
            &poly_p(3, 5, 1).unwrap()
        ));
    }

    #[test]
    fn numeric_examples() {
        let one = RootPoint::finite(2, 0).unwrap();
        let d = dlambda_numeric(3, 1, 0, &one, 1e-6).unwrap();
        assert!((d - c(-3.0, 0.0)).norm() <= 1e-5);
        let d = dlambda_numeric(3, 1, 5, &RootPoint::Infinity, 1e-6).unwrap();
        assert!((d - c(-1.0, 0.0)).norm() <= 1e-8);
        let p = RootPoint::finite(7, 1).unwrap();
        let closed = dlambda_closed(2, 3, 0, &p).unwrap();
        let d = dlambda_numeric(2, 3, 0, &p, 1e-6).unwrap();
        assert!(relative_error(closed, d) <= 1e-5);
        assert!(matches!(
            dlambda_numeric(3, 1, 0, &one, 0.0),
            Err(Error::InvalidStep(_))
        ));
    }

    #[test]
    fn factorization_small_grid() {
        for n in 2..4 {
            for m in 1..4 {
                let shift = (n as i128).pow(m - 1);
                for j in param_indices(n) {
                    let p = poly_p(n, j, m).unwrap();
                    for z in enumerate_periodic(n, m).unwrap() {
                        let closed = dlambda_closed(n, m, j, &z).unwrap();
                        let via_p = eval_p_at_root(&p, &z).unwrap() * z.power(-shift).unwrap();
                        assert!((closed - via_p).norm() <= 1e-10 * closed.norm().max(1.0));
                    }
                }
            }
        }
    }
}
