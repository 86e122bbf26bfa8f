//! Periodic points of `f₀(z) = zⁿ`.
//!
//! Every bounded nonzero point of period dividing `m` is a root of unity
//! `e^{2πi k/M}` with `M = nᵐ − 1`, and `f₀` acts on residues as `k ↦ n·k mod M`.
//! Residues are the canonical identity of these points; complex values are
//! produced on demand.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec;
use crate::ratmap::{family_map, Mobius, ParamVector, RationalMap, SpherePoint};

/// Exact periodic point of `zⁿ`: a root of unity in residue form, or ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RootPoint {
    Finite { modulus: u64, residue: u64 },
    Infinity,
}

impl RootPoint {
    pub fn finite(modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 || residue >= modulus {
            return Err(Error::InvalidPoint(format!(
                "residue {residue} is not reduced modulo {modulus}"
            )));
        }
        Ok(RootPoint::Finite { modulus, residue })
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, RootPoint::Infinity)
    }

    /// Complex embedding `e^{2πi·residue/modulus}`.
    pub fn to_sphere(&self) -> SpherePoint {
        match *self {
            RootPoint::Infinity => SpherePoint::Infinity,
            RootPoint::Finite { modulus, residue } => {
                SpherePoint::Finite(unit_root(residue, modulus))
            }
        }
    }

    /// Image under `zⁿ`.
    pub fn image(&self, n: u32) -> RootPoint {
        match *self {
            RootPoint::Infinity => RootPoint::Infinity,
            RootPoint::Finite { modulus, residue } => RootPoint::Finite {
                modulus,
                residue: mul_mod(residue, n as u64, modulus),
            },
        }
    }

    /// Length of the cycle through this point under `zⁿ`.
    pub fn minimal_period(&self, n: u32) -> u32 {
        let mut p = 1;
        let mut cur = self.image(n);
        while cur != *self {
            cur = cur.image(n);
            p += 1;
        }
        p
    }

    /// `z^e` for a finite point, with the exponent reduced modulo `M` first.
    pub fn power(&self, e: i128) -> Option<Complex64> {
        match *self {
            RootPoint::Infinity => None,
            RootPoint::Finite { modulus, residue } => {
                let e = e.rem_euclid(modulus as i128) as u64;
                Some(unit_root(mul_mod(e, residue, modulus), modulus))
            }
        }
    }

    /// Smallest residue of the cycle; two points share an orbit iff their ids agree.
    pub fn orbit_id(&self, n: u32) -> Option<u64> {
        match self {
            RootPoint::Infinity => None,
            RootPoint::Finite { .. } => orbit_of(self, n)
                .ok()
                .and_then(|o| o.first().copied())
                .and_then(|p| match p {
                    RootPoint::Finite { residue, .. } => Some(residue),
                    RootPoint::Infinity => None,
                }),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RootPointRepr {
    Finite { modulus: u64, residue: u64 },
    Tag(String),
}

impl Serialize for RootPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            RootPoint::Finite { modulus, residue } => {
                RootPointRepr::Finite { modulus, residue }.serialize(s)
            }
            RootPoint::Infinity => RootPointRepr::Tag("infinity".into()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for RootPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match RootPointRepr::deserialize(d)? {
            RootPointRepr::Finite { modulus, residue } => {
                RootPoint::finite(modulus, residue).map_err(D::Error::custom)
            }
            RootPointRepr::Tag(t) if t == "infinity" => Ok(RootPoint::Infinity),
            RootPointRepr::Tag(t) => Err(D::Error::custom(format!("unknown point tag {t:?}"))),
        }
    }
}

/// `e^{2πi·k/M}`.
pub fn unit_root(k: u64, modulus: u64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, TAU * (k as f64 / modulus as f64))
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `nᵐ − 1`, provided it stays below `2⁶³`.
pub fn modulus_for(n: u32, m: u32) -> Result<u64> {
    let overflow = Error::Overflow { n, m };
    if n < 2 {
        return Err(Error::InvalidDegree { min: 2, got: n });
    }
    if m == 0 {
        return Err(Error::InvalidPoint("period must be at least 1".into()));
    }
    let power = (n as u64).checked_pow(m).ok_or(overflow)?;
    let modulus = power - 1;
    if modulus >= 1 << 63 {
        return Err(Error::Overflow { n, m });
    }
    Ok(modulus)
}

/// Periods in parameter-index layout `(m_0, …, m_{n−2}, m_{n+1}, …, m_{2n−1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodVector {
    n: u32,
    m: Vec<u32>,
}

impl PeriodVector {
    pub fn new(n: u32, m: Vec<u32>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDegree { min: 2, got: n });
        }
        let expected = 2 * n as usize - 2;
        if m.len() != expected {
            return Err(Error::WrongLength {
                expected,
                got: m.len(),
            });
        }
        if m.contains(&0) {
            return Err(Error::InvalidPoint("periods must be at least 1".into()));
        }
        Ok(Self { n, m })
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    /// Periods in column order.
    pub fn periods(&self) -> &[u32] {
        &self.m
    }

    pub fn get(&self, j: u32) -> Result<u32> {
        Ok(self.m[crate::ratmap::slot_of(self.n, j)?])
    }
}

/// Möbius function μ(m).
pub fn mobius_mu(m: u64) -> i8 {
    assert!(m >= 1, "mobius_mu is defined for m >= 1");
    let mut rest = m;
    let mut sign = 1i8;
    let mut p = 2u64;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            rest /= p;
            if rest.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if rest > 1 {
        sign = -sign;
    }
    sign
}

fn divisors(m: u32) -> Vec<u32> {
    (1..=m).filter(|d| m.is_multiple_of(*d)).collect()
}

fn prime_factors(mut m: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            out.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// ν_n(m): bounded points of `zⁿ` with minimal period `m` (0 included).
pub fn count_periodic(n: u32, m: u32) -> Result<u64> {
    modulus_for(n, m)?;
    let total: i128 = divisors(m)
        .into_iter()
        .map(|r| mobius_mu((m / r) as u64) as i128 * (n as i128).pow(r))
        .sum();
    Ok(total as u64)
}

/// ν̂_n(m): bounded nonzero points of minimal period `m`.
pub fn count_nonzero(n: u32, m: u32) -> Result<u64> {
    let nu = count_periodic(n, m)?;
    Ok(if m == 1 { nu - 1 } else { nu })
}

/// All bounded nonzero points of minimal period `m`, ascending by residue.
pub fn enumerate_periodic(n: u32, m: u32) -> Result<Vec<RootPoint>> {
    let modulus = modulus_for(n, m)?;
    // k has period dividing d iff k·(n^d − 1) ≡ 0 (mod M); it suffices to
    // test the maximal proper divisors m/p.
    let checks: Vec<u64> = prime_factors(m)
        .into_iter()
        .map(|p| (n as u64).pow(m / p) - 1)
        .collect();
    let residues = exec::filter_range(modulus, |k| {
        checks.iter().all(|&c| mul_mod(k, c, modulus) != 0)
    });
    Ok(residues
        .into_iter()
        .map(|residue| RootPoint::Finite { modulus, residue })
        .collect())
}

/// The cycle through `p` under `zⁿ`, sorted by residue.
pub fn orbit_of(p: &RootPoint, n: u32) -> Result<Vec<RootPoint>> {
    if p.is_infinity() {
        return Err(Error::InfinityPoint);
    }
    let mut out = vec![*p];
    let mut cur = p.image(n);
    while cur != *p {
        out.push(cur);
        cur = cur.image(n);
    }
    out.sort();
    Ok(out)
}

/// One point per cycle of minimal period `m`: the smallest residue of each cycle.
pub fn orbit_representatives(n: u32, m: u32) -> Result<Vec<RootPoint>> {
    let points = enumerate_periodic(n, m)?;
    let keep = exec::map(&points, |p| p.orbit_id(n) == Some(residue_of(p)));
    Ok(points
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect())
}

fn residue_of(p: &RootPoint) -> u64 {
    match p {
        RootPoint::Finite { residue, .. } => *residue,
        RootPoint::Infinity => u64::MAX,
    }
}

/// Newton continuation of a period-`m` point of `f₀` to the map `f_a`.
pub fn newton_continue(
    a: &ParamVector,
    z0: SpherePoint,
    m: u32,
    tol: f64,
    max_iter: usize,
) -> Result<SpherePoint> {
    let f = family_map(a)?;
    continue_periodic_point(&f, z0, m, tol, max_iter)
}

/// Solves `f^m(z) = z` by Newton's method from `z0`.
///
/// Points in the `|z| > 1` hemisphere (and ∞) are solved for in the `w = 1/z`
/// chart. Iteration continues past the tolerance until the step stops
/// shrinking, so the root is resolved to rounding level.
pub fn continue_periodic_point(
    f: &RationalMap,
    z0: SpherePoint,
    m: u32,
    tol: f64,
    max_iter: usize,
) -> Result<SpherePoint> {
    match z0 {
        SpherePoint::Finite(z) if z.norm() <= 1.0 => {
            newton_finite(f, z, m, tol, max_iter).map(SpherePoint::Finite)
        }
        _ => {
            let inversion = Mobius::inversion();
            let g = f.mobius_conjugate(&inversion)?;
            let w0 = match inversion.apply(z0) {
                SpherePoint::Finite(w) => w,
                SpherePoint::Infinity => unreachable!("|z0| > 1"),
            };
            let w = newton_finite(&g, w0, m, tol, max_iter)?;
            Ok(inversion.apply(SpherePoint::Finite(w)))
        }
    }
}

/// `f^m(z)` and `(f^m)'(z)` in the finite chart.
fn power_and_derivative(f: &RationalMap, z: Complex64, m: u32) -> Option<(Complex64, Complex64)> {
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for _ in 0..m {
        let (pv, pd) = crate::poly::eval_with_derivative(f.num(), w);
        let (qv, qd) = crate::poly::eval_with_derivative(f.den(), w);
        if qv == Complex64::new(0.0, 0.0) {
            return None;
        }
        d *= (pd * qv - pv * qd) / (qv * qv);
        w = pv / qv;
    }
    (w.is_finite() && d.is_finite()).then_some((w, d))
}

fn newton_finite(
    f: &RationalMap,
    z0: Complex64,
    m: u32,
    tol: f64,
    max_iter: usize,
) -> Result<Complex64> {
    let mut z = z0;
    let mut last_step = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for iterations in 0..max_iter {
        let Some((fz, d)) = power_and_derivative(f, z, m) else {
            return Err(Error::NoConvergence {
                iterations,
                residual: f64::INFINITY,
            });
        };
        let r = fz - z;
        residual = r.norm();
        let slope = d - 1.0;
        if slope.norm() < 1e-14 {
            return Err(Error::DerivativeSingular);
        }
        if residual == 0.0 {
            return Ok(z);
        }
        let step = r / slope;
        let size = step.norm();
        if residual <= tol && (size <= 4.0 * f64::EPSILON * z.norm().max(1.0) || size >= last_step)
        {
            return Ok(z);
        }
        z -= step;
        last_step = size;
    }
    if let Some((fz, _)) = power_and_derivative(f, z, m) {
        residual = (fz - z).norm();
        if residual <= tol {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}
