//! Degree-n rational maps of the Riemann sphere.
//!
//! A map is stored as a pair of coefficient lists `p = a_0 + … + a_n zⁿ` and
//! `q = b_0 + … + b_n zⁿ`. Points with `|z| > 1` (and ∞) are handled in the
//! chart `w = 1/z`, where the map reads `p̃(w)/q̃(w)` with `p̃, q̃` the
//! coefficient-reversed polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::poly;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Chordal residual allowed when checking that an orbit closes up.
pub const CYCLE_TOLERANCE: f64 = 1e-9;
/// `|1 - λ|` below which a fixed point counts as parabolic.
pub const MULTIPLIER_ONE_TOLERANCE: f64 = 1e-6;
/// Chordal distance below which a root of the numerator and a root of the
/// denominator count as common, i.e. the resultant is treated as zero.
pub const COMMON_ROOT_TOLERANCE: f64 = 1e-9;

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    /// True when the point is represented in the `w = 1/z` chart.
    fn in_infinity_chart(&self) -> bool {
        match self {
            SpherePoint::Infinity => true,
            SpherePoint::Finite(z) => z.norm() > 1.0,
        }
    }

    /// Chordal distance on the sphere (diameter 2).
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                if z.norm() > 1.0 && w.norm() > 1.0 {
                    // Same formula in the 1/z chart avoids cancellation near ∞.
                    let (a, b) = (z.inv(), w.inv());
                    2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
                } else {
                    2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
                }
            }
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::Finite(z)
    }
}

/// A rational map `p/q` of exact degree `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    n: u32,
    num: Vec<Complex64>,
    den: Vec<Complex64>,
    num_rev: Vec<Complex64>,
    den_rev: Vec<Complex64>,
}

impl RationalMap {
    /// Builds a map from ascending coefficient lists of equal length `n + 1`.
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        if num.len() != den.len() {
            return Err(Error::InvalidMap(format!(
                "numerator has {} coefficients, denominator {}",
                num.len(),
                den.len()
            )));
        }
        if num.len() < 2 {
            return Err(Error::InvalidMap("degree must be at least 1".into()));
        }
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(Error::InvalidMap("non-finite coefficient".into()));
        }
        let n = num.len() - 1;
        if num[n] == ZERO && den[n] == ZERO {
            return Err(Error::InvalidMap("both leading coefficients vanish".into()));
        }
        if shares_root(&num, &den) {
            return Err(Error::ResultantZero);
        }
        Ok(Self::from_parts(num, den))
    }

    fn from_parts(num: Vec<Complex64>, den: Vec<Complex64>) -> Self {
        let num_rev = poly::reversed(&num);
        let den_rev = poly::reversed(&den);
        Self {
            n: (num.len() - 1) as u32,
            num,
            den,
            num_rev,
            den_rev,
        }
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn num(&self) -> &[Complex64] {
        &self.num
    }

    pub fn den(&self) -> &[Complex64] {
        &self.den
    }

    /// The same map with all coefficients divided by the one of largest modulus.
    pub fn normalized(&self) -> RationalMap {
        let pivot = self
            .num
            .iter()
            .chain(&self.den)
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(ONE);
        let inv = pivot.inv();
        Self::from_parts(poly::scale(&self.num, inv), poly::scale(&self.den, inv))
    }

    /// Projective equality of coefficient vectors: `num·den' = num'·den`
    /// coefficientwise up to `tol` relative to the largest product.
    pub fn projectively_eq(&self, other: &RationalMap, tol: f64) -> bool {
        if self.n != other.n {
            return false;
        }
        let a = self.normalized();
        let b = other.normalized();
        let coeffs_a: Vec<_> = a.num.iter().chain(&a.den).copied().collect();
        let coeffs_b: Vec<_> = b.num.iter().chain(&b.den).copied().collect();
        // Both are scaled so some entry has modulus 1; find a common phase.
        let k = coeffs_a
            .iter()
            .zip(&coeffs_b)
            .max_by(|x, y| (x.0.norm() * x.1.norm()).total_cmp(&(y.0.norm() * y.1.norm())))
            .map(|(x, y)| if *y == ZERO { ONE } else { x / y })
            .unwrap_or(ONE);
        coeffs_a
            .iter()
            .zip(&coeffs_b)
            .all(|(x, y)| (x - y * k).norm() <= tol)
    }

    pub fn eval(&self, z: SpherePoint) -> SpherePoint {
        let (top, bottom) = match z {
            SpherePoint::Infinity => (self.num_rev[0], self.den_rev[0]),
            SpherePoint::Finite(z) if z.norm() > 1.0 => {
                let w = z.inv();
                (poly::eval(&self.num_rev, w), poly::eval(&self.den_rev, w))
            }
            SpherePoint::Finite(z) => (poly::eval(&self.num, z), poly::eval(&self.den, z)),
        };
        if bottom == ZERO {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(top / bottom)
        }
    }

    pub fn iterate(&self, z: SpherePoint, m: u32) -> SpherePoint {
        (0..m).fold(z, |acc, _| self.eval(acc))
    }

    /// Derivative of `f` at `z`, read in the chart of `z` on the source side
    /// and the chart of `target` on the image side. Along a cycle, using the
    /// chart of each point on both sides makes the product chart-independent.
    pub fn chart_derivative(&self, z: SpherePoint, target: SpherePoint) -> Complex64 {
        let (p, q, u) = match z {
            SpherePoint::Infinity => (&self.num_rev, &self.den_rev, ZERO),
            SpherePoint::Finite(z) if z.norm() > 1.0 => (&self.num_rev, &self.den_rev, z.inv()),
            SpherePoint::Finite(z) => (&self.num, &self.den, z),
        };
        let (pv, pd) = poly::eval_with_derivative(p, u);
        let (qv, qd) = poly::eval_with_derivative(q, u);
        let (nv, nd, dv, dd) = if target.in_infinity_chart() {
            (qv, qd, pv, pd)
        } else {
            (pv, pd, qv, qd)
        };
        (nd * dv - nv * dd) / (dv * dv)
    }

    /// Multiplier of a cycle given as consecutive points `z_0 → z_1 → … → z_0`.
    pub fn multiplier(&self, orbit: &[SpherePoint]) -> Result<Complex64> {
        if orbit.is_empty() {
            return Err(Error::NotACycle {
                residual: f64::INFINITY,
            });
        }
        let m = orbit.len();
        let mut lambda = ONE;
        for (i, &z) in orbit.iter().enumerate() {
            let next = orbit[(i + 1) % m];
            let residual = self.eval(z).chordal_distance(&next);
            if !(residual <= CYCLE_TOLERANCE) {
                return Err(Error::NotACycle { residual });
            }
            lambda *= self.chart_derivative(z, next);
        }
        Ok(lambda)
    }

    /// Orbit `z, f(z), …, f^{m-1}(z)`.
    pub fn orbit(&self, z: SpherePoint, m: u32) -> Vec<SpherePoint> {
        let mut out = Vec::with_capacity(m as usize);
        let mut cur = z;
        for _ in 0..m {
            out.push(cur);
            cur = self.eval(cur);
        }
        out
    }

    /// All fixed points, with ∞ included when `deg q < n`.
    ///
    /// Finite fixed points are the roots of `z q(z) − p(z)`.
    #[allow(clippy::needless_range_loop)]
    pub fn fixed_points(&self) -> Result<Vec<SpherePoint>> {
        let n = self.n as usize;
        let mut c = vec![ZERO; n + 2];
        c[0] = -self.num[0];
        for k in 1..=n {
            c[k] = self.den[k - 1] - self.num[k];
        }
        c[n + 1] = self.den[n];
        let roots = poly::roots(&c).ok_or(Error::DegenerateFixedPoints)?;
        let mut out: Vec<SpherePoint> = roots.into_iter().map(SpherePoint::Finite).collect();
        if self.den[n] == ZERO {
            out.push(SpherePoint::Infinity);
        }
        Ok(out)
    }

    /// `Σ 1/(1 − λ)` over all fixed points; equals 1 when they are all simple.
    pub fn index_sum(&self) -> Result<Complex64> {
        let points = self.fixed_points()?;
        let lambdas: Vec<Complex64> = points
            .iter()
            .map(|&z| self.chart_derivative(z, z))
            .collect();
        if let Some(l) = lambdas
            .iter()
            .find(|l| !((ONE - **l).norm() > MULTIPLIER_ONE_TOLERANCE))
        {
            return Err(Error::MultiplierOne { re: l.re, im: l.im });
        }
        if points.len() != self.n as usize + 1 {
            return Err(Error::DegenerateFixedPoints);
        }
        for (i, a) in points.iter().enumerate() {
            if points[i + 1..].iter().any(|b| a.chordal_distance(b) < 1e-7) {
                return Err(Error::DegenerateFixedPoints);
            }
        }
        Ok(lambdas.iter().map(|l| (ONE - l).inv()).sum())
    }

    /// `M ∘ f ∘ M⁻¹`, normalized.
    pub fn mobius_conjugate(&self, m: &Mobius) -> Result<RationalMap> {
        m.check()?;
        let inv = m.inverse();
        // Homogeneous substitution (x, y) ↦ M⁻¹(x, y) with y = 1.
        let u = vec![inv.b, inv.a];
        let v = vec![inv.d, inv.c];
        let n = self.n as usize;
        let mut p_sub = vec![ZERO];
        let mut q_sub = vec![ZERO];
        for k in 0..=n {
            let mono = poly::mul(&poly::pow(&u, k), &poly::pow(&v, n - k));
            p_sub = poly::add(&p_sub, &poly::scale(&mono, self.num[k]));
            q_sub = poly::add(&q_sub, &poly::scale(&mono, self.den[k]));
        }
        let mut num = poly::add(&poly::scale(&p_sub, m.a), &poly::scale(&q_sub, m.b));
        let mut den = poly::add(&poly::scale(&p_sub, m.c), &poly::scale(&q_sub, m.d));
        num.resize(n + 1, ZERO);
        den.resize(n + 1, ZERO);
        Ok(RationalMap::new(num, den)?.normalized())
    }
}

/// Möbius transformation `z ↦ (a z + b)/(c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    /// `z ↦ 1/z`.
    pub fn inversion() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    fn check(&self) -> Result<()> {
        let det = self.a * self.d - self.b * self.c;
        let scale = (self.a.norm() + self.b.norm()) * (self.c.norm() + self.d.norm());
        if !(det.norm() > 1e-14 * scale) {
            return Err(Error::SingularMobius);
        }
        Ok(())
    }

    pub fn inverse(&self) -> Mobius {
        Mobius::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn apply(&self, z: SpherePoint) -> SpherePoint {
        let (top, bottom) = match z {
            SpherePoint::Infinity => (self.a, self.c),
            SpherePoint::Finite(z) => (self.a * z + self.b, self.c * z + self.d),
        };
        if bottom == ZERO {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(top / bottom)
        }
    }
}

/// Determinant of the Sylvester matrix of two degree-`n` forms given by
/// ascending coefficient lists (the shorter list is zero-padded).
pub fn resultant(num: &[Complex64], den: &[Complex64]) -> Complex64 {
    linalg::det(&sylvester(num, den))
}

fn sylvester(num: &[Complex64], den: &[Complex64]) -> CMatrix {
    let len = num.len().max(den.len());
    let n = len.saturating_sub(1);
    let size = 2 * n;
    let mut s = CMatrix::zeros(size, size);
    for (block, coeffs) in [num, den].into_iter().enumerate() {
        for shift in 0..n {
            let row = block * n + shift;
            for k in 0..=n {
                let c = coeffs.get(n - k).copied().unwrap_or(ZERO);
                s[(row, shift + k)] = c;
            }
        }
    }
    s
}

/// Roots of a degree-`n` coefficient list on the sphere, with `∞` repeated
/// `n − deg` times. `None` for the zero polynomial or a root-finder failure.
fn sphere_roots(coeffs: &[Complex64]) -> Option<Vec<SpherePoint>> {
    let deg = poly::degree(coeffs)?;
    let mut out: Vec<SpherePoint> = poly::roots(coeffs)?
        .into_iter()
        .map(SpherePoint::Finite)
        .collect();
    out.extend(std::iter::repeat_n(
        SpherePoint::Infinity,
        coeffs.len() - 1 - deg,
    ));
    Some(out)
}

/// Numerical version of `Res(p, q) = 0`.
///
/// The Sylvester determinant of a perfectly good map can be many orders of
/// magnitude below its Hadamard bound (Möbius conjugates of degree 4 maps
/// routinely sit near 1e-14), so the decision is made on the roots instead.
fn shares_root(num: &[Complex64], den: &[Complex64]) -> bool {
    if resultant(num, den) == ZERO {
        return true;
    }
    match (sphere_roots(num), sphere_roots(den)) {
        (Some(p), Some(q)) => p.iter().any(|a| {
            q.iter()
                .any(|b| a.chordal_distance(b) < COMMON_ROOT_TOLERANCE)
        }),
        _ => true,
    }
}

/// Parameter indices `{0, …, n−2, n+1, …, 2n−1}` in ascending order.
pub fn param_indices(n: u32) -> Vec<u32> {
    (0..=n.saturating_sub(2)).chain(n + 1..2 * n).collect()
}

/// Column position of parameter index `j`.
pub fn slot_of(n: u32, j: u32) -> Result<usize> {
    if j + 1 == n || j == n {
        Err(Error::IndexExcluded { n, j })
    } else if j < n {
        Ok(j as usize)
    } else if j < 2 * n {
        Ok((j - 2) as usize)
    } else {
        Err(Error::IndexOutOfRange { n, j })
    }
}

/// Parameter index of column position `slot`.
pub fn index_of_slot(n: u32, slot: usize) -> u32 {
    let s = slot as u32;
    if s + 2 <= n {
        s
    } else {
        s + 2
    }
}

/// Parameter vector `(a_0, …, a_{n−2}, a_{n+1}, …, a_{2n−1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    n: u32,
    a: Vec<Complex64>,
}

impl ParamVector {
    pub fn zero(n: u32) -> Self {
        Self {
            n,
            a: vec![ZERO; 2 * n as usize - 2],
        }
    }

    /// From values in column order.
    pub fn new(n: u32, a: Vec<Complex64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDegree { min: 2, got: n });
        }
        let expected = 2 * n as usize - 2;
        if a.len() != expected {
            return Err(Error::WrongLength {
                expected,
                got: a.len(),
            });
        }
        Ok(Self { n, a })
    }

    /// The vector with `a_j = value` and every other coordinate zero.
    pub fn unit(n: u32, j: u32, value: Complex64) -> Result<Self> {
        let mut v = Self::zero(n);
        v.set(j, value)?;
        Ok(v)
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn get(&self, j: u32) -> Result<Complex64> {
        Ok(self.a[slot_of(self.n, j)?])
    }

    pub fn set(&mut self, j: u32, value: Complex64) -> Result<()> {
        let s = slot_of(self.n, j)?;
        self.a[s] = value;
        Ok(())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.a
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `(zⁿ + a_{n−2}z^{n−2} + … + a_0) / (1 − a_{n+1}z − … − a_{2n−1}z^{n−1})`.
pub fn family_map(a: &ParamVector) -> Result<RationalMap> {
    let n = a.n as usize;
    let mut num = vec![ZERO; n + 1];
    let mut den = vec![ZERO; n + 1];
    num[..n - 1].copy_from_slice(&a.a[..n - 1]);
    num[n] = ONE;
    den[0] = ONE;
    for (d, &x) in den[1..n].iter_mut().zip(&a.a[n - 1..]) {
        *d = -x;
    }
    RationalMap::new(num, den)
}

/// The polynomial `zⁿ + a zʲ`; only `j ≤ n` fits a degree-n coefficient list.
pub fn monomial_family(n: u32, j: u32, a: Complex64) -> Result<RationalMap> {
    if n < 1 {
        return Err(Error::InvalidDegree { min: 1, got: n });
    }
    if j > n {
        return Err(Error::IndexOutOfRange { n, j });
    }
    let mut num = vec![ZERO; n as usize + 1];
    let mut den = vec![ZERO; n as usize + 1];
    num[n as usize] = ONE;
    num[j as usize] += a;
    den[0] = ONE;
    RationalMap::new(num, den)
}
