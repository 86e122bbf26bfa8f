//! Dense univariate polynomials over `Complex64`, coefficients in ascending order.

use num_complex::Complex64;

pub type Poly = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Value and first derivative by Horner's scheme.
pub fn eval_with_derivative(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = ZERO;
    let mut d = ZERO;
    for &c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

pub fn reversed(p: &[Complex64]) -> Poly {
    p.iter().rev().copied().collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (k, &y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

pub fn pow(p: &[Complex64], e: usize) -> Poly {
    (0..e).fold(vec![ONE], |acc, _| mul(&acc, p))
}

/// `a + b`, padded to the longer length.
pub fn add(a: &[Complex64], b: &[Complex64]) -> Poly {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| a.get(i).copied().unwrap_or(ZERO) + b.get(i).copied().unwrap_or(ZERO))
        .collect()
}

pub fn scale(p: &[Complex64], s: Complex64) -> Poly {
    p.iter().map(|&c| c * s).collect()
}

/// Index of the highest nonzero coefficient.
pub fn degree(p: &[Complex64]) -> Option<usize> {
    p.iter().rposition(|c| *c != ZERO)
}

/// All complex roots of `p` (with multiplicity), by Aberth–Ehrlich iteration
/// followed by Newton polishing. Exact zero roots are split off first.
///
/// Returns `None` when the polynomial is identically zero or the iteration
/// fails to settle.
pub fn roots(p: &[Complex64]) -> Option<Vec<Complex64>> {
    let deg = degree(p)?;
    let low = p.iter().position(|c| *c != ZERO)?;
    let mut out = vec![ZERO; low];
    let q: Poly = p[low..=deg].to_vec();
    let d = q.len() - 1;
    if d == 0 {
        return Some(out);
    }
    let lead = q[d];
    let monic: Poly = q.iter().map(|&c| c / lead).collect();
    if d == 1 {
        out.push(-monic[0]);
        return Some(out);
    }

    // Initial guesses on a circle bounded by the Cauchy root bound.
    let radius = 1.0 + monic[..d].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let r0 = monic[0].norm().powf(1.0 / d as f64).clamp(1e-3, radius);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let theta = std::f64::consts::TAU * (k as f64 + 0.25) / d as f64 + 0.4;
            Complex64::from_polar(r0, theta)
        })
        .collect();

    let deriv: Poly = (1..=d).map(|k| monic[k] * k as f64).collect();
    let mut settled = false;
    for _ in 0..2000 {
        let mut max_step: f64 = 0.0;
        for i in 0..d {
            let pz = eval(&monic, z[i]);
            if pz == ZERO {
                continue;
            }
            let ratio = pz / eval(&deriv, z[i]);
            let repulsion: Complex64 = (0..d)
                .filter(|&k| k != i)
                .map(|k| {
                    let diff = z[i] - z[k];
                    if diff == ZERO {
                        ZERO
                    } else {
                        ONE / diff
                    }
                })
                .sum();
            let step = ratio / (ONE - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            settled = true;
            break;
        }
    }
    if !settled && z.iter().any(|r| !r.is_finite()) {
        return None;
    }

    for r in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = eval_with_derivative(&monic, *r);
            if dv == ZERO {
                break;
            }
            let step = v / dv;
            if !step.is_finite() || step.norm() < 1e-17 * r.norm().max(1.0) {
                break;
            }
            *r -= step;
        }
    }
    out.extend(z);
    Some(out)
}
