#![allow(dead_code)]

use multindep::ratmap::{Mobius, RationalMap, SpherePoint};
use num_complex::Complex64;
use rand::Rng;

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random map of degree `n` with coefficients uniform in the unit square.
/// `None` when the draw is degenerate.
pub fn random_map<R: Rng>(rng: &mut R, n: u32) -> Option<RationalMap> {
    let num = (0..=n).map(|_| random_complex(rng)).collect();
    let den = (0..=n).map(|_| random_complex(rng)).collect();
    RationalMap::new(num, den).ok()
}

pub fn random_mobius<R: Rng>(rng: &mut R) -> Mobius {
    loop {
        let m = Mobius::new(
            random_complex(rng),
            random_complex(rng),
            random_complex(rng),
            random_complex(rng),
        );
        if (m.a * m.d - m.b * m.c).norm() > 0.1 {
            return m;
        }
    }
}

/// Fixed points with their multipliers, provided they are well separated on
/// the sphere and no multiplier is near 1.
pub fn well_conditioned_fixed_points(f: &RationalMap) -> Option<Vec<(SpherePoint, Complex64)>> {
    let points = f.fixed_points().ok()?;
    if points.len() != f.degree() as usize + 1 {
        return None;
    }
    for (i, a) in points.iter().enumerate() {
        if points[i + 1..].iter().any(|b| a.chordal_distance(b) < 1e-2) {
            return None;
        }
    }
    let with_multipliers: Vec<_> = points
        .into_iter()
        .map(|z| f.multiplier(&[z]).map(|l| (z, l)))
        .collect::<Result<_, _>>()
        .ok()?;
    with_multipliers
        .iter()
        .all(|(_, l)| (Complex64::new(1.0, 0.0) - l).norm() > 1e-2 && l.norm() < 1e3)
        .then_some(with_multipliers)
}

/// Worst relative disagreement between multipliers of `f` and of `M ∘ f ∘ M⁻¹`
/// at corresponding fixed points.
pub fn conjugation_deviation(
    f: &RationalMap,
    fixed: &[(SpherePoint, Complex64)],
    m: &Mobius,
) -> Option<f64> {
    let g = f.mobius_conjugate(m).ok()?;
    let mut worst: f64 = 0.0;
    for &(z, lambda) in fixed {
        let w = m.apply(z);
        // Re-polish the image point against g so the comparison does not
        // inherit the conditioning of M.
        let w = multindep::periodic::continue_periodic_point(&g, w, 1, 1e-10, 50).ok()?;
        let mu = g.multiplier(&[w]).ok()?;
        worst = worst.max((mu - lambda).norm() / lambda.norm().max(1.0));
    }
    Some(worst)
}
