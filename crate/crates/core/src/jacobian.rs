//! The multiplier Jacobian `dΛ_z/da` at `a = 0` and its leading minors.

use num_complex::Complex64;

use crate::derivatives::{dlambda_closed, dlambda_infinity, dlambda_numeric};
use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::CMatrix;
use crate::periodic::{modulus_for, PeriodVector, RootPoint};
use crate::ratmap::{param_indices, slot_of};

pub use crate::linalg::{det, hadamard_threshold};

/// A `(2n−2)`-tuple of periodic points of `zⁿ` with labelled periods, in
/// pairwise distinct orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicVector {
    n: u32,
    points: Vec<RootPoint>,
    periods: PeriodVector,
}

impl PeriodicVector {
    pub fn new(points: Vec<RootPoint>, periods: PeriodVector) -> Result<Self> {
        let v = Self {
            n: periods.degree(),
            points,
            periods,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn points(&self) -> &[RootPoint] {
        &self.points
    }

    pub fn periods(&self) -> &PeriodVector {
        &self.periods
    }

    /// Checks minimal periods, moduli, the placement of ∞ and orbit distinctness.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let periods = self.periods.periods();
        if self.points.len() != periods.len() {
            return Err(Error::WrongLength {
                expected: periods.len(),
                got: self.points.len(),
            });
        }
        let mut seen: Vec<(u32, u64)> = Vec::new();
        let mut infinities = 0;
        for (slot, (p, &m)) in self.points.iter().zip(periods).enumerate() {
            match *p {
                RootPoint::Infinity => {
                    if m != 1 {
                        return Err(Error::InvalidPoint(format!(
                            "slot {slot}: infinity is fixed but labelled with period {m}"
                        )));
                    }
                    infinities += 1;
                }
                RootPoint::Finite { modulus, .. } => {
                    if modulus != modulus_for(n, m)? {
                        return Err(Error::InvalidPoint(format!(
                            "slot {slot}: modulus {modulus} does not match period {m}"
                        )));
                    }
                    let actual = p.minimal_period(n);
                    if actual != m {
                        return Err(Error::InvalidPoint(format!(
                            "slot {slot}: minimal period is {actual}, expected {m}"
                        )));
                    }
                    let id = (m, p.orbit_id(n).expect("finite point"));
                    if seen.contains(&id) {
                        return Err(Error::InvalidPoint(format!(
                            "slot {slot}: shares an orbit with an earlier point"
                        )));
                    }
                    seen.push(id);
                }
            }
        }
        if infinities > 1 {
            return Err(Error::InvalidPoint("infinity used more than once".into()));
        }
        Ok(())
    }
}

/// Jacobian of the multipliers of the labelled points with respect to the
/// family parameters; rows follow the point order, columns ascending `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierJacobian {
    pub n: u32,
    pub rows: Vec<RootPoint>,
    pub row_periods: Vec<u32>,
    pub cols: Vec<u32>,
    pub entries: CMatrix,
}

/// Closed-form row `(dλ_z/da_j)_j` for one point of period `m`.
pub fn closed_row(n: u32, m: u32, point: &RootPoint) -> Result<Vec<Complex64>> {
    param_indices(n)
        .into_iter()
        .map(|j| match point {
            RootPoint::Infinity => dlambda_infinity(n, j),
            RootPoint::Finite { .. } => dlambda_closed(n, m, j, point),
        })
        .collect()
}

pub fn build_jacobian(v: &PeriodicVector) -> Result<MultiplierJacobian> {
    let n = v.n;
    let labelled: Vec<(RootPoint, u32)> = v
        .points
        .iter()
        .copied()
        .zip(v.periods.periods().iter().copied())
        .collect();
    let rows = exec::try_map(&labelled, |(p, m)| closed_row(n, *m, p))?;
    Ok(MultiplierJacobian {
        n,
        rows: v.points.clone(),
        row_periods: v.periods.periods().to_vec(),
        cols: param_indices(n),
        entries: CMatrix::from_rows(rows),
    })
}

/// Same shape as [`build_jacobian`], every entry from the finite-difference oracle.
pub fn numeric_jacobian(v: &PeriodicVector, h: f64) -> Result<MultiplierJacobian> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStep(h));
    }
    let n = v.n;
    let cols = param_indices(n);
    let periods = v.periods.periods();
    let cells: Vec<(usize, u32)> = (0..v.points.len())
        .flat_map(|r| cols.iter().map(move |&j| (r, j)))
        .collect();
    let values = exec::try_map(&cells, |&(r, j)| {
        dlambda_numeric(n, periods[r], j, &v.points[r], h)
    })?;
    let size = cols.len();
    let rows = values.chunks(size).map(<[_]>::to_vec).collect();
    Ok(MultiplierJacobian {
        n,
        rows: v.points.clone(),
        row_periods: periods.to_vec(),
        cols,
        entries: CMatrix::from_rows(rows),
    })
}

/// Size of the leading minor ending at the diagonal entry of column `j`;
/// `j = n` is an alias for `j = n − 2`.
pub fn leading_minor_size(n: u32, j: u32) -> Result<usize> {
    if j == n && n >= 2 {
        return Ok(n as usize - 1);
    }
    match slot_of(n, j) {
        Ok(s) => Ok(s + 1),
        Err(_) => Err(Error::IndexOutOfRange { n, j }),
    }
}

/// Top-left square submatrix through the diagonal element of column `j`.
pub fn leading_minor(jac: &MultiplierJacobian, j: u32) -> Result<CMatrix> {
    let size = leading_minor_size(jac.n, j)?;
    Ok(jac.entries.top_left(size))
}

/// Largest entrywise `|a − b| / max(1, |a|)`.
pub fn max_relative_deviation(closed: &MultiplierJacobian, numeric: &MultiplierJacobian) -> f64 {
    closed
        .entries
        .entries()
        .iter()
        .zip(numeric.entries.entries())
        .map(|(a, b)| crate::derivatives::relative_error(*a, *b))
        .fold(0.0, f64::max)
}
