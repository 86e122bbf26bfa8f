//! Inductive construction of periodic vectors with a nondegenerate
//! multiplier Jacobian, and independent verification of the result.
//!
//! Slots are filled in column order `j = 0, …, n−2, n+1, …, 2n−1`. Each new
//! point only touches the last row of the next leading minor, so a choice that
//! keeps every minor nondegenerate extends one slot at a time. The search is
//! depth first with backtracking, which also covers the case where candidate
//! orbits are already taken by earlier slots of the same period.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decimal;
use crate::derivatives::{deg_p, ORACLE_STEP};
use crate::error::{Error, ExhaustionReport, Result};
use crate::exec;
use crate::jacobian::{
    build_jacobian, closed_row, det, hadamard_threshold, max_relative_deviation, numeric_jacobian,
    PeriodicVector,
};
use crate::linalg::CMatrix;
use crate::periodic::{count_nonzero, orbit_representatives, PeriodVector, RootPoint};
use crate::ratmap::{index_of_slot, param_indices};

/// Default relative tolerance between the closed-form and numeric Jacobians.
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_BACKTRACK: usize = 100_000;

/// Which of the two period conditions hold, with the counts behind them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub cond_i: bool,
    pub cond_ii: bool,
    pub ones_count: usize,
    pub twos_count: usize,
    pub max_period: u32,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.cond_i && self.cond_ii
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertOptions {
    pub tol: f64,
    pub h: f64,
    pub max_backtrack: usize,
}

impl Default for CertOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            h: ORACLE_STEP,
            max_backtrack: DEFAULT_MAX_BACKTRACK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// Largest entrywise relative deviation, closed form vs. finite differences.
    #[serde(with = "decimal::f64_17")]
    pub max_rel_err: f64,
    #[serde(with = "decimal::f64_17")]
    pub min_abs_leading_det: f64,
    /// Nondegeneracy threshold of each leading minor.
    #[serde(with = "decimal::f64_17_vec")]
    pub thresholds: Vec<f64>,
}

/// Witness that the multipliers of the chosen orbits are locally independent
/// at `zⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub n: u32,
    /// Periods in the order the caller supplied them.
    pub periods_input: Vec<u32>,
    /// `permutation[slot]` is the input position whose period sits in `slot`.
    pub permutation: Vec<usize>,
    /// Chosen points in slot (column) order.
    pub points: Vec<RootPoint>,
    #[serde(with = "decimal::complex17")]
    pub det_value: Complex64,
    #[serde(with = "decimal::complex17_vec")]
    pub leading_minor_dets: Vec<Complex64>,
    pub verification: Verification,
}

impl Certificate {
    /// Periods in slot order.
    pub fn slot_periods(&self) -> Vec<u32> {
        self.permutation
            .iter()
            .map(|&i| self.periods_input[i])
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

fn expect_len(n: u32, periods: &[u32]) -> Result<()> {
    let expected = 2 * n as usize - 2;
    if periods.len() != expected {
        return Err(Error::WrongLength {
            expected,
            got: periods.len(),
        });
    }
    Ok(())
}

/// (i) at most `n` periods equal 1; (ii) some period exceeds 2 and none equals 2.
pub fn check_period_conditions(n: u32, periods: &[u32]) -> Result<ConditionReport> {
    if n < 2 {
        return Err(Error::InvalidDegree { min: 2, got: n });
    }
    expect_len(n, periods)?;
    let ones_count = periods.iter().filter(|&&p| p == 1).count();
    let twos_count = periods.iter().filter(|&&p| p == 2).count();
    let max_period = periods.iter().copied().max().unwrap_or(0);
    Ok(ConditionReport {
        cond_i: ones_count <= n as usize,
        cond_ii: max_period > 2 && twos_count == 0,
        ones_count,
        twos_count,
        max_period,
    })
}

/// Slot assignment for which the inductive argument applies: the last slot
/// takes a 1 when exactly `n` periods are 1 and the largest period otherwise;
/// the slot before it takes a period ≥ 3; the rest are nondecreasing.
/// Ties are broken by input position.
pub fn order_periods(n: u32, periods: &[u32]) -> Result<Vec<usize>> {
    let report = check_period_conditions(n, periods)?;
    if !report.holds() {
        return Err(Error::ConditionsNotMet(report));
    }
    let mut sorted: Vec<usize> = (0..periods.len()).collect();
    sorted.sort_by_key(|&i| (periods[i], i));

    let (second_last, last) = if report.ones_count == n as usize {
        let one = sorted[report.ones_count - 1];
        let largest = *sorted.last().expect("nonempty");
        (largest, one)
    } else {
        let len = sorted.len();
        (sorted[len - 2], sorted[len - 1])
    };
    let mut perm: Vec<usize> = sorted
        .into_iter()
        .filter(|&i| i != last && i != second_last)
        .collect();
    perm.push(second_last);
    perm.push(last);
    Ok(perm)
}

/// Nondecreasing order, except that a 1 is moved to the last slot when
/// exactly `n` periods are 1 (so ∞ can fill it).
fn exploratory_order(n: u32, periods: &[u32]) -> Vec<usize> {
    let mut sorted: Vec<usize> = (0..periods.len()).collect();
    sorted.sort_by_key(|&i| (periods[i], i));
    let ones = periods.iter().filter(|&&p| p == 1).count();
    if ones == n as usize {
        let one = sorted.remove(ones - 1);
        sorted.push(one);
    }
    sorted
}

/// Upper bound on the degree of the cofactor combination `Σ_i C_i P_{n,i,m}`
/// arising at column `j` when the point there has period `m`.
pub fn cofactor_degree_bound(n: u32, j: u32, m: u32) -> Result<u64> {
    param_indices(n)
        .into_iter()
        .filter(|&i| i <= j)
        .map(|i| deg_p(n, i, m))
        .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
}

/// True when a nonzero cofactor polynomial at column `j` cannot vanish on
/// every nonzero point of period `m`.
pub fn degree_bound_holds(n: u32, j: u32, m: u32) -> Result<bool> {
    Ok(cofactor_degree_bound(n, j, m)? < count_nonzero(n, m)?)
}

struct Search<'a> {
    n: u32,
    periods: &'a [u32],
    reps: HashMap<u32, Vec<RootPoint>>,
    check_degree_bound: bool,
    max_nodes: usize,
    nodes: usize,
    deepest: Option<ExhaustionReport>,
    rows: Vec<Vec<Complex64>>,
    points: Vec<RootPoint>,
    dets: Vec<Complex64>,
    thresholds: Vec<f64>,
}

struct Scored {
    point: RootPoint,
    row: Vec<Complex64>,
    det: Complex64,
    threshold: f64,
}

enum Outcome {
    Found,
    Failed,
    BudgetHit,
}

impl<'a> Search<'a> {
    fn new(n: u32, periods: &'a [u32], check_degree_bound: bool, max_nodes: usize) -> Result<Self> {
        let mut reps = HashMap::new();
        for &m in periods {
            if let std::collections::hash_map::Entry::Vacant(e) = reps.entry(m) {
                e.insert(orbit_representatives(n, m)?);
            }
        }
        Ok(Self {
            n,
            periods,
            reps,
            check_degree_bound,
            max_nodes,
            nodes: 0,
            deepest: None,
            rows: Vec::new(),
            points: Vec::new(),
            dets: Vec::new(),
            thresholds: Vec::new(),
        })
    }

    fn candidates(&self, slot: usize) -> Vec<RootPoint> {
        let m = self.periods[slot];
        if slot + 1 == self.periods.len() && m == 1 {
            return vec![RootPoint::Infinity];
        }
        let n = self.n;
        let used: Vec<u64> = self
            .points
            .iter()
            .zip(self.periods)
            .filter(|(_, &pm)| pm == m)
            .filter_map(|(p, _)| p.orbit_id(n))
            .collect();
        self.reps[&m]
            .iter()
            .filter(|p| p.orbit_id(n).is_some_and(|id| !used.contains(&id)))
            .copied()
            .collect()
    }

    fn score(&self, slot: usize, candidates: &[RootPoint]) -> Result<Vec<Scored>> {
        let (n, m) = (self.n, self.periods[slot]);
        let size = slot + 1;
        let mut scored = exec::try_map(candidates, |&point| -> Result<Scored> {
            let row = closed_row(n, m, &point)?;
            let mut minor = CMatrix::zeros(size, size);
            for (r, prev) in self.rows.iter().enumerate() {
                minor.row_mut(r).copy_from_slice(&prev[..size]);
            }
            minor.row_mut(slot).copy_from_slice(&row[..size]);
            Ok(Scored {
                point,
                row,
                det: det(&minor),
                threshold: hadamard_threshold(&minor),
            })
        })?;
        scored.sort_by(|a, b| {
            b.det
                .norm()
                .total_cmp(&a.det.norm())
                .then_with(|| a.point.cmp(&b.point))
        });
        Ok(scored)
    }

    fn record_failure(&mut self, slot: usize, scored: &[Scored], threshold: f64) {
        if self.deepest.as_ref().is_some_and(|d| d.deepest_slot > slot) {
            return;
        }
        self.deepest = Some(ExhaustionReport {
            deepest_slot: slot,
            deepest_index: index_of_slot(self.n, slot),
            candidate_dets: scored.iter().map(|s| s.det.norm()).collect(),
            threshold,
            nodes_visited: self.nodes,
            budget_hit: false,
        });
    }

    fn run(&mut self, slot: usize) -> Result<Outcome> {
        if slot == self.periods.len() {
            return Ok(Outcome::Found);
        }
        let m = self.periods[slot];
        let j = index_of_slot(self.n, slot);
        let candidates = self.candidates(slot);
        if self.check_degree_bound
            && !candidates.iter().any(RootPoint::is_infinity)
            && !degree_bound_holds(self.n, j, m)?
        {
            return Err(Error::DegreeBound { slot });
        }
        let scored = self.score(slot, &candidates)?;
        let threshold = scored.first().map_or(f64::NAN, |s| s.threshold);
        for cand in &scored {
            if !(cand.det.norm() > cand.threshold) {
                break;
            }
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Ok(Outcome::BudgetHit);
            }
            self.rows.push(cand.row.clone());
            self.points.push(cand.point);
            self.dets.push(cand.det);
            self.thresholds.push(cand.threshold);
            match self.run(slot + 1)? {
                Outcome::Found => return Ok(Outcome::Found),
                Outcome::BudgetHit => return Ok(Outcome::BudgetHit),
                Outcome::Failed => {
                    self.rows.pop();
                    self.points.pop();
                    self.dets.pop();
                    self.thresholds.pop();
                }
            }
        }
        self.record_failure(slot, &scored, threshold);
        Ok(Outcome::Failed)
    }

    fn exhausted(&self, budget_hit: bool) -> Error {
        let mut report = self.deepest.clone().unwrap_or(ExhaustionReport {
            deepest_slot: 0,
            deepest_index: 0,
            candidate_dets: Vec::new(),
            threshold: f64::NAN,
            nodes_visited: 0,
            budget_hit,
        });
        report.nodes_visited = self.nodes;
        report.budget_hit = budget_hit;
        Error::Exhausted(Box::new(report))
    }
}

fn search_and_certify(
    n: u32,
    periods_input: &[u32],
    permutation: Vec<usize>,
    check_degree_bound: bool,
    opts: &CertOptions,
) -> Result<Certificate> {
    let slot_periods: Vec<u32> = permutation.iter().map(|&i| periods_input[i]).collect();
    let mut search = Search::new(n, &slot_periods, check_degree_bound, opts.max_backtrack)?;
    match search.run(0)? {
        Outcome::Found => {}
        Outcome::Failed => return Err(search.exhausted(false)),
        Outcome::BudgetHit => return Err(search.exhausted(true)),
    }
    let mut cert = Certificate {
        n,
        periods_input: periods_input.to_vec(),
        permutation,
        points: search.points.clone(),
        det_value: *search.dets.last().expect("at least one slot"),
        leading_minor_dets: search.dets.clone(),
        verification: Verification {
            max_rel_err: f64::NAN,
            min_abs_leading_det: f64::NAN,
            thresholds: search.thresholds.clone(),
        },
    };
    cert.verification = verify_certificate(&cert, opts.h, opts.tol)?;
    Ok(cert)
}

/// Builds and verifies a certificate for periods satisfying both conditions.
pub fn construct_certificate(n: u32, periods: &[u32], opts: &CertOptions) -> Result<Certificate> {
    if n < 3 {
        return Err(Error::InvalidDegree { min: 3, got: n });
    }
    let permutation = order_periods(n, periods)?;
    search_and_certify(n, periods, permutation, true, opts)
}

/// Runs the same search when condition (ii) may fail. Success is evidence,
/// failure is reported as [`Error::Exhausted`] and proves nothing.
pub fn explore_beyond_conditions(
    n: u32,
    periods: &[u32],
    opts: &CertOptions,
) -> Result<Certificate> {
    if n < 3 {
        return Err(Error::InvalidDegree { min: 3, got: n });
    }
    let report = check_period_conditions(n, periods)?;
    if !report.cond_i {
        return Err(Error::ConditionsNotMet(report));
    }
    search_and_certify(n, periods, exploratory_order(n, periods), false, opts)
}

fn fail(msg: impl Into<String>) -> Error {
    Error::VerificationFailed(msg.into())
}

fn close(a: Complex64, b: Complex64, scale: f64) -> bool {
    (a - b).norm() <= 1e-9 * scale.max(a.norm())
}

/// Recomputes everything a certificate claims, with `h` the oracle step and
/// `tol` the allowed closed-vs-numeric relative deviation.
pub fn verify_certificate(c: &Certificate, h: f64, tol: f64) -> Result<Verification> {
    if c.n < 2 {
        return Err(fail(format!("degree {} is below 2", c.n)));
    }
    let size = 2 * c.n as usize - 2;
    if c.periods_input.len() != size || c.points.len() != size || c.permutation.len() != size {
        return Err(fail("structure: vectors must all have length 2n - 2"));
    }
    let mut seen = vec![false; size];
    for &i in &c.permutation {
        if i >= size || std::mem::replace(&mut seen[i], true) {
            return Err(fail("structure: permutation is not a bijection"));
        }
    }
    if c.leading_minor_dets.len() != size {
        return Err(fail(
            "structure: one leading minor determinant per slot expected",
        ));
    }

    let periods =
        PeriodVector::new(c.n, c.slot_periods()).map_err(|e| fail(format!("periods: {e}")))?;
    let vector = PeriodicVector::new(c.points.clone(), periods)
        .map_err(|e| fail(format!("distinctness/periods: {e}")))?;

    let closed = build_jacobian(&vector).map_err(|e| fail(format!("closed form: {e}")))?;
    let numeric = numeric_jacobian(&vector, h).map_err(|e| fail(format!("oracle: {e}")))?;
    let max_rel_err = max_relative_deviation(&closed, &numeric);
    if !(max_rel_err <= tol) {
        return Err(fail(format!(
            "oracle agreement: max relative deviation {max_rel_err:e} exceeds {tol:e}"
        )));
    }

    let mut thresholds = Vec::with_capacity(size);
    let mut min_abs = f64::INFINITY;
    for (slot, &recorded) in c.leading_minor_dets.iter().enumerate() {
        let minor = closed.entries.top_left(slot + 1);
        let value = det(&minor);
        let threshold = hadamard_threshold(&minor);
        if !(value.norm() > threshold) {
            return Err(fail(format!(
                "nondegeneracy: leading minor {slot} has |det| {:e} <= {threshold:e}",
                value.norm()
            )));
        }
        if !(recorded.norm() > threshold) || !close(recorded, value, threshold) {
            return Err(fail(format!(
                "nondegeneracy: recorded determinant of minor {slot} does not match {value}"
            )));
        }
        min_abs = min_abs.min(value.norm());
        thresholds.push(threshold);
    }
    let full = *c.leading_minor_dets.last().expect("size >= 2");
    let last_threshold = *thresholds.last().expect("size >= 2");
    if !(c.det_value.norm() > last_threshold) || !close(c.det_value, full, last_threshold) {
        return Err(fail(format!(
            "nondegeneracy: det_value {} is not the nonzero full determinant {full}",
            c.det_value
        )));
    }

    Ok(Verification {
        max_rel_err,
        min_abs_leading_det: min_abs,
        thresholds,
    })
}
