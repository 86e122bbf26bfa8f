//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use multindep::certificate::{
    check_period_conditions, construct_certificate, verify_certificate, CertOptions,
};
use multindep::derivatives::{
    deg_p, dlambda_closed, dlambda_infinity, dlambda_numeric, eval_p_at_root, poly_p,
    relative_error, support_disjoint,
};
use multindep::jacobian::{build_jacobian, det, hadamard_threshold, PeriodicVector};
use multindep::periodic::{
    count_nonzero, count_periodic, enumerate_periodic, orbit_of, orbit_representatives,
    PeriodVector, RootPoint,
};
use multindep::ratmap::param_indices;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn counting_identities() -> Check {
    let mut cases = 0;
    for n in 2u32..=5 {
        let nn = n as u64;
        for m in 1u32..=8 {
            let total: u64 = (1..=m)
                .filter(|r| m % r == 0)
                .map(|r| count_periodic(n, r).unwrap())
                .sum();
            ensure!(total == nn.pow(m), "divisor sum n={n} m={m}: {total}");
            if m >= 3 {
                let hat = count_nonzero(n, m).unwrap();
                ensure!(
                    hat >= nn.pow(m) - nn.pow(m - 2),
                    "lower bound n={n} m={m}: {hat}"
                );
            }
            cases += 1;
        }
        ensure!(count_periodic(n, 1).unwrap() == nn, "nu({n},1)");
        ensure!(count_periodic(n, 2).unwrap() == nn * nn - nn, "nu({n},2)");
    }
    Ok(format!("{cases} (n, m) pairs"))
}

fn enumeration_agreement() -> Check {
    let mut points_total = 0;
    for n in 2u32..=4 {
        for m in 1u32..=6 {
            let points = enumerate_periodic(n, m).unwrap();
            let expected = count_nonzero(n, m).unwrap();
            ensure!(
                points.len() as u64 == expected,
                "n={n} m={m}: {} points vs {expected}",
                points.len()
            );
            let mut covered = Vec::new();
            for rep in orbit_representatives(n, m).unwrap() {
                let orbit = orbit_of(&rep, n).unwrap();
                ensure!(
                    orbit.len() == m as usize,
                    "n={n} m={m}: cycle of length {}",
                    orbit.len()
                );
                ensure!(
                    orbit.iter().all(|p| p.minimal_period(n) == m),
                    "n={n} m={m}: wrong minimal period in orbit of {rep:?}"
                );
                covered.extend(orbit);
            }
            covered.sort();
            ensure!(
                covered == points,
                "n={n} m={m}: cycles do not partition the points"
            );
            points_total += points.len();
        }
    }
    Ok(format!("{points_total} points partitioned into cycles"))
}

fn closed_form_vs_oracle() -> Check {
    let mut worst: f64 = 0.0;
    let mut entries = 0;
    for n in 2u32..=3 {
        for m in 1u32..=4 {
            // Every point, which is at least 10 whenever that many exist.
            let points = enumerate_periodic(n, m).unwrap();
            for z0 in &points {
                for j in param_indices(n) {
                    let closed = dlambda_closed(n, m, j, z0).map_err(|e| e.to_string())?;
                    let numeric = dlambda_numeric(n, m, j, z0, 1e-6)
                        .map_err(|e| format!("n={n} m={m} j={j} {z0:?}: {e}"))?;
                    let err = relative_error(closed, numeric);
                    ensure!(
                        err <= 1e-5,
                        "n={n} m={m} j={j} {z0:?}: relative error {err:e}"
                    );
                    worst = worst.max(err);
                    entries += 1;
                }
            }
        }
        let cols = param_indices(n);
        for (k, &j) in cols.iter().enumerate() {
            let expected = if k + 1 == cols.len() { -1.0 } else { 0.0 };
            let closed = dlambda_infinity(n, j).unwrap();
            let numeric = dlambda_numeric(n, 1, j, &RootPoint::Infinity, 1e-6).unwrap();
            for v in [closed, numeric] {
                ensure!(
                    (v - Complex64::new(expected, 0.0)).norm() <= 1e-8,
                    "infinity row n={n} j={j}: {v}"
                );
            }
        }
    }
    Ok(format!("{entries} entries, max relative error {worst:.2e}"))
}

fn polynomial_structure() -> Check {
    let mut pairs = 0;
    for n in 2u32..=5 {
        for m in 1u32..=4 {
            let polys: Vec<_> = param_indices(n)
                .into_iter()
                .map(|j| (j, poly_p(n, j, m).unwrap()))
                .collect();
            for (j, p) in &polys {
                let expected = deg_p(n, *j, m).unwrap();
                ensure!(
                    p.degree() == Some(expected),
                    "deg n={n} j={j} m={m}: {:?} vs {expected}",
                    p.degree()
                );
            }
            for (a, (j, p)) in polys.iter().enumerate() {
                for (k, q) in polys[..a].iter() {
                    let required = if *j <= n - 2 {
                        true // numerator-side indices, every m
                    } else if *j <= 2 * n - 2 {
                        m >= 2 // denominator indices below 2n-1
                    } else {
                        m >= 3 // the last index
                    };
                    if required {
                        ensure!(
                            support_disjoint(p, q),
                            "supports meet n={n} m={m} j={j} k={k}"
                        );
                        pairs += 1;
                    }
                }
            }
        }
    }
    Ok(format!("degrees agree, {pairs} disjoint support pairs"))
}

fn factorization_identity() -> Check {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for n in 2u32..=5 {
        for m in 1u32..=4 {
            let shift = -(n as i128).pow(m - 1);
            for j in param_indices(n) {
                let p = poly_p(n, j, m).unwrap();
                for z0 in enumerate_periodic(n, m).unwrap() {
                    let closed = dlambda_closed(n, m, j, &z0).unwrap();
                    let factored = z0.power(shift).unwrap() * eval_p_at_root(&p, &z0).unwrap();
                    let err = (closed - factored).norm() / closed.norm().max(1.0);
                    ensure!(err <= 1e-10, "n={n} m={m} j={j} {z0:?}: {err:e}");
                    worst = worst.max(err);
                    checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "{checked} evaluations, max relative error {worst:.2e}"
    ))
}

/// Multisets of size `len` over `alphabet`, as nondecreasing vectors.
fn multisets(alphabet: &[u32], len: usize) -> Vec<Vec<u32>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &a) in alphabet.iter().enumerate() {
        for mut rest in multisets(&alphabet[i..], len - 1) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

fn certificate_coverage() -> Check {
    let opts = CertOptions::default();
    let mut summary = Vec::new();
    for n in 3u32..=4 {
        let mut built = 0;
        for periods in multisets(&[1, 3, 4], 2 * n as usize - 2) {
            if !check_period_conditions(n, &periods).unwrap().holds() {
                continue;
            }
            let c = construct_certificate(n, &periods, &opts)
                .map_err(|e| format!("n={n} {periods:?}: {e}"))?;
            verify_certificate(&c, 1e-6, 1e-4).map_err(|e| format!("n={n} {periods:?}: {e}"))?;
            let v = PeriodicVector::new(
                c.points.clone(),
                PeriodVector::new(n, c.slot_periods()).unwrap(),
            )
            .map_err(|e| e.to_string())?;
            let jac = build_jacobian(&v).map_err(|e| e.to_string())?;
            for k in 1..=jac.entries.rows() {
                let minor = jac.entries.top_left(k);
                let d = det(&minor).norm();
                let t = hadamard_threshold(&minor);
                ensure!(d > t, "n={n} {periods:?}: minor {k} |det| {d:e} <= {t:e}");
            }
            built += 1;
        }
        summary.push(format!("n={n}: {built}"));
    }
    Ok(format!(
        "certificates built and verified ({})",
        summary.join(", ")
    ))
}

fn condition_gate() -> Check {
    let r = check_period_conditions(3, &[1, 1, 1, 1]).unwrap();
    ensure!(!r.cond_ii, "(1,1,1,1) passed (ii)");
    let r = check_period_conditions(3, &[2, 3, 3, 3]).unwrap();
    ensure!(!r.cond_ii, "(2,3,3,3) passed (ii)");
    let r = check_period_conditions(3, &[1, 1, 1, 3]).unwrap();
    ensure!(r.holds(), "(1,1,1,3) rejected");
    Ok("(1,1,1,1) and (2,3,3,3) rejected by (ii), (1,1,1,3) accepted".into())
}

fn conjugation_and_index() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut maps, mut draws) = (0u32, 0u32);
    let (mut worst_index, mut worst_conj): (f64, f64) = (0.0, 0.0);
    while maps < 100 {
        draws += 1;
        let n = 2 + maps % 3;
        let Some(f) = common::random_map(&mut rng, n) else {
            continue;
        };
        let Some(fixed) = common::well_conditioned_fixed_points(&f) else {
            continue;
        };
        let sum = f.index_sum().map_err(|e| format!("map {maps}: {e}"))?;
        let index_err = (sum - 1.0).norm();
        ensure!(
            index_err <= 1e-9,
            "map {maps} (degree {n}): |index_sum - 1| = {index_err:e}"
        );
        let m = common::random_mobius(&mut rng);
        let dev = common::conjugation_deviation(&f, &fixed, &m)
            .ok_or_else(|| format!("map {maps}: conjugate could not be evaluated"))?;
        ensure!(
            dev <= 1e-9,
            "map {maps} (degree {n}): conjugation deviation {dev:e}"
        );
        worst_index = worst_index.max(index_err);
        worst_conj = worst_conj.max(dev);
        maps += 1;
    }
    Ok(format!(
        "{maps} maps ({draws} draws), max |index_sum - 1| {worst_index:.2e}, max multiplier deviation {worst_conj:.2e}"
    ))
}

fn determinism() -> Check {
    let cases: [&[&str]; 3] = [
        &["cert", "--n", "3", "--periods", "1,1,4,1"],
        &["cert", "--n", "3", "--periods", "4,1,3,1"],
        &["cert", "--n", "4", "--periods", "3,3,3,3,3,3"],
    ];
    for args in cases {
        let outputs: Vec<_> = (0..3)
            .map(|_| {
                Command::new(env!("CARGO_BIN_EXE_multindep"))
                    .args(args)
                    .output()
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        for out in &outputs {
            ensure!(
                out.status.success(),
                "{args:?} exited with {:?}",
                out.status.code()
            );
            ensure!(out.stdout == outputs[0].stdout, "{args:?}: outputs differ");
        }
    }
    Ok(format!("{} commands x 3 runs byte-identical", cases.len()))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "counting identities",
            limit: Some(Duration::from_secs(1)),
            check: counting_identities,
        },
        Criterion {
            id: 2,
            name: "enumeration agreement",
            limit: Some(Duration::from_secs(5)),
            check: enumeration_agreement,
        },
        Criterion {
            id: 3,
            name: "closed form vs oracle",
            limit: Some(Duration::from_secs(60)),
            check: closed_form_vs_oracle,
        },
        Criterion {
            id: 4,
            name: "polynomial structure",
            limit: Some(Duration::from_secs(5)),
            check: polynomial_structure,
        },
        Criterion {
            id: 5,
            name: "factorization identity",
            limit: Some(Duration::from_secs(10)),
            check: factorization_identity,
        },
        Criterion {
            id: 6,
            name: "certificate soundness and coverage",
            limit: Some(Duration::from_secs(600)),
            check: certificate_coverage,
        },
        Criterion {
            id: 7,
            name: "condition gate",
            limit: None,
            check: condition_gate,
        },
        Criterion {
            id: 8,
            name: "conjugation and index formula",
            limit: Some(Duration::from_secs(30)),
            check: conjugation_and_index,
        },
        Criterion {
            id: 9,
            name: "determinism",
            limit: None,
            check: determinism,
        },
    ];

    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.check)();
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!(
                "criterion {}: PASS  {} [{elapsed:.2?}] {detail}",
                c.id, c.name
            ),
            Err(detail) => {
                failures += 1;
                println!(
                    "criterion {}: FAIL  {} [{elapsed:.2?}] {detail}",
                    c.id, c.name
                );
            }
        }
    }
    if failures > 0 {
        println!("{failures} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
