//! Randomized checks of the closed-form box optimizer.

use std::collections::BTreeSet;

use num_traits::{Signed, ToPrimitive};
use permissive_core::numerics::{ExtendedRational, Rational};
use permissive_core::optimizer::{mu_eval, solve_box_concrete, BoxProblem, Row};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64, d: i64) -> ExtendedRational {
    ExtendedRational::Finite(Rational::new(n.into(), d.into()))
}

fn small(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    let d = rng.gen_range(1..=8);
    let n = rng.gen_range(lo * d..=hi * d);
    Rational::new(n.into(), d.into())
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> BoxProblem<ExtendedRational> {
    loop {
        let mut xs = [small(rng, 0, 3), small(rng, 0, 3), small(rng, 0, 3), small(rng, 0, 3)];
        if xs[0] > xs[1] {
            xs.swap(0, 1);
        }
        if xs[2] > xs[3] {
            xs.swap(2, 3);
        }
        if xs[0] > xs[3] {
            continue;
        }
        let [m_a, big_a, m_b, big_b] = xs;
        return BoxProblem {
            a: small(rng, -2, 2),
            b: ExtendedRational::Finite(small(rng, -2, 4)),
            c: small(rng, -2, 2),
            d: ExtendedRational::Finite(small(rng, -2, 4)),
            m_alpha: ExtendedRational::Finite(m_a),
            big_m_alpha: ExtendedRational::Finite(big_a),
            m_beta: ExtendedRational::Finite(m_b),
            big_m_beta: ExtendedRational::Finite(big_b),
        };
    }
}

fn f(x: &ExtendedRational) -> f64 {
    x.finite().unwrap().to_f64().unwrap()
}

/// Maximum of μ over the 1/64 grid points of the domain, plus its corners.
pub fn brute_force(p: &BoxProblem<ExtendedRational>) -> f64 {
    let (a, c) = (p.a.to_f64().unwrap(), p.c.to_f64().unwrap());
    let (b, d) = (f(&p.b), f(&p.d));
    let (ma, mxa, mb, mxb) = (f(&p.m_alpha), f(&p.big_m_alpha), f(&p.m_beta), f(&p.big_m_beta));
    let axis = |lo: f64, hi: f64| {
        let mut v: Vec<f64> = ((lo * 64.0).ceil() as i64..=(hi * 64.0).floor() as i64)
            .map(|k| k as f64 / 64.0)
            .collect();
        v.push(lo);
        v.push(hi);
        v
    };
    let mut best = f64::NEG_INFINITY;
    for &x in &axis(ma, mxa) {
        for &y in &axis(mb, mxb) {
            if x <= y {
                best = best.max((y - x).min(a * x + b).min(c * y + d));
            }
        }
    }
    best
}

/// Compares 500 random instances with the grid maximum; exact at returned
/// attainable maximizers. Returns the number of instances.
pub fn check_grid_maximum(seed: u64, count: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let p = random_problem(&mut rng);
        let s = solve_box_concrete(&p).map_err(|e| format!("{p:?}: {e}"))?;
        let brute = brute_force(&p);
        let tol = (1.0 + p.a.abs().to_f64().unwrap() + p.c.abs().to_f64().unwrap()) / 64.0;
        let v = f(&s.value);
        if brute > v + 1e-9 {
            return Err(format!("{p:?}: grid {brute} beats {v} ({:?})", s.row));
        }
        if v - brute > tol {
            return Err(format!("{p:?}: {v} vs grid {brute} ({:?})", s.row));
        }
        if s.attainable && mu_eval(&p, &s.alpha, &s.beta).as_ref() != Ok(&s.value) {
            return Err(format!("{p:?}: value not attained at the maximizer ({:?})", s.row));
        }
    }
    Ok(count)
}

/// Draws instances until every row of the table has been produced; each
/// returned maximizer must attain the returned value.
pub fn check_rows(seed: u64) -> Result<usize, String> {
    let expected: BTreeSet<Row> = [(1, 1)]
        .into_iter()
        .chain((1..=3).map(|i| (2, i)))
        .chain((1..=3).map(|i| (3, i)))
        .chain((1..=11).map(|i| (4, i)))
        .map(|(b, r)| Row(b, r))
        .collect();
    let mut seen = BTreeSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..40_000 {
        let p = random_problem(&mut rng);
        let s = solve_box_concrete(&p).map_err(|e| format!("{p:?}: {e}"))?;
        if mu_eval(&p, &s.alpha, &s.beta).as_ref() != Ok(&s.value) {
            return Err(format!("{p:?}: value not attained ({:?})", s.row));
        }
        seen.insert(s.row);
        if seen == expected {
            return Ok(seen.len());
        }
    }
    let missing: Vec<_> = expected.difference(&seen).collect();
    Err(format!("rows never reached: {missing:?}"))
}
