//! Checks shared by the acceptance target and the property tests.
#![allow(dead_code)]

use num_traits::{Signed, Zero};
use permissive_core::engine::{compute_permissiveness, compute_with, Options, PermSolution, StepKind};
use permissive_core::model::{Owner, TimedAutomatonSpec};
use permissive_core::numerics::{int, rat, ExtendedRational, Rational};
use permissive_core::oracle::{random_model, GridParams, ModelKind, Oracle};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod table;

pub type Outcome = Result<String, String>;

/// The fixed family of random models used by the property suite.
pub fn suite_model(seed: u64) -> TimedAutomatonSpec {
    let kind = [ModelKind::Linear, ModelKind::Branching, ModelKind::Game][(seed % 3) as usize];
    let clocks = 1 + (seed as usize / 3) % 3;
    let locations = 2 + (seed as usize / 9) % 5;
    random_model(seed, clocks, locations, kind)
}

pub fn fin(r: Rational) -> ExtendedRational {
    ExtendedRational::Finite(r)
}

fn finite(x: &ExtendedRational) -> Option<&Rational> {
    match x {
        ExtendedRational::Finite(r) => Some(r),
        _ => None,
    }
}

pub fn eval(s: &PermSolution, l: usize, v: &[Rational]) -> Result<ExtendedRational, String> {
    s.functions[l].eval(v).map_err(|e| format!("location {l} at {v:?}: {e}"))
}

/// Random points of the `1/8` grid over `[0, M + 2]^n`.
pub fn sample_points(m: &TimedAutomatonSpec, rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<Rational>> {
    let top = (m.max_constant() + 2) * 8;
    (0..count)
        .map(|_| (0..m.num_clocks()).map(|_| rat(rng.gen_range(0..=top), 8)).collect())
        .collect()
}

#[derive(Default, Debug)]
pub struct Tally {
    pub models: usize,
    pub checks: usize,
    pub finite_oracle: usize,
}

fn fail(seed: u64, what: &str, detail: String) -> String {
    format!("model {seed}: {what}: {detail}")
}

/// Every property of the random-model suite on one model.
pub fn check_model(seed: u64, tally: &mut Tally) -> Result<(), String> {
    let m = suite_model(seed);
    let s = compute_permissiveness(&m).map_err(|e| fail(seed, "solve", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let pts = sample_points(&m, &mut rng, 40);
    let nl = m.locations.len();
    let values = (0..nl)
        .map(|l| pts.iter().map(|v| eval(&s, l, v)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    tally.models += 1;

    // P_i is nondecreasing in i and the last cap reproduces the fixpoint.
    let mut prev: Option<PermSolution> = None;
    let mut oracle = Oracle::new(&m, &GridParams::new(rat(1, 32), nl))
        .map_err(|e| fail(seed, "oracle", e.to_string()))?;
    for i in 0..=s.iterations {
        let opts = Options { max_iter: Some(i), steps: StepKind::Auto };
        let si = compute_with(&m, opts).map_err(|e| fail(seed, "capped solve", e.to_string()))?;
        for l in 0..nl {
            for v in pts.iter().take(12) {
                let now = eval(&si, l, v)?;
                if let Some(p) = &prev {
                    let before = eval(p, l, v)?;
                    if before > now {
                        return Err(fail(seed, "monotone in i", format!("l{l} {v:?} step {i}: {before} > {now}")));
                    }
                }
                // −∞ exactly where the grid game has no winning play within i steps.
                let o = oracle
                    .value_within(l, v, i)
                    .map_err(|e| fail(seed, "oracle", e.to_string()))?;
                if (now == ExtendedRational::NegInf) != (o == ExtendedRational::NegInf) {
                    return Err(fail(seed, "-inf classification", format!("l{l} {v:?} i={i}: {now} vs {o}")));
                }
                tally.checks += 2;
            }
        }
        prev = Some(si);
    }
    for l in 0..nl {
        for v in pts.iter().take(12) {
            if eval(prev.as_ref().unwrap(), l, v)? != eval(&s, l, v)? {
                return Err(fail(seed, "fixpoint", format!("l{l} {v:?}")));
            }
        }
    }

    let big = int(m.max_constant());
    for (l, row) in values.iter().enumerate() {
        if l == m.target {
            continue;
        }
        let player = m.locations[l].owner == Owner::Player;
        let inv = &m.locations[l].invariant;
        for (v, pv) in pts.iter().zip(row) {
            // Diagonal monotonicity.
            for k in 1..=8 {
                let t = rat(k, 8);
                let w: Vec<Rational> = v.iter().map(|x| x + &t).collect();
                if !player || !inv.holds(v) || !inv.holds(&w) {
                    continue;
                }
                let pw = eval(&s, l, &w)?;
                if pw > *pv {
                    return Err(fail(seed, "diagonal upper", format!("l{l} {v:?}+{t}: {pw} > {pv}")));
                }
                if let (Some(a), Some(b)) = (finite(pv), finite(&pw)) {
                    if a - &t > *b {
                        return Err(fail(seed, "diagonal lower", format!("l{l} {v:?}+{t}: {pv} vs {pw}")));
                    }
                }
                tally.checks += 1;
            }
            // Clocks above M are interchangeable.
            let w: Vec<Rational> = v
                .iter()
                .map(|x| if *x > big { &big + rat(rng.gen_range(1..=16), 8) } else { x.clone() })
                .collect();
            if w != *v {
                let pw = eval(&s, l, &w)?;
                if pw != *pv {
                    return Err(fail(seed, "large constants", format!("l{l} {v:?} vs {w:?}: {pv} vs {pw}")));
                }
                tally.checks += 1;
            }
        }
        // Lipschitz and, for linear automata, concavity on finite pairs.
        let fins: Vec<(&Vec<Rational>, &Rational)> = pts
            .iter()
            .zip(row)
            .filter_map(|(v, p)| finite(p).map(|r| (v, r)))
            .collect();
        for a in 0..fins.len() {
            for b in a + 1..fins.len() {
                let ((v, pv), (w, pw)) = (fins[a], fins[b]);
                let dist = v.iter().zip(w).map(|(x, y)| (x - y).abs()).max().unwrap_or_else(Rational::zero);
                if (pv - pw).abs() > int(2) * &dist {
                    return Err(fail(seed, "2-Lipschitz", format!("l{l} {v:?} {w:?}: {pv} vs {pw}")));
                }
                tally.checks += 1;
                if !m.is_linear() {
                    continue;
                }
                for k in 1..=3 {
                    let lam = rat(k, 4);
                    let mid: Vec<Rational> = v
                        .iter()
                        .zip(w)
                        .map(|(x, y)| &lam * x + (Rational::from_integer(1.into()) - &lam) * y)
                        .collect();
                    let want = &lam * pv + (Rational::from_integer(1.into()) - &lam) * pw;
                    let got = eval(&s, l, &mid)?;
                    if got < fin(want.clone()) {
                        return Err(fail(seed, "concavity", format!("l{l} {mid:?}: {got} < {want}")));
                    }
                    tally.checks += 1;
                }
            }
        }
    }

    // Differential comparison against the grid oracle at the initial location,
    // preferring valuations with a finite symbolic value.
    let l0 = m.initial;
    let scan = sample_points(&m, &mut rng, 200);
    let mut fins = Vec::new();
    let mut rest = Vec::new();
    for v in scan {
        if finite(&eval(&s, l0, &v)?).is_some() {
            fins.push(v);
        } else {
            rest.push(v);
        }
    }
    fins.shuffle(&mut rng);
    let take = fins.len().min(14);
    let chosen: Vec<_> = fins.into_iter().take(take).chain(rest.into_iter().take(20 - take)).collect();
    let tol = rat(4, 32);
    for v in chosen {
        let p = eval(&s, l0, &v)?;
        let o = oracle.value(l0, &v).map_err(|e| fail(seed, "oracle", e.to_string()))?;
        match (finite(&p), finite(&o)) {
            (Some(a), Some(b)) => {
                if (a - b).abs() > tol {
                    return Err(fail(seed, "oracle deviation", format!("{v:?}: {p} vs {o}")));
                }
                tally.finite_oracle += 1;
            }
            _ if p == o => {}
            _ => return Err(fail(seed, "oracle classification", format!("{v:?}: {p} vs {o}"))),
        }
        tally.checks += 1;
    }
    Ok(())
}
