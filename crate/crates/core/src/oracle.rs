//! Brute-force evaluation of permissiveness on a delay grid.
//!
//! Delays range over multiples of `δ = 1/q`. Guard constants are integers, so
//! from an on-grid valuation every reachable valuation and every endpoint of
//! a legal delay interval is again a multiple of `δ`; the recursion therefore
//! runs on integer ticks. Clocks above `M + 1` are clamped, which does not
//! change any guard outcome.

use std::collections::HashMap;

use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::PermSolution;
use crate::error::OracleError;
use crate::model::{parse_model, Config, Move, Owner, TimedAutomatonSpec};
use crate::numerics::{ExtendedRational, Rational};
use crate::paf::{Annotation, PiecewiseAffineFn};

const NEG: i64 = i64::MIN;
const POS: i64 = i64::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridParams {
    /// Delay step; must be `1/q` for a positive integer `q`.
    pub delta: Rational,
    /// Spacing of sampled valuations.
    pub valuation_step: Rational,
    /// Largest number of transitions a run may take.
    pub horizon: usize,
}

impl GridParams {
    pub fn new(delta: Rational, horizon: usize) -> Self {
        GridParams {
            valuation_step: delta.clone(),
            delta,
            horizon,
        }
    }
}

/// Per-clock bounds in ticks: `lo ≤ v ≤ hi`.
type Bounds = Vec<(i64, Option<i64>)>;

/// Memoized grid evaluator for one automaton.
pub struct Oracle<'a> {
    spec: &'a TimedAutomatonSpec,
    q: i64,
    cap: i64,
    /// Guard and source invariant of each transition.
    guards: Vec<Option<Bounds>>,
    invariants: Vec<Option<Bounds>>,
    longest: Vec<Option<usize>>,
    horizon: usize,
    memo: HashMap<(usize, usize, Vec<i64>), i64>,
}

fn bounds(g: &crate::model::Guard, n: usize, q: i64) -> Result<Option<Bounds>, OracleError> {
    let Some(ivs) = g.intervals(n) else {
        return Ok(None);
    };
    let tick = |r: &Rational| to_ticks(r, q);
    ivs.iter()
        .map(|iv| {
            let hi = match &iv.hi {
                ExtendedRational::Finite(u) => Some(tick(u)?),
                _ => None,
            };
            Ok((tick(&iv.lo)?, hi))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn to_ticks(r: &Rational, q: i64) -> Result<i64, OracleError> {
    let t = r * Rational::from_integer(q.into());
    if !t.is_integer() {
        return Err(OracleError::Grid(format!("{r} is not a multiple of 1/{q}")));
    }
    t.to_integer()
        .to_i64()
        .ok_or_else(|| OracleError::Grid(format!("{r} is too large")))
}

fn holds(b: &Bounds, v: &[i64]) -> bool {
    b.iter()
        .zip(v)
        .all(|((lo, hi), x)| x >= lo && hi.is_none_or(|h| *x <= h))
}

/// Delays `d ≥ 0` with `v + d` inside `b`, as `(lo, hi)`; `hi` is `None`
/// when unbounded.
fn delay_window(b: &Bounds, v: &[i64]) -> Option<(i64, Option<i64>)> {
    let mut lo = 0;
    let mut hi: Option<i64> = None;
    for ((l, h), x) in b.iter().zip(v) {
        lo = lo.max(l - x);
        if let Some(h) = h {
            hi = Some(hi.map_or(h - x, |c| c.min(h - x)));
        }
    }
    match hi {
        Some(h) if h < lo => None,
        _ => Some((lo, hi)),
    }
}

impl<'a> Oracle<'a> {
    pub fn new(spec: &'a TimedAutomatonSpec, g: &GridParams) -> Result<Self, OracleError> {
        let (num, den) = (g.delta.numer(), g.delta.denom());
        if !num.is_one() || den.is_zero() || g.delta <= Rational::zero() {
            return Err(OracleError::Grid(format!("delay step {} is not 1/q", g.delta)));
        }
        let q = den
            .to_i64()
            .ok_or_else(|| OracleError::Grid("delay step too fine".into()))?;
        let n = spec.num_clocks();
        let guards = spec
            .transitions
            .iter()
            .map(|t| bounds(&t.guard.and(&spec.locations[t.source].invariant), n, q))
            .collect::<Result<_, _>>()?;
        let invariants = spec
            .locations
            .iter()
            .map(|l| bounds(&l.invariant, n, q))
            .collect::<Result<_, _>>()?;
        let longest = (0..spec.locations.len())
            .map(|l| spec.longest_path_length(l))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| OracleError::HorizonExceeded)?;
        Ok(Oracle {
            spec,
            q,
            cap: (spec.max_constant() + 1) * q,
            guards,
            invariants,
            longest,
            horizon: g.horizon,
            memo: HashMap::new(),
        })
    }

    /// Grid value of the full game from `(loc, v)`.
    pub fn value(&mut self, loc: usize, v: &[Rational]) -> Result<ExtendedRational, OracleError> {
        match self.longest[loc] {
            Some(k) if k > self.horizon => Err(OracleError::HorizonExceeded),
            _ => self.value_within(loc, v, self.horizon),
        }
    }

    /// Grid value when at most `steps` transitions may be taken.
    pub fn value_within(
        &mut self,
        loc: usize,
        v: &[Rational],
        steps: usize,
    ) -> Result<ExtendedRational, OracleError> {
        let ticks = v
            .iter()
            .map(|x| to_ticks(x, self.q))
            .collect::<Result<Vec<_>, _>>()?;
        if ticks.iter().any(|&t| t < 0) {
            return Err(OracleError::Grid("negative clock value".into()));
        }
        let r = self.perm(loc, steps, self.clamp(ticks));
        Ok(self.ticks_value(r))
    }

    fn ticks_value(&self, t: i64) -> ExtendedRational {
        match t {
            NEG => ExtendedRational::NegInf,
            POS => ExtendedRational::PosInf,
            k => ExtendedRational::Finite(Rational::new(k.into(), self.q.into())),
        }
    }

    fn clamp(&self, mut v: Vec<i64>) -> Vec<i64> {
        for x in &mut v {
            *x = (*x).min(self.cap);
        }
        v
    }

    fn perm(&mut self, loc: usize, budget: usize, v: Vec<i64>) -> i64 {
        if loc == self.spec.target {
            return POS;
        }
        let budget = match self.longest[loc] {
            Some(k) if budget >= k => k,
            Some(_) if budget > 0 => budget,
            _ => return NEG,
        };
        match &self.invariants[loc] {
            Some(b) if holds(b, &v) => {}
            _ => return NEG,
        }
        let key = (loc, budget, v);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let v = &key.2;
        let outgoing: Vec<usize> = self.spec.outgoing(loc).map(|(t, _)| t).collect();
        let r = match self.spec.locations[loc].owner {
            Owner::Player => outgoing
                .iter()
                .map(|&t| self.transition_value(t, budget, v))
                .max()
                .unwrap_or(NEG),
            Owner::Opponent if outgoing.is_empty() => NEG,
            Owner::Opponent => {
                let inv = self.invariants[loc].clone().unwrap_or_default();
                let (_, hi) = delay_window(&inv, v).unwrap_or((0, Some(0)));
                let last = hi.unwrap_or_else(|| self.settle(v, 0));
                let mut worst = POS;
                'delays: for d in 0..=last {
                    let shifted = self.clamp(v.iter().map(|x| x + d).collect());
                    for &t in &outgoing {
                        worst = worst.min(self.transition_value(t, budget, &shifted));
                        if worst == NEG {
                            break 'delays;
                        }
                    }
                }
                worst
            }
        };
        self.memo.insert(key, r);
        r
    }

    /// Smallest delay from `lo` after which every clock is clamped.
    fn settle(&self, v: &[i64], lo: i64) -> i64 {
        let least = v.iter().copied().min().unwrap_or(self.cap);
        lo.max(self.cap - least)
    }

    /// Best interval for transition `t` at `v` when the opponent then picks
    /// the worst grid delay inside it.
    fn transition_value(&mut self, t: usize, budget: usize, v: &[i64]) -> i64 {
        let Some(b) = self.guards[t].clone() else {
            return NEG;
        };
        let Some((lo, hi)) = delay_window(&b, v) else {
            return NEG;
        };
        let tr = &self.spec.transitions[t];
        let (dest, reset) = (tr.destination, tr.reset.clone());
        let succ = |d: i64, this: &mut Self| {
            let mut w: Vec<i64> = v.iter().map(|x| x + d).collect();
            for &r in &reset {
                w[r] = 0;
            }
            let w = this.clamp(w);
            this.perm(dest, budget - 1, w)
        };
        // With no upper bound, delays past the settling point are all
        // equivalent, so `β` there stands for an unbounded interval.
        let (last, open) = match hi {
            Some(h) => (h, false),
            None => (self.settle(v, lo), true),
        };
        let vals: Vec<i64> = (lo..=last).map(|d| succ(d, self)).collect();
        let mut best = NEG;
        for i in 0..vals.len() {
            let mut run = POS;
            for (j, &s) in vals.iter().enumerate().skip(i) {
                run = run.min(s);
                if run <= best {
                    break;
                }
                let width = if open && j + 1 == vals.len() { POS } else { (j - i) as i64 };
                best = best.max(run.min(width));
            }
        }
        best
    }
}

/// Grid value at `c`; fails when a run could exceed the horizon.
pub fn oracle_perm(
    spec: &TimedAutomatonSpec,
    c: &Config,
    g: &GridParams,
) -> Result<ExtendedRational, OracleError> {
    Oracle::new(spec, g)?.value(c.location, &c.valuation)
}

/// How the opponent resolves the delay inside a proposed interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Adversary {
    Earliest,
    Latest,
    /// Tries grid multiples of the step and both endpoints, keeping the
    /// delay whose successor has the least value.
    GridMin(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayStep {
    pub location: usize,
    pub action: String,
    pub alpha: Rational,
    pub beta: ExtendedRational,
    pub delay: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub reached: bool,
    pub min_width: ExtendedRational,
    pub steps: Vec<ReplayStep>,
}

/// Plays the annotated moves of `solution` from `c` against `adversary`.
pub fn adversary_replay(
    spec: &TimedAutomatonSpec,
    solution: &PermSolution,
    c: &Config,
    adversary: &Adversary,
) -> Result<ReplayOutcome, OracleError> {
    replay_with(spec, solution, c, adversary, None)
}

/// Like [`adversary_replay`], with the first player move replaced by
/// `first`.
pub fn replay_with(
    spec: &TimedAutomatonSpec,
    solution: &PermSolution,
    c: &Config,
    adversary: &Adversary,
    first: Option<Move>,
) -> Result<ReplayOutcome, OracleError> {
    let start = solution.functions[c.location].eval(&c.valuation)?;
    if c.location != spec.target && !start.is_finite() {
        return Err(OracleError::NotFinite);
    }
    let mut first = first;
    let mut cur = c.clone();
    let mut out = ReplayOutcome {
        reached: false,
        min_width: ExtendedRational::PosInf,
        steps: Vec::new(),
    };
    for _ in 0..=spec.locations.len() {
        if cur.location == spec.target {
            out.reached = true;
            return Ok(out);
        }
        let name = || spec.locations[cur.location].name.clone();
        let proposal = if let Some(m) = first.take() {
            Some(m)
        } else if spec.locations[cur.location].owner == Owner::Opponent {
            let (wait, t) = match opponent_choice(spec, solution, &cur, adversary)? {
                Some(x) => x,
                None => return Ok(out),
            };
            cur.valuation = cur.valuation.iter().map(|x| x + &wait).collect();
            let f = per_transition_fn(solution, cur.location, t)?;
            f.cell_at(&cur.valuation).and_then(|p| p.annotation.as_ref()).map(|a| to_move(a, &cur))
        } else {
            solution
                .annotation_at(cur.location, &cur.valuation)
                .map(|a| to_move(a, &cur))
        };
        let Some(m) = proposal else {
            return Ok(out);
        };
        let window = spec
            .moves_at(&cur, &m.action)
            .ok_or_else(|| OracleError::IllegalMove(name()))?;
        let beta_ok = m.beta <= window.hi && ExtendedRational::Finite(m.alpha.clone()) <= m.beta;
        if m.alpha < window.lo || !beta_ok {
            return Err(OracleError::IllegalMove(name()));
        }
        let width = match &m.beta {
            ExtendedRational::Finite(b) => ExtendedRational::Finite(b - &m.alpha),
            other => other.clone(),
        };
        out.min_width = out.min_width.min(width);
        let delay = pick_delay(spec, solution, &cur, &m, adversary)?;
        let next = spec.step(&cur, &delay, &m.action)?;
        out.steps.push(ReplayStep {
            location: cur.location,
            action: m.action,
            alpha: m.alpha,
            beta: m.beta,
            delay,
        });
        cur = next;
    }
    Err(OracleError::HorizonExceeded)
}

fn to_move(a: &Annotation, c: &Config) -> Move {
    let alpha = match a.alpha.eval(&c.valuation) {
        ExtendedRational::Finite(r) => r,
        _ => Rational::zero(),
    };
    Move {
        alpha,
        beta: a.beta.eval(&c.valuation),
        action: a.action.clone(),
    }
}

fn per_transition_fn(
    solution: &PermSolution,
    loc: usize,
    t: usize,
) -> Result<&PiecewiseAffineFn, OracleError> {
    solution.per_transition[loc]
        .iter()
        .find(|(i, _)| *i == t)
        .map(|(_, f)| f)
        .ok_or_else(|| OracleError::Grid(format!("no function stored for transition {t}")))
}

/// Delays tried by a grid adversary in `[lo, hi]`.
fn candidates(lo: &Rational, hi: &Rational, step: &Rational) -> Vec<Rational> {
    let mut out = vec![lo.clone()];
    let mut k = (lo / step).ceil() * step;
    while &k < hi {
        if &k > lo {
            out.push(k.clone());
        }
        k += step;
    }
    if hi > lo {
        out.push(hi.clone());
    }
    out
}

/// Finite stand-in for an unbounded upper delay.
fn finite_end(spec: &TimedAutomatonSpec, lo: &Rational, hi: &ExtendedRational) -> Rational {
    match hi {
        ExtendedRational::Finite(h) => h.clone(),
        _ => lo + Rational::from_integer((spec.max_constant() + 1).into()),
    }
}

fn pick_delay(
    spec: &TimedAutomatonSpec,
    solution: &PermSolution,
    c: &Config,
    m: &Move,
    adversary: &Adversary,
) -> Result<Rational, OracleError> {
    let end = finite_end(spec, &m.alpha, &m.beta);
    let step = match adversary {
        Adversary::Earliest => return Ok(m.alpha.clone()),
        Adversary::Latest => return Ok(end),
        Adversary::GridMin(step) => step,
    };
    let mut best: Option<(ExtendedRational, Rational)> = None;
    for d in candidates(&m.alpha, &end, step) {
        let next = spec.step(c, &d, &m.action)?;
        let val = solution.functions[next.location].eval(&next.valuation)?;
        if best.as_ref().is_none_or(|(b, _)| &val < b) {
            best = Some((val, d));
        }
    }
    Ok(best.map(|(_, d)| d).unwrap_or_else(|| m.alpha.clone()))
}

/// Delay and transition chosen in an opponent location.
fn opponent_choice(
    spec: &TimedAutomatonSpec,
    solution: &PermSolution,
    c: &Config,
    adversary: &Adversary,
) -> Result<Option<(Rational, usize)>, OracleError> {
    let n = spec.num_clocks();
    let inv = &spec.locations[c.location].invariant;
    let Some(ivs) = inv.intervals(n) else {
        return Ok(None);
    };
    let mut hi = ExtendedRational::PosInf;
    for (iv, x) in ivs.iter().zip(&c.valuation) {
        if let ExtendedRational::Finite(u) = &iv.hi {
            hi = hi.min(ExtendedRational::Finite(u - x));
        }
    }
    let zero = Rational::zero();
    let end = finite_end(spec, &zero, &hi);
    let delays = match adversary {
        Adversary::Earliest => vec![zero],
        Adversary::Latest => vec![end],
        Adversary::GridMin(step) => candidates(&zero, &end, step),
    };
    let mut best: Option<(ExtendedRational, Rational, usize)> = None;
    for d in delays {
        let v: Vec<Rational> = c.valuation.iter().map(|x| x + &d).collect();
        for (t, f) in &solution.per_transition[c.location] {
            let val = f.eval(&v)?;
            if best.as_ref().is_none_or(|(b, _, _)| &val < b) {
                best = Some((val, d.clone(), *t));
            }
        }
    }
    Ok(best.map(|(_, d, t)| (d, t)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Every location has at most one outgoing transition.
    Linear,
    /// Some location has two outgoing transitions.
    Branching,
    /// Branching, with some locations owned by the opponent.
    Game,
}

fn random_guard(rng: &mut ChaCha8Rng, clocks: &[&str], bounded: bool) -> String {
    let mut atoms = Vec::new();
    for c in clocks {
        if rng.gen_bool(0.3) && !atoms.is_empty() {
            continue;
        }
        let lo = rng.gen_range(0..=3);
        if !bounded && rng.gen_bool(0.2) {
            atoms.push(format!("{c}>={lo}"));
        } else {
            let hi = rng.gen_range(lo..=4.min(lo + 2));
            atoms.push(format!("{lo}<={c}<={hi}"));
        }
    }
    atoms.join(" & ")
}

/// The text of a random acyclic model; parsing it always succeeds.
pub fn random_model_text(seed: u64, n_clocks: usize, n_locations: usize, kind: ModelKind) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clocks: Vec<&str> = ["x", "y", "z"][..n_clocks.clamp(1, 3)].to_vec();
    let inner = n_locations.clamp(2, 6) - 1;
    let names: Vec<String> = (0..inner).map(|i| format!("l{i}")).chain(["lf".into()]).collect();
    let mut text = format!("clocks {}\n", clocks.join(" "));
    let mut opponents = vec![false; inner];
    if kind == ModelKind::Game {
        for (i, o) in opponents.iter_mut().enumerate() {
            *o = i > 0 && rng.gen_bool(0.4);
        }
        if !opponents.contains(&true) {
            opponents[inner - 1] = true;
        }
    }
    for (i, name) in names.iter().enumerate() {
        text += &format!("location {name}");
        if i == 0 {
            text += " initial";
        }
        if i == inner {
            text += " target";
        } else if opponents[i] {
            let c = clocks[rng.gen_range(0..clocks.len())];
            text += &format!(" owner opponent invariant \"{c}<={}\"", rng.gen_range(1..=4));
        } else if rng.gen_bool(0.2) {
            text += &format!(" invariant \"{}\"", random_guard(&mut rng, &clocks, false));
        }
        text += "\n";
    }
    for i in 0..inner {
        let fan = match kind {
            ModelKind::Linear => 1,
            _ if i == 0 => 2,
            _ => rng.gen_range(1..=2),
        };
        for k in 0..fan {
            let dst = if kind == ModelKind::Linear {
                i + 1
            } else {
                rng.gen_range(i + 1..=inner)
            };
            text += &format!(
                "edge {} -> {} action a{k} guard \"{}\"",
                names[i],
                names[dst],
                random_guard(&mut rng, &clocks, false)
            );
            let reset: Vec<&str> = clocks.iter().copied().filter(|_| rng.gen_bool(0.35)).collect();
            if !reset.is_empty() {
                text += &format!(" reset {}", reset.join(","));
            }
            text += "\n";
        }
    }
    text
}

/// A random acyclic model with integer constants at most 4 and one interval
/// per clock in every guard. The same seed always gives the same model.
pub fn random_model(seed: u64, n_clocks: usize, n_locations: usize, kind: ModelKind) -> TimedAutomatonSpec {
    parse_model(&random_model_text(seed, n_clocks, n_locations, kind))
        .expect("generated models are well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::compute_permissiveness;
    use crate::numerics::{int, rat};

    const TWO_STEP: &str = "\
clocks x y
location l0 initial
location l1
location lf target
edge l0 -> l1 action a guard \"0<=x<=1 & 0<=y<=1\" reset y
edge l1 -> lf action b guard \"1<=x<=2 & 0<=y<=1\"
";

    fn cfg(l: usize, x: Rational, y: Rational) -> Config {
        Config { location: l, valuation: vec![x, y] }
    }

    #[test]
    fn two_step_example_on_sixteenths() {
        let m = parse_model(TWO_STEP).unwrap();
        let g = GridParams::new(rat(1, 16), 2);
        let v = oracle_perm(&m, &cfg(0, int(0), int(0)), &g).unwrap();
        assert_eq!(v, ExtendedRational::Finite(rat(1, 2)));
        let t = oracle_perm(&m, &cfg(2, int(7), int(0)), &g).unwrap();
        assert_eq!(t, ExtendedRational::PosInf);
    }

    #[test]
    fn thirds_need_a_matching_grid() {
        let m = parse_model(&TWO_STEP.replace("0<=x<=1 & 0<=y<=1\" reset", "0<=y<=1\" reset")).unwrap();
        let g = GridParams::new(rat(1, 48), 2);
        let v = oracle_perm(&m, &cfg(0, rat(1, 2), int(0)), &g).unwrap();
        assert_eq!(v, ExtendedRational::Finite(rat(2, 3)));
    }

    #[test]
    fn horizon_and_grid_checks() {
        let m = parse_model(TWO_STEP).unwrap();
        let c = cfg(0, int(0), int(0));
        assert_eq!(
            oracle_perm(&m, &c, &GridParams::new(rat(1, 4), 1)),
            Err(OracleError::HorizonExceeded)
        );
        assert!(matches!(
            oracle_perm(&m, &c, &GridParams::new(rat(3, 4), 2)),
            Err(OracleError::Grid(_))
        ));
        let mut o = Oracle::new(&m, &GridParams::new(rat(1, 4), 2)).unwrap();
        assert_eq!(o.value_within(0, &c.valuation, 1).unwrap(), ExtendedRational::NegInf);
    }

    #[test]
    fn latest_adversary_sees_the_optimal_width() {
        let m = parse_model(TWO_STEP).unwrap();
        let s = compute_permissiveness(&m).unwrap();
        let r = adversary_replay(&m, &s, &cfg(0, int(0), int(0)), &Adversary::Latest).unwrap();
        assert!(r.reached);
        assert_eq!(r.min_width, ExtendedRational::Finite(rat(1, 2)));
        assert_eq!(r.steps[0].alpha, rat(1, 2));
    }

    #[test]
    fn grid_adversary_takes_the_early_delay() {
        let m = parse_model(TWO_STEP).unwrap();
        let s = compute_permissiveness(&m).unwrap();
        let first = Move { alpha: rat(1, 4), beta: ExtendedRational::Finite(int(1)), action: "a".into() };
        let adv = Adversary::GridMin(rat(1, 16));
        let r = replay_with(&m, &s, &cfg(0, int(0), int(0)), &adv, Some(first)).unwrap();
        assert_eq!(r.steps[0].delay, rat(1, 4));
    }

    #[test]
    fn replay_from_target_is_trivial() {
        let m = parse_model(TWO_STEP).unwrap();
        let s = compute_permissiveness(&m).unwrap();
        let r = adversary_replay(&m, &s, &cfg(2, int(1), int(0)), &Adversary::Earliest).unwrap();
        assert!(r.reached);
        assert_eq!(r.min_width, ExtendedRational::PosInf);
    }

    #[test]
    fn random_models_are_deterministic_and_valid() {
        for kind in [ModelKind::Linear, ModelKind::Branching, ModelKind::Game] {
            for seed in 0..40 {
                let a = random_model_text(seed, 2, 5, kind);
                assert_eq!(a, random_model_text(seed, 2, 5, kind));
                let m = random_model(seed, 2, 5, kind);
                assert_eq!(m.is_linear(), kind == ModelKind::Linear);
                assert_eq!(m.has_opponent(), kind == ModelKind::Game);
            }
        }
        let one = random_model(1, 1, 3, ModelKind::Linear);
        assert_eq!(one.num_clocks(), 1);
        let b = random_model(2, 2, 4, ModelKind::Branching);
        assert!((0..b.locations.len()).any(|l| b.outgoing(l).count() == 2));
    }
}
