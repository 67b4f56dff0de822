//! Backward induction over an acyclic automaton or game.
//!
//! For a transition `t` from `ℓ` to `ℓ'` and the function `F'` of `ℓ'`, the
//! value at `v` of proposing `[α, β]` is
//! `min(β − α, inf { F'((v + γ)[z → 0]) | γ ∈ [α, β] })`. Along the delay
//! line each closed finite cell `h` of `F'` is met on an interval
//! `J_h = [lo_h, hi_h]` where `F'` equals `u_h(γ) = slope_h·γ + f_h(v[z→0])`.
//! Fixing the cells of both endpoints reduces the supremum to a box problem,
//! plus constants for the cells crossed in between.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use crate::error::{EngineError, OptError};
use crate::model::{Owner, TimedAutomatonSpec};
use crate::numerics::{AffineExpr, ExtendedRational, Rational, Var};
use crate::optimizer::{solve_box, BoxProblem};
use crate::paf::{Annotation, Combine, PiecewiseAffineFn, Piece};
use crate::polyhedra::{Constraint, Polyhedron};
use crate::symbolic::{explore, Decide, PathDecider};

/// A cell of the successor function seen along the delay line.
#[derive(Clone, Debug)]
struct LineCell {
    slope: Rational,
    offset: AffineExpr,
    /// `γ ≥ lower` for each entry.
    lowers: Vec<AffineExpr>,
    /// `γ ≤ upper` for each entry.
    uppers: Vec<AffineExpr>,
    /// Conditions on `v` alone.
    conds: Vec<Constraint>,
}

impl LineCell {
    fn at(&self, gamma: &AffineExpr) -> AffineExpr {
        if self.slope.is_zero() {
            self.offset.clone()
        } else {
            self.offset.add(&gamma.scale(&self.slope))
        }
    }
}

/// Everything about one transition that does not depend on the valuation.
struct TransitionLine {
    action: String,
    clocks: usize,
    /// `γ ≥` each, from the guard and the source invariant; includes 0.
    d_lowers: Vec<AffineExpr>,
    /// `γ ≤` each.
    e_uppers: Vec<AffineExpr>,
    cells: Vec<LineCell>,
    /// Region constraints of each cell over `(v, γ)`, for pruning.
    joint: Vec<Vec<Constraint>>,
}

fn neg_one() -> Rational {
    -Rational::from_integer(1.into())
}

impl TransitionLine {
    fn new(spec: &TimedAutomatonSpec, t: usize, dest: &PiecewiseAffineFn) -> Result<Option<Self>, EngineError> {
        let tr = &spec.transitions[t];
        let n = spec.num_clocks();
        let g = tr.guard.and(&spec.locations[tr.source].invariant);
        let Some(ivs) = g.intervals(n) else {
            return Ok(None);
        };
        let mut d_lowers = vec![AffineExpr::zero()];
        let mut e_uppers = Vec::new();
        for (c, iv) in ivs.iter().enumerate() {
            if iv.lo.is_positive() {
                d_lowers.push(AffineExpr::new(iv.lo.clone(), [(c, neg_one())]));
            }
            if let ExtendedRational::Finite(u) = &iv.hi {
                e_uppers.push(AffineExpr::new(u.clone(), [(c, neg_one())]));
            }
        }
        let gamma: Var = n;
        let mut cells = Vec::new();
        let mut joint = Vec::new();
        for piece in dest.cells() {
            let (slope, offset) = match piece.value.constant_term() {
                ExtendedRational::NegInf => continue,
                ExtendedRational::PosInf => (Rational::zero(), AffineExpr::pos_inf()),
                ExtendedRational::Finite(_) => piece.value.delay_reset_compose(&tr.reset)?,
            };
            let mut cell = LineCell {
                slope,
                offset,
                lowers: Vec::new(),
                uppers: Vec::new(),
                conds: Vec::new(),
            };
            let mut js = Vec::new();
            for c in piece.region.closure().constraints() {
                let mut e = c.expr.clone();
                for &r in &tr.reset {
                    e = e.substitute(r, &AffineExpr::zero())?;
                }
                let k: Rational = e.coeffs().map(|(_, x)| x.clone()).sum();
                js.push(Constraint::le(e.add(&AffineExpr::term(gamma, k.clone()))));
                if k.is_zero() {
                    cell.conds.push(Constraint::le(e));
                } else {
                    // k·γ + e ≤ 0
                    let bound = e.scale(&(neg_one() / &k));
                    if k.is_positive() {
                        cell.uppers.push(bound);
                    } else {
                        cell.lowers.push(bound);
                    }
                }
            }
            cells.push(cell);
            joint.push(js);
        }
        Ok(Some(TransitionLine {
            action: tr.action.clone(),
            clocks: n,
            d_lowers,
            e_uppers,
            cells,
            joint,
        }))
    }

    /// `J_h` on the current path, `None` when empty.
    fn interval(&self, dec: &mut PathDecider, h: usize) -> Option<(AffineExpr, AffineExpr)> {
        let cell = &self.cells[h];
        for c in &cell.conds {
            if !dec.satisfies(c) {
                return None;
            }
        }
        let mut lows = cell.lowers.clone();
        lows.push(AffineExpr::zero());
        let lo = dec.max_of(&lows);
        let hi = if cell.uppers.is_empty() {
            AffineExpr::pos_inf()
        } else {
            dec.min_of(&cell.uppers)
        };
        dec.le(&lo, &hi).then_some((lo, hi))
    }

    /// Minimum of the successor function over the delays `[s, t]`, walking a
    /// chain of cells; `-inf` when the segment leaves the finite region.
    fn gap_min(&self, dec: &mut PathDecider, s: &AffineExpr, t: &AffineExpr) -> AffineExpr {
        let mut reach = s.clone();
        let mut best = AffineExpr::pos_inf();
        while dec.lt(&reach, t) {
            let mut next = None;
            for h in 0..self.cells.len() {
                let Some((lo, hi)) = self.interval(dec, h) else {
                    continue;
                };
                if dec.le(&lo, &reach) && dec.lt(&reach, &hi) {
                    next = Some((h, hi));
                    break;
                }
            }
            let Some((h, hi)) = next else {
                return AffineExpr::neg_inf();
            };
            let exit = dec.min(&hi, t);
            let cell = &self.cells[h];
            best = dec.min_of(&[best, cell.at(&reach), cell.at(&exit)]);
            reach = hi;
        }
        best
    }

    /// Pruning polyhedron over `v`: valuations for which delays in `J_ha`
    /// and `J_hb` with `α ≤ β` exist inside the guard.
    fn pair_context(&self, ha: usize, hb: usize, base: &Polyhedron) -> Polyhedron {
        let n = self.clocks;
        let (av, bv) = (n, n + 1);
        let mut p = base.clone();
        let rename = |c: &Constraint, to: Var| {
            Constraint::new(c.expr.map_vars(|v| if v == n { to } else { v }), c.strict)
        };
        for (var, h) in [(av, ha), (bv, hb)] {
            for c in &self.joint[h] {
                p.add(rename(c, var));
            }
            for lo in &self.d_lowers {
                p.add(Constraint::le_of(lo, &AffineExpr::var(var)));
            }
            for hi in &self.e_uppers {
                p.add(Constraint::le_of(&AffineExpr::var(var), hi));
            }
        }
        p.add(Constraint::le_of(&AffineExpr::var(av), &AffineExpr::var(bv)));
        p.eliminate(&[av, bv])
    }

    /// Best move whose delays start in `J_ha` and end in `J_hb`. With
    /// `chains`, the cells crossed between them are accounted for.
    fn pair_value(
        &self,
        dec: &mut PathDecider,
        ha: usize,
        hb: usize,
        chains: bool,
    ) -> Result<Option<(AffineExpr, AffineExpr, AffineExpr)>, OptError> {
        let Some((la, ua)) = self.interval(dec, ha) else {
            return Ok(None);
        };
        let Some((lb, ub)) = self.interval(dec, hb) else {
            return Ok(None);
        };
        let d = dec.max_of(&self.d_lowers);
        let e = if self.e_uppers.is_empty() {
            AffineExpr::pos_inf()
        } else {
            dec.min_of(&self.e_uppers)
        };
        let distinct = chains && ha != hb;
        if distinct && ua.constant_term() == &ExtendedRational::PosInf {
            return Ok(None);
        }
        let mut m_beta = dec.max(&d, &lb);
        if distinct {
            m_beta = dec.max(&m_beta, &ua);
        }
        let (ca, cb) = (&self.cells[ha], &self.cells[hb]);
        let p = BoxProblem {
            a: ca.slope.clone(),
            b: ca.offset.clone(),
            c: cb.slope.clone(),
            d: cb.offset.clone(),
            m_alpha: dec.max(&d, &la),
            big_m_alpha: dec.min(&e, &ua),
            m_beta,
            big_m_beta: dec.min(&e, &ub),
        };
        let Some(sol) = solve_box(&p, dec)? else {
            return Ok(None);
        };
        let mut value = sol.value;
        if distinct {
            let mut extra = vec![value, ca.at(&ua), cb.at(&lb)];
            if dec.lt(&ua, &lb) {
                extra.push(self.gap_min(dec, &ua, &lb));
            }
            value = dec.min_of(&extra);
        }
        Ok(Some((value, sol.alpha, sol.beta)))
    }

    /// The per-transition function on `base` (`-inf` elsewhere).
    fn step(&self, base: &Polyhedron, chains: bool) -> Result<PiecewiseAffineFn, EngineError> {
        let m = self.cells.len();
        let mut pieces = Vec::new();
        for ha in 0..m {
            for hb in 0..m {
                let ctx = self.pair_context(ha, hb, base);
                if ctx.is_empty() {
                    continue;
                }
                let leaves = explore(&ctx, |dec| self.pair_value(dec, ha, hb, chains))?;
                for leaf in leaves {
                    let Some((value, alpha, beta)) = leaf.value else {
                        continue;
                    };
                    if value.constant_term() == &ExtendedRational::NegInf {
                        continue;
                    }
                    pieces.push(Piece {
                        region: leaf.region,
                        value,
                        annotation: Some(Annotation {
                            action: self.action.clone(),
                            alpha,
                            beta,
                            attainable: true,
                        }),
                    });
                }
            }
        }
        let mut f = PiecewiseAffineFn::from_pieces(self.clocks, pieces, Combine::Max);
        f.simplify();
        Ok(f)
    }
}

fn transition_function(
    spec: &TimedAutomatonSpec,
    t: usize,
    dest: &PiecewiseAffineFn,
    chains: bool,
) -> Result<PiecewiseAffineFn, EngineError> {
    let n = spec.num_clocks();
    let source = spec.transitions[t].source;
    match TransitionLine::new(spec, t, dest)? {
        None => Ok(PiecewiseAffineFn::constant(n, ExtendedRational::NegInf)),
        Some(line) => line.step(&spec.locations[source].invariant.to_polyhedron(n), chains),
    }
}

/// `P_0`: `+inf` at the target, `-inf` elsewhere.
pub fn perm_init(spec: &TimedAutomatonSpec) -> Vec<PiecewiseAffineFn> {
    let n = spec.num_clocks();
    (0..spec.locations.len())
        .map(|l| {
            let v = if l == spec.target {
                ExtendedRational::PosInf
            } else {
                ExtendedRational::NegInf
            };
            PiecewiseAffineFn::constant(n, v)
        })
        .collect()
}

/// One step for a transition, taking the worst value at the two ends of the
/// proposed interval only. Exact when the successor function is concave
/// along the delay line, as for linear automata.
pub fn perm_step_linear(
    spec: &TimedAutomatonSpec,
    t: usize,
    dest: &PiecewiseAffineFn,
) -> Result<PiecewiseAffineFn, EngineError> {
    transition_function(spec, t, dest, false)
}

/// One step for a transition, also accounting for the cells crossed by the
/// proposed interval.
pub fn perm_step_transition(
    spec: &TimedAutomatonSpec,
    t: usize,
    dest: &PiecewiseAffineFn,
) -> Result<PiecewiseAffineFn, EngineError> {
    transition_function(spec, t, dest, true)
}

fn outside_invariant(spec: &TimedAutomatonSpec, l: usize, f: &PiecewiseAffineFn) -> PiecewiseAffineFn {
    let inv = spec.locations[l].invariant.to_polyhedron(spec.num_clocks());
    let mut g = f.restrict(&inv, ExtendedRational::NegInf);
    g.simplify();
    g
}

/// Player location: best transition at every valuation. `succ[l']` is the
/// current function of location `l'`.
pub fn perm_step_branching(
    spec: &TimedAutomatonSpec,
    l: usize,
    succ: &[PiecewiseAffineFn],
) -> Result<PiecewiseAffineFn, EngineError> {
    let mut fs = vec![PiecewiseAffineFn::constant(spec.num_clocks(), ExtendedRational::NegInf)];
    for (t, tr) in spec.outgoing(l) {
        fs.push(perm_step_transition(spec, t, &succ[tr.destination])?);
    }
    Ok(outside_invariant(spec, l, &PiecewiseAffineFn::pointwise_max(&fs)))
}

/// Opponent location: the worst delay within the invariant followed by the
/// worst transition. Returns the per-transition functions too.
pub fn perm_step_opponent(
    spec: &TimedAutomatonSpec,
    l: usize,
    succ: &[PiecewiseAffineFn],
) -> Result<(PiecewiseAffineFn, Vec<(usize, PiecewiseAffineFn)>), EngineError> {
    opponent_step(spec, l, succ, true)
}

type PerTransition = Vec<(usize, PiecewiseAffineFn)>;

fn opponent_step(
    spec: &TimedAutomatonSpec,
    l: usize,
    succ: &[PiecewiseAffineFn],
    chains: bool,
) -> Result<(PiecewiseAffineFn, PerTransition), EngineError> {
    let n = spec.num_clocks();
    let mut per = Vec::new();
    for (t, tr) in spec.outgoing(l) {
        per.push((t, transition_function(spec, t, &succ[tr.destination], chains)?));
    }
    if per.is_empty() {
        return Ok((PiecewiseAffineFn::constant(n, ExtendedRational::NegInf), per));
    }
    let fs: Vec<_> = per.iter().map(|(_, f)| f.clone()).collect();
    let worst = PiecewiseAffineFn::pointwise_min(&fs);
    let inv = spec.locations[l].invariant.to_polyhedron(n);
    let delayed = worst.minimize_along_delay(&inv);
    Ok((outside_invariant(spec, l, &delayed), per))
}

#[derive(Clone, Debug)]
pub struct PermSolution {
    /// Function of each location.
    pub functions: Vec<PiecewiseAffineFn>,
    /// For opponent locations, the function of each outgoing transition
    /// (by transition index) evaluated as if the player chose the interval.
    pub per_transition: Vec<PerTransition>,
    /// Number of backward steps needed to reach the fixpoint.
    pub iterations: usize,
}

impl PermSolution {
    /// The move stored at `(l, v)`, if any.
    pub fn annotation_at(&self, l: usize, v: &[Rational]) -> Option<&Annotation> {
        self.functions[l].cell_at(v)?.annotation.as_ref()
    }
}

/// Whether steps use only interval endpoints (exact for linear automata) or
/// also the cells crossed in between.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Auto,
    Endpoints,
    Chains,
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    /// Compute `P_k` instead of the fixpoint.
    pub max_iter: Option<usize>,
    pub steps: StepKind,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_iter: None,
            steps: StepKind::Auto,
        }
    }
}

pub fn compute_permissiveness(spec: &TimedAutomatonSpec) -> Result<PermSolution, EngineError> {
    compute_with(spec, Options::default())
}

pub fn compute_with(spec: &TimedAutomatonSpec, opts: Options) -> Result<PermSolution, EngineError> {
    if spec.find_cycle().is_some() {
        return Err(EngineError::CycleDetected);
    }
    let nl = spec.locations.len();
    let mut longest = Vec::with_capacity(nl);
    for l in 0..nl {
        longest.push(spec.longest_path_length(l)?);
    }
    let chains = match opts.steps {
        StepKind::Endpoints => false,
        StepKind::Chains => true,
        StepKind::Auto => !(spec.is_linear() && !spec.has_opponent()),
    };
    let mut solver = Solver {
        spec,
        longest: &longest,
        chains,
        memo: HashMap::new(),
        per_memo: HashMap::new(),
    };
    let cap = opts.max_iter.unwrap_or(usize::MAX);
    let mut functions = Vec::with_capacity(nl);
    for l in 0..nl {
        functions.push(solver.solve(l, cap).map_err(|e| wrap(spec, l, e))?);
    }
    let per_transition = (0..nl)
        .map(|l| {
            let j = longest[l].unwrap_or(0).min(cap);
            solver.per_memo.remove(&(l, j)).unwrap_or_default()
        })
        .collect();
    let iterations = longest.iter().flatten().copied().max().unwrap_or(0).min(cap);
    Ok(PermSolution {
        functions,
        per_transition,
        iterations,
    })
}

struct Solver<'a> {
    spec: &'a TimedAutomatonSpec,
    longest: &'a [Option<usize>],
    chains: bool,
    memo: HashMap<(usize, usize), PiecewiseAffineFn>,
    per_memo: HashMap<(usize, usize), PerTransition>,
}

impl Solver<'_> {
    /// `P_j(l)`; equal to `P_{longest(l)}(l)` for larger `j`.
    fn solve(&mut self, l: usize, j: usize) -> Result<PiecewiseAffineFn, EngineError> {
        let spec = self.spec;
        let n = spec.num_clocks();
        if l == spec.target {
            return Ok(PiecewiseAffineFn::constant(n, ExtendedRational::PosInf));
        }
        let Some(depth) = self.longest[l] else {
            return Ok(PiecewiseAffineFn::constant(n, ExtendedRational::NegInf));
        };
        let j = j.min(depth);
        if j == 0 {
            return Ok(PiecewiseAffineFn::constant(n, ExtendedRational::NegInf));
        }
        if let Some(f) = self.memo.get(&(l, j)) {
            return Ok(f.clone());
        }
        let mut succ: Vec<PiecewiseAffineFn> = perm_init(spec);
        for (_, tr) in spec.outgoing(l) {
            succ[tr.destination] = self.solve(tr.destination, j - 1).map_err(|e| wrap(spec, tr.destination, e))?;
        }
        let step = |t: usize, f: &PiecewiseAffineFn| transition_function(spec, t, f, self.chains);
        let f = match spec.locations[l].owner {
            Owner::Player => {
                let mut fs = vec![PiecewiseAffineFn::constant(n, ExtendedRational::NegInf)];
                for (t, tr) in spec.outgoing(l) {
                    fs.push(step(t, &succ[tr.destination])?);
                }
                outside_invariant(spec, l, &PiecewiseAffineFn::pointwise_max(&fs))
            }
            Owner::Opponent => {
                let (f, per) = opponent_step(spec, l, &succ, self.chains)?;
                self.per_memo.insert((l, j), per);
                f
            }
        };
        self.memo.insert((l, j), f.clone());
        Ok(f)
    }
}

fn wrap(spec: &TimedAutomatonSpec, l: usize, e: EngineError) -> EngineError {
    match e {
        EngineError::Location { .. } => e,
        other => EngineError::Location {
            location: spec.locations[l].name.clone(),
            source: Box::new(other),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use crate::numerics::{int, rat};

    const TWO_STEP: &str = "\
clocks x y
location l0 initial
location l1
location lf target
edge l0 -> l1 action a guard \"0<=x<=1 & 0<=y<=1\" reset y
edge l1 -> lf action b guard \"1<=x<=2 & 0<=y<=1\"
";

    fn fin(r: Rational) -> ExtendedRational {
        ExtendedRational::Finite(r)
    }

    fn at(f: &PiecewiseAffineFn, x: Rational, y: Rational) -> ExtendedRational {
        f.eval(&[x, y]).unwrap()
    }

    #[test]
    fn init_has_one_target() {
        let m = parse_model(TWO_STEP).unwrap();
        let p0 = perm_init(&m);
        assert_eq!(at(&p0[2], int(0), int(0)), ExtendedRational::PosInf);
        assert_eq!(at(&p0[0], int(0), int(0)), ExtendedRational::NegInf);
    }

    #[test]
    fn last_transition_of_two_step() {
        let m = parse_model(TWO_STEP).unwrap();
        let f = perm_step_linear(&m, 1, &PiecewiseAffineFn::constant(2, ExtendedRational::PosInf)).unwrap();
        assert_eq!(at(&f, rat(1, 2), int(0)), fin(rat(1, 2)));
        assert_eq!(at(&f, rat(3, 2), rat(1, 5)), fin(rat(1, 2)));
        assert_eq!(at(&f, rat(3, 2), rat(3, 4)), fin(rat(1, 4)));
        assert_eq!(at(&f, rat(1, 2), rat(3, 4)), ExtendedRational::NegInf);
        assert_eq!(at(&f, int(3), int(0)), ExtendedRational::NegInf);
    }

    #[test]
    fn two_step_initial_value() {
        let m = parse_model(TWO_STEP).unwrap();
        let s = compute_permissiveness(&m).unwrap();
        let f = &s.functions[0];
        assert_eq!(at(f, int(0), int(0)), fin(rat(1, 2)));
        assert_eq!(at(f, rat(3, 4), rat(1, 4)), fin(rat(1, 4)));
        assert_eq!(at(f, rat(1, 4), rat(3, 4)), fin(rat(1, 4)));
        assert_eq!(at(f, rat(1, 4), rat(1, 2)), fin(rat(3, 8)));
        assert_eq!(at(f, rat(3, 2), int(0)), ExtendedRational::NegInf);
        assert_eq!(s.iterations, 2);
        assert_eq!(f.cells().iter().filter(|c| c.value.is_finite()).count(), 4);
    }

    #[test]
    fn chains_agree_with_endpoints_on_linear() {
        let m = parse_model(TWO_STEP).unwrap();
        let a = compute_with(&m, Options { max_iter: None, steps: StepKind::Endpoints }).unwrap();
        let b = compute_with(&m, Options { max_iter: None, steps: StepKind::Chains }).unwrap();
        for i in 0..=12 {
            for j in 0..=12 {
                let v = [rat(i, 6), rat(j, 6)];
                assert_eq!(a.functions[0].eval(&v), b.functions[0].eval(&v), "{v:?}");
            }
        }
    }
}
