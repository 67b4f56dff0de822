//! Piecewise-affine functions over the clock orthant.
//!
//! Cells partition the orthant exactly (strict and non-strict constraints
//! are kept apart). Lookup treats finite cells as closed: on a boundary a
//! finite value wins over an infinite one.

use num_traits::{Signed, Zero};

use crate::error::PafError;
use crate::numerics::{AffineExpr, ExtendedRational, Rational, Var};
use crate::polyhedra::{Constraint, Polyhedron};
use crate::symbolic::{explore, Decide};

/// The move realizing a cell's value: fire `action` after a delay in
/// `[alpha, beta]`, both affine in the valuation.
#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    pub action: String,
    pub alpha: AffineExpr,
    pub beta: AffineExpr,
    pub attainable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub region: Polyhedron,
    pub value: AffineExpr,
    pub annotation: Option<Annotation>,
}

impl Piece {
    pub fn new(region: Polyhedron, value: AffineExpr) -> Self {
        Piece {
            region,
            value,
            annotation: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    Max,
    Min,
}

impl Combine {
    fn neutral(self) -> ExtendedRational {
        match self {
            Combine::Max => ExtendedRational::NegInf,
            Combine::Min => ExtendedRational::PosInf,
        }
    }

    /// Whether `new` replaces `old`; ties keep `old`.
    fn replaces<D: Decide<AffineExpr>>(self, d: &mut D, old: &AffineExpr, new: &AffineExpr) -> bool {
        match self {
            Combine::Max => d.lt(old, new),
            Combine::Min => d.lt(new, old),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffineFn {
    clocks: usize,
    cells: Vec<Piece>,
}

/// Whether `v` lies in the topological closure of `p`.
pub fn closure_contains(p: &Polyhedron, v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
        && p
            .constraints()
            .iter()
            .all(|c| c.expr.eval(v) <= ExtendedRational::zero())
}

impl PiecewiseAffineFn {
    pub fn constant(clocks: usize, value: ExtendedRational) -> Self {
        PiecewiseAffineFn {
            clocks,
            cells: vec![Piece::new(Polyhedron::universe(clocks), AffineExpr::constant(value))],
        }
    }

    /// Builds a function from cells already partitioning the orthant.
    pub fn from_partition(clocks: usize, cells: Vec<Piece>) -> Self {
        PiecewiseAffineFn { clocks, cells }
    }

    /// Combines possibly overlapping pieces; points outside every piece get
    /// the neutral value of `op`.
    pub fn from_pieces(clocks: usize, pieces: impl IntoIterator<Item = Piece>, op: Combine) -> Self {
        let mut f = Self::constant(clocks, op.neutral());
        for p in pieces {
            f.insert(p, op);
        }
        f
    }

    pub fn clocks(&self) -> usize {
        self.clocks
    }

    pub fn cells(&self) -> &[Piece] {
        &self.cells
    }

    /// Replaces the value on `piece.region` by its combination with the
    /// current value.
    pub fn insert(&mut self, piece: Piece, op: Combine) {
        if piece.value.constant_term() == &op.neutral() || piece.region.is_empty() {
            return;
        }
        let mut out = Vec::with_capacity(self.cells.len() + 2);
        for cell in self.cells.drain(..) {
            let overlap = cell.region.intersect(&piece.region);
            if overlap.is_empty() {
                out.push(cell);
                continue;
            }
            if cell.value == piece.value {
                out.push(cell);
                continue;
            }
            let leaves = explore::<_, PafError>(&overlap, |d| Ok(op.replaces(d, &cell.value, &piece.value)))
                .expect("combining cells cannot fail");
            out.extend(leaves.into_iter().map(|l| {
                let src = if l.value { &piece } else { &cell };
                Piece {
                    region: l.region,
                    value: src.value.clone(),
                    annotation: src.annotation.clone(),
                }
            }));
            let mut rest = cell.region.clone();
            for k in piece.region.constraints() {
                let part = rest.clone().with(k.negate());
                if !part.is_empty() {
                    out.push(Piece {
                        region: part,
                        value: cell.value.clone(),
                        annotation: cell.annotation.clone(),
                    });
                }
                rest.add(k.clone());
                if rest.is_empty() {
                    break;
                }
            }
        }
        self.cells = out;
    }

    /// Value at `v`: the largest value among finite cells whose closure
    /// contains `v`, or else among infinite cells containing `v`.
    pub fn eval(&self, v: &[Rational]) -> Result<ExtendedRational, PafError> {
        let finite = self
            .cells
            .iter()
            .filter(|c| c.value.is_finite() && closure_contains(&c.region, v))
            .map(|c| c.value.eval(v))
            .max();
        if let Some(x) = finite {
            return Ok(x);
        }
        self.cells
            .iter()
            .filter(|c| c.region.contains(v))
            .map(|c| c.value.constant_term().clone())
            .max()
            .ok_or(PafError::NoCell)
    }

    /// The cell used by [`eval`](Self::eval) at `v`.
    pub fn cell_at(&self, v: &[Rational]) -> Option<&Piece> {
        let finite = self
            .cells
            .iter()
            .filter(|c| c.value.is_finite() && closure_contains(&c.region, v))
            .max_by(|a, b| a.value.eval(v).cmp(&b.value.eval(v)));
        finite.or_else(|| {
            self.cells
                .iter()
                .filter(|c| c.region.contains(v))
                .max_by(|a, b| a.value.constant_term().cmp(b.value.constant_term()))
        })
    }

    fn combine_all(fs: &[PiecewiseAffineFn], op: Combine) -> PiecewiseAffineFn {
        let mut it = fs.iter();
        let mut acc = it.next().expect("at least one function").clone();
        for f in it {
            assert_eq!(f.clocks, acc.clocks);
            for p in &f.cells {
                acc.insert(p.clone(), op);
            }
        }
        acc.simplify();
        acc
    }

    pub fn pointwise_max(fs: &[PiecewiseAffineFn]) -> PiecewiseAffineFn {
        Self::combine_all(fs, Combine::Max)
    }

    pub fn pointwise_min(fs: &[PiecewiseAffineFn]) -> PiecewiseAffineFn {
        Self::combine_all(fs, Combine::Min)
    }

    /// Splits every cell along `partition`; values are unchanged.
    pub fn refine(&self, partition: &[Polyhedron]) -> PiecewiseAffineFn {
        let cells = self
            .cells
            .iter()
            .flat_map(|c| {
                partition.iter().filter_map(move |p| {
                    let r = c.region.intersect(p);
                    (!r.is_empty()).then(|| Piece {
                        region: r,
                        value: c.value.clone(),
                        annotation: c.annotation.clone(),
                    })
                })
            })
            .collect();
        PiecewiseAffineFn::from_partition(self.clocks, cells)
    }

    /// Keeps the function on `p` and sets it to `outside` elsewhere.
    pub fn restrict(&self, p: &Polyhedron, outside: ExtendedRational) -> PiecewiseAffineFn {
        let mut cells: Vec<Piece> = self
            .cells
            .iter()
            .filter_map(|c| {
                let r = c.region.intersect(p);
                (!r.is_empty()).then(|| Piece {
                    region: r,
                    value: c.value.clone(),
                    annotation: c.annotation.clone(),
                })
            })
            .collect();
        let mut rest = Polyhedron::universe(self.clocks);
        for k in p.constraints() {
            let part = rest.clone().with(k.negate());
            if !part.is_empty() {
                cells.push(Piece::new(part, AffineExpr::constant(outside.clone())));
            }
            rest.add(k.clone());
        }
        PiecewiseAffineFn::from_partition(self.clocks, cells)
    }

    /// Drops redundant constraints from every cell.
    pub fn simplify(&mut self) {
        for c in &mut self.cells {
            c.region = c.region.remove_redundant();
        }
        self.merge_cells();
    }

    /// Joins cells with the same value and move whose union is convex.
    fn merge_cells(&mut self) {
        let mut merged = true;
        while merged {
            merged = false;
            'outer: for i in 0..self.cells.len() {
                for j in i + 1..self.cells.len() {
                    let (a, b) = (&self.cells[i], &self.cells[j]);
                    let same = a.value == b.value && a.annotation == b.annotation;
                    let keep = if same || absorbs(a, b) {
                        i
                    } else if absorbs(b, a) {
                        j
                    } else {
                        continue;
                    };
                    if let Some(u) = convex_union(&a.region, &b.region) {
                        let mut piece = self.cells[keep].clone();
                        piece.region = u.remove_redundant();
                        self.cells[i] = piece;
                        self.cells.swap_remove(j);
                        merged = true;
                        break 'outer;
                    }
                }
            }
        }
    }

    /// `v ↦ min { F(v + d) | d ≥ 0, v + d ∈ inv }`, `+inf` when no delay
    /// stays in `inv`.
    pub fn minimize_along_delay(&self, inv: &Polyhedron) -> PiecewiseAffineFn {
        let n = self.clocks;
        let dv: Var = n;
        let pieces: Vec<Piece> = self
            .cells
            .iter()
            .flat_map(|cell| {
                let region = if cell.value.is_finite() {
                    cell.region.closure()
                } else {
                    cell.region.clone()
                };
                let bounds: Vec<Constraint> = region
                    .constraints()
                    .iter()
                    .chain(inv.constraints())
                    .map(|c| shift_by_delay(c, n, dv))
                    .collect();
                let mut joint = Polyhedron::from_constraints(n, bounds.iter().cloned());
                joint.add(Constraint::le(AffineExpr::term(dv, -Rational::from_integer(1.into()))));
                let context = joint.eliminate(&[dv]);
                minimize_cell(cell, &bounds, dv, &context)
            })
            .collect();
        let mut f = PiecewiseAffineFn::from_pieces(n, pieces, Combine::Min);
        f.simplify();
        f
    }
}

/// Whether `flat` has no interior and `full` takes the same values on it,
/// so that `full` can stand for both.
fn absorbs(full: &Piece, flat: &Piece) -> bool {
    if !full.value.is_finite() || !flat.value.is_finite() {
        return false;
    }
    let open = Polyhedron::from_constraints(
        flat.region.clocks(),
        flat.region.constraints().iter().map(|c| Constraint::new(c.expr.clone(), true)),
    );
    if !open.is_empty() {
        return false;
    }
    let diff = full.value.sub(&flat.value);
    flat.region.implies(&Constraint::le(diff.clone())) && flat.region.implies(&Constraint::le(diff.neg()))
}

/// `p ∪ q` when it is convex. The candidate keeps the constraints of each
/// side that the other side satisfies; it equals the union exactly when
/// every part of it outside `p` lies in `q`.
fn convex_union(p: &Polyhedron, q: &Polyhedron) -> Option<Polyhedron> {
    let keep_p: Vec<&Constraint> = p.constraints().iter().filter(|c| q.implies(c)).collect();
    let keep_q = q.constraints().iter().filter(|c| p.implies(c));
    let env = Polyhedron::from_constraints(p.clocks(), keep_p.iter().map(|c| (*c).clone()).chain(keep_q.cloned()));
    for c in p.constraints() {
        if keep_p.contains(&c) {
            continue;
        }
        let outside = env.clone().with(c.negate());
        if outside.is_empty() {
            continue;
        }
        if !q.constraints().iter().all(|d| outside.implies(d)) {
            return None;
        }
    }
    Some(env)
}

/// Rewrites `c(v)` into `c(v + d·1)` with `d` the variable `dv`.
pub(crate) fn shift_by_delay(c: &Constraint, clocks: usize, dv: Var) -> Constraint {
    let k: Rational = c.expr.coeffs().filter(|(v, _)| *v < clocks).map(|(_, x)| x.clone()).sum();
    Constraint::new(c.expr.add(&AffineExpr::term(dv, k)), c.strict)
}

fn minimize_cell(cell: &Piece, bounds: &[Constraint], dv: Var, context: &Polyhedron) -> Vec<Piece> {
    let one = Rational::from_integer(1.into());
    let mut lowers = vec![AffineExpr::zero()];
    let mut uppers = Vec::new();
    for c in bounds {
        let k = c.expr.coeff(dv);
        if k.is_zero() {
            continue;
        }
        let rest = c.expr.sub(&AffineExpr::term(dv, k.clone()));
        // k·d + rest ≤ 0
        let bound = rest.scale(&(-&one / &k));
        if k.is_positive() {
            uppers.push(bound);
        } else {
            lowers.push(bound);
        }
    }
    let slope: Rational = cell.value.coeffs().map(|(_, x)| x.clone()).sum();
    let leaves = explore::<_, PafError>(context, |dec| {
        if !cell.value.is_finite() {
            return Ok(cell.value.clone());
        }
        let at = |d: &AffineExpr| cell.value.add(&d.scale(&slope));
        if !slope.is_negative() {
            let lo = dec.max_of(&lowers);
            Ok(at(&lo))
        } else if uppers.is_empty() {
            Ok(AffineExpr::neg_inf())
        } else {
            let hi = dec.min_of(&uppers);
            Ok(at(&hi))
        }
    })
    .expect("minimizing a cell cannot fail");
    leaves.into_iter().map(|l| Piece::new(l.region, l.value)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    fn x() -> AffineExpr {
        AffineExpr::var(0)
    }
    fn y() -> AffineExpr {
        AffineExpr::var(1)
    }
    fn k(n: i64) -> AffineExpr {
        AffineExpr::from_rational(int(n))
    }
    fn fin(r: Rational) -> ExtendedRational {
        ExtendedRational::Finite(r)
    }

    /// 1 − y on y ≤ 1, −inf above.
    fn one_minus_y() -> PiecewiseAffineFn {
        PiecewiseAffineFn::from_partition(
            2,
            vec![
                Piece::new(
                    Polyhedron::from_constraints(2, [Constraint::le_of(&y(), &k(1))]),
                    k(1).sub(&y()),
                ),
                Piece::new(
                    Polyhedron::from_constraints(2, [Constraint::lt_of(&k(1), &y())]),
                    AffineExpr::neg_inf(),
                ),
            ],
        )
    }

    fn grid(n: i64) -> Vec<[Rational; 2]> {
        (0..=n).flat_map(|i| (0..=n).map(move |j| [rat(i, 8), rat(j, 8)])).collect()
    }

    #[test]
    fn max_with_neg_inf_is_identity() {
        let f = one_minus_y();
        let g = PiecewiseAffineFn::pointwise_max(&[f.clone(), PiecewiseAffineFn::constant(2, ExtendedRational::NegInf)]);
        for v in grid(16) {
            assert_eq!(f.eval(&v), g.eval(&v));
        }
    }

    #[test]
    fn max_and_min_are_pointwise() {
        let f = one_minus_y();
        let g = PiecewiseAffineFn::from_partition(
            2,
            vec![Piece::new(Polyhedron::universe(2), x().sub(&y()))],
        );
        let hi = PiecewiseAffineFn::pointwise_max(&[f.clone(), g.clone()]);
        let lo = PiecewiseAffineFn::pointwise_min(&[f.clone(), g.clone()]);
        for v in grid(16) {
            let (a, b) = (f.eval(&v).unwrap(), g.eval(&v).unwrap());
            assert_eq!(hi.eval(&v).unwrap(), a.clone().max(b.clone()), "{v:?}");
            assert_eq!(lo.eval(&v).unwrap(), a.min(b), "{v:?}");
        }
    }

    #[test]
    fn min_is_idempotent() {
        let f = one_minus_y();
        let g = PiecewiseAffineFn::pointwise_min(&[f.clone(), f.clone()]);
        for v in grid(16) {
            assert_eq!(f.eval(&v), g.eval(&v));
        }
    }

    #[test]
    fn boundary_prefers_finite() {
        let f = one_minus_y();
        assert_eq!(f.eval(&[int(0), int(1)]).unwrap(), fin(int(0)));
        assert_eq!(f.eval(&[int(0), rat(3, 2)]).unwrap(), ExtendedRational::NegInf);
    }

    #[test]
    fn refinement_keeps_values() {
        let f = one_minus_y();
        let halves = vec![
            Polyhedron::from_constraints(2, [Constraint::le_of(&x(), &y())]),
            Polyhedron::from_constraints(2, [Constraint::lt_of(&y(), &x())]),
        ];
        let g = f.refine(&halves);
        assert_eq!(g.cells().len(), 4);
        for v in grid(16) {
            assert_eq!(f.eval(&v), g.eval(&v));
        }
    }

    #[test]
    fn restriction_sets_outside() {
        let p = Polyhedron::from_constraints(2, [Constraint::le_of(&x(), &k(1))]);
        let g = PiecewiseAffineFn::constant(2, fin(int(3))).restrict(&p, ExtendedRational::NegInf);
        assert_eq!(g.eval(&[int(1), int(0)]).unwrap(), fin(int(3)));
        assert_eq!(g.eval(&[int(2), int(0)]).unwrap(), ExtendedRational::NegInf);
    }

    #[test]
    fn delay_minimum_of_constant() {
        let f = PiecewiseAffineFn::constant(2, fin(int(3)));
        let g = f.minimize_along_delay(&Polyhedron::universe(2));
        assert_eq!(g.eval(&[int(1), int(2)]).unwrap(), fin(int(3)));
    }

    #[test]
    fn delay_minimum_inside_invariant() {
        let inv = Polyhedron::from_constraints(2, [Constraint::le_of(&y(), &k(1))]);
        let g = one_minus_y().minimize_along_delay(&inv);
        assert_eq!(g.eval(&[int(0), int(0)]).unwrap(), fin(int(0)));
        assert_eq!(g.eval(&[int(5), rat(1, 2)]).unwrap(), fin(int(0)));
        // no delay keeps y ≤ 1
        assert_eq!(g.eval(&[int(0), int(2)]).unwrap(), ExtendedRational::PosInf);
    }

    #[test]
    fn unbounded_delay_into_neg_inf() {
        let g = one_minus_y().minimize_along_delay(&Polyhedron::universe(2));
        assert_eq!(g.eval(&[int(0), int(0)]).unwrap(), ExtendedRational::NegInf);
    }

    #[test]
    fn simplify_merges_convex_unions_only() {
        let le = |e: AffineExpr| Constraint::le(e);
        let lt = |e: AffineExpr| Constraint::lt(e);
        // [0,1) and [1,2] on x, same value: one cell.
        let a = Polyhedron::from_constraints(1, [lt(x().sub(&k(1)))]);
        let b = Polyhedron::from_constraints(1, [le(k(1).sub(&x())), le(x().sub(&k(2)))]);
        let rest = Polyhedron::from_constraints(1, [lt(k(2).sub(&x()))]);
        let mut f = PiecewiseAffineFn::from_partition(
            1,
            vec![Piece::new(a, k(1)), Piece::new(b, k(1)), Piece::new(rest, AffineExpr::neg_inf())],
        );
        f.simplify();
        assert_eq!(f.cells().len(), 2);
        assert_eq!(f.eval(&[rat(3, 2)]).unwrap(), ExtendedRational::Finite(int(1)));
        // Two opposite corners of the square are not merged.
        let c1 = Polyhedron::from_constraints(2, [le(x().sub(&k(1))), le(y().sub(&k(1)))]);
        let c2 = Polyhedron::from_constraints(2, [lt(k(1).sub(&x())), lt(k(1).sub(&y()))]);
        let mut g = PiecewiseAffineFn::from_partition(2, vec![Piece::new(c1, k(0)), Piece::new(c2, k(0))]);
        g.simplify();
        assert_eq!(g.cells().len(), 2);
    }

    #[test]
    fn flat_cell_with_matching_values_is_absorbed() {
        let le = |e: AffineExpr| Constraint::le(e);
        let lt = |e: AffineExpr| Constraint::lt(e);
        // x < 2 carries 2 - x, the point x = 2 carries 4 - 2x; both are 0 there.
        let left = Polyhedron::from_constraints(1, [lt(x().sub(&k(2)))]);
        let point = Polyhedron::from_constraints(1, [le(x().sub(&k(2))), le(k(2).sub(&x()))]);
        let mut f = PiecewiseAffineFn::from_partition(
            1,
            vec![Piece::new(left, k(2).sub(&x())), Piece::new(point, k(4).sub(&x().scale(&int(2))))],
        );
        f.simplify();
        assert_eq!(f.cells().len(), 1);
        assert_eq!(f.cells()[0].value, k(2).sub(&x()));
    }
}
