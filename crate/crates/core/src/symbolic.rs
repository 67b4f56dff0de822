//! Running one decision procedure either on concrete numbers or symbolically
//! over a polyhedron of valuations.
//!
//! Algorithms are written against [`Scalar`] values and ask a [`Decide`]
//! implementation to compare them. [`Exact`] compares rationals. A
//! [`PathDecider`] compares affine expressions in the valuation: when both
//! outcomes are possible on the current region it takes one and schedules the
//! other, so [`explore`] enumerates a partition of the starting region into
//! cells on which the procedure makes identical decisions.

use std::collections::HashMap;

use crate::error::NumericsError;
use crate::numerics::{AffineExpr, ExtendedRational, Rational};
use crate::polyhedra::{Constraint, Polyhedron};

pub trait Scalar: Clone + std::fmt::Debug {
    fn from_ext(r: ExtendedRational) -> Self;
    fn plus(&self, o: &Self) -> Result<Self, NumericsError>;
    fn times(&self, k: &Rational) -> Result<Self, NumericsError>;
    /// The value when it does not depend on the valuation.
    fn as_constant(&self) -> Option<ExtendedRational>;

    fn from_rational(r: Rational) -> Self {
        Self::from_ext(ExtendedRational::Finite(r))
    }

    fn minus(&self, o: &Self) -> Result<Self, NumericsError> {
        self.plus(&o.times(&-Rational::from_integer(1.into()))?)
    }

    fn is_pos_inf(&self) -> bool {
        self.as_constant() == Some(ExtendedRational::PosInf)
    }

    fn is_neg_inf(&self) -> bool {
        self.as_constant() == Some(ExtendedRational::NegInf)
    }
}

impl Scalar for ExtendedRational {
    fn from_ext(r: ExtendedRational) -> Self {
        r
    }
    fn plus(&self, o: &Self) -> Result<Self, NumericsError> {
        self.try_add(o)
    }
    fn times(&self, k: &Rational) -> Result<Self, NumericsError> {
        self.try_scale(k)
    }
    fn as_constant(&self) -> Option<ExtendedRational> {
        Some(self.clone())
    }
}

impl Scalar for AffineExpr {
    fn from_ext(r: ExtendedRational) -> Self {
        AffineExpr::constant(r)
    }
    fn plus(&self, o: &Self) -> Result<Self, NumericsError> {
        self.try_add(o)
    }
    fn times(&self, k: &Rational) -> Result<Self, NumericsError> {
        self.try_scale(k)
    }
    fn as_constant(&self) -> Option<ExtendedRational> {
        self.is_constant().then(|| self.constant_term().clone())
    }
}

pub trait Decide<S: Scalar> {
    /// Whether `a <= b`.
    fn le(&mut self, a: &S, b: &S) -> bool;

    fn lt(&mut self, a: &S, b: &S) -> bool {
        !self.le(b, a)
    }

    fn min(&mut self, a: &S, b: &S) -> S {
        if self.le(a, b) {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn max(&mut self, a: &S, b: &S) -> S {
        if self.le(a, b) {
            b.clone()
        } else {
            a.clone()
        }
    }

    fn min_of(&mut self, xs: &[S]) -> S {
        let mut it = xs.iter();
        let mut best = it.next().expect("nonempty").clone();
        for x in it {
            best = self.min(&best, x);
        }
        best
    }

    fn max_of(&mut self, xs: &[S]) -> S {
        let mut it = xs.iter();
        let mut best = it.next().expect("nonempty").clone();
        for x in it {
            best = self.max(&best, x);
        }
        best
    }
}

/// Concrete comparisons.
#[derive(Debug, Default, Clone, Copy)]
pub struct Exact;

impl Decide<ExtendedRational> for Exact {
    fn le(&mut self, a: &ExtendedRational, b: &ExtendedRational) -> bool {
        a <= b
    }
}

/// Decides comparisons between constant (or infinite) operands; `None` when
/// the answer depends on the valuation.
fn constant_le(a: &AffineExpr, b: &AffineExpr) -> Option<bool> {
    match (a.constant_term(), b.constant_term()) {
        (ExtendedRational::NegInf, _) | (_, ExtendedRational::PosInf) => Some(true),
        (ExtendedRational::PosInf, _) | (_, ExtendedRational::NegInf) => Some(false),
        (ExtendedRational::Finite(x), ExtendedRational::Finite(y)) => {
            if a.is_constant() && b.is_constant() {
                Some(x <= y)
            } else {
                None
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Choice {
    outcome: bool,
    forked: bool,
}

/// Symbolic comparisons on one path of the exploration.
pub struct PathDecider {
    region: Polyhedron,
    prefix: Vec<Choice>,
    pos: usize,
    pending: Vec<Vec<Choice>>,
    cache: HashMap<AffineExpr, bool>,
}

impl PathDecider {
    fn new(region: Polyhedron, prefix: Vec<Choice>) -> Self {
        PathDecider {
            region,
            prefix,
            pos: 0,
            pending: Vec::new(),
            cache: HashMap::new(),
        }
    }

    /// The region of valuations following the current path.
    pub fn region(&self) -> &Polyhedron {
        &self.region
    }

    fn decide(&mut self, diff: AffineExpr) -> bool {
        // diff <= 0 ?
        let key = diff.normalized_positive();
        if let Some(&b) = self.cache.get(&key) {
            return b;
        }
        let le = Constraint::le(diff.clone());
        let gt = Constraint::lt(diff.neg());
        let choice = if self.pos < self.prefix.len() {
            self.prefix[self.pos]
        } else {
            let can_le = !self.region.clone().with(le.clone()).is_empty();
            let can_gt = !self.region.clone().with(gt.clone()).is_empty();
            let choice = match (can_le, can_gt) {
                (true, true) => {
                    let mut alt = self.prefix.clone();
                    alt.push(Choice {
                        outcome: false,
                        forked: true,
                    });
                    self.pending.push(alt);
                    Choice {
                        outcome: true,
                        forked: true,
                    }
                }
                (true, false) => Choice {
                    outcome: true,
                    forked: false,
                },
                (false, true) => Choice {
                    outcome: false,
                    forked: false,
                },
                (false, false) => unreachable!("exploring an empty region"),
            };
            self.prefix.push(choice);
            choice
        };
        self.pos += 1;
        if choice.forked {
            self.region.add(if choice.outcome { le } else { gt });
        }
        self.cache.insert(key, choice.outcome);
        choice.outcome
    }

    /// Restricts the current path to `c` if that is possible, returning
    /// whether the path continues inside `c`.
    pub fn satisfies(&mut self, c: &Constraint) -> bool {
        if c.strict {
            // c: e < 0  <=>  not (-e <= 0)
            !self.decide(c.expr.neg())
        } else {
            self.decide(c.expr.clone())
        }
    }

    pub fn within(&mut self, p: &Polyhedron) -> bool {
        p.constraints().iter().all(|c| self.satisfies(c))
    }
}

impl Decide<AffineExpr> for PathDecider {
    fn le(&mut self, a: &AffineExpr, b: &AffineExpr) -> bool {
        if let Some(r) = constant_le(a, b) {
            return r;
        }
        let diff = a.sub(b);
        if diff.is_constant() {
            return diff.constant_term() <= &ExtendedRational::zero();
        }
        self.decide(diff)
    }
}

/// One cell of an exploration: the region where the procedure took a given
/// path, and what it returned there.
#[derive(Clone, Debug)]
pub struct Leaf<T> {
    pub region: Polyhedron,
    pub value: T,
}

/// Runs `f` on every path through `context`. The regions of the returned
/// leaves partition `context`.
pub fn explore<T, E>(
    context: &Polyhedron,
    mut f: impl FnMut(&mut PathDecider) -> Result<T, E>,
) -> Result<Vec<Leaf<T>>, E> {
    let mut out = Vec::new();
    if context.is_empty() {
        return Ok(out);
    }
    let mut stack = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        let mut d = PathDecider::new(context.clone(), prefix);
        let value = f(&mut d)?;
        stack.append(&mut d.pending);
        out.push(Leaf {
            region: d.region,
            value,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    #[test]
    fn exploration_partitions_region() {
        // max(x, 1 - x) over 0 <= x <= 2
        let ctx = Polyhedron::from_constraints(1, [Constraint::le(AffineExpr::new(int(-2), [(0, int(1))]))]);
        let leaves = explore::<_, ()>(&ctx, |d| {
            let x = AffineExpr::var(0);
            let y = AffineExpr::new(int(1), [(0, int(-1))]);
            Ok(d.max(&x, &y))
        })
        .unwrap();
        assert_eq!(leaves.len(), 2);
        for i in 0..=16 {
            let v = [rat(i, 8)];
            let hits: Vec<_> = leaves.iter().filter(|l| l.region.contains(&v)).collect();
            assert_eq!(hits.len(), 1, "{v:?}");
            let expected = std::cmp::max(v[0].clone(), int(1) - &v[0]);
            assert_eq!(hits[0].value.eval(&v), ExtendedRational::Finite(expected));
        }
    }

    #[test]
    fn implied_comparisons_do_not_fork() {
        let ctx = Polyhedron::from_constraints(1, [Constraint::le(AffineExpr::new(int(-1), [(0, int(1))]))]);
        let leaves = explore::<_, ()>(&ctx, |d| {
            let x = AffineExpr::var(0);
            Ok(d.le(&x, &AffineExpr::from_rational(int(3))))
        })
        .unwrap();
        assert_eq!(leaves.len(), 1);
        assert!(leaves[0].value);
    }

    #[test]
    fn infinite_operands_compare_directly() {
        let mut d = PathDecider::new(Polyhedron::universe(1), Vec::new());
        assert!(d.le(&AffineExpr::var(0), &AffineExpr::pos_inf()));
        assert!(!d.le(&AffineExpr::pos_inf(), &AffineExpr::var(0)));
        assert!(d.pending.is_empty());
    }
}
