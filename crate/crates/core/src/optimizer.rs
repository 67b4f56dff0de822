//! Maximizing `min{β − α, aα + b, cβ + d}` over the box
//! `m_α ≤ α ≤ M_α, m_β ≤ β ≤ M_β, α ≤ β` in closed form.
//!
//! The solver is generic over [`Scalar`]: with rationals it answers one
//! instance, with affine expressions in a valuation it is run under
//! [`explore`] and returns one closed form per region.

use num_traits::{Signed, Zero};

use crate::error::OptError;
use crate::numerics::{AffineExpr, ExtendedRational, Rational};
use crate::polyhedra::Polyhedron;
use crate::symbolic::{explore, Decide, Exact, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct BoxProblem<S> {
    pub a: Rational,
    pub b: S,
    pub c: Rational,
    pub d: S,
    pub m_alpha: S,
    pub big_m_alpha: S,
    pub m_beta: S,
    pub big_m_beta: S,
}

/// Which closed form produced a solution: `(block, row)`. Blocks 1 to 4 are
/// the sign cases `a≤0∧c≥0`, `a≥0∧c≥0`, `a≤0∧c≤0`, `a>0∧c<0`; block 0 is an
/// unbounded `M_β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Row(pub u8, pub u8);

#[derive(Clone, Debug, PartialEq)]
pub struct BoxSolution<S> {
    pub value: S,
    pub alpha: S,
    pub beta: S,
    pub attainable: bool,
    pub row: Row,
}

fn r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn lin<S: Scalar>(k: &Rational, x: &S, y: &S) -> Result<S, OptError> {
    Ok(x.times(k)?.plus(y)?)
}

fn div<S: Scalar>(x: &S, k: &Rational) -> Result<S, OptError> {
    debug_assert!(!k.is_zero());
    Ok(x.times(&k.recip())?)
}

/// Solves one instance; `None` when the domain is empty.
pub fn solve_box<S: Scalar, D: Decide<S>>(
    p: &BoxProblem<S>,
    dec: &mut D,
) -> Result<Option<BoxSolution<S>>, OptError> {
    let (a, c) = (&p.a, &p.c);
    let (b, d) = (&p.b, &p.d);
    let m_a = &p.m_alpha;
    if !dec.le(m_a, &p.big_m_alpha) || !dec.le(m_a, &p.big_m_beta) || !dec.le(&p.m_beta, &p.big_m_beta) {
        return Ok(None);
    }
    let sol = |value: S, alpha: S, beta: S, row: Row| {
        Ok(Some(BoxSolution {
            value,
            alpha,
            beta,
            attainable: true,
            row,
        }))
    };
    let m_b = dec.max(&p.m_beta, m_a);
    if b.is_neg_inf() || d.is_neg_inf() {
        return sol(S::from_ext(ExtendedRational::NegInf), m_a.clone(), m_b, Row(0, 2));
    }
    if p.big_m_beta.is_pos_inf() {
        if !c.is_zero() {
            return Err(OptError::UnboundedSlope);
        }
        let inf = S::from_ext(ExtendedRational::PosInf);
        let alpha = if a.is_positive() {
            if p.big_m_alpha.is_pos_inf() {
                return Err(OptError::UnboundedSlope);
            }
            p.big_m_alpha.clone()
        } else {
            m_a.clone()
        };
        let f = lin(a, &alpha, b)?;
        let value = dec.min(&f, d);
        return sol(value, alpha, inf, Row(0, 1));
    }
    let big_b = &p.big_m_beta;
    let big_a = dec.min(&p.big_m_alpha, big_b);
    let f = |x: &S| lin(a, x, b);
    let g = |x: &S| lin(c, x, d);
    let h = |x: &S, y: &S| -> Result<S, OptError> { Ok(y.minus(x)?) };

    if !a.is_positive() && !c.is_negative() {
        let v = dec.min_of(&[h(m_a, big_b)?, f(m_a)?, g(big_b)?]);
        return sol(v, m_a.clone(), big_b.clone(), Row(1, 1));
    }
    if !a.is_negative() && !c.is_negative() {
        let a0 = div(&big_b.minus(b)?, &(a + r(1)))?;
        if dec.le(&a0, m_a) {
            let v = dec.min(&h(m_a, big_b)?, &g(big_b)?);
            return sol(v, m_a.clone(), big_b.clone(), Row(2, 1));
        }
        if dec.le(&a0, &big_a) {
            let v = dec.min(&div(&f(big_b)?, &(a + r(1)))?, &g(big_b)?);
            return sol(v, a0, big_b.clone(), Row(2, 2));
        }
        let v = dec.min(&f(&big_a)?, &g(big_b)?);
        return sol(v, big_a, big_b.clone(), Row(2, 3));
    }
    if !a.is_positive() && !c.is_positive() {
        let b0 = div(&m_a.plus(d)?, &(r(1) - c))?;
        if dec.le(big_b, &b0) {
            let v = dec.min(&h(m_a, big_b)?, &f(m_a)?);
            return sol(v, m_a.clone(), big_b.clone(), Row(3, 1));
        }
        if dec.le(&m_b, &b0) {
            let v = dec.min(&div(&g(m_a)?, &(r(1) - c))?, &f(m_a)?);
            return sol(v, m_a.clone(), b0, Row(3, 2));
        }
        let v = dec.min_of(&[f(m_a)?, g(&m_b)?, g(m_a)?]);
        return sol(v, m_a.clone(), m_b, Row(3, 3));
    }

    // a > 0 and c < 0
    let (fu, gu, hu) = (f(&big_a)?, g(big_b)?, h(&big_a, big_b)?);
    if dec.le(&fu, &gu) && dec.le(&fu, &hu) {
        return sol(fu, big_a, big_b.clone(), Row(4, 1));
    }
    let (fl, gl, hl) = (f(m_a)?, g(&m_b)?, h(m_a, &m_b)?);
    if dec.le(&gl, &fl) && dec.le(&gl, &hl) {
        return sol(gl, m_a.clone(), m_b, Row(4, 2));
    }
    let (fc, gc, hc) = (f(m_a)?, g(big_b)?, h(m_a, big_b)?);
    if dec.le(&hc, &fc) && dec.le(&hc, &gc) {
        return sol(hc, m_a.clone(), big_b.clone(), Row(4, 3));
    }
    let one_c = r(1) - c;
    let a1 = a + r(1);
    let den = &a1 * &one_c - r(1);
    debug_assert!(den.is_positive());
    let t_a = div(&d.minus(&b.times(&one_c)?)?, &den)?;
    let t_b = div(&d.times(&a1)?.minus(b)?, &den)?;
    if dec.le(big_b, &t_b) {
        let alpha = div(&big_b.minus(b)?, &a1)?;
        return sol(div(&f(big_b)?, &a1)?, alpha, big_b.clone(), Row(4, 4));
    }
    if dec.le(&t_a, m_a) {
        let beta = div(&m_a.plus(d)?, &one_c)?;
        return sol(div(&g(m_a)?, &one_c)?, m_a.clone(), beta, Row(4, 5));
    }
    let (ad, bc) = (d.times(a)?, b.times(c)?);
    if dec.le(&ad, &bc) {
        let p1 = dec.min(&m_b, &big_a);
        let (f1, g1, h1) = (f(&p1)?, g(&m_b)?, h(&p1, &m_b)?);
        if dec.le(&g1, &f1) && dec.le(&g1, &h1) {
            let alpha = div(&g1.minus(b)?, a)?;
            return sol(g1, alpha, m_b, Row(4, 6));
        }
        let p2 = dec.max(&m_b, &big_a);
        let (f2, g2, h2) = (f(&big_a)?, g(&p2)?, h(&big_a, &p2)?);
        if dec.le(&g2, &f2) && dec.le(&g2, &h2) {
            let x = div(&d.minus(b)?, &(a - c))?;
            let v = div(&ad.minus(&bc)?, &(a - c))?;
            return sol(v, x.clone(), x, Row(4, 7));
        }
        let fa = f(&big_a)?;
        let beta = div(&fa.minus(d)?, c)?;
        return sol(fa, big_a, beta, Row(4, 8));
    }
    if dec.le(&t_b, &m_b) {
        // any α between (g(m_β) − b)/a and (1 − c)m_β − d; take the smaller
        let gm = g(&m_b)?;
        let alpha = div(&gm.minus(b)?, a)?;
        return sol(gm, alpha, m_b, Row(4, 9));
    }
    if dec.le(&big_a, &t_a) {
        let fa = f(&big_a)?;
        let beta = big_a.plus(&fa)?;
        return sol(fa, big_a, beta, Row(4, 10));
    }
    let v = div(&ad.minus(&bc)?, &den)?;
    sol(v, t_a, t_b, Row(4, 11))
}

pub fn solve_box_concrete(p: &BoxProblem<ExtendedRational>) -> Result<BoxSolution<ExtendedRational>, OptError> {
    solve_box(p, &mut Exact)?.ok_or(OptError::EmptyDomain)
}

/// `min{β − α, aα + b, cβ + d}` at a point of the domain.
pub fn mu_eval(
    p: &BoxProblem<ExtendedRational>,
    alpha: &ExtendedRational,
    beta: &ExtendedRational,
) -> Result<ExtendedRational, OptError> {
    let inside = &p.m_alpha <= alpha
        && alpha <= &p.big_m_alpha
        && &p.m_beta <= beta
        && beta <= &p.big_m_beta
        && alpha <= beta
        && alpha.is_finite();
    if !inside {
        return Err(OptError::OutsideDomain);
    }
    let h = beta.try_sub(alpha)?;
    let f = alpha.try_scale(&p.a)?.try_add(&p.b)?;
    let g = if p.c.is_zero() {
        p.d.clone()
    } else {
        beta.try_scale(&p.c)?.try_add(&p.d)?
    };
    Ok(h.min(f).min(g))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicCase {
    pub condition: Polyhedron,
    pub value: AffineExpr,
    pub alpha: AffineExpr,
    pub beta: AffineExpr,
    pub attainable: bool,
    pub row: Row,
}

/// Closed forms over a region of valuations. `cases` and `empty` together
/// partition the context; `empty` is where the domain has no point.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SymbolicOptResult {
    pub cases: Vec<SymbolicCase>,
    pub empty: Vec<Polyhedron>,
}

pub fn solve_box_symbolic(p: &BoxProblem<AffineExpr>, context: &Polyhedron) -> Result<SymbolicOptResult, OptError> {
    let leaves = explore(context, |dec| solve_box(p, dec))?;
    let mut out = SymbolicOptResult::default();
    for leaf in leaves {
        match leaf.value {
            Some(s) => out.cases.push(SymbolicCase {
                condition: leaf.region,
                value: s.value,
                alpha: s.alpha,
                beta: s.beta,
                attainable: s.attainable,
                row: s.row,
            }),
            None => out.empty.push(leaf.region),
        }
    }
    Ok(out)
}

/// The instance obtained by `(α, β) ↦ (−β, −α)`, which swaps the roles of
/// the two slopes and negates them.
pub fn mirrored(p: &BoxProblem<ExtendedRational>) -> BoxProblem<ExtendedRational> {
    BoxProblem {
        a: -p.c.clone(),
        b: p.d.clone(),
        c: -p.a.clone(),
        d: p.b.clone(),
        m_alpha: p.big_m_beta.neg(),
        big_m_alpha: p.m_beta.neg(),
        m_beta: p.big_m_alpha.neg(),
        big_m_beta: p.m_alpha.neg(),
    }
}
