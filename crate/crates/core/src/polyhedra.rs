//! Convex polyhedra over the nonnegative clock orthant, with Fourier-Motzkin
//! projection. Variables `0..clocks` are clocks and implicitly nonnegative;
//! higher-numbered variables are unrestricted helpers.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::numerics::{AffineExpr, ExtendedRational, Rational, Var};

/// `expr <= 0`, or `expr < 0` when `strict`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub expr: AffineExpr,
    pub strict: bool,
}

impl Constraint {
    pub fn le(expr: AffineExpr) -> Self {
        Self::new(expr, false)
    }

    pub fn lt(expr: AffineExpr) -> Self {
        Self::new(expr, true)
    }

    pub fn new(expr: AffineExpr, strict: bool) -> Self {
        assert!(expr.is_finite(), "constraints need finite expressions");
        Constraint { expr, strict }
    }

    /// `lhs <= rhs`.
    pub fn le_of(lhs: &AffineExpr, rhs: &AffineExpr) -> Self {
        Self::le(lhs.sub(rhs))
    }

    /// `lhs < rhs`.
    pub fn lt_of(lhs: &AffineExpr, rhs: &AffineExpr) -> Self {
        Self::lt(lhs.sub(rhs))
    }

    pub fn negate(&self) -> Self {
        Constraint {
            expr: self.expr.neg(),
            strict: !self.strict,
        }
    }

    pub fn holds(&self, v: &[Rational]) -> bool {
        let val = self.expr.eval(v);
        let val = val.finite().expect("finite constraint");
        if self.strict {
            val.is_negative()
        } else {
            !val.is_positive()
        }
    }

    /// `Some(true)` for a constraint with no variables that always holds,
    /// `Some(false)` for one that never holds.
    fn constant_truth(&self) -> Option<bool> {
        if !self.expr.is_constant() {
            return None;
        }
        let c = self.expr.constant_term().finite().expect("finite").clone();
        Some(if self.strict { c.is_negative() } else { !c.is_positive() })
    }

    fn normalized(&self) -> Self {
        Constraint {
            expr: self.expr.normalized_positive(),
            strict: self.strict,
        }
    }

    pub fn display_with(&self, names: &[String]) -> String {
        // print as `lhs <= rhs` with the constant moved right
        let c = self.expr.constant_term().finite().cloned().unwrap_or_default();
        let lhs = self.expr.add_const(&-c.clone());
        let op = if self.strict { "<" } else { "<=" };
        format!(
            "{} {} {}",
            lhs.display_with(names),
            op,
            crate::numerics::fmt_rational(&-c)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyhedron {
    clocks: usize,
    constraints: Vec<Constraint>,
    known_empty: bool,
}

impl Polyhedron {
    /// The whole nonnegative orthant over `clocks` clocks.
    pub fn universe(clocks: usize) -> Self {
        Polyhedron {
            clocks,
            constraints: Vec::new(),
            known_empty: false,
        }
    }

    pub fn from_constraints<I: IntoIterator<Item = Constraint>>(clocks: usize, cs: I) -> Self {
        let mut p = Self::universe(clocks);
        for c in cs {
            p.add(c);
        }
        p
    }

    pub fn clocks(&self) -> usize {
        self.clocks
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn add(&mut self, c: Constraint) {
        match c.constant_truth() {
            Some(true) => {}
            Some(false) => self.known_empty = true,
            None => {
                let n = c.normalized();
                if !self.constraints.contains(&n) {
                    self.constraints.push(n);
                }
            }
        }
    }

    pub fn with(mut self, c: Constraint) -> Self {
        self.add(c);
        self
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        let mut p = self.clone();
        p.clocks = p.clocks.max(other.clocks);
        p.known_empty |= other.known_empty;
        for c in &other.constraints {
            p.add(c.clone());
        }
        p
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        !self.known_empty && self.constraints.iter().all(|c| c.holds(v))
    }

    fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for c in &self.constraints {
            out.extend(c.expr.coeffs().map(|(v, _)| v));
        }
        out
    }

    /// Projects out `vars`: the result holds the valuations of the remaining
    /// variables for which some value of `vars` satisfies every constraint.
    /// Eliminated clock variables range over nonnegative values only.
    pub fn eliminate(&self, vars: &[Var]) -> Polyhedron {
        if self.known_empty {
            return self.clone();
        }
        let mut cs = self.constraints.clone();
        for &v in vars {
            if v < self.clocks {
                cs.push(Constraint::le(AffineExpr::var(v).neg()));
            }
        }
        let mut empty = false;
        for &v in vars {
            cs = eliminate_one(cs, v, &mut empty);
            if empty {
                break;
            }
        }
        let mut p = Polyhedron::from_constraints(self.clocks, cs);
        p.known_empty |= empty;
        p
    }

    /// True iff no point with nonnegative clocks satisfies all constraints.
    pub fn is_empty(&self) -> bool {
        if self.known_empty {
            return true;
        }
        let mut cs = self.constraints.clone();
        let vars = self.vars();
        for &v in &vars {
            if v < self.clocks {
                cs.push(Constraint::le(AffineExpr::var(v).neg()));
            }
        }
        let mut remaining: BTreeSet<Var> = vars;
        let mut empty = false;
        while let Some(v) = pick_variable(&cs, &remaining) {
            remaining.remove(&v);
            cs = eliminate_one(cs, v, &mut empty);
            if empty {
                return true;
            }
        }
        cs.iter().any(|c| c.constant_truth() == Some(false))
    }

    /// True iff every point of `self` satisfies `c`.
    pub fn implies(&self, c: &Constraint) -> bool {
        self.clone().with(c.negate()).is_empty()
    }

    /// Drops constraints implied by the others.
    pub fn remove_redundant(&self) -> Polyhedron {
        if self.is_empty() {
            return self.clone();
        }
        let mut kept: Vec<Constraint> = self.constraints.clone();
        let mut i = 0;
        while i < kept.len() {
            let others = Polyhedron {
                clocks: self.clocks,
                constraints: kept
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, c)| c.clone())
                    .collect(),
                known_empty: false,
            };
            if others.implies(&kept[i]) {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        Polyhedron {
            clocks: self.clocks,
            constraints: kept,
            known_empty: false,
        }
    }

    /// Topological closure (all constraints made non-strict).
    pub fn closure(&self) -> Polyhedron {
        Polyhedron {
            clocks: self.clocks,
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint::le(c.expr.clone()))
                .collect(),
            known_empty: self.known_empty,
        }
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.known_empty {
            return "false".into();
        }
        if self.constraints.is_empty() {
            return "true".into();
        }
        self.constraints
            .iter()
            .map(|c| c.display_with(names))
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

/// All pairwise nonempty intersections of two families of cells.
pub fn refine(a: &[Polyhedron], b: &[Polyhedron]) -> Vec<Polyhedron> {
    let mut out = Vec::new();
    for p in a {
        for q in b {
            let r = p.intersect(q);
            if !r.is_empty() {
                out.push(r);
            }
        }
    }
    out
}

fn pick_variable(cs: &[Constraint], remaining: &BTreeSet<Var>) -> Option<Var> {
    remaining
        .iter()
        .copied()
        .min_by_key(|&v| {
            let (mut pos, mut neg) = (0usize, 0usize);
            for c in cs {
                let k = c.expr.coeff(v);
                if k.is_positive() {
                    pos += 1;
                } else if k.is_negative() {
                    neg += 1;
                }
            }
            pos * neg
        })
}

fn eliminate_one(cs: Vec<Constraint>, v: Var, empty: &mut bool) -> Vec<Constraint> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for c in cs {
        let k = c.expr.coeff(v);
        if k.is_positive() {
            pos.push((k, c));
        } else if k.is_negative() {
            neg.push((-k, c));
        } else {
            out.push(c);
        }
    }
    for (kp, p) in &pos {
        for (kn, n) in &neg {
            let combined = p.expr.scale(kn).add(&n.expr.scale(kp));
            out.push(Constraint::new(combined, p.strict || n.strict));
        }
    }
    simplify(out, empty)
}

/// Syntactic cleanup: drops trivially true constraints, flags trivially false
/// ones and keeps only the tightest constraint per direction.
fn simplify(cs: Vec<Constraint>, empty: &mut bool) -> Vec<Constraint> {
    let mut best: HashMap<AffineExpr, (Rational, bool)> = HashMap::new();
    let mut order = Vec::new();
    for c in cs {
        match c.constant_truth() {
            Some(true) => continue,
            Some(false) => {
                *empty = true;
                return vec![c];
            }
            None => {}
        }
        let n = c.normalized();
        let constant = n.expr.constant_term().finite().cloned().unwrap_or_else(Rational::zero);
        let dir = n.expr.add_const(&-constant.clone());
        match best.get_mut(&dir) {
            Some(entry) => {
                if constant > entry.0 || (constant == entry.0 && n.strict) {
                    *entry = (constant, n.strict);
                }
            }
            None => {
                order.push(dir.clone());
                best.insert(dir, (constant, n.strict));
            }
        }
    }
    order
        .into_iter()
        .map(|dir| {
            let (c, strict) = best[&dir].clone();
            Constraint::new(dir.add_const(&c), strict)
        })
        .collect()
}

/// The interval of a scalar expression over the set of values it takes,
/// useful for printing; infinite ends are unbounded.
pub fn bounds_of(p: &Polyhedron, e: &AffineExpr, helper: Var) -> (ExtendedRational, ExtendedRational) {
    // project {v in p, t = e(v)} onto t
    let eq = AffineExpr::var(helper).sub(e);
    let q = p
        .clone()
        .with(Constraint::le(eq.clone()))
        .with(Constraint::le(eq.neg()));
    let vars: Vec<Var> = q.vars().into_iter().filter(|&v| v != helper).collect();
    let proj = q.eliminate(&vars);
    let mut lo = ExtendedRational::NegInf;
    let mut hi = ExtendedRational::PosInf;
    for c in proj.constraints() {
        let k = c.expr.coeff(helper);
        let c0 = c.expr.constant_term().finite().cloned().unwrap_or_default();
        let bound = ExtendedRational::Finite(-c0 / &k);
        if k.is_positive() {
            hi = hi.min(bound);
        } else if k.is_negative() {
            lo = lo.max(bound);
        }
    }
    (lo, hi)
}
