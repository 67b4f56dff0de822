//! Exact scalars and affine expressions over clock variables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::NumericsError;

pub type Rational = BigRational;

/// Index of a variable. Clocks occupy `0..n`; eliminable helper variables
/// (interval bounds, delays) are appended after them.
pub type Var = usize;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p`, `p/q` or a plain decimal such as `0.25` or `-1.5`.
pub fn parse_rational(s: &str) -> Result<Rational, NumericsError> {
    let s = s.trim();
    let bad = || NumericsError::Parse(s.to_string());
    if let Some((int_part, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int_part.starts_with('-');
        let digits = int_part.trim_start_matches(['-', '+']);
        let whole = if digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(digits).map_err(|_| bad())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let num = whole * &scale + BigInt::from_str(frac).map_err(|_| bad())?;
        let r = Rational::new(num, scale);
        return Ok(if neg { -r } else { r });
    }
    Rational::from_str(s).map_err(|_| bad())
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with a fixed number of digits, rounded half away from zero.
pub fn fmt_decimal(r: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = r * Rational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let whole = &abs / &scale;
    let frac = &abs % &scale;
    let frac = format!("{:0>width$}", frac.to_string(), width = digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac}")
    }
}

/// A rational number extended with both infinities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtendedRational {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtendedRational {
    pub fn zero() -> Self {
        ExtendedRational::Finite(Rational::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedRational::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtendedRational::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, NumericsError> {
        use ExtendedRational::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Ok(Finite(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => Err(NumericsError::Indeterminate("inf - inf")),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
        }
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, NumericsError> {
        self.try_add(&other.neg())
    }

    pub fn try_scale(&self, k: &Rational) -> Result<Self, NumericsError> {
        use ExtendedRational::*;
        match self {
            Finite(a) => Ok(Finite(a * k)),
            _ if k.is_zero() => Err(NumericsError::Indeterminate("0 * inf")),
            PosInf if k.is_positive() => Ok(PosInf),
            NegInf if k.is_positive() => Ok(NegInf),
            PosInf => Ok(NegInf),
            NegInf => Ok(PosInf),
        }
    }

    pub fn neg(&self) -> Self {
        use ExtendedRational::*;
        match self {
            Finite(a) => Finite(-a),
            PosInf => NegInf,
            NegInf => PosInf,
        }
    }
}

impl From<Rational> for ExtendedRational {
    fn from(r: Rational) -> Self {
        ExtendedRational::Finite(r)
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::NegInf => f.write_str("-inf"),
            ExtendedRational::PosInf => f.write_str("+inf"),
            ExtendedRational::Finite(r) => f.write_str(&fmt_rational(r)),
        }
    }
}

impl FromStr for ExtendedRational {
    type Err = NumericsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+inf" | "inf" => Ok(ExtendedRational::PosInf),
            "-inf" => Ok(ExtendedRational::NegInf),
            other => parse_rational(other).map(ExtendedRational::Finite),
        }
    }
}

impl Serialize for ExtendedRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtendedRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `constant + sum coeffs[i] * x_i`. An infinite constant carries no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineExpr {
    constant: ExtendedRational,
    coeffs: BTreeMap<Var, Rational>,
}

impl AffineExpr {
    pub fn constant(c: ExtendedRational) -> Self {
        AffineExpr {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_rational(c: Rational) -> Self {
        Self::constant(ExtendedRational::Finite(c))
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn neg_inf() -> Self {
        Self::constant(ExtendedRational::NegInf)
    }

    pub fn pos_inf() -> Self {
        Self::constant(ExtendedRational::PosInf)
    }

    pub fn var(v: Var) -> Self {
        Self::term(v, Rational::one())
    }

    pub fn term(v: Var, k: Rational) -> Self {
        let mut e = Self::zero();
        if !k.is_zero() {
            e.coeffs.insert(v, k);
        }
        e
    }

    /// Builds a finite expression from a constant and `(var, coeff)` pairs.
    pub fn new<I>(constant: Rational, terms: I) -> Self
    where
        I: IntoIterator<Item = (Var, Rational)>,
    {
        let mut e = Self::from_rational(constant);
        for (v, k) in terms {
            let entry = e.coeffs.entry(v).or_insert_with(Rational::zero);
            *entry += k;
        }
        e.coeffs.retain(|_, k| !k.is_zero());
        e
    }

    pub fn constant_term(&self) -> &ExtendedRational {
        &self.constant
    }

    pub fn coeff(&self, v: Var) -> Rational {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (Var, &Rational)> {
        self.coeffs.iter().map(|(v, k)| (*v, k))
    }

    pub fn is_finite(&self) -> bool {
        self.constant.is_finite()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_var(&self) -> Option<Var> {
        self.coeffs.keys().next_back().copied()
    }

    /// Evaluates at `v`, where `v[i]` is the value of variable `i`.
    ///
    /// Panics if a variable in the support has no value.
    pub fn eval(&self, v: &[Rational]) -> ExtendedRational {
        match &self.constant {
            ExtendedRational::Finite(c) => {
                let mut acc = c.clone();
                for (var, k) in &self.coeffs {
                    let x = v
                        .get(*var)
                        .unwrap_or_else(|| panic!("valuation has no value for variable {var}"));
                    acc += k * x;
                }
                ExtendedRational::Finite(acc)
            }
            inf => inf.clone(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, NumericsError> {
        let constant = self.constant.try_add(&other.constant)?;
        if !constant.is_finite() {
            return Ok(Self::constant(constant));
        }
        let mut coeffs = self.coeffs.clone();
        for (v, k) in &other.coeffs {
            let entry = coeffs.entry(*v).or_insert_with(Rational::zero);
            *entry += k;
        }
        coeffs.retain(|_, k| !k.is_zero());
        Ok(AffineExpr { constant, coeffs })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, NumericsError> {
        self.try_add(&other.neg())
    }

    pub fn try_scale(&self, k: &Rational) -> Result<Self, NumericsError> {
        let constant = self.constant.try_scale(k)?;
        if !constant.is_finite() || k.is_zero() {
            return Ok(Self::constant(constant));
        }
        let coeffs = self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect();
        Ok(AffineExpr { constant, coeffs })
    }

    pub fn neg(&self) -> Self {
        AffineExpr {
            constant: self.constant.neg(),
            coeffs: self.coeffs.iter().map(|(v, k)| (*v, -k)).collect(),
        }
    }

    /// Addition of finite expressions; panics on infinite operands.
    pub fn add(&self, other: &Self) -> Self {
        assert!(self.is_finite() && other.is_finite(), "finite operands expected");
        self.try_add(other).expect("finite addition")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        assert!(self.is_finite(), "finite operand expected");
        self.try_scale(k).expect("finite scaling")
    }

    pub fn add_const(&self, c: &Rational) -> Self {
        self.try_add(&Self::from_rational(c.clone()))
            .expect("adding a finite constant")
    }

    /// Replaces variable `v` by `e`.
    pub fn substitute(&self, v: Var, e: &AffineExpr) -> Result<Self, NumericsError> {
        let k = self.coeff(v);
        if k.is_zero() {
            return Ok(self.clone());
        }
        let mut rest = self.clone();
        rest.coeffs.remove(&v);
        rest.try_add(&e.try_scale(&k)?)
    }

    /// Renames variables with `f`.
    pub fn map_vars(&self, f: impl Fn(Var) -> Var) -> Self {
        let mut out = Self::constant(self.constant.clone());
        for (v, k) in &self.coeffs {
            let entry = out.coeffs.entry(f(*v)).or_insert_with(Rational::zero);
            *entry += k;
        }
        out.coeffs.retain(|_, k| !k.is_zero());
        out
    }

    /// Splits `f((v + d)[reset -> 0])` into `slope * d + offset(v)`.
    ///
    /// `slope` is the sum of the coefficients on clocks that are not reset and
    /// `offset` is `f` with the reset clocks set to zero.
    pub fn delay_reset_compose(&self, reset: &[Var]) -> Result<(Rational, AffineExpr), NumericsError> {
        if !self.is_finite() {
            return Err(NumericsError::InfiniteAffine);
        }
        let mut offset = self.clone();
        offset.coeffs.retain(|v, _| !reset.contains(v));
        let slope = offset.coeffs.values().fold(Rational::zero(), |acc, k| acc + k);
        Ok((slope, offset))
    }

    /// Value of `f((v + d)[reset -> 0])` as an expression in `v` for a fixed
    /// expression `d` (itself affine in `v`).
    pub fn after_delay_reset(&self, reset: &[Var], delay: &AffineExpr) -> Result<Self, NumericsError> {
        if !self.is_finite() {
            return Ok(self.clone());
        }
        let (slope, offset) = self.delay_reset_compose(reset)?;
        if slope.is_zero() {
            return Ok(offset);
        }
        offset.try_add(&delay.try_scale(&slope)?)
    }

    /// Multiplies through by a positive rational so that the coefficients are
    /// coprime integers (or the constant is +-1 when there are none). Used to
    /// deduplicate constraints.
    pub(crate) fn normalized_positive(&self) -> Self {
        let ExtendedRational::Finite(c) = &self.constant else {
            return self.clone();
        };
        if self.coeffs.is_empty() {
            if c.is_zero() {
                return self.clone();
            }
            return Self::from_rational(c.signum());
        }
        let mut den_lcm = BigInt::one();
        for k in self.coeffs.values() {
            den_lcm = num_integer::Integer::lcm(&den_lcm, k.denom());
        }
        let scale = Rational::from_integer(den_lcm);
        let mut g = BigInt::zero();
        for k in self.coeffs.values() {
            g = num_integer::Integer::gcd(&g, &(k * &scale).to_integer());
        }
        let factor = scale / Rational::from_integer(g);
        self.scale(&factor)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let c = match &self.constant {
            ExtendedRational::Finite(c) => c,
            inf => return inf.to_string(),
        };
        let mut out = String::new();
        for (v, k) in &self.coeffs {
            let name = names.get(*v).cloned().unwrap_or_else(|| format!("v{v}"));
            let abs = k.abs();
            let sign = if k.is_negative() { "-" } else { "+" };
            if out.is_empty() {
                if k.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            if abs.is_one() {
                out.push_str(&name);
            } else {
                out.push_str(&format!("{}*{}", fmt_rational(&abs), name));
            }
        }
        if out.is_empty() {
            return fmt_rational(c);
        }
        if !c.is_zero() {
            let sign = if c.is_negative() { "-" } else { "+" };
            out.push_str(&format!(" {sign} {}", fmt_rational(&c.abs())));
        }
        out
    }
}

impl fmt::Display for AffineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: Var = 0;
    const Y: Var = 1;

    fn one_minus_x() -> AffineExpr {
        AffineExpr::new(int(1), [(X, int(-1))])
    }

    #[test]
    fn eval_examples() {
        let v = [rat(3, 4), int(0)];
        assert_eq!(one_minus_x().eval(&v), ExtendedRational::Finite(rat(1, 4)));
        assert_eq!(AffineExpr::zero().eval(&v), ExtendedRational::zero());
        assert_eq!(
            AffineExpr::neg_inf().eval(&[int(2), int(1)]),
            ExtendedRational::NegInf
        );
    }

    #[test]
    fn delay_reset_examples() {
        let x_minus_y = AffineExpr::new(int(0), [(X, int(1)), (Y, int(-1))]);
        let (s, off) = x_minus_y.delay_reset_compose(&[Y]).unwrap();
        assert_eq!(s, int(1));
        assert_eq!(off, AffineExpr::var(X));

        let x_plus_y = AffineExpr::new(int(0), [(X, int(1)), (Y, int(1))]);
        let (s, off) = x_plus_y.delay_reset_compose(&[X, Y]).unwrap();
        assert_eq!(s, int(0));
        assert_eq!(off, AffineExpr::zero());

        let two_minus_x = AffineExpr::new(int(2), [(X, int(-1))]);
        let (s, off) = two_minus_x.delay_reset_compose(&[]).unwrap();
        assert_eq!(s, int(-1));
        assert_eq!(off, two_minus_x);

        assert_eq!(
            AffineExpr::pos_inf().delay_reset_compose(&[]),
            Err(NumericsError::InfiniteAffine)
        );
    }

    #[test]
    fn linear_ops() {
        let a = one_minus_x();
        let b = AffineExpr::new(int(0), [(X, int(1)), (Y, int(-1))]);
        assert_eq!(a.add(&b), AffineExpr::new(int(1), [(Y, int(-1))]));
        let one_minus_y = AffineExpr::new(int(1), [(Y, int(-1))]);
        assert_eq!(
            one_minus_y.scale(&rat(1, 2)),
            AffineExpr::new(rat(1, 2), [(Y, rat(-1, 2))])
        );
        assert_eq!(AffineExpr::pos_inf().try_add(&AffineExpr::var(X)).unwrap(), AffineExpr::pos_inf());
        assert!(AffineExpr::pos_inf().try_add(&AffineExpr::neg_inf()).is_err());
        assert!(AffineExpr::pos_inf().try_scale(&int(0)).is_err());
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert!(parse_rational("x").is_err());
        assert_eq!(fmt_decimal(&rat(1, 3), 6), "0.333333");
        assert_eq!(fmt_decimal(&rat(-1, 2), 6), "-0.500000");
        assert_eq!(fmt_decimal(&rat(2, 3), 6), "0.666667");
        assert_eq!("+inf".parse::<ExtendedRational>().unwrap(), ExtendedRational::PosInf);
        assert_eq!(ExtendedRational::Finite(rat(-3, 4)).to_string(), "-3/4");
    }

    #[test]
    fn normalization_is_positive_multiple() {
        let e = AffineExpr::new(rat(-1, 2), [(X, rat(3, 4)), (Y, rat(-1, 4))]);
        let n = e.normalized_positive();
        assert_eq!(n, AffineExpr::new(int(-2), [(X, int(3)), (Y, int(-1))]));
        let e = AffineExpr::new(int(3), [(X, int(4)), (Y, int(-2))]);
        assert_eq!(e.normalized_positive(), AffineExpr::new(rat(3, 2), [(X, int(2)), (Y, int(-1))]));
    }
}
