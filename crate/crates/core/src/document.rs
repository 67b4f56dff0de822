//! JSON export of solved functions and CSV plot grids.
//!
//! Rationals are written as `"p/q"` strings so that a document reads back
//! exactly; CSV output is decimal and meant for plotting only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::PermSolution;
use crate::error::PafError;
use crate::model::TimedAutomatonSpec;
use crate::numerics::{fmt_decimal, fmt_rational, parse_rational, AffineExpr, ExtendedRational, Rational};
use crate::paf::{Annotation, Piece, PiecewiseAffineFn};
use crate::polyhedra::{Constraint, Polyhedron};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("bad number `{0}`")]
    Number(String),
    #[error(transparent)]
    Eval(#[from] PafError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineDoc {
    pub coeffs: BTreeMap<String, String>,
    pub constant: String,
}

/// An affine value, or `"+inf"` / `"-inf"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueDoc {
    Affine(AffineDoc),
    Infinite(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub coeffs: BTreeMap<String, String>,
    pub constant: String,
    /// `expr < 0` when set, `expr <= 0` otherwise.
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveDoc {
    pub action: String,
    pub alpha: ValueDoc,
    pub beta: ValueDoc,
    pub attainable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDoc {
    pub constraints: Vec<ConstraintDoc>,
    pub value: ValueDoc,
    #[serde(rename = "move", default, skip_serializing_if = "Option::is_none")]
    pub mv: Option<MoveDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationDoc {
    pub name: String,
    pub cells: Vec<CellDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PafDocument {
    /// SHA-256 of the model text, hex encoded.
    pub model_hash: String,
    pub clocks: Vec<String>,
    pub locations: Vec<LocationDoc>,
}

pub fn model_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn coeff_map(e: &AffineExpr, clocks: &[String]) -> BTreeMap<String, String> {
    e.coeffs()
        .map(|(v, c)| (clocks[v].clone(), fmt_rational(c)))
        .collect()
}

fn value_doc(e: &AffineExpr, clocks: &[String]) -> ValueDoc {
    match e.constant_term() {
        ExtendedRational::Finite(c) => ValueDoc::Affine(AffineDoc {
            coeffs: coeff_map(e, clocks),
            constant: fmt_rational(c),
        }),
        inf => ValueDoc::Infinite(inf.to_string()),
    }
}

fn cell_doc(p: &Piece, clocks: &[String]) -> CellDoc {
    let constraints = p
        .region
        .constraints()
        .iter()
        .map(|c| ConstraintDoc {
            coeffs: coeff_map(&c.expr, clocks),
            constant: c.expr.constant_term().to_string(),
            strict: c.strict,
        })
        .collect();
    CellDoc {
        constraints,
        value: value_doc(&p.value, clocks),
        mv: p.annotation.as_ref().map(|a| MoveDoc {
            action: a.action.clone(),
            alpha: value_doc(&a.alpha, clocks),
            beta: value_doc(&a.beta, clocks),
            attainable: a.attainable,
        }),
    }
}

fn number(s: &str) -> Result<Rational, DocumentError> {
    parse_rational(s).map_err(|_| DocumentError::Number(s.to_string()))
}

fn affine(coeffs: &BTreeMap<String, String>, constant: &str, clocks: &[String]) -> Result<AffineExpr, DocumentError> {
    let mut terms = Vec::new();
    for (name, c) in coeffs {
        let v = clocks
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| DocumentError::UnknownClock(name.clone()))?;
        terms.push((v, number(c)?));
    }
    Ok(AffineExpr::new(number(constant)?, terms))
}

fn read_value(v: &ValueDoc, clocks: &[String]) -> Result<AffineExpr, DocumentError> {
    match v {
        ValueDoc::Affine(a) => affine(&a.coeffs, &a.constant, clocks),
        ValueDoc::Infinite(s) => match s.parse::<ExtendedRational>() {
            Ok(ExtendedRational::PosInf) => Ok(AffineExpr::pos_inf()),
            Ok(ExtendedRational::NegInf) => Ok(AffineExpr::neg_inf()),
            _ => Err(DocumentError::Number(s.clone())),
        },
    }
}

impl PafDocument {
    pub fn from_solution(spec: &TimedAutomatonSpec, model_text: &str, sol: &PermSolution) -> Self {
        let locations = spec
            .locations
            .iter()
            .zip(&sol.functions)
            .map(|(l, f)| LocationDoc {
                name: l.name.clone(),
                cells: f.cells().iter().map(|p| cell_doc(p, &spec.clocks)).collect(),
            })
            .collect();
        PafDocument {
            model_hash: model_hash(model_text),
            clocks: spec.clocks.clone(),
            locations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn location_index(&self, name: &str) -> Result<usize, DocumentError> {
        self.locations
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| DocumentError::UnknownLocation(name.to_string()))
    }

    /// Rebuilds the function stored for location `name`.
    pub fn function(&self, name: &str) -> Result<PiecewiseAffineFn, DocumentError> {
        let loc = &self.locations[self.location_index(name)?];
        let n = self.clocks.len();
        let mut cells = Vec::new();
        for c in &loc.cells {
            let mut cs = Vec::new();
            for k in &c.constraints {
                cs.push(Constraint::new(affine(&k.coeffs, &k.constant, &self.clocks)?, k.strict));
            }
            let mut piece = Piece::new(Polyhedron::from_constraints(n, cs), read_value(&c.value, &self.clocks)?);
            if let Some(m) = &c.mv {
                piece.annotation = Some(Annotation {
                    action: m.action.clone(),
                    alpha: read_value(&m.alpha, &self.clocks)?,
                    beta: read_value(&m.beta, &self.clocks)?,
                    attainable: m.attainable,
                });
            }
            cells.push(piece);
        }
        Ok(PiecewiseAffineFn::from_partition(n, cells))
    }

    /// Reads a valuation such as `x=1/2,y=0`; clocks not mentioned are 0.
    pub fn parse_valuation(&self, text: &str) -> Result<Vec<Rational>, DocumentError> {
        parse_valuation(&self.clocks, text)
    }
}

/// Reads `name=value` pairs separated by commas; missing clocks are 0.
pub fn parse_valuation(clocks: &[String], text: &str) -> Result<Vec<Rational>, DocumentError> {
    let mut v = vec![Rational::from_integer(0.into()); clocks.len()];
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, val) = part
            .split_once('=')
            .ok_or_else(|| DocumentError::Number(part.to_string()))?;
        let i = clocks
            .iter()
            .position(|c| c == name.trim())
            .ok_or_else(|| DocumentError::UnknownClock(name.trim().to_string()))?;
        v[i] = number(val.trim())?;
    }
    Ok(v)
}

/// `start:stop:step` with decimal or rational parts; stop is inclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlotRange {
    pub start: Rational,
    pub stop: Rational,
    pub step: Rational,
}

impl std::str::FromStr for PlotRange {
    type Err = DocumentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(DocumentError::Number(s.to_string()));
        };
        let step = number(c)?;
        if step <= Rational::from_integer(0.into()) {
            return Err(DocumentError::Number(s.to_string()));
        }
        Ok(PlotRange {
            start: number(a)?,
            stop: number(b)?,
            step,
        })
    }
}

impl PlotRange {
    pub fn points(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut x = self.start.clone();
        while x <= self.stop {
            out.push(x.clone());
            x += &self.step;
        }
        out
    }
}

/// CSV value cell: six decimals, or `+inf` / `-inf`.
pub fn csv_value(x: &ExtendedRational) -> String {
    match x {
        ExtendedRational::Finite(r) => fmt_decimal(r, 6),
        inf => inf.to_string(),
    }
}

/// Values of `f` on the grid `range × range` over clocks `cx` and `cy`,
/// with the other clocks at `base`. Without `cy` the grid is one
/// dimensional and the `clock2` column stays empty.
pub fn plot_csv(
    f: &PiecewiseAffineFn,
    base: &[Rational],
    cx: usize,
    cy: Option<usize>,
    range: &PlotRange,
) -> Result<String, DocumentError> {
    let mut out = String::from("clock1,clock2,value\n");
    let pts = range.points();
    for x in &pts {
        let ys: Vec<Option<&Rational>> = match cy {
            Some(_) => pts.iter().map(Some).collect(),
            None => vec![None],
        };
        for y in ys {
            let mut v = base.to_vec();
            v[cx] = x.clone();
            if let (Some(c), Some(y)) = (cy, y) {
                v[c] = y.clone();
            }
            let val = f.eval(&v)?;
            let second = y.map(|y| fmt_decimal(y, 6)).unwrap_or_default();
            out += &format!("{},{},{}\n", fmt_decimal(x, 6), second, csv_value(&val));
        }
    }
    Ok(out)
}
