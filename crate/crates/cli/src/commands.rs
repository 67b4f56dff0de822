use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use permissive_core::document::{parse_valuation, plot_csv, DocumentError, PafDocument, PlotRange};
use permissive_core::engine::{compute_with, Options, StepKind};
use permissive_core::error::{EngineError, ModelError, OracleError};
use permissive_core::model::{parse_model, TimedAutomatonSpec};
use permissive_core::numerics::{fmt_decimal, fmt_rational, parse_rational, ExtendedRational, Rational};
use permissive_core::oracle::{GridParams, Oracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DocumentError> for CliError {
    fn from(e: DocumentError) -> Self {
        match e {
            DocumentError::Eval(_) => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        let mut inner = &e;
        while let EngineError::Location { source, .. } = inner {
            inner = source;
        }
        match inner {
            EngineError::CycleDetected => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::HorizonExceeded | OracleError::Grid(_) | OracleError::NotFinite => {
                CliError::Input(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_or_return(out: Option<&Path>, text: String) -> Result<String> {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn load_model(path: &Path) -> Result<(String, TimedAutomatonSpec)> {
    let text = read(path)?;
    let spec = parse_model(&text)?;
    Ok((text, spec))
}

fn load_doc(path: &Path) -> Result<PafDocument> {
    Ok(PafDocument::from_json(&read(path)?)?)
}

pub fn classify(spec: &TimedAutomatonSpec) -> &'static str {
    if spec.has_opponent() {
        "game"
    } else if spec.is_linear() {
        "linear"
    } else {
        "acyclic branching"
    }
}

pub fn validate(path: &Path) -> Result<String> {
    let (_, spec) = load_model(path)?;
    let longest = spec.longest_path_length(spec.initial)?;
    let longest = longest.map_or("none (target unreachable)".to_string(), |k| k.to_string());
    Ok(format!(
        "{}, {} clock{}, M={}, longest path {}\n",
        classify(&spec),
        spec.num_clocks(),
        if spec.num_clocks() == 1 { "" } else { "s" },
        spec.max_constant(),
        longest
    ))
}

pub fn solve(path: &Path, out: Option<&Path>, max_iter: Option<usize>) -> Result<String> {
    let (text, spec) = load_model(path)?;
    let sol = compute_with(&spec, Options { max_iter, steps: StepKind::Auto })?;
    let doc = PafDocument::from_solution(&spec, &text, &sol);
    let json = doc.to_json() + "\n";
    if out.is_none() {
        return Ok(json);
    }
    write_or_return(out, json)?;
    let mut report = String::new();
    for (l, f) in spec.locations.iter().zip(&sol.functions) {
        let finite = f.cells().iter().filter(|c| c.value.is_finite()).count();
        let _ = writeln!(report, "{}: {} cells, {} finite", l.name, f.cells().len(), finite);
    }
    Ok(report)
}

pub fn eval(path: &Path, loc: &str, val: &str) -> Result<String> {
    let doc = load_doc(path)?;
    let f = doc.function(loc)?;
    let v = doc.parse_valuation(val)?;
    let value = f.eval(&v).map_err(DocumentError::from)?;
    let mut out = format!("{value}\n");
    if let Some(a) = f.cell_at(&v).and_then(|p| p.annotation.as_ref()) {
        if value.is_finite() {
            let _ = writeln!(out, "move {} [{}, {}]", a.action, a.alpha.eval(&v), a.beta.eval(&v));
        }
    }
    Ok(out)
}

pub fn plot(
    path: &Path,
    loc: &str,
    clocks: Option<&str>,
    range: &str,
    val: &str,
    out: Option<&Path>,
) -> Result<String> {
    let doc = load_doc(path)?;
    let f = doc.function(loc)?;
    let base = doc.parse_valuation(val)?;
    let index = |name: &str| {
        doc.clocks
            .iter()
            .position(|c| c == name.trim())
            .ok_or_else(|| CliError::Input(format!("unknown clock `{name}`")))
    };
    let names: Vec<&str> = match clocks {
        Some(c) => c.split(',').collect(),
        None => doc.clocks.iter().take(2).map(String::as_str).collect(),
    };
    let (cx, cy) = match names.as_slice() {
        [x] => (index(x)?, None),
        [x, y] => (index(x)?, Some(index(y)?)),
        _ => return Err(CliError::Input("--clocks takes one or two clock names".into())),
    };
    let range: PlotRange = range.parse()?;
    write_or_return(out, plot_csv(&f, &base, cx, cy, &range)?)
}

fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    if a > b {
        a - b
    } else {
        b - a
    }
}

pub fn compare(
    path: &Path,
    delta: &str,
    samples: usize,
    seed: u64,
    loc: Option<&str>,
    val: Option<&str>,
) -> Result<String> {
    let (_, spec) = load_model(path)?;
    let delta = parse_rational(delta).map_err(|e| CliError::Input(e.to_string()))?;
    let l = match loc {
        Some(name) => spec
            .location_index(name)
            .ok_or_else(|| CliError::Input(format!("unknown location `{name}`")))?,
        None => spec.initial,
    };
    let sol = compute_with(&spec, Options::default())?;
    let mut oracle = Oracle::new(&spec, &GridParams::new(delta.clone(), spec.locations.len()))?;

    // Sample on the coarser of 1/8 and δ that the oracle can represent.
    let eighth = Rational::new(1.into(), 8.into());
    let step = if (&eighth / &delta).is_integer() { eighth } else { delta.clone() };
    let points: Vec<Vec<Rational>> = match val {
        Some(v) => vec![parse_valuation(&spec.clocks, v)?],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let top = (Rational::from_integer((spec.max_constant() + 1).into()) / &step)
                .to_integer()
                .try_into()
                .unwrap_or(64i64);
            (0..samples)
                .map(|_| {
                    (0..spec.num_clocks())
                        .map(|_| &step * Rational::from_integer(rng.gen_range(0..=top).into()))
                        .collect()
                })
                .collect()
        }
    };

    let bound = &delta * Rational::from_integer(4.into());
    let mut agree = 0;
    let mut finite = 0;
    let mut worst = Rational::from_integer(0.into());
    let mut report = String::new();
    for v in &points {
        let p = sol.functions[l].eval(v).map_err(DocumentError::from)?;
        let o = oracle.value(l, v)?;
        match (&p, &o) {
            (ExtendedRational::Finite(a), ExtendedRational::Finite(b)) => {
                agree += 1;
                finite += 1;
                worst = worst.max(abs_diff(a, b));
            }
            _ if p == o => agree += 1,
            _ => {
                let shown: Vec<String> = v.iter().map(fmt_rational).collect();
                let _ = writeln!(report, "mismatch at ({}): exact {p}, oracle {o}", shown.join(","));
            }
        }
        if val.is_some() {
            let _ = writeln!(report, "exact {p}, oracle {o}");
        }
    }
    let n = points.len();
    let pct = if n == 0 { 100.0 } else { 100.0 * agree as f64 / n as f64 };
    let _ = writeln!(report, "samples {n}, finite {finite}");
    let _ = writeln!(
        report,
        "max |diff| = {} ({}), bound 4*delta = {}",
        fmt_rational(&worst),
        fmt_decimal(&worst, 6),
        fmt_rational(&bound)
    );
    let _ = writeln!(report, "classification agreement {agree}/{n} ({pct:.0}%)");
    if agree != n || worst > bound {
        return Err(CliError::Internal(format!("oracle disagreement\n{report}")));
    }
    Ok(report)
}
