//! Line-oriented model format.
//!
//! ```text
//! clocks x y
//! location <id> [initial] [target] [owner player|opponent] [invariant "<guard>"]
//! edge <src> -> <dst> action <a> [guard "<guard>"] [reset c1,c2]
//! ```
//!
//! Guards are `&`-separated atoms such as `x <= 2`, `1 < y`, `0<=x<=1`.

use std::collections::HashSet;

use super::{Atom, Cmp, Guard, Location, Owner, TimedAutomatonSpec, Transition};
use crate::error::{ModelDiagnostic, ModelError, ModelErrorKind};

/// Parses and checks the restrictions of the solver: acyclic location graph
/// and non-strict constraints.
pub fn parse_model(text: &str) -> Result<TimedAutomatonSpec, ModelError> {
    let (spec, mut diags, lines) = parse_inner(text)?;
    if let Some(l) = spec.find_cycle() {
        diags.push(ModelDiagnostic {
            line: lines.location[l],
            kind: ModelErrorKind::Cycle(spec.locations[l].name.clone()),
        });
    }
    let names = &spec.clocks;
    for (i, t) in spec.transitions.iter().enumerate() {
        for a in t.guard.atoms.iter().filter(|a| a.is_strict()) {
            diags.push(ModelDiagnostic {
                line: lines.edge[i],
                kind: ModelErrorKind::StrictGuard(Guard { atoms: vec![a.clone()] }.display_with(names)),
            });
        }
    }
    for (i, l) in spec.locations.iter().enumerate() {
        for a in l.invariant.atoms.iter().filter(|a| a.is_strict()) {
            diags.push(ModelDiagnostic {
                line: lines.location[i],
                kind: ModelErrorKind::StrictGuard(Guard { atoms: vec![a.clone()] }.display_with(names)),
            });
        }
    }
    if diags.is_empty() {
        Ok(spec)
    } else {
        Err(ModelError(diags))
    }
}

/// Parses without the solver restrictions (cycles and strict constraints
/// are accepted).
pub fn parse_model_lenient(text: &str) -> Result<TimedAutomatonSpec, ModelError> {
    let (spec, diags, _) = parse_inner(text)?;
    if diags.is_empty() {
        Ok(spec)
    } else {
        Err(ModelError(diags))
    }
}

struct LineMap {
    location: Vec<usize>,
    edge: Vec<usize>,
}

struct RawEdge {
    line: usize,
    src: String,
    dst: String,
    action: String,
    guard: Option<String>,
    reset: Vec<String>,
}

fn diag(line: usize, kind: ModelErrorKind) -> ModelDiagnostic {
    ModelDiagnostic { line, kind }
}

fn syntax(line: usize, msg: impl Into<String>) -> ModelDiagnostic {
    diag(line, ModelErrorKind::Syntax(msg.into()))
}

/// Splits a line into words, keeping double-quoted strings whole.
fn words(line: &str, n: usize) -> Result<Vec<String>, ModelDiagnostic> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some(ch) => s.push(ch),
                    None => return Err(syntax(n, "unterminated string")),
                }
            }
            out.push(format!("\"{s}"));
        } else {
            let mut s = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() || ch == '"' {
                    break;
                }
                s.push(ch);
                chars.next();
            }
            out.push(s);
        }
    }
    Ok(out)
}

fn quoted(w: Option<&String>, line: usize, what: &str) -> Result<String, ModelDiagnostic> {
    match w {
        Some(s) if s.starts_with('"') => Ok(s[1..].to_string()),
        _ => Err(syntax(line, format!("expected a quoted {what}"))),
    }
}

type Parsed = (TimedAutomatonSpec, Vec<ModelDiagnostic>, LineMap);

fn parse_inner(text: &str) -> Result<Parsed, ModelError> {
    let mut diags = Vec::new();
    let mut clocks: Option<Vec<String>> = None;
    let mut raw_locs: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut raw_edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ws = match words(line, n) {
            Ok(ws) => ws,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        match ws[0].as_str() {
            "clocks" => {
                if clocks.is_some() {
                    diags.push(syntax(n, "clocks declared twice"));
                }
                clocks = Some(ws[1..].to_vec());
            }
            "location" => match ws.get(1) {
                Some(id) if !id.starts_with('"') => raw_locs.push((n, id.clone(), ws[2..].to_vec())),
                _ => diags.push(syntax(n, "location needs a name")),
            },
            "edge" => match parse_edge(&ws, n) {
                Ok(e) => raw_edges.push(e),
                Err(d) => diags.push(d),
            },
            other => diags.push(syntax(n, format!("unknown directive `{other}`"))),
        }
    }
    let clocks = clocks.unwrap_or_default();
    let mut seen = HashSet::new();
    for c in &clocks {
        if !seen.insert(c) {
            diags.push(syntax(0, format!("clock `{c}` declared twice")));
        }
    }

    let mut locations = Vec::new();
    let mut loc_lines = Vec::new();
    let mut names = HashSet::new();
    for (n, id, rest) in raw_locs {
        if !names.insert(id.clone()) {
            diags.push(diag(n, ModelErrorKind::DuplicateLocation(id)));
            continue;
        }
        let mut loc = Location {
            name: id,
            invariant: Guard::default(),
            owner: Owner::Player,
            initial: false,
            target: false,
        };
        let mut it = rest.iter();
        while let Some(w) = it.next() {
            match w.as_str() {
                "initial" => loc.initial = true,
                "target" => loc.target = true,
                "owner" => match it.next().map(String::as_str) {
                    Some("player") => loc.owner = Owner::Player,
                    Some("opponent") => loc.owner = Owner::Opponent,
                    _ => diags.push(syntax(n, "owner must be `player` or `opponent`")),
                },
                "invariant" => match quoted(it.next(), n, "invariant") {
                    Ok(g) => match parse_guard(&g, &clocks, n) {
                        Ok(g) => loc.invariant = g,
                        Err(d) => diags.push(d),
                    },
                    Err(d) => diags.push(d),
                },
                other => diags.push(syntax(n, format!("unexpected `{other}`"))),
            }
        }
        locations.push(loc);
        loc_lines.push(n);
    }

    let index = |name: &str| locations.iter().position(|l: &Location| l.name == name);
    let mut transitions = Vec::new();
    let mut edge_lines = Vec::new();
    let mut pairs = HashSet::new();
    for e in raw_edges {
        let (src, dst) = (index(&e.src), index(&e.dst));
        for (name, idx) in [(&e.src, src), (&e.dst, dst)] {
            if idx.is_none() {
                diags.push(diag(e.line, ModelErrorKind::UnknownLocation(name.clone())));
            }
        }
        let guard = match e.guard.as_deref().map(|g| parse_guard(g, &clocks, e.line)) {
            Some(Ok(g)) => g,
            Some(Err(d)) => {
                diags.push(d);
                Guard::default()
            }
            None => Guard::default(),
        };
        let mut reset = Vec::new();
        for r in &e.reset {
            match clocks.iter().position(|c| c == r) {
                Some(i) => reset.push(i),
                None => diags.push(diag(e.line, ModelErrorKind::UnknownClock(r.clone()))),
            }
        }
        let (Some(source), Some(destination)) = (src, dst) else {
            continue;
        };
        if !pairs.insert((source, e.action.clone())) {
            diags.push(diag(
                e.line,
                ModelErrorKind::DuplicateAction(e.src.clone(), e.action.clone()),
            ));
            continue;
        }
        transitions.push(Transition {
            source,
            guard,
            action: e.action,
            reset,
            destination,
        });
        edge_lines.push(e.line);
    }

    let targets: Vec<usize> = (0..locations.len()).filter(|&i| locations[i].target).collect();
    let target = match targets.as_slice() {
        [t] => *t,
        [] => {
            diags.push(diag(0, ModelErrorKind::NoTarget));
            0
        }
        [_, second, ..] => {
            diags.push(diag(loc_lines[*second], ModelErrorKind::MultipleTargets));
            targets[0]
        }
    };
    let initials: Vec<usize> = (0..locations.len()).filter(|&i| locations[i].initial).collect();
    if initials.len() > 1 {
        diags.push(syntax(loc_lines[initials[1]], "more than one initial location"));
    }
    let initial = initials.first().copied().unwrap_or(0);
    if locations.is_empty() {
        return Err(ModelError(
            diags
                .into_iter()
                .chain([syntax(0, "no locations declared")])
                .collect(),
        ));
    }
    let spec = TimedAutomatonSpec {
        clocks,
        locations,
        transitions,
        initial,
        target,
    };
    if !diags.is_empty() {
        return Err(ModelError(diags));
    }
    let lines = LineMap {
        location: loc_lines,
        edge: edge_lines,
    };
    Ok((spec, Vec::new(), lines))
}

fn parse_edge(ws: &[String], n: usize) -> Result<RawEdge, ModelDiagnostic> {
    if ws.len() < 6 || ws[2] != "->" || ws[4] != "action" {
        return Err(syntax(n, "expected `edge <src> -> <dst> action <a> ...`"));
    }
    let mut e = RawEdge {
        line: n,
        src: ws[1].clone(),
        dst: ws[3].clone(),
        action: ws[5].clone(),
        guard: None,
        reset: Vec::new(),
    };
    let mut it = ws[6..].iter();
    while let Some(w) = it.next() {
        match w.as_str() {
            "guard" => e.guard = Some(quoted(it.next(), n, "guard")?),
            "reset" => {
                let list = it.next().ok_or_else(|| syntax(n, "reset needs clocks"))?;
                e.reset = list.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect();
            }
            other => return Err(syntax(n, format!("unexpected `{other}`"))),
        }
    }
    Ok(e)
}

#[derive(Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Op(Cmp),
}

fn tokenize(s: &str, n: usize) -> Result<Vec<Tok>, ModelDiagnostic> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '-' {
            let start = i;
            i += 1;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            if i < cs.len() && (cs[i] == '.' || cs[i] == '/') {
                return Err(syntax(n, "guard constants must be integers"));
            }
            let lit: String = cs[start..i].iter().collect();
            let v = lit.parse::<i64>().map_err(|_| {
                if lit.len() > 1 {
                    diag(n, ModelErrorKind::ConstantOverflow(lit.clone()))
                } else {
                    syntax(n, format!("bad number `{lit}`"))
                }
            })?;
            if v < 0 {
                return Err(syntax(n, "guard constants must be nonnegative"));
            }
            out.push(Tok::Int(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[start..i].iter().collect()));
        } else {
            let two: String = cs[i..(i + 2).min(cs.len())].iter().collect();
            let (op, len) = match (two.as_str(), c) {
                ("<=", _) => (Cmp::Le, 2),
                (">=", _) => (Cmp::Ge, 2),
                ("==", _) => (Cmp::Eq, 2),
                (_, '<') => (Cmp::Lt, 1),
                (_, '>') => (Cmp::Gt, 1),
                (_, '=') => (Cmp::Eq, 1),
                _ => return Err(syntax(n, format!("unexpected `{c}` in guard"))),
            };
            out.push(Tok::Op(op));
            i += len;
        }
    }
    Ok(out)
}

fn flip(c: Cmp) -> Cmp {
    match c {
        Cmp::Lt => Cmp::Gt,
        Cmp::Le => Cmp::Ge,
        Cmp::Eq => Cmp::Eq,
        Cmp::Ge => Cmp::Le,
        Cmp::Gt => Cmp::Lt,
    }
}

pub(crate) fn parse_guard(s: &str, clocks: &[String], n: usize) -> Result<Guard, ModelDiagnostic> {
    let mut atoms = Vec::new();
    let s = s.trim();
    if s.is_empty() || s == "true" {
        return Ok(Guard::default());
    }
    for part in s.split('&') {
        let toks = tokenize(part, n)?;
        if toks.len() < 3 || toks.len() % 2 == 0 {
            return Err(syntax(n, format!("malformed constraint `{}`", part.trim())));
        }
        for w in toks.windows(3).step_by(2) {
            let atom = match (&w[0], &w[1], &w[2]) {
                (Tok::Ident(c), Tok::Op(op), Tok::Int(k)) => (c, *op, *k),
                (Tok::Int(k), Tok::Op(op), Tok::Ident(c)) => (c, flip(*op), *k),
                _ => return Err(syntax(n, format!("malformed constraint `{}`", part.trim()))),
            };
            let clock = clocks
                .iter()
                .position(|c| c == atom.0)
                .ok_or_else(|| diag(n, ModelErrorKind::UnknownClock(atom.0.clone())))?;
            atoms.push(Atom {
                clock,
                cmp: atom.1,
                bound: atom.2,
            });
        }
    }
    Ok(Guard { atoms })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_STEP: &str = "\
clocks x y
location l0 initial
location l1
location lf target
edge l0 -> l1 action a guard \"0<=x<=1 & 0<=y<=1\" reset y
edge l1 -> lf action b guard \"1<=x<=2 & 0<=y<=1\"
";

    fn kinds(text: &str) -> Vec<ModelErrorKind> {
        parse_model(text).unwrap_err().0.into_iter().map(|d| d.kind).collect()
    }

    #[test]
    fn chained_guards() {
        let g = parse_guard("0<=x<=1 & y > 2", &["x".into(), "y".into()], 1).unwrap();
        assert_eq!(g.atoms.len(), 3);
        assert_eq!(g.atoms[0], Atom { clock: 0, cmp: Cmp::Ge, bound: 0 });
        assert_eq!(g.atoms[2], Atom { clock: 1, cmp: Cmp::Gt, bound: 2 });
    }

    #[test]
    fn two_step_parses() {
        let m = parse_model(TWO_STEP).unwrap();
        assert_eq!(m.locations.len(), 3);
        assert_eq!(m.transitions[0].reset, vec![1]);
        assert_eq!(m.target, 2);
    }

    #[test]
    fn duplicate_action() {
        let text = format!("{TWO_STEP}edge l0 -> lf action a\n");
        assert_eq!(kinds(&text), vec![ModelErrorKind::DuplicateAction("l0".into(), "a".into())]);
    }

    #[test]
    fn solver_restrictions() {
        let cyclic = format!("{TWO_STEP}edge l1 -> l0 action c\n");
        assert!(matches!(kinds(&cyclic)[..], [ModelErrorKind::Cycle(_)]));
        assert!(parse_model_lenient(&cyclic).is_ok());
        let strict = TWO_STEP.replace("1<=x<=2", "1<x<=2");
        assert!(matches!(kinds(&strict)[..], [ModelErrorKind::StrictGuard(_)]));
    }

    #[test]
    fn reported_errors() {
        let k = kinds("clocks x\nlocation a initial target\nedge a -> b action go guard \"z <= 1\"\n");
        assert_eq!(
            k,
            vec![ModelErrorKind::UnknownLocation("b".into()), ModelErrorKind::UnknownClock("z".into())]
        );
        let k = kinds("clocks x\nlocation a target\nedge a -> a action go guard \"x <= 99999999999999999999\"\n");
        assert!(matches!(k[..], [ModelErrorKind::ConstantOverflow(_)]));
        assert!(matches!(kinds("clocks x\nlocation a\n")[..], [ModelErrorKind::NoTarget]));
        let e = parse_model("clocks x\nlocation a target\nedge a -> a action go guard \"x <= 1/2\"\n").unwrap_err();
        assert_eq!(e.0[0].line, 3);
    }
}
