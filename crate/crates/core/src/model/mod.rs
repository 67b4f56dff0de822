//! Timed automata and turn-based timed games with a designated target.

mod parse;

pub use parse::{parse_model, parse_model_lenient};

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{EngineError, StepError};
use crate::numerics::{AffineExpr, ExtendedRational, Rational};
use crate::polyhedra::{Constraint, Polyhedron};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

/// `clock ∼ bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub clock: usize,
    pub cmp: Cmp,
    pub bound: i64,
}

impl Atom {
    pub fn is_strict(&self) -> bool {
        matches!(self.cmp, Cmp::Lt | Cmp::Gt)
    }

    pub fn holds(&self, v: &[Rational]) -> bool {
        let x = &v[self.clock];
        let n = Rational::from_integer(self.bound.into());
        match self.cmp {
            Cmp::Lt => *x < n,
            Cmp::Le => *x <= n,
            Cmp::Eq => *x == n,
            Cmp::Ge => *x >= n,
            Cmp::Gt => *x > n,
        }
    }

    fn constraints(&self) -> Vec<Constraint> {
        let x = AffineExpr::var(self.clock);
        let n = AffineExpr::from_rational(Rational::from_integer(self.bound.into()));
        match self.cmp {
            Cmp::Lt => vec![Constraint::lt_of(&x, &n)],
            Cmp::Le => vec![Constraint::le_of(&x, &n)],
            Cmp::Eq => vec![Constraint::le_of(&x, &n), Constraint::le_of(&n, &x)],
            Cmp::Ge => vec![Constraint::le_of(&n, &x)],
            Cmp::Gt => vec![Constraint::lt_of(&n, &x)],
        }
    }
}

/// A conjunction of atoms; the empty conjunction is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Guard {
    pub atoms: Vec<Atom>,
}

/// Closed interval of values for one clock; `hi` may be `+inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockInterval {
    pub lo: Rational,
    pub hi: ExtendedRational,
}

impl Guard {
    pub fn holds(&self, v: &[Rational]) -> bool {
        self.atoms.iter().all(|a| a.holds(v))
    }

    pub fn and(&self, other: &Guard) -> Guard {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Guard { atoms }
    }

    pub fn to_polyhedron(&self, clocks: usize) -> Polyhedron {
        Polyhedron::from_constraints(clocks, self.atoms.iter().flat_map(Atom::constraints))
    }

    /// Per-clock closed hull `[L^c, U^c]`; `None` when some clock has an
    /// empty range.
    pub fn intervals(&self, clocks: usize) -> Option<Vec<ClockInterval>> {
        let mut out = vec![
            ClockInterval {
                lo: Rational::zero(),
                hi: ExtendedRational::PosInf,
            };
            clocks
        ];
        for a in &self.atoms {
            let n = Rational::from_integer(a.bound.into());
            let iv = &mut out[a.clock];
            if matches!(a.cmp, Cmp::Lt | Cmp::Le | Cmp::Eq) && ExtendedRational::Finite(n.clone()) < iv.hi {
                iv.hi = ExtendedRational::Finite(n.clone());
            }
            if matches!(a.cmp, Cmp::Gt | Cmp::Ge | Cmp::Eq) && n > iv.lo {
                iv.lo = n;
            }
        }
        out.iter()
            .all(|iv| ExtendedRational::Finite(iv.lo.clone()) <= iv.hi)
            .then_some(out)
    }

    pub fn max_constant(&self) -> i64 {
        self.atoms.iter().map(|a| a.bound).max().unwrap_or(0)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.atoms.is_empty() {
            return "true".into();
        }
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                let op = match a.cmp {
                    Cmp::Lt => "<",
                    Cmp::Le => "<=",
                    Cmp::Eq => "==",
                    Cmp::Ge => ">=",
                    Cmp::Gt => ">",
                };
                format!("{} {} {}", names[a.clock], op, a.bound)
            })
            .collect();
        parts.join(" & ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Owner {
    Player,
    Opponent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: Guard,
    pub owner: Owner,
    pub initial: bool,
    pub target: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: usize,
    pub guard: Guard,
    pub action: String,
    pub reset: Vec<usize>,
    pub destination: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedAutomatonSpec {
    pub clocks: Vec<String>,
    pub locations: Vec<Location>,
    pub transitions: Vec<Transition>,
    pub initial: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub location: usize,
    pub valuation: Vec<Rational>,
}

/// A proposed move: an interval of delays and an action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub alpha: Rational,
    pub beta: ExtendedRational,
    pub action: String,
}

/// Legal delays for one action: the closed interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayInterval {
    pub lo: Rational,
    pub hi: ExtendedRational,
}

impl TimedAutomatonSpec {
    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn outgoing(&self, loc: usize) -> impl Iterator<Item = (usize, &Transition)> {
        self.transitions.iter().enumerate().filter(move |(_, t)| t.source == loc)
    }

    pub fn transition(&self, loc: usize, action: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.source == loc && t.action == action)
    }

    /// Every location has at most one outgoing transition.
    pub fn is_linear(&self) -> bool {
        (0..self.locations.len()).all(|l| self.outgoing(l).count() <= 1)
    }

    pub fn has_opponent(&self) -> bool {
        self.locations.iter().any(|l| l.owner == Owner::Opponent)
    }

    /// Largest integer constant appearing in a guard or invariant.
    pub fn max_constant(&self) -> i64 {
        let g = self.transitions.iter().map(|t| t.guard.max_constant());
        let i = self.locations.iter().map(|l| l.invariant.max_constant());
        g.chain(i).max().unwrap_or(0)
    }

    pub fn initial_config(&self) -> Config {
        Config {
            location: self.initial,
            valuation: vec![Rational::zero(); self.num_clocks()],
        }
    }

    /// A location on a directed cycle, if any.
    pub fn find_cycle(&self) -> Option<usize> {
        // 0 unvisited, 1 on stack, 2 done
        let n = self.locations.len();
        let mut state = vec![0u8; n];
        for root in 0..n {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, self.successors(root))];
            state[root] = 1;
            while let Some((node, succ)) = stack.last_mut() {
                match succ.pop() {
                    Some(s) if state[s] == 1 => return Some(s),
                    Some(s) if state[s] == 0 => {
                        state[s] = 1;
                        let next = self.successors(s);
                        stack.push((s, next));
                    }
                    Some(_) => {}
                    None => {
                        state[*node] = 2;
                        stack.pop();
                    }
                }
            }
        }
        None
    }

    fn successors(&self, loc: usize) -> Vec<usize> {
        self.outgoing(loc).map(|(_, t)| t.destination).collect()
    }

    /// Longest number of transitions from `loc` to the target; `None` when
    /// the target is unreachable.
    pub fn longest_path_length(&self, loc: usize) -> Result<Option<usize>, EngineError> {
        if self.find_cycle().is_some() {
            return Err(EngineError::CycleDetected);
        }
        let mut memo = HashMap::new();
        Ok(self.longest_from(loc, &mut memo))
    }

    fn longest_from(&self, loc: usize, memo: &mut HashMap<usize, Option<usize>>) -> Option<usize> {
        if loc == self.target {
            return Some(0);
        }
        if let Some(&r) = memo.get(&loc) {
            return r;
        }
        let r = self
            .successors(loc)
            .into_iter()
            .filter_map(|s| self.longest_from(s, memo))
            .max()
            .map(|k| k + 1);
        memo.insert(loc, r);
        r
    }

    /// Delays `d` with `v + d` satisfying the guard of `action` and the
    /// invariant of the current location; strict atoms are closed.
    pub fn moves_at(&self, c: &Config, action: &str) -> Option<DelayInterval> {
        let t = self.transition(c.location, action)?;
        let g = t.guard.and(&self.locations[c.location].invariant);
        let ivs = g.intervals(self.num_clocks())?;
        let mut lo = Rational::zero();
        let mut hi = ExtendedRational::PosInf;
        for (iv, x) in ivs.iter().zip(&c.valuation) {
            let l = &iv.lo - x;
            if l > lo {
                lo = l;
            }
            if let ExtendedRational::Finite(u) = &iv.hi {
                let u = ExtendedRational::Finite(u - x);
                if u < hi {
                    hi = u;
                }
            }
        }
        (ExtendedRational::Finite(lo.clone()) <= hi).then_some(DelayInterval { lo, hi })
    }

    /// Delays by `d` and fires `action`.
    pub fn step(&self, c: &Config, d: &Rational, action: &str) -> Result<Config, StepError> {
        let t = self
            .transition(c.location, action)
            .ok_or_else(|| StepError::NoSuchTransition(action.to_string()))?;
        let delayed: Vec<Rational> = c.valuation.iter().map(|x| x + d).collect();
        if !self.locations[c.location].invariant.holds(&delayed) {
            return Err(StepError::InvariantViolated);
        }
        if !t.guard.holds(&delayed) {
            return Err(StepError::GuardViolated);
        }
        let mut next = delayed;
        for &r in &t.reset {
            next[r] = Rational::zero();
        }
        if t.destination != self.target && !self.locations[t.destination].invariant.holds(&next) {
            return Err(StepError::InvariantViolated);
        }
        Ok(Config {
            location: t.destination,
            valuation: next,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    pub(crate) const TWO_STEP: &str = "\
clocks x y
location l0 initial
location l1
location lf target
edge l0 -> l1 action a guard \"0<=x<=1 & 0<=y<=1\" reset y
edge l1 -> lf action b guard \"1<=x<=2 & 0<=y<=1\"
";

    fn cfg(loc: usize, x: Rational, y: Rational) -> Config {
        Config {
            location: loc,
            valuation: vec![x, y],
        }
    }

    #[test]
    fn two_step_structure() {
        let m = parse_model(TWO_STEP).unwrap();
        assert!(m.is_linear());
        assert_eq!(m.longest_path_length(0).unwrap(), Some(2));
        assert_eq!(m.longest_path_length(2).unwrap(), Some(0));
        assert_eq!(m.max_constant(), 2);
    }

    #[test]
    fn steps() {
        let m = parse_model(TWO_STEP).unwrap();
        let c = m.step(&cfg(0, int(0), int(0)), &rat(1, 2), "a").unwrap();
        assert_eq!(c, cfg(1, rat(1, 2), int(0)));
        let c = m.step(&cfg(0, rat(1, 2), int(1)), &int(0), "a").unwrap();
        assert_eq!(c, cfg(1, rat(1, 2), int(0)));
        assert_eq!(m.step(&cfg(0, int(0), int(0)), &rat(3, 2), "a"), Err(StepError::GuardViolated));
        assert!(matches!(m.step(&cfg(0, int(0), int(0)), &int(0), "b"), Err(StepError::NoSuchTransition(_))));
    }

    #[test]
    fn delay_intervals() {
        let m = parse_model(TWO_STEP).unwrap();
        let iv = m.moves_at(&cfg(1, rat(1, 2), int(0)), "b").unwrap();
        assert_eq!((iv.lo, iv.hi), (rat(1, 2), ExtendedRational::Finite(int(1))));
        assert_eq!(m.moves_at(&cfg(0, int(2), int(0)), "a"), None);
        let free = parse_model("clocks x\nlocation a initial\nlocation b target\nedge a -> b action go\n").unwrap();
        let iv = free.moves_at(&free.initial_config(), "go").unwrap();
        assert_eq!((iv.lo, iv.hi), (int(0), ExtendedRational::PosInf));
    }

    #[test]
    fn moves_agree_with_step() {
        let m = parse_model(TWO_STEP).unwrap();
        for (loc, act) in [(0, "a"), (1, "b")] {
            for (i, j) in [(0, 0), (3, 1), (8, 0), (12, 4), (20, 2)] {
                let c = cfg(loc, rat(i, 16), rat(j, 16));
                let iv = m.moves_at(&c, act);
                for k in 0..=64 {
                    let d = rat(k, 16);
                    let inside = iv
                        .as_ref()
                        .is_some_and(|iv| iv.lo <= d && ExtendedRational::Finite(d.clone()) <= iv.hi);
                    assert_eq!(m.step(&c, &d, act).is_ok(), inside, "{c:?} {d}");
                }
            }
        }
    }
}
