//! Second differences and brute-force structural checks.
//!
//! On an integer lattice, `f(x) + f(y) >= f(x ^ y) + f(x v y)` for all pairs
//! is equivalent to every cross second difference being non-positive, which
//! costs `O(N n^2)` evaluations instead of `O(N^2)`.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::lattice::LatticePoint;
use crate::oracle::Oracle;

/// Absolute tolerance for all structural checks.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Cross second difference along coordinates `i < j` is positive.
    Cross { i: usize, j: usize },
    /// Second difference within coordinate `i` is positive.
    Within { i: usize },
    /// `f(x + e_i) < f(x)`.
    Decrease { i: usize },
    /// A base-polyhedron inequality fails at the point.
    BaseInequality,
    /// The base-polyhedron equality at `k_max` fails.
    BaseEquality,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: LatticePoint,
    pub violation: Violation,
    /// The offending quantity: a second difference, a marginal or a slack.
    pub value: f64,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.violation {
            Violation::Cross { i, j } => write!(
                f,
                "cross second difference along ({i}, {j}) at {} is {}",
                self.point, self.value
            ),
            Violation::Within { i } => {
                write!(f, "second difference within {i} at {} is {}", self.point, self.value)
            }
            Violation::Decrease { i } => {
                write!(f, "marginal along {i} at {} is {}", self.point, self.value)
            }
            Violation::BaseInequality => {
                write!(f, "base inequality at {} exceeded by {}", self.point, self.value)
            }
            Violation::BaseEquality => {
                write!(f, "base equality at {} off by {}", self.point, self.value)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated(Witness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds => None,
            Verdict::Violated(w) => Some(w),
        }
    }
}

/// Keeps the worst witness seen so far; earlier witnesses win ties.
#[derive(Default)]
pub(crate) struct Worst(Option<Witness>);

impl Worst {
    pub(crate) fn offer(&mut self, point: &LatticePoint, violation: Violation, value: f64) {
        if self.0.as_ref().is_none_or(|w| value > w.value) {
            self.0 = Some(Witness { point: point.clone(), violation, value });
        }
    }

    pub(crate) fn verdict(self) -> Verdict {
        self.0.map_or(Verdict::Holds, Verdict::Violated)
    }
}

/// `f(x + e_i + e_j) - f(x + e_i) - f(x + e_j) + f(x)`; four evaluations.
pub fn second_difference_cross(f: &Oracle, x: &[usize], i: usize, j: usize) -> Result<f64> {
    let d = f.domain();
    if i == j {
        return Err(crate::Error::arg("cross second difference needs i != j"));
    }
    d.check_point(x)?;
    let xi = d.shift_or_err(x, i, 1)?;
    let xj = d.shift_or_err(x, j, 1)?;
    let xij = d.shift_or_err(&xi, j, 1)?;
    Ok(f.eval(&xij) - f.eval(&xi) - f.eval(&xj) + f.eval(x))
}

/// `f(x + 2 e_i) - 2 f(x + e_i) + f(x)`.
pub fn second_difference_within(f: &Oracle, x: &[usize], i: usize) -> Result<f64> {
    let d = f.domain();
    d.check_point(x)?;
    let x1 = d.shift_or_err(x, i, 1)?;
    let x2 = d.shift_or_err(x, i, 2)?;
    Ok(f.eval(&x2) - 2.0 * f.eval(&x1) + f.eval(x))
}

/// Lattice submodularity via cross second differences; refuses domains above `cap`.
pub fn check_submodular(f: &Oracle, cap: usize) -> Result<Verdict> {
    let d = f.domain();
    d.ensure_within_cap(cap)?;
    let mut worst = Worst::default();
    for x in d.points() {
        for i in 0..d.n() {
            if x[i] + 1 >= d.levels(i) {
                continue;
            }
            for j in i + 1..d.n() {
                if x[j] + 1 >= d.levels(j) {
                    continue;
                }
                let dd = second_difference_cross(f, &x, i, j)?;
                if dd > TOL {
                    worst.offer(&x, Violation::Cross { i, j }, dd);
                }
            }
        }
    }
    Ok(worst.verdict())
}

/// DR-submodularity: submodular and concave along every coordinate.
pub fn check_dr(f: &Oracle, cap: usize) -> Result<Verdict> {
    let verdict = check_submodular(f, cap)?;
    if !verdict.holds() {
        return Ok(verdict);
    }
    let d = f.domain();
    let mut worst = Worst::default();
    for x in d.points() {
        for i in 0..d.n() {
            if x[i] + 2 < d.levels(i) {
                let dd = second_difference_within(f, &x, i)?;
                if dd > TOL {
                    worst.offer(&x, Violation::Within { i }, dd);
                }
            }
        }
    }
    Ok(worst.verdict())
}

/// Monotone non-decreasing along every coordinate. The witness value is the
/// magnitude of the largest decrease.
pub fn check_monotone(f: &Oracle, cap: usize) -> Result<Verdict> {
    let d = f.domain();
    d.ensure_within_cap(cap)?;
    let mut worst = Worst::default();
    for x in d.points() {
        let fx = f.eval(&x);
        for i in 0..d.n() {
            if let Some(y) = d.shift(&x, i, 1) {
                let marginal = f.eval(&y) - fx;
                if marginal < -TOL {
                    worst.offer(&x, Violation::Decrease { i }, -marginal);
                }
            }
        }
    }
    Ok(worst.verdict())
}
