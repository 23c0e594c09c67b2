//! Curvature bounds, the split of a submodular function into a separable
//! quadratic plus a DR-submodular residual, and modular upper bounds that are
//! tight at an anchor point.

use serde::{Deserialize, Serialize};

use crate::checks::second_difference_within;
use crate::error::{Error, Result};
use crate::lattice::{LatticeDomain, LatticePoint};
use crate::oracle::Oracle;
use crate::separable::SeparableFunction;

/// `f = quad + residual` with `quad = lambda * sum_i x_i^2`.
#[derive(Debug, Clone)]
pub struct DrDecomposition {
    pub lambda: f64,
    pub quad: SeparableFunction,
    pub residual: Oracle,
}

/// Largest within-coordinate second difference of `f`, floored at 0.
pub fn lambda_bruteforce(f: &Oracle, cap: usize) -> Result<f64> {
    let d = f.domain();
    d.ensure_within_cap(cap)?;
    let mut lambda = 0.0f64;
    for x in d.points() {
        for i in 0..d.n() {
            if x[i] + 2 < d.levels(i) {
                lambda = lambda.max(second_difference_within(f, &x, i)?);
            }
        }
    }
    Ok(lambda)
}

/// Curvature bound for `x^T A x + b^T x + c`: the within-coordinate second
/// difference of `x^T A x` is `2 A_ii`, so this returns `max(0, 2 max_i A_ii)`.
pub fn lambda_quadratic(a: &[Vec<f64>]) -> Result<f64> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(Error::arg("quadratic form must be a non-empty square matrix"));
    }
    Ok(a.iter().enumerate().map(|(i, row)| 2.0 * row[i]).fold(0.0, f64::max))
}

/// Splits off `lambda * sum_i x_i^2`. With `lambda` at least
/// [`lambda_bruteforce`] the residual is DR-submodular whenever `f` is
/// submodular: the quadratic leaves cross differences untouched and lowers
/// every within difference by `2 lambda`.
pub fn dr_split(f: &Oracle, lambda: f64) -> Result<DrDecomposition> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::arg(format!("lambda must be finite and non-negative, got {lambda}")));
    }
    let quad = SeparableFunction::squares(f.domain(), lambda);
    let residual = f.minus_separable(&quad);
    Ok(DrDecomposition { lambda, quad, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// Lowering costs are measured at the anchor, raising gains at 0.
    Grow1,
    /// Lowering costs are measured at `k_max`, raising gains at the anchor.
    Grow2,
    /// Like `Grow1` but raising gains are measured at `min(x, y)`.
    Tight1,
    /// Like `Grow2` but lowering costs are measured at `max(x, y)`.
    Tight2,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 4] =
        [BoundVariant::Grow1, BoundVariant::Grow2, BoundVariant::Tight1, BoundVariant::Tight2];

    pub fn is_separable(self) -> bool {
        matches!(self, BoundVariant::Grow1 | BoundVariant::Grow2)
    }
}

/// An upper bound tight at its anchor.
///
/// The grow variants are modular. The tight variants anchor their marginals
/// at `min(x, y)` or `max(x, y)`, which couples coordinates, so they are kept
/// as evaluable functions.
#[derive(Debug, Clone)]
pub enum UpperBound {
    Separable(SeparableFunction),
    Anchored(AnchoredBound),
}

impl UpperBound {
    pub fn value(&self, y: &[usize]) -> f64 {
        match self {
            UpperBound::Separable(s) => s.value(y),
            UpperBound::Anchored(a) => a.value(y),
        }
    }

    pub fn as_separable(&self) -> Option<&SeparableFunction> {
        match self {
            UpperBound::Separable(s) => Some(s),
            UpperBound::Anchored(_) => None,
        }
    }

    pub fn into_separable(self) -> Option<SeparableFunction> {
        match self {
            UpperBound::Separable(s) => Some(s),
            UpperBound::Anchored(_) => None,
        }
    }

    fn plus(self, quad: &SeparableFunction) -> Self {
        match self {
            UpperBound::Separable(s) => UpperBound::Separable(s.add(quad)),
            UpperBound::Anchored(mut a) => {
                a.offset = Some(match a.offset {
                    Some(o) => o.add(quad),
                    None => quad.clone(),
                });
                UpperBound::Anchored(a)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnchoredBound {
    h: Oracle,
    anchor: LatticePoint,
    h_anchor: f64,
    variant: BoundVariant,
    offset: Option<SeparableFunction>,
}

impl AnchoredBound {
    pub fn anchor(&self) -> &LatticePoint {
        &self.anchor
    }

    pub fn value(&self, y: &[usize]) -> f64 {
        let x = &self.anchor;
        let h = &self.h;
        let mut total = self.h_anchor;
        match self.variant {
            BoundVariant::Tight1 => {
                let lo = x.meet(y);
                let h_lo = h.eval(&lo);
                for i in 0..x.len() {
                    if x[i] > y[i] {
                        total -= self.h_anchor - h.eval(&x.with(i, y[i]));
                    } else if y[i] > x[i] {
                        total += h.eval(&lo.with(i, y[i])) - h_lo;
                    }
                }
            }
            BoundVariant::Tight2 => {
                let hi = x.join(y);
                let h_hi = h.eval(&hi);
                for i in 0..x.len() {
                    if x[i] > y[i] {
                        total -= h_hi - h.eval(&hi.with(i, y[i]));
                    } else if y[i] > x[i] {
                        total += h.eval(&x.with(i, y[i])) - self.h_anchor;
                    }
                }
            }
            BoundVariant::Grow1 | BoundVariant::Grow2 => {
                unreachable!("grow variants are built as separable functions")
            }
        }
        total + self.offset.as_ref().map_or(0.0, |o| o.value(y))
    }
}

/// Modular-or-anchored upper bound of a DR-submodular `h`, tight at `x`.
///
/// For each coordinate the contribution of level `l` is zero at `l = x_i`;
/// below the anchor it subtracts a lowering cost, above it adds a raising
/// gain (see [`BoundVariant`]). DR-submodularity of `h` is trusted, not checked.
pub fn mub_dr(h: &Oracle, x: &[usize], variant: BoundVariant) -> Result<UpperBound> {
    let d = h.domain();
    d.check_point(x)?;
    let anchor = LatticePoint(x.to_vec());
    let h_x = h.eval(x);
    match variant {
        BoundVariant::Grow1 => {
            let zero = d.zero();
            let h_0 = h.eval(&zero);
            Ok(UpperBound::Separable(separable_bound(d, &anchor, h_x, |i, l| {
                if l < x[i] {
                    -(h_x - h.eval(&anchor.with(i, l)))
                } else {
                    h.eval(&zero.with(i, l - x[i])) - h_0
                }
            })))
        }
        BoundVariant::Grow2 => {
            let top = d.k_max();
            let h_top = h.eval(&top);
            Ok(UpperBound::Separable(separable_bound(d, &anchor, h_x, |i, l| {
                if l < x[i] {
                    -(h_top - h.eval(&top.with(i, top[i] - (x[i] - l))))
                } else {
                    h.eval(&anchor.with(i, l)) - h_x
                }
            })))
        }
        BoundVariant::Tight1 | BoundVariant::Tight2 => Ok(UpperBound::Anchored(AnchoredBound {
            h: h.clone(),
            anchor,
            h_anchor: h_x,
            variant,
            offset: None,
        })),
    }
}

fn separable_bound(
    d: &LatticeDomain,
    anchor: &LatticePoint,
    h_x: f64,
    mut contribution: impl FnMut(usize, usize) -> f64,
) -> SeparableFunction {
    let levels: Vec<Vec<f64>> = (0..d.n())
        .map(|i| (0..d.levels(i)).map(|l| if l == anchor[i] { 0.0 } else { contribution(i, l) }).collect())
        .collect();
    SeparableFunction::from_levels(h_x, &levels)
}

/// Upper bound of a submodular `f`, tight at `x`: the quadratic part of the
/// split plus [`mub_dr`] of the residual. `lambda` must cover the curvature
/// of `f` (at least [`lambda_bruteforce`]) for the bound to hold.
pub fn upper_bound_full(f: &Oracle, lambda: f64, x: &[usize], variant: BoundVariant) -> Result<UpperBound> {
    let split = dr_split(f, lambda)?;
    Ok(mub_dr(&split.residual, x, variant)?.plus(&split.quad))
}
