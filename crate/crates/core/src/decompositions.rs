//! Difference-of-submodular problems, modular-plus-monotone decompositions,
//! additive lower bounds on `min v`, and the construction of a DS
//! representation for an arbitrary lattice function.

use serde::Serialize;

use crate::checks::{check_monotone, check_submodular, second_difference_cross, Verdict};
use crate::error::{Error, Result};
use crate::lattice::{LatticeDomain, LatticePoint};
use crate::oracle::Oracle;
use crate::separable::SeparableFunction;
use crate::solvers::brute_force_minimize;
use crate::upper_bounds::{dr_split, lambda_bruteforce};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Native,
    /// Built by [`ds_construct`] from a raw objective.
    Constructed { n_bound: f64, m_ref: f64, reference: String },
}

/// Objective `v = f - g` with `f` and `g` lattice submodular.
#[derive(Debug, Clone)]
pub struct DsProblem {
    pub f: Oracle,
    pub g: Oracle,
    pub provenance: Provenance,
    /// Known curvature bound for `f`, e.g. from a quadratic form.
    pub lambda_hint: Option<f64>,
}

impl DsProblem {
    pub fn new(f: Oracle, g: Oracle) -> Result<Self> {
        if f.domain() != g.domain() {
            return Err(Error::InvalidDomain(format!(
                "f has sizes {:?} but g has sizes {:?}",
                f.domain().sizes(),
                g.domain().sizes()
            )));
        }
        Ok(Self { f, g, provenance: Provenance::Native, lambda_hint: None })
    }

    pub fn domain(&self) -> &LatticeDomain {
        self.f.domain()
    }

    pub fn v(&self, x: &[usize]) -> f64 {
        self.f.eval(x) - self.g.eval(x)
    }

    pub fn v_oracle(&self) -> Oracle {
        self.f.minus(&self.g)
    }

    /// Checks both parts for submodularity on domains within `cap`.
    pub fn validate(&self, cap: usize) -> Result<()> {
        for (name, h) in [("f", &self.f), ("g", &self.g)] {
            if let Verdict::Violated(witness) = check_submodular(h, cap)? {
                return Err(Error::Validation { what: format!("{name} (submodularity)"), witness });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMethod {
    MinMarginal,
    Harmonic,
}

/// `modular_part + monotone_part` reproduces `f` (or `f - f(0)` when
/// normalised), with `monotone_part(0) = 0`.
#[derive(Debug, Clone)]
pub struct MonotoneDecomposition {
    pub modular_part: SeparableFunction,
    pub monotone_part: Oracle,
    pub method: DecompositionMethod,
    /// Result of checking the monotone part, when it was checked.
    pub monotone_verdict: Option<Verdict>,
}

/// Splits a DR-submodular `f` into linear slopes
/// `delta_k = f(k_max) - f(k_max - e_k)` plus a monotone remainder.
///
/// Every marginal of a DR function is at least the marginal at the top of
/// the lattice, so the remainder is non-decreasing. When `verify_cap` is set
/// the input is checked for DR-submodularity first.
pub fn min_marginal_decomposition(
    f: &Oracle,
    normalize: bool,
    verify_cap: Option<usize>,
) -> Result<MonotoneDecomposition> {
    if let Some(cap) = verify_cap {
        if let Verdict::Violated(witness) = crate::checks::check_dr(f, cap)? {
            return Err(Error::Validation { what: "input (DR-submodularity)".into(), witness });
        }
    }
    let d = f.domain();
    let top = d.k_max();
    let f_top = f.eval(&top);
    let slopes: Vec<f64> = (0..d.n()).map(|k| f_top - f.eval(&top.with(k, top[k] - 1))).collect();
    let f0 = f.eval(&d.zero());
    let mut modular_part = SeparableFunction::linear(d, &slopes);
    if !normalize {
        modular_part.constant = f0;
    }
    let monotone_part = f.minus_separable(&SeparableFunction { constant: f0, ..modular_part.clone() });
    Ok(MonotoneDecomposition {
        modular_part,
        monotone_part,
        method: DecompositionMethod::MinMarginal,
        monotone_verdict: None,
    })
}

/// The harmonic decomposition `g(y) = sum_k sum_{j <= y_k} m_{j,k} / j` with
/// `m_{j,k} = f(k_max) - f(k_max - j e_k)`, applied to `f - f(0)`.
///
/// The remainder is not always monotone (for `sqrt` on three levels it is
/// not), so the verdict of [`check_monotone`] is attached rather than
/// assumed. Above `cap` the verdict is left empty.
pub fn harmonic_decomposition(f: &Oracle, cap: usize) -> Result<MonotoneDecomposition> {
    let d = f.domain();
    let top = d.k_max();
    let f_top = f.eval(&top);
    let f0 = f.eval(&d.zero());
    let increments = (0..d.n())
        .map(|k| (1..d.levels(k)).map(|j| (f_top - f.eval(&top.with(k, top[k] - j))) / j as f64).collect())
        .collect();
    let modular_part = SeparableFunction::new(0.0, increments);
    let monotone_part = f.minus_separable(&SeparableFunction { constant: f0, ..modular_part.clone() });
    let monotone_verdict = match check_monotone(&monotone_part, cap) {
        Ok(v) => Some(v),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(MonotoneDecomposition {
        modular_part,
        monotone_part,
        method: DecompositionMethod::Harmonic,
        monotone_verdict,
    })
}

/// `f = modular + monotone_submodular` with `monotone_submodular(0) = 0`.
///
/// Splits off `lambda * sum x_i^2` with the brute-force curvature, then the
/// min-marginal slopes of the DR residual. The modular part carries `f(0)`.
pub fn monotone_submodular_split(f: &Oracle, cap: usize) -> Result<(SeparableFunction, Oracle)> {
    let lambda = lambda_bruteforce(f, cap)?;
    let split = dr_split(f, lambda)?;
    let dec = min_marginal_decomposition(&split.residual, true, None)?;
    let mut modular = split.quad.add(&dec.modular_part);
    modular.constant = f.eval(&f.domain().zero());
    Ok((modular, dec.monotone_part))
}

/// Additive lower bounds on `min v`.
///
/// With `f = k_f + f'` and `g = k_g + g'` (modular `k` with zero constant,
/// monotone `f'`, `g'` carrying `f(0)`, `g(0)`), and `k = k_f - k_g`:
/// `bound1 = min_x (f' + k)(x) - g'(k_max)` and
/// `bound2 = f'(0) - g'(k_max) + sum_i min_y prefix_i(k)(y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditiveBounds {
    /// `None` when the inner minimisation could not be solved exactly.
    pub bound1: Option<f64>,
    pub bound2: f64,
    pub f_prime_zero: f64,
    pub g_prime_top: f64,
    /// The modular part `k` of the decomposed objective.
    pub modular: SeparableFunction,
}

impl AdditiveBounds {
    /// `f'(0) - g'(k_max)`.
    pub fn top_gap(&self) -> f64 {
        self.f_prime_zero - self.g_prime_top
    }

    /// `f''(0) - g''(k_max)` for `v = f'' - g''` with both parts monotone:
    /// the positive increments of `k` move into `f'`, the negative ones into
    /// `g'`. Unlike [`top_gap`](Self::top_gap) this is a lower bound on `v`.
    pub fn monotone_gap(&self) -> f64 {
        let negative: f64 = self.modular.increments.iter().flatten().map(|w| w.min(0.0)).sum();
        self.top_gap() + negative
    }
}

pub fn additive_lower_bounds(p: &DsProblem, cap: usize) -> Result<AdditiveBounds> {
    let d = p.domain();
    let (kf, mf) = monotone_submodular_split(&p.f, cap)?;
    let (kg, mg) = monotone_submodular_split(&p.g, cap)?;
    let (f0, g0) = (kf.constant, kg.constant);
    let mut modular = kf.sub(&kg);
    modular.constant = 0.0;

    let f_prime_zero = f0;
    let g_prime_top = g0 + mg.eval(&d.k_max());

    let inner = mf.plus_separable(&SeparableFunction { constant: f0, ..modular.clone() });
    let bound1 = match brute_force_minimize(&inner, cap) {
        Ok((_, value)) => Some(value - g_prime_top),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let scan: f64 = (0..d.n())
        .map(|i| modular.prefixes(i).into_iter().fold(f64::INFINITY, f64::min))
        .sum();
    Ok(AdditiveBounds {
        bound1,
        bound2: f_prime_zero - g_prime_top + scan,
        f_prime_zero,
        g_prime_top,
        modular,
    })
}

/// Largest `|cross second difference|` of `v` and where it occurs
/// (`(x, i, j)`); `None` when every difference is zero.
pub fn second_difference_extremes(v: &Oracle, cap: usize) -> Result<(f64, Option<(LatticePoint, usize, usize)>)> {
    let d = v.domain();
    d.ensure_within_cap(cap)?;
    let mut best = 0.0f64;
    let mut witness = None;
    for x in d.points() {
        for i in 0..d.n() {
            if x[i] + 1 >= d.levels(i) {
                continue;
            }
            for j in i + 1..d.n() {
                if x[j] + 1 >= d.levels(j) {
                    continue;
                }
                let dd = second_difference_cross(v, &x, i, j)?.abs();
                if dd > best {
                    best = dd;
                    witness = Some((x.clone(), i, j));
                }
            }
        }
    }
    Ok((best, witness))
}

/// `g(x) = sum_i x_i^2 - 4 sum_{i<j} x_i x_j`, whose every cross second
/// difference is exactly `-4`. Returns `g` and the magnitude 4.
pub fn reference_quadratic(domain: &LatticeDomain) -> Result<(Oracle, f64)> {
    if domain.n() < 2 {
        return Err(Error::arg("the reference quadratic needs at least two coordinates"));
    }
    let g = Oracle::from_fn(domain.clone(), |x| {
        let mut sq = 0.0;
        let mut cross = 0.0;
        for (i, &a) in x.iter().enumerate() {
            sq += (a * a) as f64;
            for &b in &x[i + 1..] {
                cross += (a * b) as f64;
            }
        }
        sq - 4.0 * cross
    });
    Ok((g, 4.0))
}

/// Writes `v = f - g` with `g = (n_bound / m_ref) g_ref` and `f = v + g`.
///
/// Requires every cross second difference of `g_ref` to be at most `-m_ref`
/// and `n_bound` to dominate `|cross second differences|` of `v`. On domains
/// within `cap` both parts are checked afterwards.
pub fn ds_construct(v: &Oracle, g_ref: &Oracle, m_ref: f64, n_bound: f64, cap: usize) -> Result<DsProblem> {
    if v.domain() != g_ref.domain() {
        return Err(Error::arg("objective and reference live on different domains"));
    }
    if !(m_ref > 0.0) {
        return Err(Error::arg(format!("m_ref must be positive, got {m_ref}")));
    }
    if !(n_bound >= 0.0) {
        return Err(Error::arg(format!("n_bound must be non-negative, got {n_bound}")));
    }
    let scale = n_bound / m_ref;
    let g = if scale == 0.0 { Oracle::constant(v.domain().clone(), 0.0) } else { g_ref.scaled(scale) };
    let f = v.plus(&g);
    let problem = DsProblem {
        f,
        g,
        provenance: Provenance::Constructed { n_bound, m_ref, reference: "reference_quadratic".into() },
        lambda_hint: None,
    };
    if v.domain().ensure_within_cap(cap).is_ok() {
        for (name, h) in [("f", &problem.f), ("g", &problem.g)] {
            if let Verdict::Violated(w) = check_submodular(h, cap)? {
                return Err(Error::Construction(format!(
                    "constructed {name} is not submodular ({w}); n_bound {n_bound} is too small"
                )));
            }
        }
    }
    Ok(problem)
}

/// The brute-force route: `n` from [`second_difference_extremes`] and the
/// reference quadratic.
pub fn auto_split(v: &Oracle, cap: usize) -> Result<DsProblem> {
    let (n_max, _) = second_difference_extremes(v, cap)?;
    let (g_ref, m_ref) = reference_quadratic(v.domain())?;
    ds_construct(v, &g_ref, m_ref, n_max, cap)
}
