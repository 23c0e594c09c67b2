//! Lattice submodular minimisation: exact enumeration, and projected
//! subgradient descent on the extension with threshold rounding.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::extension::{greedy_chain, RhoProfile};
use crate::lattice::{LatticePoint, DEFAULT_CAP};
use crate::oracle::Oracle;
use crate::solvers::pav::project_profile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgradientOptions {
    pub iterations: usize,
    /// Base step `eta`; the step at iteration `t` is `eta / sqrt(t)` along the
    /// normalised subgradient. Defaults to half the diameter of the profile box.
    pub step: Option<f64>,
    /// Starting value of every profile entry.
    pub start: f64,
}

impl Default for SubgradientOptions {
    fn default() -> Self {
        Self { iterations: 500, step: None, start: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SfmMethod {
    BruteForce { cap: usize },
    Subgradient(SubgradientOptions),
}

impl Default for SfmMethod {
    fn default() -> Self {
        SfmMethod::BruteForce { cap: DEFAULT_CAP }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityInfo {
    /// Smallest extension value seen over the iterates.
    pub best_extension: f64,
    /// `best_extension - value`; non-negative up to rounding.
    pub rounding_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SfmResult {
    pub minimizer: LatticePoint,
    pub value: f64,
    pub method: SfmMethod,
    pub duality: Option<DualityInfo>,
    pub iterations: usize,
}

/// Exact minimum by enumeration; the lexicographically smallest minimiser wins ties.
pub fn brute_force_minimize(v: &Oracle, cap: usize) -> Result<(LatticePoint, f64)> {
    extreme(v, cap, |a, b| a < b)
}

/// Exact maximum by enumeration, lexicographic ties.
pub fn brute_force_maximize(v: &Oracle, cap: usize) -> Result<(LatticePoint, f64)> {
    extreme(v, cap, |a, b| a > b)
}

fn extreme(v: &Oracle, cap: usize, better: impl Fn(f64, f64) -> bool) -> Result<(LatticePoint, f64)> {
    let d = v.domain();
    d.ensure_within_cap(cap)?;
    let mut best: Option<(LatticePoint, f64)> = None;
    for x in d.points() {
        let val = v.eval(&x);
        if best.as_ref().is_none_or(|(_, b)| better(val, *b)) {
            best = Some((x, val));
        }
    }
    Ok(best.expect("domains are never empty"))
}

pub fn minimize_submodular(f: &Oracle, method: SfmMethod) -> Result<SfmResult> {
    match method {
        SfmMethod::BruteForce { cap } => {
            let (minimizer, value) = brute_force_minimize(f, cap)?;
            Ok(SfmResult { minimizer, value, method, duality: None, iterations: 0 })
        }
        SfmMethod::Subgradient(opts) => Ok(subgradient(f, opts, method)),
    }
}

struct Incumbent {
    point: LatticePoint,
    value: f64,
}

impl Incumbent {
    fn offer(&mut self, p: &LatticePoint, value: f64) {
        if value < self.value || (value == self.value && *p < self.point) {
            self.point = p.clone();
            self.value = value;
        }
    }
}

/// Projected subgradient on the extension.
///
/// The greedy weights at `rho` are a subgradient; each step moves against the
/// normalised subgradient and projects every coordinate back onto
/// non-increasing profiles in `[0, 1]`. Every chain walked by the greedy
/// evaluation passes through lattice points whose values are already known,
/// so the best of them is kept alongside the threshold rounding of the best
/// profile. The returned value therefore never exceeds the best extension
/// value seen.
fn subgradient(f: &Oracle, opts: SubgradientOptions, method: SfmMethod) -> SfmResult {
    let d = f.domain();
    let r = d.chain_length();
    let eta = opts.step.unwrap_or(0.5 * (r as f64).sqrt());
    let mut rho = RhoProfile::uniform(d, opts.start.clamp(0.0, 1.0));
    let mut best_rho = rho.clone();
    let mut best_ext = f64::INFINITY;
    let zero = d.zero();
    let f0 = f.eval(&zero);
    let mut incumbent = Incumbent { value: f0, point: zero };
    let mut iterations = 0;

    for t in 1..=opts.iterations.max(1) {
        iterations = t;
        let chain = greedy_chain(d, &rho);
        let mut p = d.zero();
        let mut prev = f0;
        let mut ext = f0;
        let mut grad: Vec<Vec<f64>> = d.sizes().iter().map(|&k| vec![0.0; k - 1]).collect();
        for &i in chain.increments() {
            p.0[i] += 1;
            let cur = f.eval(&p);
            incumbent.offer(&p, cur);
            let w = cur - prev;
            grad[i][p[i] - 1] = w;
            ext += w * rho.values[i][p[i] - 1];
            prev = cur;
        }
        if ext < best_ext {
            best_ext = ext;
            best_rho = rho.clone();
        }
        let norm = grad.iter().flatten().map(|w| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let step = eta / (t as f64).sqrt() / norm;
        for (r_i, g_i) in rho.values.iter_mut().zip(&grad) {
            let moved: Vec<f64> = r_i.iter().zip(g_i).map(|(r, g)| r - step * g).collect();
            *r_i = project_profile(&moved);
        }
    }

    for p in threshold_points(&best_rho) {
        let val = f.eval(&p);
        incumbent.offer(&p, val);
    }
    SfmResult {
        minimizer: incumbent.point,
        value: incumbent.value,
        method,
        duality: Some(DualityInfo { best_extension: best_ext, rounding_gap: best_ext - incumbent.value }),
        iterations,
    }
}

/// Lattice points `x(t)` for every distinct profile value `t` in `(0, 1]`,
/// plus `0` (the level set for thresholds above every entry).
pub fn threshold_points(rho: &RhoProfile) -> Vec<LatticePoint> {
    let mut ts: Vec<f64> = rho.values.iter().flatten().copied().filter(|&t| t > 0.0 && t <= 1.0).collect();
    ts.sort_by(|a, b| b.partial_cmp(a).expect("profiles hold no NaN"));
    ts.dedup();
    let n = rho.values.len();
    let mut out = vec![LatticePoint(vec![0; n])];
    for t in ts {
        out.push(rho.threshold(t).expect("t lies in (0, 1]"));
    }
    out.dedup();
    out
}
