//! Majorisation-minimisation loops for `v = f - g`.
//!
//! Each iteration replaces `f` by a surrogate that is tight at the current
//! point and lies above it (or uses `f` itself), replaces `g` by a surrogate
//! tight at the current point and lying below it (or uses `g` itself), and
//! minimises the resulting upper bound of `v`. Because the bound touches `v`
//! at `x_t`, an exact inner minimiser never increases `v`; inexact inner
//! solvers are compared against `x_t` so the same holds for them.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decompositions::{additive_lower_bounds, DsProblem};
use crate::error::{Error, Result};
use crate::extension::{adjacent_chain_family, chain_containing, lower_bound, Chain, ChainMode};
use crate::lattice::{LatticePoint, DEFAULT_CAP};
use crate::separable::SeparableFunction;
use crate::solvers::{
    maximize_submodular_dg, minimize_separable, minimize_separable_cardinality, minimize_submodular, SfmMethod,
};
use crate::upper_bounds::{lambda_bruteforce, upper_bound_full, BoundVariant};

/// Slack used for "no increase" comparisons between objective values.
pub const DESCENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Exact-`f`, modular lower bound of `g`; inner lattice SFM.
    SubSup,
    /// Modular upper bound of `f`, exact `g`; inner submodular maximisation.
    SupSub,
    /// Both bounds modular; inner separable minimisation.
    ModMod,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::SubSup, Algorithm::SupSub, Algorithm::ModMod];

    fn uses_chains(self) -> bool {
        matches!(self, Algorithm::SubSup | Algorithm::ModMod)
    }

    fn needs_lambda(self) -> bool {
        matches!(self, Algorithm::SupSub | Algorithm::ModMod)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::SubSup => "subsup",
            Algorithm::SupSub => "supsub",
            Algorithm::ModMod => "modmod",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subsup" => Ok(Algorithm::SubSup),
            "supsub" => Ok(Algorithm::SupSub),
            "modmod" => Ok(Algorithm::ModMod),
            other => Err(Error::arg(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Which separable upper bounds of `f` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UbPolicy {
    /// `Grow1` first, then `Grow2` if the first gives no accepted step.
    TryBoth,
    Grow1,
    Grow2,
}

impl UbPolicy {
    fn variants(self) -> &'static [BoundVariant] {
        match self {
            UbPolicy::TryBoth => &[BoundVariant::Grow1, BoundVariant::Grow2],
            UbPolicy::Grow1 => &[BoundVariant::Grow1],
            UbPolicy::Grow2 => &[BoundVariant::Grow2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub max_iters: usize,
    pub chain_mode: ChainMode,
    pub ub_policy: UbPolicy,
    pub sfm: SfmMethod,
    /// Curvature bound for `f`, overriding hints and brute force.
    pub lambda: Option<f64>,
    /// Starting point; the origin when absent.
    pub start: Option<LatticePoint>,
    /// Cardinality budget `sum_i x_i <= B` (ModMod only).
    pub budget: Option<usize>,
    /// Cap for every enumerating step (curvature, iteration bound).
    pub cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::ModMod,
            epsilon: 0.0,
            max_iters: 100,
            chain_mode: ChainMode::Canonical,
            ub_policy: UbPolicy::TryBoth,
            sfm: SfmMethod::default(),
            lambda: None,
            start: None,
            budget: None,
            cap: DEFAULT_CAP,
        }
    }
}

impl SolveOptions {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self { algorithm, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// No step met the acceptance rule, but the point was not certified
    /// (an improving neighbour exists that falls short of the `epsilon` rule).
    Converged,
    IterBudget,
    CertifiedLocalMin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateRecord {
    pub t: usize,
    pub x: LatticePoint,
    pub v: f64,
    pub f: f64,
    pub g: f64,
    /// Surrogate value at `x`; `None` for the start and final records.
    pub surrogate: Option<f64>,
    /// Surrogate value at the anchor the surrogate was built at.
    pub surrogate_at_anchor: Option<f64>,
    pub accepted: bool,
    pub calls_f: u64,
    pub calls_g: u64,
    /// Seconds since the solve started.
    pub wall_secs: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighbourCheck {
    pub coordinate: usize,
    pub direction: i8,
    pub point: LatticePoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub passed: bool,
    pub point: LatticePoint,
    pub value: f64,
    pub neighbours: Vec<NeighbourCheck>,
    /// The lowest neighbour below `value`, when certification fails.
    pub descending: Option<(LatticePoint, f64)>,
    /// Increment orders of the chain family swept at this point.
    pub chain_family: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationBound {
    pub bound: f64,
    /// `f''(0) - g''(k_max)`, a lower bound on `v`.
    pub big_m: f64,
    /// `v(x_1)`.
    pub small_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub status: Status,
    pub minimizer: LatticePoint,
    pub value: f64,
    pub iterates: Vec<IterateRecord>,
    pub accepted_steps: usize,
    pub certificate: Option<Certificate>,
    pub predicted_bound: Option<IterationBound>,
    pub lambda: Option<f64>,
}

impl SolveReport {
    pub fn accepted(&self) -> impl Iterator<Item = &IterateRecord> {
        self.iterates.iter().filter(|r| r.accepted)
    }
}

/// Sign-safe epsilon-approximate acceptance: `v_new <= v_old - eps * |v_old|`,
/// and a strict decrease beyond [`DESCENT_TOL`] when `eps = 0`.
pub fn accept_step(v_old: f64, v_new: f64, epsilon: f64) -> bool {
    if epsilon <= 0.0 {
        v_new < v_old - DESCENT_TOL
    } else {
        v_new <= v_old - epsilon * v_old.abs().max(DESCENT_TOL)
    }
}

/// Direct check that no feasible `x +- e_i` has a lower objective. When a
/// budget is given, neighbours with `sum > budget` are infeasible.
pub fn certify_local_minimum(p: &DsProblem, x: &[usize], budget: Option<usize>) -> Result<Certificate> {
    let d = p.domain();
    d.check_point(x)?;
    let value = p.v(x);
    let mut neighbours = Vec::with_capacity(2 * d.n());
    for i in 0..d.n() {
        for direction in [-1i8, 1] {
            let Some(y) = d.shift(x, i, direction as i64) else { continue };
            if budget.is_some_and(|b| y.total() > b) {
                continue;
            }
            let vy = p.v(&y);
            neighbours.push(NeighbourCheck { coordinate: i, direction, point: y, value: vy });
        }
    }
    let descending = neighbours
        .iter()
        .filter(|c| value > c.value + DESCENT_TOL)
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .map(|c| (c.point.clone(), c.value));
    let chain_family =
        adjacent_chain_family(d, x)?.into_iter().map(|c| c.increments().to_vec()).collect();
    Ok(Certificate {
        passed: descending.is_none(),
        point: LatticePoint(x.to_vec()),
        value,
        neighbours,
        descending,
        chain_family,
    })
}

/// `ln(|M| / |m|) / epsilon` with `m = v(x_1)` and `M = f''(0) - g''(k_max)`
/// for a split `v = f'' - g''` into monotone submodular parts (see
/// [`crate::decompositions::AdditiveBounds::monotone_gap`]), so that `M <= min v`.
///
/// Zero when `m = 0`; a ratio below one also gives zero since iteration
/// counts cannot be negative. Needs the decompositions, so the domain must be
/// within `cap`.
pub fn predicted_iteration_bound(p: &DsProblem, epsilon: f64, v_x1: f64, cap: usize) -> Result<IterationBound> {
    if !(epsilon > 0.0) {
        return Err(Error::arg("the iteration bound needs epsilon > 0"));
    }
    let big_m = additive_lower_bounds(p, cap)?.monotone_gap();
    let bound = if v_x1 == 0.0 { 0.0 } else { ((big_m.abs() / v_x1.abs()).ln() / epsilon).max(0.0) };
    Ok(IterationBound { bound, big_m, small_m: v_x1 })
}

struct Candidate {
    point: LatticePoint,
    surrogate: f64,
    surrogate_at_anchor: f64,
    note: String,
}

struct Solver<'a> {
    p: &'a DsProblem,
    opts: &'a SolveOptions,
    lambda: Option<f64>,
    calls_f0: u64,
    calls_g0: u64,
    started: Instant,
}

impl Solver<'_> {
    fn record(&self, t: usize, x: &LatticePoint, c: Option<&Candidate>, accepted: bool, note: String) -> IterateRecord {
        let f = self.p.f.eval(x);
        let g = self.p.g.eval(x);
        IterateRecord {
            t,
            x: x.clone(),
            v: f - g,
            f,
            g,
            surrogate: c.map(|c| c.surrogate),
            surrogate_at_anchor: c.map(|c| c.surrogate_at_anchor),
            accepted,
            calls_f: self.p.f.calls() - self.calls_f0,
            calls_g: self.p.g.calls() - self.calls_g0,
            wall_secs: self.started.elapsed().as_secs_f64(),
            note,
        }
    }

    fn chain(&self, x: &LatticePoint, t: usize) -> Result<Chain> {
        let mode = match self.opts.chain_mode {
            ChainMode::Canonical => ChainMode::Canonical,
            ChainMode::Randomized { seed } => ChainMode::Randomized { seed: seed.wrapping_add(t as u64) },
        };
        chain_containing(self.p.domain(), x, mode)
    }

    fn modular_upper(&self, x: &LatticePoint, variant: BoundVariant) -> Result<SeparableFunction> {
        let lambda = self.lambda.expect("lambda resolved for algorithms that need it");
        Ok(upper_bound_full(&self.p.f, lambda, x, variant)?
            .into_separable()
            .expect("grow variants are separable"))
    }

    /// Candidates for one step from `x`, in the order they should be tried.
    fn candidates(&self, x: &LatticePoint, chain: Option<&Chain>) -> Result<Vec<Candidate>> {
        let p = self.p;
        let d = p.domain();
        match self.opts.algorithm {
            Algorithm::SubSup => {
                let chain = chain.expect("subsup steps use a chain");
                let h = lower_bound(&p.g, x, chain)?;
                let surrogate = p.f.minus_separable(&h);
                let res = minimize_submodular(&surrogate, self.opts.sfm)?;
                let note = match res.duality {
                    Some(dual) => format!("sfm gap {:.3e}", dual.rounding_gap),
                    None => "sfm exact".into(),
                };
                Ok(vec![Candidate {
                    surrogate_at_anchor: p.f.eval(x) - h.value(x),
                    point: res.minimizer,
                    surrogate: res.value,
                    note,
                }])
            }
            Algorithm::SupSub => self
                .opts
                .ub_policy
                .variants()
                .iter()
                .map(|&variant| {
                    let m = self.modular_upper(x, variant)?;
                    let (point, gain) = maximize_submodular_dg(&p.g.minus_separable(&m));
                    Ok(Candidate {
                        surrogate_at_anchor: m.value(x) - p.g.eval(x),
                        point,
                        surrogate: -gain,
                        note: format!("{variant:?}").to_lowercase(),
                    })
                })
                .collect(),
            Algorithm::ModMod => {
                let chain = chain.expect("modmod steps use a chain");
                let h = lower_bound(&p.g, x, chain)?;
                self.opts
                    .ub_policy
                    .variants()
                    .iter()
                    .map(|&variant| {
                        let surrogate = self.modular_upper(x, variant)?.sub(&h);
                        let (point, value) = match self.opts.budget {
                            Some(b) => minimize_separable_cardinality(&surrogate, d, b)?,
                            None => minimize_separable(&surrogate, d)?,
                        };
                        Ok(Candidate {
                            surrogate_at_anchor: surrogate.value(x),
                            point,
                            surrogate: value,
                            note: format!("{variant:?}").to_lowercase(),
                        })
                    })
                    .collect()
            }
        }
    }

    /// Tries candidates in order, returning the first accepted one.
    fn first_accepted(&self, v_x: f64, cands: Vec<Candidate>) -> (Option<(Candidate, f64)>, Option<Candidate>) {
        let mut last = None;
        for c in cands {
            let vc = self.p.v(&c.point);
            if accept_step(v_x, vc, self.opts.epsilon) {
                return (Some((c, vc)), None);
            }
            last = Some(c);
        }
        (None, last)
    }
}

fn resolve_lambda(p: &DsProblem, opts: &SolveOptions) -> Result<Option<f64>> {
    if !opts.algorithm.needs_lambda() {
        return Ok(opts.lambda);
    }
    if let Some(l) = opts.lambda.or(p.lambda_hint) {
        if !(l >= 0.0) {
            return Err(Error::arg(format!("lambda must be non-negative, got {l}")));
        }
        return Ok(Some(l));
    }
    match lambda_bruteforce(&p.f, opts.cap) {
        Ok(l) => Ok(Some(l)),
        Err(Error::CapExceeded { points, .. }) => {
            Err(Error::MissingLambda { points: points.unwrap_or(usize::MAX) })
        }
        Err(e) => Err(e),
    }
}

pub fn solve(p: &DsProblem, opts: &SolveOptions) -> Result<SolveReport> {
    if !(opts.epsilon >= 0.0) {
        return Err(Error::arg("epsilon must be non-negative"));
    }
    if opts.max_iters == 0 {
        return Err(Error::arg("max_iters must be at least 1"));
    }
    if opts.budget.is_some() && opts.algorithm != Algorithm::ModMod {
        return Err(Error::arg("a cardinality budget is only supported by modmod"));
    }
    let d = p.domain();
    let mut x = opts.start.clone().unwrap_or_else(|| d.zero());
    d.check_point(&x)?;
    if let Some(b) = opts.budget {
        if x.total() > b {
            return Err(Error::arg(format!("start point {x} exceeds the budget {b}")));
        }
    }
    let solver = Solver {
        p,
        opts,
        lambda: resolve_lambda(p, opts)?,
        calls_f0: p.f.calls(),
        calls_g0: p.g.calls(),
        started: Instant::now(),
    };

    let mut iterates = vec![solver.record(0, &x, None, true, "start".into())];
    let mut v_x = iterates[0].v;
    let mut status = Status::IterBudget;
    let mut certificate = None;
    let mut accepted_steps = 0;
    let mut v_x1 = None;

    for t in 1..=opts.max_iters {
        let chain = if opts.algorithm.uses_chains() { Some(solver.chain(&x, t)?) } else { None };
        let (hit, miss) = solver.first_accepted(v_x, solver.candidates(&x, chain.as_ref())?);
        let mut step = hit.map(|(c, vc)| (c, vc, String::new()));

        if step.is_none() {
            if let Some(c) = &miss {
                let note = format!("{}; no accepted step", c.note);
                iterates.push(solver.record(t, &c.point, Some(c), false, note));
            }
            // Sweep chains that put every neighbour of x directly next to it.
            if opts.algorithm.uses_chains() {
                for (k, chain) in adjacent_chain_family(d, &x)?.iter().enumerate() {
                    let (hit, _) = solver.first_accepted(v_x, solver.candidates(&x, Some(chain))?);
                    if let Some((c, vc)) = hit {
                        step = Some((c, vc, format!("; adjacent chain {k}")));
                        break;
                    }
                }
            }
        }

        if step.is_none() {
            let cert = certify_local_minimum(p, &x, opts.budget)?;
            if cert.passed {
                status = Status::CertifiedLocalMin;
                certificate = Some(cert);
                break;
            }
            let (y, vy) = cert.descending.clone().expect("failed certificates carry a neighbour");
            if !accept_step(v_x, vy, opts.epsilon) {
                status = Status::Converged;
                break;
            }
            let c = Candidate {
                point: y,
                surrogate: vy,
                surrogate_at_anchor: v_x,
                note: "neighbour".into(),
            };
            step = Some((c, vy, String::new()));
        }

        let (c, vc, suffix) = step.expect("a step was found");
        x = c.point.clone();
        v_x = vc;
        accepted_steps += 1;
        v_x1.get_or_insert(vc);
        let note = format!("{}{}", c.note, suffix);
        iterates.push(solver.record(t, &x, Some(&c), true, note));
    }

    // close the trace on the returned point, whatever the last candidate was
    let t_end = iterates.last().map_or(0, |r| r.t);
    iterates.push(solver.record(t_end, &x, None, false, "final".into()));

    let predicted_bound = if opts.epsilon > 0.0 && d.ensure_within_cap(opts.cap).is_ok() {
        Some(predicted_iteration_bound(p, opts.epsilon, v_x1.unwrap_or(v_x), opts.cap)?)
    } else {
        None
    };

    Ok(SolveReport {
        algorithm: opts.algorithm,
        status,
        minimizer: x,
        value: v_x,
        iterates,
        accepted_steps,
        certificate,
        predicted_bound,
        lambda: solver.lambda,
    })
}

pub fn subsup(p: &DsProblem, opts: &SolveOptions) -> Result<SolveReport> {
    solve(p, &SolveOptions { algorithm: Algorithm::SubSup, ..opts.clone() })
}

pub fn supsub(p: &DsProblem, opts: &SolveOptions) -> Result<SolveReport> {
    solve(p, &SolveOptions { algorithm: Algorithm::SupSub, ..opts.clone() })
}

pub fn modmod(p: &DsProblem, opts: &SolveOptions) -> Result<SolveReport> {
    solve(p, &SolveOptions { algorithm: Algorithm::ModMod, ..opts.clone() })
}
