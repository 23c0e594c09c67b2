use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spec::{AutoSplitSpec, CoverageTradeoffSpec, FunctionSpec, ProblemSpec, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::functions::random;
use crate::lattice::LatticeDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Sensor placement: separable concave cost minus coverage.
    Coverage,
    /// Concave-of-linear sums plus a convex separable term, minus
    /// concave-of-linear sums.
    ConcaveOfLinearSums,
    /// Arbitrary random tables split through the reference quadratic.
    RandomTableAutosplit,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 3] =
        [EnsembleKind::Coverage, EnsembleKind::ConcaveOfLinearSums, EnsembleKind::RandomTableAutosplit];
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleKind::Coverage => "coverage",
            EnsembleKind::ConcaveOfLinearSums => "concave_of_linear_sums",
            EnsembleKind::RandomTableAutosplit => "random_table_autosplit",
        })
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnsembleKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::arg(format!("unknown ensemble kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub count: usize,
    pub sizes: Vec<usize>,
    /// Regions per coverage instance.
    pub regions: usize,
    /// Multiplies every random coefficient; zero gives constant functions.
    pub weight_scale: f64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self { count: 20, sizes: vec![3, 3, 3], regions: 4, weight_scale: 1.0 }
    }
}

/// Deterministic in `seed`: instance `i` draws from its own stream.
pub fn generate_ensemble(kind: EnsembleKind, params: &EnsembleParams, seed: u64) -> Result<Vec<ProblemSpec>> {
    let domain = LatticeDomain::new(params.sizes.clone())?;
    if !(params.weight_scale >= 0.0) {
        return Err(Error::arg("weight_scale must be non-negative"));
    }
    if kind == EnsembleKind::Coverage && params.regions == 0 {
        return Err(Error::arg("coverage instances need at least one region"));
    }
    if kind == EnsembleKind::RandomTableAutosplit {
        // tables are stored explicitly
        domain.ensure_within_cap(crate::lattice::DEFAULT_CAP)?;
    }
    Ok((0..params.count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut spec = match kind {
                EnsembleKind::Coverage => coverage(&mut rng, &domain, params),
                EnsembleKind::ConcaveOfLinearSums => concave_of_linear(&mut rng, &domain, params),
                EnsembleKind::RandomTableAutosplit => table_autosplit(&mut rng, &domain, params),
            };
            spec.name = Some(format!("{kind}-{seed}-{i}"));
            spec
        })
        .collect())
}

fn blank(domain: &LatticeDomain) -> ProblemSpec {
    ProblemSpec {
        version: FORMAT_VERSION,
        name: None,
        sizes: domain.sizes().to_vec(),
        f: None,
        g: None,
        auto_split: None,
        coverage_tradeoff: None,
        budget: None,
        lambda: None,
    }
}

fn coverage(rng: &mut ChaCha8Rng, domain: &LatticeDomain, params: &EnsembleParams) -> ProblemSpec {
    let s = params.weight_scale;
    let probabilities =
        (0..domain.n()).map(|_| (0..params.regions).map(|_| rng.gen_range(0.0..0.7) * s.min(1.0)).collect()).collect();
    let region_weights = (0..params.regions).map(|_| rng.gen_range(0.5..2.0) * s).collect();
    let costs = domain
        .sizes()
        .iter()
        .map(|&k| {
            // concave, increasing cost per unit
            let mut inc: Vec<f64> = (1..k).map(|_| rng.gen_range(0.1..1.0) * s).collect();
            inc.sort_by(|a, b| b.total_cmp(a));
            std::iter::once(0.0)
                .chain(inc.iter().scan(0.0, |acc, w| {
                    *acc += w;
                    Some(*acc)
                }))
                .collect()
        })
        .collect();
    let lambda_cost = rng.gen_range(0.2..1.0);
    ProblemSpec {
        coverage_tradeoff: Some(CoverageTradeoffSpec { probabilities, region_weights, costs, lambda_cost }),
        ..blank(domain)
    }
}

fn concave_of_linear(rng: &mut ChaCha8Rng, domain: &LatticeDomain, params: &EnsembleParams) -> ProblemSpec {
    let s = params.weight_scale;
    let n = domain.n();
    let convex = domain
        .sizes()
        .iter()
        .map(|&k| {
            let c = rng.gen_range(0.0..0.5) * s;
            let slope = rng.gen_range(-1.0..1.0) * s;
            (0..k).map(|x| c * (x * x) as f64 + slope * x as f64).collect()
        })
        .collect();
    let f = FunctionSpec::Sum {
        parts: vec![
            FunctionSpec::ConcaveSum { terms: random::concave_terms(rng, n, 2, s) },
            FunctionSpec::Separable { constant: 0.0, levels: convex },
        ],
    };
    let g = FunctionSpec::ConcaveSum { terms: random::concave_terms(rng, n, 3, s) };
    ProblemSpec { f: Some(f), g: Some(g), ..blank(domain) }
}

fn table_autosplit(rng: &mut ChaCha8Rng, domain: &LatticeDomain, params: &EnsembleParams) -> ProblemSpec {
    let values = random::table(rng, domain, 5.0 * params.weight_scale).values().to_vec();
    ProblemSpec {
        auto_split: Some(AutoSplitSpec { v: FunctionSpec::Table { values }, n_bound: None }),
        ..blank(domain)
    }
}
