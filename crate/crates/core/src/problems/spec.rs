use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checks::{check_submodular, Verdict};
use crate::decompositions::{auto_split, ds_construct, reference_quadratic, DsProblem};
use crate::error::{Error, Result};
use crate::functions::{ConcaveSumFunction, ConcaveTerm, CoverageFunction, QuadraticFunction, TableFunction};
use crate::lattice::LatticeDomain;
use crate::oracle::Oracle;
use crate::separable::SeparableFunction;
use crate::upper_bounds::lambda_quadratic;

pub const FORMAT_VERSION: u32 = 1;

/// A problem file. Exactly one of `f`, `auto_split` and `coverage_tradeoff`
/// describes the objective; `g` defaults to zero when `f` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_split: Option<AutoSplitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_tradeoff: Option<CoverageTradeoffSpec>,
    /// Cardinality budget `sum_i x_i <= budget`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Curvature bound for `f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// Row-major values, last coordinate fastest.
    Table { values: Vec<f64> },
    /// `x^T a x + b^T x + c`.
    Quadratic {
        a: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
        #[serde(default)]
        c: f64,
    },
    /// `constant + sum_i levels[i][x_i]`.
    Separable {
        #[serde(default)]
        constant: f64,
        levels: Vec<Vec<f64>>,
    },
    Coverage { probabilities: Vec<Vec<f64>>, weights: Vec<f64> },
    ConcaveSum { terms: Vec<ConcaveTerm> },
    Sum { parts: Vec<FunctionSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoSplitSpec {
    pub v: FunctionSpec,
    /// Bound on the positive cross second differences of `v`; computed by
    /// enumeration when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bound: Option<f64>,
}

/// Sensor placement: `f = lambda_cost * sum_i costs[i][x_i]`, `g` is coverage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageTradeoffSpec {
    pub probabilities: Vec<Vec<f64>>,
    pub region_weights: Vec<f64>,
    pub costs: Vec<Vec<f64>>,
    pub lambda_cost: f64,
}

/// A built problem together with the run settings stored in its file.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub spec: ProblemSpec,
    pub problem: DsProblem,
    pub budget: Option<usize>,
    pub lambda: Option<f64>,
    /// Checks skipped because the domain exceeds the cap.
    pub warnings: Vec<String>,
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse { path: path.to_string(), message: other.to_string() },
    }
}

impl FunctionSpec {
    pub fn build(&self, domain: &LatticeDomain, path: &str) -> Result<Oracle> {
        let d = domain.clone();
        let oracle = match self {
            FunctionSpec::Table { values } => {
                Oracle::new(TableFunction::new(d, values.clone()).map_err(|e| at(&format!("{path}.values"), e))?)
            }
            FunctionSpec::Quadratic { a, b, c } => {
                let b = b.clone().unwrap_or_else(|| vec![0.0; domain.n()]);
                Oracle::new(QuadraticFunction::new(d, a.clone(), b, *c).map_err(|e| at(path, e))?)
            }
            FunctionSpec::Separable { constant, levels } => {
                if levels.len() != domain.n()
                    || levels.iter().zip(domain.sizes()).any(|(l, &k)| l.len() != k)
                {
                    return Err(Error::Parse {
                        path: format!("{path}.levels"),
                        message: format!("need one list of {:?} level values per coordinate", domain.sizes()),
                    });
                }
                SeparableFunction::from_levels(*constant, levels).to_oracle()
            }
            FunctionSpec::Coverage { probabilities, weights } => Oracle::new(
                CoverageFunction::new(d, probabilities.clone(), weights.clone()).map_err(|e| at(path, e))?,
            ),
            FunctionSpec::ConcaveSum { terms } => {
                Oracle::new(ConcaveSumFunction::new(d, terms.clone()).map_err(|e| at(&format!("{path}.terms"), e))?)
            }
            FunctionSpec::Sum { parts } => {
                let mut total = Oracle::constant(d, 0.0);
                for (k, part) in parts.iter().enumerate() {
                    total = total.plus(&part.build(domain, &format!("{path}.parts[{k}]"))?);
                }
                total
            }
        };
        Ok(oracle)
    }

    /// Curvature bound available in closed form.
    pub fn lambda_hint(&self) -> Option<f64> {
        match self {
            FunctionSpec::Quadratic { a, .. } => lambda_quadratic(a).ok(),
            _ => None,
        }
    }
}

impl ProblemSpec {
    pub fn domain(&self) -> Result<LatticeDomain> {
        LatticeDomain::new(self.sizes.clone()).map_err(|e| at("sizes", e))
    }

    /// Builds the oracles. With `validate`, both parts are checked for
    /// submodularity when the domain has at most `cap` points; larger domains
    /// only produce a warning.
    pub fn build(&self, cap: usize, validate: bool) -> Result<LoadedProblem> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Parse {
                path: "version".into(),
                message: format!("unsupported version {}, expected {FORMAT_VERSION}", self.version),
            });
        }
        let domain = self.domain()?;
        let sources = [self.f.is_some(), self.auto_split.is_some(), self.coverage_tradeoff.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            return Err(Error::Parse {
                path: ".".into(),
                message: "exactly one of `f`, `auto_split` and `coverage_tradeoff` is required".into(),
            });
        }
        if self.g.is_some() && self.f.is_none() {
            return Err(Error::Parse { path: "g".into(), message: "`g` is only allowed together with `f`".into() });
        }
        let within_cap = domain.ensure_within_cap(cap).is_ok();
        let mut warnings = Vec::new();

        let problem = if let Some(f) = &self.f {
            let f_oracle = f.build(&domain, "f")?;
            let g_oracle = match &self.g {
                Some(g) => g.build(&domain, "g")?,
                None => Oracle::constant(domain.clone(), 0.0),
            };
            let mut p = DsProblem::new(f_oracle, g_oracle)?;
            p.lambda_hint = f.lambda_hint();
            p
        } else if let Some(split) = &self.auto_split {
            let v = split.v.build(&domain, "auto_split.v")?;
            match split.n_bound {
                Some(n) => {
                    let (g_ref, m_ref) = reference_quadratic(&domain).map_err(|e| at("auto_split", e))?;
                    ds_construct(&v, &g_ref, m_ref, n, cap)?
                }
                None => auto_split(&v, cap).map_err(|e| match e {
                    Error::CapExceeded { .. } => e,
                    other => at("auto_split", other),
                })?,
            }
        } else {
            let c = self.coverage_tradeoff.as_ref().expect("one source is present");
            let cost = FunctionSpec::Separable { constant: 0.0, levels: c.costs.clone() }
                .build(&domain, "coverage_tradeoff.costs")?;
            let coverage =
                FunctionSpec::Coverage { probabilities: c.probabilities.clone(), weights: c.region_weights.clone() }
                    .build(&domain, "coverage_tradeoff")?;
            DsProblem::new(cost.scaled(c.lambda_cost), coverage)?
        };

        if validate {
            if within_cap {
                for (name, h) in [("f", &problem.f), ("g", &problem.g)] {
                    if let Verdict::Violated(witness) = check_submodular(h, cap)? {
                        return Err(Error::Validation { what: format!("{name} (submodularity)"), witness });
                    }
                }
            } else {
                warnings.push(format!("domain exceeds the cap of {cap} points; submodularity not checked"));
            }
        }
        if let Some(b) = self.budget {
            if b == 0 {
                warnings.push("budget 0 only admits the origin".into());
            }
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0) {
                return Err(Error::Parse { path: "lambda".into(), message: format!("must be non-negative, got {l}") });
            }
        }
        Ok(LoadedProblem { spec: self.clone(), problem, budget: self.budget, lambda: self.lambda, warnings })
    }
}

pub fn parse_problem_str(text: &str) -> Result<ProblemSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Parse { path: e.path().to_string(), message: e.inner().to_string() })
}

/// Reads, builds and (optionally) validates a problem file.
pub fn parse_problem(path: impl AsRef<Path>, cap: usize, validate: bool) -> Result<LoadedProblem> {
    let text = fs::read_to_string(path)?;
    parse_problem_str(&text)?.build(cap, validate)
}

pub fn write_problem(spec: &ProblemSpec, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(spec)
        .map_err(|e| Error::Parse { path: ".".into(), message: e.to_string() })?;
    fs::write(path, text + "\n")?;
    Ok(())
}
