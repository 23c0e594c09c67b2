use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeDomain;
use crate::oracle::Oracle;

/// A modular lattice function
/// `s(x) = constant + sum_i sum_{j=1..x_i} w_i(j)`.
///
/// `increments[i][j - 1]` holds `w_i(j)`, so coordinate `i` has
/// `increments[i].len() + 1` levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableFunction {
    pub constant: f64,
    pub increments: Vec<Vec<f64>>,
}

impl SeparableFunction {
    pub fn new(constant: f64, increments: Vec<Vec<f64>>) -> Self {
        Self { constant, increments }
    }

    pub fn zero(domain: &LatticeDomain) -> Self {
        Self::new(0.0, domain.sizes().iter().map(|&k| vec![0.0; k - 1]).collect())
    }

    /// Builds from per-coordinate level values `c_i(0..k_i)`. The constant is
    /// `constant + sum_i c_i(0)`.
    pub fn from_levels(constant: f64, levels: &[Vec<f64>]) -> Self {
        let mut c = constant;
        let increments = levels
            .iter()
            .map(|vals| {
                c += vals[0];
                vals.windows(2).map(|w| w[1] - w[0]).collect()
            })
            .collect();
        Self::new(c, increments)
    }

    /// `c * sum_i x_i^2`.
    pub fn squares(domain: &LatticeDomain, c: f64) -> Self {
        let increments = domain
            .sizes()
            .iter()
            .map(|&k| (1..k).map(|j| c * (2 * j - 1) as f64).collect())
            .collect();
        Self::new(0.0, increments)
    }

    /// `sum_i slopes[i] * x_i`.
    pub fn linear(domain: &LatticeDomain, slopes: &[f64]) -> Self {
        let increments =
            domain.sizes().iter().zip(slopes).map(|(&k, &s)| vec![s; k - 1]).collect();
        Self::new(0.0, increments)
    }

    pub fn n(&self) -> usize {
        self.increments.len()
    }

    pub fn domain(&self) -> LatticeDomain {
        LatticeDomain::new(self.increments.iter().map(|w| w.len() + 1).collect())
            .expect("separable tables always have at least one increment per coordinate")
    }

    pub fn matches(&self, domain: &LatticeDomain) -> bool {
        self.n() == domain.n()
            && self.increments.iter().zip(domain.sizes()).all(|(w, &k)| w.len() + 1 == k)
    }

    pub(crate) fn ensure_matches(&self, domain: &LatticeDomain) -> Result<()> {
        if self.matches(domain) {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "separable tables do not match domain sizes {:?}",
                domain.sizes()
            )))
        }
    }

    pub fn value(&self, x: &[usize]) -> f64 {
        self.constant
            + self
                .increments
                .iter()
                .zip(x)
                .map(|(w, &xi)| w[..xi].iter().sum::<f64>())
                .sum::<f64>()
    }

    /// Prefix sums `0, w_i(1), w_i(1) + w_i(2), ...` for coordinate `i`.
    pub fn prefixes(&self, i: usize) -> Vec<f64> {
        let mut acc = 0.0;
        std::iter::once(0.0)
            .chain(self.increments[i].iter().map(|w| {
                acc += w;
                acc
            }))
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(
            c * self.constant,
            self.increments.iter().map(|w| w.iter().map(|v| c * v).collect()).collect(),
        )
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.n(), other.n(), "separable functions on different domains");
        let increments = self
            .increments
            .iter()
            .zip(&other.increments)
            .map(|(a, b)| {
                assert_eq!(a.len(), b.len(), "separable functions on different domains");
                a.iter().zip(b).map(|(x, y)| x + sign * y).collect()
            })
            .collect();
        Self::new(self.constant + sign * other.constant, increments)
    }

    pub fn to_oracle(&self) -> Oracle {
        let s = self.clone();
        Oracle::from_fn(self.domain(), move |x| s.value(x))
    }
}
