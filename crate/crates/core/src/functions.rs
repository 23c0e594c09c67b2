//! Concrete lattice functions and seeded random families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeDomain;
use crate::oracle::{LatticeFunction, Oracle};

/// Values stored row-major, last coordinate fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TableFunction {
    domain: LatticeDomain,
    values: Vec<f64>,
}

impl TableFunction {
    pub fn new(domain: LatticeDomain, values: Vec<f64>) -> Result<Self> {
        let expected = domain.num_points().ok_or_else(|| Error::arg("table domain is too large"))?;
        if values.len() != expected {
            return Err(Error::arg(format!(
                "table has {} values, the domain has {expected} points",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("table value {bad} is not finite")));
        }
        Ok(Self { domain, values })
    }

    pub fn from_oracle(f: &Oracle) -> Self {
        Self { domain: f.domain().clone(), values: f.tabulate() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl LatticeFunction for TableFunction {
    fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    fn value(&self, x: &[usize]) -> f64 {
        self.values[self.domain.index_of(x)]
    }
}

/// `x^T A x + b^T x + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFunction {
    domain: LatticeDomain,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: f64,
}

impl QuadraticFunction {
    pub fn new(domain: LatticeDomain, a: Vec<Vec<f64>>, b: Vec<f64>, c: f64) -> Result<Self> {
        let n = domain.n();
        if a.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(Error::arg(format!("quadratic form must be {n} x {n}")));
        }
        if b.len() != n {
            return Err(Error::arg(format!("linear term must have {n} entries")));
        }
        Ok(Self { domain, a, b, c })
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.a
    }
}

impl LatticeFunction for QuadraticFunction {
    fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    fn value(&self, x: &[usize]) -> f64 {
        let mut v = self.c;
        for (i, row) in self.a.iter().enumerate() {
            let xi = x[i] as f64;
            v += self.b[i] * xi;
            v += xi * row.iter().zip(x).map(|(a, &xj)| a * xj as f64).sum::<f64>();
        }
        v
    }
}

/// Probabilistic coverage `sum_j w_j (1 - prod_i (1 - p_ij)^{x_i})`.
///
/// Monotone and DR-submodular for `p_ij` in `[0, 1]` and `w_j >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageFunction {
    domain: LatticeDomain,
    /// `probabilities[i][j]`: detection probability of one unit of sensor `i` in region `j`.
    probabilities: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl CoverageFunction {
    pub fn new(domain: LatticeDomain, probabilities: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if probabilities.len() != domain.n() {
            return Err(Error::arg(format!("need one probability row per coordinate ({})", domain.n())));
        }
        for (i, row) in probabilities.iter().enumerate() {
            if row.len() != weights.len() {
                return Err(Error::arg(format!(
                    "probability row {i} has {} regions, expected {}",
                    row.len(),
                    weights.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::arg(format!("probability {p} in row {i} is outside [0, 1]")));
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::arg("region weights must be non-negative"));
        }
        Ok(Self { domain, probabilities, weights })
    }
}

impl LatticeFunction for CoverageFunction {
    fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    fn value(&self, x: &[usize]) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let miss: f64 =
                    self.probabilities.iter().zip(x).map(|(p, &xi)| (1.0 - p[j]).powi(xi as i32)).product();
                w * (1.0 - miss)
            })
            .sum()
    }
}

/// Concave scalar maps used inside [`ConcaveSumFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phi", rename_all = "snake_case")]
pub enum Concave {
    Sqrt,
    Log1p,
    Min { cap: f64 },
    NegSquare,
}

impl Concave {
    pub fn apply(self, s: f64) -> f64 {
        match self {
            Concave::Sqrt => s.sqrt(),
            Concave::Log1p => s.ln_1p(),
            Concave::Min { cap } => s.min(cap),
            Concave::NegSquare => -s * s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcaveTerm {
    pub weights: Vec<f64>,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(flatten)]
    pub phi: Concave,
}

fn one() -> f64 {
    1.0
}

/// `sum_t scale_t * phi_t(w_t . x)` with non-negative weights and scales;
/// DR-submodular because each term is a concave function of a non-negative
/// combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveSumFunction {
    domain: LatticeDomain,
    terms: Vec<ConcaveTerm>,
}

impl ConcaveSumFunction {
    pub fn new(domain: LatticeDomain, terms: Vec<ConcaveTerm>) -> Result<Self> {
        for (t, term) in terms.iter().enumerate() {
            if term.weights.len() != domain.n() {
                return Err(Error::arg(format!("term {t} needs {} weights", domain.n())));
            }
            if term.weights.iter().any(|w| !(*w >= 0.0)) || !(term.scale >= 0.0) {
                return Err(Error::arg(format!("term {t} has a negative weight or scale")));
            }
        }
        Ok(Self { domain, terms })
    }
}

impl LatticeFunction for ConcaveSumFunction {
    fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    fn value(&self, x: &[usize]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let s: f64 = t.weights.iter().zip(x).map(|(w, &xi)| w * xi as f64).sum();
                t.scale * t.phi.apply(s)
            })
            .sum()
    }
}

/// Seeded random families. Every generator draws only from the given RNG.
pub mod random {
    use rand::Rng;

    use super::*;

    fn concave_levels<R: Rng>(rng: &mut R, k: usize, scale: f64) -> Vec<f64> {
        // non-increasing increments, any sign
        let mut inc: Vec<f64> = (1..k).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
        inc.sort_by(|a, b| b.total_cmp(a));
        levels_from_increments(rng.gen_range(-1.0..1.0) * scale, &inc)
    }

    fn levels_from_increments(start: f64, inc: &[f64]) -> Vec<f64> {
        let mut out = vec![start];
        for w in inc {
            out.push(out.last().unwrap() + w);
        }
        out
    }

    fn nondecreasing_levels<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
        let inc: Vec<f64> = (1..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        levels_from_increments(0.0, &inc)
    }

    pub fn concave_terms<R: Rng>(rng: &mut R, n: usize, count: usize, scale: f64) -> Vec<ConcaveTerm> {
        (0..count)
            .map(|_| {
                let phi = match rng.gen_range(0..4) {
                    0 => Concave::Sqrt,
                    1 => Concave::Log1p,
                    2 => Concave::Min { cap: rng.gen_range(1.0..4.0) },
                    _ => Concave::NegSquare,
                };
                let weight_scale = if phi == Concave::NegSquare { 0.3 } else { 1.0 };
                ConcaveTerm {
                    weights: (0..n).map(|_| rng.gen_range(0.0..1.0) * weight_scale * scale).collect(),
                    scale: rng.gen_range(0.0..2.0),
                    phi,
                }
            })
            .collect()
    }

    /// Submodular but generally not DR: arbitrary separable part, products of
    /// non-decreasing profiles with negative coefficients, and concave terms.
    pub fn submodular<R: Rng>(rng: &mut R, domain: &LatticeDomain) -> TableFunction {
        let n = domain.n();
        let sep: Vec<Vec<f64>> =
            domain.sizes().iter().map(|&k| (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let phis: Vec<Vec<f64>> = domain.sizes().iter().map(|&k| nondecreasing_levels(rng, k)).collect();
        let mut pair = vec![vec![0.0; n]; n];
        for (i, row) in pair.iter_mut().enumerate() {
            for c in row.iter_mut().skip(i + 1) {
                *c = rng.gen_range(0.0..2.0);
            }
        }
        let terms = ConcaveSumFunction::new(domain.clone(), concave_terms(rng, n, 2, 1.0))
            .expect("generated terms are valid");
        let f = Oracle::from_fn(domain.clone(), move |x| {
            let mut v: f64 = sep.iter().zip(x).map(|(s, &xi)| s[xi]).sum();
            for i in 0..x.len() {
                for j in i + 1..x.len() {
                    v -= pair[i][j] * phis[i][x[i]] * phis[j][x[j]];
                }
            }
            v + terms.value(x)
        });
        TableFunction::from_oracle(&f)
    }

    /// DR-submodular: concave separable part, `-c x_i x_j` couplings and
    /// concave terms.
    pub fn dr_submodular<R: Rng>(rng: &mut R, domain: &LatticeDomain) -> TableFunction {
        let n = domain.n();
        let sep: Vec<Vec<f64>> = domain.sizes().iter().map(|&k| concave_levels(rng, k, 2.0)).collect();
        let coupling: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..0.5)).collect();
        let terms = ConcaveSumFunction::new(domain.clone(), concave_terms(rng, n, 2, 1.0))
            .expect("generated terms are valid");
        let f = Oracle::from_fn(domain.clone(), move |x| {
            let mut v: f64 = sep.iter().zip(x).map(|(s, &xi)| s[xi]).sum();
            for i in 0..x.len() {
                for j in i + 1..x.len() {
                    v -= coupling[i * x.len() + j] * (x[i] * x[j]) as f64;
                }
            }
            v + terms.value(x)
        });
        TableFunction::from_oracle(&f)
    }

    /// Submodular with minimum value in `[0, 1)`.
    pub fn nonnegative_submodular<R: Rng>(rng: &mut R, domain: &LatticeDomain) -> TableFunction {
        let f = submodular(rng, domain);
        let lo = f.values().iter().copied().fold(f64::INFINITY, f64::min);
        let shift = rng.gen_range(0.0..1.0) - lo;
        TableFunction { domain: f.domain, values: f.values.into_iter().map(|v| v + shift).collect() }
    }

    /// Independent uniform values in `[-scale, scale]`.
    pub fn table<R: Rng>(rng: &mut R, domain: &LatticeDomain, scale: f64) -> TableFunction {
        let count = domain.num_points().expect("random tables need a countable domain");
        TableFunction { domain: domain.clone(), values: (0..count).map(|_| rng.gen_range(-scale..=scale)).collect() }
    }

    /// Submodular integer quadratic: symmetric `A` with diagonal in
    /// `-range..=range`, off-diagonal entries in `-range..=0`, and integer `b`.
    pub fn integer_quadratic<R: Rng>(rng: &mut R, domain: &LatticeDomain, range: i32) -> QuadraticFunction {
        let n = domain.n();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let hi = if i == j { range } else { 0 };
                let v = f64::from(rng.gen_range(-range..=hi));
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let b = (0..n).map(|_| f64::from(rng.gen_range(-range..=range))).collect();
        QuadraticFunction::new(domain.clone(), a, b, 0.0).expect("dimensions match")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{check_dr, check_monotone, check_submodular};
    use crate::lattice::DEFAULT_CAP;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dom(sizes: &[usize]) -> LatticeDomain {
        LatticeDomain::new(sizes.to_vec()).unwrap()
    }

    #[test]
    fn table_is_row_major() {
        let t = TableFunction::new(dom(&[2, 3]), (0..6).map(f64::from).collect()).unwrap();
        assert_eq!(t.value(&[0, 2]), 2.0);
        assert_eq!(t.value(&[1, 0]), 3.0);
        assert!(TableFunction::new(dom(&[2, 3]), vec![0.0; 5]).is_err());
    }

    #[test]
    fn quadratic_values() {
        let q = QuadraticFunction::new(dom(&[3, 3]), vec![vec![0.0, -1.0], vec![-1.0, 0.0]], vec![1.0, 0.0], 2.0)
            .unwrap();
        assert_eq!(q.value(&[2, 1]), -4.0 + 2.0 + 2.0);
        let o = Oracle::new(q);
        assert!(check_submodular(&o, DEFAULT_CAP).unwrap().holds());
        assert!(QuadraticFunction::new(dom(&[3]), vec![vec![1.0, 2.0]], vec![0.0], 0.0).is_err());
    }

    #[test]
    fn coverage_is_monotone_dr() {
        let c = CoverageFunction::new(
            dom(&[3, 4]),
            vec![vec![0.5, 0.1, 0.0], vec![0.2, 0.9, 1.0]],
            vec![1.0, 2.0, 0.5],
        )
        .unwrap();
        assert_eq!(c.value(&[0, 0]), 0.0);
        assert!((c.value(&[1, 0]) - (0.5 + 0.2)).abs() < 1e-12);
        let o = Oracle::new(c);
        assert!(check_dr(&o, DEFAULT_CAP).unwrap().holds());
        assert!(check_monotone(&o, DEFAULT_CAP).unwrap().holds());
        assert!(CoverageFunction::new(dom(&[2]), vec![vec![1.5]], vec![1.0]).is_err());
    }

    #[test]
    fn concave_sum_is_dr() {
        let terms = vec![
            ConcaveTerm { weights: vec![1.0, 2.0], scale: 1.0, phi: Concave::Sqrt },
            ConcaveTerm { weights: vec![0.5, 0.5], scale: 2.0, phi: Concave::Min { cap: 1.5 } },
            ConcaveTerm { weights: vec![0.3, 0.1], scale: 1.0, phi: Concave::NegSquare },
        ];
        let f = Oracle::new(ConcaveSumFunction::new(dom(&[4, 4]), terms).unwrap());
        assert!(check_dr(&f, DEFAULT_CAP).unwrap().holds());
        let bad = ConcaveTerm { weights: vec![-1.0, 0.0], scale: 1.0, phi: Concave::Log1p };
        assert!(ConcaveSumFunction::new(dom(&[4, 4]), vec![bad]).is_err());
    }

    #[test]
    fn random_families_have_their_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = dom(&[4, 4, 4]);
        for _ in 0..20 {
            let s = Oracle::new(random::submodular(&mut rng, &d));
            assert!(check_submodular(&s, DEFAULT_CAP).unwrap().holds());
            let r = Oracle::new(random::dr_submodular(&mut rng, &d));
            assert!(check_dr(&r, DEFAULT_CAP).unwrap().holds());
            let p = random::nonnegative_submodular(&mut rng, &d);
            assert!(p.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let d = dom(&[3, 3]);
        let a = random::table(&mut ChaCha8Rng::seed_from_u64(9), &d, 1.0);
        let b = random::table(&mut ChaCha8Rng::seed_from_u64(9), &d, 1.0);
        assert_eq!(a, b);
    }
}
