//! Integer lattices `{0..k_1-1} x ... x {0..k_n-1}` and points in them.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of points an enumerating routine will visit.
pub const DEFAULT_CAP: usize = 1_000_000;

/// A product lattice. Coordinate `i` takes the levels `0..sizes[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LatticeDomain {
    sizes: Vec<usize>,
}

impl LatticeDomain {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidDomain("at least one coordinate is required".into()));
        }
        if let Some((i, &k)) = sizes.iter().enumerate().find(|(_, &k)| k < 2) {
            return Err(Error::InvalidDomain(format!(
                "coordinate {i} has {k} levels, at least 2 are required"
            )));
        }
        Ok(Self { sizes })
    }

    /// `n` coordinates with `k` levels each.
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        Self::new(vec![k; n])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn levels(&self, i: usize) -> usize {
        self.sizes[i]
    }

    /// Number of lattice points, `None` on overflow.
    pub fn num_points(&self) -> Option<usize> {
        self.sizes.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k))
    }

    /// Total number of unit increments on a maximal chain, `sum(k_i - 1)`.
    pub fn chain_length(&self) -> usize {
        self.sizes.iter().map(|k| k - 1).sum()
    }

    pub fn zero(&self) -> LatticePoint {
        LatticePoint(vec![0; self.n()])
    }

    pub fn k_max(&self) -> LatticePoint {
        LatticePoint(self.sizes.iter().map(|k| k - 1).collect())
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        x.len() == self.n() && x.iter().zip(&self.sizes).all(|(&xi, &k)| xi < k)
    }

    pub fn check_point(&self, x: &[usize]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(self.out_of_domain(x.iter().map(|&v| v as i64).collect()))
        }
    }

    pub(crate) fn out_of_domain(&self, point: Vec<i64>) -> Error {
        Error::OutOfDomain { point, sizes: self.sizes.clone() }
    }

    /// Refuses domains with more than `cap` points; returns the point count otherwise.
    pub fn ensure_within_cap(&self, cap: usize) -> Result<usize> {
        match self.num_points() {
            Some(p) if p <= cap => Ok(p),
            points => Err(Error::CapExceeded { points, cap }),
        }
    }

    /// Row-major index with the last coordinate varying fastest.
    pub fn index_of(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.sizes).fold(0, |acc, (&xi, &k)| acc * k + xi)
    }

    pub fn point_at(&self, mut index: usize) -> LatticePoint {
        let mut coords = vec![0; self.n()];
        for i in (0..self.n()).rev() {
            coords[i] = index % self.sizes[i];
            index /= self.sizes[i];
        }
        LatticePoint(coords)
    }

    /// All points in lexicographic order (which is also row-major order).
    pub fn points(&self) -> Points<'_> {
        Points { domain: self, next: Some(self.zero()) }
    }

    /// `x + delta * e_i`, if it stays in the domain.
    pub fn shift(&self, x: &[usize], i: usize, delta: i64) -> Option<LatticePoint> {
        let level = x[i] as i64 + delta;
        if level < 0 || level >= self.sizes[i] as i64 {
            return None;
        }
        let mut y = x.to_vec();
        y[i] = level as usize;
        Some(LatticePoint(y))
    }

    pub(crate) fn shift_or_err(&self, x: &[usize], i: usize, delta: i64) -> Result<LatticePoint> {
        self.shift(x, i, delta).ok_or_else(|| {
            let mut p: Vec<i64> = x.iter().map(|&v| v as i64).collect();
            p[i] += delta;
            self.out_of_domain(p)
        })
    }
}

impl TryFrom<Vec<usize>> for LatticeDomain {
    type Error = Error;

    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        Self::new(sizes)
    }
}

impl From<LatticeDomain> for Vec<usize> {
    fn from(d: LatticeDomain) -> Self {
        d.sizes
    }
}

pub struct Points<'a> {
    domain: &'a LatticeDomain,
    next: Option<LatticePoint>,
}

impl Iterator for Points<'_> {
    type Item = LatticePoint;

    fn next(&mut self) -> Option<LatticePoint> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..self.domain.n()).rev() {
            if succ.0[i] + 1 < self.domain.sizes[i] {
                succ.0[i] += 1;
                self.next = Some(succ);
                break;
            }
            succ.0[i] = 0;
        }
        Some(current)
    }
}

/// A point of a [`LatticeDomain`]. Membership is checked by the domain, not here.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(pub Vec<usize>);

impl LatticePoint {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn meet(&self, other: &[usize]) -> LatticePoint {
        LatticePoint(self.0.iter().zip(other).map(|(&a, &b)| a.min(b)).collect())
    }

    pub fn join(&self, other: &[usize]) -> LatticePoint {
        LatticePoint(self.0.iter().zip(other).map(|(&a, &b)| a.max(b)).collect())
    }

    pub fn with(&self, i: usize, level: usize) -> LatticePoint {
        let mut y = self.clone();
        y.0[i] = level;
        y
    }
}

impl Deref for LatticePoint {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for LatticePoint {
    fn from(v: Vec<usize>) -> Self {
        LatticePoint(v)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
