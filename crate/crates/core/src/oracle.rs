//! Evaluation oracles for lattice functions.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::lattice::LatticeDomain;
use crate::separable::SeparableFunction;

/// A real-valued function on a lattice. Implementations must be deterministic.
pub trait LatticeFunction: Send + Sync {
    fn domain(&self) -> &LatticeDomain;

    /// Value at `x`. Callers guarantee `x` lies in the domain.
    fn value(&self, x: &[usize]) -> f64;
}

struct FnFunction<F> {
    domain: LatticeDomain,
    f: F,
}

impl<F> LatticeFunction for FnFunction<F>
where
    F: Fn(&[usize]) -> f64 + Send + Sync,
{
    fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    fn value(&self, x: &[usize]) -> f64 {
        (self.f)(x)
    }
}

/// A shared, call-counting handle to a [`LatticeFunction`].
///
/// Clones share both the function and the counter. The counter is atomic so
/// distinct points may be evaluated from several threads at once.
#[derive(Clone)]
pub struct Oracle {
    func: Arc<dyn LatticeFunction>,
    calls: Arc<AtomicU64>,
}

impl Oracle {
    pub fn new<F: LatticeFunction + 'static>(func: F) -> Self {
        Self { func: Arc::new(func), calls: Arc::new(AtomicU64::new(0)) }
    }

    pub fn from_fn<F>(domain: LatticeDomain, f: F) -> Self
    where
        F: Fn(&[usize]) -> f64 + Send + Sync + 'static,
    {
        Self::new(FnFunction { domain, f })
    }

    pub fn constant(domain: LatticeDomain, c: f64) -> Self {
        Self::from_fn(domain, move |_| c)
    }

    pub fn domain(&self) -> &LatticeDomain {
        self.func.domain()
    }

    pub fn eval(&self, x: &[usize]) -> f64 {
        debug_assert!(self.domain().contains(x), "{x:?} outside {:?}", self.domain().sizes());
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.func.value(x)
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    /// A copy with its own, zeroed counter. Evaluations are not counted on `self`.
    pub fn fresh_counter(&self) -> Self {
        Self { func: Arc::clone(&self.func), calls: Arc::new(AtomicU64::new(0)) }
    }

    /// Pointwise `self - other`. Evaluations are also counted on both operands.
    pub fn minus(&self, other: &Oracle) -> Oracle {
        let (a, b) = (self.clone(), other.clone());
        Oracle::from_fn(self.domain().clone(), move |x| a.eval(x) - b.eval(x))
    }

    pub fn plus(&self, other: &Oracle) -> Oracle {
        let (a, b) = (self.clone(), other.clone());
        Oracle::from_fn(self.domain().clone(), move |x| a.eval(x) + b.eval(x))
    }

    pub fn scaled(&self, c: f64) -> Oracle {
        let a = self.clone();
        Oracle::from_fn(self.domain().clone(), move |x| c * a.eval(x))
    }

    pub fn minus_separable(&self, s: &SeparableFunction) -> Oracle {
        let (a, s) = (self.clone(), s.clone());
        Oracle::from_fn(self.domain().clone(), move |x| a.eval(x) - s.value(x))
    }

    pub fn plus_separable(&self, s: &SeparableFunction) -> Oracle {
        let (a, s) = (self.clone(), s.clone());
        Oracle::from_fn(self.domain().clone(), move |x| a.eval(x) + s.value(x))
    }

    /// Values at every point in row-major order. Costs one call per point.
    pub fn tabulate(&self) -> Vec<f64> {
        self.domain().points().map(|x| self.eval(&x)).collect()
    }
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("sizes", &self.domain().sizes())
            .field("calls", &self.calls())
            .finish()
    }
}
