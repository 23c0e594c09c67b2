//! Shared fixtures for the criterion benches.

use latticeds::problems::{generate_ensemble, EnsembleKind, EnsembleParams};
use latticeds::{DsProblem, DEFAULT_CAP};

/// A deterministic instance from one of the generated ensembles.
pub fn instance(kind: EnsembleKind, sizes: &[usize], seed: u64) -> DsProblem {
    let params = EnsembleParams { count: 1, sizes: sizes.to_vec(), ..EnsembleParams::default() };
    let spec = generate_ensemble(kind, &params, seed).expect("valid ensemble").remove(0);
    spec.build(DEFAULT_CAP, false).expect("instance builds").problem
}
