//! Subproblem solvers used by the majorisation-minimisation loops.

mod double_greedy;
mod pav;
mod separable;
mod sfm;

pub use double_greedy::maximize_submodular_dg;
pub use pav::{project_non_increasing, project_profile};
pub use separable::{minimize_separable, minimize_separable_cardinality};
pub use sfm::{
    brute_force_maximize, brute_force_minimize, minimize_submodular, threshold_points, DualityInfo,
    SfmMethod, SfmResult, SubgradientOptions,
};
