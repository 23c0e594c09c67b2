//! Problem files, seeded ensembles, and run traces.

mod ensemble;
mod spec;
mod trace;

pub use ensemble::{generate_ensemble, EnsembleKind, EnsembleParams};
pub use spec::{
    parse_problem, parse_problem_str, write_problem, AutoSplitSpec, CoverageTradeoffSpec, FunctionSpec,
    LoadedProblem, ProblemSpec, FORMAT_VERSION,
};
pub use trace::{write_trace, RunSummary, TraceRecord};
