use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use latticeds::checks::{check_dr, check_monotone, check_submodular, Verdict};
use latticeds::decompositions::{additive_lower_bounds, monotone_submodular_split, second_difference_extremes};
use latticeds::extension::{chain_containing, lower_bound};
use latticeds::problems::{generate_ensemble, parse_problem, write_trace, EnsembleKind, EnsembleParams, LoadedProblem, RunSummary};
use latticeds::solvers::{brute_force_minimize, SfmMethod, SubgradientOptions};
use latticeds::upper_bounds::{dr_split, lambda_bruteforce, upper_bound_full, UpperBound};
use latticeds::{solve, Algorithm, ChainMode, Error, Oracle, Result, SolveOptions, UbPolicy};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{BenchArgs, ChainArg, Cli, Command, KindArg, SfmArg, SolveArgs, UbArg};

/// Exact comparisons in `bench` are limited to this many points.
const BENCH_CAP: usize = 10_000;

pub fn run(cli: Cli) -> Result<u8> {
    let cap = cli.cap;
    match cli.command {
        Command::Solve { problem, opts, trace, summary } => solve_cmd(&problem, &opts, trace.as_deref(), summary.as_deref(), cap),
        Command::Check { problem } => check_cmd(&problem, cap),
        Command::Decompose { problem, lambda } => decompose_cmd(&problem, lambda, cap),
        Command::Bounds { problem, at, chain, seed, lambda, variant } => {
            let loaded = parse_problem(&problem, cap, true)?;
            let p = &loaded.problem;
            let chain = chain_containing(p.domain(), &at, chain_mode(chain, seed))?;
            let h = lower_bound(&p.g, &at, &chain)?;
            let lambda = match lambda.or(loaded.lambda).or(p.lambda_hint) {
                Some(l) => l,
                None => lambda_bruteforce(&p.f, cap)?,
            };
            let upper = match upper_bound_full(&p.f, lambda, &at, variant.into())? {
                UpperBound::Separable(s) => json!({ "separable": s }),
                UpperBound::Anchored(a) => {
                    p.domain().ensure_within_cap(cap)?;
                    json!({ "values": p.domain().points().map(|y| a.value(&y)).collect::<Vec<_>>() })
                }
            };
            print(&json!({
                "anchor": at,
                "chain": chain.increments(),
                "lower_bound_g": h,
                "lambda": lambda,
                "upper_bound_f": upper,
            }));
            Ok(0)
        }
        Command::Oracle { problem } => {
            let loaded = parse_problem(&problem, cap, true)?;
            let (x, value) = brute_force_minimize(&loaded.problem.v_oracle(), cap)?;
            print(&json!({ "minimizer": x, "value": value }));
            Ok(0)
        }
        Command::Bench(args) => bench_cmd(&args, cap),
    }
}

fn print(v: &Value) {
    // a closed pipe is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("values serialise"));
}

fn chain_mode(chain: ChainArg, seed: u64) -> ChainMode {
    match chain {
        ChainArg::Canonical => ChainMode::Canonical,
        ChainArg::Randomized => ChainMode::Randomized { seed },
    }
}

fn solve_options(args: &SolveArgs, loaded: &LoadedProblem, cap: usize) -> SolveOptions {
    SolveOptions {
        algorithm: args.algorithm.into(),
        epsilon: args.epsilon,
        max_iters: args.max_iters,
        chain_mode: chain_mode(args.chain, args.seed),
        ub_policy: match args.ub {
            UbArg::TryBoth => UbPolicy::TryBoth,
            UbArg::Grow1 => UbPolicy::Grow1,
            UbArg::Grow2 => UbPolicy::Grow2,
        },
        sfm: match args.sfm {
            SfmArg::Brute => SfmMethod::BruteForce { cap },
            SfmArg::Subgrad => {
                SfmMethod::Subgradient(SubgradientOptions { iterations: args.sfm_iters, ..SubgradientOptions::default() })
            }
        },
        lambda: args.lambda.or(loaded.lambda),
        start: None,
        budget: args.budget.or(loaded.budget),
        cap,
    }
}

fn solve_cmd(problem: &Path, args: &SolveArgs, trace: Option<&Path>, summary: Option<&Path>, cap: usize) -> Result<u8> {
    let loaded = parse_problem(problem, cap, true)?;
    let report = solve(&loaded.problem, &solve_options(args, &loaded, cap))?;
    if let Some(path) = trace {
        write_trace(&report, BufWriter::new(File::create(path)?))?;
    }
    let name = loaded.spec.name.clone().unwrap_or_else(|| problem.display().to_string());
    let row = RunSummary::new(name, &report);
    if let Some(path) = summary {
        write_csv(path, std::slice::from_ref(&row))?;
    }
    print(&json!({
        "summary": row,
        "certificate": report.certificate,
        "predicted_bound": report.predicted_bound,
        "warnings": loaded.warnings,
    }));
    Ok(0)
}

fn write_csv(path: &Path, rows: &[RunSummary]) -> Result<()> {
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    for r in rows {
        w.serialize(r).map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

fn verdict(v: Verdict) -> Value {
    match v {
        Verdict::Holds => json!({ "holds": true }),
        Verdict::Violated(w) => json!({ "holds": false, "witness": w }),
    }
}

fn verdicts(h: &Oracle, cap: usize) -> Result<Value> {
    Ok(json!({
        "submodular": verdict(check_submodular(h, cap)?),
        "dr_submodular": verdict(check_dr(h, cap)?),
        "monotone": verdict(check_monotone(h, cap)?),
    }))
}

fn check_cmd(problem: &Path, cap: usize) -> Result<u8> {
    let loaded = parse_problem(problem, cap, false)?;
    let p = &loaded.problem;
    let f_ok = check_submodular(&p.f, cap)?.holds();
    let g_ok = check_submodular(&p.g, cap)?.holds();
    print(&json!({
        "f": verdicts(&p.f, cap)?,
        "g": verdicts(&p.g, cap)?,
        "v": verdicts(&p.v_oracle(), cap)?,
        "valid": f_ok && g_ok,
    }));
    Ok(if f_ok && g_ok { 0 } else { 2 })
}

fn decompose_cmd(problem: &Path, lambda: Option<f64>, cap: usize) -> Result<u8> {
    let loaded = parse_problem(problem, cap, true)?;
    let p = &loaded.problem;
    let lambda_brute = lambda_bruteforce(&p.f, cap)?;
    let lambda = lambda.or(loaded.lambda).or(p.lambda_hint).unwrap_or(lambda_brute);
    let split = dr_split(&p.f, lambda)?;
    let mut parts = serde_json::Map::new();
    for (name, h) in [("f", &p.f), ("g", &p.g)] {
        let (modular, monotone) = monotone_submodular_split(h, cap)?;
        parts.insert(
            name.into(),
            json!({
                "modular": modular,
                "monotone_part_monotone": verdict(check_monotone(&monotone, cap)?),
                "monotone_part_submodular": verdict(check_submodular(&monotone, cap)?),
            }),
        );
    }
    let (n_max, witness) = second_difference_extremes(&p.v_oracle(), cap)?;
    print(&json!({
        "lambda": lambda,
        "lambda_bruteforce": lambda_brute,
        "dr_residual": verdict(check_dr(&split.residual, cap)?),
        "monotone_splits": parts,
        "additive_bounds": additive_lower_bounds(p, cap)?,
        "cross_difference_max": n_max,
        "cross_difference_witness": witness,
    }));
    Ok(0)
}

fn bench_cmd(args: &BenchArgs, cap: usize) -> Result<u8> {
    let kind = match args.kind {
        KindArg::Coverage => EnsembleKind::Coverage,
        KindArg::ConcaveOfLinearSums => EnsembleKind::ConcaveOfLinearSums,
        KindArg::RandomTableAutosplit => EnsembleKind::RandomTableAutosplit,
    };
    let params = EnsembleParams { count: args.count, sizes: args.sizes.clone(), regions: args.regions, weight_scale: 1.0 };
    let cap = cap.min(BENCH_CAP);
    latticeds::LatticeDomain::new(args.sizes.clone())?.ensure_within_cap(cap)?;
    let specs = generate_ensemble(kind, &params, args.opts.seed)?;
    let algorithms: Vec<Algorithm> = if args.algorithms.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        args.algorithms.iter().map(|&a| a.into()).collect()
    };
    let jobs: Vec<_> = specs.iter().flat_map(|s| algorithms.iter().map(move |&a| (s, a))).collect();

    let rows: Vec<RunSummary> = jobs
        .par_iter()
        .map(|&(spec, algorithm)| {
            // each worker builds its own oracles
            let loaded = spec.build(cap, true)?;
            let mut opts = solve_options(&args.opts, &loaded, cap);
            opts.algorithm = algorithm;
            let report = solve(&loaded.problem, &opts)?;
            let (_, best) = brute_force_minimize(&loaded.problem.v_oracle(), cap)?;
            let name = spec.name.clone().unwrap_or_default();
            Ok(RunSummary::new(name, &report).with_bruteforce(best))
        })
        .collect::<Result<_>>()?;

    if let Some(path) = &args.summary {
        write_csv(path, &rows)?;
    }
    let stats: Vec<Value> = algorithms
        .iter()
        .map(|a| {
            let name = a.to_string();
            let gaps: Vec<f64> = rows.iter().filter(|r| r.algorithm == name).filter_map(|r| r.gap).collect();
            let runs = gaps.len();
            json!({
                "algorithm": name,
                "runs": runs,
                "optimal": gaps.iter().filter(|g| g.abs() <= 1e-9).count(),
                "certified": rows.iter().filter(|r| r.algorithm == name && r.status == "certified_local_min").count(),
                "mean_gap": gaps.iter().sum::<f64>() / runs.max(1) as f64,
                "max_gap": gaps.iter().copied().fold(0.0, f64::max),
                "min_gap": gaps.iter().copied().fold(f64::INFINITY, f64::min),
                "negative_gaps": gaps.iter().filter(|&&g| g < -1e-9).count(),
            })
        })
        .collect();
    print(&json!({ "kind": kind, "instances": specs.len(), "stats": stats }));
    Ok(0)
}
