use latticeds::checks::{check_monotone, check_submodular, second_difference_cross};
use latticeds::decompositions::{ds_construct, min_marginal_decomposition, reference_quadratic, DsProblem};
use latticeds::extension::{chain_containing, greedy_extension, lower_bound, RhoProfile};
use latticeds::functions::random;
use latticeds::mm::{accept_step, solve, Algorithm, SolveOptions, Status};
use latticeds::problems::{
    generate_ensemble, parse_problem, parse_problem_str, write_problem, EnsembleKind, EnsembleParams,
};
use latticeds::solvers::{project_profile, SfmMethod, SubgradientOptions};
use latticeds::{ChainMode, LatticeDomain, Oracle, SeparableFunction, DEFAULT_CAP};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn domain() -> impl Strategy<Value = LatticeDomain> {
    prop::collection::vec(2usize..=4, 1..=3).prop_map(|s| LatticeDomain::new(s).unwrap())
}

fn submodular_problem(seed: u64, d: &LatticeDomain) -> DsProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = Oracle::new(random::submodular(&mut rng, d));
    let g = Oracle::new(random::dr_submodular(&mut rng, d));
    DsProblem::new(f, g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn separable_functions_have_zero_cross_differences(
        d in domain(),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random::table(&mut rng, &d, 1.0);
        let levels: Vec<Vec<f64>> = d.sizes().iter().enumerate()
            .map(|(i, &k)| (0..k).map(|l| t.values()[(i * 7 + l) % t.values().len()]).collect())
            .collect();
        let s = SeparableFunction::from_levels(0.5, &levels).to_oracle();
        for x in d.points() {
            for i in 0..d.n() {
                for j in i + 1..d.n() {
                    if x[i] + 1 < d.levels(i) && x[j] + 1 < d.levels(j) {
                        prop_assert!(second_difference_cross(&s, &x, i, j).unwrap().abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn lower_bounds_sit_below_and_touch_the_chain(d in domain(), seed in any::<u64>(), chain_seed in any::<u64>()) {
        let p = submodular_problem(seed, &d);
        for y in d.points() {
            let chain = chain_containing(&d, &y, ChainMode::Randomized { seed: chain_seed }).unwrap();
            prop_assert!(chain.contains(&y));
            let h = lower_bound(&p.f, &y, &chain).unwrap();
            for z in d.points() {
                prop_assert!(h.value(&z) <= p.f.eval(&z) + 1e-9);
            }
            for z in chain.points() {
                prop_assert!((h.value(&z) - p.f.eval(&z)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn extension_is_a_maximum_of_its_subgradients(d in domain(), seed in any::<u64>(), raw in prop::collection::vec(0.0..1.0f64, 12)) {
        let p = submodular_problem(seed, &d);
        let mut k = 0;
        let values = d.sizes().iter().map(|&s| {
            let row: Vec<f64> = (1..s).map(|_| { k += 1; raw[k % raw.len()] }).collect();
            project_profile(&row)
        }).collect();
        let rho = RhoProfile::new(&d, values).unwrap();
        let (value, weights) = greedy_extension(&p.f, &rho).unwrap();
        prop_assert!((rho.dot(&weights) + p.f.eval(&d.zero()) - value).abs() < 1e-9);
        // the greedy weights at any other profile give a smaller linear value here
        let other = RhoProfile::uniform(&d, 0.5);
        let (_, w2) = greedy_extension(&p.f, &other).unwrap();
        prop_assert!(rho.dot(&w2) + p.f.eval(&d.zero()) <= value + 1e-9);
    }

    #[test]
    fn every_algorithm_descends(d in domain(), seed in any::<u64>(), chain_seed in any::<u64>(), eps in prop_oneof![Just(0.0), 0.0..0.3f64]) {
        let p = submodular_problem(seed, &d);
        for alg in Algorithm::ALL {
            let opts = SolveOptions {
                epsilon: eps,
                chain_mode: ChainMode::Randomized { seed: chain_seed },
                ..SolveOptions::with_algorithm(alg)
            };
            let r = solve(&p, &opts).unwrap();
            let accepted: Vec<f64> = r.accepted().map(|it| it.v).collect();
            prop_assert!(accepted.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            prop_assert_eq!(r.certificate.is_some(), r.status == Status::CertifiedLocalMin);
            prop_assert!((p.v(&r.minimizer) - r.value).abs() < 1e-12);
            prop_assert_eq!(&r.iterates.last().unwrap().x, &r.minimizer);
            if alg == Algorithm::ModMod {
                // both bounds are tight at the anchor, so the surrogate starts at v
                let mut prev = r.iterates[0].v;
                for it in &r.iterates[1..] {
                    if it.note != "neighbour" && it.note != "final" {
                        prop_assert!((it.surrogate_at_anchor.unwrap() - prev).abs() < 1e-9);
                    }
                    if it.accepted {
                        prev = it.v;
                    }
                }
            }
        }
    }

    #[test]
    fn inexact_inner_solver_still_descends(seed in any::<u64>()) {
        let d = LatticeDomain::new(vec![4, 4]).unwrap();
        let p = submodular_problem(seed, &d);
        let sfm = SfmMethod::Subgradient(SubgradientOptions { iterations: 5, ..SubgradientOptions::default() });
        let r = solve(&p, &SolveOptions { sfm, ..SolveOptions::with_algorithm(Algorithm::SubSup) }).unwrap();
        let accepted: Vec<f64> = r.accepted().map(|it| it.v).collect();
        prop_assert!(accepted.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn accepted_steps_never_increase(v_old in -10.0..10.0f64, v_new in -10.0..10.0f64, eps in 0.0..1.0f64) {
        if accept_step(v_old, v_new, eps) {
            prop_assert!(v_new < v_old);
        }
    }

    #[test]
    fn min_marginal_residual_is_monotone(d in domain(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Oracle::new(random::dr_submodular(&mut rng, &d));
        let dec = min_marginal_decomposition(&f, true, Some(DEFAULT_CAP)).unwrap();
        prop_assert_eq!(dec.monotone_part.eval(&d.zero()), 0.0);
        prop_assert!(check_monotone(&dec.monotone_part, DEFAULT_CAP).unwrap().holds());
    }

    #[test]
    fn construction_with_a_generous_bound(seed in any::<u64>(), extra in 0.0..3.0f64) {
        let d = LatticeDomain::new(vec![3, 4, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = Oracle::new(random::table(&mut rng, &d, 2.0));
        let (g_ref, m) = reference_quadratic(&d).unwrap();
        let n = latticeds::decompositions::second_difference_extremes(&v, DEFAULT_CAP).unwrap().0 + extra;
        let p = ds_construct(&v, &g_ref, m, n, DEFAULT_CAP).unwrap();
        prop_assert!(check_submodular(&p.f, DEFAULT_CAP).unwrap().holds());
        prop_assert!(check_submodular(&p.g, DEFAULT_CAP).unwrap().holds());
        for x in d.points() {
            prop_assert!((p.v(&x) - v.eval(&x)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn problem_files_round_trip(seed in any::<u64>(), kind in prop_oneof![
        Just(EnsembleKind::Coverage),
        Just(EnsembleKind::ConcaveOfLinearSums),
        Just(EnsembleKind::RandomTableAutosplit),
    ]) {
        let params = EnsembleParams { count: 2, sizes: vec![3, 4], ..EnsembleParams::default() };
        for spec in generate_ensemble(kind, &params, seed).unwrap() {
            let text = serde_json::to_string(&spec).unwrap();
            let again = parse_problem_str(&text).unwrap();
            prop_assert_eq!(&again, &spec);

            let path = std::env::temp_dir().join(format!("latticeds-roundtrip-{seed}-{kind}.json"));
            write_problem(&spec, &path).unwrap();
            let a = spec.build(DEFAULT_CAP, true).unwrap().problem;
            let b = parse_problem(&path, DEFAULT_CAP, true).unwrap().problem;
            std::fs::remove_file(&path).ok();
            for x in a.domain().points() {
                prop_assert_eq!(a.f.eval(&x), b.f.eval(&x));
                prop_assert_eq!(a.g.eval(&x), b.g.eval(&x));
            }
        }
    }
}
