//! Acceptance criteria, one test per criterion. Each prints a single PASS/FAIL line.
//!
//! Run with `cargo test -p sumlab-core --test acceptance -- --nocapture --test-threads=1` to see
//! the lines in order.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumlab_core::harness::{
    check_prinint_forward, check_q11, ones, random_simple_function, render_json_lines, BuiltinKernel,
};
use sumlab_core::spaces::{DualSearchConfig, SpaceSpec};
use sumlab_core::suites::{flatten, generate, run_instance, run_suite, Instance, InstanceRun, SuiteConfig, SuiteName};
use sumlab_core::summing::FamilySearchConfig;
use sumlab_core::vfun::{
    bochner_norm, convexified_norm_upper, pettis_norm, phi_norm, refine, MeasureSpace, SimpleFunction,
};

const SEED: u64 = 20240611;

fn config(instances: usize) -> SuiteConfig {
    SuiteConfig { seed: SEED, instances, ..Default::default() }
}

fn failures(runs: &[InstanceRun]) -> Vec<String> {
    runs.iter()
        .flat_map(|run| run.reports.iter().filter(|r| !r.pass).map(move |r| format!("#{} {} margin {:e}", run.index, r.check, r.margin)))
        .collect()
}

fn verdict(id: u32, title: &str, start: Instant, problems: &[String]) {
    let status = if problems.is_empty() { "PASS" } else { "FAIL" };
    println!(
        "criterion {id} [{status}] {title}: {} violation(s) in {:.1}s",
        problems.len(),
        start.elapsed().as_secs_f64()
    );
    for p in problems.iter().take(10) {
        println!("    {p}");
    }
    assert!(problems.is_empty(), "criterion {id} failed");
}

#[test]
fn criterion_1_lemma_chain() {
    let start = Instant::now();
    let runs = run_suite(SuiteName::LemmaLe, &config(1000)).unwrap();
    assert_eq!(runs.len(), 1000);
    verdict(1, "weak_{p/(1-σ)} <= mixed <= weak_p on 1000 families", start, &failures(&runs));
}

#[test]
fn criterion_2_phi_monotone_in_sigma() {
    let start = Instant::now();
    let runs = run_suite(SuiteName::Leinc, &config(1000)).unwrap();
    let mut problems = failures(&runs);
    // every adjacent pair of the 6-point grid, polytope duals at 1e-12
    for run in &runs {
        let Instance::Leinc { function, sigmas, .. } = &run.instance else { unreachable!() };
        assert_eq!(sigmas, &[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert_eq!(run.reports.len(), 5);
        if function.space().has_polytope_dual() && run.reports.iter().any(|r| r.tolerance > 1e-12) {
            problems.push(format!("#{} checked above 1e-12", run.index));
        }
    }
    verdict(2, "Φ_{p,σ} nondecreasing in σ on 1000 functions", start, &problems);
}

#[test]
fn criterion_3_sandwich() {
    let start = Instant::now();
    let runs = run_suite(SuiteName::Sandwich, &config(1000)).unwrap();
    let mut problems = failures(&runs);

    // explicit single-cell and constant functions
    let engine = DualSearchConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let spaces = [SpaceSpec::lp(3, 1.0).unwrap(), SpaceSpec::lp(3, 2.0).unwrap(), SpaceSpec::linf(3).unwrap()];
    for i in 0..60 {
        let space = &spaces[i % 3];
        let f = random_simple_function(&mut rng, space, 6).unwrap();
        let f = if i % 2 == 0 {
            SimpleFunction::constant(space.clone(), f.measure().clone(), f.values()[0].clone()).unwrap()
        } else {
            let mass = f.measure().masses()[0];
            SimpleFunction::new(space.clone(), MeasureSpace::new(vec![mass]).unwrap(), vec![f.values()[0].clone()]).unwrap()
        };
        let p = [1.0, 2.0][i % 2];
        for sigma in [0.0, 0.3, 0.5, 0.8, 1.0] {
            let pettis = pettis_norm(&f, p, &engine).unwrap().value;
            let phi = phi_norm(&f, p, sigma, &engine).unwrap().value;
            let conv = convexified_norm_upper(&f, p, sigma, &Default::default()).unwrap().value;
            let spread = pettis.max(phi).max(conv) - pettis.min(phi).min(conv);
            if spread > 1e-10 {
                problems.push(format!("collapse {i} σ={sigma}: spread {spread:e}"));
            }
        }
    }
    verdict(3, "pettis <= convexified <= Φ, collapse on constant/single-cell", start, &problems);
}

#[test]
fn criterion_4_hilbert_oracle() {
    let start = Instant::now();
    let runs = run_suite(SuiteName::Hilbert, &config(200)).unwrap();
    let mut problems = failures(&runs);
    let reach = runs.iter().flat_map(|r| &r.reports).filter(|r| r.check == "hilbert_search_reach").count();
    if reach == 0 {
        problems.push("no instance with n <= 3".into());
    }
    for run in &runs {
        let Instance::Hilbert { operator, .. } = &run.instance else { unreachable!() };
        let small = operator.domain().dim().max(operator.codomain().dim()) <= 3;
        let has_reach = run.reports.iter().any(|r| r.check == "hilbert_search_reach");
        if small != has_reach {
            problems.push(format!("#{} reach check missing", run.index));
        }
        assert_eq!(run.reports[0].tolerance, 1e-10);
    }
    verdict(4, "π_2 search vs Hilbert-Schmidt on 200 matrices", start, &problems);
}

#[test]
fn criterion_5_j1_exactness() {
    let start = Instant::now();
    let cfg = config(12);
    let mut problems = Vec::new();
    let mut q11_checks = 0;
    for index in 0..12 {
        let instance = generate(SuiteName::Jp, cfg.seed, index).unwrap();
        let Instance::Jp { nu, p, .. } = &instance else { unreachable!() };
        assert_eq!((*p, nu.len()), (1.0, index as usize + 1));
        let reports = run_instance(&instance, cfg.seed, index, &cfg).unwrap();
        for name in ["jp_search_brute[p=1]", "jp_ones_brute[p=1]"] {
            assert!(reports.iter().any(|r| r.check == name), "{name} missing");
        }
        q11_checks += reports.iter().filter(|r| r.check.starts_with("q11")).count();
        problems.extend(reports.iter().filter(|r| !r.pass).map(|r| format!("n={} {} margin {:e}", index + 1, r.check, r.margin)));
    }
    if q11_checks < 500 {
        problems.push(format!("only {q11_checks} q11 functions"));
    }
    verdict(5, "j_1 brute force, ones family exact, q11 at σ=0", start, &problems);
}

#[test]
fn criterion_6_converse_construction() {
    let start = Instant::now();
    // 192 consecutive indices cover n = 1..=32 × α × kernel; 100 rounds of that
    let runs = run_suite(SuiteName::Prinint, &config(192 * 100)).unwrap();
    let mut problems = failures(&runs);
    for run in runs.iter().take(192) {
        let strong = &run.reports[0];
        if strong.tolerance != 1e-12 || !strong.check.starts_with("prinint_converse") {
            problems.push(format!("#{} unexpected report layout", run.index));
        }
    }
    verdict(6, "converse construction identities, 19200 instances", start, &problems);
}

#[test]
fn criterion_7_reduction_coherence() {
    let start = Instant::now();
    let engine = DualSearchConfig::default();
    let tol = Default::default();
    let mut problems = Vec::new();
    for index in 0..100 {
        let Instance::Q11 { operator, function, .. } = generate(SuiteName::Q11, SEED, index).unwrap() else {
            unreachable!()
        };
        let c = 1.0 + index as f64;
        let q = check_q11(&operator, &function, 0.0, c, &engine, &tol).unwrap();
        let d = check_prinint_forward(&operator, &function, &ones(function.measure()), &BuiltinKernel::Diestel, c, &engine, &tol).unwrap();
        let same = q.lhs.to_bits() == d.lhs.to_bits()
            && q.rhs.to_bits() == d.rhs.to_bits()
            && q.margin.to_bits() == d.margin.to_bits();
        if !same {
            problems.push(format!("#{index}: q11 ({}, {}) vs diestel ({}, {})", q.lhs, q.rhs, d.lhs, d.rhs));
        }
    }
    verdict(7, "q11 at σ=0 equals the Diestel forward check bit for bit", start, &problems);
}

#[test]
fn criterion_8_refinement_invariance() {
    let start = Instant::now();
    let engine = DualSearchConfig::default();
    let mut problems = Vec::new();
    for index in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(index);
        let dim = rng.random_range(1..=4);
        let space = match index % 3 {
            0 => SpaceSpec::lp(dim, 1.0),
            1 => SpaceSpec::lp(dim, 2.0),
            _ => SpaceSpec::linf(dim),
        }
        .unwrap();
        let f = random_simple_function(&mut rng, &space, 5).unwrap();
        let p = [1.0, 2.0][rng.random_range(0..2)];
        let sigma = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0][rng.random_range(0..6)];
        let norms = |g: &SimpleFunction| {
            [
                pettis_norm(g, p, &engine).unwrap().value,
                bochner_norm(g, p).unwrap(),
                phi_norm(g, p, sigma, &engine).unwrap().value,
                convexified_norm_upper(g, p, sigma, &Default::default()).unwrap().value,
            ]
        };
        let before = norms(&f);
        for k in [2, 3, 5] {
            let after = norms(&refine(&f, k).unwrap());
            for (name, (a, b)) in ["pettis", "bochner", "phi", "convexified"].iter().zip(before.iter().zip(&after)) {
                if (a - b).abs() > 1e-12 {
                    problems.push(format!("#{index} k={k} {name}: {a} vs {b}"));
                }
            }
        }
    }
    verdict(8, "four norms invariant under refine(k), k in {2,3,5}", start, &problems);
}

#[test]
fn criterion_9_determinism() {
    let start = Instant::now();
    let cfg = SuiteConfig {
        seed: SEED,
        instances: 24,
        family: FamilySearchConfig { restarts: 32, ..Default::default() },
        jp_batch: 4,
        ..Default::default()
    };
    let render = |suite: SuiteName, threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let runs = pool.install(|| run_suite(suite, &cfg)).unwrap();
        render_json_lines(&flatten(&runs)).unwrap()
    };
    let mut problems = Vec::new();
    for suite in SuiteName::ALL {
        let first = render(suite, 1);
        if first != render(suite, 1) {
            problems.push(format!("{suite}: repeated run differs"));
        }
        if first != render(suite, 2) {
            problems.push(format!("{suite}: 2 threads differ from 1"));
        }
    }
    // instance k does not depend on how many instances run
    let short = run_suite(SuiteName::LemmaLe, &SuiteConfig { instances: 5, ..cfg.clone() }).unwrap();
    let long = run_suite(SuiteName::LemmaLe, &cfg).unwrap();
    if short[..] != long[..5] {
        problems.push("prefix of a longer run differs".into());
    }
    verdict(9, "byte-identical reports across runs and thread counts", start, &problems);
}
