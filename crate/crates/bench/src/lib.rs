//! Seeded fixtures shared by the benchmarks under `benches/`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumlab_core::harness::random_simple_function;
use sumlab_core::spaces::{PowerSum, SpaceSpec};
use sumlab_core::summing::Operator;
use sumlab_core::vfun::SimpleFunction;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Σ_i |⟨x_i, φ⟩|^r` over `terms` uniform random vectors.
pub fn power_sum(dim: usize, terms: usize, r: f64, seed: u64) -> PowerSum {
    let mut rng = rng(seed);
    let mut objective = PowerSum::new(dim, r).expect("positive exponent");
    for _ in 0..terms {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        objective.push(1.0, &x).expect("matching dimension");
    }
    objective
}

pub fn function(space: &SpaceSpec, cells: usize, seed: u64) -> SimpleFunction {
    random_simple_function(&mut rng(seed), space, cells).expect("valid shapes")
}

pub fn operator(domain: SpaceSpec, codomain: SpaceSpec, seed: u64) -> Operator {
    let mut rng = rng(seed);
    let matrix = (0..codomain.dim())
        .map(|_| (0..domain.dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    Operator::new(matrix, domain, codomain).expect("matching shapes")
}
