use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, SuiteName, LEMMA_SIGMAS, PHI_GRID};
use crate::error::Result;
use crate::harness::{random_simple_function, random_vector, BuiltinKernel};
use crate::spaces::{SpaceSpec, Vector};
use crate::summing::{nuclear_upper_bound, Operator, VectorFamily};
use crate::vfun::SimpleFunction;

/// Instance `index` of `suite` for the run seeded with `seed`.
pub fn generate(suite: SuiteName, seed: u64, index: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    match suite {
        SuiteName::LemmaLe => {
            let space = random_space(&mut rng, 6)?;
            let size = rng.random_range(1..=5);
            let mut vectors: Vec<Vector> = (0..size).map(|_| random_vector(&mut rng, space.dim())).collect();
            if rng.random_bool(0.1) {
                // a repeated member exercises the duplicate-family closed form
                vectors.push(vectors[0].clone());
            }
            Ok(Instance::LemmaLe {
                family: VectorFamily::new(space, vectors)?,
                p: *[1.0, 2.0].choose(&mut rng).unwrap(),
                sigma: *LEMMA_SIGMAS.choose(&mut rng).unwrap(),
            })
        }
        SuiteName::Leinc => {
            let (function, p) = phi_corpus(&mut rng, index)?;
            Ok(Instance::Leinc { function, p, sigmas: PHI_GRID.to_vec() })
        }
        SuiteName::Sandwich => {
            let (function, p) = phi_corpus(&mut rng, index)?;
            Ok(Instance::Sandwich { function, p, sigmas: PHI_GRID.to_vec() })
        }
        SuiteName::Prinint => {
            // index runs through n = 1..=32, α ∈ {1e-3, 0.1, 1} and both kernels before
            // repeating with fresh draws
            let n = (index % 32) as usize + 1;
            let alpha = [1e-3, 0.1, 1.0][(index / 32 % 3) as usize];
            let kernel = if index / 96 % 2 == 0 {
                BuiltinKernel::Diestel
            } else {
                BuiltinKernel::sigma(*[0.25, 0.5, 0.75].choose(&mut rng).unwrap())?
            };
            // S values stay of order one so the 1e-12 identity tolerance sits well above rounding:
            // the operator has unit nuclear bound and every x_i norm at most one
            let operator = random_operator(&mut rng, 4)?;
            let scale = nuclear_upper_bound(&operator).value.max(f64::MIN_POSITIVE);
            let operator = Operator::new(
                operator.matrix().iter().map(|row| row.iter().map(|v| v / scale).collect()).collect(),
                operator.domain().clone(),
                operator.codomain().clone(),
            )?;
            let space = operator.domain().clone();
            let xs = (0..n)
                .map(|_| {
                    if rng.random_bool(0.1) {
                        return Vector::zeros(space.dim());
                    }
                    let x = random_vector(&mut rng, space.dim());
                    let radius: f64 = rng.random_range(0.0..1.0);
                    x.scaled(radius / space.norm_of(&x))
                })
                .collect();
            let bs = (0..n).map(|_| random_vector(&mut rng, 1)).collect();
            Ok(Instance::Prinint { operator, xs, bs, kernel, alpha })
        }
        SuiteName::Q11 => {
            let operator = random_operator(&mut rng, 4)?;
            let function = random_simple_function(&mut rng, operator.domain(), 6)?;
            Ok(Instance::Q11 { operator, function, sigma: *LEMMA_SIGMAS.choose(&mut rng).unwrap() })
        }
        SuiteName::Jp => {
            // n = 1..=12 at p = 1 first, then the same range at p = 2
            let n = (index % 12) as usize + 1;
            let p = if index / 12 % 2 == 0 { 1.0 } else { 2.0 };
            let nu = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            Ok(Instance::Jp { nu, p, search_seed: rng.random() })
        }
        SuiteName::Hilbert => {
            let rows = rng.random_range(1..=5);
            let cols = rng.random_range(1..=5);
            let matrix = (0..rows).map(|_| random_vector(&mut rng, cols).0).collect();
            let operator = Operator::new(matrix, SpaceSpec::lp(cols, 2.0)?, SpaceSpec::lp(rows, 2.0)?)?;
            Ok(Instance::Hilbert { operator, search_seed: rng.random() })
        }
    }
}

/// Unit-weight `ℓ_1`, `ℓ_2` or `ℓ_∞` of dimension `1..=max_dim`.
fn random_space(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<SpaceSpec> {
    let dim = rng.random_range(1..=max_dim);
    match rng.random_range(0..3) {
        0 => SpaceSpec::lp(dim, 1.0),
        1 => SpaceSpec::lp(dim, 2.0),
        _ => SpaceSpec::linf(dim),
    }
}

fn random_operator(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Operator> {
    let domain = random_space(rng, max_dim)?;
    let codomain = random_space(rng, max_dim)?;
    let matrix = (0..codomain.dim()).map(|_| random_vector(rng, domain.dim()).0).collect();
    Operator::new(matrix, domain, codomain)
}

/// Simple functions on up to 6 cells in spaces of dimension up to 4; every sixth one is constant.
fn phi_corpus(rng: &mut ChaCha8Rng, index: u64) -> Result<(SimpleFunction, f64)> {
    let space = random_space(rng, 4)?;
    let mut f = random_simple_function(rng, &space, 6)?;
    if index % 6 == 5 {
        f = SimpleFunction::constant(space, f.measure().clone(), f.values()[0].clone())?;
    }
    Ok((f, *[1.0, 2.0].choose(rng).unwrap()))
}
