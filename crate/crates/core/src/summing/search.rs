//! Seeded family search for ideal-norm lower bounds, plus the exact oracles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    ratio_parts, Certification, Diagnostics, NormEstimate, Operator, SummingParams, VectorFamily,
};
use crate::error::{Error, Result};
use crate::spaces::{DualSearchConfig, Exponent, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilySearchConfig {
    pub restarts: usize,
    /// Families of sizes `1..=max_family` are tried in rotation.
    pub max_family: usize,
    pub seed: u64,
    /// Return the exact value when an oracle applies.
    pub use_oracle: bool,
    pub initial_step: f64,
    pub min_step: f64,
    /// Relative gain per sweep below which the step is halved.
    pub relative_stop: f64,
    /// Ratio evaluations allowed per restart, including the first.
    pub max_evaluations: usize,
    pub engine: DualSearchConfig,
}

impl Default for FamilySearchConfig {
    fn default() -> Self {
        FamilySearchConfig {
            restarts: 256,
            max_family: 8,
            seed: 0,
            use_oracle: true,
            initial_step: 0.5,
            min_step: 1e-3,
            relative_stop: 1e-9,
            max_evaluations: 400,
            engine: DualSearchConfig::default(),
        }
    }
}

/// Final family of one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResult {
    pub restart: usize,
    pub family: Vec<Vector>,
    pub ratio: f64,
    pub certified: bool,
    pub evaluations: usize,
}

/// Runs every restart of the family search and returns their final families in restart order.
///
/// Restart `k` draws from its own ChaCha stream, so its result does not depend on how many
/// restarts run or in which order.
pub fn search_families(
    op: &Operator,
    params: &SummingParams,
    config: &FamilySearchConfig,
) -> Result<Vec<FamilyResult>> {
    let params = params.validated()?;
    if config.max_family == 0 {
        return Err(Error::InvalidParameter("max_family must be at least 1".into()));
    }
    (0..config.restarts)
        .into_par_iter()
        .map(|k| run_restart(op, &params, config, k))
        .collect()
}

fn run_restart(
    op: &Operator,
    params: &SummingParams,
    config: &FamilySearchConfig,
    restart: usize,
) -> Result<FamilyResult> {
    let dim = op.domain().dim();
    let size = 1 + restart % config.max_family;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let mut coords: Vec<f64> = (0..size * dim).map(|_| StandardNormal.sample(&mut rng)).collect();

    let eval = |coords: &[f64]| -> Result<(f64, bool)> {
        let vectors = coords.chunks_exact(dim).map(Vector::from).collect();
        let fam = VectorFamily::new(op.domain().clone(), vectors)?;
        match ratio_parts(op, &fam, params, &config.engine) {
            Err(Error::DegenerateFamily) => Ok((0.0, true)),
            other => other,
        }
    };

    let (mut best, mut certified) = eval(&coords)?;
    let mut evaluations = 1;
    let mut step = config.initial_step;
    'outer: while step >= config.min_step {
        let sweep_start = best;
        for idx in 0..coords.len() {
            for dir in [1.0, -1.0] {
                if evaluations >= config.max_evaluations {
                    break 'outer;
                }
                let old = coords[idx];
                coords[idx] = old + dir * step;
                let (r, c) = eval(&coords)?;
                evaluations += 1;
                if r > best {
                    best = r;
                    certified = c;
                    break;
                }
                coords[idx] = old;
            }
        }
        if best - sweep_start <= config.relative_stop * sweep_start.abs() {
            step *= 0.5;
        }
    }

    Ok(FamilyResult {
        restart,
        family: coords.chunks_exact(dim).map(Vector::from).collect(),
        ratio: best,
        certified,
        evaluations,
    })
}

/// Larger ratio wins; ties prefer the smaller family, then lexicographic order.
fn beats(a: &FamilyResult, b: &FamilyResult) -> bool {
    if a.ratio != b.ratio {
        return a.ratio > b.ratio;
    }
    if a.family.len() != b.family.len() {
        return a.family.len() < b.family.len();
    }
    let flat = |f: &FamilyResult| f.family.iter().flat_map(|v| v.0.clone()).collect::<Vec<_>>();
    flat(a).iter().zip(&flat(b)).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

/// Lower bound for the ideal norm selected by `params` (exact when an oracle applies).
pub fn estimate_ideal_norm_lower(
    op: &Operator,
    params: &SummingParams,
    config: &FamilySearchConfig,
) -> Result<NormEstimate> {
    let params = params.validated()?;
    if op.is_zero() {
        return Ok(NormEstimate {
            value: 0.0,
            certification: Certification::Exact,
            diagnostics: Diagnostics { method: "zero_operator".into(), seed: config.seed, ..Default::default() },
        });
    }
    if config.use_oracle {
        if params.is_plain_p_summing(2.0) {
            if let Ok(value) = hilbert_schmidt_norm(op) {
                let basis = VectorFamily::basis(op.domain().clone());
                return Ok(NormEstimate {
                    value,
                    certification: Certification::Exact,
                    diagnostics: Diagnostics {
                        method: "hilbert_schmidt".into(),
                        seed: config.seed,
                        best_family: Some(basis.vectors().to_vec()),
                        ..Default::default()
                    },
                });
            }
        }
        if let Ok(value) = lattice_oracle(op, &params) {
            let ones = Vector(vec![1.0; op.domain().dim()]);
            return Ok(NormEstimate {
                value,
                certification: Certification::Exact,
                diagnostics: Diagnostics {
                    method: "lattice".into(),
                    seed: config.seed,
                    best_family: Some(vec![ones]),
                    ..Default::default()
                },
            });
        }
    }

    let results = search_families(op, &params, config)?;
    let iterations = results.iter().map(|r| r.evaluations).sum();
    let best = results.into_iter().reduce(|a, b| if beats(&b, &a) { b } else { a });
    let best = best.ok_or_else(|| Error::InvalidParameter("restarts must be at least 1".into()))?;
    Ok(NormEstimate {
        value: best.ratio,
        certification: Certification::LowerBound,
        diagnostics: Diagnostics {
            method: "family_search".into(),
            seed: config.seed,
            restarts: config.restarts,
            iterations,
            best_family: Some(best.family),
            witness: None,
        },
    })
}

/// `(Σ_{ij} T_ij²)^{1/2}`, which equals `π_2(T)` between unit-weight exponent-2 spaces.
pub fn hilbert_schmidt_norm(op: &Operator) -> Result<f64> {
    if !op.domain().is_hilbert() || !op.codomain().is_hilbert() {
        return Err(Error::OracleInapplicable(
            "Hilbert-Schmidt oracle needs unit-weight exponent-2 domain and codomain".into(),
        ));
    }
    Ok(op.matrix().iter().flatten().map(|v| v * v).sum::<f64>().sqrt())
}

/// Exact `π_p` for lattice-type maps out of unit-weight `ℓ_∞^n`.
///
/// Applies when the codomain has exponent `p` and either every row of the matrix has at most one
/// nonzero entry, or `p = 1` and all entries are nonnegative. Then `Σ_k ‖T x_k‖^p` is dominated
/// by `‖ |T| 1 ‖^p · max_j Σ_k |x_kj|^p` and the family `{1}` attains the bound, so
/// `π_p(T) = ‖ |T| 1 ‖`.
pub fn lattice_oracle(op: &Operator, params: &SummingParams) -> Result<f64> {
    let p = params.p;
    let domain = op.domain();
    if domain.exponent() != Exponent::Infinity || !domain.has_unit_weights() {
        return Err(Error::OracleInapplicable("lattice oracle needs a unit-weight ℓ_∞ domain".into()));
    }
    if op.codomain().exponent() != Exponent::Finite(p) || !params.is_plain_p_summing(p) {
        return Err(Error::OracleInapplicable(
            "lattice oracle needs p-summing parameters and an exponent-p codomain".into(),
        ));
    }
    let single_entry_rows =
        op.matrix().iter().all(|row| row.iter().filter(|v| **v != 0.0).count() <= 1);
    let positive = p == 1.0 && op.matrix().iter().flatten().all(|v| *v >= 0.0);
    if !single_entry_rows && !positive {
        return Err(Error::OracleInapplicable(
            "lattice oracle needs single-entry rows, or p = 1 and a nonnegative matrix".into(),
        ));
    }
    let image: Vec<f64> = op.matrix().iter().map(|row| row.iter().map(|v| v.abs()).sum()).collect();
    Ok(op.codomain().norm_of(&image))
}

/// `Σ_j ‖e_j^*‖ ‖T e_j‖`, an upper bound for `π_1(T)` and hence for every `π_p`, `π_{p,q}` and
/// `π_p^σ` of `T`.
pub fn nuclear_upper_bound(op: &Operator) -> NormEstimate {
    let n = op.domain().dim();
    let mut unit = vec![0.0; n];
    let mut value = 0.0;
    for j in 0..n {
        unit[j] = 1.0;
        value += op.domain().dual_norm_of(&unit) * op.image_norm(&unit);
        unit[j] = 0.0;
    }
    NormEstimate {
        value,
        certification: Certification::UpperBound,
        diagnostics: Diagnostics { method: "coordinate_nuclear".into(), ..Default::default() },
    }
}
