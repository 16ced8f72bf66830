//! Seeded verification suites: instance generators plus runners producing [`CheckReport`]s.
//!
//! Instance `k` of a run with seed `s` is drawn from ChaCha stream `k` of seed `s`, so it does not
//! depend on how many instances run or on the thread count, and a serialized [`Instance`] replays
//! on its own.

mod generate;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{
    check_leinc, check_prinint_converse_construction, check_prinint_forward, check_q11,
    scenario_jp, BuiltinKernel, CheckReport, JpConfig, Tolerances,
};
use crate::spaces::{DualSearchConfig, Vector};
use crate::summing::{
    hilbert_schmidt_norm, lemma_le_chain, nuclear_upper_bound, search_families, summing_ratio,
    FamilySearchConfig, Operator, SummingParams, VectorFamily,
};
use crate::vfun::{bochner_norm, convexified_norm_upper, pettis_norm, phi_norm, DecompositionSearchConfig, SimpleFunction};

pub use generate::generate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    LemmaLe,
    Leinc,
    Sandwich,
    Prinint,
    Q11,
    Jp,
    Hilbert,
}

impl SuiteName {
    pub const ALL: [SuiteName; 7] = [
        SuiteName::LemmaLe,
        SuiteName::Leinc,
        SuiteName::Sandwich,
        SuiteName::Prinint,
        SuiteName::Q11,
        SuiteName::Jp,
        SuiteName::Hilbert,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::LemmaLe => "lemma_le",
            SuiteName::Leinc => "leinc",
            SuiteName::Sandwich => "sandwich",
            SuiteName::Prinint => "prinint",
            SuiteName::Q11 => "q11",
            SuiteName::Jp => "jp",
            SuiteName::Hilbert => "hilbert",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// σ values of the Lemma 2.2 corpus.
pub const LEMMA_SIGMAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.9];

/// The σ grid of the monotonicity and sandwich corpus.
pub const PHI_GRID: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// One generated input of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "snake_case")]
pub enum Instance {
    LemmaLe { family: VectorFamily, p: f64, sigma: f64 },
    Leinc { function: SimpleFunction, p: f64, sigmas: Vec<f64> },
    Sandwich { function: SimpleFunction, p: f64, sigmas: Vec<f64> },
    Prinint { operator: Operator, xs: Vec<Vector>, bs: Vec<Vector>, kernel: BuiltinKernel, alpha: f64 },
    Q11 { operator: Operator, function: SimpleFunction, sigma: f64 },
    Jp { nu: Vec<f64>, p: f64, search_seed: u64 },
    Hilbert { operator: Operator, search_seed: u64 },
}

impl Instance {
    pub fn suite(&self) -> SuiteName {
        match self {
            Instance::LemmaLe { .. } => SuiteName::LemmaLe,
            Instance::Leinc { .. } => SuiteName::Leinc,
            Instance::Sandwich { .. } => SuiteName::Sandwich,
            Instance::Prinint { .. } => SuiteName::Prinint,
            Instance::Q11 { .. } => SuiteName::Q11,
            Instance::Jp { .. } => SuiteName::Jp,
            Instance::Hilbert { .. } => SuiteName::Hilbert,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: usize,
    pub engine: DualSearchConfig,
    /// Family search used by the `jp` and `hilbert` suites (its seed is set per instance).
    pub family: FamilySearchConfig,
    pub tolerances: Tolerances,
    /// Random simple functions checked per `jp` instance.
    pub jp_batch: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            instances: 100,
            engine: DualSearchConfig::default(),
            family: FamilySearchConfig::default(),
            tolerances: Tolerances::default(),
            jp_batch: 42,
        }
    }
}

/// Reports of one instance, tagged with its index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRun {
    pub index: u64,
    pub instance: Instance,
    pub reports: Vec<CheckReport>,
}

impl InstanceRun {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Runs instances `0..config.instances` of `suite`, in parallel, returning them in index order.
pub fn run_suite(suite: SuiteName, config: &SuiteConfig) -> Result<Vec<InstanceRun>> {
    (0..config.instances as u64)
        .into_par_iter()
        .map(|index| {
            let instance = generate(suite, config.seed, index)?;
            let reports = run_instance(&instance, config.seed, index, config)?;
            Ok(InstanceRun { index, instance, reports })
        })
        .collect()
}

/// All reports of a run, in order.
pub fn flatten(runs: &[InstanceRun]) -> Vec<CheckReport> {
    runs.iter().flat_map(|r| r.reports.iter().cloned()).collect()
}

/// Runs the checks of one instance; reports carry `seed` and `index` as their origin.
pub fn run_instance(instance: &Instance, seed: u64, index: u64, config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let tol = &config.tolerances;
    let engine = &config.engine;
    let reports = match instance {
        Instance::LemmaLe { family, p, sigma } => run_lemma_le(family, *p, *sigma, engine, tol)?,
        Instance::Leinc { function, p, sigmas } => run_leinc(function, *p, sigmas, engine, tol)?,
        Instance::Sandwich { function, p, sigmas } => run_sandwich(function, *p, sigmas, engine, tol)?,
        Instance::Prinint { operator, xs, bs, kernel, alpha } => {
            run_prinint(operator, xs, bs, kernel, *alpha, engine, tol)?
        }
        Instance::Q11 { operator, function, sigma } => {
            let c = nuclear_upper_bound(operator).value.powf(1.0 / (1.0 - sigma));
            vec![check_q11(operator, function, *sigma, c, engine, tol)?]
        }
        Instance::Jp { nu, p, search_seed } => run_jp(nu, *p, *search_seed, config)?,
        Instance::Hilbert { operator, search_seed } => run_hilbert(operator, *search_seed, config)?,
    };
    Ok(reports.into_iter().map(|r| r.with_origin(seed, index)).collect())
}

fn run_lemma_le(
    family: &VectorFamily,
    p: f64,
    sigma: f64,
    engine: &DualSearchConfig,
    tol: &Tolerances,
) -> Result<Vec<CheckReport>> {
    let chain = lemma_le_chain(family, p, sigma, engine)?;
    let t = tol.for_inequality(chain.certified);
    let digest = crate::harness::digest(&(family, p, sigma));
    let name = |what: &str| format!("lemma_le_{what}[p={p},sigma={sigma}]");
    Ok(vec![
        CheckReport::inequality(name("high_mixed"), chain.weak_high, chain.mixed, 1.0, t, digest.clone()),
        CheckReport::inequality(name("mixed_bridge"), chain.mixed, chain.bridge, 1.0, t, digest.clone()),
        CheckReport::inequality(name("mixed_weak"), chain.mixed, chain.weak_p, 1.0, t, digest),
    ])
}

fn run_leinc(
    f: &SimpleFunction,
    p: f64,
    sigmas: &[f64],
    engine: &DualSearchConfig,
    tol: &Tolerances,
) -> Result<Vec<CheckReport>> {
    let t = if f.space().has_polytope_dual() { tol.identity } else { tol.multistart };
    sigmas.windows(2).map(|w| check_leinc(f, p, w[0], w[1], engine, t)).collect()
}

fn run_sandwich(
    f: &SimpleFunction,
    p: f64,
    sigmas: &[f64],
    engine: &DualSearchConfig,
    tol: &Tolerances,
) -> Result<Vec<CheckReport>> {
    let pettis = pettis_norm(f, p, engine)?;
    let decomposition = DecompositionSearchConfig { engine: engine.clone(), ..Default::default() };
    let single_or_constant = f.values().len() == 1 || f.values().windows(2).all(|w| w[0] == w[1]);
    let mut reports = Vec::new();
    for &sigma in sigmas {
        let phi = phi_norm(f, p, sigma, engine)?;
        let conv = convexified_norm_upper(f, p, sigma, &decomposition)?;
        let digest = crate::harness::digest(&(f, p, sigma));
        let t = tol.for_inequality(pettis.certified && phi.certified);
        let name = |what: &str| format!("sandwich_{what}[p={p},sigma={sigma}]");
        reports.push(CheckReport::inequality(name("pettis_conv"), pettis.value, conv.value, 1.0, t, digest.clone()));
        reports.push(CheckReport::inequality(name("conv_phi"), conv.value, phi.value, 1.0, t, digest.clone()));
        if single_or_constant {
            reports.push(CheckReport::identity(name("collapse"), pettis.value, phi.value, tol.certified, digest));
        }
    }
    if single_or_constant {
        let digest = crate::harness::digest(&(f, p));
        let bochner = bochner_norm(f, p)?;
        reports.push(CheckReport::identity(format!("sandwich_bochner[p={p}]"), pettis.value, bochner, tol.certified, digest));
    }
    Ok(reports)
}

fn run_prinint(
    u: &Operator,
    xs: &[Vector],
    bs: &[Vector],
    kernel: &BuiltinKernel,
    alpha: f64,
    engine: &DualSearchConfig,
    tol: &Tolerances,
) -> Result<Vec<CheckReport>> {
    let [strong, weak] = check_prinint_converse_construction(u, xs, bs, kernel, alpha, engine, tol)?;
    // Forward direction with a constant that is valid for every input: the coordinate nuclear
    // bound dominates π_1 and π_1^σ.
    let nuclear = nuclear_upper_bound(u).value;
    let c = match kernel {
        BuiltinKernel::Diestel => nuclear,
        BuiltinKernel::Sigma { sigma } => nuclear.powf(1.0 / (1.0 - sigma)),
    };
    let mut reports = vec![strong, weak];
    if c > 0.0 {
        let measure = crate::vfun::equal_mass_partition(xs.len(), alpha)?;
        let f = SimpleFunction::new(u.domain().clone(), measure.clone(), xs.to_vec())?;
        let g = SimpleFunction::new(crate::spaces::SpaceSpec::lp(1, 1.0)?, measure, bs.to_vec())?;
        reports.push(check_prinint_forward(u, &f, &g, kernel, c, engine, tol)?);
    }
    Ok(reports)
}

/// Strong side `‖x‖_{ℓ_1(ν)}` as a maximum over all `2^n` sign functionals.
fn brute_l1_norm(nu: &[f64], x: &[f64]) -> f64 {
    let n = nu.len();
    (0..1u64 << n)
        .map(|signs| {
            (0..n)
                .map(|j| if signs >> j & 1 == 1 { -nu[j] * x[j] } else { nu[j] * x[j] })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Weak side `sup_{‖φ‖_1 ≤ 1} Σ_i |⟨x_i, φ⟩|` over `ℓ_∞^n` as a maximum over sign patterns of
/// the family of `‖Σ_i s_i x_i‖_∞`.
fn brute_weak_l1(family: &[Vector]) -> f64 {
    let n = family.first().map_or(0, |v| v.len());
    (0..1u64 << family.len())
        .map(|signs| {
            (0..n)
                .map(|j| {
                    family
                        .iter()
                        .enumerate()
                        .map(|(i, x)| if signs >> i & 1 == 1 { -x[j] } else { x[j] })
                        .sum::<f64>()
                        .abs()
                })
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// `π_1(j_1)` ratio of a family computed without the dual-ball engine.
pub fn brute_force_j1_ratio(nu: &[f64], family: &[Vector]) -> f64 {
    let strong: f64 = family.iter().map(|x| brute_l1_norm(nu, x)).sum();
    let weak = brute_weak_l1(family);
    if weak == 0.0 { 0.0 } else { strong / weak }
}

fn run_jp(nu: &[f64], p: f64, search_seed: u64, config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let n = nu.len();
    let jp_config = JpConfig {
        batch: config.jp_batch,
        max_cells: 6,
        seed: search_seed,
        family: FamilySearchConfig { seed: search_seed, use_oracle: true, ..config.family.clone() },
        tolerances: config.tolerances,
    };
    let scenario = scenario_jp(n, p, nu, &jp_config)?;
    let total: f64 = nu.iter().sum();
    let closed_form = total.powf(1.0 / p);
    let digest = crate::harness::digest(&(nu, p, search_seed));
    let tol = &config.tolerances;
    let mut reports = vec![CheckReport::identity(
        format!("jp_oracle[p={p}]"),
        scenario.estimate.value,
        closed_form,
        tol.identity,
        digest.clone(),
    )];

    let jp = crate::harness::canonical_jp(p, nu)?;
    let params = SummingParams::p_summing(p)?;
    let search = FamilySearchConfig { seed: search_seed, use_oracle: false, ..config.family.clone() };
    let results = search_families(&jp, &params, &search)?;
    if p == 1.0 {
        let best = results.iter().map(|r| brute_force_j1_ratio(nu, &r.family)).fold(0.0, f64::max);
        reports.push(CheckReport::inequality(
            "jp_search_brute[p=1]".into(),
            best,
            total,
            1.0,
            1e-9,
            digest.clone(),
        ));
        let ones = [Vector(vec![1.0; n])];
        reports.push(CheckReport::identity(
            "jp_ones_brute[p=1]".into(),
            brute_force_j1_ratio(nu, &ones),
            total,
            0.0,
            digest.clone(),
        ));
    }
    let best = results.iter().map(|r| r.ratio).fold(0.0, f64::max);
    reports.push(CheckReport::inequality(
        format!("jp_search[p={p}]"),
        best,
        closed_form,
        1.0,
        tol.multistart,
        digest,
    ));
    reports.extend(scenario.reports);
    Ok(reports)
}

fn run_hilbert(u: &Operator, search_seed: u64, config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let hs = hilbert_schmidt_norm(u)?;
    let params = SummingParams::p_summing(2.0)?;
    let basis = VectorFamily::basis(u.domain().clone());
    let digest = crate::harness::digest(&(u, search_seed));
    let tol = &config.tolerances;
    let basis_ratio = match summing_ratio(u, &basis, &params, &config.engine) {
        Ok(r) => r,
        Err(Error::DegenerateFamily) => 0.0,
        Err(e) => return Err(e),
    };
    let search = FamilySearchConfig { seed: search_seed, use_oracle: false, ..config.family.clone() };
    let best = search_families(u, &params, &search)?.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let mut reports = vec![
        CheckReport::identity("hilbert_basis".into(), basis_ratio, hs, tol.certified, digest.clone()),
        CheckReport::inequality("hilbert_search_upper".into(), best, hs, 1.0, tol.multistart, digest.clone()),
    ];
    if u.domain().dim().max(u.codomain().dim()) <= 3 {
        reports.push(CheckReport::inequality("hilbert_search_reach".into(), hs, best, 1.0 / 0.99, 0.0, digest));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SuiteConfig {
        SuiteConfig {
            instances: 6,
            family: FamilySearchConfig { restarts: 8, max_evaluations: 60, ..Default::default() },
            jp_batch: 3,
            ..Default::default()
        }
    }

    #[test]
    fn names_round_trip() {
        for n in SuiteName::ALL {
            assert_eq!(n.as_str().parse::<SuiteName>().unwrap(), n);
            assert_eq!(serde_json::to_string(&n).unwrap(), format!("\"{n}\""));
        }
        assert!("nope".parse::<SuiteName>().is_err());
    }

    #[test]
    fn every_suite_runs_and_passes() {
        for suite in SuiteName::ALL {
            let runs = run_suite(suite, &quick()).unwrap();
            assert_eq!(runs.len(), 6);
            for run in &runs {
                assert_eq!(run.instance.suite(), suite);
                assert!(!run.reports.is_empty());
                assert!(run.passed(), "{suite} #{}: {:?}", run.index, run.reports);
            }
        }
    }

    #[test]
    fn instances_replay() {
        let cfg = quick();
        for suite in SuiteName::ALL {
            let runs = run_suite(suite, &cfg).unwrap();
            let last = runs.last().unwrap();
            let text = serde_json::to_string(&last.instance).unwrap();
            let back: Instance = serde_json::from_str(&text).unwrap();
            assert_eq!(back, last.instance);
            assert_eq!(run_instance(&back, cfg.seed, last.index, &cfg).unwrap(), last.reports);
        }
    }

    #[test]
    fn brute_force_oracle() {
        let nu = [0.5, 0.25, 0.25];
        assert_eq!(brute_force_j1_ratio(&nu, &[Vector(vec![1.0; 3])]), 1.0);
        let basis: Vec<Vector> = (0..3).map(|j| Vector::basis(3, j)).collect();
        // strong Σν = 1, weak sup_{‖φ‖_1≤1} Σ|φ_j| = 1
        assert_eq!(brute_force_j1_ratio(&nu, &basis), 1.0);
        assert_eq!(brute_force_j1_ratio(&nu, &[Vector(vec![0.0; 3])]), 0.0);
    }
}
