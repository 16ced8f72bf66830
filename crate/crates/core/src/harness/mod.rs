//! Executable checks of the summing/integral inequalities on concrete instances.

mod kernel;
mod report;

pub use kernel::{probe_kernel_contract, BuiltinKernel, RsKernel};
pub use report::{csv_header, digest, render_csv, render_json_lines, CheckReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{sup_convex_over_dual_ball, DualSearchConfig, Exponent, SpaceSpec, Vector};
use crate::summing::{
    estimate_ideal_norm_lower, FamilySearchConfig, NormEstimate, Operator, SummingParams,
};
use crate::vfun::{equal_mass_partition, phi_norm, MeasureSpace, SimpleFunction};

/// Tolerances for the three kinds of comparisons a check can make.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Identities that hold up to rounding.
    pub identity: f64,
    /// Inequalities whose sides come from certified engine routes.
    pub certified: f64,
    /// Inequalities with a multistart lower bound on the larger side.
    pub multistart: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: 1e-12, certified: 1e-10, multistart: 1e-8 }
    }
}

impl Tolerances {
    pub fn for_inequality(&self, certified: bool) -> f64 {
        if certified { self.certified } else { self.multistart }
    }
}

/// `Σ_k μ_k S(u, f_k, g_k) ≤ C sup_φ Σ_k μ_k R(φ, f_k, g_k)`.
pub fn check_prinint_forward(
    u: &Operator,
    f: &SimpleFunction,
    g: &SimpleFunction,
    kernel: &dyn RsKernel,
    c: f64,
    config: &DualSearchConfig,
    tolerances: &Tolerances,
) -> Result<CheckReport> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    if f.space() != u.domain() {
        return Err(Error::InvalidParameter("f does not take values in the operator's domain".into()));
    }
    if f.measure() != g.measure() {
        return Err(Error::InvalidParameter("f and g must share their measure space".into()));
    }
    g.space().check_dim(kernel.g_dim())?;
    let probe = Vector(vec![1.0; u.domain().dim()]);
    for (x, b) in f.values().iter().zip(g.values()) {
        kernel::check_zero_conditions(kernel, u, x, b, &probe)?;
    }

    let lhs: f64 = f.cells().zip(g.values()).map(|((m, x), b)| m * kernel.s(u, x, b)).sum();
    let terms: Vec<(f64, &[f64], &[f64])> =
        f.cells().zip(g.values()).map(|((m, x), b)| (m, &x[..], &b[..])).collect();
    let objective = kernel.weak_objective(u.domain(), &terms)?;
    let sup = sup_convex_over_dual_ball(u.domain(), objective.as_ref(), config)?;
    let digest = report::digest(&(u, f, g, kernel.name(), c));
    Ok(CheckReport::inequality(
        format!("prinint_forward[{}]", kernel.name()),
        lhs,
        sup.value,
        c,
        tolerances.for_inequality(sup.certified),
        digest,
    ))
}

/// Builds `f = Σ x_i χ_{A_i}`, `g = Σ b_i χ_{A_i}` over `n` cells of mass `alpha` and checks
/// `∫ S̃ dμ = α Σ_i S(u, x_i, b_i)` and `sup_φ ∫ R̃ dμ = α sup_φ Σ_i R(φ, x_i, b_i)`.
pub fn check_prinint_converse_construction(
    u: &Operator,
    xs: &[Vector],
    bs: &[Vector],
    kernel: &dyn RsKernel,
    alpha: f64,
    config: &DualSearchConfig,
    tolerances: &Tolerances,
) -> Result<[CheckReport; 2]> {
    if xs.len() != bs.len() {
        return Err(Error::LengthMismatch(format!("{} vectors but {} coefficients", xs.len(), bs.len())));
    }
    let measure = equal_mass_partition(xs.len(), alpha)?;
    let g_space = SpaceSpec::lp(kernel.g_dim(), 1.0)?;
    let f = SimpleFunction::new(u.domain().clone(), measure.clone(), xs.to_vec())?;
    let g = SimpleFunction::new(g_space, measure, bs.to_vec())?;
    let digest = report::digest(&(u, xs, bs, kernel.name(), alpha));

    let integral_s: f64 = f.cells().zip(g.values()).map(|((m, x), b)| m * kernel.s(u, x, b)).sum();
    let discrete_s: f64 = xs.iter().zip(bs).map(|(x, b)| kernel.s(u, x, b)).sum();

    let integral_terms: Vec<(f64, &[f64], &[f64])> =
        f.cells().zip(g.values()).map(|((m, x), b)| (m, &x[..], &b[..])).collect();
    let discrete_terms: Vec<(f64, &[f64], &[f64])> =
        xs.iter().zip(bs).map(|(x, b)| (1.0, &x[..], &b[..])).collect();
    let space = u.domain();
    let integral_r = sup_convex_over_dual_ball(space, kernel.weak_objective(space, &integral_terms)?.as_ref(), config)?;
    let discrete_r = sup_convex_over_dual_ball(space, kernel.weak_objective(space, &discrete_terms)?.as_ref(), config)?;

    let name = kernel.name();
    Ok([
        CheckReport::identity(
            format!("prinint_converse_strong[{name}]"),
            integral_s,
            alpha * discrete_s,
            tolerances.identity,
            digest.clone(),
        ),
        CheckReport::identity(
            format!("prinint_converse_weak[{name}]"),
            integral_r.value,
            alpha * discrete_r.value,
            tolerances.identity,
            digest,
        ),
    ])
}

/// `∫ ‖u f‖^{1/(1-σ)} dμ ≤ C sup_{x'} ∫ |⟨f, x'⟩| ‖f‖^{σ/(1-σ)} dμ`, evaluated as the forward
/// check for the `Sigma` kernel with `g ≡ 1`.
pub fn check_q11(
    u: &Operator,
    f: &SimpleFunction,
    sigma: f64,
    c: f64,
    config: &DualSearchConfig,
    tolerances: &Tolerances,
) -> Result<CheckReport> {
    let kernel = BuiltinKernel::sigma(sigma)?;
    let mut report = check_prinint_forward(u, f, &ones(f.measure()), &kernel, c, config, tolerances)?;
    report.check = format!("q11[sigma={sigma}]");
    Ok(report)
}

/// The scalar function `g ≡ 1` on `measure`.
pub fn ones(measure: &MeasureSpace) -> SimpleFunction {
    let line = SpaceSpec::lp(1, 1.0).expect("one-dimensional space");
    SimpleFunction::constant(line, measure.clone(), Vector(vec![1.0])).expect("matching shapes")
}

/// `Φ_{p,σ₁}(f) ≤ Φ_{p,σ₂}(f)` for `σ₁ ≤ σ₂`.
pub fn check_leinc(
    f: &SimpleFunction,
    p: f64,
    sigma1: f64,
    sigma2: f64,
    config: &DualSearchConfig,
    tolerance: f64,
) -> Result<CheckReport> {
    if !(0.0 <= sigma1 && sigma1 <= sigma2 && sigma2 <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= sigma1 <= sigma2 <= 1, got {sigma1}, {sigma2}"
        )));
    }
    let low = phi_norm(f, p, sigma1, config)?;
    let high = phi_norm(f, p, sigma2, config)?;
    Ok(CheckReport::inequality(
        format!("leinc[p={p},{sigma1}<={sigma2}]"),
        low.value,
        high.value,
        1.0,
        tolerance,
        report::digest(&(f, p, sigma1, sigma2)),
    ))
}

/// The canonical map `j_p: ℓ_∞^n → ℓ_p^n(ν)`.
pub fn canonical_jp(p: f64, nu: &[f64]) -> Result<Operator> {
    let n = nu.len();
    let domain = SpaceSpec::linf(n)?;
    let codomain = SpaceSpec::weighted(n, Exponent::Finite(p), nu.to_vec())?;
    Operator::diagonal(&vec![1.0; n], domain, codomain)
}

/// Outcome of [`scenario_jp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JpScenario {
    pub estimate: NormEstimate,
    /// Constant used in the q11 checks.
    pub c: f64,
    pub reports: Vec<CheckReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JpConfig {
    /// Random simple functions fed to the q11 check.
    pub batch: usize,
    pub max_cells: usize,
    pub seed: u64,
    pub family: FamilySearchConfig,
    pub tolerances: Tolerances,
}

impl Default for JpConfig {
    fn default() -> Self {
        JpConfig {
            batch: 16,
            max_cells: 6,
            seed: 0,
            family: FamilySearchConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

/// Estimates `π_p(j_p)` and checks q11 with `σ = 1 - 1/p` on a seeded batch of
/// `ℓ_∞^n`-valued simple functions.
///
/// With `σ = 1 - 1/p` the q11 inequality has exponent `p` on the left and holds with
/// `C = π_p(j_p)^p = Σ_j ν_j`, which is the constant used.
pub fn scenario_jp(n: usize, p: f64, nu: &[f64], config: &JpConfig) -> Result<JpScenario> {
    if nu.len() != n {
        return Err(Error::LengthMismatch(format!("{} weights for n = {n}", nu.len())));
    }
    let jp = canonical_jp(p, nu)?;
    let estimate = estimate_ideal_norm_lower(&jp, &SummingParams::p_summing(p)?, &config.family)?;
    let c = estimate.value.powf(p);
    let sigma = 1.0 - 1.0 / p;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut reports = Vec::with_capacity(config.batch);
    for index in 0..config.batch {
        rng.set_stream(index as u64);
        let f = random_simple_function(&mut rng, jp.domain(), config.max_cells)?;
        let mut report = check_q11(&jp, &f, sigma, c, &config.family.engine, &config.tolerances)?;
        report.seed = Some(config.seed);
        reports.push(report);
    }
    Ok(JpScenario { estimate, c, reports })
}

/// Random simple function on `1..=max_cells` cells with masses in `[0.05, 1)` and standard
/// normal values.
pub fn random_simple_function(
    rng: &mut impl Rng,
    space: &SpaceSpec,
    max_cells: usize,
) -> Result<SimpleFunction> {
    let cells = rng.random_range(1..=max_cells.max(1));
    let masses = (0..cells).map(|_| rng.random_range(0.05..1.0)).collect();
    let values = (0..cells).map(|_| random_vector(rng, space.dim())).collect();
    SimpleFunction::new(space.clone(), MeasureSpace::new(masses)?, values)
}

pub fn random_vector(rng: &mut impl Rng, dim: usize) -> Vector {
    Vector((0..dim).map(|_| rng.sample(StandardNormal)).collect())
}
