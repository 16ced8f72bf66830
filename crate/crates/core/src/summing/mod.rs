//! Strong, weak and mixed power sums of finite families, summing ratios and
//! lower-bound estimators for the ideal norms `π_p`, `π_{p,q}` and `π_p^σ`.

mod search;

pub use search::{
    estimate_ideal_norm_lower, hilbert_schmidt_norm, lattice_oracle, nuclear_upper_bound,
    search_families, FamilyResult, FamilySearchConfig,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{
    sup_convex_over_dual_ball, DualSearchConfig, Functional, PowerSum, SpaceSpec, SupNorm, Vector,
};

/// A linear map between two weighted `ℓ_p` spaces, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator")]
pub struct Operator {
    matrix: Vec<Vec<f64>>,
    domain: SpaceSpec,
    codomain: SpaceSpec,
}

#[derive(Deserialize)]
struct RawOperator {
    matrix: Vec<Vec<f64>>,
    domain: SpaceSpec,
    codomain: SpaceSpec,
}

impl TryFrom<RawOperator> for Operator {
    type Error = Error;

    fn try_from(raw: RawOperator) -> Result<Self> {
        Operator::new(raw.matrix, raw.domain, raw.codomain)
    }
}

impl Operator {
    pub fn new(matrix: Vec<Vec<f64>>, domain: SpaceSpec, codomain: SpaceSpec) -> Result<Self> {
        if matrix.len() != codomain.dim() {
            return Err(Error::DimensionMismatch { expected: codomain.dim(), found: matrix.len() });
        }
        for row in &matrix {
            domain.check_dim(row.len())?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("matrix entries must be finite".into()));
            }
        }
        Ok(Operator { matrix, domain, codomain })
    }

    pub fn identity(space: SpaceSpec) -> Self {
        let n = space.dim();
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Operator { matrix, domain: space.clone(), codomain: space }
    }

    pub fn zero(domain: SpaceSpec, codomain: SpaceSpec) -> Self {
        let matrix = vec![vec![0.0; domain.dim()]; codomain.dim()];
        Operator { matrix, domain, codomain }
    }

    pub fn diagonal(diag: &[f64], domain: SpaceSpec, codomain: SpaceSpec) -> Result<Self> {
        let n = diag.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        Operator::new(matrix, domain, codomain)
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn domain(&self) -> &SpaceSpec {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceSpec {
        &self.codomain
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(|&v| v == 0.0)
    }

    /// `T x` for a raw coordinate slice of the domain dimension.
    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.domain.check_dim(x.len())?;
        Ok(Vector(self.apply_slice(x)))
    }

    /// `‖T x‖` in the codomain.
    pub fn image_norm(&self, x: &[f64]) -> f64 {
        self.codomain.norm_of(&self.apply_slice(x))
    }
}

/// A finite family `x_1, …, x_n` of vectors in one space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFamily {
    space: SpaceSpec,
    vectors: Vec<Vector>,
}

impl VectorFamily {
    pub fn new(space: SpaceSpec, vectors: Vec<Vector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidParameter("a family needs at least one vector".into()));
        }
        for v in &vectors {
            space.check_dim(v.len())?;
        }
        Ok(VectorFamily { space, vectors })
    }

    /// The unit vectors `e_1, …, e_n` of `space`.
    pub fn basis(space: SpaceSpec) -> Self {
        let n = space.dim();
        let vectors = (0..n).map(|j| Vector::basis(n, j)).collect();
        VectorFamily { space, vectors }
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> VectorFamily {
        VectorFamily {
            space: self.space.clone(),
            vectors: self.vectors.iter().map(|v| v.scaled(factor)).collect(),
        }
    }

    fn nonzero(&self) -> impl Iterator<Item = &Vector> {
        self.vectors.iter().filter(|v| !v.is_zero())
    }

    fn max_norm(&self) -> f64 {
        self.vectors.iter().map(|v| self.space.norm_of(v)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummingKind {
    PSumming,
    PqSumming,
    PSigma,
}

/// Exponents selecting one of the three ideal norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummingParams {
    pub kind: SummingKind,
    pub p: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default)]
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

impl SummingParams {
    pub fn p_summing(p: f64) -> Result<Self> {
        SummingParams { kind: SummingKind::PSumming, p, q: p, sigma: 0.0 }.validated()
    }

    pub fn pq_summing(p: f64, q: f64) -> Result<Self> {
        SummingParams { kind: SummingKind::PqSumming, p, q, sigma: 0.0 }.validated()
    }

    pub fn p_sigma(p: f64, sigma: f64) -> Result<Self> {
        SummingParams { kind: SummingKind::PSigma, p, q: p, sigma }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidParameter(format!("p must be >= 1, got {}", self.p)));
        }
        match self.kind {
            SummingKind::PqSumming if !(self.q >= 1.0 && self.q <= self.p) => {
                Err(Error::InvalidParameter(format!("q must lie in [1, p], got {}", self.q)))
            }
            SummingKind::PSigma => {
                check_sigma(self.sigma)?;
                Ok(self)
            }
            _ => Ok(self),
        }
    }

    /// Exponent of the strong side.
    pub fn strong_exponent(&self) -> f64 {
        match self.kind {
            SummingKind::PSigma => self.p / (1.0 - self.sigma),
            _ => self.p,
        }
    }

    /// True when the parameters describe plain `p`-summing at the given `p`.
    pub(crate) fn is_plain_p_summing(&self, p: f64) -> bool {
        self.p == p
            && match self.kind {
                SummingKind::PSumming => true,
                SummingKind::PqSumming => self.q == p,
                SummingKind::PSigma => self.sigma == 0.0,
            }
    }
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    Ok(())
}

fn check_exponent(r: f64) -> Result<()> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent must be >= 1, got {r}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    Exact,
    LowerBound,
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    pub method: String,
    pub seed: u64,
    pub restarts: usize,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_family: Option<Vec<Vector>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Functional>,
}

/// A norm value together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub certification: Certification,
    pub diagnostics: Diagnostics,
}

/// `(Σ_i ‖T x_i‖^r)^{1/r}`.
pub fn strong_power_sum(op: &Operator, fam: &VectorFamily, r: f64) -> Result<f64> {
    check_exponent(r)?;
    if fam.space() != op.domain() {
        return Err(Error::InvalidParameter("family does not live in the operator's domain".into()));
    }
    let total: f64 = fam.vectors().iter().map(|x| op.image_norm(x).powf(r)).sum();
    Ok(total.powf(1.0 / r))
}

/// `sup_{‖x'‖ ≤ 1} (Σ_i |⟨x_i, x'⟩|^r)^{1/r}`.
pub fn weak_power_sup(fam: &VectorFamily, r: f64, config: &DualSearchConfig) -> Result<SupNorm> {
    check_exponent(r)?;
    let space = fam.space();
    let mut objective = PowerSum::new(space.dim(), r)?;
    for x in fam.nonzero() {
        objective.push(1.0, x)?;
    }
    let sup = sup_convex_over_dual_ball(space, &objective, config)?;
    Ok(SupNorm { value: sup.value.powf(1.0 / r), certified: sup.certified, witness: sup.witness })
}

/// `sup_{‖x'‖ ≤ 1} (Σ_i (|⟨x_i, x'⟩|^{1-σ} ‖x_i‖^σ)^{p/(1-σ)})^{(1-σ)/p}`.
///
/// The inner sum equals `Σ_i ‖x_i‖^{pσ/(1-σ)} |⟨x_i, x'⟩|^p`, a convex function of `x'`.
pub fn mixed_power_sup(
    fam: &VectorFamily,
    p: f64,
    sigma: f64,
    config: &DualSearchConfig,
) -> Result<SupNorm> {
    check_exponent(p)?;
    check_sigma(sigma)?;
    let space = fam.space();
    let weight_power = p * sigma / (1.0 - sigma);
    let mut objective = PowerSum::new(space.dim(), p)?;
    for x in fam.nonzero() {
        objective.push(space.norm_of(x).powf(weight_power), x)?;
    }
    let sup = sup_convex_over_dual_ball(space, &objective, config)?;
    Ok(SupNorm {
        value: sup.value.powf((1.0 - sigma) / p),
        certified: sup.certified,
        witness: sup.witness,
    })
}

/// Strong side over weak side, with the certification of the weak side.
pub(crate) fn ratio_parts(
    op: &Operator,
    fam: &VectorFamily,
    params: &SummingParams,
    config: &DualSearchConfig,
) -> Result<(f64, bool)> {
    let params = params.validated()?;
    let kept: Vec<Vector> = fam.nonzero().cloned().collect();
    if kept.is_empty() {
        return Err(Error::DegenerateFamily);
    }
    let fam = VectorFamily::new(fam.space().clone(), kept)?;
    let strong = strong_power_sum(op, &fam, params.strong_exponent())?;
    let weak = match params.kind {
        SummingKind::PSumming => weak_power_sup(&fam, params.p, config)?,
        SummingKind::PqSumming => weak_power_sup(&fam, params.q, config)?,
        SummingKind::PSigma => mixed_power_sup(&fam, params.p, params.sigma, config)?,
    };
    if !(weak.value > 0.0) {
        return Err(Error::DegenerateFamily);
    }
    Ok((strong / weak.value, weak.certified))
}

/// The ratio whose supremum over families is the ideal norm selected by `params`.
pub fn summing_ratio(
    op: &Operator,
    fam: &VectorFamily,
    params: &SummingParams,
    config: &DualSearchConfig,
) -> Result<f64> {
    ratio_parts(op, fam, params, config).map(|(r, _)| r)
}

/// The quantities of the chain `weak_{p/(1-σ)} ≤ mixed_{p,σ} ≤ max‖x_i‖^σ · weak_p^{1-σ} ≤ weak_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaChain {
    /// `weak_power_sup(fam, p/(1-σ))`
    pub weak_high: f64,
    /// `mixed_power_sup(fam, p, σ)`
    pub mixed: f64,
    /// `max_i ‖x_i‖^σ · weak_p^{1-σ}`
    pub bridge: f64,
    /// `weak_power_sup(fam, p)`
    pub weak_p: f64,
    /// True when all three suprema came from certified routes.
    pub certified: bool,
}

pub fn lemma_le_chain(
    fam: &VectorFamily,
    p: f64,
    sigma: f64,
    config: &DualSearchConfig,
) -> Result<LemmaChain> {
    check_exponent(p)?;
    check_sigma(sigma)?;
    let high = weak_power_sup(fam, p / (1.0 - sigma), config)?;
    let mixed = mixed_power_sup(fam, p, sigma, config)?;
    let low = weak_power_sup(fam, p, config)?;
    let bridge = fam.max_norm().powf(sigma) * low.value.powf(1.0 - sigma);
    Ok(LemmaChain {
        weak_high: high.value,
        mixed: mixed.value,
        bridge,
        weak_p: low.value,
        certified: high.certified && mixed.certified && low.certified,
    })
}
