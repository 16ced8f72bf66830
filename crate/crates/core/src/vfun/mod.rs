//! Finite measure spaces, vector-valued simple functions and their Pettis,
//! Bochner, `Φ_{p,σ}` and convexified norms.

mod convexified;

pub use convexified::{convexified_norm_upper, DecompositionSearchConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{
    sup_convex_over_dual_ball, DualSearchConfig, Functional, PowerSum, SpaceSpec, SupNorm, Vector,
};
use crate::summing::Operator;

/// A finite partition into cells of positive mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MeasureSpace {
    masses: Vec<f64>,
}

impl TryFrom<Vec<f64>> for MeasureSpace {
    type Error = Error;

    fn try_from(masses: Vec<f64>) -> Result<Self> {
        MeasureSpace::new(masses)
    }
}

impl From<MeasureSpace> for Vec<f64> {
    fn from(ms: MeasureSpace) -> Vec<f64> {
        ms.masses
    }
}

impl MeasureSpace {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidParameter("a measure space needs at least one cell".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidParameter(format!("cell masses must be positive, got {m}")));
        }
        Ok(MeasureSpace { masses })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn cells(&self) -> usize {
        self.masses.len()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Splits every cell into `k` cells of equal mass, keeping the order of the parent cells.
    pub fn refine(&self, k: usize) -> Result<MeasureSpace> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("refinement factor must be >= 2, got {k}")));
        }
        let masses = self
            .masses
            .iter()
            .flat_map(|m| std::iter::repeat_n(m / k as f64, k))
            .collect();
        Ok(MeasureSpace { masses })
    }
}

/// `n` cells of mass `alpha` each.
pub fn equal_mass_partition(n: usize, alpha: f64) -> Result<MeasureSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one cell".into()));
    }
    MeasureSpace::new(vec![alpha; n])
}

/// A function taking the value `values[k]` on cell `k` of its measure space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFunction", into = "RawFunction")]
pub struct SimpleFunction {
    space: SpaceSpec,
    measure: MeasureSpace,
    values: Vec<Vector>,
}

#[derive(Serialize, Deserialize)]
struct RawCell {
    mass: f64,
    value: Vector,
}

#[derive(Serialize, Deserialize)]
struct RawFunction {
    space: SpaceSpec,
    cells: Vec<RawCell>,
}

impl TryFrom<RawFunction> for SimpleFunction {
    type Error = Error;

    fn try_from(raw: RawFunction) -> Result<Self> {
        let (masses, values) = raw.cells.into_iter().map(|c| (c.mass, c.value)).unzip();
        SimpleFunction::new(raw.space, MeasureSpace::new(masses)?, values)
    }
}

impl From<SimpleFunction> for RawFunction {
    fn from(f: SimpleFunction) -> RawFunction {
        let cells = f
            .measure
            .masses
            .into_iter()
            .zip(f.values)
            .map(|(mass, value)| RawCell { mass, value })
            .collect();
        RawFunction { space: f.space, cells }
    }
}

impl SimpleFunction {
    pub fn new(space: SpaceSpec, measure: MeasureSpace, values: Vec<Vector>) -> Result<Self> {
        if values.len() != measure.cells() {
            return Err(Error::LengthMismatch(format!(
                "{} values for {} cells",
                values.len(),
                measure.cells()
            )));
        }
        for v in &values {
            space.check_dim(v.len())?;
        }
        Ok(SimpleFunction { space, measure, values })
    }

    pub fn constant(space: SpaceSpec, measure: MeasureSpace, x: Vector) -> Result<Self> {
        let values = vec![x; measure.cells()];
        SimpleFunction::new(space, measure, values)
    }

    pub fn zero(space: SpaceSpec, measure: MeasureSpace) -> Self {
        let values = vec![Vector::zeros(space.dim()); measure.cells()];
        SimpleFunction { space, measure, values }
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn measure(&self) -> &MeasureSpace {
        &self.measure
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    /// `(mass, value)` per cell.
    pub fn cells(&self) -> impl Iterator<Item = (f64, &Vector)> {
        self.measure.masses.iter().copied().zip(&self.values)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Vector::is_zero)
    }

    /// `f · χ_E` for the cell set `E`, given as a predicate on cell indices.
    pub fn restricted(&self, keep: impl Fn(usize) -> bool) -> SimpleFunction {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| if keep(k) { v.clone() } else { Vector::zeros(self.space.dim()) })
            .collect();
        SimpleFunction { space: self.space.clone(), measure: self.measure.clone(), values }
    }

    /// Pointwise `a·f + b·g` over a shared measure space.
    pub fn combine(&self, a: f64, other: &SimpleFunction, b: f64) -> Result<SimpleFunction> {
        if self.space != other.space || self.measure != other.measure {
            return Err(Error::InvalidParameter(
                "functions must share their space and measure space".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| Vector(x.iter().zip(y.iter()).map(|(u, v)| a * u + b * v).collect()))
            .collect();
        Ok(SimpleFunction { space: self.space.clone(), measure: self.measure.clone(), values })
    }

    fn pointwise_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| self.space.norm_of(v))
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    Ok(())
}

fn check_closed_sigma(sigma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!("sigma must lie in [0, 1], got {sigma}")));
    }
    Ok(())
}

/// `sup_{‖x'‖ ≤ 1} (Σ_k μ_k |⟨f_k, x'⟩|^p)^{1/p}`.
pub fn pettis_norm(f: &SimpleFunction, p: f64, config: &DualSearchConfig) -> Result<SupNorm> {
    phi_norm(f, p, 0.0, config)
}

/// `(Σ_k μ_k ‖f_k‖^p)^{1/p}`.
pub fn bochner_norm(f: &SimpleFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    let total: f64 = f.cells().map(|(m, v)| m * f.space.norm_of(v).powf(p)).sum();
    Ok(total.powf(1.0 / p))
}

/// `Φ_{p,σ}(f) = sup_{‖x'‖ ≤ 1} (Σ_k μ_k (|⟨f_k, x'⟩|^{1-σ} ‖f_k‖^σ)^p)^{1/p}`.
///
/// `σ = 0` is the Pettis norm and `σ = 1` the Bochner norm. The integrand is
/// `Σ_k μ_k ‖f_k‖^{σp} |⟨f_k, x'⟩|^{(1-σ)p}`, convex in `x'` only when `(1-σ)p ≥ 1`; below that
/// the supremum comes from multistart ascent and is not certified.
pub fn phi_norm(f: &SimpleFunction, p: f64, sigma: f64, config: &DualSearchConfig) -> Result<SupNorm> {
    check_p(p)?;
    check_closed_sigma(sigma)?;
    let space = &f.space;
    if sigma == 1.0 {
        return Ok(SupNorm {
            value: bochner_norm(f, p)?,
            certified: true,
            witness: Functional::zeros(space.dim()),
        });
    }
    let r = (1.0 - sigma) * p;
    let mut objective = PowerSum::new(space.dim(), r)?;
    for ((m, v), n) in f.cells().zip(f.pointwise_norms()) {
        objective.push(m * n.powf(sigma * p), v)?;
    }
    if r < 1.0 {
        // The Pettis witness dominates: the integrand at σ is at least the one at σ = 0.
        let pettis = phi_norm(f, p, 0.0, config)?;
        objective = objective.with_hint(pettis.witness.into_inner());
    }
    let sup = sup_convex_over_dual_ball(space, &objective, config)?;
    Ok(SupNorm { value: sup.value.powf(1.0 / p), certified: sup.certified, witness: sup.witness })
}

/// The cellwise image `w ↦ u(f(w))`.
pub fn compose(u: &Operator, f: &SimpleFunction) -> Result<SimpleFunction> {
    if u.domain() != f.space() {
        return Err(Error::InvalidParameter("function values do not live in the operator's domain".into()));
    }
    let values = f.values.iter().map(|v| Vector(u.apply_slice(v))).collect();
    Ok(SimpleFunction { space: u.codomain().clone(), measure: f.measure.clone(), values })
}

/// Splits every cell into `k` equal-mass cells carrying the parent's value.
pub fn refine(f: &SimpleFunction, k: usize) -> Result<SimpleFunction> {
    let measure = f.measure.refine(k)?;
    let values = f.values.iter().flat_map(|v| std::iter::repeat_n(v.clone(), k)).collect();
    Ok(SimpleFunction { space: f.space.clone(), measure, values })
}
