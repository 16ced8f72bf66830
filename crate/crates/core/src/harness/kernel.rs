//! Strong/weak kernel pairs `(S, R)` of abstract summing inequalities.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{dot, DualObjective, FnObjective, PowerSum, SpaceSpec};
use crate::summing::Operator;

/// A kernel pair: `S(u, x, b)` on the strong side and `R(φ, x, b)` on the weak side, with `b`
/// taken from a coefficient space `G` of dimension [`RsKernel::g_dim`].
pub trait RsKernel: Sync {
    fn name(&self) -> String;

    fn g_dim(&self) -> usize {
        1
    }

    fn s(&self, u: &Operator, x: &[f64], b: &[f64]) -> f64;

    /// `x` lives in `space`, `φ` in its dual.
    fn r(&self, space: &SpaceSpec, phi: &[f64], x: &[f64], b: &[f64]) -> f64;

    /// Whether `φ ↦ R(φ, x, b)` is convex for every `x`, `b`.
    fn r_is_convex(&self) -> bool;

    /// `φ ↦ Σ_k m_k R(φ, x_k, b_k)` as an engine objective.
    fn weak_objective<'a>(
        &'a self,
        space: &SpaceSpec,
        terms: &[(f64, &[f64], &[f64])],
    ) -> Result<Box<dyn DualObjective + 'a>> {
        let owned: Vec<(f64, Vec<f64>, Vec<f64>)> =
            terms.iter().map(|(m, x, b)| (*m, x.to_vec(), b.to_vec())).collect();
        let hints = owned.iter().map(|(_, x, _)| space.norming_functional_of(x)).collect();
        let space_owned = space.clone();
        let f = move |phi: &[f64]| {
            owned.iter().map(|(m, x, b)| m * self.r(&space_owned, phi, x, b)).sum()
        };
        Ok(Box::new(FnObjective::new(space.dim(), self.r_is_convex(), f).with_hints(hints)))
    }
}

/// The two kernels used throughout: `Diestel` gives plain 1-summing operators and `Sigma`
/// the `(1, σ)` class read through the exponent `1/(1-σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuiltinKernel {
    /// `S(T, x, λ) = |λ| ‖Tx‖`, `R(φ, x, λ) = |λ| |φ(x)|`.
    Diestel,
    /// `S(u, x, a) = ‖ux‖^{1/(1-σ)} |a|`, `R(φ, x, b) = |⟨x, φ⟩| ‖x‖^{σ/(1-σ)} |b|`.
    Sigma { sigma: f64 },
}

impl BuiltinKernel {
    pub fn sigma(sigma: f64) -> Result<Self> {
        crate::summing::check_sigma(sigma)?;
        Ok(BuiltinKernel::Sigma { sigma })
    }

    /// Weight `c` with `R(φ, x, b) = c · |⟨x, φ⟩|`.
    fn r_weight(&self, space: &SpaceSpec, x: &[f64], b: f64) -> f64 {
        match *self {
            BuiltinKernel::Diestel => b.abs(),
            BuiltinKernel::Sigma { sigma } => space.norm_of(x).powf(sigma / (1.0 - sigma)) * b.abs(),
        }
    }
}

impl RsKernel for BuiltinKernel {
    fn name(&self) -> String {
        match self {
            BuiltinKernel::Diestel => "diestel".into(),
            BuiltinKernel::Sigma { sigma } => format!("sigma({sigma})"),
        }
    }

    fn s(&self, u: &Operator, x: &[f64], b: &[f64]) -> f64 {
        match *self {
            BuiltinKernel::Diestel => b[0].abs() * u.image_norm(x),
            BuiltinKernel::Sigma { sigma } => u.image_norm(x).powf(1.0 / (1.0 - sigma)) * b[0].abs(),
        }
    }

    fn r(&self, space: &SpaceSpec, phi: &[f64], x: &[f64], b: &[f64]) -> f64 {
        self.r_weight(space, x, b[0]) * dot(x, phi).abs()
    }

    fn r_is_convex(&self) -> bool {
        true
    }

    fn weak_objective<'a>(
        &'a self,
        space: &SpaceSpec,
        terms: &[(f64, &[f64], &[f64])],
    ) -> Result<Box<dyn DualObjective + 'a>> {
        let mut objective = PowerSum::new(space.dim(), 1.0)?;
        for (m, x, b) in terms {
            objective.push(m * self.r_weight(space, x, b[0]), x)?;
        }
        Ok(Box::new(objective))
    }
}

/// Checks `S(u,0,b) = S(u,x,0) = R(φ,0,b) = R(φ,x,0) = 0` on `probes` random inputs.
pub fn probe_kernel_contract(
    kernel: &dyn RsKernel,
    u: &Operator,
    probes: usize,
    rng: &mut impl Rng,
) -> Result<()> {
    let n = u.domain().dim();
    let mut normal = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.sample(StandardNormal)).collect() };
    for _ in 0..probes {
        let (x, b, phi) = (normal(n), normal(kernel.g_dim()), normal(n));
        check_zero_conditions(kernel, u, &x, &b, &phi)?;
    }
    Ok(())
}

pub(crate) fn check_zero_conditions(
    kernel: &dyn RsKernel,
    u: &Operator,
    x: &[f64],
    b: &[f64],
    phi: &[f64],
) -> Result<()> {
    let zx = vec![0.0; x.len()];
    let zb = vec![0.0; b.len()];
    let values = [
        ("S(u,0,b)", kernel.s(u, &zx, b)),
        ("S(u,x,0)", kernel.s(u, x, &zb)),
        ("R(φ,0,b)", kernel.r(u.domain(), phi, &zx, b)),
        ("R(φ,x,0)", kernel.r(u.domain(), phi, x, &zb)),
    ];
    match values.iter().find(|(_, v)| *v != 0.0) {
        Some((what, v)) => Err(Error::KernelContract(format!("{}: {what} = {v}", kernel.name()))),
        None => Ok(()),
    }
}
