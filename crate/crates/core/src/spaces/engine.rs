//! Maximization of objectives over the dual unit ball of a [`SpaceSpec`].
//!
//! Routes, in the order they are tried under [`Strategy::Auto`]:
//!
//! * convex objective, polytope dual ball: exhaustive extreme-point enumeration (certified);
//! * power sums with exponent 1: `sup Σ c_i |⟨x_i, φ⟩| = max_s ‖Σ s_i c_i x_i‖` over sign
//!   patterns `s` (certified);
//! * power sums with exponent 2 on an exponent-2 space: largest eigenvalue of the weighted
//!   Gram matrix (certified);
//! * everything else: seeded multistart local ascent (lower bound).
//!
//! Convex objectives ascend with the linear maximization oracle of the dual ball
//! (`φ ← argmax ⟨∇F(φ), ψ⟩`, which never decreases a convex `F`); non-convex ones with
//! projected gradient steps and backtracking.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{dot, Functional, SpaceSpec};
use crate::error::{Error, Result};

/// A function of a dual functional to be maximized over the dual unit ball.
pub trait DualObjective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, phi: &[f64]) -> f64;

    /// A (super)gradient at `phi`, written into `grad`.
    fn gradient(&self, phi: &[f64], grad: &mut [f64]);

    /// Declared convexity in `phi`; extreme-point routes are only used when set.
    fn is_convex(&self) -> bool;

    /// Problem-specific starting points for the ascent route.
    fn hints(&self, _space: &SpaceSpec) -> Vec<Vec<f64>> {
        Vec::new()
    }

    fn as_power_sum(&self) -> Option<&PowerSum> {
        None
    }
}

/// `F(φ) = Σ_i c_i |⟨x_i, φ⟩|^r` with nonnegative weights `c_i`.
#[derive(Debug, Clone)]
pub struct PowerSum {
    dim: usize,
    weights: Vec<f64>,
    vectors: Vec<f64>,
    exponent: f64,
    extra_hints: Vec<Vec<f64>>,
}

impl PowerSum {
    pub fn new(dim: usize, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power-sum exponent must be positive, got {exponent}"
            )));
        }
        Ok(PowerSum { dim, weights: Vec::new(), vectors: Vec::new(), exponent, extra_hints: Vec::new() })
    }

    /// Adds the term `weight · |⟨x, φ⟩|^r`. Zero-weight and zero-vector terms are dropped and a
    /// vector already present only has its weight increased.
    pub fn push(&mut self, weight: f64, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::InvalidParameter(format!("term weight must be >= 0, got {weight}")));
        }
        if weight == 0.0 || x.iter().all(|&v| v == 0.0) {
            return Ok(());
        }
        if let Some(i) = self.vectors.chunks_exact(self.dim).position(|v| v == x) {
            self.weights[i] += weight;
        } else {
            self.weights.push(weight);
            self.vectors.extend_from_slice(x);
        }
        Ok(())
    }

    pub fn with_hint(mut self, hint: Vec<f64>) -> Self {
        if hint.len() == self.dim {
            self.extra_hints.push(hint);
        }
        self
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.weights.iter().copied().zip(self.vectors.chunks_exact(self.dim.max(1)))
    }

    #[inline]
    fn power(&self, t: f64) -> f64 {
        let a = t.abs();
        if self.exponent == 1.0 {
            a
        } else if self.exponent == 2.0 {
            a * a
        } else {
            a.powf(self.exponent)
        }
    }
}

impl DualObjective for PowerSum {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, phi: &[f64]) -> f64 {
        self.terms().map(|(c, x)| c * self.power(dot(x, phi))).sum()
    }

    fn gradient(&self, phi: &[f64], grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let r = self.exponent;
        for (c, x) in self.terms() {
            let t = dot(x, phi);
            if t == 0.0 {
                continue;
            }
            let slope = if r == 1.0 {
                c * t.signum()
            } else {
                c * r * t.abs().powf(r - 1.0) * t.signum()
            };
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += slope * xi;
            }
        }
    }

    fn is_convex(&self) -> bool {
        self.exponent >= 1.0
    }

    fn hints(&self, space: &SpaceSpec) -> Vec<Vec<f64>> {
        let mut hints: Vec<Vec<f64>> =
            self.terms().map(|(_, x)| space.norming_functional_of(x)).collect();
        hints.extend(self.extra_hints.iter().cloned());
        hints
    }

    fn as_power_sum(&self) -> Option<&PowerSum> {
        Some(self)
    }
}

/// Objective given by a closure; gradients by central differences.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
    convex: bool,
    hints: Vec<Vec<f64>>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, convex: bool, f: F) -> Self {
        FnObjective { dim, f, convex, hints: Vec::new() }
    }

    pub fn with_hints(mut self, hints: Vec<Vec<f64>>) -> Self {
        self.hints = hints;
        self
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> DualObjective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, phi: &[f64]) -> f64 {
        (self.f)(phi)
    }

    fn gradient(&self, phi: &[f64], grad: &mut [f64]) {
        let mut probe = phi.to_vec();
        for j in 0..self.dim {
            let h = 1e-7 * (1.0 + phi[j].abs());
            probe[j] = phi[j] + h;
            let up = (self.f)(&probe);
            probe[j] = phi[j] - h;
            let down = (self.f)(&probe);
            probe[j] = phi[j];
            grad[j] = (up - down) / (2.0 * h);
        }
    }

    fn is_convex(&self) -> bool {
        self.convex
    }

    fn hints(&self, _space: &SpaceSpec) -> Vec<Vec<f64>> {
        self.hints.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Use the cheapest certified route available, ascent otherwise.
    #[default]
    Auto,
    /// Demand exhaustive extreme-point enumeration; errors when unavailable.
    Enumerate,
    /// Always run multistart ascent.
    Ascent,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct DualSearchConfig {
    pub strategy: Strategy,
    /// Largest dimension for which the `2^n` sign-vector vertices of a box dual are enumerated.
    pub enumeration_cap: usize,
    /// Largest number of power-sum terms for the sign-pattern route.
    pub sign_term_cap: usize,
    /// Seeded random starts for the ascent route.
    pub starts: usize,
    pub max_iterations: usize,
    /// Relative improvement below which an ascent run stops.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for DualSearchConfig {
    fn default() -> Self {
        DualSearchConfig {
            strategy: Strategy::Auto,
            enumeration_cap: 20,
            sign_term_cap: 16,
            starts: 64,
            max_iterations: 10_000,
            tolerance: 1e-12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupMethod {
    VertexEnumeration,
    SignPatterns,
    Spectral,
    SignFlipAscent,
    Ascent,
}

/// Result of a dual-ball maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSup {
    pub value: f64,
    pub witness: Functional,
    /// True when the value is the exact maximum (up to rounding).
    pub certified: bool,
    pub method: SupMethod,
    /// Candidate points or starts evaluated.
    pub candidates: usize,
    /// Total ascent iterations.
    pub iterations: usize,
}

/// Maximizes `objective` over the dual unit ball of `space`.
pub fn sup_convex_over_dual_ball(
    space: &SpaceSpec,
    objective: &dyn DualObjective,
    config: &DualSearchConfig,
) -> Result<DualSup> {
    space.check_dim(objective.dim())?;
    let polytope = space.has_polytope_dual();
    let convex = objective.is_convex();
    let within_cap =
        polytope && (!space.exponent().is_finite() || space.dim() <= config.enumeration_cap);

    match config.strategy {
        Strategy::Enumerate => {
            if !polytope || !convex {
                return Err(Error::EnumerationUnavailable);
            }
            if !within_cap {
                return Err(Error::EnumerationCap { dim: space.dim(), cap: config.enumeration_cap });
            }
            enumerate_vertices(space, objective)
        }
        Strategy::Ascent => multistart(space, objective, config),
        Strategy::Auto => {
            if convex && within_cap {
                return enumerate_vertices(space, objective);
            }
            if let Some(ps) = objective.as_power_sum() {
                if ps.exponent == 1.0 && ps.len() <= config.sign_term_cap {
                    return sign_patterns(space, ps);
                }
                if ps.exponent == 2.0 && space.exponent() == super::Exponent::Finite(2.0) {
                    return spectral(space, ps);
                }
            }
            if convex && polytope {
                return sign_flip_ascent(space, objective, config);
            }
            multistart(space, objective, config)
        }
    }
}

#[derive(Clone)]
struct Best {
    value: f64,
    witness: Vec<f64>,
}

impl Best {
    fn empty() -> Self {
        Best { value: f64::NEG_INFINITY, witness: Vec::new() }
    }

    /// Larger value wins; ties go to the lexicographically smallest witness.
    fn offer(&mut self, value: f64, witness: &[f64]) {
        let better = value > self.value
            || (value == self.value && lex_less(witness, &self.witness));
        if better {
            self.value = value;
            self.witness.clear();
            self.witness.extend_from_slice(witness);
        }
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    a.len() < b.len()
}

fn checked(value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(value))
    }
}

fn enumerate_vertices(space: &SpaceSpec, objective: &dyn DualObjective) -> Result<DualSup> {
    let count = space.dual_vertex_count().ok_or(Error::EnumerationUnavailable)?;
    let mut best = Best::empty();
    let mut phi = vec![0.0; space.dim()];
    for idx in 0..count {
        space.dual_vertex(idx, &mut phi);
        let v = checked(objective.value(&phi))?;
        best.offer(v, &phi);
    }
    Ok(DualSup {
        value: best.value,
        witness: Functional(best.witness),
        certified: true,
        method: SupMethod::VertexEnumeration,
        candidates: count,
        iterations: 0,
    })
}

fn sign_patterns(space: &SpaceSpec, ps: &PowerSum) -> Result<DualSup> {
    let dim = space.dim();
    if ps.is_empty() {
        let zero = vec![0.0; dim];
        return Ok(DualSup {
            value: 0.0,
            witness: Functional(zero),
            certified: true,
            method: SupMethod::SignPatterns,
            candidates: 1,
            iterations: 0,
        });
    }
    let terms: Vec<(f64, &[f64])> = ps.terms().collect();
    let n = terms.len();
    let mut best_norm = f64::NEG_INFINITY;
    let mut best_sum = vec![0.0; dim];
    let mut sum = vec![0.0; dim];
    // The first sign is fixed to + since s and -s give the same norm.
    let patterns = 1usize << (n - 1);
    for mask in 0..patterns {
        sum.iter_mut().for_each(|v| *v = 0.0);
        for (i, (c, x)) in terms.iter().enumerate() {
            let s = if i > 0 && (mask >> (i - 1)) & 1 == 1 { -c } else { *c };
            for (acc, xi) in sum.iter_mut().zip(x.iter()) {
                *acc += s * xi;
            }
        }
        let nrm = checked(space.norm_of(&sum))?;
        if nrm > best_norm {
            best_norm = nrm;
            best_sum.copy_from_slice(&sum);
        }
    }
    let witness = space.norming_functional_of(&best_sum);
    let value = checked(ps.value(&witness))?;
    Ok(DualSup {
        value,
        witness: Functional(witness),
        certified: true,
        method: SupMethod::SignPatterns,
        candidates: patterns,
        iterations: 0,
    })
}

fn spectral(space: &SpaceSpec, ps: &PowerSum) -> Result<DualSup> {
    let dim = space.dim();
    // φ = √w ∘ ψ with ‖ψ‖₂ ≤ 1 turns the dual ball into the Euclidean ball.
    let root_w: Vec<f64> = space.weights().iter().map(|w| w.sqrt()).collect();
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for (c, x) in ps.terms() {
        let z: Vec<f64> = x.iter().zip(&root_w).map(|(xi, r)| xi * r).collect();
        for a in 0..dim {
            for b in 0..dim {
                gram[(a, b)] += c * z[a] * z[b];
            }
        }
    }
    let eig = SymmetricEigen::new(gram);
    let mut top = 0;
    for k in 1..dim {
        if eig.eigenvalues[k] > eig.eigenvalues[top] {
            top = k;
        }
    }
    let psi = eig.eigenvectors.column(top);
    let scale = psi.norm();
    let mut witness: Vec<f64> = psi.iter().zip(&root_w).map(|(p, r)| p * r / scale).collect();
    if let Some(first) = witness.iter().find(|v| **v != 0.0) {
        if *first > 0.0 {
            witness.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let value = checked(ps.value(&witness))?.max(0.0);
    Ok(DualSup {
        value,
        witness: Functional(witness),
        certified: true,
        method: SupMethod::Spectral,
        candidates: 1,
        iterations: 0,
    })
}

/// Random sign-vector starts with single-coordinate flips, for box duals above the enumeration cap.
fn sign_flip_ascent(
    space: &SpaceSpec,
    objective: &dyn DualObjective,
    config: &DualSearchConfig,
) -> Result<DualSup> {
    let dim = space.dim();
    let w = space.weights();
    let mut starts: Vec<Vec<f64>> = objective
        .hints(space)
        .into_iter()
        .map(|h| h.iter().zip(w).map(|(v, wj)| if *v < 0.0 { -wj } else { *wj }).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.starts {
        starts.push(
            w.iter()
                .map(|wj| if rand::Rng::random::<bool>(&mut rng) { *wj } else { -wj })
                .collect(),
        );
    }
    let mut best = Best::empty();
    let mut iterations = 0;
    for mut phi in starts {
        let mut value = checked(objective.value(&phi))?;
        loop {
            let mut improved = false;
            for j in 0..dim {
                phi[j] = -phi[j];
                let v = checked(objective.value(&phi))?;
                iterations += 1;
                if v > value {
                    value = v;
                    improved = true;
                } else {
                    phi[j] = -phi[j];
                }
            }
            if !improved || iterations >= config.max_iterations * dim.max(1) {
                break;
            }
        }
        best.offer(value, &phi);
    }
    Ok(DualSup {
        value: best.value,
        witness: Functional(best.witness),
        certified: false,
        method: SupMethod::SignFlipAscent,
        candidates: config.starts,
        iterations,
    })
}

fn multistart(
    space: &SpaceSpec,
    objective: &dyn DualObjective,
    config: &DualSearchConfig,
) -> Result<DualSup> {
    let dim = space.dim();
    let mut starts = objective.hints(space);
    if let Some(count) = space.dual_vertex_count() {
        if count <= 4096 {
            for idx in 0..count {
                let mut v = vec![0.0; dim];
                space.dual_vertex(idx, &mut v);
                starts.push(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.starts {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = space.dual_norm_of(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
        starts.push(v);
    }
    if starts.is_empty() {
        starts.push(vec![0.0; dim]);
    }

    let mut best = Best::empty();
    let mut iterations = 0;
    let candidates = starts.len();
    for start in starts {
        let (value, witness, iters) = if objective.is_convex() {
            oracle_ascent(space, objective, start, config)?
        } else {
            projected_ascent(space, objective, start, config)?
        };
        iterations += iters;
        best.offer(value, &witness);
    }
    Ok(DualSup {
        value: best.value,
        witness: Functional(best.witness),
        certified: false,
        method: SupMethod::Ascent,
        candidates,
        iterations,
    })
}

/// `φ ← argmax_{ψ ∈ B} ⟨∇F(φ), ψ⟩`, monotone for convex `F`.
fn oracle_ascent(
    space: &SpaceSpec,
    objective: &dyn DualObjective,
    mut phi: Vec<f64>,
    config: &DualSearchConfig,
) -> Result<(f64, Vec<f64>, usize)> {
    space.project_to_dual_ball(&mut phi);
    let mut value = checked(objective.value(&phi))?;
    let mut grad = vec![0.0; phi.len()];
    let mut iters = 0;
    while iters < config.max_iterations {
        iters += 1;
        objective.gradient(&phi, &mut grad);
        if grad.iter().all(|g| *g == 0.0) {
            break;
        }
        let next = space.norming_functional_of(&grad);
        let v = checked(objective.value(&next))?;
        if v > value {
            let gain = v - value;
            phi = next;
            value = v;
            if gain <= config.tolerance * value.abs().max(1.0) {
                break;
            }
        } else {
            break;
        }
    }
    Ok((value, phi, iters))
}

/// Projected gradient ascent with step doubling on success and halving on failure.
fn projected_ascent(
    space: &SpaceSpec,
    objective: &dyn DualObjective,
    mut phi: Vec<f64>,
    config: &DualSearchConfig,
) -> Result<(f64, Vec<f64>, usize)> {
    space.project_to_dual_ball(&mut phi);
    let mut value = checked(objective.value(&phi))?;
    let mut grad = vec![0.0; phi.len()];
    let mut trial = vec![0.0; phi.len()];
    objective.gradient(&phi, &mut grad);
    let mut gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if gnorm == 0.0 || !gnorm.is_finite() {
        return Ok((value, phi, 0));
    }
    let mut step = 0.1 / gnorm;
    let mut iters = 0;
    while iters < config.max_iterations {
        iters += 1;
        for ((t, p), g) in trial.iter_mut().zip(&phi).zip(&grad) {
            *t = p + step * g;
        }
        space.project_to_dual_ball(&mut trial);
        let v = checked(objective.value(&trial))?;
        if v > value {
            let gain = v - value;
            std::mem::swap(&mut phi, &mut trial);
            value = v;
            if gain <= config.tolerance * value.abs().max(1.0) {
                break;
            }
            objective.gradient(&phi, &mut grad);
            gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm == 0.0 || !gnorm.is_finite() {
                break;
            }
            step *= 2.0;
        } else {
            step *= 0.5;
            if step * gnorm < 1e-15 {
                break;
            }
        }
    }
    Ok((value, phi, iters))
}
