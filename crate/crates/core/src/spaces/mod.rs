//! Finite-dimensional weighted `ℓ_p` spaces, their duals and a certified
//! engine for maximizing objectives over dual unit balls.
//!
//! A space of dimension `n` with exponent `p` and weights `w` carries the norm
//! `(Σ w_j |x_j|^p)^{1/p}` (or `max_j w_j |x_j|` for `p = ∞`). Functionals are
//! coordinate vectors paired with elements through the plain dot product, so
//! the dual norm is the weighted `ℓ_{p'}` norm with weights `w_j^{1-p'}`.

mod engine;

pub use engine::{
    sup_convex_over_dual_ball, DualObjective, DualSearchConfig, DualSup, FnObjective, PowerSum,
    Strategy, SupMethod,
};

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exponent of a weighted `ℓ_p` space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// Conjugate exponent `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Finite(_))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(p) => Ok(Exponent::Finite(p)),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => {
                Ok(Exponent::Infinity)
            }
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "exponent must be a number >= 1 or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// A weighted `ℓ_p^n` space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct SpaceSpec {
    dim: usize,
    exponent: Exponent,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSpace {
    dim: usize,
    exponent: Exponent,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

impl TryFrom<RawSpace> for SpaceSpec {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        match raw.weights {
            Some(w) => SpaceSpec::weighted(raw.dim, raw.exponent, w),
            None => SpaceSpec::new(raw.dim, raw.exponent),
        }
    }
}

impl SpaceSpec {
    /// Unit-weight space.
    pub fn new(dim: usize, exponent: Exponent) -> Result<Self> {
        SpaceSpec::weighted(dim, exponent, vec![1.0; dim])
    }

    pub fn weighted(dim: usize, exponent: Exponent, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        if let Exponent::Finite(p) = exponent {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidSpace(format!("exponent must be >= 1, got {p}")));
            }
        }
        if weights.len() != dim {
            return Err(Error::InvalidSpace(format!(
                "expected {dim} weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidSpace(format!("weights must be positive, got {w}")));
        }
        Ok(SpaceSpec { dim, exponent, weights })
    }

    /// Unit-weight `ℓ_p^n` with finite `p`.
    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        SpaceSpec::new(dim, Exponent::Finite(p))
    }

    /// Unit-weight `ℓ_∞^n`.
    pub fn linf(dim: usize) -> Result<Self> {
        SpaceSpec::new(dim, Exponent::Infinity)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Unit-weight exponent-2 space.
    pub fn is_hilbert(&self) -> bool {
        self.exponent == Exponent::Finite(2.0) && self.has_unit_weights()
    }

    /// The dual ball is a polytope exactly when the exponent is 1 or ∞.
    pub fn has_polytope_dual(&self) -> bool {
        matches!(self.exponent, Exponent::Infinity | Exponent::Finite(1.0))
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: len });
        }
        Ok(())
    }

    /// Norm of a raw coordinate slice; the caller guarantees the length.
    pub fn norm_of(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.exponent {
            Exponent::Infinity => x
                .iter()
                .zip(&self.weights)
                .map(|(xi, w)| w * xi.abs())
                .fold(0.0, f64::max),
            Exponent::Finite(p) if p == 1.0 => {
                x.iter().zip(&self.weights).map(|(xi, w)| w * xi.abs()).sum()
            }
            Exponent::Finite(p) if p == 2.0 => x
                .iter()
                .zip(&self.weights)
                .map(|(xi, w)| w * xi * xi)
                .sum::<f64>()
                .sqrt(),
            Exponent::Finite(p) => x
                .iter()
                .zip(&self.weights)
                .map(|(xi, w)| w * xi.abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }

    /// Dual norm of a raw functional slice.
    pub fn dual_norm_of(&self, phi: &[f64]) -> f64 {
        debug_assert_eq!(phi.len(), self.dim);
        match self.exponent {
            Exponent::Infinity => phi.iter().zip(&self.weights).map(|(f, w)| f.abs() / w).sum(),
            Exponent::Finite(p) if p == 1.0 => phi
                .iter()
                .zip(&self.weights)
                .map(|(f, w)| f.abs() / w)
                .fold(0.0, f64::max),
            Exponent::Finite(p) if p == 2.0 => phi
                .iter()
                .zip(&self.weights)
                .map(|(f, w)| f * f / w)
                .sum::<f64>()
                .sqrt(),
            Exponent::Finite(p) => {
                let q = p / (p - 1.0);
                phi.iter()
                    .zip(&self.weights)
                    .map(|(f, w)| w.powf(1.0 - q) * f.abs().powf(q))
                    .sum::<f64>()
                    .powf(1.0 / q)
            }
        }
    }

    /// A functional of dual norm at most one attaining `⟨x, φ⟩ = ‖x‖`.
    ///
    /// The zero vector gets the zero functional.
    pub fn norming_functional_of(&self, x: &[f64]) -> Vec<f64> {
        let nrm = self.norm_of(x);
        if nrm == 0.0 || !nrm.is_finite() {
            return vec![0.0; self.dim];
        }
        match self.exponent {
            Exponent::Infinity => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (j, (xi, w)) in x.iter().zip(&self.weights).enumerate() {
                    let v = w * xi.abs();
                    if v > best_val {
                        best_val = v;
                        best = j;
                    }
                }
                let mut phi = vec![0.0; self.dim];
                phi[best] = self.weights[best] * sign(x[best]);
                phi
            }
            Exponent::Finite(p) if p == 1.0 => {
                x.iter().zip(&self.weights).map(|(xi, w)| w * sign(*xi)).collect()
            }
            Exponent::Finite(p) if p == 2.0 => {
                x.iter().zip(&self.weights).map(|(xi, w)| w * xi / nrm).collect()
            }
            Exponent::Finite(p) => {
                let scale = nrm.powf(p - 1.0);
                x.iter()
                    .zip(&self.weights)
                    .map(|(xi, w)| w * sign(*xi) * xi.abs().powf(p - 1.0) / scale)
                    .collect()
            }
        }
    }

    /// Nearest point of the dual unit ball.
    ///
    /// Exact Euclidean projection for box duals (exponent 1), weighted cross-polytope duals
    /// (exponent ∞) and unit-weight Hilbert spaces; radial retraction otherwise.
    pub fn project_to_dual_ball(&self, phi: &mut [f64]) {
        match self.exponent {
            Exponent::Finite(p) if p == 1.0 => {
                for (f, w) in phi.iter_mut().zip(&self.weights) {
                    *f = f.clamp(-w, *w);
                }
            }
            Exponent::Infinity => project_weighted_l1_ball(phi, &self.weights),
            _ => {
                let n = self.dual_norm_of(phi);
                if n > 1.0 {
                    phi.iter_mut().for_each(|f| *f /= n);
                }
            }
        }
    }

    /// Number of extreme points of the dual ball, when it is a polytope and the count fits.
    pub fn dual_vertex_count(&self) -> Option<usize> {
        match self.exponent {
            Exponent::Infinity => Some(2 * self.dim),
            Exponent::Finite(p) if p == 1.0 => {
                u32::try_from(self.dim).ok().and_then(|d| 1usize.checked_shl(d))
            }
            _ => None,
        }
    }

    /// Writes the `index`-th extreme point of the polytope dual ball into `out`.
    ///
    /// For exponent ∞ these are `±w_j e_j` (order `+e_0, -e_0, +e_1, ...`); for exponent 1 the
    /// sign vectors `(±w_j)_j`, bit `j` of `index` selecting the minus sign.
    pub fn dual_vertex(&self, index: usize, out: &mut [f64]) {
        match self.exponent {
            Exponent::Infinity => {
                out.iter_mut().for_each(|v| *v = 0.0);
                let j = index / 2;
                out[j] = if index % 2 == 0 { self.weights[j] } else { -self.weights[j] };
            }
            _ => {
                for (j, (v, w)) in out.iter_mut().zip(&self.weights).enumerate() {
                    *v = if (index >> j) & 1 == 1 { -w } else { *w };
                }
            }
        }
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Euclidean projection onto `{φ : Σ |φ_j| / w_j ≤ 1}`.
fn project_weighted_l1_ball(phi: &mut [f64], weights: &[f64]) {
    let radius: f64 = phi.iter().zip(weights).map(|(f, w)| f.abs() / w).sum();
    if radius <= 1.0 {
        return;
    }
    // Minimizer is φ_j = sign(y_j) max(|y_j| - λ/w_j, 0); find λ from the sorted breakpoints |y_j| w_j.
    let mut order: Vec<usize> = (0..phi.len()).collect();
    order.sort_by(|&a, &b| (phi[b].abs() * weights[b]).total_cmp(&(phi[a].abs() * weights[a])));
    let mut lin = 0.0; // Σ |y_j| / w_j over the active set
    let mut quad = 0.0; // Σ 1 / w_j^2 over the active set
    let mut lambda = 0.0;
    for (k, &j) in order.iter().enumerate() {
        lin += phi[j].abs() / weights[j];
        quad += 1.0 / (weights[j] * weights[j]);
        let candidate = (lin - 1.0) / quad;
        let next_break = order.get(k + 1).map(|&i| phi[i].abs() * weights[i]).unwrap_or(0.0);
        if candidate >= next_break {
            lambda = candidate;
            break;
        }
    }
    for (f, w) in phi.iter_mut().zip(weights) {
        let shrunk = (f.abs() - lambda / w).max(0.0);
        *f = f.signum() * shrunk;
    }
}

macro_rules! coordinate_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub Vec<f64>);

        impl $name {
            pub fn zeros(dim: usize) -> Self {
                $name(vec![0.0; dim])
            }

            pub fn basis(dim: usize, j: usize) -> Self {
                let mut v = vec![0.0; dim];
                v[j] = 1.0;
                $name(v)
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                $name(v)
            }
        }

        impl From<&[f64]> for $name {
            fn from(v: &[f64]) -> Self {
                $name(v.to_vec())
            }
        }
    };
}

coordinate_newtype!(
    /// Element of a [`SpaceSpec`].
    Vector
);
coordinate_newtype!(
    /// Element of the dual of a [`SpaceSpec`].
    Functional
);

impl Vector {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * factor).collect())
    }
}

/// A supremum over the dual ball after rescaling to a norm-like quantity, with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    pub value: f64,
    pub certified: bool,
    pub witness: Functional,
}

/// Weighted `ℓ_p` norm of `x`.
pub fn norm(space: &SpaceSpec, x: &Vector) -> Result<f64> {
    space.check_dim(x.len())?;
    Ok(space.norm_of(x))
}

/// Dual norm of `phi`.
pub fn dual_norm(space: &SpaceSpec, phi: &Functional) -> Result<f64> {
    space.check_dim(phi.len())?;
    Ok(space.dual_norm_of(phi))
}

/// The duality pairing `⟨x, φ⟩ = Σ x_j φ_j`.
pub fn dual_pair(x: &Vector, phi: &Functional) -> Result<f64> {
    if x.len() != phi.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: phi.len() });
    }
    Ok(dot(x, phi))
}

/// A norming functional of `x`: dual norm ≤ 1 and `⟨x, φ⟩ = ‖x‖`.
pub fn norming_functional(space: &SpaceSpec, x: &Vector) -> Result<Functional> {
    space.check_dim(x.len())?;
    Ok(Functional(space.norming_functional_of(x)))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn euclidean_norm() {
        let s = SpaceSpec::lp(2, 2.0).unwrap();
        assert_eq!(norm(&s, &Vector(vec![3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(norm(&s, &Vector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn weighted_l1_norm() {
        let s = SpaceSpec::weighted(2, Exponent::Finite(1.0), vec![0.5, 0.5]).unwrap();
        assert_eq!(norm(&s, &Vector(vec![1.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn weighted_sup_norm() {
        let s = SpaceSpec::weighted(3, Exponent::Infinity, vec![1.0, 3.0, 0.5]).unwrap();
        assert_eq!(norm(&s, &Vector(vec![2.0, -1.0, 4.0])).unwrap(), 3.0);
    }

    #[test]
    fn norm_dimension_mismatch() {
        let s = SpaceSpec::lp(2, 2.0).unwrap();
        assert!(matches!(
            norm(&s, &Vector(vec![1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn pairing_examples() {
        let p = |x: Vec<f64>, f: Vec<f64>| dual_pair(&Vector(x), &Functional(f)).unwrap();
        assert_eq!(p(vec![1.0, 2.0], vec![3.0, 4.0]), 11.0);
        assert_eq!(p(vec![1.0, 0.0], vec![1.0, 0.0]), 1.0);
        assert_eq!(p(vec![1.0, -1.0], vec![1.0, 1.0]), 0.0);
        assert!(dual_pair(&Vector(vec![1.0]), &Functional(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn invalid_spaces_rejected() {
        assert!(SpaceSpec::lp(0, 2.0).is_err());
        assert!(SpaceSpec::lp(2, 0.5).is_err());
        assert!(SpaceSpec::weighted(2, Exponent::Finite(2.0), vec![1.0, 0.0]).is_err());
        assert!(SpaceSpec::weighted(2, Exponent::Finite(2.0), vec![1.0]).is_err());
    }

    #[test]
    fn space_json_shape() {
        let s: SpaceSpec = serde_json::from_str(r#"{"dim":2,"exponent":"inf"}"#).unwrap();
        assert_eq!(s.exponent(), Exponent::Infinity);
        assert_eq!(s.weights(), &[1.0, 1.0]);
        let s: SpaceSpec =
            serde_json::from_str(r#"{"dim":2,"exponent":1.5,"weights":[2.0,3.0]}"#).unwrap();
        assert_eq!(s.exponent(), Exponent::Finite(1.5));
        let text = serde_json::to_string(&SpaceSpec::linf(1).unwrap()).unwrap();
        assert_eq!(text, r#"{"dim":1,"exponent":"inf","weights":[1.0]}"#);
        assert!(serde_json::from_str::<SpaceSpec>(r#"{"dim":2,"exponent":0.5}"#).is_err());
        assert!(serde_json::from_str::<SpaceSpec>(r#"{"dim":2,"exponent":"big"}"#).is_err());
    }

    #[test]
    fn norming_functionals_attain_the_norm() {
        let x = [0.3, -1.2, 2.5];
        let spaces = [
            SpaceSpec::weighted(3, Exponent::Finite(1.0), vec![0.5, 2.0, 1.0]).unwrap(),
            SpaceSpec::weighted(3, Exponent::Finite(2.0), vec![0.5, 2.0, 1.0]).unwrap(),
            SpaceSpec::weighted(3, Exponent::Finite(3.5), vec![0.5, 2.0, 1.0]).unwrap(),
            SpaceSpec::weighted(3, Exponent::Infinity, vec![0.5, 2.0, 1.0]).unwrap(),
        ];
        for s in &spaces {
            let phi = s.norming_functional_of(&x);
            assert!(close(dot(&x, &phi), s.norm_of(&x), 1e-12), "{s:?}");
            assert!(s.dual_norm_of(&phi) <= 1.0 + 1e-12, "{s:?}");
        }
    }

    #[test]
    fn weighted_cross_polytope_projection() {
        let w = [1.0, 2.0, 0.5];
        let mut phi = [3.0, -1.0, 0.2];
        project_weighted_l1_ball(&mut phi, &w);
        let r: f64 = phi.iter().zip(&w).map(|(f, w)| f.abs() / w).sum();
        assert!(close(r, 1.0, 1e-12));
        // optimality: the projection beats nearby feasible points
        let y = [3.0, -1.0, 0.2];
        let d0: f64 = phi.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        for probe in [[1.0, 0.0, 0.0], [0.9, -0.2, 0.0], [0.95, 0.0, 0.025]] {
            let d: f64 = probe.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(d0 <= d + 1e-12);
        }
    }

    #[test]
    fn conjugate_exponents() {
        assert_eq!(Exponent::Finite(1.0).conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::Finite(1.0));
        assert_eq!(Exponent::Finite(2.0).conjugate(), Exponent::Finite(2.0));
        assert_eq!(Exponent::Finite(4.0).conjugate(), Exponent::Finite(4.0 / 3.0));
    }
}
