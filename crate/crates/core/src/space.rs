//! Finite dimensional l_p spaces: norms, dual norms, norming functionals,
//! and the quasi-orthogonality relation they induce.
//!
//! A `SpaceSpec` fixes the exponent, the dimension, and whether the space
//! runs through the Euclidean fast paths or the generic l_p code. Vectors
//! live in the primal space, `DualVector`s in the dual; the pairing is the
//! standard coordinate one, and for 1 < p < infinity the dual norm is the
//! l_q norm with 1/p + 1/q = 1.

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Euclidean,
    Lp,
}

/// Ambient space descriptor. `mode == Euclidean` implies `p == 2` and
/// unlocks closed forms; `mode == Lp` always takes the generic route,
/// including for p = 2, which is how the estimators get cross-checked
/// against the Euclidean formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub p: f64,
    pub dim: usize,
    pub mode: Mode,
}

impl SpaceSpec {
    pub fn euclidean(dim: usize) -> Self {
        SpaceSpec { p: 2.0, dim, mode: Mode::Euclidean }
    }

    pub fn lp(p: f64, dim: usize) -> Result<Self, Error> {
        let s = SpaceSpec { p, dim, mode: Mode::Lp };
        s.validate()?;
        Ok(s)
    }

    /// Checks the invariants a deserialized spec must satisfy.
    pub fn validate(&self) -> Result<(), Error> {
        if !self.p.is_finite() || self.p < 1.0 {
            return Err(Error::BadExponent(self.p, "[1, infinity)"));
        }
        if self.mode == Mode::Euclidean && self.p != 2.0 {
            return Err(Error::invalid(format!(
                "euclidean mode requires p = 2, got p = {}",
                self.p
            )));
        }
        if self.dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        Ok(())
    }

    /// Dual exponent q with 1/p + 1/q = 1; infinity when p = 1.
    pub fn dual_exponent(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// True when the norm is smooth (unique norming functionals).
    pub fn is_smooth(&self) -> bool {
        self.p > 1.0
    }

    /// Power type of the modulus of convexity: max(p, 2).
    pub fn convexity_power(&self) -> f64 {
        self.p.max(2.0)
    }

    pub fn check_dim(&self, len: usize) -> Result<(), Error> {
        if len != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: len });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualVector(pub Vec<f64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl DualVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<Vec<f64>> for DualVector {
    fn from(v: Vec<f64>) -> Self {
        DualVector(v)
    }
}

/// Norm of `v` in the space.
pub fn norm(space: &SpaceSpec, v: &Vector) -> Result<f64, Error> {
    space.check_dim(v.dim())?;
    space.validate()?;
    Ok(norm_slice(space, v.as_slice()))
}

/// Dual norm of a functional: l_q with 1/p + 1/q = 1 (max-abs for p = 1).
pub fn dual_norm(space: &SpaceSpec, f: &DualVector) -> Result<f64, Error> {
    space.check_dim(f.dim())?;
    space.validate()?;
    Ok(dual_norm_slice(space, f.as_slice()))
}

/// The unique norm-one functional attaining its norm at `x`, for 1 < p.
/// Coordinates: sign(x_i) |x_i|^(p-1) / ||x||^(p-1).
pub fn norming_functional(space: &SpaceSpec, x: &Vector) -> Result<DualVector, Error> {
    space.check_dim(x.dim())?;
    space.validate()?;
    if !space.is_smooth() {
        return Err(Error::BadExponent(space.p, "(1, infinity) for norming functionals"));
    }
    let n = norm_slice(space, x.as_slice());
    if n == 0.0 {
        return Err(Error::ZeroVector("norming_functional"));
    }
    Ok(DualVector(norming_slice(space, x.as_slice(), n)))
}

/// Standard pairing of a functional with a vector.
pub fn pairing(f: &DualVector, v: &Vector) -> Result<f64, Error> {
    if f.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: v.dim() });
    }
    Ok(dot(f.as_slice(), v.as_slice()))
}

/// True iff the norming functional of `x` vanishes on `y` up to `tol`
/// (the Birkhoff-James relation "y is quasi-orthogonal to x").
pub fn is_quasi_orthogonal(
    space: &SpaceSpec,
    y: &Vector,
    x: &Vector,
    tol: f64,
) -> Result<bool, Error> {
    let f = norming_functional(space, x)?;
    Ok(pairing(&f, y)?.abs() <= tol)
}

// --- slice-level kernels shared by the numeric modules ---

pub(crate) fn norm_slice(space: &SpaceSpec, x: &[f64]) -> f64 {
    if space.p == 2.0 {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    if space.p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    let p = space.p;
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

pub(crate) fn dual_norm_slice(space: &SpaceSpec, f: &[f64]) -> f64 {
    let q = space.dual_exponent();
    if q.is_infinite() {
        return f.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    if q == 2.0 {
        return f.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    f.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
}

/// Norming functional coordinates given the precomputed norm `n` of `x`.
pub(crate) fn norming_slice(space: &SpaceSpec, x: &[f64], n: f64) -> Vec<f64> {
    if space.p == 2.0 {
        return x.iter().map(|v| v / n).collect();
    }
    let p = space.p;
    let scale = n.powf(p - 1.0);
    x.iter()
        .map(|v| {
            if *v == 0.0 {
                0.0
            } else {
                v.signum() * v.abs().powf(p - 1.0) / scale
            }
        })
        .collect()
}

/// Gradient of the norm at `z` (the norming functional of `z`), as raw
/// coordinates; caller guarantees z != 0 and p > 1.
pub(crate) fn norm_gradient(space: &SpaceSpec, z: &[f64]) -> Vec<f64> {
    norming_slice(space, z, norm_slice(space, z))
}

/// Removes the component of `y` seen by the norming functional of `x`,
/// so the result is exactly quasi-orthogonal to `x` (x must be nonzero).
pub(crate) fn quasi_orthogonalize(space: &SpaceSpec, y: &[f64], x: &[f64]) -> Vec<f64> {
    let nx = norm_slice(space, x);
    let j = norming_slice(space, x, nx);
    let c = dot(&j, y);
    // <j, x/nx> = 1, so subtracting c * x/nx zeroes the pairing.
    y.iter().zip(x).map(|(yi, xi)| yi - c * xi / nx).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// a + s * b
pub(crate) fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}
