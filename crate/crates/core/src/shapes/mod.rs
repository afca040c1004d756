//! Kendall pre-shapes: residual and Procrustes distances, residual and
//! Procrustes means, and the limit covariance of the Procrustes mean.

mod clt;
mod mean;
mod model;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frechet::{Canonical, MetricSpace, SpaceKind};

pub use clt::{chart, clt_cov_procrustes, EigenStructure};
pub use mean::{procrustes_mean, residual_mean, ProcrustesFit, ProcrustesOptions};
pub use model::LandmarkNoise;

const UNIT_TOLERANCE: f64 = 1e-12;

/// A centered, unit-size configuration stored as an `m x (k-1)` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PreShapeRepr", into = "PreShapeRepr")]
pub struct PreShape {
    k: usize,
    config: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct PreShapeRepr {
    m: usize,
    k: usize,
    /// Column-major entries of the `m x (k-1)` matrix.
    config: Vec<f64>,
}

impl TryFrom<PreShapeRepr> for PreShape {
    type Error = Error;

    fn try_from(r: PreShapeRepr) -> Result<Self> {
        PreShape::new(r.m, r.k, r.config)
    }
}

impl From<PreShape> for PreShapeRepr {
    fn from(p: PreShape) -> Self {
        PreShapeRepr {
            m: p.m(),
            k: p.k,
            config: p.config.as_slice().to_vec(),
        }
    }
}

fn check_dims(m: usize, k: usize) -> Result<()> {
    if m < 2 || k < m + 1 {
        return Err(Error::InvalidInput(format!(
            "pre-shapes need m >= 2 and k >= m + 1, got m = {m}, k = {k}"
        )));
    }
    Ok(())
}

impl PreShape {
    /// From the column-major entries of an `m x (k-1)` matrix of unit
    /// Frobenius norm.
    pub fn new(m: usize, k: usize, entries: Vec<f64>) -> Result<Self> {
        check_dims(m, k)?;
        if entries.len() != m * (k - 1) {
            return Err(Error::InvalidInput(format!(
                "expected {} pre-shape entries, got {}",
                m * (k - 1),
                entries.len()
            )));
        }
        let config = DMatrix::from_vec(m, k - 1, entries);
        let norm = config.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidInput(format!("pre-shape has Frobenius norm {norm}, expected 1")));
        }
        Ok(Self { k, config })
    }

    /// Scales an `m x (k-1)` matrix to unit Frobenius norm.
    pub fn normalize(config: DMatrix<f64>) -> Result<Self> {
        let (m, k) = (config.nrows(), config.ncols() + 1);
        check_dims(m, k)?;
        let norm = config.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("configuration has zero or non-finite size".into()));
        }
        Ok(Self { k, config: config / norm })
    }

    /// Helmert-centers and scales raw landmarks given as an `m x k` matrix.
    pub fn from_landmarks(landmarks: &DMatrix<f64>) -> Result<Self> {
        let k = landmarks.ncols();
        check_dims(landmarks.nrows(), k)?;
        Self::normalize(landmarks * helmert(k))
    }

    pub(crate) fn from_unit(config: DMatrix<f64>) -> Self {
        Self { k: config.ncols() + 1, config }
    }

    pub fn m(&self) -> usize {
        self.config.nrows()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn config(&self) -> &DMatrix<f64> {
        &self.config
    }

    /// Column-major vectorization.
    pub fn vec(&self) -> DVector<f64> {
        DVector::from_column_slice(self.config.as_slice())
    }

    pub fn from_vec(m: usize, k: usize, v: &DVector<f64>) -> Result<Self> {
        Self::new(m, k, v.as_slice().to_vec())
    }

    pub fn negate(&self) -> Self {
        Self { k: self.k, config: -&self.config }
    }

    /// The representative of `{x, -x}` whose vectorization is
    /// lexicographically larger.
    pub fn sign_normalized(&self) -> Self {
        let first = self.config.iter().find(|c| **c != 0.0).copied().unwrap_or(0.0);
        if first < 0.0 {
            self.negate()
        } else {
            self.clone()
        }
    }

    /// `g x` for a rotation `g` of `R^m`.
    pub fn rotate(&self, g: &DMatrix<f64>) -> Self {
        Self { k: self.k, config: g * &self.config }
    }

    fn same_dims(&self, other: &Self) -> Result<()> {
        if self.m() != other.m() || self.k != other.k {
            return Err(Error::InvalidInput(format!(
                "pre-shapes of different dimensions: ({}, {}) and ({}, {})",
                self.m(),
                self.k,
                other.m(),
                other.k
            )));
        }
        Ok(())
    }
}

impl Canonical for PreShape {
    fn canonical_coords(&self) -> Vec<f64> {
        self.config.as_slice().to_vec()
    }
}

/// Orthonormal basis of the centered subspace of `R^k`, as the columns of a
/// `k x (k-1)` matrix (Helmert sub-matrix, transposed).
pub fn helmert(k: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(k, k - 1);
    for j in 1..k {
        let s = 1.0 / ((j * (j + 1)) as f64).sqrt();
        for i in 0..j {
            h[(i, j - 1)] = -s;
        }
        h[(j, j - 1)] = j as f64 * s;
    }
    h
}

/// `sqrt(1 - tr(x^T y)^2)`.
pub fn residual_distance(x: &PreShape, y: &PreShape) -> Result<f64> {
    x.same_dims(y)?;
    let t = x.config.dot(&y.config);
    // 1 - t^2 = e (2 - e) with e = 1 - |t| = |x -+ y|^2 / 2, which keeps
    // full relative accuracy for nearly equal shapes
    let diff = if t >= 0.0 { &x.config - &y.config } else { &x.config + &y.config };
    let e = 0.5 * diff.norm_squared();
    Ok((e * (2.0 - e)).max(0.0).sqrt())
}

/// Rotation `g` in `SO(m)` maximizing `tr(x^T g y)^2` and the resulting
/// Procrustes distance `d_R(x, g y)`.
pub fn procrustes_distance(x: &PreShape, y: &PreShape) -> Result<(f64, DMatrix<f64>)> {
    x.same_dims(y)?;
    let a = &y.config * x.config.transpose();
    let g = if x.m() == 2 {
        // tr(g A) = cos(t) (a11 + a22) + sin(t) (a12 - a21)
        let t = (a[(0, 1)] - a[(1, 0)]).atan2(a[(0, 0)] + a[(1, 1)]);
        let (s, c) = t.sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    } else {
        let (g_plus, v_plus) = best_rotation(&a);
        if x.m() % 2 == 1 {
            // -I is not a rotation in odd dimension, so -tr(g A) is maximized separately
            let (g_minus, v_minus) = best_rotation(&(-&a));
            if v_minus > v_plus {
                g_minus
            } else {
                g_plus
            }
        } else {
            g_plus
        }
    };
    let d = residual_distance(x, &y.rotate(&g))?;
    Ok((d, g))
}

/// Maximizer of `tr(g A)` over `SO(m)` with its value.
fn best_rotation(a: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let m = a.nrows();
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let v = v_t.transpose();
    let mut d = DMatrix::identity(m, m);
    if (&v * u.transpose()).determinant() < 0.0 {
        d[(m - 1, m - 1)] = -1.0;
    }
    let g = &v * d * u.transpose();
    let value = (&g * a).trace();
    (g, value)
}

/// `y` rotated into optimal position relative to `x`, with sign chosen so
/// that `tr(x^T y) >= 0`.
pub fn align(x: &PreShape, y: &PreShape) -> Result<PreShape> {
    let (_, g) = procrustes_distance(x, y)?;
    let z = y.rotate(&g);
    Ok(if x.config.dot(&z.config) < 0.0 { z.negate() } else { z })
}

/// Shape classes of `k` landmarks in `R^m` with the Procrustes distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeSpace {
    pub m: usize,
    pub k: usize,
}

impl ShapeSpace {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        check_dims(m, k)?;
        Ok(Self { m, k })
    }
}

impl MetricSpace for ShapeSpace {
    type Point = PreShape;

    fn kind(&self) -> SpaceKind {
        SpaceKind::PreShape { m: self.m, k: self.k }
    }

    fn distance(&self, x: &PreShape, y: &PreShape) -> Result<f64> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(procrustes_distance(x, y)?.0)
    }

    fn validate(&self, x: &PreShape) -> Result<()> {
        if x.m() != self.m || x.k() != self.k {
            return Err(Error::InvalidInput(format!(
                "pre-shape ({}, {}) used in shape space ({}, {})",
                x.m(),
                x.k(),
                self.m,
                self.k
            )));
        }
        Ok(())
    }
}

impl crate::frechet::FrechetMean for ShapeSpace {
    fn frechet_mean(
        &self,
        mu: &crate::frechet::EmpiricalMeasure<PreShape>,
    ) -> Result<crate::frechet::MeanSet<PreShape>> {
        for x in mu.atoms() {
            self.validate(x)?;
        }
        Ok(procrustes_mean(mu, ProcrustesOptions::default())?.mean)
    }
}
