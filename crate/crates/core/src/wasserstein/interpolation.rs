use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};

/// A point `x` with prescribed gradient `g` and value `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationPoint {
    pub x: DVector<f64>,
    pub g: DVector<f64>,
    pub f: f64,
}

impl InterpolationPoint {
    pub fn new(x: &[f64], g: &[f64], f: f64) -> Self {
        Self {
            x: DVector::from_column_slice(x),
            g: DVector::from_column_slice(g),
            f,
        }
    }
}

/// Whether the data admit an `alpha`-strongly convex, `beta`-smooth
/// interpolant: for every ordered pair `(i, j)`,
///
/// `f_i >= f_j + g_j^T (x_i - x_j) + 1/(2 (1 - alpha/beta)) *
///   (|g_i - g_j|^2 / beta + alpha |x_i - x_j|^2 - 2 (alpha/beta) (g_j - g_i)^T (x_j - x_i))`.
///
/// Inequalities holding with equality up to rounding count as satisfied.
pub fn interpolation_feasible(alpha: f64, beta: f64, data: &[InterpolationPoint]) -> Result<bool> {
    if !(alpha.is_finite() && beta.is_finite()) || alpha < 0.0 || alpha >= beta {
        return Err(Error::InvalidInput(format!("need 0 <= alpha < beta, got alpha = {alpha}, beta = {beta}")));
    }
    if let Some(p) = data.first() {
        let d = p.x.len();
        if data.iter().any(|q| q.x.len() != d || q.g.len() != d) {
            return Err(Error::InvalidInput("points and gradients must share one dimension".into()));
        }
    }
    let ratio = alpha / beta;
    let scale = 1.0 / (2.0 * (1.0 - ratio));
    for (i, pi) in data.iter().enumerate() {
        for (j, pj) in data.iter().enumerate() {
            if i == j {
                continue;
            }
            let dx = &pi.x - &pj.x;
            let dg = &pi.g - &pj.g;
            let lhs = pi.f - pj.f - pj.g.dot(&dx);
            let rhs = scale * (dg.norm_squared() / beta + alpha * dx.norm_squared() - 2.0 * ratio * dg.dot(&dx));
            if lhs < rhs - 1e-12 * (1.0 + lhs.abs() + rhs.abs()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Admissible smoothness constants `beta` for a given condition gap
/// `gamma = beta - alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibleRegion {
    pub gamma: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

impl FeasibleRegion {
    pub fn contains(&self, beta: f64) -> bool {
        self.beta_lo <= beta && beta <= self.beta_hi
    }
}

/// `[(gamma + 2 - sqrt(gamma^2 - 4)) / 2, (gamma + 2 + sqrt(gamma^2 - 4)) / 2]`,
/// the values of `beta` for which the symmetric two-point configuration
/// `+-E -> +-A` with equal values is interpolable at gap `gamma`.
pub fn feasible_region(gamma: f64) -> Result<FeasibleRegion> {
    if !gamma.is_finite() {
        return Err(Error::InvalidInput(format!("gamma must be finite, got {gamma}")));
    }
    if gamma < 2.0 {
        return Err(Error::Empty(format!("no admissible beta for gamma = {gamma} < 2")));
    }
    let root = (gamma * gamma - 4.0).sqrt();
    Ok(FeasibleRegion {
        gamma,
        beta_lo: 0.5 * (gamma + 2.0 - root),
        beta_hi: 0.5 * (gamma + 2.0 + root),
    })
}
