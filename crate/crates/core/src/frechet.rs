//! Space-agnostic Fréchet framework: metric spaces, loss functions,
//! empirical measures and mean sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// A mean set is flagged unique when its diameter is below this value.
pub const UNIQUENESS_TOLERANCE: f64 = 1e-6;

/// The concrete metric spaces supported by the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceKind {
    Circle,
    /// `S^m`, embedded in `R^{m+1}`.
    Sphere { m: usize },
    /// Pre-shapes of `k` landmarks in `R^m`, compared by Procrustes distance.
    PreShape { m: usize, k: usize },
    /// Finitely supported measures on `R^m` with the 2-Wasserstein metric.
    Wasserstein { m: usize },
}

pub trait MetricSpace: Sync {
    type Point: Clone + Send + Sync;

    fn kind(&self) -> SpaceKind;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> Result<f64>;

    /// Check that `x` is a valid element of this space.
    fn validate(&self, _x: &Self::Point) -> Result<()> {
        Ok(())
    }
}

/// Spaces with a solver for the empirical Fréchet mean (`rho = d^2`).
pub trait FrechetMean: MetricSpace {
    fn frechet_mean(&self, mu: &EmpiricalMeasure<Self::Point>) -> Result<MeanSet<Self::Point>>;
}

/// Coordinates used to order points when a single element must be picked
/// from a mean set.
pub trait Canonical {
    fn canonical_coords(&self) -> Vec<f64>;
}

/// A loss `rho(x, y)` defining a Fréchet rho-mean.
pub trait Rho<P>: Sync {
    fn evaluate(&self, x: &P, y: &P) -> Result<f64>;

    /// Whether `rho(., y)` is uniquely minimized at `y`. Declared, not checked.
    fn is_honest(&self) -> bool;
}

/// `rho = d^2`, the classical Fréchet loss. Always honest.
#[derive(Debug, Clone, Copy)]
pub struct SquaredDistance<'a, S>(pub &'a S);

impl<S: MetricSpace> Rho<S::Point> for SquaredDistance<'_, S> {
    fn evaluate(&self, x: &S::Point, y: &S::Point) -> Result<f64> {
        let d = self.0.distance(x, y)?;
        Ok(d * d)
    }

    fn is_honest(&self) -> bool {
        true
    }
}

/// A finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure<P> {
    atoms: Vec<P>,
    weights: Vec<f64>,
}

impl<P> EmpiricalMeasure<P> {
    /// Uniform weights `1/n`.
    pub fn uniform(atoms: Vec<P>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("empirical measure needs at least one atom".into()));
        }
        let w = 1.0 / atoms.len() as f64;
        let weights = vec![w; atoms.len()];
        Ok(Self { atoms, weights })
    }

    pub fn weighted(atoms: Vec<P>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("empirical measure needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total = stats::compensated_sum(&weights);
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms, weights })
    }

    pub fn atoms(&self) -> &[P] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, f64)> {
        self.atoms.iter().zip(self.weights.iter().copied())
    }
}

/// Why a mean set could not be listed point by point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Degeneracy {
    /// Every point of the space is a minimizer.
    WholeSpace,
    /// The leading eigenvalue is not simple; the gap is recorded.
    Eigengap { gap: f64 },
}

/// The set of minimizers of a Fréchet function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanSet<P> {
    pub minimizers: Vec<P>,
    pub frechet_value: f64,
    /// Maximal pairwise distance between minimizers.
    pub diameter: f64,
    pub unique: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degeneracy: Option<Degeneracy>,
}

impl<P: Clone> MeanSet<P> {
    /// Build a mean set from its minimizers, measuring the diameter in `space`.
    pub fn from_minimizers<S>(space: &S, minimizers: Vec<P>, frechet_value: f64) -> Result<Self>
    where
        S: MetricSpace<Point = P>,
    {
        let mut diameter: f64 = 0.0;
        for i in 0..minimizers.len() {
            for j in (i + 1)..minimizers.len() {
                diameter = diameter.max(space.distance(&minimizers[i], &minimizers[j])?);
            }
        }
        Ok(Self {
            minimizers,
            frechet_value,
            diameter,
            unique: diameter < UNIQUENESS_TOLERANCE,
            degeneracy: None,
        })
    }

    pub fn singleton(point: P, frechet_value: f64) -> Self {
        Self {
            minimizers: vec![point],
            frechet_value,
            diameter: 0.0,
            unique: true,
            degeneracy: None,
        }
    }
}

impl<P: Canonical> MeanSet<P> {
    /// Measurable selection: the minimizer with the lexicographically
    /// smallest canonical coordinates.
    pub fn select(&self) -> Option<&P> {
        self.minimizers.iter().min_by(|a, b| {
            let (ca, cb) = (a.canonical_coords(), b.canonical_coords());
            ca.iter()
                .zip(cb.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

/// `sum_i w_i rho(x, atom_i)`.
pub fn frechet_value<S, R>(space: &S, rho: &R, mu: &EmpiricalMeasure<S::Point>, x: &S::Point) -> Result<f64>
where
    S: MetricSpace,
    R: Rho<S::Point>,
{
    space.validate(x)?;
    let mut total = 0.0;
    for (atom, w) in mu.iter() {
        total += w * rho.evaluate(x, atom)?;
    }
    Ok(total)
}
