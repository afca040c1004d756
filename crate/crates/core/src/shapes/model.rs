use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::PreShape;
use crate::error::{Error, Result};
use crate::harness::Sampler;
use crate::rng::StreamRng;

/// Raw landmarks `base + spread Z`, `Z` standard normal, turned by a
/// uniformly random rotation and reduced to a pre-shape.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkNoise {
    base: DMatrix<f64>,
    spread: f64,
}

impl LandmarkNoise {
    /// `base` holds one landmark per column.
    pub fn new(base: DMatrix<f64>, spread: f64) -> Result<Self> {
        if !(spread > 0.0 && spread.is_finite()) {
            return Err(Error::InvalidInput(format!("landmark spread must be positive, got {spread}")));
        }
        PreShape::from_landmarks(&base)?;
        Ok(Self { base, spread })
    }

    /// A generic configuration of `k` landmarks in `R^m`.
    pub fn generic_base(m: usize, k: usize) -> DMatrix<f64> {
        if (m, k) == (2, 3) {
            return DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.3, 0.0, 0.0, 0.9]);
        }
        DMatrix::from_fn(m, k, |i, j| ((i + 1) as f64 * (j as f64 + 0.5) + (i * i) as f64).sin())
    }

    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    /// Pre-shape of the noiseless configuration.
    pub fn truth(&self) -> PreShape {
        PreShape::from_landmarks(&self.base).expect("checked on construction")
    }
}

fn random_rotation(m: usize, rng: &mut StreamRng) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = a.qr();
        let r = qr.r();
        if (0..m).any(|i| r[(i, i)].abs() < 1e-12) {
            continue;
        }
        // sign fix makes Q Haar-distributed on O(m)
        let mut q = qr.q();
        for i in 0..m {
            if r[(i, i)] < 0.0 {
                q.column_mut(i).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        return q;
    }
}

impl Sampler for LandmarkNoise {
    type Point = PreShape;

    fn draw(&self, rng: &mut StreamRng) -> PreShape {
        let (m, k) = self.base.shape();
        loop {
            let z = DMatrix::from_fn(m, k, |_, _| rng.sample::<f64, _>(StandardNormal));
            let g = random_rotation(m, rng);
            if let Ok(x) = PreShape::from_landmarks(&(g * (&self.base + z * self.spread))) {
                return x;
            }
        }
    }
}
