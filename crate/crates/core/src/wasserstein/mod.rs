//! Exact optimal transport between small discrete measures, Wasserstein
//! barycenters and smooth strongly convex interpolation conditions.

mod barycenter;
mod interpolation;
pub mod lp;
mod measure;

use crate::error::Result;
use crate::frechet::{EmpiricalMeasure, FrechetMean, MeanSet, MetricSpace, SpaceKind};

pub use barycenter::{
    barycenter_multimarginal, frechet_functional_w, MAX_ATOMS_PER_MARGINAL, MAX_MARGINALS, MAX_OPTIMAL_BASES,
};
pub use interpolation::{feasible_region, interpolation_feasible, FeasibleRegion, InterpolationPoint};
pub use measure::{w2_distance, w2_squared, DiscreteMeasure, TransportPlan, MAX_TRANSPORT_SUPPORT};

/// Discrete probability measures on `R^m` with the 2-Wasserstein metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WassersteinSpace {
    pub m: usize,
}

impl MetricSpace for WassersteinSpace {
    type Point = DiscreteMeasure;

    fn kind(&self) -> SpaceKind {
        SpaceKind::Wasserstein { m: self.m }
    }

    fn distance(&self, x: &DiscreteMeasure, y: &DiscreteMeasure) -> Result<f64> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(w2_distance(x, y)?.0)
    }

    fn validate(&self, x: &DiscreteMeasure) -> Result<()> {
        if x.dim() != self.m {
            return Err(crate::Error::InvalidInput(format!(
                "measure on R^{} used in the Wasserstein space over R^{}",
                x.dim(),
                self.m
            )));
        }
        Ok(())
    }
}

impl FrechetMean for WassersteinSpace {
    fn frechet_mean(&self, mu: &EmpiricalMeasure<DiscreteMeasure>) -> Result<MeanSet<DiscreteMeasure>> {
        for x in mu.atoms() {
            self.validate(x)?;
        }
        barycenter_multimarginal(mu.atoms(), mu.weights())
    }
}
