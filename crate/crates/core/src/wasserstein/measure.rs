use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lp::LinearProgram;
use crate::error::{Error, Result};
use crate::frechet::Canonical;
use crate::stats;

/// Largest combined support handled by the exact transport solver.
pub const MAX_TRANSPORT_SUPPORT: usize = 64;

/// A finitely supported probability measure on `R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct DiscreteMeasure {
    support: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureRepr {
    support: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<MeasureRepr> for DiscreteMeasure {
    type Error = Error;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        DiscreteMeasure::new(r.support, r.weights)
    }
}

impl From<DiscreteMeasure> for MeasureRepr {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureRepr { support: m.support, weights: m.weights }
    }
}

impl DiscreteMeasure {
    pub fn new(support: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one support point".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        let m = support[0].len();
        if m == 0 || support.iter().any(|x| x.len() != m) {
            return Err(Error::InvalidInput("support points must share a positive dimension".into()));
        }
        if support.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("support points must be finite".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total = stats::compensated_sum(&weights);
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        for i in 0..support.len() {
            for j in (i + 1)..support.len() {
                if support[i] == support[j] {
                    return Err(Error::InvalidInput(format!("support points {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { support, weights })
    }

    /// Uniform weights on distinct points.
    pub fn uniform(support: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / support.len().max(1) as f64;
        let weights = vec![w; support.len()];
        Self::new(support, weights)
    }

    pub fn dirac(x: Vec<f64>) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support[0].len()
    }

    /// The same measure with support points in lexicographic order.
    pub fn sorted(&self) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(&self.support[a], &self.support[b]));
        Self {
            support: order.iter().map(|&i| self.support[i].clone()).collect(),
            weights: order.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// Builds a measure from possibly repeated atoms, merging points closer
    /// than `tol` and dropping masses below `1e-15`.
    pub fn from_atoms(atoms: Vec<(Vec<f64>, f64)>, tol: f64) -> Result<Self> {
        let mut support: Vec<Vec<f64>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (x, w) in atoms {
            if w <= 1e-15 {
                continue;
            }
            match support.iter().position(|y| sq_dist(&x, y).sqrt() <= tol) {
                Some(i) => weights[i] += w,
                None => {
                    support.push(x);
                    weights.push(w);
                }
            }
        }
        let total = stats::compensated_sum(&weights);
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self::new(support, weights)?.sorted())
    }
}

impl Canonical for DiscreteMeasure {
    fn canonical_coords(&self) -> Vec<f64> {
        let s = self.sorted();
        s.support.iter().flatten().copied().chain(s.weights.iter().copied()).collect()
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A coupling stored as a `|supp mu| x |supp nu|` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub matrix: DMatrix<f64>,
}

impl TransportPlan {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Largest deviation of the row and column sums from the marginals.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let rows = (0..self.matrix.nrows()).map(|i| (self.matrix.row(i).sum() - mu.weights[i]).abs());
        let cols = (0..self.matrix.ncols()).map(|j| (self.matrix.column(j).sum() - nu.weights[j]).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// `sum_ij pi_ij |x_i - y_j|^2`.
    pub fn cost(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut total = 0.0;
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                total += self.matrix[(i, j)] * sq_dist(&mu.support[i], &nu.support[j]);
            }
        }
        total
    }
}

fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::InvalidInput(format!(
            "measures live in R^{} and R^{}",
            mu.dim(),
            nu.dim()
        )));
    }
    let total = mu.len() + nu.len();
    if total > MAX_TRANSPORT_SUPPORT {
        return Err(Error::TooLarge(format!(
            "combined support {total} exceeds {MAX_TRANSPORT_SUPPORT}"
        )));
    }
    Ok(())
}

/// Squared 2-Wasserstein distance with an optimal plan, by the simplex
/// method on the transportation polytope.
pub fn w2_squared(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(f64, TransportPlan)> {
    check_pair(mu, nu)?;
    let (p, q) = (mu.len(), nu.len());
    let mut a = vec![vec![0.0; p * q]; p + q];
    for i in 0..p {
        for j in 0..q {
            a[i][i * q + j] = 1.0;
            a[p + j][i * q + j] = 1.0;
        }
    }
    let b: Vec<f64> = mu.weights.iter().chain(&nu.weights).copied().collect();
    let mut c = Vec::with_capacity(p * q);
    for x in &mu.support {
        for y in &nu.support {
            c.push(sq_dist(x, y));
        }
    }
    let sol = LinearProgram { a, b, c }.solve()?;
    let plan = TransportPlan { matrix: DMatrix::from_row_slice(p, q, &sol.x) };
    Ok((plan.cost(mu, nu).max(0.0), plan))
}

/// 2-Wasserstein distance with an optimal plan.
pub fn w2_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(f64, TransportPlan)> {
    let (sq, plan) = w2_squared(mu, nu)?;
    Ok((sq.sqrt(), plan))
}
