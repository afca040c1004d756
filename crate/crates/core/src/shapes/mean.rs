use nalgebra::DMatrix;

use super::clt::EigenStructure;
use super::{align, PreShape};
use crate::error::{Error, Result};
use crate::frechet::{Degeneracy, EmpiricalMeasure, MeanSet};

/// Gaps at or below this value make the leading eigenspace non-simple.
const EIGENGAP_TOLERANCE: f64 = 1e-9;

/// Mean for the residual distance: the leading eigenvector of the second
/// moment of the vectorized configurations. A non-simple leading eigenvalue
/// yields a degenerate mean set that records the eigengap.
pub fn residual_mean(mu: &EmpiricalMeasure<PreShape>) -> Result<MeanSet<PreShape>> {
    let first = &mu.atoms()[0];
    let e = EigenStructure::from_measure(mu)?;
    let value = (1.0 - e.lambdas[0]).max(0.0);
    let gap = e.gap();
    if e.lambdas.len() > 1 && gap <= EIGENGAP_TOLERANCE {
        return Ok(MeanSet {
            minimizers: Vec::new(),
            frechet_value: value,
            // two orthonormal eigenvectors are at residual distance 1
            diameter: 1.0,
            unique: false,
            degeneracy: Some(Degeneracy::Eigengap { gap }),
        });
    }
    let v = e.leading();
    let config = DMatrix::from_column_slice(first.m(), first.k() - 1, v.as_slice());
    let mean = PreShape::from_unit(config / v.norm()).sign_normalized();
    Ok(MeanSet::singleton(mean, value))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcrustesOptions {
    /// Stop when successive means differ by less than this (Frobenius norm
    /// after alignment, which agrees with the Procrustes distance to first
    /// order and stays accurate for tiny steps).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ProcrustesOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 1000 }
    }
}

/// Result of generalized Procrustes analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcrustesFit {
    pub mean: MeanSet<PreShape>,
    /// Every atom in optimal position to the mean.
    pub aligned: Vec<PreShape>,
    pub iterations: usize,
}

/// Procrustes mean by alternating alignment to the current mean and a
/// residual-mean update, starting from the first atom.
pub fn procrustes_mean(mu: &EmpiricalMeasure<PreShape>, opts: ProcrustesOptions) -> Result<ProcrustesFit> {
    let mut mean = mu.atoms()[0].sign_normalized();
    let mut change = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let aligned = mu.atoms().iter().map(|x| align(&mean, x)).collect::<Result<Vec<_>>>()?;
        let step = residual_mean(&EmpiricalMeasure::weighted(aligned, mu.weights().to_vec())?)?;
        let next = match step.degeneracy {
            Some(Degeneracy::Eigengap { gap }) => return Err(Error::DegenerateEigengap(gap)),
            _ => step.minimizers[0].clone(),
        };
        change = (align(&mean, &next)?.config() - mean.config()).norm();
        mean = next;
        if change < opts.tol {
            let aligned = mu.atoms().iter().map(|x| align(&mean, x)).collect::<Result<Vec<_>>>()?;
            let value = aligned
                .iter()
                .zip(mu.weights())
                .map(|(x, w)| {
                    let t = x.config().dot(mean.config());
                    w * (1.0 - t * t).max(0.0)
                })
                .sum();
            return Ok(ProcrustesFit {
                mean: MeanSet::singleton(mean, value),
                aligned,
                iterations: iter,
            });
        }
    }
    Err(Error::MaxIterations {
        iterations: opts.max_iter,
        residual: change,
        last: mean.config().as_slice().to_vec(),
    })
}
