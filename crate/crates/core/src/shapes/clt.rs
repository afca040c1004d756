use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::PreShape;
use crate::error::{Error, Result};
use crate::frechet::EmpiricalMeasure;

/// Eigendecomposition of a second-moment matrix with eigenvalues sorted in
/// decreasing order. Column `j` of `vectors` belongs to `lambdas[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenStructure {
    pub lambdas: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenStructure {
    pub fn from_matrix(matrix: &DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidInput("second moment must be a nonempty square matrix".into()));
        }
        if (matrix - matrix.transpose()).norm() > 1e-12 * (1.0 + matrix.norm()) {
            return Err(Error::InvalidInput("second moment must be symmetric".into()));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let lambdas = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
        Ok(Self { lambdas, vectors })
    }

    /// Of `sum_i w_i vec(X_i) vec(X_i)^T`.
    pub fn from_measure(mu: &EmpiricalMeasure<PreShape>) -> Result<Self> {
        let first = &mu.atoms()[0];
        let d = first.config().len();
        let mut m = DMatrix::zeros(d, d);
        for (x, w) in mu.iter() {
            first.same_dims(x)?;
            let v = x.vec();
            m.ger(w, &v, &v, 1.0);
        }
        Self::from_matrix(&m)
    }

    /// `lambda_1 - lambda_2`, or `lambda_1` for a one-dimensional matrix.
    pub fn gap(&self) -> f64 {
        match self.lambdas.as_slice() {
            [a, b, ..] => a - b,
            [a] => *a,
            [] => 0.0,
        }
    }

    pub fn leading(&self) -> DVector<f64> {
        self.vectors.column(0).into_owned()
    }

    /// `sum_j lambda_j v_j v_j^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = self.vectors.nrows();
        let mut m = DMatrix::zeros(d, d);
        for (j, l) in self.lambdas.iter().enumerate() {
            let v = self.vectors.column(j);
            m.ger(*l, &v, &v, 1.0);
        }
        m
    }
}

/// `H^- D H^-` with `D = sum_j lambda_j v_j v_j^T` and
/// `H^- = 1/2 sum_{j >= 2} (lambda_1 - lambda_j)^{-1} v_j v_j^T`.
pub fn clt_cov_procrustes(eigen: &EigenStructure) -> Result<DMatrix<f64>> {
    let gap = eigen.gap();
    if eigen.lambdas.len() < 2 || gap <= 1e-12 {
        return Err(Error::DegenerateEigengap(gap));
    }
    let d = eigen.vectors.nrows();
    let l1 = eigen.lambdas[0];
    let mut h = DMatrix::zeros(d, d);
    for (j, l) in eigen.lambdas.iter().enumerate().skip(1) {
        let v = eigen.vectors.column(j);
        h.ger(0.5 / (l1 - l), &v, &v, 1.0);
    }
    let dm = eigen.reconstruct();
    let out = &h * dm * &h;
    Ok((&out + out.transpose()) * 0.5)
}

/// `(x - tr(x^T xi) xi) / tr(x^T xi)`, a chart of the pre-shape sphere on the
/// hemisphere around `xi`.
pub fn chart(xi: &PreShape, x: &PreShape) -> Result<DMatrix<f64>> {
    xi.same_dims(x)?;
    let t = x.config().dot(xi.config());
    if t <= 0.0 {
        return Err(Error::InvalidInput("chart is only defined on the open hemisphere around its base".into()));
    }
    Ok((x.config() - xi.config() * t) / t)
}
