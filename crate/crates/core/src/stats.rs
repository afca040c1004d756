//! Small descriptive-statistics helpers shared by the harnesses.

use nalgebra::{DMatrix, DVector};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Ordinary least squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_stderr: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let slope_stderr = if x.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LinearFit {
        slope,
        intercept,
        slope_stderr,
    }
}

/// Sample covariance matrix of row vectors (divisor `n - 1`), centered at
/// `center` when given and at the sample mean otherwise.
pub fn covariance(vectors: &[DVector<f64>], center: Option<&DVector<f64>>) -> DMatrix<f64> {
    let d = vectors[0].len();
    let n = vectors.len();
    let c = match center {
        Some(c) => c.clone(),
        None => vectors.iter().fold(DVector::zeros(d), |acc, v| acc + v) / n as f64,
    };
    let mut cov = DMatrix::zeros(d, d);
    for v in vectors {
        let r = v - &c;
        cov += &r * r.transpose();
    }
    let denom = if center.is_some() { n as f64 } else { (n - 1) as f64 };
    cov / denom
}

/// `‖a - b‖_F / ‖b‖_F`.
pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
