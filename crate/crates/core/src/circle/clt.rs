use std::f64::consts::TAU;

use super::density::log_modulus_derivative;
use super::CirclePoint;
use crate::error::{Error, Result};

/// Asymptotic variance `sigma2 / (1 - 2 pi f)^2` of `sqrt(n)` times the
/// intrinsic sample mean when the density at the antipode is `f < 1/(2 pi)`.
pub fn clt_variance_part_i(sigma2: f64, f_antipode: f64) -> Result<f64> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma2 must be finite and nonnegative, got {sigma2}")));
    }
    if !(f_antipode >= 0.0) {
        return Err(Error::InvalidInput(format!("antipodal density must be nonnegative, got {f_antipode}")));
    }
    let gap = 1.0 - TAU * f_antipode;
    if gap <= 0.0 {
        return Err(Error::OutOfRegime(format!(
            "antipodal density {f_antipode} is not below 1/(2 pi); the limit variance diverges"
        )));
    }
    Ok(sigma2 / (gap * gap))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ModulusForm {
    Power { r: f64 },
    Log { r: f64 },
}

/// The function `G` on `[0, delta)` that describes how the density flattens
/// towards `1/(2 pi)` near the antipode of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmearyModulus {
    form: ModulusForm,
    delta: f64,
}

impl SmearyModulus {
    /// `G(e) = e^{r+1} / (2 pi (r+1))` on `[0, 1)`.
    pub fn power(r: f64) -> Result<Self> {
        check_order(r)?;
        Ok(Self { form: ModulusForm::Power { r }, delta: 1.0 })
    }

    /// `G(e) = exp(-1/e^r) / (2 pi)` on `[0, 1/2)`.
    pub fn log(r: f64) -> Result<Self> {
        check_order(r)?;
        Ok(Self { form: ModulusForm::Log { r }, delta: 0.5 })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn g(&self, eps: f64) -> f64 {
        match self.form {
            ModulusForm::Power { r } => eps.powf(r + 1.0) / (TAU * (r + 1.0)),
            ModulusForm::Log { r } => {
                if eps <= 0.0 {
                    0.0
                } else {
                    (-eps.powf(-r)).exp() / TAU
                }
            }
        }
    }

    pub fn g_prime(&self, eps: f64) -> f64 {
        match self.form {
            ModulusForm::Power { r } => eps.powf(r) / TAU,
            ModulusForm::Log { r } => log_modulus_derivative(r, eps) / TAU,
        }
    }

    /// Checks `G(0) = G'(0) = 0`, nonnegativity and strict convexity through
    /// increasing `G'` on a grid of `[0, delta)`. The log modulus is only
    /// convex near 0, so the grid stops at `min(delta, (r/(r+1))^{1/r})`
    /// where its second derivative vanishes.
    pub fn check(&self) -> Result<()> {
        if self.g(0.0) != 0.0 || self.g_prime(0.0) != 0.0 {
            return Err(Error::InvalidInput("modulus must vanish to first order at 0".into()));
        }
        let end = match self.form {
            ModulusForm::Power { .. } => self.delta,
            ModulusForm::Log { r } => self.delta.min((r / (r + 1.0)).powf(1.0 / r)),
        };
        let steps = 1000;
        let mut prev = 0.0;
        let mut increasing = false;
        for i in 1..steps {
            let e = end * i as f64 / steps as f64;
            if self.g(e) < 0.0 {
                return Err(Error::InvalidInput(format!("modulus is negative at {e}")));
            }
            let d = self.g_prime(e);
            if d < prev {
                return Err(Error::InvalidInput(format!("modulus is not convex at {e}")));
            }
            increasing |= d > prev;
            prev = d;
        }
        if !increasing {
            return Err(Error::InvalidInput("modulus is not strictly convex".into()));
        }
        Ok(())
    }
}

fn check_order(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("order r must be positive, got {r}")))
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `sqrt(n) sign(m) 2 pi G(|m|)` for a sample mean `m` near 0.
pub fn rescaled_statistic_part_ii(mean_estimate: CirclePoint, g: &SmearyModulus, n: usize) -> Result<f64> {
    let m = mean_estimate.angle();
    if m.abs() >= g.delta() {
        return Err(Error::OutOfDomain { value: m, delta: g.delta() });
    }
    Ok((n as f64).sqrt() * sign(m) * TAU * g.g(m.abs()))
}

fn log_root_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("sample size must be at least 2, got {n}")));
    }
    Ok((n as f64).sqrt().ln())
}

/// `(log sqrt(n))^{1/r} m`, which concentrates near `{-1, +1}` for the
/// log-smeary density of order `r`.
pub fn log_smeary_scaled_mean(mean_estimate: CirclePoint, r: f64, n: usize) -> Result<f64> {
    check_order(r)?;
    Ok(log_root_n(n)?.powf(1.0 / r) * mean_estimate.angle())
}

/// `r (log sqrt(n))^{(1+r)/r} (m - sign(m) / (log sqrt(n))^{1/r})`.
pub fn log_smeary_centered_statistic(mean_estimate: CirclePoint, r: f64, n: usize) -> Result<f64> {
    check_order(r)?;
    let l = log_root_n(n)?;
    let m = mean_estimate.angle();
    Ok(r * l.powf((1.0 + r) / r) * (m - sign(m) / l.powf(1.0 / r)))
}
