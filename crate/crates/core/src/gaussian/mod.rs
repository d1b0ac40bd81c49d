//! Gaussian mean estimation with two samples: `W = t Z_1 + (1 - t) Z_2`
//! with `Z_i ~ N(beta, sigma^2)` i.i.d. and the truncated squared loss
//! `min((w - z)^2, c^2)`.
//!
//! Points in the plane are always ordered `(w, z)`.

mod example;
mod mc;
mod quadrature;

pub use example::{
    average_joint, correlations, joint_of, product_of_marginals, true_gen_error, truncated_square_loss,
    ExampleConfig, ExampleQuantities, GenEstimate, GenMethod, Sample,
};
pub use mc::{true_gen_mc, McSpec};
pub use quadrature::{
    calibrate, integrate, integrate_refined, js_2d, kl_2d, mixture_entropy, tv_2d, Density2,
    QuadValue, QuadratureSpec, Scheme,
};

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

/// Bivariate normal law on `(w, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateGaussian {
    mean: [f64; 2],
    cov: [[f64; 2]; 2],
    det: f64,
}

impl BivariateGaussian {
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        if mean.iter().chain(cov.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::NonPositiveDefinite("non-finite parameters".into()));
        }
        if (cov[0][1] - cov[1][0]).abs() > 1e-12 * cov[0][1].abs().max(1.0) {
            return Err(Error::NonPositiveDefinite("covariance is not symmetric".into()));
        }
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if cov[0][0] <= 0.0 || det <= 0.0 {
            return Err(Error::NonPositiveDefinite(format!("det = {det}")));
        }
        Ok(BivariateGaussian { mean, cov, det })
    }

    /// Independent coordinates with the given means and variances.
    pub fn independent(mean: [f64; 2], var_w: f64, var_z: f64) -> Result<Self> {
        BivariateGaussian::new(mean, [[var_w, 0.0], [0.0, var_z]])
    }

    pub fn mean(&self) -> [f64; 2] {
        self.mean
    }

    pub fn cov(&self) -> [[f64; 2]; 2] {
        self.cov
    }

    pub fn correlation(&self) -> f64 {
        self.cov[0][1] / (self.cov[0][0] * self.cov[1][1]).sqrt()
    }

    pub fn ln_pdf(&self, w: f64, z: f64) -> f64 {
        let (dw, dz) = (w - self.mean[0], z - self.mean[1]);
        let q = (self.cov[1][1] * dw * dw - 2.0 * self.cov[0][1] * dw * dz + self.cov[0][0] * dz * dz) / self.det;
        -0.5 * q - (2.0 * PI).ln() - 0.5 * self.det.ln()
    }

    pub fn pdf(&self, w: f64, z: f64) -> f64 {
        self.ln_pdf(w, z).exp()
    }

    /// Marginal law of `z` as `(mean, std)`.
    pub fn z_marginal(&self) -> (f64, f64) {
        (self.mean[1], self.cov[1][1].sqrt())
    }

    /// Marginal law of `w` as `(mean, std)`.
    pub fn w_marginal(&self) -> (f64, f64) {
        (self.mean[0], self.cov[0][0].sqrt())
    }

    /// Conditional law of `w` given `z`, as `(mean, std)`.
    pub fn w_given_z(&self, z: f64) -> (f64, f64) {
        let slope = self.cov[0][1] / self.cov[1][1];
        let var = self.det / self.cov[1][1];
        (self.mean[0] + slope * (z - self.mean[1]), var.sqrt())
    }

    /// Differential entropy `1/2 ln((2 pi e)^2 det)` in nats.
    pub fn entropy(&self) -> f64 {
        0.5 * ((2.0 * PI * E).powi(2) * self.det).ln()
    }
}

/// Differential entropy of a one-dimensional normal law with the given variance.
pub fn entropy_1d(variance: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::NonPositiveDefinite(format!("variance {variance}")));
    }
    Ok(0.5 * (2.0 * PI * E * variance).ln())
}

/// Finite mixture of bivariate normals.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture2 {
    weights: Vec<f64>,
    components: Vec<BivariateGaussian>,
}

impl GaussianMixture2 {
    pub fn new(weights: Vec<f64>, components: Vec<BivariateGaussian>) -> Result<Self> {
        if weights.len() != components.len() || weights.is_empty() {
            return Err(Error::InvalidConfig("mixture needs one weight per component".into()));
        }
        let weights = crate::measures::dist::normalize(weights, "weights")?;
        Ok(GaussianMixture2 { weights, components })
    }

    pub fn single(g: BivariateGaussian) -> Self {
        GaussianMixture2 { weights: vec![1.0], components: vec![g] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[BivariateGaussian] {
        &self.components
    }

    pub fn ln_pdf(&self, w: f64, z: f64) -> f64 {
        log_sum_exp(
            self.weights
                .iter()
                .zip(&self.components)
                .filter(|(&wt, _)| wt > 0.0)
                .map(|(wt, g)| wt.ln() + g.ln_pdf(w, z)),
        )
    }
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Mutual information `-1/2 ln(1 - rho^2)` of a bivariate normal with correlation `rho`.
pub fn gaussian_mi(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::DegenerateCorrelation(rho));
    }
    Ok(-0.5 * (1.0 - rho * rho).ln())
}

/// Lautum information `D(product || joint)` of a bivariate normal with
/// correlation `rho`: `rho^2 / (1 - rho^2) + 1/2 ln(1 - rho^2)`.
pub fn gaussian_lautum(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::DegenerateCorrelation(rho));
    }
    let r2 = rho * rho;
    Ok(r2 / (1.0 - r2) + 0.5 * (1.0 - r2).ln())
}

/// Standard normal CDF.
pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}
