//! Bayesian ridge regression with a Gaussian prior.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use crate::error::{contract, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPosterior {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// Factorized posterior from sufficient statistics: precision
/// `P = G / sigma^2 + lambda I` and mean `P^-1 (b / sigma^2 + lambda m0)`.
#[derive(Debug, Clone)]
pub struct FactoredPosterior {
    pub mean: DVector<f64>,
    pub precision_chol: Cholesky<f64, Dyn>,
}

impl FactoredPosterior {
    pub fn from_stats(gram: &DMatrix<f64>, xty: &DVector<f64>, lambda: f64, sigma: f64, prior_mean: &DVector<f64>) -> Result<Self> {
        let d = gram.nrows();
        if gram.ncols() != d || xty.len() != d || prior_mean.len() != d {
            return Err(contract(format!(
                "posterior dimensions disagree: gram {}x{}, rhs {}, prior {}",
                gram.nrows(),
                gram.ncols(),
                xty.len(),
                prior_mean.len()
            )));
        }
        if !(lambda > 0.0 && sigma > 0.0) {
            return Err(contract(format!("lambda and sigma must be positive, got {lambda}, {sigma}")));
        }
        let s2 = sigma * sigma;
        let mut p = gram / s2;
        for i in 0..d {
            p[(i, i)] += lambda;
        }
        let chol = Cholesky::new(p).ok_or_else(|| contract("posterior precision is not positive definite"))?;
        // Solved as a deviation from the prior so that no data returns the prior exactly.
        let rhs = (xty - gram * prior_mean) / s2;
        let mean = chol.solve(&rhs) + prior_mean;
        Ok(FactoredPosterior { mean, precision_chol: chol })
    }

    /// `L^-T z`, a draw from `Normal(0, Sigma)` when `z` is standard normal.
    pub fn scale_noise(&self, z: &DVector<f64>) -> DVector<f64> {
        let l = self.precision_chol.l_dirty();
        l.tr_solve_lower_triangular(z).expect("Cholesky factor has a positive diagonal")
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let c = self.precision_chol.inverse();
        (&c + c.transpose()) * 0.5
    }

    pub fn into_gaussian(self) -> GaussianPosterior {
        let covariance = self.covariance();
        GaussianPosterior { mean: self.mean, covariance }
    }
}

/// Posterior of `theta` under `y = X theta + Normal(0, sigma^2)` and prior
/// `theta ~ Normal(prior_mean, I / lambda)`.
pub fn ridge_posterior(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, sigma: f64, prior_mean: &DVector<f64>) -> Result<GaussianPosterior> {
    if x.nrows() != y.len() {
        return Err(contract(format!("X has {} rows but y has {} entries", x.nrows(), y.len())));
    }
    if x.ncols() != prior_mean.len() {
        return Err(contract(format!("X has {} columns but the prior has {}", x.ncols(), prior_mean.len())));
    }
    let gram = x.tr_mul(x);
    let xty = x.tr_mul(y);
    Ok(FactoredPosterior::from_stats(&gram, &xty, lambda, sigma, prior_mean)?.into_gaussian())
}
