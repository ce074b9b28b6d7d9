//! Mahalanobis depth for bivariate data.
//!
//! The boundary classifier operates on depth pairs regardless of where they
//! come from; this module supplies the depth and a Gaussian sampler for the
//! two-group illustration on multivariate data.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Mean and covariance of a bivariate Gaussian.
#[derive(Debug, Clone, Copy)]
pub struct GaussianSpec {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

/// Draw `n` points via the Cholesky factor of the covariance.
pub fn sample_gaussian_2d(spec: &GaussianSpec, n: usize, rng: &mut impl Rng) -> Vec<[f64; 2]> {
    let l11 = spec.cov[0][0].sqrt();
    let l21 = spec.cov[1][0] / l11;
    let l22 = (spec.cov[1][1] - l21 * l21).sqrt();
    (0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            [
                spec.mean[0] + l11 * z1,
                spec.mean[1] + l21 * z1 + l22 * z2,
            ]
        })
        .collect()
}

/// Mahalanobis depth `1 / (1 + (x - μ)' Σ^{-1} (x - μ))` with moments fitted
/// from data.
#[derive(Debug, Clone, Copy)]
pub struct MahalanobisDepth {
    mean: [f64; 2],
    inv: [[f64; 2]; 2],
}

impl MahalanobisDepth {
    pub fn fit(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidParameter(
                "need at least three points to fit a covariance".into(),
            ));
        }
        let n = points.len() as f64;
        let mut mean = [0.0; 2];
        for p in points {
            mean[0] += p[0];
            mean[1] += p[1];
        }
        mean[0] /= n;
        mean[1] /= n;
        let mut c = [[0.0; 2]; 2];
        for p in points {
            let dx = p[0] - mean[0];
            let dy = p[1] - mean[1];
            c[0][0] += dx * dx;
            c[0][1] += dx * dy;
            c[1][0] += dy * dx;
            c[1][1] += dy * dy;
        }
        for row in c.iter_mut() {
            for v in row.iter_mut() {
                *v /= n - 1.0;
            }
        }
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        if det <= 1e-12 {
            return Err(Error::Numerical("degenerate sample covariance".into()));
        }
        let inv = [
            [c[1][1] / det, -c[0][1] / det],
            [-c[1][0] / det, c[0][0] / det],
        ];
        Ok(Self { mean, inv })
    }

    pub fn depth(&self, x: [f64; 2]) -> f64 {
        let dx = x[0] - self.mean[0];
        let dy = x[1] - self.mean[1];
        let q = dx * (self.inv[0][0] * dx + self.inv[0][1] * dy)
            + dy * (self.inv[1][0] * dx + self.inv[1][1] * dy);
        1.0 / (1.0 + q)
    }
}
