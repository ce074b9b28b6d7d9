//! Spike train depth: a cardinality weight times a conditional depth of the
//! rescaled spacing pattern.
//!
//! The total depth of a train `s` with `k` spikes is
//! `D(s) = w(k)^r * D_cond(s | k)` where `w` normalizes the one-dimensional
//! count depth `D1(k) = min(P(K <= k), P(K >= k))` to attain 1 at the modal
//! cardinality, and the conditional part scores how evenly the rescaled
//! spacings `Λ(s_i) - Λ(s_{i-1})` divide `[0, Λ(T2)]`.
//!
//! Two conditional variants are provided. The log-ratio variant is
//!
//! `1 / (1 - log((k+1)^{k+1} / Λ(T2)^{k+1} * Π_i ΔΛ_i))`,
//!
//! which is at most 1 by the AM-GM inequality with equality exactly at equal
//! spacings. The simplified variant replaces the product term with half the
//! squared norm of the centered log spacings,
//! `1 / (1 + 1/2 Σ_i log(ΔΛ_i / g)^2)` with `g` their geometric mean.

use crate::error::{Error, Result};
use crate::intensity::{cumulative, CumulativeIntensity, IntensityModel};
use crate::model::{SpikeTrain, TrainSample};
use serde::{Deserialize, Serialize};

/// Probability mass over spike counts with finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityModel {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
    max_d1: f64,
}

impl CardinalityModel {
    /// Build from an explicit mass function over `k = 0..pmf.len()-1`.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidParameter("empty cardinality support".into()));
        }
        if pmf.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter(
                "cardinality masses must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = pmf.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidParameter("cardinality masses sum to zero".into()));
        }
        let pmf: Vec<f64> = pmf.into_iter().map(|p| p / sum).collect();
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for &p in &pmf {
            acc += p;
            cdf.push(acc);
        }
        let mut model = Self {
            pmf,
            cdf,
            max_d1: 0.0,
        };
        model.max_d1 = (0..model.pmf.len())
            .map(|k| model.d1(k))
            .fold(0.0, f64::max);
        Ok(model)
    }

    /// Empirical frequencies of the observed counts, no smoothing.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptySample);
        }
        let k_max = *counts.iter().max().unwrap();
        let mut pmf = vec![0.0; k_max + 1];
        for &k in counts {
            pmf[k] += 1.0;
        }
        Self::from_pmf(pmf)
    }

    pub fn from_sample(sample: &TrainSample) -> Self {
        let counts: Vec<usize> = sample.trains().iter().map(SpikeTrain::cardinality).collect();
        Self::from_counts(&counts).expect("samples are non-empty by construction")
    }

    /// Analytic Poisson counts, truncated where the tail mass is negligible.
    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Poisson mean must be positive, got {lambda}"
            )));
        }
        let k_max = (lambda + 12.0 * lambda.sqrt() + 30.0).ceil() as usize;
        let mut pmf = Vec::with_capacity(k_max + 1);
        let mut log_fact = 0.0;
        for k in 0..=k_max {
            if k > 0 {
                log_fact += (k as f64).ln();
            }
            let lp = k as f64 * lambda.ln() - lambda - log_fact;
            pmf.push(lp.exp());
        }
        Self::from_pmf(pmf)
    }

    /// Largest count in the support.
    pub fn support_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// One-dimensional count depth `min(P(K <= k), P(K >= k))`.
    pub fn d1(&self, k: usize) -> f64 {
        if k >= self.pmf.len() {
            return 0.0;
        }
        let le = self.cdf[k];
        let ge = if k == 0 { 1.0 } else { 1.0 - self.cdf[k - 1] };
        le.min(ge)
    }

    /// Count depth normalized to 1 at the deepest cardinality.
    pub fn weight(&self, k: usize) -> f64 {
        if self.max_d1 <= 0.0 {
            return 0.0;
        }
        self.d1(k) / self.max_d1
    }

    /// Cardinalities attaining the maximal count depth.
    pub fn deepest_cardinalities(&self) -> Vec<usize> {
        (0..self.pmf.len())
            .filter(|&k| (self.d1(k) - self.max_d1).abs() <= 1e-12 * self.max_d1.max(1e-300))
            .collect()
    }
}

/// Which conditional depth to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthVariant {
    /// Log-ratio depth of the normalized spacing product.
    Ilr,
    /// Laplace-style depth of the centered log spacings.
    Simplified,
}

/// Depth hyper-parameters: the cardinality-weight exponent and the variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthConfig {
    pub r: f64,
    pub variant: DepthVariant,
}

impl DepthConfig {
    pub fn new(r: f64, variant: DepthVariant) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight exponent r must be positive, got {r}"
            )));
        }
        Ok(Self { r, variant })
    }
}

impl Default for DepthConfig {
    fn default() -> Self {
        Self {
            r: 1.0,
            variant: DepthVariant::Ilr,
        }
    }
}

/// A train's depth decomposed into its factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthScore {
    /// `weight^r * conditional`, in `[0, 1]`.
    pub total: f64,
    /// Normalized cardinality weight in `[0, 1]` (before raising to `r`).
    pub weight: f64,
    /// Conditional depth of the spacing pattern.
    pub conditional: f64,
    /// Set when a rescaled spacing collapsed to zero and the depth was
    /// reported as 0.
    pub degenerate: bool,
}

/// `D1(k)` under the count model; zero outside the support.
pub fn cardinality_depth(k: usize, cm: &CardinalityModel) -> f64 {
    cm.d1(k)
}

/// Normalized count weight `w(k) = D1(k) / max_j D1(j)`.
pub fn cardinality_weight(k: usize, cm: &CardinalityModel) -> f64 {
    cm.weight(k)
}

/// Rescaled spacings `Λ(s_i) - Λ(s_{i-1})` including both boundary gaps.
pub fn rescaled_spacings(train: &SpikeTrain, ci: &CumulativeIntensity) -> Vec<f64> {
    let mut spacings = Vec::with_capacity(train.cardinality() + 1);
    let mut prev = 0.0;
    for &t in train.times() {
        let v = ci.eval(t);
        spacings.push(v - prev);
        prev = v;
    }
    spacings.push(ci.total() - prev);
    spacings
}

fn conditional_from_spacings(spacings: &[f64], total: f64, variant: DepthVariant) -> f64 {
    if total <= 0.0 || spacings.iter().any(|&d| d <= 0.0) {
        return 0.0;
    }
    let m = spacings.len() as f64; // k + 1
    match variant {
        DepthVariant::Ilr => {
            let log_arg =
                m * (m.ln() - total.ln()) + spacings.iter().map(|d| d.ln()).sum::<f64>();
            // AM-GM bounds the argument by 1; clamp float noise.
            1.0 / (1.0 - log_arg.min(0.0))
        }
        DepthVariant::Simplified => {
            let logs: Vec<f64> = spacings.iter().map(|d| d.ln()).collect();
            let mean = logs.iter().sum::<f64>() / m;
            let ss: f64 = logs.iter().map(|l| (l - mean) * (l - mean)).sum();
            1.0 / (1.0 + 0.5 * ss)
        }
    }
}

/// Log-ratio conditional depth; 0 when a rescaled spacing is non-positive.
pub fn conditional_depth_ilr(train: &SpikeTrain, ci: &CumulativeIntensity) -> f64 {
    let spacings = rescaled_spacings(train, ci);
    conditional_from_spacings(&spacings, ci.total(), DepthVariant::Ilr)
}

/// Simplified conditional depth; 0 when a rescaled spacing is non-positive.
pub fn conditional_depth_simplified(train: &SpikeTrain, ci: &CumulativeIntensity) -> f64 {
    let spacings = rescaled_spacings(train, ci);
    conditional_from_spacings(&spacings, ci.total(), DepthVariant::Simplified)
}

/// Full depth against a model, building the cumulative intensity for the
/// train's own history when the model requires it.
pub fn depth(
    train: &SpikeTrain,
    model: &IntensityModel,
    cm: &CardinalityModel,
    cfg: &DepthConfig,
) -> Result<DepthScore> {
    let ci = cumulative(model, Some(train))?;
    Ok(depth_from_cumulative(train, &ci, cm, cfg))
}

/// Full depth with a prebuilt cumulative intensity (reused across a sample for
/// history-free models).
pub fn depth_from_cumulative(
    train: &SpikeTrain,
    ci: &CumulativeIntensity,
    cm: &CardinalityModel,
    cfg: &DepthConfig,
) -> DepthScore {
    let weight = cm.weight(train.cardinality());
    let spacings = rescaled_spacings(train, ci);
    let total_mass = ci.total();
    let degenerate = total_mass <= 0.0 || spacings.iter().any(|&d| d <= 0.0);
    let conditional = conditional_from_spacings(&spacings, total_mass, cfg.variant);
    let total = if degenerate {
        0.0
    } else {
        weight.powf(cfg.r) * conditional
    };
    DepthScore {
        total,
        weight,
        conditional,
        degenerate,
    }
}
