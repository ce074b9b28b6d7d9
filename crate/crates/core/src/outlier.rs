//! Depth-threshold outlier detection.
//!
//! A train with `k` spikes is flagged when its depth falls below `t_k`, the
//! depth value whose non-exceedance probability under the fitted model is the
//! chosen `δ`. For a Poisson-type model the rescaled event times of a
//! `k`-spike train are `k` ordered uniforms on `[0, Λ(T2)]`, so the spacing
//! product `G = Π (U_i - U_{i-1})` determines the conditional depth; `t_k`
//! follows from the `δ`-quantile `C_k` of `G` as
//!
//! `t_k = w(k)^r / (1 - log(C_k ((k+1)/Λ(T2))^{k+1}))`.
//!
//! `C_k` has no closed form for `k >= 2` and is estimated by Monte Carlo. For
//! history-dependent models `Λ(T2)` varies per observation, so quantiles are
//! cached per `(k, Λ(T2) rounded to 3 significant digits)`.

use crate::depth::{depth_from_cumulative, CardinalityModel, DepthConfig};
use crate::error::{Error, Result};
use crate::intensity::{cumulative, IntensityModel};
use crate::model::TrainSample;
use crate::simulate::{stream_tag, substream, RngSeed};
use dashmap::DashMap;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Label value marking ground-truth outliers in a labeled sample.
pub const OUTLIER_LABEL: &str = "outlier";

/// Default Monte Carlo draws per `(k, Λ(T2))` pair.
pub const DEFAULT_MC_DRAWS: usize = 100_000;

/// Per-cardinality thresholds for one value of `Λ(T2)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub delta: f64,
    /// `Λ(T2)` the quantiles were computed for.
    pub total_mass: f64,
    pub entries: Vec<ThresholdEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub cardinality: usize,
    /// Monte Carlo `δ`-quantile of the spacing product.
    pub c_k: f64,
    pub t_k: f64,
}

/// One scored train.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutlierRow {
    pub index: usize,
    pub cardinality: usize,
    pub depth: f64,
    pub threshold: f64,
    pub flagged: bool,
}

/// Precision/recall summary against ground-truth labels.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Per-train decisions plus summary counts and optional metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutlierReport {
    pub delta: f64,
    pub rows: Vec<OutlierRow>,
    pub flagged: usize,
    /// Present when the sample carries any ground-truth labels.
    pub metrics: Option<DetectionMetrics>,
}

impl OutlierReport {
    pub fn flagged_indices(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.flagged)
            .map(|r| r.index)
            .collect()
    }
}

/// Round to 3 significant digits (cache keying of `Λ(T2)`).
fn round_to_3_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor();
    let scale = 10f64.powf(2.0 - magnitude);
    (x * scale).round() / scale
}

/// Mix a cardinality and a rounded-total bit pattern into a substream index.
fn mc_stream_index(k: usize, total_bits: u64) -> u64 {
    let mut h = (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    h ^= total_bits.rotate_left(17);
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^ (h >> 29)
}

/// Draws of `log G` for `k` ordered uniforms on `[0, total]`: spacings of
/// ordered uniforms are normalized exponentials, so no sorting is needed.
fn log_spacing_product_draws(
    k: usize,
    total: f64,
    n_mc: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let m = k + 1;
    let log_total = total.ln();
    let mut draws = Vec::with_capacity(n_mc);
    for _ in 0..n_mc {
        let mut log_sum = 0.0_f64;
        let mut sum = 0.0_f64;
        for _ in 0..m {
            let u: f64 = rng.random();
            let e = (-(1.0 - u).ln()).max(1e-300);
            sum += e;
            log_sum += e.ln();
        }
        draws.push(m as f64 * (log_total - sum.ln()) + log_sum);
    }
    draws
}

fn empirical_quantile_in_place(draws: &mut [f64], delta: f64) -> f64 {
    let n = draws.len();
    let idx = ((delta * n as f64).ceil() as usize).clamp(1, n) - 1;
    let (_, q, _) = draws.select_nth_unstable_by(idx, |a, b| a.partial_cmp(b).unwrap());
    *q
}

/// `log C_k`: the `δ`-quantile of `log G`.
fn mc_log_spacing_quantile(
    k: usize,
    total: f64,
    delta: f64,
    n_mc: usize,
    seed: RngSeed,
) -> f64 {
    let total_bits = round_to_3_significant(total).to_bits();
    let mut rng = substream(seed, stream_tag::THRESHOLD_MC, mc_stream_index(k, total_bits));
    let mut draws = log_spacing_product_draws(k, total, n_mc, &mut rng);
    empirical_quantile_in_place(&mut draws, delta)
}

/// Monte Carlo `δ`-quantile `C_k` of the spacing product of `k` ordered
/// uniforms on `[0, total]`. For `k = 0` the product is the degenerate
/// constant `total`.
pub fn mc_spacing_product_quantile(
    k: usize,
    total: f64,
    delta: f64,
    n_mc: usize,
    seed: RngSeed,
) -> Result<f64> {
    if !(total > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "total mass must be positive, got {total}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if n_mc == 0 {
        return Err(Error::InvalidParameter("n_mc must be at least 1".into()));
    }
    if k == 0 {
        return Ok(total);
    }
    Ok(mc_log_spacing_quantile(k, total, delta, n_mc, seed).exp())
}

fn conditional_threshold_from_log(k: usize, log_ck: f64, total: f64) -> f64 {
    let m = (k + 1) as f64;
    let log_arg = log_ck + m * (m.ln() - total.ln());
    // The quantile cannot exceed the AM-GM maximum; clamp float noise.
    1.0 / (1.0 - log_arg.min(0.0))
}

/// Depth threshold `t_k` from a spacing-product quantile.
pub fn threshold_tk(
    k: usize,
    cm: &CardinalityModel,
    cfg: &DepthConfig,
    c_k: f64,
    total: f64,
) -> f64 {
    let w = cm.weight(k).powf(cfg.r);
    w * conditional_threshold_from_log(k, c_k.ln(), total)
}

/// Thresholds for every cardinality up to `k_max` at one `Λ(T2)`.
pub fn build_threshold_table(
    k_max: usize,
    cm: &CardinalityModel,
    cfg: &DepthConfig,
    delta: f64,
    total: f64,
    n_mc: usize,
    seed: RngSeed,
) -> Result<ThresholdTable> {
    let entries: Result<Vec<ThresholdEntry>> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let c_k = mc_spacing_product_quantile(k, total, delta, n_mc, seed)?;
            Ok(ThresholdEntry {
                cardinality: k,
                c_k,
                t_k: threshold_tk(k, cm, cfg, c_k, total),
            })
        })
        .collect();
    Ok(ThresholdTable {
        delta,
        total_mass: total,
        entries: entries?,
    })
}

/// Score every train and flag those below their cardinality's threshold.
///
/// The quantile Monte Carlo is cached per `(k, rounded Λ(T2))` with
/// compute-once semantics; results are deterministic in `seed` regardless of
/// thread scheduling because every cache value derives its own substream from
/// its key.
pub fn detect_outliers(
    sample: &TrainSample,
    model: &IntensityModel,
    cm: &CardinalityModel,
    cfg: &DepthConfig,
    delta: f64,
    n_mc: usize,
    seed: RngSeed,
) -> Result<OutlierReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if n_mc == 0 {
        return Err(Error::InvalidParameter("n_mc must be at least 1".into()));
    }
    let shared_ci = if model.is_history_dependent() {
        None
    } else {
        Some(cumulative(model, None)?)
    };
    let cache: DashMap<(usize, u64), f64> = DashMap::new();

    let rows: Result<Vec<OutlierRow>> = sample
        .trains()
        .par_iter()
        .enumerate()
        .map(|(index, train)| {
            let score;
            let total;
            match &shared_ci {
                Some(ci) => {
                    score = depth_from_cumulative(train, ci, cm, cfg);
                    total = ci.total();
                }
                None => {
                    let ci = cumulative(model, Some(train))?;
                    score = depth_from_cumulative(train, &ci, cm, cfg);
                    total = ci.total();
                }
            }
            let k = train.cardinality();
            let rounded = round_to_3_significant(total);
            let key = (k, rounded.to_bits());
            // The value is a pure function of the key and seed, so a racing
            // double-compute is harmless; computing outside the map avoids
            // holding a shard lock through the Monte Carlo.
            let cond_threshold = match cache.get(&key) {
                Some(v) => *v,
                None => {
                    let v = if k == 0 {
                        // C_0 = Λ(T2): the log term vanishes and t_0 = w(0)^r.
                        1.0
                    } else {
                        let log_ck = mc_log_spacing_quantile(k, rounded, delta, n_mc, seed);
                        conditional_threshold_from_log(k, log_ck, rounded)
                    };
                    cache.insert(key, v);
                    v
                }
            };
            let threshold = cm.weight(k).powf(cfg.r) * cond_threshold;
            Ok(OutlierRow {
                index,
                cardinality: k,
                depth: score.total,
                threshold,
                flagged: score.total < threshold,
            })
        })
        .collect();
    let rows = rows?;
    let flagged = rows.iter().filter(|r| r.flagged).count();

    let has_labels = sample.labels().iter().any(Option::is_some);
    let metrics = if has_labels {
        let mut tp = 0;
        let mut fp = 0;
        let mut fn_ = 0;
        for row in &rows {
            let truth = sample.labels()[row.index]
                .as_deref()
                .map(|l| l == OUTLIER_LABEL)
                .unwrap_or(false);
            match (row.flagged, truth) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Some(DetectionMetrics {
            precision,
            recall,
            f1,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
        })
    } else {
        None
    };

    Ok(OutlierReport {
        delta,
        rows,
        flagged,
        metrics,
    })
}
