//! Depth-based median spike train.
//!
//! The median maximizes the depth over the whole train space, not just the
//! sample: pick the cardinality `k*` with the largest count weight, then place
//! the `k*` spikes at `Λ^{-1}(i Λ(T2) / (k* + 1))`, the unique configuration
//! with equal rescaled spacings.

use crate::depth::{depth_from_cumulative, CardinalityModel, DepthConfig, DepthScore};
use crate::error::{Error, Result};
use crate::intensity::{cumulative, IntensityModel};
use crate::model::{SpikeTrain, TrainSample};

/// The estimated median and its achieved depth.
#[derive(Debug, Clone)]
pub struct MedianResult {
    pub median: SpikeTrain,
    pub cardinality: usize,
    pub score: DepthScore,
}

/// Reduce a model to the history-free form the median is defined against.
/// Markov-interval models drop to their marginal profile; a self-exciting
/// model has no single inverse across trains and is rejected.
fn history_free(model: &IntensityModel) -> Result<IntensityModel> {
    match model {
        IntensityModel::Constant(_) | IntensityModel::Curve(_) => Ok(model.clone()),
        IntensityModel::Imi(m) => Ok(IntensityModel::Curve(m.marginal().clone())),
        IntensityModel::Hawkes(_) => Err(Error::InvalidParameter(
            "median estimation needs a history-free model; fit a Markov-interval \
             model and use its marginal instead"
                .into(),
        )),
    }
}

/// Pick the count with maximal weight; ties go to the count nearest the
/// sample mean, then to the smaller count.
fn modal_cardinality(cm: &CardinalityModel, mean_count: f64) -> usize {
    let mut best: Option<usize> = None;
    for k in cm.deepest_cardinalities() {
        best = Some(match best {
            None => k,
            Some(b) => {
                let (db, dk) = ((b as f64 - mean_count).abs(), (k as f64 - mean_count).abs());
                if dk < db || (dk == db && k < b) {
                    k
                } else {
                    b
                }
            }
        });
    }
    best.unwrap_or(0)
}

/// Estimate the median of a sample under a fitted (or known) intensity model.
pub fn estimate_median(
    sample: &TrainSample,
    model: &IntensityModel,
    cm: &CardinalityModel,
    cfg: &DepthConfig,
) -> Result<MedianResult> {
    let reduced = history_free(model)?;
    sample.domain().ensure_same(reduced.domain())?;
    let ci = cumulative(&reduced, None)?;
    let total = ci.total();
    if !(total > 0.0) {
        return Err(Error::Numerical(
            "cumulative intensity vanishes; the median is undefined".into(),
        ));
    }
    let k_star = modal_cardinality(cm, sample.mean_cardinality());
    let median = if k_star == 0 {
        SpikeTrain::empty(*sample.domain())
    } else {
        let mut times = Vec::with_capacity(k_star);
        for i in 1..=k_star {
            times.push(ci.invert(i as f64 * total / (k_star + 1) as f64)?);
        }
        SpikeTrain::new(times, *sample.domain())?
    };
    let score = depth_from_cumulative(&median, &ci, cm, cfg);
    Ok(MedianResult {
        median,
        cardinality: k_star,
        score,
    })
}
