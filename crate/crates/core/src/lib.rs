//! Depth-based statistics for temporal point processes.
//!
//! The crate ranks spike trains center-outward by a statistical depth, and
//! builds three inference tools on that rank: a median train (the depth
//! maximizer over the whole train space), a quantile-calibrated outlier
//! detector, and a depth-versus-depth classifier with a strictly increasing
//! boundary. Supporting machinery covers intensity models and their
//! cumulative integrals, time rescaling, kernel and Markov-interval intensity
//! estimation, process samplers with reproducible substreams, and the
//! penalized elastic distance used by the median-distance baseline.

pub mod ddclass;
pub mod depth;
pub mod error;
pub mod estimate;
pub mod intensity;
pub mod median;
pub mod metric;
pub mod model;
pub mod multivariate;
pub mod outlier;
pub mod simulate;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use model::{SpikeTrain, TimeDomain, TrainSample};

pub use depth::{
    cardinality_depth, cardinality_weight, conditional_depth_ilr, conditional_depth_simplified,
    depth, depth_from_cumulative, CardinalityModel, DepthConfig, DepthScore, DepthVariant,
};
pub use estimate::{
    estimate_intensity_imi, estimate_intensity_kernel, estimate_intensity_kernel_scaled,
};
pub use intensity::{
    cumulative, ilr_transform, time_rescale, BaselineIntensity, ConstantIntensity,
    CumulativeIntensity, CurveIntensity, HawkesIntensity, ImiIntensity, IntensityModel,
};
pub use median::{estimate_median, MedianResult};
pub use metric::{d_mu, d_mu_with_alignment, Alignment};
pub use outlier::{
    detect_outliers, mc_spacing_product_quantile, threshold_tk, DetectionMetrics, OutlierReport,
    OutlierRow, ThresholdEntry, ThresholdTable,
};
pub use simulate::{sample_hawkes, sample_hpp, sample_imi, sample_ipp, RngSeed};

pub use ddclass::{
    classify_dd, classify_dd_batch, classify_ia, classify_lm, classify_md, classify_md_batch,
    classify_mm2, dd_plot, fit_lm, misclassification_rate, train_boundary, BoundaryFunction,
    DDPoint, Group, GroupModel, LmModel, OptimizerConfig, TrainedBoundary,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity::cumulative;
    use crate::testutil::ks_statistic_exp1;

    /// Time rescaling maps any generator to a unit-rate process: pool the
    /// rescaled trains end to end and the concatenated gaps are unit
    /// exponentials. 1% critical value for the KS statistic.
    #[test]
    fn time_rescaling_yields_unit_exponential_gaps() {
        let domain = TimeDomain::unit();
        let curve = CurveIntensity::from_fn(domain, |t| {
            10.0 * (4.0 * std::f64::consts::PI * (t - 0.125)).sin() + 10.0
        })
        .unwrap();
        let model = IntensityModel::Curve(curve.clone());
        let sample = sample_ipp(&curve, 500, 555).unwrap();
        let ci = cumulative(&model, None).unwrap();
        let mut gaps = Vec::new();
        let mut offset = 0.0;
        let mut prev = 0.0;
        for train in sample.trains() {
            let rescaled = time_rescale(train, &ci).unwrap();
            for &t in rescaled.times() {
                gaps.push(offset + t - prev);
                prev = offset + t;
            }
            offset += rescaled.domain().end();
        }
        let d = ks_statistic_exp1(&gaps);
        let critical = 1.628 / (gaps.len() as f64).sqrt();
        assert!(d < critical, "KS statistic {d} >= critical {critical}");
    }
}
