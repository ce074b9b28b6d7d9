//! Named intensity profiles and samplers used by the simulation studies.

use crate::error::{CliError, CliResult};
use spikedepth_core::{
    sample_hpp, BaselineIntensity, CurveIntensity, HawkesIntensity, SpikeTrain, TimeDomain,
    TrainSample,
};

/// `10 sin(4π(t - 1/8)) + 10`, the inhomogeneous profile of the second
/// median study and the fourth detection study.
pub fn sinusoid_rate(t: f64) -> f64 {
    10.0 * (4.0 * std::f64::consts::PI * (t - 0.125)).sin() + 10.0
}

/// `96 (t - 1/2)^2`, total mass 8, used by the first classification study.
pub fn parabola_rate(t: f64) -> f64 {
    96.0 * (t - 0.5) * (t - 0.5)
}

fn gauss_bump(t: f64, center: f64) -> f64 {
    let z = (t - center) / 0.05;
    100.0 / (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * z * z).exp()
}

/// Two truncated Gaussian bumps at 0.25 and 0.75; the base profile of the
/// self-exciting study.
pub fn bimodal_rate(t: f64) -> f64 {
    if t <= 0.5 {
        gauss_bump(t, 0.25)
    } else {
        gauss_bump(t, 0.75)
    }
}

/// Bumps at 0, 0.5, and 1; the outlier profile of the self-exciting study.
pub fn trimodal_rate(t: f64) -> f64 {
    if t <= 0.25 {
        gauss_bump(t, 0.0)
    } else if t <= 0.75 {
        gauss_bump(t, 0.5)
    } else {
        gauss_bump(t, 1.0)
    }
}

/// Resolve a profile by name onto a domain.
pub fn named_curve(name: &str, domain: TimeDomain) -> CliResult<CurveIntensity> {
    let f: fn(f64) -> f64 = match name {
        "sinusoid" => sinusoid_rate,
        "parabola" => parabola_rate,
        "bimodal" => bimodal_rate,
        "trimodal" => trimodal_rate,
        other => {
            return Err(CliError::Validation(format!(
                "unknown curve '{other}' (expected sinusoid|parabola|bimodal|trimodal)"
            )))
        }
    };
    CurveIntensity::from_fn(domain, f).map_err(Into::into)
}

pub fn curve_scaled(name: &str, scale: f64, domain: TimeDomain) -> CliResult<CurveIntensity> {
    let base = named_curve(name, domain)?;
    let rates: Vec<f64> = base.rates().iter().map(|r| r * scale).collect();
    CurveIntensity::new(domain, base.grid().to_vec(), rates).map_err(Into::into)
}

/// The self-exciting model of the fifth simulation: base `λ(t)/2` with jump
/// 15 and decay 30.
pub fn hawkes_bimodal_model(domain: TimeDomain) -> CliResult<HawkesIntensity> {
    let base = curve_scaled("bimodal", 0.5, domain)?;
    HawkesIntensity::new(BaselineIntensity::Curve(base), 15.0, 30.0).map_err(Into::into)
}

/// Homogeneous bursts confined to `[lo, hi]`, re-homed onto `domain`.
pub fn windowed_hpp(
    rate: f64,
    lo: f64,
    hi: f64,
    domain: TimeDomain,
    n: usize,
    seed: u64,
) -> CliResult<Vec<SpikeTrain>> {
    let window = TimeDomain::new(lo, hi).map_err(CliError::from)?;
    if lo < domain.start() || hi > domain.end() {
        return Err(CliError::Validation(format!(
            "window [{lo}, {hi}] outside domain [{}, {}]",
            domain.start(),
            domain.end()
        )));
    }
    let inner = sample_hpp(rate, window, n, seed)?;
    inner
        .trains()
        .iter()
        .map(|t| SpikeTrain::new(t.times().to_vec(), domain).map_err(CliError::from))
        .collect()
}

/// Append labeled trains to a sample.
pub fn contaminate(
    base: &TrainSample,
    extra: Vec<SpikeTrain>,
    label: &str,
) -> CliResult<TrainSample> {
    let mut trains = base.trains().to_vec();
    let mut labels = base.labels().to_vec();
    for t in extra {
        trains.push(t);
        labels.push(Some(label.to_string()));
    }
    TrainSample::with_labels(trains, labels).map_err(Into::into)
}
