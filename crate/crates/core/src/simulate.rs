//! Samplers for homogeneous, inhomogeneous, and self-exciting processes.
//!
//! Every sampler is pure given `(parameters, seed)`: train `i` draws from its
//! own counter-based substream, so generation parallelizes without changing
//! the output.

use crate::error::{Error, Result};
use crate::intensity::{BaselineIntensity, CurveIntensity, HawkesIntensity, ImiIntensity};
use crate::model::{SpikeTrain, TimeDomain, TrainSample};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

/// Master seed for a sampler or experiment run.
pub type RngSeed = u64;

/// Substream tags keep independent uses of one master seed from colliding.
pub mod stream_tag {
    pub const TRAIN: u64 = 1;
    pub const THRESHOLD_MC: u64 = 2;
    pub const BOUNDARY: u64 = 3;
    pub const CALIBRATION: u64 = 4;
    pub const EXPERIMENT: u64 = 5;
    pub const PROBE: u64 = 6;
}

/// Deterministic substream `index` of a tagged family under `seed`.
pub fn substream(seed: RngSeed, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 48) ^ (index & 0x0000_FFFF_FFFF_FFFF));
    rng
}

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive Poisson mean");
    let draw: f64 = dist.sample(rng);
    draw as usize
}

/// Draw one train, retrying the rare draws that violate the open-interval or
/// strict-ordering invariants.
fn draw_valid<F>(domain: TimeDomain, mut draw: F) -> Result<SpikeTrain>
where
    F: FnMut() -> Vec<f64>,
{
    for _ in 0..100 {
        if let Ok(train) = SpikeTrain::new(draw(), domain) {
            return Ok(train);
        }
    }
    Err(Error::Numerical(
        "sampler failed to produce a valid train in 100 attempts".into(),
    ))
}

/// Homogeneous Poisson sample: counts are Poisson(rate × window length),
/// event times are sorted uniforms.
pub fn sample_hpp(rate: f64, domain: TimeDomain, n: usize, seed: RngSeed) -> Result<TrainSample> {
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rate must be positive, got {rate}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let mean = rate * domain.length();
    let trains: Result<Vec<SpikeTrain>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, stream_tag::TRAIN, i);
            draw_valid(domain, || {
                let count = poisson_count(&mut rng, mean);
                let mut times: Vec<f64> = (0..count)
                    .map(|_| domain.start() + rng.random::<f64>() * domain.length())
                    .collect();
                times.sort_by(|a, b| a.partial_cmp(b).unwrap());
                times
            })
        })
        .collect();
    TrainSample::new(trains?)
}

/// Inhomogeneous Poisson sample by thinning against the grid maximum.
pub fn sample_ipp(curve: &CurveIntensity, n: usize, seed: RngSeed) -> Result<TrainSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let domain = *curve.domain();
    let bound = curve.max_rate();
    let trains: Result<Vec<SpikeTrain>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, stream_tag::TRAIN, i);
            draw_valid(domain, || {
                let count = poisson_count(&mut rng, bound * domain.length());
                let mut times = Vec::new();
                for _ in 0..count {
                    let t = domain.start() + rng.random::<f64>() * domain.length();
                    let rate = curve.rate_at(t);
                    debug_assert!(
                        rate <= bound * (1.0 + 1e-9),
                        "thinning bound violated: {rate} > {bound}"
                    );
                    if rng.random::<f64>() * bound < rate {
                        times.push(t);
                    }
                }
                times.sort_by(|a, b| a.partial_cmp(b).unwrap());
                times
            })
        })
        .collect();
    TrainSample::new(trains?)
}

fn suffix_max(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let mut acc = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate().rev() {
        acc = acc.max(v);
        out[i] = acc;
    }
    out
}

/// Self-exciting sample via Ogata thinning. The upper bound is refreshed after
/// every candidate: the baseline is bounded by its running suffix maximum and
/// the excitation only decays between events.
pub fn sample_hawkes(model: &HawkesIntensity, n: usize, seed: RngSeed) -> Result<TrainSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let domain = *model.domain();
    let base_suffix: Option<(Vec<f64>, Vec<f64>)> = match model.base() {
        BaselineIntensity::Curve(c) => Some((c.grid().to_vec(), suffix_max(c.rates()))),
        BaselineIntensity::Constant(_) => None,
    };
    let base_bound_from = |t: f64| -> f64 {
        match (&base_suffix, model.base()) {
            (Some((grid, sm)), BaselineIntensity::Curve(c)) => {
                let i = grid.partition_point(|&g| g <= t).min(grid.len() - 1);
                c.rate_at(t).max(sm[i])
            }
            (_, BaselineIntensity::Constant(c)) => c.rate(),
            _ => unreachable!(),
        }
    };

    let trains: Result<Vec<SpikeTrain>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, stream_tag::TRAIN, i);
            draw_valid(domain, || {
                let mut times = Vec::new();
                let mut t = domain.start();
                let mut excitation = 0.0_f64;
                loop {
                    let bound = base_bound_from(t) + excitation;
                    if bound <= 0.0 {
                        break;
                    }
                    let u: f64 = rng.random();
                    let dt = -(1.0 - u).ln() / bound;
                    let t_new = t + dt;
                    if t_new >= domain.end() {
                        break;
                    }
                    let decayed = excitation * (-model.decay() * dt).exp();
                    let rate = model.base().rate_at(t_new) + decayed;
                    debug_assert!(
                        rate <= bound * (1.0 + 1e-9),
                        "thinning bound violated: {rate} > {bound}"
                    );
                    t = t_new;
                    excitation = decayed;
                    if rng.random::<f64>() * bound < rate {
                        times.push(t);
                        excitation += model.jump();
                    }
                }
                times
            })
        })
        .collect();
    TrainSample::new(trains?)
}

/// Markov-interval sample by renewal-style thinning: the conditional rate
/// depends only on the current time and the last accepted event.
pub fn sample_imi(model: &ImiIntensity, n: usize, seed: RngSeed) -> Result<TrainSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let domain = *model.domain();
    let bound = model.rate_bound();
    let trains: Result<Vec<SpikeTrain>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, stream_tag::TRAIN, i);
            draw_valid(domain, || {
                let mut times = Vec::new();
                let mut t = domain.start();
                let mut last: Option<f64> = None;
                if bound <= 0.0 {
                    return times;
                }
                loop {
                    let u: f64 = rng.random();
                    t += -(1.0 - u).ln() / bound;
                    if t >= domain.end() {
                        break;
                    }
                    let rate = model.conditional_rate(t, last);
                    debug_assert!(
                        rate <= bound * (1.0 + 1e-9),
                        "thinning bound violated: {rate} > {bound}"
                    );
                    if rng.random::<f64>() * bound < rate {
                        times.push(t);
                        last = Some(t);
                    }
                }
                times
            })
        })
        .collect();
    TrainSample::new(trains?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity::ConstantIntensity;
    use crate::testutil::{bimodal_rate, hawkes_mean_count_discretized, ks_two_sample_pvalue};

    fn unit() -> TimeDomain {
        TimeDomain::unit()
    }

    fn mean_count(sample: &TrainSample) -> f64 {
        sample.mean_cardinality()
    }

    #[test]
    fn hpp_mean_count_matches_rate() {
        let s = sample_hpp(10.0, unit(), 10_000, 7).unwrap();
        let m = mean_count(&s);
        assert!((9.8..=10.2).contains(&m), "mean count {m}");
    }

    #[test]
    fn hpp_on_short_window_keeps_expected_count() {
        let domain = TimeDomain::new(0.0, 0.05).unwrap();
        let s = sample_hpp(200.0, domain, 10_000, 11).unwrap();
        let m = mean_count(&s);
        assert!((9.8..=10.2).contains(&m), "mean count {m}");
    }

    #[test]
    fn hpp_is_deterministic_in_seed() {
        let a = sample_hpp(10.0, unit(), 50, 3).unwrap();
        let b = sample_hpp(10.0, unit(), 50, 3).unwrap();
        for (x, y) in a.trains().iter().zip(b.trains()) {
            assert_eq!(x.times(), y.times());
        }
    }

    #[test]
    fn ipp_parabola_mean_count() {
        let curve = CurveIntensity::from_fn(unit(), |t| 96.0 * (t - 0.5) * (t - 0.5)).unwrap();
        let s = sample_ipp(&curve, 10_000, 5).unwrap();
        let m = mean_count(&s);
        assert!((7.8..=8.2).contains(&m), "mean count {m}");
    }

    #[test]
    fn ipp_zero_intensity_yields_empty_trains() {
        let curve = CurveIntensity::from_fn(unit(), |_| 0.0).unwrap();
        let s = sample_ipp(&curve, 100, 9).unwrap();
        assert!(s.trains().iter().all(SpikeTrain::is_empty));
    }

    #[test]
    fn ipp_bimodal_histogram_peaks_near_modes() {
        let curve = CurveIntensity::from_fn(unit(), bimodal_rate).unwrap();
        let s = sample_ipp(&curve, 2_000, 13).unwrap();
        let mut hist = [0usize; 40];
        for tr in s.trains() {
            for &t in tr.times() {
                hist[((t * 40.0) as usize).min(39)] += 1;
            }
        }
        let argmax = |range: std::ops::Range<usize>| -> f64 {
            let i = range.clone().max_by_key(|&i| hist[i]).unwrap();
            (i as f64 + 0.5) / 40.0
        };
        let left = argmax(0..20);
        let right = argmax(20..40);
        assert!((left - 0.25).abs() < 0.05, "left peak at {left}");
        assert!((right - 0.75).abs() < 0.05, "right peak at {right}");
    }

    #[test]
    fn hawkes_without_excitation_matches_ipp_counts() {
        let base = CurveIntensity::from_fn(unit(), |t| 0.5 * bimodal_rate(t)).unwrap();
        let hawkes =
            HawkesIntensity::new(BaselineIntensity::Curve(base.clone()), 0.0, 30.0).unwrap();
        let a = sample_hawkes(&hawkes, 2_000, 21).unwrap();
        let b = sample_ipp(&base, 2_000, 22).unwrap();
        let counts_a: Vec<f64> = a.trains().iter().map(|t| t.cardinality() as f64).collect();
        let counts_b: Vec<f64> = b.trains().iter().map(|t| t.cardinality() as f64).collect();
        let p = ks_two_sample_pvalue(&counts_a, &counts_b);
        assert!(p > 0.01, "two-sample KS p-value {p}");
    }

    #[test]
    fn hawkes_mean_count_matches_discretized_oracle() {
        let base = CurveIntensity::from_fn(unit(), |t| 0.5 * bimodal_rate(t)).unwrap();
        let hawkes =
            HawkesIntensity::new(BaselineIntensity::Curve(base.clone()), 15.0, 30.0).unwrap();
        let s = sample_hawkes(&hawkes, 4_000, 17).unwrap();
        let m = mean_count(&s);
        let reference = hawkes_mean_count_discretized(
            |t| base.rate_at(t),
            15.0,
            30.0,
            1e-4,
            2_000,
            900,
        );
        assert!(
            (m - reference).abs() <= 0.1 * reference,
            "sampler mean {m} vs oracle {reference}"
        );
    }

    #[test]
    fn hawkes_is_deterministic_in_seed() {
        let base = ConstantIntensity::new(5.0, unit()).unwrap();
        let hawkes = HawkesIntensity::new(BaselineIntensity::Constant(base), 10.0, 30.0).unwrap();
        let a = sample_hawkes(&hawkes, 50, 31).unwrap();
        let b = sample_hawkes(&hawkes, 50, 31).unwrap();
        for (x, y) in a.trains().iter().zip(b.trains()) {
            assert_eq!(x.times(), y.times());
        }
    }
}
