//! Shared helpers for unit tests: reference simulators and goodness-of-fit
//! statistics kept independent of the library code they check.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bimodal truncated-Gaussian profile from the self-exciting simulation study.
pub fn bimodal_rate(t: f64) -> f64 {
    let bump = |c: f64| {
        let z = (t - c) / 0.05;
        100.0 / (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * z * z).exp()
    };
    if t <= 0.5 {
        bump(0.25)
    } else {
        bump(0.75)
    }
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * (-2.0 * (j as f64) * (j as f64) * x * x).exp();
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic two-sample Kolmogorov-Smirnov p-value.
pub fn ks_two_sample_pvalue(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    kolmogorov_survival(d * (n * m / (n + m)).sqrt())
}

/// One-sample Kolmogorov-Smirnov statistic against the unit exponential.
pub fn ks_statistic_exp1(values: &[f64]) -> f64 {
    let mut xs = values.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let cdf = 1.0 - (-x).exp();
        d = d.max((cdf - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - cdf).abs());
    }
    d
}

/// Mean event count of a self-exciting process estimated by an independent
/// fixed-step Bernoulli discretization on `[0, 1]`.
pub fn hawkes_mean_count_discretized<F: Fn(f64) -> f64>(
    base: F,
    jump: f64,
    decay: f64,
    dt: f64,
    reps: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (1.0 / dt).round() as usize;
    let decay_step = (-decay * dt).exp();
    let mut total = 0usize;
    for _ in 0..reps {
        let mut excitation = 0.0_f64;
        for s in 0..steps {
            let t = s as f64 * dt;
            let rate = base(t) + excitation;
            excitation *= decay_step;
            if rng.random::<f64>() < rate * dt {
                excitation += jump;
                total += 1;
            }
        }
    }
    total as f64 / reps as f64
}
