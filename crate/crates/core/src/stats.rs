//! Small, order-deterministic statistics helpers.

use alloc::vec::Vec;

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let d: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&d) / (xs.len() - 1) as f64
}

/// Standard error of the mean for independent samples.
pub fn std_error(xs: &[f64]) -> f64 {
    libm::sqrt(variance(xs) / xs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn of(xs: &[f64]) -> Self {
        MeanEstimate { mean: mean(xs), se: std_error(xs), n: xs.len() }
    }

    /// z-score of `mean - reference`.
    pub fn z(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.se
    }
}

/// Integrated autocorrelation time with Sokal's automatic window (c = 5).
/// Returns 1 for white noise.
pub fn integrated_autocorr_time(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return 1.0;
    }
    let m = mean(xs);
    let c0 = {
        let d: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
        pairwise_sum(&d) / n as f64
    };
    if c0 <= 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    let mut lag = 1;
    while lag < n / 2 {
        let mut s = 0.0;
        for i in 0..n - lag {
            s += (xs[i] - m) * (xs[i + lag] - m);
        }
        tau += 2.0 * s / (n as f64 * c0);
        if (lag as f64) >= 5.0 * tau {
            break;
        }
        lag += 1;
    }
    tau.max(1.0)
}

/// Mean of a correlated series with an autocorrelation-adjusted error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEstimate {
    pub mean: f64,
    pub se: f64,
    pub tau_int: f64,
    pub ess: f64,
}

impl SeriesEstimate {
    pub fn of(xs: &[f64]) -> Self {
        let tau = integrated_autocorr_time(xs);
        let ess = xs.len() as f64 / tau;
        let var = variance(xs);
        SeriesEstimate { mean: mean(xs), se: libm::sqrt(var / ess), tau_int: tau, ess }
    }
}

/// Wilson score interval for `hits` successes out of `n` at normal quantile `z`.
/// With zero hits the lower end is 0 and the upper end is `z^2 / (n + z^2)`.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)) / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `log(sum exp(xs))` without overflow.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let t: Vec<f64> = xs.iter().map(|x| libm::exp(x - m)).collect();
    m + libm::log(pairwise_sum(&t))
}

/// Upper tail of the standard normal.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}
