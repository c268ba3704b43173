use alloc::vec::Vec;

use super::basis::RealBasis;
use super::params::SqgParams;
use crate::spectral::ModeIndex;

/// Regularised noise amplitudes per real-basis component of `P_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Component labels, in [`RealBasis`] order.
    pub modes: Vec<ModeIndex>,
    /// `(1 + delta |2 pi k|^(2 s_reg))^(-1/2)`.
    pub lambda: Vec<f64>,
    /// `|2 pi k|^(2 beta)`.
    pub beta_multiplier: Vec<f64>,
}

pub fn regulariser(xi: f64, delta: f64, s_reg: f64) -> f64 {
    if delta == 0.0 {
        return 1.0;
    }
    1.0 / libm::sqrt(1.0 + delta * libm::pow(xi, 2.0 * s_reg))
}

pub fn noise_spec(params: &SqgParams) -> NoiseSpec {
    let basis = RealBasis::new(params.m);
    let modes: Vec<ModeIndex> = (0..basis.dim()).map(|i| basis.label(i)).collect();
    let lambda = modes.iter().map(|k| regulariser(k.wavenumber(), params.delta, params.s_reg)).collect();
    let beta_multiplier = modes.iter().map(|k| k.wavenumber_pow(2.0 * params.beta)).collect();
    NoiseSpec { modes, lambda, beta_multiplier }
}

/// `sum_{0 < |k| <= cutoff} |2 pi k|^(2 alpha) lambda_k^2`.
pub fn hs_norm_sq_cutoff(alpha: f64, delta: f64, s_reg: f64, cutoff: usize) -> f64 {
    let c = cutoff as i64;
    let mut terms = Vec::new();
    for k1 in -c..=c {
        for k2 in -c..=c {
            let r2 = k1 * k1 + k2 * k2;
            if r2 == 0 || r2 > c * c {
                continue;
            }
            let xi = ModeIndex::new(k1 as i32, k2 as i32).wavenumber();
            let l = regulariser(xi, delta, s_reg);
            terms.push(libm::pow(xi, 2.0 * alpha) * l * l);
        }
    }
    crate::stats::pairwise_sum(&terms)
}

/// Trace of the noise covariance in the energy norm, truncated at `m`.
pub fn hs_norm_sq(params: &SqgParams) -> f64 {
    hs_norm_sq_cutoff(params.alpha, params.delta, params.s_reg, params.m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingDiagnostic {
    pub epsilon: f64,
    pub m: usize,
    pub delta: f64,
    /// `eps delta^(-(alpha+1)/s_reg)`, or `eps m^(2+2 alpha)` when `delta = 0`.
    pub value: f64,
    pub ok: bool,
}

pub fn scaling_ok(params: &SqgParams, threshold: f64) -> ScalingDiagnostic {
    let value = if params.epsilon == 0.0 {
        0.0
    } else if params.delta > 0.0 {
        params.epsilon * libm::pow(params.delta, -(params.alpha + 1.0) / params.s_reg)
    } else {
        params.epsilon * libm::pow(params.m as f64, 2.0 + 2.0 * params.alpha)
    };
    ScalingDiagnostic { epsilon: params.epsilon, m: params.m, delta: params.delta, value, ok: value <= threshold }
}

/// Diagnostic over an `(epsilon, m)` grid, epsilon varying fastest.
pub fn scaling_table(base: &SqgParams, epsilons: &[f64], ms: &[usize], threshold: f64) -> Vec<ScalingDiagnostic> {
    let mut out = Vec::with_capacity(epsilons.len() * ms.len());
    for &m in ms {
        for &epsilon in epsilons {
            out.push(scaling_ok(&SqgParams { epsilon, m, ..*base }, threshold));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::TAU;

    #[test]
    fn unregularised_noise_is_flat() {
        let s = noise_spec(&SqgParams { m: 3, ..SqgParams::default() });
        assert!(s.lambda.iter().all(|&l| l == 1.0));
        assert_eq!(s.modes.len(), 28);
    }

    #[test]
    fn regulariser_value_and_monotonicity() {
        let p = SqgParams { delta: 1.0, s_reg: 2.0, m: 4, ..SqgParams::default() };
        let s = noise_spec(&p);
        let i = s.modes.iter().position(|k| *k == ModeIndex::new(1, 0)).unwrap();
        assert!((s.lambda[i] - 1.0 / (1.0 + TAU.powi(4)).sqrt()).abs() < 1e-16);
        let mut pairs: Vec<(i64, f64)> = s.modes.iter().map(|k| k.norm_sq()).zip(s.lambda.iter().copied()).collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(pairs.windows(2).all(|w| w[1].1 <= w[0].1));
        let big = regulariser(TAU, 1e12, 2.0);
        assert!(big > 0.0 && big < 1e-6);
    }

    #[test]
    fn hs_norm_small_cases() {
        let p = SqgParams { m: 1, ..SqgParams::default() };
        assert!((hs_norm_sq(&p) - 4.0 * TAU).abs() < 1e-12);
        // m = 2 adds four |k| = sqrt 2 modes and four |k| = 2 modes.
        let p2 = SqgParams { m: 2, ..SqgParams::default() };
        let want = 4.0 * TAU + 4.0 * TAU * 2f64.sqrt() + 4.0 * 2.0 * TAU;
        assert!((hs_norm_sq(&p2) - want).abs() < 1e-12);
    }

    #[test]
    fn scaling_diagnostic_arithmetic() {
        let p = SqgParams { epsilon: 1e-4, m: 4, alpha: 0.5, beta: 0.25, ..SqgParams::default() };
        let d = scaling_ok(&p, 1e-2);
        assert!((d.value - 6.4e-3).abs() < 1e-15);
        assert!(d.ok);
        let z = scaling_ok(&SqgParams { epsilon: 0.0, ..p }, 1e-2);
        assert_eq!(z.value, 0.0);
        assert!(z.ok);
        assert_eq!(scaling_table(&p, &[1e-4, 1e-3], &[2, 4, 8], 1e-2).len(), 6);
    }
}
