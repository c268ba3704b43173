use alloc::vec::Vec;

use super::ensemble::{exp_mean, Executor};
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinSystem, SqgParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMomentReport {
    /// `-(eps/2) sum_k log(1 - eta lambda_k^2)`.
    pub analytic: f64,
    /// `eps log` of the sample mean of `exp((eta/eps) |theta0|^2_{H^(alpha - 2 beta)})`.
    pub mc: f64,
    pub se: f64,
    pub z: f64,
    pub n_samples: usize,
}

/// `eps log E exp{(eta/eps) |theta0|^2_{H^(alpha - 2 beta)}}` for `theta0` drawn
/// from the invariant Gaussian, in closed form and by sampling.
///
/// The expectation is finite for `eta < min lambda^-2`; the sample variance is
/// finite only for `eta < min lambda^-2 / 2`.
pub fn gaussian_exp_moment(
    eta: f64,
    params: &SqgParams,
    n_samples: usize,
    exec: &impl Executor,
) -> Result<ExpMomentReport> {
    if !(params.epsilon > 0.0) {
        return Err(Error::param("epsilon", "exponential moments need epsilon > 0"));
    }
    let sys = GalerkinSystem::new(params)?;
    let lmax = sys.lambda().iter().copied().fold(0.0, f64::max);
    if !(eta >= 0.0 && eta * lmax * lmax < 1.0) {
        return Err(Error::param("eta", alloc::format!("need 0 <= eta < {}", 1.0 / (lmax * lmax))));
    }
    if n_samples < 2 {
        return Err(Error::param("n_samples", "need at least two samples"));
    }
    let eps = params.epsilon;
    let analytic = -0.5 * eps * sys.lambda().iter().map(|l| libm::log1p(-eta * l * l)).sum::<f64>();
    let w = sys.basis().multiplier(2.0 * params.energy_index());
    let logs: Vec<f64> = exec.map(n_samples, |i| {
        let x = sys.gaussian_initial(i as u64);
        let e: f64 = w.iter().zip(&x).map(|(w, x)| w * x * x).sum();
        eta / eps * e
    });
    let (lm, rel_se) = exp_mean(&logs);
    let mc = eps * lm;
    let se = eps * rel_se;
    let z = if se > 0.0 { (mc - analytic) / se } else { 0.0 };
    Ok(ExpMomentReport { analytic, mc, se, z, n_samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Sequential;

    fn params(eps: f64, m: usize) -> SqgParams {
        SqgParams { epsilon: eps, m, ..SqgParams::default() }
    }

    #[test]
    fn zero_eta_is_zero() {
        let r = gaussian_exp_moment(0.0, &params(0.5, 1), 10, &Sequential).unwrap();
        assert_eq!(r.analytic, 0.0);
        assert!(r.mc.abs() < 1e-15);
    }

    #[test]
    fn four_modes_at_m1() {
        let (eps, eta) = (0.3, 0.4);
        let r = gaussian_exp_moment(eta, &params(eps, 1), 10, &Sequential).unwrap();
        let expected = -2.0 * eps * libm::log(1.0 - eta);
        assert!((r.analytic - expected).abs() < 1e-14);
    }

    #[test]
    fn integrability_boundary_is_rejected() {
        let e = gaussian_exp_moment(1.0, &params(0.5, 1), 10, &Sequential).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { name: "eta", .. }));
        assert!(gaussian_exp_moment(-0.1, &params(0.5, 1), 10, &Sequential).is_err());
        assert!(gaussian_exp_moment(0.1, &params(0.0, 1), 10, &Sequential).is_err());
    }
}
