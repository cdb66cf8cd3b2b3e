//! Chain quality diagnostics: integrated autocorrelation time and
//! effective sample size.

use crate::error::{Error, Result};

/// Integrated autocorrelation time via Geyer's initial positive sequence:
/// successive autocovariances are summed in pairs and the sum truncated at
/// the first negative pair, which is the standard bias/variance compromise
/// for reversible chains. An iid sequence gives roughly 1; an AR(1) chain
/// with coefficient rho gives (1 + rho) / (1 - rho).
pub fn integrated_autocorr_time(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 4 {
        return Err(Error::DegenerateChain(format!(
            "need at least 4 points, got {n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateChain("non-finite values".into()));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let gamma = |lag: usize| -> f64 {
        x[..n - lag]
            .iter()
            .zip(&x[lag..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / n as f64
    };
    let g0 = gamma(0);
    if !(g0 > 0.0) {
        return Err(Error::DegenerateChain(
            "zero variance (constant chain)".into(),
        ));
    }

    // tau = -1 + 2 * sum of paired autocovariances Gamma_m, truncated at
    // the first non-positive pair. The m = 0 pair includes gamma(0).
    let mut tau = -1.0;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = gamma(2 * m) + gamma(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair / g0;
        m += 1;
    }
    Ok(tau.max(1.0 / n as f64))
}

/// Effective sample size: chain length deflated by the autocorrelation
/// time.
pub fn effective_sample_size(x: &[f64]) -> Result<f64> {
    Ok(x.len() as f64 / integrated_autocorr_time(x)?)
}
