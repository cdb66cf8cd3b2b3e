//! Logistic hazard growth: h' = lambda h (1 - h/kappa), h(0) = h0.
//!
//! The hazard, cumulative hazard, survival CDF and its inverse all have
//! closed forms, so this model doubles as the reference oracle for the ODE
//! engine and the inversion sampler.

use crate::error::{Error, Result};
use crate::ode::OdeSystem;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogisticParams {
    pub lambda: f64,
    pub kappa: f64,
    pub h0: f64,
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

impl LogisticParams {
    pub fn new(lambda: f64, kappa: f64, h0: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        require_positive("kappa", kappa)?;
        require_positive("h0", h0)?;
        Ok(Self { lambda, kappa, h0 })
    }

    /// h(t) = kappa h0 / (h0 + (kappa - h0) e^{-lambda t}).
    pub fn hazard(&self, t: f64) -> f64 {
        let decay = (-self.lambda * t).exp();
        self.kappa * self.h0 / (self.h0 + (self.kappa - self.h0) * decay)
    }

    /// H(t) = kappa t + (kappa/lambda) ln((h0 + (kappa - h0) e^{-lambda t}) / kappa).
    ///
    /// Written with `ln_1p`/`exp_m1` so that small times and extreme
    /// parameter ratios keep full precision.
    pub fn cumhaz(&self, t: f64) -> f64 {
        let g = (self.h0 - self.kappa) / self.kappa * (-(-self.lambda * t).exp_m1());
        self.kappa * t + self.kappa / self.lambda * g.ln_1p()
    }

    /// Survival function S(t) = e^{-H(t)}.
    pub fn survival(&self, t: f64) -> f64 {
        (-self.cumhaz(t)).exp()
    }

    /// CDF of the survival time, F(t) = 1 - S(t).
    pub fn cdf(&self, t: f64) -> f64 {
        -(-self.cumhaz(t)).exp_m1()
    }

    /// Inverse CDF: the t solving F(t) = u for u in [0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::InvalidConfig(format!(
                "quantile level must lie in [0, 1), got {u}"
            )));
        }
        // w = (lambda/kappa) H(t) at the target, H = -ln(1 - u).
        let w = self.lambda / self.kappa * -(-u).ln_1p();
        let ratio = self.kappa / self.h0;
        let t = if w > 500.0 {
            // exp(w) overflows; expand ln(1 + ratio (e^w - 1)) around e^w.
            (ratio.ln() + w + ((1.0 / ratio - 1.0) * (-w).exp()).ln_1p()) / self.lambda
        } else {
            (ratio * w.exp_m1()).ln_1p() / self.lambda
        };
        Ok(t)
    }
}

/// ODE view of the logistic model: state (h, H) with h' = lambda h (1 - h/kappa),
/// H' = h, started at (h0, 0).
#[derive(Debug, Clone)]
pub struct LogisticSystem {
    pub params: LogisticParams,
}

impl OdeSystem for LogisticSystem {
    fn dim(&self) -> usize {
        2
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![self.params.h0, 0.0]
    }

    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        let p = &self.params;
        dydt[0] = p.lambda * y[0] * (1.0 - y[0] / p.kappa);
        dydt[1] = y[0];
    }

    fn has_jacobian(&self) -> bool {
        true
    }

    fn jacobian(&self, _t: f64, y: &[f64], jac: &mut [f64]) {
        let p = &self.params;
        jac[0] = p.lambda * (1.0 - 2.0 * y[0] / p.kappa);
        jac[1] = 0.0;
        jac[2] = 1.0;
        jac[3] = 0.0;
    }
}
