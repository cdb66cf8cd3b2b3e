//! Weibull hazard expressed as a Bernoulli-type ODE, used to validate the
//! integration machinery against a textbook hazard with a closed form.
//!
//! The Weibull hazard w(t) = beta kappa t^{kappa - 1} solves
//!
//! ```text
//! h' = ((kappa - 1)/t - beta kappa t^{kappa - 1}) h + h^2
//! ```
//!
//! which is singular at t = 0, so integration starts from a positive
//! `t_start` with h(t_start) on the Weibull curve. The cumulative hazard
//! component accumulates from `t_start`.

use crate::error::{Error, Result};
use crate::ode::OdeSystem;

#[derive(Debug, Clone, Copy)]
pub struct WeibullBernoulliSystem {
    pub shape: f64,
    pub scale: f64,
    pub t_start: f64,
}

impl WeibullBernoulliSystem {
    pub fn new(shape: f64, scale: f64, t_start: f64) -> Result<Self> {
        for (name, value) in [("shape", shape), ("scale", scale), ("t_start", t_start)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(Self {
            shape,
            scale,
            t_start,
        })
    }

    /// Closed-form hazard beta kappa t^{kappa - 1}.
    pub fn hazard(&self, t: f64) -> f64 {
        self.scale * self.shape * t.powf(self.shape - 1.0)
    }

    /// Cumulative hazard accumulated from `t_start`:
    /// beta (t^kappa - t_start^kappa).
    pub fn cumhaz(&self, t: f64) -> f64 {
        self.scale * (t.powf(self.shape) - self.t_start.powf(self.shape))
    }
}

impl OdeSystem for WeibullBernoulliSystem {
    fn dim(&self) -> usize {
        2
    }

    fn initial_time(&self) -> f64 {
        self.t_start
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![self.hazard(self.t_start), 0.0]
    }

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        let a = (self.shape - 1.0) / t - self.scale * self.shape * t.powf(self.shape - 1.0);
        dydt[0] = a * y[0] + y[0] * y[0];
        dydt[1] = y[0];
    }

    fn has_jacobian(&self) -> bool {
        true
    }

    fn jacobian(&self, t: f64, y: &[f64], jac: &mut [f64]) {
        let a = (self.shape - 1.0) / t - self.scale * self.shape * t.powf(self.shape - 1.0);
        jac[0] = a + 2.0 * y[0];
        jac[1] = 0.0;
        jac[2] = 1.0;
        jac[3] = 0.0;
    }
}
