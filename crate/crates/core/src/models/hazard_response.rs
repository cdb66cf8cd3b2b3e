//! Hazard-response interaction: logistic hazard growth coupled to a
//! logistic response that suppresses it,
//!
//! ```text
//! h' = lambda h (1 - h/kappa) - alpha q h
//! q' = beta   q (1 - q/kappa) - alpha q h
//! ```
//!
//! with the shared carrying capacity kappa and symmetric interaction rate
//! alpha. The cumulative hazard H is carried as a third component. The
//! system is also provided on the log scale (hazard and response replaced
//! by their logarithms), which keeps the dynamics well-scaled when the
//! initial response is many orders of magnitude below its steady state.

use crate::error::{Error, Result};
use crate::ode::OdeSystem;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HazardResponseParams {
    pub lambda: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

impl HazardResponseParams {
    pub fn new(lambda: f64, kappa: f64, alpha: f64, beta: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        require_positive("kappa", kappa)?;
        require_positive("alpha", alpha)?;
        require_positive("beta", beta)?;
        Ok(Self {
            lambda,
            kappa,
            alpha,
            beta,
        })
    }
}

/// Natural-scale system, state (h, q, H).
#[derive(Debug, Clone)]
pub struct HazardResponseSystem {
    pub params: HazardResponseParams,
    pub h0: f64,
    pub q0: f64,
}

impl OdeSystem for HazardResponseSystem {
    fn dim(&self) -> usize {
        3
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![self.h0, self.q0, 0.0]
    }

    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        let p = &self.params;
        let (h, q) = (y[0], y[1]);
        dydt[0] = p.lambda * h * (1.0 - h / p.kappa) - p.alpha * q * h;
        dydt[1] = p.beta * q * (1.0 - q / p.kappa) - p.alpha * q * h;
        dydt[2] = h;
    }

    fn has_jacobian(&self) -> bool {
        true
    }

    fn jacobian(&self, _t: f64, y: &[f64], jac: &mut [f64]) {
        let p = &self.params;
        let (h, q) = (y[0], y[1]);
        jac[0] = p.lambda - 2.0 * p.lambda * h / p.kappa - p.alpha * q;
        jac[1] = -p.alpha * h;
        jac[2] = 0.0;
        jac[3] = -p.alpha * q;
        jac[4] = p.beta - 2.0 * p.beta * q / p.kappa - p.alpha * h;
        jac[5] = 0.0;
        jac[6] = 1.0;
        jac[7] = 0.0;
        jac[8] = 0.0;
    }
}

/// Log-scale system, state (ln h, ln q, H). Positivity of h and q is
/// built into the parameterisation and the equations stay O(1) even when
/// q0 is tiny.
#[derive(Debug, Clone)]
pub struct LogHazardResponseSystem {
    pub params: HazardResponseParams,
    pub h0: f64,
    pub q0: f64,
}

impl OdeSystem for LogHazardResponseSystem {
    fn dim(&self) -> usize {
        3
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![self.h0.ln(), self.q0.ln(), 0.0]
    }

    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        let p = &self.params;
        let (h, q) = (y[0].exp(), y[1].exp());
        dydt[0] = p.lambda * (1.0 - h / p.kappa) - p.alpha * q;
        dydt[1] = p.beta * (1.0 - q / p.kappa) - p.alpha * h;
        dydt[2] = h;
    }

    fn has_jacobian(&self) -> bool {
        true
    }

    fn jacobian(&self, _t: f64, y: &[f64], jac: &mut [f64]) {
        let p = &self.params;
        let (h, q) = (y[0].exp(), y[1].exp());
        jac[0] = -p.lambda / p.kappa * h;
        jac[1] = -p.alpha * q;
        jac[2] = 0.0;
        jac[3] = -p.alpha * h;
        jac[4] = -p.beta / p.kappa * q;
        jac[5] = 0.0;
        jac[6] = h;
        jac[7] = 0.0;
        jac[8] = 0.0;
    }
}

/// Sign pattern of the interior steady state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyStateCase {
    /// q* <= 0: the response cannot establish and the hazard saturates.
    HazardWins,
    /// h* <= 0: the response drives the hazard out.
    ResponseWins,
    /// Both coordinates positive.
    Coexistence,
}

/// Interior steady state of the hazard-response interaction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SteadyState {
    /// Interaction discriminant 1 - (alpha kappa)^2 / (lambda beta).
    pub d: f64,
    pub h_star: f64,
    pub q_star: f64,
    pub case: SteadyStateCase,
    /// True exactly when both coordinates are positive and d > 0, in which
    /// case (h*, q*) is the attracting coexistence equilibrium.
    pub is_equilibrium: bool,
}

/// Solves the interior steady state
///
/// ```text
/// h* = kappa (1 - alpha kappa / lambda) / d
/// q* = kappa (1 - alpha kappa / beta) / d
/// d  = 1 - (alpha kappa)^2 / (lambda beta)
/// ```
///
/// and classifies its sign pattern. Fails when d is numerically zero, in
/// which case the two nullclines are parallel and no interior solution
/// exists.
pub fn steady_state(params: &HazardResponseParams) -> Result<SteadyState> {
    let ak = params.alpha * params.kappa;
    let d = 1.0 - ak * ak / (params.lambda * params.beta);
    if d.abs() < 1e-12 {
        return Err(Error::DegenerateSteadyState { d });
    }
    let h_star = params.kappa * (1.0 - ak / params.lambda) / d;
    let q_star = params.kappa * (1.0 - ak / params.beta) / d;
    let case = if q_star <= 0.0 {
        SteadyStateCase::HazardWins
    } else if h_star <= 0.0 {
        SteadyStateCase::ResponseWins
    } else {
        SteadyStateCase::Coexistence
    };
    Ok(SteadyState {
        d,
        h_star,
        q_star,
        case,
        is_equilibrium: case == SteadyStateCase::Coexistence && d > 0.0,
    })
}
