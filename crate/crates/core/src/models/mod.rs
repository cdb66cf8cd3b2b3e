//! Hazard models: logistic growth, the hazard-response interaction and the
//! Weibull validation system, together with a [`Model`] wrapper that maps a
//! vector of free parameters onto hazard and cumulative-hazard curves.

mod hazard_response;
mod logistic;
mod weibull;

pub use hazard_response::{
    steady_state, HazardResponseParams, HazardResponseSystem, LogHazardResponseSystem,
    SteadyState, SteadyStateCase,
};
pub use logistic::{LogisticParams, LogisticSystem};
pub use weibull::WeibullBernoulliSystem;

use crate::error::{Error, Result};
use crate::ode::{integrate_at, SolverOptions};

/// Whether an initial condition is estimated or pinned to a known value.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialValue {
    Free,
    Fixed(f64),
}

impl InitialValue {
    fn is_free(&self) -> bool {
        matches!(self, InitialValue::Free)
    }
}

/// A hazard model with a declared set of free parameters. Parameter vectors
/// are ordered rate parameters first, then any free initial conditions:
/// logistic `[lambda, kappa, (h0)]`, hazard-response
/// `[lambda, kappa, alpha, beta, (h0), (q0)]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Logistic {
        h0: InitialValue,
    },
    HazardResponse {
        h0: InitialValue,
        q0: InitialValue,
        /// Integrate on the natural scale instead of the default log scale.
        #[serde(default)]
        natural_ode: bool,
    },
}

/// Hazard, cumulative hazard and (for the hazard-response model) the
/// response curve, sampled on a shared time grid.
#[derive(Debug, Clone)]
pub struct Curves {
    pub hazard: Vec<f64>,
    pub cumhaz: Vec<f64>,
    pub response: Option<Vec<f64>>,
}

impl Model {
    /// Logistic model with the initial hazard estimated alongside the rates.
    pub fn logistic() -> Self {
        Model::Logistic {
            h0: InitialValue::Free,
        }
    }

    pub fn logistic_fixed_h0(h0: f64) -> Result<Self> {
        if !(h0.is_finite() && h0 > 0.0) {
            return Err(Error::InvalidParameter { name: "h0", value: h0 });
        }
        Ok(Model::Logistic {
            h0: InitialValue::Fixed(h0),
        })
    }

    /// Hazard-response model with both initial conditions pinned, the
    /// default because the early-time data carry little information about
    /// them.
    pub fn hazard_response(h0: f64, q0: f64) -> Result<Self> {
        if !(h0.is_finite() && h0 > 0.0) {
            return Err(Error::InvalidParameter { name: "h0", value: h0 });
        }
        if !(q0.is_finite() && q0 > 0.0) {
            return Err(Error::InvalidParameter { name: "q0", value: q0 });
        }
        Ok(Model::HazardResponse {
            h0: InitialValue::Fixed(h0),
            q0: InitialValue::Fixed(q0),
            natural_ode: false,
        })
    }

    pub fn with_free_h0(mut self) -> Self {
        match &mut self {
            Model::Logistic { h0 } | Model::HazardResponse { h0, .. } => *h0 = InitialValue::Free,
        }
        self
    }

    pub fn with_free_q0(mut self) -> Self {
        if let Model::HazardResponse { q0, .. } = &mut self {
            *q0 = InitialValue::Free;
        }
        self
    }

    pub fn with_natural_ode(mut self) -> Self {
        if let Model::HazardResponse { natural_ode, .. } = &mut self {
            *natural_ode = true;
        }
        self
    }

    /// Names of the free parameters, in vector order.
    pub fn free_names(&self) -> Vec<&'static str> {
        match self {
            Model::Logistic { h0 } => {
                let mut names = vec!["lambda", "kappa"];
                if h0.is_free() {
                    names.push("h0");
                }
                names
            }
            Model::HazardResponse { h0, q0, .. } => {
                let mut names = vec!["lambda", "kappa", "alpha", "beta"];
                if h0.is_free() {
                    names.push("h0");
                }
                if q0.is_free() {
                    names.push("q0");
                }
                names
            }
        }
    }

    /// Names of the full parameter vector, free and fixed alike.
    pub fn full_names(&self) -> Vec<&'static str> {
        match self {
            Model::Logistic { .. } => vec!["lambda", "kappa", "h0"],
            Model::HazardResponse { .. } => vec!["lambda", "kappa", "alpha", "beta", "h0", "q0"],
        }
    }

    pub fn n_free(&self) -> usize {
        self.free_names().len()
    }

    /// Expands a free-parameter vector to the full parameter vector,
    /// validating length and positivity.
    pub fn expand(&self, free: &[f64]) -> Result<Vec<f64>> {
        if free.len() != self.n_free() {
            return Err(Error::InvalidConfig(format!(
                "expected {} free parameters, got {}",
                self.n_free(),
                free.len()
            )));
        }
        for (name, value) in self.free_names().iter().zip(free) {
            if !(value.is_finite() && *value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: *value,
                });
            }
        }
        let mut it = free.iter().copied();
        let full = match self {
            Model::Logistic { h0 } => {
                let lambda = it.next().unwrap();
                let kappa = it.next().unwrap();
                let h0 = match h0 {
                    InitialValue::Free => it.next().unwrap(),
                    InitialValue::Fixed(v) => *v,
                };
                vec![lambda, kappa, h0]
            }
            Model::HazardResponse { h0, q0, .. } => {
                let lambda = it.next().unwrap();
                let kappa = it.next().unwrap();
                let alpha = it.next().unwrap();
                let beta = it.next().unwrap();
                let h0 = match h0 {
                    InitialValue::Free => it.next().unwrap(),
                    InitialValue::Fixed(v) => *v,
                };
                let q0 = match q0 {
                    InitialValue::Free => it.next().unwrap(),
                    InitialValue::Fixed(v) => *v,
                };
                vec![lambda, kappa, alpha, beta, h0, q0]
            }
        };
        Ok(full)
    }

    /// Evaluates hazard and cumulative-hazard curves at sorted `times` for
    /// a full parameter vector. The logistic model uses its closed forms;
    /// the hazard-response model integrates its ODE system.
    pub fn curves(&self, full: &[f64], times: &[f64], opts: &SolverOptions) -> Result<Curves> {
        match self {
            Model::Logistic { .. } => {
                let p = LogisticParams::new(full[0], full[1], full[2])?;
                Ok(Curves {
                    hazard: times.iter().map(|t| p.hazard(*t)).collect(),
                    cumhaz: times.iter().map(|t| p.cumhaz(*t)).collect(),
                    response: None,
                })
            }
            Model::HazardResponse { natural_ode, .. } => {
                let params = HazardResponseParams::new(full[0], full[1], full[2], full[3])?;
                let (h0, q0) = (full[4], full[5]);
                if !(h0.is_finite() && h0 > 0.0) {
                    return Err(Error::InvalidParameter { name: "h0", value: h0 });
                }
                if !(q0.is_finite() && q0 > 0.0) {
                    return Err(Error::InvalidParameter { name: "q0", value: q0 });
                }
                let traj = if *natural_ode {
                    integrate_at(&HazardResponseSystem { params, h0, q0 }, times, opts)?
                } else {
                    integrate_at(&LogHazardResponseSystem { params, h0, q0 }, times, opts)?
                };
                let n = traj.len();
                let mut hazard = Vec::with_capacity(n);
                let mut cumhaz = Vec::with_capacity(n);
                let mut response = Vec::with_capacity(n);
                for i in 0..n {
                    let s = traj.state(i);
                    if *natural_ode {
                        hazard.push(s[0]);
                        response.push(s[1]);
                    } else {
                        hazard.push(s[0].exp());
                        response.push(s[1].exp());
                    }
                    cumhaz.push(s[2]);
                }
                Ok(Curves {
                    hazard,
                    cumhaz,
                    response: Some(response),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn free_parameter_bookkeeping() {
        let m = Model::logistic();
        assert_eq!(m.free_names(), vec!["lambda", "kappa", "h0"]);
        assert_eq!(m.expand(&[0.5, 0.05, 3.5]).unwrap(), vec![0.5, 0.05, 3.5]);

        let m = Model::logistic_fixed_h0(2.0).unwrap();
        assert_eq!(m.free_names(), vec!["lambda", "kappa"]);
        assert_eq!(m.expand(&[0.5, 0.05]).unwrap(), vec![0.5, 0.05, 2.0]);

        let m = Model::hazard_response(0.01, 1e-6).unwrap();
        assert_eq!(m.free_names(), vec!["lambda", "kappa", "alpha", "beta"]);
        assert_eq!(
            m.expand(&[1.8, 0.1, 6.0, 4.8]).unwrap(),
            vec![1.8, 0.1, 6.0, 4.8, 0.01, 1e-6]
        );

        let m = Model::hazard_response(0.01, 1e-6).unwrap().with_free_h0().with_free_q0();
        assert_eq!(m.n_free(), 6);
        assert_eq!(
            m.expand(&[1.8, 0.1, 6.0, 4.8, 0.02, 1e-5]).unwrap(),
            vec![1.8, 0.1, 6.0, 4.8, 0.02, 1e-5]
        );
    }

    #[test]
    fn expand_rejects_bad_vectors() {
        let m = Model::logistic();
        assert!(m.expand(&[0.5, 0.05]).is_err());
        assert!(m.expand(&[0.5, -0.05, 1.0]).is_err());
        assert!(m.expand(&[0.5, f64::NAN, 1.0]).is_err());
        assert!(Model::logistic_fixed_h0(0.0).is_err());
        assert!(Model::hazard_response(0.01, -1e-6).is_err());
    }

    #[test]
    fn logistic_curves_use_closed_forms() {
        let m = Model::logistic();
        let full = m.expand(&[1.0, 10.0, 1.0]).unwrap();
        let c = m
            .curves(&full, &[0.0, 1.0], &SolverOptions::default())
            .unwrap();
        assert_relative_eq!(c.hazard[1], 2.3196931668407395, max_relative = 1e-14);
        assert_relative_eq!(c.cumhaz[1], 1.585650787404291, max_relative = 1e-13);
        assert!(c.response.is_none());
        assert_eq!(c.cumhaz[0], 0.0);
    }

    #[test]
    fn hazard_response_curves_default_to_log_scale_and_agree_with_natural() {
        let log_m = Model::hazard_response(0.01, 1e-6).unwrap();
        let nat_m = log_m.clone().with_natural_ode();
        let full = log_m.expand(&[1.8, 0.1, 6.0, 4.8]).unwrap();
        let times = [0.0, 2.0, 5.0, 20.0];
        // Tight atol so the natural-scale run resolves the tiny response.
        let opts = SolverOptions {
            atol: 1e-14,
            ..SolverOptions::default()
        };
        let a = log_m.curves(&full, &times, &opts).unwrap();
        let b = nat_m.curves(&full, &times, &opts).unwrap();
        for i in 0..times.len() {
            assert_relative_eq!(a.hazard[i], b.hazard[i], max_relative = 1e-6);
            assert_relative_eq!(a.cumhaz[i], b.cumhaz[i], max_relative = 1e-6);
            assert_relative_eq!(
                a.response.as_ref().unwrap()[i],
                b.response.as_ref().unwrap()[i],
                max_relative = 1e-6
            );
        }
        assert_eq!(a.cumhaz[0], 0.0);
        assert_relative_eq!(a.hazard[0], 0.01, max_relative = 1e-12);
    }
}
