//! Maximum likelihood by Nelder-Mead on log-transformed parameters.
//!
//! The log transform turns the positivity constraints into an unconstrained
//! search and makes the default simplex scale-free. Convergence is declared
//! when the simplex diameter in log space falls below the tolerance; a
//! small number of restarts around the incumbent guards against premature
//! collapse.

use super::likelihood::{reject_all_censored, Likelihood};
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::ode::SolverOptions;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MleConfig {
    /// Iteration budget per Nelder-Mead run.
    pub max_iters: usize,
    /// Simplex diameter (log scale) below which a run stops.
    pub tol: f64,
    /// Fresh simplexes spawned around the incumbent after convergence.
    pub restarts: usize,
    /// Starting point on the natural scale; ones when absent.
    pub init: Option<Vec<f64>>,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            max_iters: 4000,
            tol: 1e-8,
            restarts: 2,
            init: None,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MleFit {
    /// Free parameters at the optimum, natural scale.
    pub params: Vec<f64>,
    /// Full parameter vector including fixed initial conditions.
    pub full_params: Vec<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn around(z0: &[f64], spread: f64, f: &mut dyn FnMut(&[f64]) -> f64) -> Self {
        let dim = z0.len();
        let mut points = vec![z0.to_vec()];
        for i in 0..dim {
            let mut p = z0.to_vec();
            p[i] += spread;
            points.push(p);
        }
        let values = points.iter().map(|p| f(p)).collect();
        Self { points, values }
    }

    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn diameter(&self) -> f64 {
        let best = &self.points[0];
        self.points[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(best)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Minimises `f` from `z0`, returning the best point, its value, iterations
/// used and whether the diameter tolerance was met.
fn nelder_mead(
    z0: &[f64],
    spread: f64,
    max_iters: usize,
    tol: f64,
    f: &mut dyn FnMut(&[f64]) -> f64,
) -> (Vec<f64>, f64, usize, bool) {
    let dim = z0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut s = Simplex::around(z0, spread, f);
    let mut converged = false;
    let mut iters = 0;
    for _ in 0..max_iters {
        iters += 1;
        s.order();
        if s.diameter() < tol {
            converged = true;
            break;
        }
        let worst = s.points.len() - 1;
        let centroid: Vec<f64> = (0..dim)
            .map(|j| s.points[..worst].iter().map(|p| p[j]).sum::<f64>() / worst as f64)
            .collect();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&s.points[worst])
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < s.values[0] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&s.points[worst])
                .map(|(c, w)| c + gamma * (c - w))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                s.points[worst] = expand;
                s.values[worst] = f_expand;
            } else {
                s.points[worst] = reflect;
                s.values[worst] = f_reflect;
            }
        } else if f_reflect < s.values[worst - 1] {
            s.points[worst] = reflect;
            s.values[worst] = f_reflect;
        } else {
            // Contract toward the better of the worst point and its
            // reflection.
            let (anchor, f_anchor) = if f_reflect < s.values[worst] {
                (&reflect, f_reflect)
            } else {
                (&s.points[worst], s.values[worst])
            };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(anchor)
                .map(|(c, a)| c + rho * (a - c))
                .collect();
            let f_contract = f(&contract);
            if f_contract < f_anchor {
                s.points[worst] = contract;
                s.values[worst] = f_contract;
            } else {
                for i in 1..s.points.len() {
                    let shrunk: Vec<f64> = s.points[i]
                        .iter()
                        .zip(&s.points[0])
                        .map(|(p, b)| b + sigma * (p - b))
                        .collect();
                    s.values[i] = f(&shrunk);
                    s.points[i] = shrunk;
                }
            }
        }
    }
    s.order();
    (s.points[0].clone(), s.values[0], iters, converged)
}

/// Fits the model by maximum likelihood. Fails on datasets with no events
/// (no interior maximum exists) and when the starting point has a
/// non-finite log-likelihood.
pub fn fit_mle(
    model: &Model,
    dataset: &SurvivalDataset,
    config: &MleConfig,
    opts: &SolverOptions,
) -> Result<MleFit> {
    reject_all_censored(dataset)?;
    let lik = Likelihood::new(model, dataset, opts.clone())?;
    let p = model.n_free();
    let init = match &config.init {
        Some(v) => {
            if v.len() != p {
                return Err(Error::InvalidConfig(format!(
                    "init has {} entries but the model has {} free parameters",
                    v.len(),
                    p
                )));
            }
            model.expand(v)?;
            v.clone()
        }
        None => vec![1.0; p],
    };
    if !(config.tol > 0.0) || config.max_iters == 0 {
        return Err(Error::InvalidConfig(
            "tol must be positive and max_iters at least 1".into(),
        ));
    }

    let mut evaluations = 0usize;
    let mut objective = |z: &[f64]| -> f64 {
        evaluations += 1;
        let free: Vec<f64> = z.iter().map(|v| v.exp()).collect();
        match lik.log_likelihood(&free) {
            Ok(ll) => -ll,
            Err(_) => f64::INFINITY,
        }
    };

    let z0: Vec<f64> = init.iter().map(|v| v.ln()).collect();
    if !objective(&z0).is_finite() {
        return Err(Error::NonFiniteInit);
    }

    let mut best_z = z0;
    let mut best_val = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for restart in 0..=config.restarts {
        let spread = if restart == 0 { 0.5 } else { 0.1 };
        let (z, val, iters, ok) =
            nelder_mead(&best_z, spread, config.max_iters, config.tol, &mut objective);
        iterations += iters;
        converged = ok;
        if val < best_val {
            best_val = val;
            best_z = z;
        }
    }

    let params: Vec<f64> = best_z.iter().map(|v| v.exp()).collect();
    let full_params = model.expand(&params)?;
    Ok(MleFit {
        params,
        full_params,
        log_likelihood: -best_val,
        converged,
        iterations,
        evaluations,
    })
}
