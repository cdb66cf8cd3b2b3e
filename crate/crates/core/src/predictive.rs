//! Posterior predictive curves and steady-state summaries.
//!
//! For a chain of draws theta^(1), ..., theta^(M) the predictive survival
//! is the Monte Carlo average of exp(-H(t | theta^(j))) and the predictive
//! hazard is the ratio estimator
//!
//! ```text
//! h_pred(t) = sum_j h(t | theta_j) exp(-H(t | theta_j))
//!             ----------------------------------------
//!             sum_j             exp(-H(t | theta_j))
//! ```
//!
//! that is, the hazard of the posterior-averaged predictive density, not
//! the average of the hazards. All curve operations share one set of
//! per-draw solves over the requested grid.

use crate::error::{Error, ErrorKind, Result};
use crate::inference::{sorted_quantile, Chain};
use crate::models::{steady_state, HazardResponseParams, Model};
use crate::ode::SolverOptions;

/// Which per-draw curve a band summarises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Hazard,
    Survival,
    Response,
}

/// A curve on a time grid with an optional stack of pointwise quantile
/// bands, one row per level in `levels`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PredictiveCurve {
    pub times: Vec<f64>,
    pub estimate: Vec<f64>,
    pub levels: Vec<f64>,
    pub bands: Vec<Vec<f64>>,
    /// Draws dropped because the solver failed on them (at most 1% of the
    /// chain).
    pub excluded: usize,
}

impl PredictiveCurve {
    /// Plot-ready export: `time,estimate[,q<level>...]` per row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("time,estimate");
        for level in &self.levels {
            out.push_str(&format!(",q{level}"));
        }
        out.push('\n');
        for i in 0..self.times.len() {
            out.push_str(&format!("{},{}", self.times[i], self.estimate[i]));
            for band in &self.bands {
                out.push_str(&format!(",{}", band[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Per-draw hazard/cumulative-hazard/response values over a shared grid,
/// solved once and reused by every estimator.
pub struct PredictiveEnsemble {
    times: Vec<f64>,
    /// Row j holds draw j's values over the grid.
    hazard: Vec<Vec<f64>>,
    cumhaz: Vec<Vec<f64>>,
    response: Option<Vec<Vec<f64>>>,
    excluded: usize,
}

impl PredictiveEnsemble {
    /// Solves the model curves for every chain draw. Draws on which the
    /// solver breaks down are excluded, up to 1% of the chain; structural
    /// failures (wrong dimension, invalid fixed parameters) abort.
    pub fn new(chain: &Chain, model: &Model, t_grid: &[f64], opts: &SolverOptions) -> Result<Self> {
        if t_grid.is_empty() {
            return Err(Error::InvalidConfig("empty time grid".into()));
        }
        if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid[0] < 0.0 {
            return Err(Error::InvalidConfig(
                "time grid must be non-negative and strictly increasing".into(),
            ));
        }
        let total = chain.n_draws();
        let permitted = total / 100;
        let mut hazard = Vec::with_capacity(total);
        let mut cumhaz = Vec::with_capacity(total);
        let wants_response = matches!(model, Model::HazardResponse { .. });
        let mut response: Option<Vec<Vec<f64>>> = wants_response.then(Vec::new);
        let mut excluded = 0usize;
        for i in 0..total {
            let full = model.expand(chain.draw(i))?;
            match model.curves(&full, t_grid, opts) {
                Ok(curves) => {
                    hazard.push(curves.hazard);
                    cumhaz.push(curves.cumhaz);
                    if let (Some(all), Some(r)) = (response.as_mut(), curves.response) {
                        all.push(r);
                    }
                }
                Err(e) if e.kind() == ErrorKind::Numeric => {
                    excluded += 1;
                    if excluded > permitted {
                        return Err(Error::TooManyFailedDraws {
                            failed: excluded,
                            total,
                            permitted,
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Self {
            times: t_grid.to_vec(),
            hazard,
            cumhaz,
            response,
            excluded,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_used(&self) -> usize {
        self.hazard.len()
    }

    pub fn excluded(&self) -> usize {
        self.excluded
    }

    /// Predictive survival: the mean of exp(-H) across draws. Exactly 1 at
    /// t = 0 because every draw has H(0) = 0.
    pub fn survival(&self) -> PredictiveCurve {
        let m = self.n_used() as f64;
        let estimate = (0..self.times.len())
            .map(|i| {
                let mut vals: Vec<f64> =
                    self.cumhaz.iter().map(|row| (-row[i]).exp()).collect();
                canonical_sum(&mut vals) / m
            })
            .collect();
        self.curve(estimate)
    }

    /// Predictive hazard: the density-weighted ratio estimator.
    pub fn hazard(&self) -> PredictiveCurve {
        let estimate = (0..self.times.len())
            .map(|i| {
                let mut num: Vec<f64> = self
                    .hazard
                    .iter()
                    .zip(&self.cumhaz)
                    .map(|(h, cum)| h[i] * (-cum[i]).exp())
                    .collect();
                let mut den: Vec<f64> =
                    self.cumhaz.iter().map(|row| (-row[i]).exp()).collect();
                canonical_sum(&mut num) / canonical_sum(&mut den)
            })
            .collect();
        self.curve(estimate)
    }

    /// Per-draw values of `component` at grid index `i`.
    fn component_values(&self, component: Component, i: usize) -> Result<Vec<f64>> {
        Ok(match component {
            Component::Hazard => self.hazard.iter().map(|row| row[i]).collect(),
            Component::Survival => self.cumhaz.iter().map(|row| (-row[i]).exp()).collect(),
            Component::Response => {
                let response = self.response.as_ref().ok_or_else(|| {
                    Error::InvalidConfig(
                        "response bands are only defined for the hazard-response model".into(),
                    )
                })?;
                response.iter().map(|row| row[i]).collect()
            }
        })
    }

    /// Pointwise quantile bands of one component, with the pointwise mean
    /// as the central estimate (the median is available as level 0.5).
    pub fn bands(&self, component: Component, levels: &[f64]) -> Result<PredictiveCurve> {
        if levels.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::InvalidConfig(format!(
                "quantile levels must lie in (0, 1), got {levels:?}"
            )));
        }
        let m = self.n_used() as f64;
        let mut estimate = Vec::with_capacity(self.times.len());
        let mut bands = vec![Vec::with_capacity(self.times.len()); levels.len()];
        for i in 0..self.times.len() {
            let mut vals = self.component_values(component, i)?;
            vals.sort_by(f64::total_cmp);
            estimate.push(vals.iter().sum::<f64>() / m);
            for (band, &p) in bands.iter_mut().zip(levels) {
                band.push(sorted_quantile(&vals, p));
            }
        }
        let mut curve = self.curve(estimate);
        curve.levels = levels.to_vec();
        curve.bands = bands;
        Ok(curve)
    }

    fn curve(&self, estimate: Vec<f64>) -> PredictiveCurve {
        PredictiveCurve {
            times: self.times.clone(),
            estimate,
            levels: Vec::new(),
            bands: Vec::new(),
            excluded: self.excluded,
        }
    }
}

/// Sums after sorting so the result does not depend on draw order.
fn canonical_sum(vals: &mut [f64]) -> f64 {
    vals.sort_by(f64::total_cmp);
    vals.iter().sum()
}

pub fn predictive_survival(
    chain: &Chain,
    model: &Model,
    t_grid: &[f64],
    opts: &SolverOptions,
) -> Result<PredictiveCurve> {
    Ok(PredictiveEnsemble::new(chain, model, t_grid, opts)?.survival())
}

pub fn predictive_hazard(
    chain: &Chain,
    model: &Model,
    t_grid: &[f64],
    opts: &SolverOptions,
) -> Result<PredictiveCurve> {
    Ok(PredictiveEnsemble::new(chain, model, t_grid, opts)?.hazard())
}

pub fn pointwise_bands(
    chain: &Chain,
    model: &Model,
    t_grid: &[f64],
    levels: &[f64],
    component: Component,
    opts: &SolverOptions,
) -> Result<PredictiveCurve> {
    PredictiveEnsemble::new(chain, model, t_grid, opts)?.bands(component, levels)
}

/// Posterior steady-state summary for a hazard-response chain.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EquilibriumSummary {
    /// Fraction of draws whose steady state is the attracting coexistence
    /// equilibrium (h* > 0, q* > 0, d > 0).
    pub p_equilibrium: f64,
    /// Steady-state hazard values, equilibrium draws only.
    pub h_star: Vec<f64>,
    /// Steady-state response values, equilibrium draws only.
    pub q_star: Vec<f64>,
    /// Draws with a numerically degenerate interaction discriminant;
    /// counted as non-equilibrium.
    pub degenerate: usize,
}

/// Classifies every draw's steady state. Only meaningful for the
/// hazard-response model.
pub fn equilibrium_summary(chain: &Chain, model: &Model) -> Result<EquilibriumSummary> {
    if !matches!(model, Model::HazardResponse { .. }) {
        return Err(Error::InvalidConfig(
            "equilibrium summaries require the hazard-response model".into(),
        ));
    }
    let total = chain.n_draws();
    let mut h_star = Vec::new();
    let mut q_star = Vec::new();
    let mut degenerate = 0usize;
    for i in 0..total {
        let full = model.expand(chain.draw(i))?;
        let params = HazardResponseParams::new(full[0], full[1], full[2], full[3])?;
        match steady_state(&params) {
            Ok(ss) if ss.is_equilibrium => {
                h_star.push(ss.h_star);
                q_star.push(ss.q_star);
            }
            Ok(_) => {}
            Err(Error::DegenerateSteadyState { .. }) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(EquilibriumSummary {
        p_equilibrium: h_star.len() as f64 / total as f64,
        h_star,
        q_star,
        degenerate,
    })
}
