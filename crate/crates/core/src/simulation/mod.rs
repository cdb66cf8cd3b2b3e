//! Survival-time simulation: exact logistic sampling, grid-based inversion
//! for ODE-defined hazards, administrative censoring and replication
//! studies over a parameter-recovery grid.

mod inversion;
mod pchip;
mod scenario;

pub use inversion::{simulate_by_inversion, GridInverter};
pub use pchip::MonotoneCubic;
pub use scenario::{
    run_scenario, CellSummary, ParamSummary, ScenarioConfig, ScenarioSummary, SimGrid,
};

use rand::Rng;

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::models::{
    HazardResponseParams, LogHazardResponseSystem, LogisticParams, Model,
};
use crate::ode::SolverOptions;

/// Draws survival times from any supported model: the logistic model by
/// its closed-form inverse CDF, ODE-defined models by grid inversion of
/// the cumulative hazard.
///
/// Grid-based draws whose inversion target lies beyond the grid come back
/// as exactly `grid.t_max`; callers must right-censor at or before that
/// horizon for the sample to be valid.
pub enum ModelSampler {
    Closed(LogisticParams),
    Grid(GridInverter),
}

impl ModelSampler {
    pub fn build(
        model: &Model,
        full_params: &[f64],
        grid: &SimGrid,
        opts: &SolverOptions,
    ) -> Result<Self> {
        match model {
            Model::Logistic { .. } => Ok(ModelSampler::Closed(LogisticParams::new(
                full_params[0],
                full_params[1],
                full_params[2],
            )?)),
            Model::HazardResponse { .. } => {
                let system = LogHazardResponseSystem {
                    params: HazardResponseParams::new(
                        full_params[0],
                        full_params[1],
                        full_params[2],
                        full_params[3],
                    )?,
                    h0: full_params[4],
                    q0: full_params[5],
                };
                Ok(ModelSampler::Grid(
                    GridInverter::build(&system, 2, grid.t_max, grid.step, opts)?
                        .with_truncation(),
                ))
            }
        }
    }

    pub fn draw(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
        match self {
            ModelSampler::Closed(p) => simulate_logistic(p, n, rng),
            ModelSampler::Grid(inv) => simulate_by_inversion(inv, n, rng),
        }
    }
}

/// Draws `n` survival times from the logistic hazard model through its
/// closed-form inverse CDF.
pub fn simulate_logistic(
    params: &LogisticParams,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    let mut times = Vec::with_capacity(n);
    while times.len() < n {
        let u: f64 = rng.random();
        if u == 0.0 {
            // quantile(0) is exactly zero, which is not a valid follow-up
            // time; redraw.
            continue;
        }
        times.push(params.quantile(u)?);
    }
    Ok(times)
}

/// Applies administrative censoring at time `c`: follow-up is
/// `min(event, c)` and the status flag records whether the event was
/// observed. `c` may be infinite (no censoring).
pub fn administrative_censor(event_times: &[f64], c: f64) -> Result<SurvivalDataset> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "censoring time must be positive, got {c}"
        )));
    }
    let times: Vec<f64> = event_times.iter().map(|t| t.min(c)).collect();
    let status: Vec<u8> = event_times.iter().map(|t| u8::from(*t <= c)).collect();
    SurvivalDataset::new(times, status)
}

/// Finds the administrative censoring time that induces the target
/// censoring rate, solving S(c) = rate by bisection on [0, horizon] to an
/// absolute tolerance of 1e-8 on the survival scale.
pub fn find_censoring_time(
    model: &Model,
    full_params: &[f64],
    rate: f64,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "target censoring rate must lie in (0, 1), got {rate}"
        )));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    let survival = |c: f64| -> Result<f64> {
        let curves = model.curves(full_params, &[c], opts)?;
        Ok((-curves.cumhaz[0]).exp())
    };
    let s_horizon = survival(horizon)?;
    if s_horizon > rate {
        return Err(Error::UnreachableCensoringRate {
            rate,
            horizon,
            survival: s_horizon,
        });
    }
    let (mut lo, mut hi) = (0.0, horizon);
    let mut mid = 0.5 * horizon;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let s = survival(mid)?;
        if (s - rate).abs() < 1e-8 {
            return Ok(mid);
        }
        if s > rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * horizon {
            break;
        }
    }
    Ok(mid)
}
