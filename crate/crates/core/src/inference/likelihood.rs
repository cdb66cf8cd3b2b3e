//! Right-censored log-likelihood for hazard models:
//! sum of delta_i ln h(t_i) minus sum of H(t_i).

use crate::data::SurvivalDataset;
use crate::error::{Error, ErrorKind, Result};
use crate::models::Model;
use crate::ode::SolverOptions;

/// Likelihood evaluator bound to a model and dataset. Observation times are
/// sorted and deduplicated once, with per-time event and observation counts,
/// so each evaluation costs a single curve solve plus an O(unique) gather
/// whose summation order does not depend on the input ordering.
pub struct Likelihood<'a> {
    model: &'a Model,
    unique_times: Vec<f64>,
    events_at: Vec<f64>,
    count_at: Vec<f64>,
    n_events: usize,
    opts: SolverOptions,
}

impl<'a> Likelihood<'a> {
    pub fn new(model: &'a Model, dataset: &'a SurvivalDataset, opts: SolverOptions) -> Result<Self> {
        opts.validate()?;
        let times = dataset.times();
        let status = dataset.status();
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let mut unique_times: Vec<f64> = Vec::with_capacity(times.len());
        let mut events_at: Vec<f64> = Vec::with_capacity(times.len());
        let mut count_at: Vec<f64> = Vec::with_capacity(times.len());
        for &i in &order {
            if unique_times.last() != Some(&times[i]) {
                unique_times.push(times[i]);
                events_at.push(0.0);
                count_at.push(0.0);
            }
            *events_at.last_mut().unwrap() += f64::from(status[i]);
            *count_at.last_mut().unwrap() += 1.0;
        }
        Ok(Self {
            model,
            unique_times,
            events_at,
            count_at,
            n_events: status.iter().filter(|s| **s == 1).count(),
            opts,
        })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }

    /// Log-likelihood at a free-parameter vector. Solver breakdowns map to
    /// -inf so that samplers and optimisers treat the point as infeasible;
    /// structurally invalid inputs (wrong length, non-positive values) are
    /// hard errors.
    pub fn log_likelihood(&self, free: &[f64]) -> Result<f64> {
        let full = self.model.expand(free)?;
        self.log_likelihood_full(&full)
    }

    /// Same as [`Self::log_likelihood`] but on the full parameter vector.
    pub fn log_likelihood_full(&self, full: &[f64]) -> Result<f64> {
        let curves = match self.model.curves(full, &self.unique_times, &self.opts) {
            Ok(c) => c,
            Err(e) if e.kind() == ErrorKind::Numeric => return Ok(f64::NEG_INFINITY),
            Err(e) => return Err(e),
        };
        let mut ll = 0.0;
        for (j, (&events, &count)) in self.events_at.iter().zip(&self.count_at).enumerate() {
            if events > 0.0 {
                let h = curves.hazard[j];
                if h <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                ll += events * h.ln();
            }
            ll -= count * curves.cumhaz[j];
        }
        if ll.is_nan() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(ll)
    }
}

/// Guards fits whose likelihood has no interior maximum: with no observed
/// events the likelihood increases without bound as the hazard shrinks to
/// zero.
pub fn reject_all_censored(dataset: &SurvivalDataset) -> Result<()> {
    if dataset.censoring_summary().events == 0 {
        return Err(Error::AllCensored);
    }
    Ok(())
}
