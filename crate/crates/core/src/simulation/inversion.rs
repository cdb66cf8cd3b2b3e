//! Survival-time sampling by cumulative-hazard inversion.
//!
//! A survival time with cumulative hazard H satisfies H(T) ~ Exp(1), so
//! sampling reduces to drawing x ~ Exp(1) and solving H(t) = x. For models
//! without a closed-form inverse, H is tabulated on a dense integration
//! grid and inverted through a monotone interpolant fitted with the H
//! values as abscissae and the grid times as ordinates.

use rand::Rng;

use super::pchip::MonotoneCubic;
use crate::error::{Error, Result};
use crate::ode::{integrate_grid, OdeSystem, SolverOptions, Trajectory};

/// Inverse of a tabulated cumulative hazard.
#[derive(Debug, Clone)]
pub struct GridInverter {
    inverse: MonotoneCubic,
    h_max: f64,
    t_max: f64,
    truncate: bool,
}

impl GridInverter {
    /// Builds the inverter from a trajectory whose component
    /// `cumhaz_index` is the cumulative hazard. The column must be
    /// strictly increasing, which fails loudly when the solved hazard was
    /// not positive.
    pub fn from_trajectory(trajectory: &Trajectory, cumhaz_index: usize) -> Result<Self> {
        let cumhaz = trajectory.component(cumhaz_index);
        let times = trajectory.times().to_vec();
        let t_max = *times.last().unwrap();
        let h_max = *cumhaz.last().unwrap();
        let inverse = MonotoneCubic::fit(cumhaz, times)?;
        Ok(Self {
            inverse,
            h_max,
            t_max,
            truncate: false,
        })
    }

    /// Integrates `system` on the uniform grid `{t0, ..., t_max}` and
    /// inverts its cumulative-hazard component.
    pub fn build(
        system: &dyn OdeSystem,
        cumhaz_index: usize,
        t_max: f64,
        step: f64,
        opts: &SolverOptions,
    ) -> Result<Self> {
        let trajectory = integrate_grid(system, t_max, step, opts)?;
        Self::from_trajectory(&trajectory, cumhaz_index)
    }

    /// Maps inversion targets beyond the grid to `t_max` instead of
    /// failing. Only sound when the caller censors at or before `t_max`.
    pub fn with_truncation(mut self) -> Self {
        self.truncate = true;
        self
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Largest invertible cumulative-hazard value.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// Solves H(t) = target. Targets beyond the tabulated range fail
    /// unless truncation was requested, in which case they map to `t_max`.
    pub fn invert(&self, target: f64) -> Result<f64> {
        if !(target >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "cumulative-hazard target must be non-negative, got {target}"
            )));
        }
        if target > self.h_max {
            if self.truncate {
                return Ok(self.t_max);
            }
            return Err(Error::TargetBeyondGrid {
                target,
                lo: 0.0,
                hi: self.h_max,
            });
        }
        Ok(self.inverse.eval(target))
    }
}

/// Draws `n` survival times by inversion: x ~ Exp(1), t = H^{-1}(x).
pub fn simulate_by_inversion(
    inverter: &GridInverter,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        // 1 - U keeps the argument strictly positive for U in [0, 1).
        let x = -(-rng.random::<f64>()).ln_1p();
        times.push(inverter.invert(x)?);
    }
    Ok(times)
}
