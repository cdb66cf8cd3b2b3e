//! Initial value problem integration with dense output.
//!
//! Two steppers are provided: an explicit Dormand-Prince 5(4) pair with a
//! quartic interpolant (the default) and a variable-step BDF2 method with a
//! modified Newton corrector for stiff regimes. Both honour the same
//! tolerance semantics: the weighted RMS of the local error estimate is kept
//! at or below 1, with weights `atol + rtol * |y|` per component.

mod bdf;
mod dopri5;
mod linalg;

use crate::error::{Error, Result};

/// An initial value problem `y'(t) = f(t, y)`, `y(t0) = y0`.
///
/// The survival systems in this crate are autonomous, but `t` is passed to
/// the right-hand side so hazards with an explicit time dependence (such as
/// the Weibull validation system) fit the same interface.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn initial_state(&self) -> Vec<f64>;

    /// Time at which the initial state is given. Zero for the survival
    /// systems; positive for systems that are singular at the origin.
    fn initial_time(&self) -> f64 {
        0.0
    }

    /// Writes `f(t, y)` into `dydt` (length `dim`).
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);

    fn has_jacobian(&self) -> bool {
        false
    }

    /// Writes the row-major `dim x dim` Jacobian `df/dy` into `jac`. Only
    /// called when `has_jacobian` returns true.
    fn jacobian(&self, _t: f64, _y: &[f64], _jac: &mut [f64]) {
        unreachable!("jacobian called on a system without one")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dopri5,
    Bdf,
}

/// Step-size and tolerance settings for the integrators.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub method: Method,
    pub max_steps: usize,
    /// Initial step size; estimated from the problem when absent.
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            method: Method::Dopri5,
            max_steps: 1_000_000,
            initial_step: None,
            max_step: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol.is_finite() && self.rtol > 0.0) {
            return Err(Error::InvalidConfig(format!("rtol must be positive, got {}", self.rtol)));
        }
        if !(self.atol.is_finite() && self.atol > 0.0) {
            return Err(Error::InvalidConfig(format!("atol must be positive, got {}", self.atol)));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        for (name, v) in [("initial_step", self.initial_step), ("max_step", self.max_step)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Work counters reported alongside a solution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct SolveStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub jacobian_evals: usize,
}

/// States of a system sampled at the requested times, in row-major layout.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    dim: usize,
    states: Vec<f64>,
    pub stats: SolveStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// State vector at the `i`-th requested time.
    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    /// Copies component `j` across all sampled times.
    pub fn component(&self, j: usize) -> Vec<f64> {
        assert!(j < self.dim, "component {j} out of range for dim {}", self.dim);
        self.times
            .iter()
            .enumerate()
            .map(|(i, _)| self.states[i * self.dim + j])
            .collect()
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }
}

/// Collects interpolated states at the requested output times.
pub(crate) struct OutputSink<'a> {
    times: &'a [f64],
    next: usize,
    dim: usize,
    states: Vec<f64>,
}

impl<'a> OutputSink<'a> {
    fn new(times: &'a [f64], dim: usize) -> Self {
        Self {
            times,
            next: 0,
            dim,
            states: Vec::with_capacity(times.len() * dim),
        }
    }

    /// Emits every requested time equal to the initial time.
    fn emit_initial(&mut self, t0: f64, y0: &[f64]) {
        while self.next < self.times.len() && self.times[self.next] <= t0 {
            self.states.extend_from_slice(y0);
            self.next += 1;
        }
    }

    fn done(&self) -> bool {
        self.next >= self.times.len()
    }

    /// Emits every pending requested time `s <= t_hi`, filling the state via
    /// `interp(s, out)`.
    fn emit_through<F: FnMut(f64, &mut [f64])>(&mut self, t_hi: f64, mut interp: F) {
        let dim = self.dim;
        while self.next < self.times.len() && self.times[self.next] <= t_hi {
            let s = self.times[self.next];
            let start = self.states.len();
            self.states.resize(start + dim, 0.0);
            interp(s, &mut self.states[start..start + dim]);
            self.next += 1;
        }
    }

    fn finish(self, stats: SolveStats) -> Trajectory {
        debug_assert!(self.done());
        Trajectory {
            times: self.times.to_vec(),
            dim: self.dim,
            states: self.states,
            stats,
        }
    }
}

fn validate_times(system: &dyn OdeSystem, times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidConfig("no output times requested".into()));
    }
    let t0 = system.initial_time();
    if !times.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidConfig("output times must be finite".into()));
    }
    if times[0] < t0 {
        return Err(Error::InvalidConfig(format!(
            "first output time {} precedes the initial time {}",
            times[0], t0
        )));
    }
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("output times must be sorted".into()));
    }
    Ok(())
}

/// Integrates the system and returns its state at each requested time.
/// `times` must be sorted and must not precede the system's initial time.
pub fn integrate_at(
    system: &dyn OdeSystem,
    times: &[f64],
    options: &SolverOptions,
) -> Result<Trajectory> {
    options.validate()?;
    validate_times(system, times)?;
    let sink = OutputSink::new(times, system.dim());
    match options.method {
        Method::Dopri5 => dopri5::solve(system, sink, options),
        Method::Bdf => bdf::solve(system, sink, options),
    }
}

/// Integrates on the uniform grid `{t0, t0 + step, ..., t_max}`. The number
/// of grid points is `floor((t_max - t0)/step) + 1` up to rounding guard.
pub fn integrate_grid(
    system: &dyn OdeSystem,
    t_max: f64,
    step: f64,
    options: &SolverOptions,
) -> Result<Trajectory> {
    let t0 = system.initial_time();
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidConfig(format!("grid step must be positive, got {step}")));
    }
    if !(t_max.is_finite() && t_max > t0) {
        return Err(Error::InvalidConfig(format!(
            "t_max must exceed the initial time {t0}, got {t_max}"
        )));
    }
    let n = ((t_max - t0) / step + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..n).map(|i| t0 + i as f64 * step).collect();
    integrate_at(system, &times, options)
}

/// Compares the system's analytic Jacobian against central finite
/// differences at `(t, y)` and returns the largest absolute deviation.
pub fn check_jacobian(system: &dyn OdeSystem, t: f64, y: &[f64], fd_step: f64) -> Result<f64> {
    if !system.has_jacobian() {
        return Err(Error::NoJacobian);
    }
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "finite difference step must be positive, got {fd_step}"
        )));
    }
    let dim = system.dim();
    assert_eq!(y.len(), dim, "state length does not match system dimension");

    let mut analytic = vec![0.0; dim * dim];
    system.jacobian(t, y, &mut analytic);

    let mut y_lo = y.to_vec();
    let mut y_hi = y.to_vec();
    let mut f_lo = vec![0.0; dim];
    let mut f_hi = vec![0.0; dim];
    let mut max_dev: f64 = 0.0;
    for j in 0..dim {
        y_hi[j] = y[j] + fd_step;
        y_lo[j] = y[j] - fd_step;
        system.rhs(t, &y_hi, &mut f_hi);
        system.rhs(t, &y_lo, &mut f_lo);
        for i in 0..dim {
            let fd = (f_hi[i] - f_lo[i]) / (2.0 * fd_step);
            max_dev = max_dev.max((analytic[i * dim + j] - fd).abs());
        }
        y_hi[j] = y[j];
        y_lo[j] = y[j];
    }
    Ok(max_dev)
}

/// Weighted RMS norm used by the error controllers.
pub(crate) fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            let r = e / sc;
            r * r
        })
        .sum();
    (sum / n).sqrt()
}

#[cfg(test)]
mod tests;
