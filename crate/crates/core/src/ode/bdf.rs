//! Variable-step BDF of order 1-2 with a modified Newton corrector, for
//! stiff systems. The first step is backward Euler; subsequent steps use the
//! two-step variable-coefficient BDF2 formula with the step ratio capped
//! below its zero-stability bound. Dense output is cubic Hermite on each
//! step, which matches the order of the method.

use super::linalg::Lu;
use super::{error_norm, OdeSystem, OutputSink, SolveStats, SolverOptions, Trajectory};
use crate::error::{Error, Result};

const NEWTON_MAX_ITERS: usize = 8;
const NEWTON_TOL: f64 = 0.03;
const MAX_GROWTH: f64 = 2.0;

struct NewtonOutcome {
    y_new: Vec<f64>,
    converged: bool,
}

/// Solves `v = rhs_const + gamma * f(t_new, v)` by modified Newton with the
/// iteration matrix `I - gamma * J` frozen at the predictor.
#[allow(clippy::too_many_arguments)]
fn newton_solve(
    system: &dyn OdeSystem,
    t_new: f64,
    gamma: f64,
    rhs_const: &[f64],
    y_pred: &[f64],
    opts: &SolverOptions,
    stats: &mut SolveStats,
    jac: &mut Vec<f64>,
    f_buf: &mut Vec<f64>,
) -> NewtonOutcome {
    let dim = system.dim();

    // Iteration matrix from the Jacobian at the predictor.
    if system.has_jacobian() {
        system.jacobian(t_new, y_pred, jac);
    } else {
        // Forward differences, one rhs call per column.
        let mut y_bump = y_pred.to_vec();
        let mut f_base = vec![0.0; dim];
        system.rhs(t_new, y_pred, &mut f_base);
        stats.rhs_evals += 1;
        for j in 0..dim {
            let delta = f64::EPSILON.sqrt() * y_pred[j].abs().max(1e-3);
            y_bump[j] = y_pred[j] + delta;
            system.rhs(t_new, &y_bump, f_buf);
            stats.rhs_evals += 1;
            for i in 0..dim {
                jac[i * dim + j] = (f_buf[i] - f_base[i]) / delta;
            }
            y_bump[j] = y_pred[j];
        }
    }
    stats.jacobian_evals += 1;

    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            m[i * dim + j] = f64::from(u8::from(i == j)) - gamma * jac[i * dim + j];
        }
    }
    let Some(lu) = Lu::factor(m, dim) else {
        return NewtonOutcome {
            y_new: y_pred.to_vec(),
            converged: false,
        };
    };

    let mut v = y_pred.to_vec();
    let mut residual = vec![0.0; dim];
    let mut dn_prev = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITERS {
        system.rhs(t_new, &v, f_buf);
        stats.rhs_evals += 1;
        for i in 0..dim {
            residual[i] = rhs_const[i] + gamma * f_buf[i] - v[i];
        }
        if !residual.iter().all(|r| r.is_finite()) {
            return NewtonOutcome {
                y_new: v,
                converged: false,
            };
        }
        lu.solve(&mut residual);
        for i in 0..dim {
            v[i] += residual[i];
        }
        let dn = error_norm(&residual, &v, &v, opts.rtol, opts.atol);
        if dn < NEWTON_TOL {
            return NewtonOutcome {
                y_new: v,
                converged: true,
            };
        }
        if dn > 2.0 * dn_prev {
            break;
        }
        dn_prev = dn;
    }
    NewtonOutcome {
        y_new: v,
        converged: false,
    }
}

pub(super) fn solve(
    system: &dyn OdeSystem,
    mut sink: OutputSink<'_>,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    let dim = system.dim();
    let t0 = system.initial_time();
    let t_end = *sink.times.last().unwrap();
    let mut stats = SolveStats::default();

    let mut y = system.initial_state();
    assert_eq!(y.len(), dim, "initial state length does not match system dimension");
    sink.emit_initial(t0, &y);
    if sink.done() {
        return Ok(sink.finish(stats));
    }

    let mut f_curr = vec![0.0; dim];
    system.rhs(t0, &y, &mut f_curr);
    stats.rhs_evals += 1;
    if !f_curr.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { t: t0 });
    }

    // Conservative first step: limited by both the rhs scale and the span.
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let fn_norm = error_norm(&f_curr, &y, &y, opts.rtol, opts.atol);
        let span = t_end - t0;
        if fn_norm > 0.0 {
            (1.0 / fn_norm).min(span / 10.0)
        } else {
            span / 10.0
        }
    });

    let mut t = t0;
    let mut hist: Option<(f64, Vec<f64>, Vec<f64>)> = None; // (t_prev, y_prev, f_prev)
    let mut jac = vec![0.0; dim * dim];
    let mut f_buf = vec![0.0; dim];
    let mut rhs_const = vec![0.0; dim];

    while !sink.done() {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(Error::MaxSteps {
                max_steps: opts.max_steps,
                t,
            });
        }
        if let Some(max_step) = opts.max_step {
            h = h.min(max_step);
        }
        let mut final_step = false;
        if t + h >= t_end {
            h = t_end - t;
            final_step = true;
        }
        if h <= f64::EPSILON * 16.0 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let t_new = if final_step { t_end } else { t + h };

        // Predictor and corrector equation coefficients.
        let (y_pred, gamma, order) = match &hist {
            None => {
                let y_pred: Vec<f64> = y.iter().zip(&f_curr).map(|(a, f)| a + h * f).collect();
                rhs_const.copy_from_slice(&y);
                (y_pred, h, 1)
            }
            Some((t_prev, y_prev, f_prev)) => {
                let h_prev = t - t_prev;
                let rho = h / h_prev;
                let denom = 1.0 + 2.0 * rho;
                let a = (1.0 + rho) * (1.0 + rho) / denom;
                let b = rho * rho / denom;
                let c = (1.0 + rho) / denom;
                let mut y_pred = vec![0.0; dim];
                for i in 0..dim {
                    let ypp = (f_curr[i] - f_prev[i]) / h_prev;
                    y_pred[i] = y[i] + h * f_curr[i] + 0.5 * h * h * ypp;
                    rhs_const[i] = a * y[i] - b * y_prev[i];
                }
                (y_pred, h * c, 2)
            }
        };

        let outcome = newton_solve(
            system, t_new, gamma, &rhs_const, &y_pred, opts, &mut stats, &mut jac, &mut f_buf,
        );
        if !outcome.converged {
            stats.rejected += 1;
            h *= 0.25;
            continue;
        }
        let y_new = outcome.y_new;

        system.rhs(t_new, &y_new, &mut f_buf);
        stats.rhs_evals += 1;
        let f_new = f_buf.clone();

        let est: Vec<f64> = if order == 1 {
            f_new
                .iter()
                .zip(&f_curr)
                .map(|(a, b)| 0.5 * h * (a - b))
                .collect()
        } else {
            y_new.iter().zip(&y_pred).map(|(a, b)| 0.5 * (a - b)).collect()
        };
        let err = error_norm(&est, &y, &y_new, opts.rtol, opts.atol);
        let exponent = -1.0 / (order as f64 + 1.0);

        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.25;
            continue;
        }

        if err <= 1.0 {
            if sink.times[sink.next] <= t_new {
                let (t_lo, y_lo, f_lo) = (t, y.clone(), f_curr.clone());
                sink.emit_through(t_new, |s, out| {
                    let x = ((s - t_lo) / h).clamp(0.0, 1.0);
                    let x1 = 1.0 - x;
                    let h00 = (1.0 + 2.0 * x) * x1 * x1;
                    let h10 = x * x1 * x1;
                    let h01 = x * x * (3.0 - 2.0 * x);
                    let h11 = x * x * (x - 1.0);
                    for i in 0..out.len() {
                        out[i] = h00 * y_lo[i]
                            + h10 * h * f_lo[i]
                            + h01 * y_new[i]
                            + h11 * h * f_new[i];
                    }
                });
            }

            hist = Some((t, std::mem::take(&mut y), std::mem::replace(&mut f_curr, f_new)));
            t = t_new;
            y = y_new;
            stats.steps += 1;
            h *= (0.9 * err.powf(exponent)).clamp(0.2, MAX_GROWTH);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(exponent)).clamp(0.2, 0.9);
        }
    }

    Ok(sink.finish(stats))
}
