//! Dormand-Prince 5(4) embedded pair with the quartic dense-output
//! interpolant, first-same-as-last stage reuse and standard PI-free step
//! control (safety 0.9, growth clamped to [0.2, 10]).

use super::{error_norm, OdeSystem, OutputSink, SolveStats, SolverOptions, Trajectory};
use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth-order solution weights; the seventh stage is f at the step end.
const A7: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];

// Difference between the fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Dense-output weights for the fifth interpolation coefficient.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Hairer's starting step heuristic for a fifth-order method.
fn initial_step(
    system: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    t_end: f64,
    opts: &SolverOptions,
    stats: &mut SolveStats,
) -> f64 {
    let dim = system.dim();
    let sc: Vec<f64> = y0.iter().map(|y| opts.atol + opts.rtol * y.abs()).collect();
    let norm = |v: &[f64]| -> f64 {
        let s: f64 = v.iter().zip(&sc).map(|(x, w)| (x / w) * (x / w)).sum();
        (s / dim as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(t_end - t0);

    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; dim];
    system.rhs(t0 + h0, &y1, &mut f1);
    stats.rhs_evals += 1;
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&df) / h0;

    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let mut h = (100.0 * h0).min(h1).min(t_end - t0);
    if let Some(max_step) = opts.max_step {
        h = h.min(max_step);
    }
    h
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

    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; dim]).collect();
    system.rhs(t0, &y, &mut k[0]);
    stats.rhs_evals += 1;
    if !k[0].iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { t: t0 });
    }

    let mut t = t0;
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| initial_step(system, t0, &y, &k[0], t_end, opts, &mut stats));
    let mut y_next = vec![0.0; dim];
    let mut y_stage = vec![0.0; dim];
    let mut err_vec = vec![0.0; dim];
    let mut rejected_last = false;
    let mut nonfinite_seen = false;

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
            return if nonfinite_seen {
                Err(Error::NonFinite { t })
            } else {
                Err(Error::StepUnderflow { t })
            };
        }

        // Stages 2..6.
        let tableau: [(&[f64], f64); 5] = [
            (A2.as_slice(), C[1]),
            (A3.as_slice(), C[2]),
            (A4.as_slice(), C[3]),
            (A5.as_slice(), C[4]),
            (A6.as_slice(), C[5]),
        ];
        for (s, (row, c)) in tableau.iter().enumerate() {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, a) in row.iter().enumerate() {
                    acc += a * k[j][i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            system.rhs(t + c * h, &y_stage, &mut k[s + 1]);
            stats.rhs_evals += 1;
        }

        // Fifth-order solution and its derivative (stage 7, FSAL).
        for i in 0..dim {
            let mut acc = 0.0;
            for (j, a) in A7.iter().enumerate() {
                acc += a * k[j][i];
            }
            y_next[i] = y[i] + h * acc;
        }
        system.rhs(t + h, &y_next, &mut k[6]);
        stats.rhs_evals += 1;

        for i in 0..dim {
            let mut acc = 0.0;
            for (j, e) in E.iter().enumerate() {
                acc += e * k[j][i];
            }
            err_vec[i] = h * acc;
        }
        let err = error_norm(&err_vec, &y, &y_next, opts.rtol, opts.atol);

        if !err.is_finite() {
            nonfinite_seen = true;
            stats.rejected += 1;
            rejected_last = true;
            h *= 0.5;
            continue;
        }
        nonfinite_seen = false;

        if err <= 1.0 {
            // Quartic interpolant over [t, t + h].
            let t_new = if final_step { t_end } else { t + h };
            if sink.times[sink.next] <= t_new {
                let mut rcont = vec![[0.0f64; 5]; dim];
                for i in 0..dim {
                    let dy = y_next[i] - y[i];
                    let bspl = h * k[0][i] - dy;
                    let mut dval = 0.0;
                    for (j, d) in D.iter().enumerate() {
                        dval += d * k[j][i];
                    }
                    rcont[i] = [y[i], dy, bspl, dy - h * k[6][i] - bspl, h * dval];
                }
                let t_lo = t;
                sink.emit_through(t_new, |s, out| {
                    let theta = ((s - t_lo) / h).clamp(0.0, 1.0);
                    let th1 = 1.0 - theta;
                    for (i, rc) in rcont.iter().enumerate() {
                        out[i] = rc[0]
                            + theta * (rc[1] + th1 * (rc[2] + theta * (rc[3] + th1 * rc[4])));
                    }
                });
            }

            t = t_new;
            std::mem::swap(&mut y, &mut y_next);
            k.swap(0, 6);
            stats.steps += 1;

            let facmax = if rejected_last { 1.0 } else { 10.0 };
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, facmax);
            h *= fac;
            rejected_last = false;
        } else {
            stats.rejected += 1;
            rejected_last = true;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
    }

    Ok(sink.finish(stats))
}
