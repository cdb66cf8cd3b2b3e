use approx::assert_relative_eq;

use super::*;
use crate::error::Error;

/// y' = -y, exact solution e^{-t}.
struct Decay;

impl OdeSystem for Decay {
    fn dim(&self) -> usize {
        1
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![1.0]
    }
    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        dydt[0] = -y[0];
    }
}

/// Constant hazard: state (h, H) with h' = 0, H' = h.
struct ConstHazard {
    h0: f64,
}

impl OdeSystem for ConstHazard {
    fn dim(&self) -> usize {
        2
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![self.h0, 0.0]
    }
    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        dydt[0] = 0.0;
        dydt[1] = y[0];
    }
}

/// Logistic hazard growth with its cumulative hazard, state (h, H).
struct Logistic {
    lambda: f64,
    kappa: f64,
    h0: f64,
}

impl Logistic {
    /// Closed form h(t) = kappa h0 / (h0 + (kappa - h0) e^{-lambda t}).
    fn hazard(&self, t: f64) -> f64 {
        self.kappa * self.h0 / (self.h0 + (self.kappa - self.h0) * (-self.lambda * t).exp())
    }

    /// Closed form H(t) = kappa t + (kappa/lambda) ln((h0 + (kappa - h0) e^{-lambda t})/kappa).
    fn cumhaz(&self, t: f64) -> f64 {
        self.kappa * t
            + self.kappa / self.lambda
                * ((self.h0 + (self.kappa - self.h0) * (-self.lambda * t).exp()) / self.kappa).ln()
    }
}

impl OdeSystem for Logistic {
    fn dim(&self) -> usize {
        2
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![self.h0, 0.0]
    }
    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        dydt[0] = self.lambda * y[0] * (1.0 - y[0] / self.kappa);
        dydt[1] = y[0];
    }
    fn has_jacobian(&self) -> bool {
        true
    }
    fn jacobian(&self, _t: f64, y: &[f64], jac: &mut [f64]) {
        jac[0] = self.lambda * (1.0 - 2.0 * y[0] / self.kappa);
        jac[1] = 0.0;
        jac[2] = 1.0;
        jac[3] = 0.0;
    }
}

/// y' = -1000 (y - sin t) + cos t with y(0) = 0; exact solution sin t after
/// the decayed transient (which is identically zero here).
struct StiffRelax;

impl OdeSystem for StiffRelax {
    fn dim(&self) -> usize {
        1
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0]
    }
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        dydt[0] = -1000.0 * (y[0] - t.sin()) + t.cos();
    }
}

/// y' = 1/(1 - t): blows up at t = 1, so no solution reaches t = 2.
struct Singular;

impl OdeSystem for Singular {
    fn dim(&self) -> usize {
        1
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0]
    }
    fn rhs(&self, t: f64, _y: &[f64], dydt: &mut [f64]) {
        dydt[0] = (1.0 - t).recip();
    }
}

/// Produces NaN derivatives past t = 0.5.
struct PartialNan;

impl OdeSystem for PartialNan {
    fn dim(&self) -> usize {
        1
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0]
    }
    fn rhs(&self, t: f64, _y: &[f64], dydt: &mut [f64]) {
        dydt[0] = if t > 0.5 { f64::NAN } else { 1.0 };
    }
}

/// Non-autonomous polynomial y' = 2t, exact y = t^2.
struct Ramp;

impl OdeSystem for Ramp {
    fn dim(&self) -> usize {
        1
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0]
    }
    fn rhs(&self, t: f64, _y: &[f64], dydt: &mut [f64]) {
        dydt[0] = 2.0 * t;
    }
}

fn with_method(method: Method) -> SolverOptions {
    SolverOptions {
        method,
        ..SolverOptions::default()
    }
}

#[test]
fn decay_matches_exponential_with_both_methods() {
    for (method, tol) in [(Method::Dopri5, 1e-7), (Method::Bdf, 1e-5)] {
        let traj = integrate_at(&Decay, &[1.0, 2.0, 3.0], &with_method(method)).unwrap();
        for (i, t) in traj.times().iter().enumerate() {
            assert_relative_eq!(traj.state(i)[0], (-t).exp(), max_relative = tol);
        }
    }
}

#[test]
fn dense_output_is_accurate_between_steps() {
    let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05).collect();
    for (method, tol) in [(Method::Dopri5, 1e-7), (Method::Bdf, 1e-5)] {
        let traj = integrate_at(&Decay, &times, &with_method(method)).unwrap();
        for (i, t) in times.iter().enumerate() {
            assert_relative_eq!(traj.state(i)[0], (-t).exp(), max_relative = tol);
        }
    }
}

#[test]
fn logistic_growth_matches_closed_form() {
    let sys = Logistic {
        lambda: 1.0,
        kappa: 10.0,
        h0: 1.0,
    };
    let times: Vec<f64> = (1..=10).map(|i| i as f64 * 0.5).collect();
    let traj = integrate_at(&sys, &times, &SolverOptions::default()).unwrap();
    for (i, t) in times.iter().enumerate() {
        assert_relative_eq!(traj.state(i)[0], sys.hazard(*t), max_relative = 1e-6);
        assert_relative_eq!(traj.state(i)[1], sys.cumhaz(*t), max_relative = 1e-6);
    }
}

#[test]
fn halving_tolerances_does_not_worsen_logistic_error() {
    let sys = Logistic {
        lambda: 2.0,
        kappa: 5.0,
        h0: 0.1,
    };
    let max_err = |rtol: f64, atol: f64| -> f64 {
        let opts = SolverOptions {
            rtol,
            atol,
            ..SolverOptions::default()
        };
        let times: Vec<f64> = (1..=16).map(|i| i as f64 * 0.25).collect();
        let traj = integrate_at(&sys, &times, &opts).unwrap();
        times
            .iter()
            .enumerate()
            .map(|(i, t)| ((traj.state(i)[0] - sys.hazard(*t)) / sys.hazard(*t)).abs())
            .fold(0.0, f64::max)
    };
    let mut rtol = 1e-6;
    let mut atol = 1e-8;
    let mut prev = max_err(rtol, atol);
    for _ in 0..4 {
        rtol /= 2.0;
        atol /= 2.0;
        let next = max_err(rtol, atol);
        // Floor guards the comparison once errors sit at roundoff level.
        assert!(
            next <= 2.0 * prev.max(1e-14),
            "error grew from {prev:e} to {next:e} after halving tolerances"
        );
        prev = next;
    }
}

#[test]
fn bdf_cruises_through_stiff_relaxation() {
    let opts_bdf = SolverOptions {
        rtol: 1e-4,
        atol: 1e-8,
        method: Method::Bdf,
        ..SolverOptions::default()
    };
    let traj = integrate_at(&StiffRelax, &[2.0], &opts_bdf).unwrap();
    assert_relative_eq!(traj.state(0)[0], 2.0f64.sin(), max_relative = 1e-3);
    let bdf_work = traj.stats.steps + traj.stats.rejected;
    assert!(bdf_work < 300, "BDF used {bdf_work} steps");

    let opts_ex = SolverOptions {
        rtol: 1e-4,
        atol: 1e-8,
        ..SolverOptions::default()
    };
    let traj = integrate_at(&StiffRelax, &[2.0], &opts_ex).unwrap();
    assert_relative_eq!(traj.state(0)[0], 2.0f64.sin(), max_relative = 1e-3);
    let explicit_work = traj.stats.steps + traj.stats.rejected;
    assert!(
        explicit_work > 2 * bdf_work,
        "explicit work {explicit_work} vs BDF {bdf_work}"
    );
}

#[test]
fn grid_has_expected_size_and_spacing() {
    let sys = ConstHazard { h0: 5.0 };
    let traj = integrate_grid(&sys, 150.0, 0.001, &SolverOptions::default()).unwrap();
    assert_eq!(traj.len(), 150_001);
    assert_relative_eq!(traj.times()[150_000], 150.0, max_relative = 1e-12);
    assert_relative_eq!(traj.last_state()[1], 750.0, max_relative = 1e-9);

    let traj = integrate_grid(&sys, 1.0, 0.5, &SolverOptions::default()).unwrap();
    assert_eq!(traj.times(), &[0.0, 0.5, 1.0]);

    let traj = integrate_grid(&sys, 0.3, 0.1, &SolverOptions::default()).unwrap();
    assert_eq!(traj.len(), 4);
}

#[test]
fn constant_hazard_cumulates_exactly() {
    let sys = ConstHazard { h0: 5.0 };
    let traj = integrate_at(&sys, &[2.0], &SolverOptions::default()).unwrap();
    assert_relative_eq!(traj.state(0)[1], 10.0, max_relative = 1e-10);
}

#[test]
fn non_autonomous_rhs_is_supported() {
    for method in [Method::Dopri5, Method::Bdf] {
        let traj = integrate_at(&Ramp, &[3.0], &with_method(method)).unwrap();
        assert_relative_eq!(traj.state(0)[0], 9.0, max_relative = 1e-6);
    }
}

#[test]
fn repeated_and_initial_times_are_emitted() {
    let traj = integrate_at(&Decay, &[0.0, 0.0, 1.0, 1.0], &SolverOptions::default()).unwrap();
    assert_eq!(traj.len(), 4);
    assert_eq!(traj.state(0)[0], 1.0);
    assert_eq!(traj.state(1)[0], 1.0);
    assert_relative_eq!(traj.state(2)[0], traj.state(3)[0]);
    assert_eq!(traj.component(0).len(), 4);
}

#[test]
fn analytic_jacobian_agrees_with_central_differences() {
    let sys = Logistic {
        lambda: 1.5,
        kappa: 3.0,
        h0: 0.2,
    };
    let dev = check_jacobian(&sys, 0.0, &[0.7, 0.4], 1e-6).unwrap();
    assert!(dev < 1e-9, "deviation {dev}");
}

#[test]
fn check_jacobian_rejects_missing_jacobian_and_bad_step() {
    assert!(matches!(
        check_jacobian(&Decay, 0.0, &[1.0], 1e-6),
        Err(Error::NoJacobian)
    ));
    let sys = Logistic {
        lambda: 1.0,
        kappa: 1.0,
        h0: 0.5,
    };
    assert!(check_jacobian(&sys, 0.0, &[0.5, 0.0], 0.0).is_err());
}

#[test]
fn singularity_reports_step_underflow() {
    match integrate_at(&Singular, &[2.0], &SolverOptions::default()) {
        Err(Error::StepUnderflow { t }) => assert!((0.9..1.1).contains(&t), "t = {t}"),
        other => panic!("expected StepUnderflow, got {other:?}"),
    }
}

#[test]
fn nan_rhs_is_reported() {
    match integrate_at(&PartialNan, &[2.0], &SolverOptions::default()) {
        Err(Error::NonFinite { t }) => assert!((0.4..0.7).contains(&t), "t = {t}"),
        other => panic!("expected NonFinite, got {other:?}"),
    }
}

#[test]
fn step_budget_is_enforced() {
    let opts = SolverOptions {
        max_steps: 3,
        ..SolverOptions::default()
    };
    assert!(matches!(
        integrate_at(&Decay, &[1000.0], &opts),
        Err(Error::MaxSteps { .. })
    ));
}

#[test]
fn invalid_requests_are_rejected() {
    let opts = SolverOptions::default();
    assert!(integrate_at(&Decay, &[], &opts).is_err());
    assert!(integrate_at(&Decay, &[1.0, 0.5], &opts).is_err());
    assert!(integrate_at(&Decay, &[-1.0], &opts).is_err());
    assert!(integrate_grid(&Decay, 0.0, 0.1, &opts).is_err());
    assert!(integrate_grid(&Decay, 1.0, 0.0, &opts).is_err());

    let bad = SolverOptions {
        rtol: 0.0,
        ..SolverOptions::default()
    };
    assert!(integrate_at(&Decay, &[1.0], &bad).is_err());
    let bad = SolverOptions {
        atol: -1.0,
        ..SolverOptions::default()
    };
    assert!(integrate_at(&Decay, &[1.0], &bad).is_err());
}
