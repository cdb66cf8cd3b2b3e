//! Acceptance gate for the crate: one test per criterion, each printing a
//! `[PASS]` line on success (run with `--nocapture` to see them) and
//! panicking with a `[FAIL]` line otherwise. Tolerances are stated inline
//! next to each check.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hazode::data::load_dataset;
use hazode::inference::{
    effective_sample_size, fit_mle, run_mcmc, sample_prior, sorted_quantile, Chain, McmcConfig,
    MleConfig, Prior,
};
use hazode::models::{
    steady_state, HazardResponseParams, HazardResponseSystem, LogHazardResponseSystem,
    LogisticParams, LogisticSystem, Model, SteadyStateCase, WeibullBernoulliSystem,
};
use hazode::ode::{check_jacobian, integrate_at, SolverOptions};
use hazode::predictive::{equilibrium_summary, Component, PredictiveEnsemble};
use hazode::simulation::{
    administrative_censor, find_censoring_time, run_scenario, simulate_by_inversion, GridInverter,
    ModelSampler, ScenarioConfig, SimGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn tight() -> SolverOptions {
    SolverOptions {
        rtol: 1e-10,
        atol: 1e-12,
        ..SolverOptions::default()
    }
}

fn max_rel_err(numeric: &[f64], analytic: &[f64]) -> f64 {
    numeric.iter().zip(analytic).fold(0.0f64, |acc, (n, a)| {
        acc.max((n - a).abs() / a.abs().max(1e-12))
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn criterion_01_logistic_numeric_solution_matches_closed_form() {
    let start = Instant::now();
    let opts = tight();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.5).collect();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let lambda = 0.05 + 9.95 * rng.random::<f64>();
        let kappa = 0.05 + 9.95 * rng.random::<f64>();
        let h0 = 0.05 + 9.95 * rng.random::<f64>();
        let params = LogisticParams::new(lambda, kappa, h0).unwrap();
        let traj = integrate_at(&LogisticSystem { params }, &times, &opts).unwrap();
        let h_ref: Vec<f64> = times.iter().map(|&t| params.hazard(t)).collect();
        let cum_ref: Vec<f64> = times.iter().map(|&t| params.cumhaz(t)).collect();
        worst = worst.max(max_rel_err(&traj.component(0), &h_ref));
        worst = worst.max(max_rel_err(&traj.component(1), &cum_ref));
    }
    let elapsed = start.elapsed();
    assert!(
        worst < 1e-6,
        "[FAIL] criterion 1: max relative error {worst:.3e} >= 1e-6"
    );
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "[FAIL] criterion 1: took {elapsed:.2?}, budget is 10 s"
    );
    println!(
        "[PASS] criterion 1: logistic hazard and cumulative hazard match the closed forms, \
         max rel err {worst:.2e} over 100 random parameter triples in {elapsed:.2?}"
    );
}

#[test]
fn criterion_02_weibull_hazard_recovered_from_interior_start() {
    let opts = tight();
    let mut worst = 0.0f64;
    // The Bernoulli form is dynamically unstable (perturbations grow like
    // exp of the integrated coefficient), so the grids stay modest.
    for &(shape, scale, t_start, t_end) in &[(2.0, 1.0, 0.1, 2.0), (0.5, 1.0, 0.5, 3.0)] {
        let sys = WeibullBernoulliSystem::new(shape, scale, t_start).unwrap();
        let step = (t_end - t_start) / 20.0;
        let times: Vec<f64> = (0..=20).map(|i| t_start + i as f64 * step).collect();
        let traj = integrate_at(&sys, &times, &opts).unwrap();
        let h_ref: Vec<f64> = times
            .iter()
            .map(|&t| scale * shape * t.powf(shape - 1.0))
            .collect();
        let cum_ref: Vec<f64> = times
            .iter()
            .map(|&t| scale * (t.powf(shape) - t_start.powf(shape)))
            .collect();
        worst = worst.max(max_rel_err(&traj.component(0), &h_ref));
        worst = worst.max(max_rel_err(&traj.component(1), &cum_ref));
    }
    assert!(
        worst < 1e-5,
        "[FAIL] criterion 2: max relative error {worst:.3e} >= 1e-5"
    );
    println!(
        "[PASS] criterion 2: integrated Weibull hazards match beta kappa t^(kappa - 1) \
         for shapes 0.5 and 2, max rel err {worst:.2e}"
    );
}

#[test]
fn criterion_03_steady_state_closed_forms_and_long_run_convergence() {
    let (l, k, a, b) = (1.8, 0.1, 6.0, 4.8);
    let params = HazardResponseParams::new(l, k, a, b).unwrap();
    let ss = steady_state(&params).unwrap();
    let d_ref = 1.0 - (a * k) * (a * k) / (l * b);
    let h_ref = k * (1.0 - a * k / l) / d_ref;
    let q_ref = k * (1.0 - a * k / b) / d_ref;
    assert!(
        (ss.d - d_ref).abs() < 1e-12 && (ss.h_star - h_ref).abs() < 1e-12
            && (ss.q_star - q_ref).abs() < 1e-12,
        "[FAIL] criterion 3: steady state ({}, {}, {}) differs from the closed forms \
         ({d_ref}, {h_ref}, {q_ref}) by more than 1e-12",
        ss.d,
        ss.h_star,
        ss.q_star
    );
    assert!(
        ss.case == SteadyStateCase::Coexistence && ss.is_equilibrium,
        "[FAIL] criterion 3: (1.8, 0.1, 6, 4.8) not classified as a coexistence equilibrium"
    );
    let sys = LogHazardResponseSystem {
        params,
        h0: 1e-2,
        q0: 1e-6,
    };
    let traj = integrate_at(&sys, &[200.0], &tight()).unwrap();
    let h200 = traj.component(0)[0].exp();
    let q200 = traj.component(1)[0].exp();
    assert!(
        (h200 - ss.h_star).abs() < 1e-4 && (q200 - ss.q_star).abs() < 1e-4,
        "[FAIL] criterion 3: trajectory at t = 200 is ({h200}, {q200}), \
         further than 1e-4 from ({}, {})",
        ss.h_star,
        ss.q_star
    );
    println!(
        "[PASS] criterion 3: steady state matches the closed forms to 1e-12, is classified \
         as an equilibrium, and the trajectory reaches it to 1e-4 by t = 200"
    );
}

#[test]
fn criterion_04_analytic_jacobians_match_central_differences() {
    let params = HazardResponseParams::new(1.8, 0.1, 6.0, 4.8).unwrap();
    let natural = HazardResponseSystem {
        params,
        h0: 1e-2,
        q0: 1e-6,
    };
    let log_form = LogHazardResponseSystem {
        params,
        h0: 1e-2,
        q0: 1e-6,
    };
    let fd_step = 1e-6;
    let mut worst = check_jacobian(&natural, 0.0, &[1e-2, 1e-6, 0.0], fd_step).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for _ in 0..20 {
        let h = 0.01 + 1.99 * rng.random::<f64>();
        let q = 0.01 + 1.99 * rng.random::<f64>();
        let cum = 3.0 * rng.random::<f64>();
        worst = worst.max(check_jacobian(&natural, 0.0, &[h, q, cum], fd_step).unwrap());
        worst = worst.max(check_jacobian(&log_form, 0.0, &[h.ln(), q.ln(), cum], fd_step).unwrap());
    }
    assert!(
        worst < 1e-6,
        "[FAIL] criterion 4: Jacobian vs central differences deviates by {worst:.3e} >= 1e-6"
    );
    println!(
        "[PASS] criterion 4: analytic Jacobians of both hazard-response forms match central \
         finite differences at 20 random states, max deviation {worst:.2e}"
    );
}

#[test]
fn criterion_05_logistic_replication_cell_recovers_published_values() {
    let start = Instant::now();
    let mut cfg = ScenarioConfig::new(Model::logistic(), vec![0.5, 0.05, 3.5]);
    cfg.sample_sizes = vec![1000];
    cfg.censoring_rates = vec![0.25];
    cfg.replications = 25;
    cfg.mcmc = McmcConfig {
        seed: 20,
        ..McmcConfig::default()
    };
    let summary = run_scenario(&cfg).unwrap();
    let cell = &summary.cells[0];
    assert_eq!(
        cell.failures, 0,
        "[FAIL] criterion 5: {} of 25 replications failed",
        cell.failures
    );
    let published = [("lambda", 0.527, 0.10), ("kappa", 0.051, 0.10), ("h0", 3.754, 0.5)];
    for (p, &(name, target, tol)) in cell.params.iter().zip(&published) {
        assert_eq!(p.name, name);
        assert!(
            (p.avg_mean - target).abs() < tol,
            "[FAIL] criterion 5: {name} average posterior mean {:.4} is not within {tol} \
             of the published {target}",
            p.avg_mean
        );
        assert!(
            (p.coverage - 0.95).abs() <= 0.12,
            "[FAIL] criterion 5: {name} coverage {:.3} is not within 0.12 of 0.95",
            p.coverage
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1800.0,
        "[FAIL] criterion 5: took {elapsed:.0?}, budget is 30 min"
    );
    let means: Vec<f64> = cell.params.iter().map(|p| p.avg_mean).collect();
    let cov: Vec<f64> = cell.params.iter().map(|p| p.coverage).collect();
    println!(
        "[PASS] criterion 5: n = 1000 at 25% censoring over 25 replications gives average \
         means {means:.4?} vs published (0.527, 0.051, 3.754) with coverages {cov:.2?} in {elapsed:.1?}"
    );
}

#[test]
fn criterion_06_hazard_response_predictive_band_covers_the_truth() {
    let start = Instant::now();
    let truth = vec![1.8, 0.1, 6.0, 4.8];
    let model = Model::hazard_response(1e-2, 1e-6).unwrap();
    let full = model.expand(&truth).unwrap();
    let opts = SolverOptions::default();
    let grid = SimGrid {
        t_max: 50.0,
        step: 0.001,
    };
    let sampler = ModelSampler::build(&model, &full, &grid, &opts).unwrap();
    let c = find_censoring_time(&model, &full, 0.25, grid.t_max, &opts).unwrap();
    let t_grid: Vec<f64> = (0..=40).map(|i| i as f64 * c / 40.0).collect();
    let true_hazard = model.curves(&full, &t_grid, &opts).unwrap().hazard;
    let prior = Prior::default_for(&model);
    let mut covered = 0;
    for rep in 0..10u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        rng.set_stream(rep);
        let draws = sampler.draw(1000, &mut rng).unwrap();
        let data = administrative_censor(&draws, c).unwrap();
        // The hazard-response posterior has a far-inferior local mode that
        // can trap coordinate-wise samplers started from ones, so each
        // chain starts at the maximum likelihood estimate.
        let mle = fit_mle(&model, &data, &MleConfig::default(), &opts).unwrap();
        let mcmc = McmcConfig {
            seed: 6,
            stream: 100 + rep,
            init: Some(mle.params.clone()),
            ..McmcConfig::default()
        };
        let chain = run_mcmc(&model, &data, &prior, &mcmc, &opts).unwrap();
        let ens = PredictiveEnsemble::new(&chain, &model, &t_grid, &opts).unwrap();
        let band = ens.bands(Component::Hazard, &[0.025, 0.975]).unwrap();
        let inside = (0..t_grid.len()).all(|i| {
            band.bands[0][i] - 1e-12 <= true_hazard[i] && true_hazard[i] <= band.bands[1][i] + 1e-12
        });
        if inside {
            covered += 1;
        }
        let est = ens.hazard().estimate;
        let peak = argmax(&est);
        let unimodal = est[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-9)
            && est[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-9);
        assert!(
            unimodal,
            "[FAIL] criterion 6: predictive hazard is not unimodal in replication {rep}"
        );
        let eq = equilibrium_summary(&chain, &model).unwrap();
        assert!(
            eq.p_equilibrium > 0.9,
            "[FAIL] criterion 6: posterior equilibrium probability {:.3} <= 0.9 \
             in replication {rep}",
            eq.p_equilibrium
        );
    }
    assert!(
        covered >= 8,
        "[FAIL] criterion 6: the 95% band contains the true hazard in only {covered}/10 \
         replications, need at least 8"
    );
    println!(
        "[PASS] criterion 6: at n = 1000 the 95% predictive band contains the true hazard over \
         [0, {c:.2}] in {covered}/10 replications; every fit is unimodal with \
         P(equilibrium) > 0.9 ({:.1?})",
        start.elapsed()
    );
}

#[test]
fn criterion_07_prior_only_sampler_recovers_gamma_moments() {
    let model = Model::logistic();
    let prior = Prior::default_for(&model);
    let cfg = McmcConfig {
        iterations: 510_000,
        burn_in: 10_000,
        thinning: 20,
        seed: 7,
        ..McmcConfig::default()
    };
    let chain = sample_prior(&model, &prior, &cfg).unwrap();
    for (j, name) in ["lambda", "kappa", "h0"].iter().enumerate() {
        let col = chain.column(j);
        let n = col.len() as f64;
        let m = mean(&col);
        let var = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        let ess = effective_sample_size(&col).unwrap();
        let acc = chain.acceptance()[j];
        assert!(
            (m - 4.0).abs() < 0.1,
            "[FAIL] criterion 7: {name} prior-sample mean {m:.4} is not within 0.1 of 4"
        );
        assert!(
            (var - 8.0).abs() < 0.5,
            "[FAIL] criterion 7: {name} prior-sample variance {var:.4} is not within 0.5 of 8"
        );
        assert!(
            ess >= 1000.0,
            "[FAIL] criterion 7: {name} effective sample size {ess:.0} < 1000"
        );
        assert!(
            (acc - 0.44).abs() <= 0.08,
            "[FAIL] criterion 7: {name} acceptance rate {acc:.3} is not within 0.08 of 0.44"
        );
    }
    println!(
        "[PASS] criterion 7: prior-only chains on Gamma(2, 2) recover mean 4 +- 0.1 and \
         variance 8 +- 0.5 with ESS >= 1000 and acceptance near 0.44 in every coordinate"
    );
}

#[test]
fn criterion_08_inversion_sampler_passes_a_two_sample_ks_test() {
    let rate = 0.7;
    // h0 = kappa freezes the logistic hazard at the constant `rate`.
    let params = LogisticParams::new(1.0, rate, rate).unwrap();
    let inv = GridInverter::build(
        &LogisticSystem { params },
        1,
        40.0,
        0.001,
        &SolverOptions::default(),
    )
    .unwrap();
    let n = 10_000;
    let mut rng_a = ChaCha20Rng::seed_from_u64(8);
    let mut a = simulate_by_inversion(&inv, n, &mut rng_a).unwrap();
    let mut rng_b = ChaCha20Rng::seed_from_u64(88);
    let mut b: Vec<f64> = (0..n)
        .map(|_| -(-rng_b.random::<f64>()).ln_1p() / rate)
        .collect();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let d = ks_two_sample(&a, &b);
    let d_crit = 1.628 * (2.0 / n as f64).sqrt();
    assert!(
        d < d_crit,
        "[FAIL] criterion 8: KS statistic {d:.5} >= critical value {d_crit:.5} at alpha = 0.01"
    );
    println!(
        "[PASS] criterion 8: inversion draws from a constant hazard pass the two-sample KS \
         test against exact exponentials, D = {d:.4} < {d_crit:.4}"
    );
}

fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

#[test]
fn criterion_09_bundled_cohorts_reproduce_the_published_findings() {
    let start = Instant::now();
    let opts = SolverOptions::default();

    let leuk = load_dataset(&data_path("leuk.csv"), "time", "status").unwrap();
    let model = Model::logistic();
    let prior = Prior::default_for(&model);
    let mcmc = McmcConfig {
        seed: 42,
        ..McmcConfig::default()
    };
    let chain = run_mcmc(&model, &leuk, &prior, &mcmc, &opts).unwrap();
    let h0_mean = mean(&chain.column(2));
    assert!(
        (3.0..=4.2).contains(&h0_mean),
        "[FAIL] criterion 9: leukaemia h0 posterior mean {h0_mean:.3} outside [3.0, 4.2]"
    );
    let mut kappa = chain.column(1);
    kappa.sort_by(|x, y| x.total_cmp(y));
    let (lo, hi) = (sorted_quantile(&kappa, 0.025), sorted_quantile(&kappa, 0.975));
    assert!(
        lo < 0.125 && hi > 0.012,
        "[FAIL] criterion 9: leukaemia kappa 95% CI ({lo:.4}, {hi:.4}) does not \
         overlap (0.012, 0.125)"
    );

    let rott = load_dataset(&data_path("rotterdam.csv"), "time", "status").unwrap();
    let model_hr = Model::hazard_response(0.01, 1e-6).unwrap();
    let prior_hr = Prior::default_for(&model_hr);
    let mcmc_hr = McmcConfig {
        seed: 42,
        ..McmcConfig::default()
    };
    let chain_hr = run_mcmc(&model_hr, &rott, &prior_hr, &mcmc_hr, &opts).unwrap();
    let eq = equilibrium_summary(&chain_hr, &model_hr).unwrap();
    assert!(
        eq.p_equilibrium > 0.95,
        "[FAIL] criterion 9: breast-cancer equilibrium probability {:.3} <= 0.95",
        eq.p_equilibrium
    );
    let t_grid: Vec<f64> = (0..=76).map(|i| i as f64 * 0.25).collect();
    let est = PredictiveEnsemble::new(&chain_hr, &model_hr, &t_grid, &opts)
        .unwrap()
        .hazard()
        .estimate;
    for i in 0..8 {
        assert!(
            est[i + 1] > est[i],
            "[FAIL] criterion 9: breast-cancer predictive hazard not increasing at \
             t = {:.2} years",
            t_grid[i]
        );
    }
    let peak_t = t_grid[argmax(&est)];
    assert!(
        (2.0..=6.0).contains(&peak_t),
        "[FAIL] criterion 9: breast-cancer hazard peaks at {peak_t:.2} years, \
         expected the increase to top out after two to three years"
    );
    let last = *est.last().unwrap();
    for (i, &t) in t_grid.iter().enumerate() {
        if t >= 14.0 {
            assert!(
                (est[i] - last).abs() <= 0.15 * last,
                "[FAIL] criterion 9: breast-cancer hazard has not stabilised, \
                 drifts {:.1}% of the final level at t = {t:.2}",
                100.0 * (est[i] - last).abs() / last
            );
        }
    }
    println!(
        "[PASS] criterion 9: leukaemia fit gives h0 mean {h0_mean:.2} in [3.0, 4.2] and kappa \
         CI ({lo:.3}, {hi:.3}) overlapping (0.012, 0.125); breast-cancer fit has \
         P(equilibrium) = {:.2} with hazard rising to a peak at {peak_t:.1} years then \
         stabilising ({:.1?})",
        eq.p_equilibrium,
        start.elapsed()
    );
}

#[test]
fn criterion_10_predictive_hazard_is_the_log_derivative_of_survival() {
    let opts = SolverOptions::default();

    let model = Model::logistic();
    let truth = vec![0.8, 0.6, 0.4];
    let full = model.expand(&truth).unwrap();
    let sampler = ModelSampler::build(&model, &full, &SimGrid::default(), &opts).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let draws = sampler.draw(300, &mut rng).unwrap();
    let data = administrative_censor(&draws, f64::INFINITY).unwrap();
    let prior = Prior::default_for(&model);
    let mcmc = McmcConfig {
        iterations: 6000,
        burn_in: 1000,
        thinning: 10,
        seed: 10,
        ..McmcConfig::default()
    };
    let chain = run_mcmc(&model, &data, &prior, &mcmc, &opts).unwrap();
    let dev_logistic = identity_deviation(&chain, &model, 6.0, &opts, "logistic");

    let model_hr = Model::hazard_response(1e-2, 1e-6).unwrap();
    let truth_hr = vec![1.8, 0.1, 6.0, 4.8];
    let full_hr = model_hr.expand(&truth_hr).unwrap();
    let grid = SimGrid {
        t_max: 50.0,
        step: 0.001,
    };
    let sampler_hr = ModelSampler::build(&model_hr, &full_hr, &grid, &opts).unwrap();
    let c = find_censoring_time(&model_hr, &full_hr, 0.3, grid.t_max, &opts).unwrap();
    let mut rng_hr = ChaCha20Rng::seed_from_u64(11);
    let draws_hr = sampler_hr.draw(250, &mut rng_hr).unwrap();
    let data_hr = administrative_censor(&draws_hr, c).unwrap();
    let prior_hr = Prior::default_for(&model_hr);
    let mcmc_hr = McmcConfig {
        iterations: 6000,
        burn_in: 1000,
        thinning: 10,
        seed: 11,
        ..McmcConfig::default()
    };
    let chain_hr = run_mcmc(&model_hr, &data_hr, &prior_hr, &mcmc_hr, &opts).unwrap();
    let dev_hr = identity_deviation(&chain_hr, &model_hr, 6.0, &opts, "hazard-response");

    println!(
        "[PASS] criterion 10: mean survival starts at exactly 1 and the predictive hazard \
         matches -d/dt ln S to {dev_logistic:.2e} (logistic) and {dev_hr:.2e} \
         (hazard-response), both under 1e-4"
    );
}

/// Checks S(0) = 1 exactly and h = -d/dt ln S against central differences,
/// returning the largest interior deviation. The step is small because the
/// truncation error carries the third log-derivative of the mixture, which
/// a diffuse posterior makes much larger than any single draw's.
fn identity_deviation(
    chain: &Chain,
    model: &Model,
    t_end: f64,
    opts: &SolverOptions,
    label: &str,
) -> f64 {
    let delta = 0.0025;
    let n = (t_end / delta).round() as usize;
    let t_grid: Vec<f64> = (0..=n).map(|i| i as f64 * delta).collect();
    let ens = PredictiveEnsemble::new(chain, model, &t_grid, opts).unwrap();
    let surv = ens.survival().estimate;
    assert!(
        surv[0] == 1.0,
        "[FAIL] criterion 10: {label} mean survival at t = 0 is {} rather than exactly 1",
        surv[0]
    );
    let haz = ens.hazard().estimate;
    let mut worst = 0.0f64;
    for i in 1..t_grid.len() - 1 {
        let fd = (surv[i - 1].ln() - surv[i + 1].ln()) / (2.0 * delta);
        worst = worst.max((haz[i] - fd).abs());
    }
    assert!(
        worst < 1e-4,
        "[FAIL] criterion 10: {label} predictive hazard deviates from -d/dt ln S \
         by {worst:.2e} >= 1e-4"
    );
    worst
}
