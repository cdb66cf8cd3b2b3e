//! One function per subcommand. Each resolves its configuration, runs the
//! corresponding library workflow, writes the declared artifacts
//! atomically and finishes with a manifest.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use hazode::data::{kaplan_meier, load_dataset, write_dataset};
use hazode::inference::{
    effective_sample_size, fit_mle, run_mcmc, sorted_quantile, Chain, McmcConfig, MleConfig,
    Prior,
};
use hazode::models::{steady_state, HazardResponseParams, Model};
use hazode::ode::SolverOptions;
use hazode::predictive::{equilibrium_summary, Component, PredictiveEnsemble};
use hazode::simulation::{
    administrative_censor, find_censoring_time, ModelSampler, ScenarioConfig, SimGrid,
};

use crate::args::{
    parse_grid, parse_prior_override, Command, ComponentId, FitArgs, KmArgs, Method, ModelId,
    PredictArgs, ScenarioArgs, SimulateArgs, SteadyStateArgs,
};
use crate::error::CliError;
use crate::output::{
    effective_seed, resolve_out_dir, write_atomic, write_atomic_with, write_manifest,
};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Fit(args) => fit(args.merged()?),
        Command::Simulate(args) => simulate(args.merged()?),
        Command::Predict(args) => predict(args.merged()?),
        Command::Scenario(args) => scenario(args.merged()?),
        Command::Km(args) => km(args.merged()?),
        Command::SteadyState(args) => steady_state_cmd(args.merged()?),
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("--{flag} is required (flag or config file)")))
}

/// Builds the model from its id plus the initial-condition flags, which
/// only the hazard-response model accepts.
fn build_model(
    id: ModelId,
    h0: Option<f64>,
    q0: Option<f64>,
) -> Result<(Model, f64, f64), CliError> {
    match id {
        ModelId::Logistic => {
            if h0.is_some() || q0.is_some() {
                return Err(CliError::usage(
                    "--h0/--q0 only apply to the hazard-response model; the logistic \
                     initial hazard is a free parameter"
                        .into(),
                ));
            }
            Ok((Model::logistic(), f64::NAN, f64::NAN))
        }
        ModelId::HazardResponse => {
            let h0 = h0.unwrap_or(0.01);
            let q0 = q0.unwrap_or(1e-6);
            Ok((Model::hazard_response(h0, q0)?, h0, q0))
        }
    }
}

fn solver_options(rtol: Option<f64>, atol: Option<f64>) -> SolverOptions {
    let mut opts = SolverOptions::default();
    if let Some(r) = rtol {
        opts.rtol = r;
    }
    if let Some(a) = atol {
        opts.atol = a;
    }
    opts
}

/// Optional initial-condition entries for config echoes; NaN (logistic)
/// serializes as null, which JSON cannot round-trip.
fn ic_json(v: f64) -> serde_json::Value {
    if v.is_nan() {
        serde_json::Value::Null
    } else {
        json!(v)
    }
}

fn fit(args: FitArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let model_id = require(args.model, "model")?;
    let data = require(args.data, "data")?;
    let out = resolve_out_dir(&require(args.out, "out")?)?;
    let (model, h0, q0) = build_model(model_id, args.h0, args.q0)?;
    let time_col = args.time_col.unwrap_or_else(|| "time".into());
    let status_col = args.status_col.unwrap_or_else(|| "status".into());
    let method = args.method.unwrap_or(Method::Mcmc);
    let opts = solver_options(args.rtol, args.atol);
    let levels = args.levels.unwrap_or_else(|| vec![0.025, 0.5, 0.975]);
    let dataset = load_dataset(&data, &time_col, &status_col)?;

    let mut config_echo = json!({
        "model": model_id,
        "data": data,
        "time_col": time_col,
        "status_col": status_col,
        "method": method,
        "h0": ic_json(h0),
        "q0": ic_json(q0),
        "init": args.init,
        "rtol": opts.rtol,
        "atol": opts.atol,
        "levels": levels,
        "out": out,
    });

    let seed = match method {
        Method::Mcmc => {
            let mut prior = Prior::default_for(&model);
            for spec in args.prior.as_deref().unwrap_or(&[]) {
                let (name, shape, scale) = parse_prior_override(spec)?;
                prior = prior.with(&name, shape, scale)?;
            }
            let seed = effective_seed(args.seed)?;
            let mcmc = McmcConfig {
                iterations: args.iterations.unwrap_or(55_000),
                burn_in: args.burn_in.unwrap_or(5_000),
                thinning: args.thinning.unwrap_or(50),
                seed,
                initial_proposal_scale: args.proposal_scale.unwrap_or(0.5),
                init: args.init.clone(),
                ..Default::default()
            };
            let chain = run_mcmc(&model, &dataset, &prior, &mcmc, &opts)?;
            write_atomic_with(&out, "chain.csv", |p| chain.write_csv(p))?;

            let mut summary = serde_json::to_value(chain.summary(&levels))?;
            let obj = summary.as_object_mut().expect("summary is an object");
            let mut ess = serde_json::Map::new();
            for (j, name) in chain.names().iter().enumerate() {
                ess.insert(name.clone(), json!(effective_sample_size(&chain.column(j)).ok()));
            }
            obj.insert("ess".into(), ess.into());
            if matches!(model, Model::HazardResponse { .. }) {
                let eq = equilibrium_summary(&chain, &model)?;
                obj.insert(
                    "equilibrium".into(),
                    json!({
                        "p_equilibrium": eq.p_equilibrium,
                        "degenerate_draws": eq.degenerate,
                        "h_star": draw_stats(eq.h_star, &levels),
                        "q_star": draw_stats(eq.q_star, &levels),
                    }),
                );
            }
            let mut text = serde_json::to_string_pretty(&summary)?;
            text.push('\n');
            write_atomic(&out, "summary.json", &text)?;

            for (key, value) in [
                ("prior", json!(args.prior)),
                ("iterations", json!(mcmc.iterations)),
                ("burn_in", json!(mcmc.burn_in)),
                ("thinning", json!(mcmc.thinning)),
                ("proposal_scale", json!(mcmc.initial_proposal_scale)),
                ("seed", json!(seed)),
            ] {
                config_echo[key] = value;
            }
            Some(seed)
        }
        Method::Mle => {
            let config = MleConfig {
                init: args.init.clone(),
                ..Default::default()
            };
            let fit = fit_mle(&model, &dataset, &config, &opts)?;
            let params: serde_json::Map<String, serde_json::Value> = model
                .free_names()
                .iter()
                .zip(&fit.params)
                .map(|(n, v)| (n.to_string(), json!(v)))
                .collect();
            let summary = json!({
                "method": "mle",
                "params": params,
                "full_params": fit.full_params,
                "log_likelihood": fit.log_likelihood,
                "converged": fit.converged,
                "iterations": fit.iterations,
                "evaluations": fit.evaluations,
            });
            let mut text = serde_json::to_string_pretty(&summary)?;
            text.push('\n');
            write_atomic(&out, "summary.json", &text)?;
            None
        }
    };
    write_manifest(&out, "fit", config_echo, seed, None, started)
}

/// Mean and quantiles of a raw draw vector; null when no draws fall in
/// the summarised class.
fn draw_stats(mut draws: Vec<f64>, levels: &[f64]) -> serde_json::Value {
    if draws.is_empty() {
        return serde_json::Value::Null;
    }
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    draws.sort_by(f64::total_cmp);
    let quantiles: serde_json::Map<String, serde_json::Value> = levels
        .iter()
        .map(|&p| (format!("q{p}"), json!(sorted_quantile(&draws, p))))
        .collect();
    json!({ "mean": mean, "quantiles": quantiles })
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let model_id = require(args.model, "model")?;
    let params = require(args.params, "params")?;
    let n = require(args.n, "n")?;
    let out = resolve_out_dir(&require(args.out, "out")?)?;
    let (model, h0, q0) = build_model(model_id, args.h0, args.q0)?;
    let opts = solver_options(args.rtol, args.atol);
    let grid = SimGrid {
        t_max: args.t_max.unwrap_or(SimGrid::default().t_max),
        step: args.grid_step.unwrap_or(SimGrid::default().step),
    };
    let seed = effective_seed(args.seed)?;

    let full = model.expand(&params)?;
    let sampler = ModelSampler::build(&model, &full, &grid, &opts)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let draws = sampler.draw(n, &mut rng)?;

    // Grid-based draws are truncated at the horizon, so the dataset must
    // be right-censored there even when no censoring was asked for; exact
    // closed-form draws need no such cap.
    let censor_time = match (args.censor_rate, args.censor_time) {
        (Some(rate), None) => {
            let horizon = match sampler {
                ModelSampler::Closed(_) => 1e6,
                ModelSampler::Grid(_) => grid.t_max,
            };
            Some(find_censoring_time(&model, &full, rate, horizon, &opts)?)
        }
        (None, Some(t)) => {
            if matches!(sampler, ModelSampler::Grid(_)) && t > grid.t_max {
                return Err(CliError::usage(format!(
                    "censor time {t} exceeds the simulation horizon {}; raise --t-max",
                    grid.t_max
                )));
            }
            Some(t)
        }
        (None, None) => match sampler {
            ModelSampler::Closed(_) => None,
            ModelSampler::Grid(_) => Some(grid.t_max),
        },
        (Some(_), Some(_)) => unreachable!("clap marks the flags as conflicting"),
    };
    let dataset = administrative_censor(&draws, censor_time.unwrap_or(f64::INFINITY))?;
    write_atomic_with(&out, "dataset.csv", |p| write_dataset(&dataset, p))?;

    let summary = dataset.censoring_summary();
    let config_echo = json!({
        "model": model_id,
        "params": params,
        "h0": ic_json(h0),
        "q0": ic_json(q0),
        "n": n,
        "censor_rate": args.censor_rate,
        "censor_time": args.censor_time,
        "t_max": grid.t_max,
        "grid_step": grid.step,
        "seed": seed,
        "rtol": opts.rtol,
        "atol": opts.atol,
        "out": out,
    });
    let derived = json!({
        "censor_time": censor_time,
        "realized_censoring_rate": summary.rate(),
        "events": summary.events,
    });
    write_manifest(&out, "simulate", config_echo, Some(seed), Some(derived), started)
}

fn predict(args: PredictArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let chain_path = require(args.chain, "chain")?;
    let model_id = require(args.model, "model")?;
    let grid_spec = require(args.grid, "grid")?;
    let out = resolve_out_dir(&require(args.out, "out")?)?;
    let (model, h0, q0) = build_model(model_id, args.h0, args.q0)?;
    let opts = solver_options(args.rtol, args.atol);
    let levels = args.bands.clone().unwrap_or_default();
    let component = args.component.unwrap_or(ComponentId::Hazard);
    let grid = parse_grid(&grid_spec)?;

    let chain = Chain::read_csv(&chain_path)?;
    let expected = model.free_names();
    if chain.names() != expected {
        return Err(CliError::usage(format!(
            "chain columns {:?} do not match the model's free parameters {:?}",
            chain.names(),
            expected
        )));
    }

    let ensemble = PredictiveEnsemble::new(&chain, &model, &grid, &opts)?;
    let core_component = match component {
        ComponentId::Hazard => Component::Hazard,
        ComponentId::Survival => Component::Survival,
        ComponentId::Response => Component::Response,
    };
    let mut curve = ensemble.bands(core_component, &levels)?;
    // The point estimate for the hazard is the predictive hazard (the
    // hazard of the averaged survival distribution), not the pointwise
    // mean of per-draw hazards that centres the band.
    if component == ComponentId::Hazard {
        curve.estimate = ensemble.hazard().estimate;
    }
    write_atomic(&out, "curves.csv", &curve.to_csv_string())?;

    let config_echo = json!({
        "chain": chain_path,
        "model": model_id,
        "h0": ic_json(h0),
        "q0": ic_json(q0),
        "grid": grid_spec,
        "bands": args.bands,
        "component": component,
        "rtol": opts.rtol,
        "atol": opts.atol,
        "out": out,
    });
    let derived = json!({ "excluded_draws": curve.excluded });
    write_manifest(&out, "predict", config_echo, None, Some(derived), started)
}

fn scenario(args: ScenarioArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let model_id = require(args.model, "model")?;
    let truth = require(args.truth, "truth")?;
    let out = resolve_out_dir(&require(args.out, "out")?)?;
    let (model, h0, q0) = build_model(model_id, args.h0, args.q0)?;
    let seed = effective_seed(args.seed)?;

    let mut cfg = ScenarioConfig::new(model, truth);
    if let Some(sizes) = args.sizes {
        cfg.sample_sizes = sizes;
    }
    if let Some(rates) = args.censor_rates {
        cfg.censoring_rates = rates;
    }
    if let Some(m) = args.replications {
        cfg.replications = m;
    }
    if let Some(level) = args.credible_level {
        cfg.credible_level = level;
    }
    cfg.mcmc = McmcConfig {
        iterations: args.iterations.unwrap_or(55_000),
        burn_in: args.burn_in.unwrap_or(5_000),
        thinning: args.thinning.unwrap_or(50),
        seed,
        ..Default::default()
    };
    cfg.solver = solver_options(args.rtol, args.atol);
    let default_grid = SimGrid::default();
    cfg.sim_grid = Some(SimGrid {
        t_max: args.t_max.unwrap_or(default_grid.t_max),
        step: args.grid_step.unwrap_or(default_grid.step),
    });

    let summary = hazode::simulation::run_scenario(&cfg)?;
    write_atomic(&out, "summary.csv", &summary.to_csv_string())?;
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    write_atomic(&out, "summary.json", &text)?;

    let config_echo = json!({
        "model": model_id,
        "truth": cfg.truth,
        "h0": ic_json(h0),
        "q0": ic_json(q0),
        "sizes": cfg.sample_sizes,
        "censor_rates": cfg.censoring_rates,
        "replications": cfg.replications,
        "iterations": cfg.mcmc.iterations,
        "burn_in": cfg.mcmc.burn_in,
        "thinning": cfg.mcmc.thinning,
        "seed": seed,
        "credible_level": cfg.credible_level,
        "t_max": cfg.sim_grid.unwrap().t_max,
        "grid_step": cfg.sim_grid.unwrap().step,
        "rtol": cfg.solver.rtol,
        "atol": cfg.solver.atol,
        "out": out,
    });
    write_manifest(&out, "scenario", config_echo, Some(seed), None, started)
}

fn km(args: KmArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let data = require(args.data, "data")?;
    let out = resolve_out_dir(&require(args.out, "out")?)?;
    let time_col = args.time_col.unwrap_or_else(|| "time".into());
    let status_col = args.status_col.unwrap_or_else(|| "status".into());
    let dataset = load_dataset(&data, &time_col, &status_col)?;

    let step = kaplan_meier(&dataset);
    let mut csv = String::from("time,survival\n0,1\n");
    for (t, s) in step.knots.iter().zip(&step.values) {
        csv.push_str(&format!("{t},{s}\n"));
    }
    write_atomic(&out, "km.csv", &csv)?;

    let config_echo = json!({
        "data": data,
        "time_col": time_col,
        "status_col": status_col,
        "out": out,
    });
    write_manifest(&out, "km", config_echo, None, None, started)
}

fn steady_state_cmd(args: SteadyStateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let params = require(args.params, "params")?;
    if params.len() != 4 {
        return Err(CliError::usage(format!(
            "--params needs LAMBDA,KAPPA,ALPHA,BETA (4 values), got {}",
            params.len()
        )));
    }
    let hr = HazardResponseParams::new(params[0], params[1], params[2], params[3])?;
    let ss = steady_state(&hr)?;
    let mut text = serde_json::to_string_pretty(&ss)?;
    text.push('\n');
    print!("{text}");

    if let Some(out) = args.out {
        let out = resolve_out_dir(&out)?;
        write_atomic(&out, "steady_state.json", &text)?;
        let config_echo = json!({ "params": params, "out": out });
        write_manifest(&out, "steady-state", config_echo, None, None, started)?;
    }
    Ok(())
}
