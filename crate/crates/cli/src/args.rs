//! Command-line grammar and config-file merging.
//!
//! Every subcommand accepts `--config <path>` pointing at a JSON object
//! with the same field names as its long flags (dashes become
//! underscores). Explicit flags win over the file, the file wins over
//! built-in defaults, so a config file is a complete, re-runnable record
//! of an invocation.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "hazode",
    version,
    about = "Survival modelling with ODE-defined hazard functions",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Fit a model to right-censored data by MLE or adaptive MCMC.
    Fit(FitArgs),
    /// Draw survival times from a model and write a censored dataset.
    Simulate(SimulateArgs),
    /// Posterior predictive curves from a saved chain.
    Predict(PredictArgs),
    /// Replicated simulate-then-fit study over a (n, censoring) grid.
    Scenario(ScenarioArgs),
    /// Kaplan-Meier survival estimate of a dataset.
    Km(KmArgs),
    /// Steady state of the hazard-response system.
    SteadyState(SteadyStateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    Logistic,
    HazardResponse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mle,
    Mcmc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentId {
    Hazard,
    Survival,
    Response,
}

/// Applies config-file values underneath explicitly given flags.
macro_rules! merge {
    ($cli:expr, $file:expr; $($f:ident),+ $(,)?) => {{
        let mut out = $cli;
        let file = $file;
        $( if out.$f.is_none() { out.$f = file.$f; } )+
        out
    }};
}

fn load_config<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("failed to read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
}

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitArgs {
    /// JSON file supplying any of this subcommand's flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub model: Option<ModelId>,

    /// CSV dataset with follow-up times and event indicators.
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Column holding follow-up times [default: time].
    #[arg(long)]
    pub time_col: Option<String>,

    /// Column holding the event indicator, 1 = observed [default: status].
    #[arg(long)]
    pub status_col: Option<String>,

    /// Estimation method [default: mcmc].
    #[arg(long, value_enum)]
    pub method: Option<Method>,

    /// Fixed initial hazard, hazard-response model only [default: 0.01].
    #[arg(long)]
    pub h0: Option<f64>,

    /// Fixed initial response, hazard-response model only [default: 1e-6].
    #[arg(long)]
    pub q0: Option<f64>,

    /// Gamma prior override, repeatable: NAME=SHAPE,SCALE.
    #[arg(long = "prior", value_name = "NAME=SHAPE,SCALE")]
    pub prior: Option<Vec<String>>,

    /// Total MCMC iterations [default: 55000].
    #[arg(long)]
    pub iterations: Option<usize>,

    /// Iterations discarded before keeping draws [default: 5000].
    #[arg(long)]
    pub burn_in: Option<usize>,

    /// Keep every k-th post-burn-in draw [default: 50].
    #[arg(long)]
    pub thinning: Option<usize>,

    /// RNG seed; drawn from the OS and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Initial free-parameter values, natural scale, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,

    /// Initial random-walk proposal scale on the log scale [default: 0.5].
    #[arg(long)]
    pub proposal_scale: Option<f64>,

    /// Relative solver tolerance [default: 1e-8].
    #[arg(long)]
    pub rtol: Option<f64>,

    /// Absolute solver tolerance [default: 1e-10].
    #[arg(long)]
    pub atol: Option<f64>,

    /// Posterior quantile levels for summary.json
    /// [default: 0.025,0.5,0.975].
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,

    /// Output directory; relative paths resolve under $HAZODE_OUTPUT_ROOT.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl FitArgs {
    pub fn merged(self) -> Result<Self, CliError> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let file: FitArgs = load_config(path)?;
        Ok(merge!(self, file; model, data, time_col, status_col, method, h0, q0,
            prior, iterations, burn_in, thinning, seed, init, proposal_scale,
            rtol, atol, levels, out))
    }
}

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    /// JSON file supplying any of this subcommand's flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub model: Option<ModelId>,

    /// True free parameters, comma separated: logistic
    /// LAMBDA,KAPPA,H0; hazard-response LAMBDA,KAPPA,ALPHA,BETA.
    #[arg(long, value_delimiter = ',')]
    pub params: Option<Vec<f64>>,

    /// Initial hazard, hazard-response model only [default: 0.01].
    #[arg(long)]
    pub h0: Option<f64>,

    /// Initial response, hazard-response model only [default: 1e-6].
    #[arg(long)]
    pub q0: Option<f64>,

    /// Number of subjects to draw.
    #[arg(long)]
    pub n: Option<usize>,

    /// Target administrative censoring rate in (0, 1); the matching
    /// censoring time is solved for and recorded.
    #[arg(long, conflicts_with = "censor_time")]
    pub censor_rate: Option<f64>,

    /// Administrative censoring time.
    #[arg(long)]
    pub censor_time: Option<f64>,

    /// Inversion-grid horizon for ODE-defined models; such draws are
    /// right-censored here when no censoring is requested [default: 150].
    #[arg(long)]
    pub t_max: Option<f64>,

    /// Inversion-grid spacing [default: 0.001].
    #[arg(long)]
    pub grid_step: Option<f64>,

    /// RNG seed; drawn from the OS and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Relative solver tolerance [default: 1e-8].
    #[arg(long)]
    pub rtol: Option<f64>,

    /// Absolute solver tolerance [default: 1e-10].
    #[arg(long)]
    pub atol: Option<f64>,

    /// Output directory; relative paths resolve under $HAZODE_OUTPUT_ROOT.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn merged(self) -> Result<Self, CliError> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let file: SimulateArgs = load_config(path)?;
        let merged = merge!(self, file; model, params, h0, q0, n, censor_rate,
            censor_time, t_max, grid_step, seed, rtol, atol, out);
        if merged.censor_rate.is_some() && merged.censor_time.is_some() {
            return Err(CliError::usage(
                "censor_rate and censor_time cannot both be set".into(),
            ));
        }
        Ok(merged)
    }
}

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictArgs {
    /// JSON file supplying any of this subcommand's flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// chain.csv written by `fit --method mcmc`.
    #[arg(long)]
    pub chain: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub model: Option<ModelId>,

    /// Fixed initial hazard, hazard-response model only [default: 0.01].
    #[arg(long)]
    pub h0: Option<f64>,

    /// Fixed initial response, hazard-response model only [default: 1e-6].
    #[arg(long)]
    pub q0: Option<f64>,

    /// Evaluation grid START:STOP:STEP, e.g. 0:14:0.05.
    #[arg(long)]
    pub grid: Option<String>,

    /// Pointwise quantile levels for credible bands, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub bands: Option<Vec<f64>>,

    /// Curve to summarise [default: hazard].
    #[arg(long, value_enum)]
    pub component: Option<ComponentId>,

    /// Relative solver tolerance [default: 1e-8].
    #[arg(long)]
    pub rtol: Option<f64>,

    /// Absolute solver tolerance [default: 1e-10].
    #[arg(long)]
    pub atol: Option<f64>,

    /// Output directory; relative paths resolve under $HAZODE_OUTPUT_ROOT.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl PredictArgs {
    pub fn merged(self) -> Result<Self, CliError> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let file: PredictArgs = load_config(path)?;
        Ok(merge!(self, file; chain, model, h0, q0, grid, bands, component,
            rtol, atol, out))
    }
}

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioArgs {
    /// JSON file supplying any of this subcommand's flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub model: Option<ModelId>,

    /// True free parameters used to simulate, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub truth: Option<Vec<f64>>,

    /// Initial hazard, hazard-response model only [default: 0.01].
    #[arg(long)]
    pub h0: Option<f64>,

    /// Initial response, hazard-response model only [default: 1e-6].
    #[arg(long)]
    pub q0: Option<f64>,

    /// Sample sizes, comma separated [default: 250,500,1000,5000].
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,

    /// Target censoring rates, comma separated [default: 0.25,0.5].
    #[arg(long, value_delimiter = ',')]
    pub censor_rates: Option<Vec<f64>>,

    /// Replications per (size, rate) cell [default: 25].
    #[arg(long)]
    pub replications: Option<usize>,

    /// Total MCMC iterations per replication [default: 55000].
    #[arg(long)]
    pub iterations: Option<usize>,

    /// Iterations discarded before keeping draws [default: 5000].
    #[arg(long)]
    pub burn_in: Option<usize>,

    /// Keep every k-th post-burn-in draw [default: 50].
    #[arg(long)]
    pub thinning: Option<usize>,

    /// Base RNG seed; drawn from the OS and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Credible-interval level for coverage [default: 0.95].
    #[arg(long)]
    pub credible_level: Option<f64>,

    /// Inversion-grid horizon for ODE-defined models [default: 150].
    #[arg(long)]
    pub t_max: Option<f64>,

    /// Inversion-grid spacing [default: 0.001].
    #[arg(long)]
    pub grid_step: Option<f64>,

    /// Relative solver tolerance [default: 1e-8].
    #[arg(long)]
    pub rtol: Option<f64>,

    /// Absolute solver tolerance [default: 1e-10].
    #[arg(long)]
    pub atol: Option<f64>,

    /// Output directory; relative paths resolve under $HAZODE_OUTPUT_ROOT.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ScenarioArgs {
    pub fn merged(self) -> Result<Self, CliError> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let file: ScenarioArgs = load_config(path)?;
        Ok(merge!(self, file; model, truth, h0, q0, sizes, censor_rates,
            replications, iterations, burn_in, thinning, seed, credible_level,
            t_max, grid_step, rtol, atol, out))
    }
}

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KmArgs {
    /// JSON file supplying any of this subcommand's flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// CSV dataset with follow-up times and event indicators.
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Column holding follow-up times [default: time].
    #[arg(long)]
    pub time_col: Option<String>,

    /// Column holding the event indicator, 1 = observed [default: status].
    #[arg(long)]
    pub status_col: Option<String>,

    /// Output directory; relative paths resolve under $HAZODE_OUTPUT_ROOT.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl KmArgs {
    pub fn merged(self) -> Result<Self, CliError> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let file: KmArgs = load_config(path)?;
        Ok(merge!(self, file; data, time_col, status_col, out))
    }
}

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteadyStateArgs {
    /// JSON file supplying any of this subcommand's flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Hazard-response parameters LAMBDA,KAPPA,ALPHA,BETA.
    #[arg(long, value_delimiter = ',')]
    pub params: Option<Vec<f64>>,

    /// Optional output directory for steady_state.json; the summary is
    /// always printed to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SteadyStateArgs {
    pub fn merged(self) -> Result<Self, CliError> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let file: SteadyStateArgs = load_config(path)?;
        Ok(merge!(self, file; params, out))
    }
}

/// Expands START:STOP:STEP into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let err = || CliError::usage(format!("grid must be START:STOP:STEP, got {spec:?}"));
    if parts.len() != 3 {
        return Err(err());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| err())?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(start >= 0.0 && stop > start && step > 0.0) || !nums.iter().all(|v| v.is_finite()) {
        return Err(err());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

/// Parses a prior override of the form NAME=SHAPE,SCALE.
pub fn parse_prior_override(spec: &str) -> Result<(String, f64, f64), CliError> {
    let err = || CliError::usage(format!("prior must be NAME=SHAPE,SCALE, got {spec:?}"));
    let (name, rest) = spec.split_once('=').ok_or_else(err)?;
    let (shape, scale) = rest.split_once(',').ok_or_else(err)?;
    let shape: f64 = shape.trim().parse().map_err(|_| err())?;
    let scale: f64 = scale.trim().parse().map_err(|_| err())?;
    if name.trim().is_empty() {
        return Err(err());
    }
    Ok((name.trim().to_string(), shape, scale))
}
