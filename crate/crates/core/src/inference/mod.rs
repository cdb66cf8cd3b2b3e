//! Inference for ODE-defined hazard models: right-censored log-likelihood,
//! gamma priors, Nelder-Mead maximum likelihood and adaptive
//! Metropolis-within-Gibbs posterior sampling with chain diagnostics.

mod diagnostics;
mod likelihood;
mod mcmc;
mod mle;
mod prior;

pub use diagnostics::{effective_sample_size, integrated_autocorr_time};
pub use likelihood::{reject_all_censored, Likelihood};
pub use mcmc::{
    run_mcmc, sample_prior, sample_target, sorted_quantile, Chain, ChainSummary, McmcConfig,
    ParamStats, RawChain,
};
pub use mle::{fit_mle, MleConfig, MleFit};
pub use prior::{ln_gamma, GammaPrior, Prior};
