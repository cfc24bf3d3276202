//! `oce`: ordinal causal effects in latent Gaussian DAG models.
//!
//! Subcommands cover the full pipeline: synthetic model/data generation,
//! effect computation (closed form and numeric), the Monte Carlo oracle,
//! parameter estimation for a known graph, bootstrap sweeps, and a
//! built-in verification of the two reference cases.
//!
//! Exit codes: 0 success, 2 usage, 3 data/model validation, 4 numeric
//! failure, 5 estimation failure threshold exceeded.

mod commands;
mod dataset_file;
mod model_file;
mod report;

use clap::Parser;

use commands::{
    run_atomic, run_bootstrap, run_effect, run_estimate, run_generate, run_oracle, run_verify,
    AtomicArgs, BootstrapArgs, EffectArgs, EstimateArgs, GenerateArgs, OracleArgs, VerifyArgs,
};

#[derive(Parser, Debug)]
#[command(
    name = "oce",
    version,
    about = "Ordinal causal effects in latent Gaussian DAG models"
)]
enum Cli {
    /// Generate a random model and an ordinal dataset drawn from it
    Generate(GenerateArgs),
    /// Compute ordinal causal effects from a model file
    Effect(EffectArgs),
    /// Estimate effects by Monte Carlo simulation of the mutilated system
    Oracle(OracleArgs),
    /// Atomic-intervention outcome-level probabilities
    Atomic(AtomicArgs),
    /// Fit thresholds, correlations and coefficients for a known graph
    Estimate(EstimateArgs),
    /// Resample a dataset, refit per replicate and summarize the effects
    Bootstrap(BootstrapArgs),
    /// Reproduce the built-in reference cases and report per-value deltas
    Verify(VerifyArgs),
}

fn exit_code(e: &oce::Error) -> i32 {
    use oce::Error::*;
    match e {
        Query(_) | InvalidParam(_) | NodeOutOfRange { .. } => 2,
        SelfLoop(_) | DuplicateEdge(_, _) | CycleDetected | InvalidModel(_) | Data(_) => 3,
        Domain(_) | DegenerateInterval(_) | DegenerateLevel { .. } | LinAlg(_) | Numeric(_) => 4,
        Estimation(_) | NonIdentifiable(_) => 5,
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli {
        Cli::Generate(args) => run_generate(args),
        Cli::Effect(args) => run_effect(args),
        Cli::Oracle(args) => run_oracle(args),
        Cli::Atomic(args) => run_atomic(args),
        Cli::Estimate(args) => run_estimate(args),
        Cli::Bootstrap(args) => run_bootstrap(args),
        Cli::Verify(args) => run_verify(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
