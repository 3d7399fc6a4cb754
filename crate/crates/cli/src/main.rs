//! Command-line front end: geometry checks, objective checks, single prox
//! solves, configured experiment runs, and the bundled invariant suite.
//!
//! Exit codes: 0 all checks passed, 1 a check or certificate failed,
//! 2 usage/config/runtime error.

mod config;
mod experiment;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sqprox_core::{
    check_cat0, check_hyperbolic_axioms, parse_objective, parse_point, parse_space, prox,
    AxiomReport, BrokenGeodesic, Geometry, ProxParams, RandomSampler, Result,
};

use crate::suite::Mutation;

#[derive(Parser)]
#[command(name = "sqprox", version, about = "Certified proximal point runs on Hadamard model spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the hyperbolic-axiom and CAT(0) checkers on one space.
    CheckSpace {
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Warp the geodesic parameterization first; the checks must fail.
        #[arg(long)]
        mutate: bool,
    },
    /// Check the strong-quasiconvexity inequality for one objective.
    CheckFunction {
        #[arg(long)]
        space: String,
        #[arg(long)]
        function: String,
        /// Override the claimed modulus before checking.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Solve one proximal subproblem and print the result as JSON.
    Prox {
        #[arg(long)]
        space: String,
        #[arg(long)]
        function: String,
        /// Base point literal.
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        coarse: Option<usize>,
        #[arg(long)]
        refine: Option<usize>,
    },
    /// Run a configured experiment: iterate, certify, write trace and
    /// certificate.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Trace CSV path (overrides `out_trace` from the config).
        #[arg(long)]
        out_trace: Option<PathBuf>,
        /// Certificate JSON path (overrides `out_cert` from the config).
        #[arg(long)]
        out_cert: Option<PathBuf>,
    },
    /// Run every bundled checker over all registered spaces and catalog
    /// entries.
    Suite {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Inject one known bug; the run must end with a failure.
        #[arg(long, value_enum)]
        mutate: Option<Mutation>,
    },
}

fn main() -> ExitCode {
    if let Err(msg) = cap_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `SQPROX_THREADS` caps the worker pool; unset means all cores.
fn cap_threads() -> std::result::Result<(), String> {
    match std::env::var("SQPROX_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| format!("SQPROX_THREADS must be a positive integer, got `{v}`"))?;
            if n == 0 {
                return Err("SQPROX_THREADS must be a positive integer, got `0`".into());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| e.to_string())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::CheckSpace { space, seed, samples, tol, mutate } => {
            let space = parse_space(&space)?;
            let broken;
            let geom: &dyn Geometry = if mutate {
                broken = BrokenGeodesic(space.clone());
                &broken
            } else {
                &space
            };
            let mut sampler = RandomSampler::new(seed);
            let axioms = check_hyperbolic_axioms(geom, &mut sampler, samples, tol)?;
            let cat0 = check_cat0(geom, &mut sampler, samples, tol)?;
            print_report(&geom.label(), &axioms);
            print_report(&geom.label(), &cat0);
            Ok(axioms.all_pass() && cat0.all_pass())
        }
        Cmd::CheckFunction { space, function, gamma, seed, samples, tol } => {
            let space = parse_space(&space)?;
            let mut f = parse_objective(&space, &function)?;
            if let Some(g) = gamma {
                f = f.with_gamma(g)?;
            }
            let mut sampler = RandomSampler::new(seed);
            let report = f.check_sqc(&mut sampler, samples, tol)?;
            println!(
                "sqc {} @ {} gamma {}: samples {}, min residual {:e}, estimated gamma {}, {}",
                f.descriptor(),
                space,
                f.gamma(),
                report.samples,
                report.min_residual,
                report.estimated_gamma,
                if report.pass { "PASS" } else { "FAIL" }
            );
            Ok(report.pass)
        }
        Cmd::Prox { space, function, x, beta, coarse, refine } => {
            let space = parse_space(&space)?;
            let f = parse_objective(&space, &function)?;
            let x = parse_point(&space, &x)?;
            let mut params = ProxParams::with_beta(beta);
            if let Some(n) = coarse {
                params.coarse_points = n;
            }
            if let Some(n) = refine {
                params.refine_iters = n;
            }
            let result = prox(&space, &f, &params, &x)?;
            let mut json = serde_json::to_string_pretty(&result).expect("result serializes");
            json.push('\n');
            print!("{json}");
            Ok(true)
        }
        Cmd::Run { config, out_trace, out_cert } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = config::parse_config(&text)?;
            if out_trace.is_some() {
                cfg.out_trace = out_trace;
            }
            if out_cert.is_some() {
                cfg.out_cert = out_cert;
            }
            experiment::run_experiment(&cfg)
        }
        Cmd::Suite { seed, samples, tol, mutate } => suite::run_suite(seed, samples, tol, mutate),
    }
}

fn print_report(label: &str, report: &AxiomReport) {
    for line in &report.checks {
        println!(
            "check {label} `{}`: samples {}, max violation {:e}, {}",
            line.name,
            line.samples,
            line.max_violation,
            if line.pass { "PASS" } else { "FAIL" }
        );
    }
}
