//! Command-line front end: argument parsing and file I/O only; every
//! computation lives in the library. Exit codes: 0 success, 1 failed
//! verification or I/O, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mdl_lab::experiments::{
    self, curves_csv, hash_demo, hash_demo_csv, lemmas_csv, lower_bound_csv, lower_bound_demo,
    quench, quench_csv, run_experiment, tempering_curves, trials_csv, RunConfig, SourceKind,
};

#[derive(Parser)]
#[command(
    name = "mdl-lab",
    about = "Seeded experiments on shortest-program interpolation learning",
    version
)]
struct Cli {
    /// Config file of key=value lines (# comments); flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the asymptotic error curves over label-noise rates.
    Curves {
        /// Grid step for the noise rate, in (0, 0.1].
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep every proved inequality over its grid; nonzero exit on any
    /// violation.
    VerifyLemmas,
    /// Sample, search, and audit over seeded trials; emits per-trial CSV.
    Simulate {
        /// Source family: rln, mixture, zeros, or sparse.
        #[arg(long)]
        source: Option<SourceKind>,
        /// Sample size per trial (at most 64).
        #[arg(long)]
        m: usize,
        #[arg(long)]
        trials: u64,
        /// Code-length search budget in bits.
        #[arg(long, default_value_t = 34)]
        max_len: usize,
        /// Description-length penalty weight for the structural search.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Master seed; overrides the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seed-search success statistics for random target sets.
    HashDemo {
        /// Number of targets per trial.
        #[arg(long)]
        m: u64,
        /// Targets labeled 1 per trial.
        #[arg(long)]
        k: u64,
        /// Prefix width the targets are drawn from.
        #[arg(long)]
        b: u64,
        #[arg(long)]
        trials: u64,
    },
    /// Find and verify an instance pair no short program tells apart.
    LowerBound {
        /// Prefix width to search (at most 24).
        #[arg(long)]
        b: u64,
        /// Code-length budget the pair defeats.
        #[arg(long)]
        budget: usize,
    },
    /// Distribution of the separating prefix width over fresh samples.
    Quench {
        /// Source family: rln, mixture, zeros, or sparse.
        #[arg(long)]
        source: Option<SourceKind>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        trials: u64,
    },
}

fn main() -> ExitCode {
    // clap itself exits with code 2 on malformed arguments.
    let cli = Cli::parse();

    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return usage(format!("cannot read {}: {e}", path.display())),
        };
        if let Err(e) = cfg.apply_config_text(&text) {
            return usage(format!("{}: {e}", path.display()));
        }
    }

    match cli.cmd {
        Cmd::Curves { step, out } => {
            if !(step.is_finite() && step > 0.0 && step <= 0.1) {
                return usage(format!("step {step} outside (0, 0.1]"));
            }
            emit(&curves_csv(&tempering_curves(step)), out.as_deref())
        }
        Cmd::VerifyLemmas => {
            let report = experiments::verify_lemmas();
            print!("{}", lemmas_csv(&report));
            for c in &report.checks {
                eprintln!(
                    "{:<34} {:>9} cases  gap in [{:.3e}, {:.3e}]  {}",
                    c.name,
                    c.cases,
                    c.min_gap,
                    c.max_gap,
                    if c.pass { "ok" } else { "VIOLATED" }
                );
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Cmd::Simulate {
            source,
            m,
            trials,
            max_len,
            lambda,
            seed,
            out,
        } => {
            if let Some(s) = source {
                cfg.source = s;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if m == 0 || m > 64 {
                return usage(format!("m = {m} outside 1..=64"));
            }
            if trials == 0 {
                return usage("trials must be positive".into());
            }
            if max_len < 2 {
                return usage(format!("max-len {max_len} below the shortest program (2)"));
            }
            if !(lambda.is_finite() && lambda > 0.0) {
                return usage(format!("lambda {lambda} must be positive"));
            }
            let spec = match cfg.build_spec() {
                Ok(s) => s,
                Err(e) => return usage(e.to_string()),
            };
            let report = run_experiment(&spec, m, trials, max_len, lambda);
            eprintln!(
                "mdl: mean len {:.2}, mean test error {:.4} ({} trials, {} exhausted, {} errors)",
                report.mdl_len.mean,
                report.mdl_test_error.mean,
                report.trials,
                report.exhausted_count,
                report.error_count,
            );
            eprintln!(
                "srm: mean test error {:.4}   construct: mean len {:.2}",
                report.srm_test_error.mean, report.construct_len.mean,
            );
            let mut ok = true;
            if let Some(a) = report.audits.length {
                ok &= a.pass;
                eprintln!(
                    "audit length-bound: slack {:+.4} (3 sigma = {:.4})  {}",
                    a.slack,
                    3.0 * a.sigma,
                    if a.pass { "ok" } else { "VIOLATED" }
                );
            }
            if let Some(a) = report.audits.kl {
                ok &= a.pass;
                eprintln!(
                    "audit divergence-budget: observed {:.4} <= budget {:.4} + 3 sigma {:.4}  {}",
                    a.observed_kl,
                    a.budget,
                    3.0 * a.sigma,
                    if a.pass { "ok" } else { "VIOLATED" }
                );
            }
            if let Some(a) = report.audits.band {
                ok &= a.pass;
                eprintln!(
                    "audit noise band: mean {:.4} in [{:.4}, {:.4}]  {}",
                    a.mean_test_error,
                    a.lo,
                    a.hi,
                    if a.pass { "ok" } else { "VIOLATED" }
                );
            }
            let code = emit(&trials_csv(&report), out.as_deref());
            if code != ExitCode::SUCCESS {
                return code;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Cmd::HashDemo { m, k, b, trials } => {
            if m == 0 || trials == 0 {
                return usage("m and trials must be positive".into());
            }
            if k > m {
                return usage(format!("k = {k} exceeds m = {m}"));
            }
            if !(1..=64).contains(&b) || (b < 64 && (1u64 << b) < m) {
                return usage(format!("need 2^b >= m, got (m, b) = ({m}, {b})"));
            }
            let report = hash_demo(m, k, b, trials, cfg.master_seed);
            eprintln!(
                "budget r = {}: success rate {:.3}, mean seed length {:.2}, certificate {:.2}",
                report.budget_r, report.success_rate, report.mean_seed_len, report.certificate,
            );
            emit(&hash_demo_csv(&report), None)
        }
        Cmd::LowerBound { b, budget } => {
            if !(1..=24).contains(&b) {
                return usage(format!("b = {b} outside 1..=24"));
            }
            if budget == 0 {
                return usage("budget must be positive".into());
            }
            match lower_bound_demo(b, budget) {
                Ok(report) => {
                    eprintln!(
                        "pair ({}, {}) defeats all {} programs under {} bits; interpolating it takes {} bits",
                        report.x1,
                        report.x2,
                        report.programs_checked,
                        report.len_budget,
                        report
                            .mdl_len
                            .map(|l| l.to_string())
                            .unwrap_or_else(|| "> budget".into()),
                    );
                    let code = emit(&lower_bound_csv(&report), None);
                    if code != ExitCode::SUCCESS || report.verified {
                        code
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::FAILURE
                }
            }
        }
        Cmd::Quench { source, m, trials } => {
            if let Some(s) = source {
                cfg.source = s;
            }
            if m == 0 || trials == 0 {
                return usage("m and trials must be positive".into());
            }
            let spec = match cfg.build_spec() {
                Ok(s) => s,
                Err(e) => return usage(e.to_string()),
            };
            match quench(&spec, m, trials) {
                Ok(report) => {
                    eprintln!(
                        "quenched mean log2 prefix {:.4} (envelope {:.4})",
                        report.quenched, report.threshold,
                    );
                    emit(&quench_csv(&report), None)
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

fn usage(message: String) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn emit(csv: &str, out: Option<&std::path::Path>) -> ExitCode {
    match out {
        None => {
            print!("{csv}");
            ExitCode::SUCCESS
        }
        Some(path) => match std::fs::write(path, csv) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                ExitCode::FAILURE
            }
        },
    }
}
