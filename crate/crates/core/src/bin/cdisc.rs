//! Command-line front end: declarative configuration of algebras, actions,
//! algebra objects and windows; check-suite orchestration; report emission.
//!
//! Exit codes: 0 pass, 1 check failure, 2 configuration error,
//! 3 resource or window overflow.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cstar_discrete::config::{ActionSpec, ObjectSpec, RunConfig, RunSection};
use cstar_discrete::report::RunReport;
use cstar_discrete::runner::run_checks;
use cstar_discrete::Error;

#[derive(Parser)]
#[command(name = "cdisc", about = "structural check suites for graded crossed products", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named check suite for a configuration file.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// axioms | crossed | peter-weyl | frobenius | galois | freeness | cuntz | semicircular | all
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// output directory for the report files
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Galois-lattice suite for a configuration file.
    Galois {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in truncated-core model without a configuration file.
    Cuntz {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in truncated semicircular model without a configuration file.
    Semicircular {
        /// scalar | m2-pair
        #[arg(long, default_value = "scalar")]
        family: String,
        #[arg(long, default_value_t = 6)]
        cap: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge machine reports into one document, sections in argument order.
    Report {
        /// JSON report files to merge
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) => 2,
                Error::WindowOverflow(_) | Error::Resource(_) | Error::SearchCap(_) => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: Cli) -> cstar_discrete::Result<bool> {
    match cli.command {
        Command::Check {
            config,
            suite,
            window,
            tol,
            seed,
            out,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
            let mut cfg = RunConfig::from_toml(&text)?;
            if let Some(w) = window {
                cfg.run.window = w;
            }
            if let Some(t) = tol {
                cfg.run.tol = t;
            }
            if let Some(s) = seed {
                cfg.run.seed = s;
            }
            if let Some(o) = &out {
                cfg.run.out = Some(o.display().to_string());
            }
            cfg.validate()?;
            let suite = suite.unwrap_or_else(|| cfg.run.suite.clone());
            emit(&cfg, &suite)
        }
        Command::Galois { config, seed, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
            let mut cfg = RunConfig::from_toml(&text)?;
            if let Some(s) = seed {
                cfg.run.seed = s;
            }
            if let Some(o) = &out {
                cfg.run.out = Some(o.display().to_string());
            }
            emit(&cfg, "galois")
        }
        Command::Cuntz {
            n,
            depth,
            window,
            suite,
            seed,
            out,
        } => {
            let cfg = RunConfig {
                algebra: None,
                action: ActionSpec::Cuntz { n, depth },
                object: Some(ObjectSpec::CuntzGrading),
                run: RunSection {
                    window: window.unwrap_or(depth.min(2)),
                    seed: seed.unwrap_or(17),
                    out: out.map(|p| p.display().to_string()),
                    ..Default::default()
                },
            };
            cfg.validate()?;
            emit(&cfg, suite.as_deref().unwrap_or("all"))
        }
        Command::Semicircular {
            family,
            cap,
            seed,
            out,
        } => {
            let cfg = RunConfig {
                algebra: None,
                action: ActionSpec::Semicircular {
                    family,
                    degree_cap: cap,
                },
                object: None,
                run: RunSection {
                    seed: seed.unwrap_or(17),
                    out: out.map(|p| p.display().to_string()),
                    ..Default::default()
                },
            };
            cfg.validate()?;
            emit(&cfg, "semicircular")
        }
        Command::Report { files, out } => {
            let mut reports = Vec::new();
            for f in &files {
                let text = std::fs::read_to_string(f)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", f.display())))?;
                let rep: RunReport = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("bad report {}: {e}", f.display())))?;
                reports.push(rep);
            }
            let merged = RunReport::merged(&reports);
            print!("{}", merged.to_text());
            if let Some(dir) = out {
                merged.write_files(&dir, "merged")?;
            }
            Ok(merged.all_pass())
        }
    }
}

fn emit(cfg: &RunConfig, suite: &str) -> cstar_discrete::Result<bool> {
    let report = run_checks(cfg, suite)?;
    print!("{}", report.to_text());
    if let Some(dir) = &cfg.run.out {
        let stem = format!("{}-{}", suite, report.config_hash);
        report.write_files(std::path::Path::new(dir), &stem)?;
    }
    Ok(report.all_pass())
}
