use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hgeo::report::{
    parse_config, render_slice, run_analyze, run_audit_sweep, run_solve, to_json_pretty,
    verify_report, Family, ProblemConfig, RunReport, SliceSpec,
};
use hgeo::solvers::SolveConfig;

#[derive(Parser)]
#[command(name = "hgeo", version, about = "Homogeneous geodesics of invariant Randers metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Killing form on m, its signature and the guaranteed ray count.
    Analyze {
        config: PathBuf,
        /// Write the JSON summary here ("-" for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Enumerate all geodesic rays and audit the count.
    Solve {
        config: PathBuf,
        /// Write the JSON report here ("-" for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Override solver.rng_seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Draw the indicatrix, Killing sphere and rays in a plane as SVG.
    Plot {
        config: PathBuf,
        /// Coordinate plane such as x3=0 (defaults to the [plot] section).
        #[arg(long)]
        plane: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Audit random members of a family.
    Sweep {
        #[arg(long, value_parser = ["so3", "sl2", "heisenberg", "mixed"])]
        family: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Multistart seeds per trial.
        #[arg(long, default_value_t = SolveConfig::default().seeds)]
        starts: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-check the rays of a saved report against its configuration.
    Verify { report: PathBuf, config: PathBuf },
}

/// Exit code 1: bad input or solver failure.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn load(path: &Path) -> Result<ProblemConfig, InputError> {
    let text = fs::read_to_string(path)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| InputError(format!("{}:\n{e}", path.display())))
}

fn emit(target: Option<&Path>, json: &str) -> Result<(), InputError> {
    match target {
        None => Ok(()),
        Some(p) if p == Path::new("-") => {
            println!("{json}");
            Ok(())
        }
        Some(p) => fs::write(p, format!("{json}\n"))
            .map_err(|e| InputError(format!("{}: {e}", p.display()))),
    }
}

fn summary(report: &RunReport) {
    let a = &report.audit;
    eprintln!(
        "{}: signature {}, {} rays{}, required minimum {}, audit {}",
        report.algebra.label,
        a.signature,
        a.count,
        if report.continuum_detected { " (continuum)" } else { "" },
        a.required_minimum,
        if a.pass { "pass" } else { "FAIL" }
    );
    const SHOWN: usize = 12;
    for ray in report.rays.iter().take(SHOWN) {
        let y: Vec<String> = ray.y.y.iter().map(|v| format!("{v:+.12}")).collect();
        eprintln!(
            "  y = ({})  K = {:+.6e}  residual = {:.1e}  {:?}",
            y.join(", "),
            ray.lambda,
            ray.residual_norm,
            ray.kind
        );
    }
    if report.rays.len() > SHOWN {
        eprintln!("  ... {} more", report.rays.len() - SHOWN);
    }
}

fn run(cli: Cli) -> Result<bool, InputError> {
    match cli.command {
        Command::Analyze { config, json } => {
            let cfg = load(&config)?;
            let a = run_analyze(&cfg)?;
            eprintln!(
                "{}: Killing signature {} (radical dim {}), required minimum {}",
                a.algebra.label, a.killing.signature, a.killing.radical_dim, a.required_minimum
            );
            emit(json.as_deref(), &to_json_pretty(&a)?)?;
            Ok(true)
        }
        Command::Solve { config, json, seed } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.solve.rng_seed = s;
            }
            let report = run_solve(&cfg)?;
            summary(&report);
            emit(json.as_deref(), &to_json_pretty(&report)?)?;
            Ok(report.audit.pass)
        }
        Command::Plot {
            config,
            plane,
            out,
            seed,
        } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.solve.rng_seed = s;
            }
            let plane = match (plane, &cfg.slice) {
                (Some(p), current) => {
                    let mut plane = SliceSpec::coordinate_plane(&p, cfg.randers.dim()).map_err(InputError)?;
                    if let Some(c) = current {
                        plane.resolution = c.resolution;
                        plane.extent = c.extent;
                    }
                    plane
                }
                (None, Some(s)) => s.clone(),
                (None, None) => {
                    return Err(InputError("no plane given; use --plane or a [plot] section".into()))
                }
            };
            let plot = render_slice(&cfg, &plane)?;
            fs::write(&out, &plot.svg).map_err(|e| InputError(format!("{}: {e}", out.display())))?;
            for w in &plot.data.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("{} red rays in {}, written to {}", plot.data.red.len(), plane.label, out.display());
            Ok(plot.report.audit.pass)
        }
        Command::Sweep {
            family,
            trials,
            seed,
            starts,
            json,
        } => {
            let family = Family::parse(&family).expect("clap restricts the family");
            let solve = SolveConfig {
                seeds: starts,
                rng_seed: seed,
                ..SolveConfig::default()
            };
            let s = run_audit_sweep(family, trials, seed, &solve)?;
            eprintln!(
                "{} x {}: counts {} to {}, {} audit failures, {:.1} s",
                family.name(),
                s.trials,
                s.min_count,
                s.max_count,
                s.failures.len(),
                s.elapsed_seconds
            );
            for (count, n) in &s.distribution {
                eprintln!("  {count:>8}: {n}");
            }
            emit(Some(json.as_deref().unwrap_or(Path::new("-"))), &to_json_pretty(&s)?)?;
            Ok(s.failures.is_empty())
        }
        Command::Verify { report, config } => {
            let cfg = load(&config)?;
            let text = fs::read_to_string(&report)
                .map_err(|e| InputError(format!("{}: {e}", report.display())))?;
            let saved: RunReport = serde_json::from_str(&text)
                .map_err(|e| InputError(format!("{}: {e}", report.display())))?;
            let outcome = verify_report(&saved, &cfg)?;
            eprintln!(
                "{} rays checked, max residual {:.3e}, audit {}, {}",
                outcome.rays_checked,
                outcome.max_residual,
                if outcome.audit_consistent { "consistent" } else { "INCONSISTENT" },
                if outcome.pass { "pass" } else { "FAIL" }
            );
            println!("{}", to_json_pretty(&outcome)?);
            Ok(outcome.pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
