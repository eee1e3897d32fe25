//! Command-line front end; `main.rs` only forwards `argv` and the exit code.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde_json::json;

use crate::error::{Error, Result};
use crate::level::{adapted_frame, retract, split_tangent, DEFAULT_MAX_ITER, DEFAULT_RETRACT_TOL};
use crate::linalg::{columns, max_abs};
use crate::verify::report::to_json;
use crate::verify::selftest::run_selftest;
use crate::verify::{run_identity_suite, summary_table, VerifyConfig};

#[derive(Debug, Parser)]
#[command(name = "hkreduce", version, about = "Numerical checks for hyperkähler quotients of flat ℍ^m by tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the identity suite on sampled level-set points and emit a JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Override the number of sample points.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; defaults to the config's `output`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the moment map at a point.
    Moment {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated real coordinates (component-block layout).
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Split the tangent space of the level set at a point.
    Split {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Newton-retract the point onto the level set first.
        #[arg(long)]
        retract: bool,
    },
    /// Run the built-in algebra and finite-difference sanity checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_point(text: &str, dim: usize) -> Result<DVector<f64>> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Invalid(format!("bad coordinate {s:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != dim {
        return Err(Error::Dimension(format!("point has {} coordinates, expected {dim}", values.len())));
    }
    Ok(DVector::from_vec(values))
}

fn matrix_json(m: &nalgebra::DMatrix<f64>) -> serde_json::Value {
    json!(columns(m).iter().map(|c| c.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Verify { config, points, seed, out } => {
            let mut cfg = VerifyConfig::load(&config)?;
            if let Some(p) = points {
                cfg.points = p;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run_identity_suite(&cfg)?;
            match out.or(cfg.output.clone()) {
                Some(path) => crate::verify::write_report(&report, &path)?,
                None => print!("{}", to_json(&report)?),
            }
            eprint!("{}", summary_table(&report));
            eprintln!("wall time {:.3} s", report.wall_time.as_secs_f64());
            Ok(report.exit_code())
        }
        Command::Moment { config, point } => {
            let cfg = VerifyConfig::load(&config)?;
            let x = parse_point(&point, cfg.scenario.dim())?;
            let mu = cfg.scenario.moment_map(&x)?;
            let out = json!({ "mu": mu.triples(), "level_residual": cfg.scenario.level_residual(&x)? });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(0)
        }
        Command::Split { config, point, retract: do_retract } => {
            let cfg = VerifyConfig::load(&config)?;
            let scenario = &cfg.scenario;
            let mut x = parse_point(&point, scenario.dim())?;
            let mut iterations = 0;
            if do_retract {
                let r = retract(scenario, &x, DEFAULT_RETRACT_TOL, DEFAULT_MAX_ITER)?;
                iterations = r.iterations;
                x = r.point.x;
            }
            let split = split_tangent(scenario, &x, 1e-9)?;
            let frame = adapted_frame(scenario, &x, &split)?;
            let out = json!({
                "point": x.iter().copied().collect::<Vec<_>>(),
                "retract_iterations": iterations,
                "level_residual": scenario.level_residual(&x)?,
                "dim_horizontal": split.basis_h.ncols(),
                "dim_vertical": split.basis_v.ncols(),
                "dim_normal": split.basis_n.ncols(),
                "horizontal": matrix_json(&split.basis_h),
                "vertical": matrix_json(&split.basis_v),
                "normal": matrix_json(&split.basis_n),
                "frame_orthogonality_defect": frame.frame.orthogonality_defect(),
                "frame_max_entry": max_abs(&frame.frame.p),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(0)
        }
        Command::Selftest { seed } => {
            let report = run_selftest(seed)?;
            for c in &report.checks {
                println!("{} {:<60} {:.3e}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value);
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
///
/// Exit codes: `0` success, `1` an identity or self-check failed, `2` usage,
/// configuration or geometry error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
