//! Command-line front end: `run`, `diagnose`, `verify`, `sweep` and
//! `show-config`.
//!
//! Exit codes: 0 converged / checks passed, 1 configuration or runtime
//! error, 2 iteration cap reached, 3 line-search stall, 4 an estimator is
//! undefined, 5 a trace bound is violated.

pub mod config;
pub mod svg;
pub mod trace;
pub mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::diagnostics::{self, SampledEstimate, TheoremConstants};
use crate::optimizer::{self, RunOutcome, RunStatus};
use crate::problems::FiniteSum;
use crate::{rng, Error, Result};

pub use config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ITERS: i32 = 2;
pub const EXIT_STALLED: i32 = 3;
pub const EXIT_UNDEFINED: i32 = 4;
pub const EXIT_VIOLATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "slsgd", version, about = "Stochastic line-search SGD with safeguarded search directions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (TOML). Defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// `section.key=value`, applied after the file and environment.
    #[arg(long, value_name = "KEY=VALUE", num_args = 1..)]
    overrides: Vec<String>,
    /// Shorthand for `--overrides run.seed=<SEED>`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the optimizer, write the trace and report the status.
    Run(Common),
    /// Estimate growth, PL and covariance constants at sampled points.
    Diagnose {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Check every step-size and safeguard bound on a run or a saved trace.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Check this CSV trace instead of replaying the run.
        #[arg(long, value_name = "CSV")]
        trace: Option<PathBuf>,
    },
    /// Run a range of seeds in parallel, one trace per seed.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Half-open range `a..b`.
        #[arg(long)]
        seeds: String,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Print the resolved configuration.
    ShowConfig(Common),
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run(c) => cmd_run(&c),
        Command::Diagnose { common, points } => cmd_diagnose(&common, points),
        Command::Verify { common, trace } => cmd_verify(&common, trace.as_deref()),
        Command::Sweep { common, seeds, out_dir } => cmd_sweep(&common, &seeds, &out_dir),
        Command::ShowConfig(c) => resolve(&c).map(|cfg| {
            print!("{}", cfg.to_toml());
            EXIT_OK
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}

fn resolve(c: &Common) -> Result<ExperimentConfig> {
    let mut overrides = config::env_overrides(std::env::vars());
    overrides.extend(c.overrides.iter().cloned());
    if let Some(s) = c.seed {
        overrides.push(format!("run.seed={s}"));
    }
    ExperimentConfig::load(c.config.as_deref(), &overrides)
}

pub fn status_exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::ConvergedGrad | RunStatus::ConvergedFgap => EXIT_OK,
        RunStatus::MaxIters => EXIT_MAX_ITERS,
        RunStatus::Stalled => EXIT_STALLED,
    }
}

fn write_csv(path: &Path, out: &RunOutcome) -> Result<()> {
    trace::write_trace(BufWriter::new(File::create(path)?), &out.trajectory)
}

fn gap_points(out: &RunOutcome, f_star: f64) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = out
        .trajectory
        .iter()
        .filter_map(|r| r.f_full.map(|f| (r.k as f64, f - f_star)))
        .collect();
    if let Some(f) = out.final_f_full {
        pts.push((out.stopped_at as f64, f - f_star));
    }
    pts
}

fn cmd_run(c: &Common) -> Result<i32> {
    let cfg = resolve(c)?;
    let rc = cfg.run_config()?;
    let problem = cfg.build_problem()?;
    let out = optimizer::run(problem.as_ref(), &rc)?;
    if let Some(path) = &cfg.run.out_csv {
        write_csv(Path::new(path), &out)?;
    }
    let f_star = problem.known_constants().map(|k| k.f_star);
    if let Some(path) = &cfg.run.out_svg {
        match f_star {
            Some(fs) => {
                let title = format!(
                    "{:?} direction, seed {}: f - f* ({})",
                    cfg.direction.kind,
                    cfg.run.seed,
                    out.status.as_str()
                );
                std::fs::write(path, svg::convergence_plot(&gap_points(&out, fs), &title))?;
            }
            None => eprintln!("note: no SVG written, f* is unknown"),
        }
    }
    println!("status = {}", out.status.as_str());
    println!("iterations = {}", out.stopped_at);
    if let Some(f) = out.final_f_full {
        println!("final_f = {f}");
    }
    if let Some(g) = out.final_grad_norm {
        println!("final_grad_norm = {g}");
    }
    println!("f_evals = {}", out.f_evals);
    println!("restart_rate = {}", out.restart_rate());
    match f_star.map(|fs| optimizer::contraction_estimate(&out.trajectory, fs)) {
        Some(Ok(est)) => println!(
            "contraction_rate = {} (r2 = {}, samples = {})",
            est.per_iter_rate, est.r_squared, est.samples
        ),
        Some(Err(e)) => println!("contraction_rate = unavailable: {e}"),
        None => println!("contraction_rate = unavailable: f* unknown"),
    }
    if out.status == RunStatus::Stalled {
        let last = out.stall_trials.last().map(|t| t.alpha).unwrap_or(f64::NAN);
        println!("stall = no Armijo step among {} trials, smallest alpha {last}", out.stall_trials.len());
    }
    Ok(status_exit_code(out.status))
}

fn cmd_verify(c: &Common, trace_path: Option<&Path>) -> Result<i32> {
    let cfg = resolve(c)?;
    let rc = cfg.run_config()?;
    let problem = cfg.build_problem()?;
    let l_max = problem
        .known_constants()
        .and_then(|k| k.l_max)
        .ok_or_else(|| Error::Config("verify needs a problem with known L_max".into()))?;
    let bounds = verify::TraceBounds::new(&rc.sgr, &rc.line_search, l_max)?;
    println!("alpha_low = {}", bounds.alpha_low);
    println!("jstar = {}", bounds.jstar);

    let rows: Vec<(trace::TraceRow, Option<f64>)> = match trace_path {
        Some(p) => {
            println!("batch_decrease = not checked (a trace does not carry accepted batch values)");
            trace::read_trace(BufReader::new(File::open(p)?))?
                .into_iter()
                .map(|r| (r, None))
                .collect()
        }
        None => {
            let out = optimizer::run(problem.as_ref(), &rc)?;
            if out.status == RunStatus::Stalled {
                println!("status = stalled at k = {}; verify not reached", out.stopped_at);
                return Ok(EXIT_STALLED);
            }
            out.trajectory
                .iter()
                .map(|r| (trace::TraceRow::from(r), Some(r.f_batch_accepted)))
                .collect()
        }
    };
    for (row, accepted) in &rows {
        if let Some(msg) = bounds.check(row, *accepted) {
            println!("violation at row k = {}: {msg}", row.k);
            return Ok(EXIT_VIOLATION);
        }
    }
    println!("verified_rows = {}", rows.len());
    Ok(EXIT_OK)
}

fn parse_seed_range(s: &str) -> Result<std::ops::Range<u64>> {
    let bad = || Error::Config(format!("seed range `{s}` is not of the form a..b with a < b"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a >= b {
        return Err(bad());
    }
    Ok(a..b)
}

fn cmd_sweep(c: &Common, seeds: &str, out_dir: &Path) -> Result<i32> {
    let cfg = resolve(c)?;
    let range = parse_seed_range(seeds)?;
    let problem = cfg.build_problem()?;
    let base = cfg.run_config()?;
    std::fs::create_dir_all(out_dir)?;
    let results: Vec<(u64, Result<RunOutcome>)> = range
        .into_par_iter()
        .map(|seed| {
            let rc = optimizer::RunConfig { seed, ..base.clone() };
            let res = optimizer::run(problem.as_ref(), &rc)
                .map_err(|e| e.source)
                .and_then(|out| {
                    write_csv(&out_dir.join(format!("seed_{seed}.csv")), &out)?;
                    Ok(out)
                });
            (seed, res)
        })
        .collect();
    let mut code = EXIT_OK;
    for (seed, res) in results {
        match res {
            Ok(out) => {
                let final_f = out.final_f_full.map(|f| f.to_string()).unwrap_or_default();
                println!(
                    "seed = {seed} status = {} iterations = {} final_f = {final_f}",
                    out.status.as_str(),
                    out.stopped_at
                );
                code = code.max(status_exit_code(out.status));
            }
            Err(e) => {
                println!("seed = {seed} error = {e}");
                code = code.max(EXIT_STALLED).max(EXIT_ERROR);
            }
        }
    }
    Ok(code)
}

fn report(key: &str, est: &Result<SampledEstimate>, undefined: &mut Vec<String>) -> Option<f64> {
    match est {
        Ok(e) => {
            println!("{key} = {} (sample {}, {} used)", e.value, e.at, e.used);
            Some(e.value)
        }
        Err(e) => {
            println!("{key} = undefined: {e}");
            undefined.push(key.to_string());
            None
        }
    }
}

fn cmd_diagnose(c: &Common, num_points: usize) -> Result<i32> {
    let cfg = resolve(c)?;
    let rc = cfg.run_config()?;
    let problem = cfg.build_problem()?;
    let p: &dyn FiniteSum = problem.as_ref();
    let dim = p.dim();
    if num_points == 0 {
        return Err(Error::Config("--points must be >= 1".into()));
    }
    let points = diagnostics::sample_points(dim, num_points, rc.seed, None, 1.0);
    let known = p.known_constants();
    let mut undefined = Vec::new();
    println!("points = {num_points}");
    println!("seed = {}", rc.seed);

    if let Some(mu) = known.and_then(|k| k.mu) {
        println!("mu_known = {mu}");
    }
    let mut local = None;
    if let Some(k) = known {
        let eig = diagnostics::hessian_spectrum(p, &k.x_star, 1e-4)?;
        match diagnostics::positive_extremes(&eig, 1e-8) {
            Ok((mu, l)) => {
                println!("mu_hat = {mu}");
                println!("l_hat = {l}");
                local = Some((mu, l));
            }
            Err(e) => {
                println!("mu_hat = undefined: {e}");
                undefined.push("mu_hat".into());
            }
        }
    }
    let mu_sampled = report("mu_sampled", &diagnostics::estimate_pl(p, &points), &mut undefined);
    let rho = report("rho_hat", &diagnostics::estimate_rho(p, &points), &mut undefined);
    match known.and_then(|k| k.l).or(local.map(|t| t.1)) {
        Some(l) => {
            report("wgc_hat", &diagnostics::estimate_wgc(p, &points, l), &mut undefined);
        }
        None => println!("wgc_hat = unavailable: no smoothness constant"),
    }

    let displacement: Vec<f64> =
        crate::problems::gaussian_point(&mut rng::stream(rc.seed, rng::streams::FROZEN_MEMORY), dim)
            .into_iter()
            .map(|v| 0.1 * v)
            .collect();
    let c3 = report(
        "c3_hat",
        &diagnostics::estimate_c3(p, &points, |x| {
            diagnostics::frozen_rule_with_memory(p, rc.direction, rc.sgr, x, &displacement)
        }),
        &mut undefined,
    );
    report(
        "variance_bound",
        &diagnostics::estimate_variance_bound(p, &points),
        &mut undefined,
    );

    let (Some(rho), Some(c3)) = (rho, c3) else {
        println!("lemma_bounds = unavailable: rho or c3 undefined");
        return Ok(EXIT_UNDEFINED);
    };
    let ls = &rc.line_search;
    let mu = known.and_then(|k| k.mu).or(local.map(|t| t.0)).or(mu_sampled);
    let tc = TheoremConstants {
        c1: rc.sgr.c1(),
        c2: rc.sgr.c2(),
        c3,
        rho,
        mu: mu.unwrap_or(0.0),
        l: known.and_then(|k| k.l).or(local.map(|t| t.1)).unwrap_or(f64::NAN),
        l_max: known.and_then(|k| k.l_max).unwrap_or(f64::NAN),
        gamma: ls.gamma,
        delta: ls.delta,
        alpha_max: ls.alpha_max,
    };
    println!("sigma = {}", tc.sigma());
    if tc.lemma_applicable() {
        let (mut norm_min, mut descent_min) = (f64::INFINITY, f64::INFINITY);
        for x in &points {
            let rule = diagnostics::frozen_rule_with_memory(p, rc.direction, rc.sgr, x, &displacement)?;
            let chk = diagnostics::verify_lemma_bounds(p, x, &rule, &tc)?;
            norm_min = norm_min.min(chk.norm_slack);
            descent_min = descent_min.min(chk.descent_slack);
        }
        println!("lemma_norm_slack_min = {norm_min}");
        println!("lemma_descent_slack_min = {descent_min}");
    } else {
        println!("lemma_bounds = inapplicable: c2 <= c3 (1 - 1/rho)");
    }
    if mu.is_some() && tc.l_max.is_finite() {
        let eta = diagnostics::compute_eta(&tc)?;
        println!("eta = {}", eta.eta);
        println!("eta_alpha_max = {}", eta.certified_rate);
        println!("theorem_applicable = {}", eta.applicable);
    } else {
        println!("eta = unavailable: needs mu and L_max");
    }
    Ok(if undefined.is_empty() { EXIT_OK } else { EXIT_UNDEFINED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("3..7").unwrap(), 3..7);
        assert!(parse_seed_range("7..3").is_err());
        assert!(parse_seed_range("3-7").is_err());
        assert!(parse_seed_range("a..2").is_err());
    }

    #[test]
    fn exit_codes_by_status() {
        assert_eq!(status_exit_code(RunStatus::ConvergedGrad), 0);
        assert_eq!(status_exit_code(RunStatus::ConvergedFgap), 0);
        assert_eq!(status_exit_code(RunStatus::MaxIters), 2);
        assert_eq!(status_exit_code(RunStatus::Stalled), 3);
    }

    #[test]
    fn help_is_not_an_error() {
        assert_eq!(main_with_args(["slsgd", "--help"]), EXIT_OK);
        assert_eq!(main_with_args(["slsgd", "bogus"]), EXIT_ERROR);
    }
}
