//! The outer iteration: draw a batch, form a safeguarded direction,
//! backtrack, step, record.

use thiserror::Error;

use crate::directions::{DirectionKind, DirectionState, SgrParams};
use crate::error::LineSearchTrial;
use crate::linalg;
use crate::linesearch::{self, LineSearchParams, LineSearchResult};
use crate::problems::{self, BatchSampler, FiniteSum, SamplingMode};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPoint {
    /// Standard normal entries scaled by `1/√n`, from the run seed.
    Random,
    Zeros,
    Ones,
    /// The problem's known minimizer.
    Minimizer,
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub direction: DirectionKind,
    pub line_search: LineSearchParams,
    pub sgr: SgrParams,
    pub sampling: SamplingMode,
    pub max_iters: usize,
    /// Stop once the exact gradient norm is at most this.
    pub grad_tol: f64,
    /// Stop once `f − f*` is at most this (when `f*` is known).
    pub fgap_tol: f64,
    pub seed: u64,
    /// Exact `f` / `∇f` are evaluated every this many iterations.
    pub trace_every: usize,
    pub x0: InitialPoint,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            direction: DirectionKind::Sgd,
            line_search: LineSearchParams::default(),
            sgr: SgrParams::default(),
            sampling: SamplingMode::SingletonEnumerable,
            max_iters: 5000,
            grad_tol: 1e-10,
            fgap_tol: 1e-8,
            seed: 0,
            trace_every: 10,
            x0: InitialPoint::Random,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.line_search.validate()?;
        self.direction.validate()?;
        self.sgr.ensure_restart_admissible()?;
        if self.max_iters < 1 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if self.trace_every < 1 {
            return Err(Error::InvalidParameter("trace_every must be >= 1".into()));
        }
        if !(self.grad_tol >= 0.0 && self.fgap_tol >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be >= 0".into()));
        }
        if self.sampling.batch_size() < 1 {
            return Err(Error::InvalidParameter("batch size must be >= 1".into()));
        }
        Ok(())
    }

    pub fn initial_point<P: FiniteSum + ?Sized>(&self, problem: &P) -> Result<Vec<f64>> {
        let n = problem.dim();
        let x = match &self.x0 {
            InitialPoint::Random => {
                problems::gaussian_point(&mut rng::stream(self.seed, rng::streams::INITIAL_POINT), n)
            }
            InitialPoint::Zeros => vec![0.0; n],
            InitialPoint::Ones => vec![1.0; n],
            InitialPoint::Minimizer => problem
                .known_constants()
                .map(|c| c.x_star.clone())
                .ok_or_else(|| Error::Unsupported("problem has no known minimizer".into()))?,
            InitialPoint::Given(x) => x.clone(),
        };
        if x.len() != n {
            return Err(Error::Shape { expected: n, got: x.len() });
        }
        if !linalg::all_finite(&x) {
            return Err(Error::NumericDomain("initial point is not finite".into()));
        }
        Ok(x)
    }
}

/// Observables of iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub f_full: Option<f64>,
    pub grad_full_norm: Option<f64>,
    pub f_batch: f64,
    pub g_batch_norm: f64,
    pub d_norm: f64,
    pub dtg: f64,
    pub alpha0: f64,
    /// Zero when the batch gradient vanished and no step was taken.
    pub alpha: f64,
    pub backtracks: u32,
    pub sgr_pass: bool,
    pub restarted: bool,
    /// Batch value at the accepted point; equals `f_batch` when no step was taken.
    pub f_batch_accepted: f64,
    pub batch_indices: Vec<usize>,
}

impl IterationRecord {
    pub fn took_step(&self) -> bool {
        self.alpha > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    ConvergedGrad,
    ConvergedFgap,
    MaxIters,
    Stalled,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::ConvergedGrad => "converged_grad",
            RunStatus::ConvergedFgap => "converged_fgap",
            RunStatus::MaxIters => "max_iters",
            RunStatus::Stalled => "stalled",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, RunStatus::ConvergedGrad | RunStatus::ConvergedFgap)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Vec<IterationRecord>,
    pub final_x: Vec<f64>,
    pub status: RunStatus,
    /// Iteration at which the run stopped.
    pub stopped_at: usize,
    /// Exact objective at `final_x`, when evaluated.
    pub final_f_full: Option<f64>,
    pub final_grad_norm: Option<f64>,
    /// Stochastic function evaluations (batch value at the iterate plus all trials).
    pub f_evals: u64,
    pub g_evals: u64,
    /// Rejected trials of the search that stalled, if any.
    pub stall_trials: Vec<LineSearchTrial>,
}

impl RunOutcome {
    pub fn restart_count(&self) -> usize {
        self.trajectory.iter().filter(|r| r.restarted).count()
    }

    pub fn restart_rate(&self) -> f64 {
        let steps = self.trajectory.iter().filter(|r| r.took_step()).count();
        if steps == 0 {
            0.0
        } else {
            self.restart_count() as f64 / steps as f64
        }
    }
}

/// A run that ended in an error other than a line-search stall.
#[derive(Debug, Error)]
#[error("run aborted at iteration {k}: {source}")]
pub struct RunError {
    pub k: usize,
    #[source]
    pub source: Error,
    pub trajectory: Vec<IterationRecord>,
    pub x: Vec<f64>,
}

impl From<RunError> for Error {
    fn from(e: RunError) -> Self {
        e.source
    }
}

struct FullEval {
    f: f64,
    grad_norm: f64,
}

fn full_eval<P: FiniteSum + ?Sized>(problem: &P, x: &[f64]) -> Result<FullEval> {
    let (f, g) = problems::full_oracle(problem, x)?;
    Ok(FullEval {
        f,
        grad_norm: linalg::norm(&g),
    })
}

fn stop_status(eval: &FullEval, f_star: Option<f64>, cfg: &RunConfig) -> Option<RunStatus> {
    if eval.grad_norm <= cfg.grad_tol {
        Some(RunStatus::ConvergedGrad)
    } else if f_star.is_some_and(|fs| eval.f - fs <= cfg.fgap_tol) {
        Some(RunStatus::ConvergedFgap)
    } else {
        None
    }
}

/// Runs the optimizer from the configured initial point.
pub fn run<P: FiniteSum + ?Sized>(problem: &P, config: &RunConfig) -> Result<RunOutcome, RunError> {
    let x0 = config
        .validate()
        .and_then(|_| config.initial_point(problem))
        .map_err(|source| RunError {
            k: 0,
            source,
            trajectory: Vec::new(),
            x: Vec::new(),
        })?;
    run_from(problem, config, x0)
}

/// Runs the optimizer from an explicit starting point.
pub fn run_from<P: FiniteSum + ?Sized>(
    problem: &P,
    config: &RunConfig,
    x0: Vec<f64>,
) -> Result<RunOutcome, RunError> {
    let mut trajectory = Vec::new();
    let mut x = x0;
    let mut k = 0;
    macro_rules! bail {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(source) => {
                    return Err(RunError {
                        k,
                        source,
                        trajectory,
                        x,
                    })
                }
            }
        };
    }

    bail!(config.validate());
    if x.len() != problem.dim() {
        bail!(Err(Error::Shape {
            expected: problem.dim(),
            got: x.len()
        }));
    }
    let f_star = problem.known_constants().map(|c| c.f_star);
    let mut state = bail!(DirectionState::new(config.direction, problem.dim()));
    let mut sampler = bail!(BatchSampler::new(config.sampling, problem.num_components(), config.seed));
    let ls = &config.line_search;
    let mut prev_ls: Option<LineSearchResult> = None;
    let (mut f_evals, mut g_evals) = (0u64, 0u64);

    let finish = |status, stopped_at, trajectory, final_x, full: Option<FullEval>, f_evals, g_evals, stall_trials| {
        RunOutcome {
            trajectory,
            final_x,
            status,
            stopped_at,
            final_f_full: full.as_ref().map(|e| e.f),
            final_grad_norm: full.as_ref().map(|e| e.grad_norm),
            f_evals,
            g_evals,
            stall_trials,
        }
    };

    while k < config.max_iters {
        let mut full = if k % config.trace_every == 0 {
            Some(bail!(full_eval(problem, &x)))
        } else {
            None
        };
        if let Some(status) = full.as_ref().and_then(|e| stop_status(e, f_star, config)) {
            return Ok(finish(status, k, trajectory, x, full, f_evals, g_evals, Vec::new()));
        }

        let batch = sampler.next_batch();
        let (f_batch, g) = bail!(problems::evaluate_batch(problem, &batch, &x));
        f_evals += 1;
        g_evals += 1;
        let g_norm = linalg::norm(&g);
        let alpha0 = linesearch::next_alpha0(ls, prev_ls.as_ref());

        if g_norm == 0.0 {
            // Stationary for the drawn batch; only the exact oracle can tell
            // whether this is the end.
            if full.is_none() {
                full = Some(bail!(full_eval(problem, &x)));
            }
            if let Some(status) = full.as_ref().and_then(|e| stop_status(e, f_star, config)) {
                return Ok(finish(status, k, trajectory, x, full, f_evals, g_evals, Vec::new()));
            }
            trajectory.push(IterationRecord {
                k,
                f_full: full.as_ref().map(|e| e.f),
                grad_full_norm: full.as_ref().map(|e| e.grad_norm),
                f_batch,
                g_batch_norm: 0.0,
                d_norm: 0.0,
                dtg: 0.0,
                alpha0,
                alpha: 0.0,
                backtracks: 0,
                sgr_pass: true,
                restarted: false,
                f_batch_accepted: f_batch,
                batch_indices: batch.indices().to_vec(),
            });
            k += 1;
            continue;
        }

        let outcome = bail!(state.safeguarded_direction(&g, &x, &config.sgr));
        let d = outcome.d;
        let mut f_b = |y: &[f64]| problems::batch_value(problem, &batch, y).unwrap_or(f64::NAN);
        let res = match linesearch::backtrack(&mut f_b, &x, f_batch, &d, &g, ls, alpha0) {
            Ok(r) => r,
            Err(Error::Stall { trials, .. }) => {
                f_evals += trials.len() as u64;
                return Ok(finish(RunStatus::Stalled, k, trajectory, x, full, f_evals, g_evals, trials));
            }
            Err(e) => bail!(Err(e)),
        };
        f_evals += u64::from(res.f_trial_count);

        let x_new = linalg::add_scaled(&x, res.alpha, &d);
        state.update_memory(&x, &g, &d);
        trajectory.push(IterationRecord {
            k,
            f_full: full.as_ref().map(|e| e.f),
            grad_full_norm: full.as_ref().map(|e| e.grad_norm),
            f_batch,
            g_batch_norm: g_norm,
            d_norm: linalg::norm(&d),
            dtg: linalg::dot(&d, &g),
            alpha0,
            alpha: res.alpha,
            backtracks: res.backtracks,
            sgr_pass: outcome.sgr_pass,
            restarted: outcome.restarted,
            f_batch_accepted: res.accepted_f,
            batch_indices: batch.indices().to_vec(),
        });
        prev_ls = Some(res);
        x = x_new;
        k += 1;
    }

    let full = bail!(full_eval(problem, &x));
    let status = stop_status(&full, f_star, config).unwrap_or(RunStatus::MaxIters);
    Ok(finish(status, k, trajectory, x, Some(full), f_evals, g_evals, Vec::new()))
}

/// Geometric rate fitted to the logged optimality gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionEstimate {
    /// `exp(slope)` of the least-squares line through `(k, ln(f_k − f*))`.
    pub per_iter_rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares fit of `ln(f_full − f*)` against `k` over records that
/// carry an exact value strictly above `f*`.
pub fn contraction_estimate(trajectory: &[IterationRecord], f_star: f64) -> Result<ContractionEstimate> {
    let pts: Vec<(f64, f64)> = trajectory
        .iter()
        .filter_map(|r| r.f_full.filter(|&f| f > f_star).map(|f| (r.k as f64, (f - f_star).ln())))
        .collect();
    fit_log_linear(&pts)
}

pub(crate) fn fit_log_linear(pts: &[(f64, f64)]) -> Result<ContractionEstimate> {
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "need at least 10 logged gaps above f*, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mean_k = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_k).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_k) * (p.1 - mean_y)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all samples share one iteration index".into()));
    }
    let slope = sxy / sxx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(ContractionEstimate {
        per_iter_rate: slope.exp(),
        r_squared,
        samples: pts.len(),
    })
}
