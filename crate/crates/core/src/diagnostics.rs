//! Moments of the stochastic gradient and direction, sampled growth and
//! PL constants, and the expected-direction bounds behind the linear rate.
//!
//! Expectations are over the batch draw at a fixed point with optimizer
//! memory frozen. The default oracle enumerates all singleton batches.

use rand::Rng;
use rayon::prelude::*;

use crate::directions::{DirectionState, SgrParams};
use crate::linalg;
use crate::problems::{self, Batch, FiniteSum};
use crate::rng;
use crate::{Error, Result};

/// Ratios with a denominator at or below this are skipped.
pub const ESTIMATOR_TOL: f64 = 1e-10;

/// Maps a drawn batch and its gradient to a direction, memory frozen.
pub type DirectionRule<'a> = Box<dyn Fn(&Batch, &[f64]) -> Vec<f64> + Sync + 'a>;

pub fn negative_gradient_rule<'a>() -> DirectionRule<'a> {
    Box::new(|_, g| linalg::neg(g))
}

/// The safeguarded direction of `state` at `x`, without touching its memory.
pub fn frozen_rule<'a>(state: DirectionState, params: SgrParams, x: &'a [f64]) -> Result<DirectionRule<'a>> {
    params.ensure_restart_admissible()?;
    Ok(Box::new(move |_, g| {
        state
            .frozen_direction(g, x, &params)
            .expect("safeguard admissibility checked when the rule was built")
            .d
    }))
}

/// Direction state whose memory is one full-gradient step ending at `x`:
/// previous point `x − displacement`, previous gradient and direction
/// taken there.
pub fn state_with_memory<P: FiniteSum + ?Sized>(
    problem: &P,
    kind: crate::directions::DirectionKind,
    x: &[f64],
    displacement: &[f64],
) -> Result<DirectionState> {
    let mut state = DirectionState::new(kind, problem.dim())?;
    let x_prev = linalg::sub(x, displacement);
    let (_, g_prev) = problems::full_oracle(problem, &x_prev)?;
    state.update_memory(&x_prev, &g_prev, &linalg::neg(&g_prev));
    Ok(state)
}

/// [`frozen_rule`] over [`state_with_memory`].
pub fn frozen_rule_with_memory<'a, P: FiniteSum + ?Sized>(
    problem: &P,
    kind: crate::directions::DirectionKind,
    params: SgrParams,
    x: &'a [f64],
    displacement: &[f64],
) -> Result<DirectionRule<'a>> {
    frozen_rule(state_with_memory(problem, kind, x, displacement)?, params, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    ExactSingletonEnumeration,
    MonteCarlo { samples: usize, batch_size: usize },
}

/// Standard errors of the Monte Carlo means.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentErrors {
    pub e_g: Vec<f64>,
    pub e_norm_g_sq: f64,
    pub e_dtg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub x: Vec<f64>,
    pub e_g: Vec<f64>,
    pub e_norm_g_sq: f64,
    /// `E‖g − E g‖²`
    pub var_g: f64,
    pub e_d: Vec<f64>,
    pub e_dtg: f64,
    /// `E (d − E d)ᵀ(g − E g)`
    pub cov_dg: f64,
    pub mode: MomentMode,
    pub std_errors: Option<MomentErrors>,
}

impl MomentReport {
    fn from_samples(x: &[f64], samples: &[(Vec<f64>, Vec<f64>)], mode: MomentMode) -> Self {
        let n = x.len();
        let m = samples.len() as f64;
        let mut e_g = vec![0.0; n];
        let mut e_d = vec![0.0; n];
        let (mut e_norm_g_sq, mut e_dtg) = (0.0, 0.0);
        for (g, d) in samples {
            linalg::axpy(1.0, g, &mut e_g);
            linalg::axpy(1.0, d, &mut e_d);
            e_norm_g_sq += linalg::norm_sq(g);
            e_dtg += linalg::dot(d, g);
        }
        e_g.iter_mut().chain(e_d.iter_mut()).for_each(|v| *v /= m);
        e_norm_g_sq /= m;
        e_dtg /= m;
        let (mut var_g, mut cov_dg) = (0.0, 0.0);
        for (g, d) in samples {
            let gc = linalg::sub(g, &e_g);
            var_g += linalg::norm_sq(&gc);
            cov_dg += linalg::dot(&linalg::sub(d, &e_d), &gc);
        }
        Self {
            x: x.to_vec(),
            e_g,
            e_norm_g_sq,
            var_g: (var_g / m).max(0.0),
            e_d,
            e_dtg,
            cov_dg: cov_dg / m,
            mode,
            std_errors: None,
        }
    }

    /// `‖∇f(x)‖²`, exact under enumeration.
    pub fn full_grad_norm_sq(&self) -> f64 {
        linalg::norm_sq(&self.e_g)
    }
}

fn draw<P: FiniteSum + ?Sized>(problem: &P, batch: &Batch, x: &[f64], rule: &DirectionRule) -> Result<(Vec<f64>, Vec<f64>)> {
    let (_, g) = problems::evaluate_batch(problem, batch, x)?;
    let d = rule(batch, &g);
    if d.len() != g.len() {
        return Err(Error::Shape {
            expected: g.len(),
            got: d.len(),
        });
    }
    Ok((g, d))
}

/// Moments as uniform averages over all `N` singleton batches.
pub fn exact_moments<P: FiniteSum + ?Sized>(problem: &P, x: &[f64], rule: &DirectionRule) -> Result<MomentReport> {
    let samples = (0..problem.num_components())
        .into_par_iter()
        .map(|i| draw(problem, &Batch::singleton(i), x, rule))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentReport::from_samples(
        x,
        &samples,
        MomentMode::ExactSingletonEnumeration,
    ))
}

/// Moments from `samples` batches of `batch_size` indices drawn uniformly
/// with replacement.
pub fn monte_carlo_moments<P: FiniteSum + ?Sized>(
    problem: &P,
    x: &[f64],
    rule: &DirectionRule,
    batch_size: usize,
    samples: usize,
    seed: u64,
) -> Result<MomentReport> {
    if batch_size == 0 || samples < 2 {
        return Err(Error::InvalidParameter(
            "Monte Carlo needs batch_size >= 1 and at least 2 samples".into(),
        ));
    }
    let n_comp = problem.num_components();
    let mut r = rng::stream(seed, rng::streams::MONTE_CARLO);
    let batches: Vec<Batch> = (0..samples)
        .map(|_| Batch::new((0..batch_size).map(|_| r.random_range(0..n_comp)).collect(), n_comp))
        .collect::<Result<_>>()?;
    let draws = batches
        .par_iter()
        .map(|b| draw(problem, b, x, rule))
        .collect::<Result<Vec<_>>>()?;
    let mut report = MomentReport::from_samples(
        x,
        &draws,
        MomentMode::MonteCarlo { samples, batch_size },
    );
    let m = samples as f64;
    let se = |sq_dev: f64| (sq_dev / (m - 1.0) / m).sqrt();
    let e_g = (0..x.len())
        .map(|j| se(draws.iter().map(|(g, _)| (g[j] - report.e_g[j]).powi(2)).sum()))
        .collect();
    let e_norm_g_sq = se(draws
        .iter()
        .map(|(g, _)| (linalg::norm_sq(g) - report.e_norm_g_sq).powi(2))
        .sum());
    let e_dtg = se(draws
        .iter()
        .map(|(g, d)| (linalg::dot(d, g) - report.e_dtg).powi(2))
        .sum());
    report.std_errors = Some(MomentErrors {
        e_g,
        e_norm_g_sq,
        e_dtg,
    });
    Ok(report)
}

/// Extremum of a sampled ratio and where it was attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledEstimate {
    pub value: f64,
    /// Index into the sample list.
    pub at: usize,
    /// Samples that passed the denominator guard.
    pub used: usize,
}

fn extremum(ratios: impl Iterator<Item = (usize, f64)>, larger: bool, what: &str) -> Result<SampledEstimate> {
    let mut best: Option<SampledEstimate> = None;
    let mut used = 0;
    for (at, value) in ratios {
        used += 1;
        let better = match best {
            None => true,
            Some(b) => (larger && value > b.value) || (!larger && value < b.value),
        };
        if better {
            best = Some(SampledEstimate { value, at, used: 0 });
        }
    }
    best.map(|b| SampledEstimate { used, ..b })
        .ok_or_else(|| Error::Undefined(format!("{what}: no sample passes the denominator guard")))
}

/// Smallest `c3` with `Cov(d, g) ≥ −c3·Var(g)` on the sampled points.
/// `rule_at` builds the frozen direction rule for each point.
pub fn estimate_c3<'a, P, F>(problem: &P, points: &'a [Vec<f64>], rule_at: F) -> Result<SampledEstimate>
where
    P: FiniteSum + ?Sized,
    F: Fn(&'a [f64]) -> Result<DirectionRule<'a>>,
{
    let mut ratios = Vec::new();
    for (at, x) in points.iter().enumerate() {
        let rep = exact_moments(problem, x, &rule_at(x)?)?;
        if rep.var_g > 0.0 {
            ratios.push((at, (-rep.cov_dg).max(0.0) / rep.var_g));
        }
    }
    extremum(ratios.into_iter(), true, "c3")
}

/// Sampled strong growth constant `max E‖g‖² / ‖∇f‖²`.
pub fn estimate_rho<P: FiniteSum + ?Sized>(problem: &P, points: &[Vec<f64>]) -> Result<SampledEstimate> {
    let rule = negative_gradient_rule();
    let mut ratios = Vec::new();
    for (at, x) in points.iter().enumerate() {
        let rep = exact_moments(problem, x, &rule)?;
        let denom = rep.full_grad_norm_sq();
        if denom.sqrt() > ESTIMATOR_TOL {
            ratios.push((at, rep.e_norm_g_sq / denom));
        }
    }
    extremum(ratios.into_iter(), true, "rho")
}

fn f_star_of<P: FiniteSum + ?Sized>(problem: &P) -> Result<f64> {
    problem
        .known_constants()
        .map(|c| c.f_star)
        .ok_or_else(|| Error::Unsupported("optimal value f* is unknown for this problem".into()))
}

/// Sampled weak growth constant `max E‖g‖² / (2L(f − f*))`.
pub fn estimate_wgc<P: FiniteSum + ?Sized>(problem: &P, points: &[Vec<f64>], l: f64) -> Result<SampledEstimate> {
    let f_star = f_star_of(problem)?;
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidParameter(format!("L must be positive, got {l}")));
    }
    let rule = negative_gradient_rule();
    let mut ratios = Vec::new();
    for (at, x) in points.iter().enumerate() {
        let gap = problems::full_oracle(problem, x)?.0 - f_star;
        if gap > ESTIMATOR_TOL {
            let rep = exact_moments(problem, x, &rule)?;
            ratios.push((at, rep.e_norm_g_sq / (2.0 * l * gap)));
        }
    }
    extremum(ratios.into_iter(), true, "wgc")
}

/// Largest PL constant valid on the samples: `min ‖∇f‖² / (2(f − f*))`.
pub fn estimate_pl<P: FiniteSum + ?Sized>(problem: &P, points: &[Vec<f64>]) -> Result<SampledEstimate> {
    let f_star = f_star_of(problem)?;
    let mut ratios = Vec::new();
    for (at, x) in points.iter().enumerate() {
        let (f, g) = problems::full_oracle(problem, x)?;
        let gap = f - f_star;
        if gap > ESTIMATOR_TOL {
            ratios.push((at, linalg::norm_sq(&g) / (2.0 * gap)));
        }
    }
    extremum(ratios.into_iter(), false, "pl")
}

/// Sampled maximum of `Var(g)`.
pub fn estimate_variance_bound<P: FiniteSum + ?Sized>(problem: &P, points: &[Vec<f64>]) -> Result<SampledEstimate> {
    let rule = negative_gradient_rule();
    let mut ratios = Vec::new();
    for (at, x) in points.iter().enumerate() {
        ratios.push((at, exact_moments(problem, x, &rule)?.var_g));
    }
    extremum(ratios.into_iter(), true, "variance")
}

/// Constants entering the expected-direction bounds and the rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub rho: f64,
    pub mu: f64,
    pub l: f64,
    pub l_max: f64,
    pub gamma: f64,
    pub delta: f64,
    pub alpha_max: f64,
}

impl TheoremConstants {
    /// Guaranteed expected descent coefficient `c2 − c3(1 − 1/ρ)`.
    pub fn sigma(&self) -> f64 {
        self.c2 - self.c3 * (1.0 - 1.0 / self.rho)
    }

    pub fn lemma_applicable(&self) -> bool {
        self.c2 > self.c3 * (1.0 - 1.0 / self.rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaReport {
    pub eta: f64,
    pub sigma: f64,
    /// `η·α_max`, the certified per-iteration contraction when applicable.
    pub certified_rate: f64,
    /// The descent coupling holds and `0 < η < 1/α_max`.
    pub applicable: bool,
}

pub fn compute_eta(c: &TheoremConstants) -> Result<EtaReport> {
    if !(c.gamma > 0.0 && c.gamma < 1.0) || !(c.delta > 0.0 && c.delta < 1.0) {
        return Err(Error::NumericDomain(format!(
            "gamma and delta must lie in (0, 1), got {} and {}",
            c.gamma, c.delta
        )));
    }
    let positive = [c.c1, c.c2, c.rho, c.l_max, c.alpha_max];
    if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(c.c3 >= 0.0 && c.mu >= 0.0) {
        return Err(Error::NumericDomain(
            "c1, c2, rho, L_max, alpha_max must be positive; c3, mu nonnegative".into(),
        ));
    }
    let sigma = c.sigma();
    let eta = (c.l_max * c.c1 * c.c1 / (2.0 * c.c2)) * (1.0 / c.gamma + 1.0 / (c.delta * (1.0 - c.gamma)))
        - 2.0 * sigma * c.mu;
    Ok(EtaReport {
        eta,
        sigma,
        certified_rate: eta * c.alpha_max,
        applicable: c.lemma_applicable() && eta > 0.0 && eta < 1.0 / c.alpha_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCheck {
    pub norm_ok: bool,
    pub descent_ok: bool,
    /// `c1√ρ‖∇f‖ − ‖E d‖`
    pub norm_slack: f64,
    /// `−σ‖∇f‖² − E[d]ᵀ∇f`
    pub descent_slack: f64,
}

/// Checks `‖E d‖ ≤ c1√ρ‖∇f‖` and `E[d]ᵀ∇f ≤ −σ‖∇f‖²` with exact moments.
pub fn verify_lemma_bounds<P: FiniteSum + ?Sized>(
    problem: &P,
    x: &[f64],
    rule: &DirectionRule,
    c: &TheoremConstants,
) -> Result<LemmaCheck> {
    if !c.lemma_applicable() {
        return Err(Error::Precondition(format!(
            "need c2 > c3(1 - 1/rho): c2 = {}, c3 = {}, rho = {}",
            c.c2, c.c3, c.rho
        )));
    }
    let rep = exact_moments(problem, x, rule)?;
    let grad = &rep.e_g;
    let gn_sq = linalg::norm_sq(grad);
    let norm_slack = c.c1 * c.rho.sqrt() * gn_sq.sqrt() - linalg::norm(&rep.e_d);
    let descent_slack = -c.sigma() * gn_sq - linalg::dot(&rep.e_d, grad);
    Ok(LemmaCheck {
        norm_ok: norm_slack >= 0.0,
        descent_ok: descent_slack >= 0.0,
        norm_slack,
        descent_slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationCheck {
    pub holds: bool,
    pub worst_i: usize,
    pub worst_norm: f64,
}

/// Whether every component gradient vanishes (within `tol`) at `x_star`.
pub fn check_interpolation<P: FiniteSum + ?Sized>(problem: &P, x_star: &[f64], tol: f64) -> Result<InterpolationCheck> {
    let mut worst = (0, 0.0);
    for i in 0..problem.num_components() {
        let (_, g) = problems::evaluate_batch(problem, &Batch::singleton(i), x_star)?;
        let gn = linalg::norm(&g);
        if gn > worst.1 {
            worst = (i, gn);
        }
    }
    Ok(InterpolationCheck {
        holds: worst.1 <= tol,
        worst_i: worst.0,
        worst_norm: worst.1,
    })
}

/// Eigenvalues (ascending) of the symmetrized central-difference Hessian
/// of `f` at `x`, built from `2n` exact gradients. Exact up to rounding
/// for quadratics.
pub fn hessian_spectrum<P: FiniteSum + ?Sized>(problem: &P, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = problem.dim();
    if x.len() != n {
        return Err(Error::Shape { expected: n, got: x.len() });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("difference step must be positive, got {h}")));
    }
    let columns = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut xp = x.to_vec();
            xp[j] += h;
            let mut xm = x.to_vec();
            xm[j] -= h;
            let gp = problems::full_oracle(problem, &xp)?.1;
            let gm = problems::full_oracle(problem, &xm)?.1;
            Ok(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let hess = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (columns[j][i] + columns[i][j]));
    let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(hess).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Smallest eigenvalue above `rel_tol · λ_max`, and `λ_max`.
pub fn positive_extremes(eigenvalues: &[f64], rel_tol: f64) -> Result<(f64, f64)> {
    let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::Undefined("no positive curvature".into()));
    }
    let min = eigenvalues
        .iter()
        .copied()
        .filter(|&v| v > rel_tol * max)
        .fold(f64::INFINITY, f64::min);
    Ok((min, max))
}

/// Sample points `center + scale·z`, `z` with `N(0, 1/n)` entries, from
/// the diagnostic stream of `seed`.
pub fn sample_points(dim: usize, count: usize, seed: u64, center: Option<&[f64]>, scale: f64) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed, rng::streams::DIAGNOSTIC_POINTS);
    (0..count)
        .map(|_| {
            let z = problems::gaussian_point(&mut r, dim);
            match center {
                Some(c) => linalg::add_scaled(c, scale, &z),
                None => z.into_iter().map(|v| scale * v).collect(),
            }
        })
        .collect()
}
