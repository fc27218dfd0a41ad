//! Backtracking search on the sampled batch function.
//!
//! The accepted step is the largest `α0 δʲ`, `j = 0, 1, …`, satisfying
//!
//! ```text
//! f_B(x + α d) ≤ f_B(x) + γ α dᵀ∇f_B(x)
//! ```
//!
//! where `f_B` is the batch objective of the current iteration. When `d`
//! passes the `(c1, c2)` safeguard and `f_B` is `L_B`-smooth, every
//! `α ≤ alpha_low(c1, c2, γ, L_B)` is accepted, which caps the number of
//! backtracks at [`jstar`].

use crate::error::LineSearchTrial;
use crate::linalg;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alpha0Policy {
    /// Always start from `alpha_max`.
    Constant,
    /// Start from `min(alpha_max, α_{k−1} / δ^p)`.
    WarmIncrease { p: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    pub gamma: f64,
    pub delta: f64,
    pub alpha_max: f64,
    pub alpha0_policy: Alpha0Policy,
    pub max_backtracks: u32,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            delta: 0.5,
            alpha_max: 10.0,
            alpha0_policy: Alpha0Policy::Constant,
            max_backtracks: 60,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParameter(what));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.alpha_max > 0.0 && self.alpha_max.is_finite()) {
            return bad(format!("alpha_max must be positive, got {}", self.alpha_max));
        }
        if self.max_backtracks < 1 {
            return bad("max_backtracks must be >= 1".into());
        }
        if let Alpha0Policy::WarmIncrease { p: 0 } = self.alpha0_policy {
            return bad("warm_increase needs p >= 1".into());
        }
        Ok(())
    }

    /// The `j`-th trial step. Every caller goes through this so the same
    /// floating expression is used everywhere.
    #[inline]
    pub fn trial_step(alpha0: f64, delta: f64, j: u32) -> f64 {
        alpha0 * delta.powi(j as i32)
    }
}

/// Outcome of one backtracking search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    /// `j_k`, number of rejected trials.
    pub backtracks: u32,
    /// Batch-function evaluations spent on trials (`backtracks + 1`).
    pub f_trial_count: u32,
    /// Batch value at the accepted point.
    pub accepted_f: f64,
    pub alpha0: f64,
    /// Trials whose value came back NaN / infinite (counted as rejections).
    pub nonfinite_trials: u32,
}

fn armijo_trial<F>(f_batch: &mut F, x: &[f64], d: &[f64], dtg: f64, alpha: f64, gamma: f64, f_x: f64) -> (bool, f64, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let f_trial = f_batch(&linalg::add_scaled(x, alpha, d));
    let rhs = f_x + gamma * alpha * dtg;
    (f_trial.is_finite() && f_trial <= rhs, f_trial, rhs)
}

/// Sufficient-decrease test at one step size. Makes exactly one call to
/// `f_batch`; a non-finite trial value counts as failure. `f_x` must be
/// `f_batch(x)`.
pub fn armijo_holds<F>(f_batch: &mut F, x: &[f64], d: &[f64], g: &[f64], alpha: f64, gamma: f64, f_x: f64) -> bool
where
    F: FnMut(&[f64]) -> f64,
{
    armijo_trial(f_batch, x, d, linalg::dot(d, g), alpha, gamma, f_x).0
}

/// Largest `alpha0 δʲ` passing [`armijo_holds`], scanning `j = 0..=max_backtracks`.
///
/// `f_x` is the batch value at `x`, already paid for by the caller.
pub fn backtrack<F>(
    f_batch: &mut F,
    x: &[f64],
    f_x: f64,
    d: &[f64],
    g: &[f64],
    params: &LineSearchParams,
    alpha0: f64,
) -> Result<LineSearchResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let dtg = linalg::dot(d, g);
    if !(dtg < 0.0) {
        return Err(Error::NonDescent { dtg });
    }
    if !(alpha0 > 0.0 && alpha0 <= params.alpha_max) {
        return Err(Error::InvalidParameter(format!(
            "initial step {alpha0} outside (0, {}]",
            params.alpha_max
        )));
    }
    let mut trials = Vec::new();
    let mut nonfinite = 0;
    for j in 0..=params.max_backtracks {
        let alpha = LineSearchParams::trial_step(alpha0, params.delta, j);
        let (ok, f_trial, rhs) = armijo_trial(f_batch, x, d, dtg, alpha, params.gamma, f_x);
        if ok {
            return Ok(LineSearchResult {
                alpha,
                backtracks: j,
                f_trial_count: j + 1,
                accepted_f: f_trial,
                alpha0,
                nonfinite_trials: nonfinite,
            });
        }
        if !f_trial.is_finite() {
            nonfinite += 1;
        }
        trials.push(LineSearchTrial { alpha, f_trial, rhs });
    }
    Err(Error::Stall {
        last_alpha: trials.last().map_or(alpha0, |t| t.alpha),
        trials,
    })
}

/// Step size below which the sufficient-decrease test always passes:
/// `2 c2 (1 − γ) / (c1² L)`.
pub fn alpha_low(c1: f64, c2: f64, gamma: f64, l: f64) -> Result<f64> {
    if !(c1 > 0.0 && c2 > 0.0 && gamma > 0.0 && gamma < 1.0 && l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha_low needs positive c1, c2, L and gamma in (0, 1); got c1 = {c1}, c2 = {c2}, \
             gamma = {gamma}, L = {l}"
        )));
    }
    Ok(2.0 * c2 * (1.0 - gamma) / (c1 * c1 * l))
}

/// Worst-case backtrack count `max{0, ⌈log_{1/δ}(alpha_max / alpha_low)⌉}`,
/// computed as the smallest `j ≥ 0` with `alpha_max δʲ ≤ alpha_low` using the
/// same step expression as [`backtrack`].
pub fn jstar(alpha_max: f64, alpha_low: f64, delta: f64) -> Result<u32> {
    if !(alpha_max > 0.0 && alpha_low > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "jstar needs positive steps and delta in (0, 1); got alpha_max = {alpha_max}, \
             alpha_low = {alpha_low}, delta = {delta}"
        )));
    }
    let mut j = 0u32;
    while LineSearchParams::trial_step(alpha_max, delta, j) > alpha_low {
        j = j
            .checked_add(1)
            .ok_or_else(|| Error::InvalidParameter("jstar overflow".into()))?;
    }
    Ok(j)
}

/// Initial trial step for the next search.
pub fn next_alpha0(params: &LineSearchParams, prev: Option<&LineSearchResult>) -> f64 {
    match (params.alpha0_policy, prev) {
        (Alpha0Policy::WarmIncrease { p }, Some(r)) if r.alpha > 0.0 => {
            (r.alpha / params.delta.powi(p as i32)).min(params.alpha_max)
        }
        _ => params.alpha_max,
    }
}
