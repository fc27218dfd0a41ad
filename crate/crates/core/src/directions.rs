//! Search-direction rules and the stochastic-gradient-related safeguard.
//!
//! A direction `d` for the sampled gradient `g` is admissible when
//!
//! ```text
//! ‖d‖ ≤ c1 ‖g‖   and   dᵀg ≤ −c2 ‖g‖²
//! ```
//!
//! Directions that fail either bound are replaced by `−g` and the rule's
//! history is dropped. `−g` itself is admissible whenever `c1 ≥ 1` and
//! `c2 ≤ 1`, which is checked once when the run is configured.

use crate::linalg;
use crate::{Error, Result};

/// The constants `(c1, c2)` of the admissibility test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgrParams {
    c1: f64,
    c2: f64,
}

impl Default for SgrParams {
    fn default() -> Self {
        Self { c1: 10.0, c2: 0.1 }
    }
}

impl SgrParams {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sgr constants must be finite and positive, got c1 = {c1}, c2 = {c2}"
            )));
        }
        if c2 > c1 {
            return Err(Error::InvalidParameter(format!(
                "sgr constants need c2 <= c1, got c1 = {c1}, c2 = {c2}"
            )));
        }
        Ok(Self { c1, c2 })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Errors unless the restart direction `−g` passes the test.
    pub fn ensure_restart_admissible(&self) -> Result<()> {
        if self.c1 >= 1.0 && self.c2 <= 1.0 {
            Ok(())
        } else {
            Err(Error::UnsatisfiableSafeguard(format!(
                "the fallback direction -g fails the test unless c1 >= 1 and c2 <= 1 \
                 (c1 = {}, c2 = {})",
                self.c1, self.c2
            )))
        }
    }
}

/// Which of the two inequalities failed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SgrViolations {
    pub norm_bound: bool,
    pub descent_bound: bool,
}

impl SgrViolations {
    pub fn any(&self) -> bool {
        self.norm_bound || self.descent_bound
    }
}

/// Checks both inequalities exactly, with no slack. For `g = 0` only `d = 0`
/// passes.
pub fn sgr_check(d: &[f64], g: &[f64], params: &SgrParams) -> Result<(bool, SgrViolations)> {
    if d.len() != g.len() {
        return Err(Error::Shape {
            expected: g.len(),
            got: d.len(),
        });
    }
    let g_norm_sq = linalg::norm_sq(g);
    let violated = SgrViolations {
        norm_bound: !(linalg::norm(d) <= params.c1 * g_norm_sq.sqrt()),
        descent_bound: !(linalg::dot(d, g) <= -params.c2 * g_norm_sq),
    };
    Ok((!violated.any(), violated))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgVariant {
    /// `β = ‖g_k‖² / ‖g_{k−1}‖²`
    FletcherReeves,
    /// `β = max{0, g_kᵀ(g_k − g_{k−1}) / ‖g_{k−1}‖²}`
    PolakRibierePlus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionKind {
    Sgd,
    /// `d = −g + β (x_k − x_{k−1})`
    Momentum { beta: f64 },
    /// `d = −g + min(β_k, beta_cap) d_{k−1}`
    ConjugateGradient { variant: CgVariant, beta_cap: f64 },
    /// `d = −g / sqrt(Σ past g⊙g + ε)` elementwise
    AdagradDiag { epsilon: f64 },
}

impl DirectionKind {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DirectionKind::Sgd => true,
            DirectionKind::Momentum { beta } => beta.is_finite() && beta >= 0.0,
            DirectionKind::ConjugateGradient { beta_cap, .. } => beta_cap.is_finite() && beta_cap >= 0.0,
            DirectionKind::AdagradDiag { epsilon } => epsilon.is_finite() && epsilon > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid direction parameters: {self:?}")))
        }
    }
}

/// What the safeguard did with one proposed direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionOutcome {
    pub d: Vec<f64>,
    pub raw_d: Vec<f64>,
    pub sgr_pass: bool,
    pub violated: SgrViolations,
    pub restarted: bool,
}

/// Per-run direction memory. Single owner; mutated only through
/// [`DirectionState::safeguarded_direction`] (restarts) and
/// [`DirectionState::update_memory`].
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionState {
    kind: DirectionKind,
    dim: usize,
    prev_x: Option<Vec<f64>>,
    prev_g: Option<Vec<f64>>,
    prev_d: Option<Vec<f64>>,
    sq_grad_sum: Vec<f64>,
}

impl DirectionState {
    pub fn new(kind: DirectionKind, dim: usize) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            dim,
            prev_x: None,
            prev_g: None,
            prev_d: None,
            sq_grad_sum: vec![0.0; dim],
        })
    }

    pub fn kind(&self) -> DirectionKind {
        self.kind
    }

    pub fn previous_direction(&self) -> Option<&[f64]> {
        self.prev_d.as_deref()
    }

    pub fn squared_gradient_sum(&self) -> &[f64] {
        &self.sq_grad_sum
    }

    fn check_dims(&self, g: &[f64], x: &[f64]) -> Result<()> {
        for v in [g, x] {
            if v.len() != self.dim {
                return Err(Error::Shape {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    /// The unguarded direction for the current memory.
    pub fn propose_direction(&self, g: &[f64], x: &[f64]) -> Vec<f64> {
        let mut d = linalg::neg(g);
        match self.kind {
            DirectionKind::Sgd => {}
            DirectionKind::Momentum { beta } => {
                if let Some(prev_x) = &self.prev_x {
                    for ((di, xi), pi) in d.iter_mut().zip(x).zip(prev_x) {
                        *di += beta * (xi - pi);
                    }
                }
            }
            DirectionKind::ConjugateGradient { variant, beta_cap } => {
                if let (Some(prev_g), Some(prev_d)) = (&self.prev_g, &self.prev_d) {
                    let beta = cg_beta(variant, g, prev_g).min(beta_cap);
                    if beta > 0.0 {
                        linalg::axpy(beta, prev_d, &mut d);
                    }
                }
            }
            DirectionKind::AdagradDiag { epsilon } => {
                for (di, s) in d.iter_mut().zip(&self.sq_grad_sum) {
                    *di /= (s + epsilon).sqrt();
                }
            }
        }
        d
    }

    /// Proposed direction passed through the safeguard, without touching the
    /// memory. Used where the memory has to stay frozen (diagnostics).
    pub fn frozen_direction(&self, g: &[f64], x: &[f64], params: &SgrParams) -> Result<DirectionOutcome> {
        self.check_dims(g, x)?;
        let raw_d = self.propose_direction(g, x);
        let (pass, violated) = sgr_check(&raw_d, g, params)?;
        let d = if pass { raw_d.clone() } else { linalg::neg(g) };
        Ok(DirectionOutcome {
            d,
            raw_d,
            sgr_pass: pass,
            violated,
            restarted: !pass,
        })
    }

    /// Proposes, checks, and on failure restarts to `−g` and clears the
    /// momentum / CG history.
    pub fn safeguarded_direction(&mut self, g: &[f64], x: &[f64], params: &SgrParams) -> Result<DirectionOutcome> {
        params.ensure_restart_admissible()?;
        let outcome = self.frozen_direction(g, x, params)?;
        if outcome.restarted {
            self.prev_x = None;
            self.prev_g = None;
            self.prev_d = None;
        }
        Ok(outcome)
    }

    /// Records the accepted step: `x_old` was the iterate the step left
    /// from, `g` and `d` the gradient and direction used there.
    pub fn update_memory(&mut self, x_old: &[f64], g: &[f64], d: &[f64]) {
        self.prev_x = Some(x_old.to_vec());
        self.prev_g = Some(g.to_vec());
        self.prev_d = Some(d.to_vec());
        for (s, gi) in self.sq_grad_sum.iter_mut().zip(g) {
            *s += gi * gi;
        }
    }
}

fn cg_beta(variant: CgVariant, g: &[f64], prev_g: &[f64]) -> f64 {
    let denom = linalg::norm_sq(prev_g);
    if denom == 0.0 {
        return 0.0;
    }
    match variant {
        CgVariant::FletcherReeves => linalg::norm_sq(g) / denom,
        CgVariant::PolakRibierePlus => {
            let num: f64 = g.iter().zip(prev_g).map(|(a, b)| a * (a - b)).sum();
            (num / denom).max(0.0)
        }
    }
}
