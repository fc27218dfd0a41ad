//! Trace-level checks of the step-size guarantees and the safeguard.

use crate::directions::SgrParams;
use crate::linesearch::{self, LineSearchParams};
use crate::Result;

use super::trace::TraceRow;

/// Relative slack for the safeguard inequalities when re-checked from
/// logged norms, which are rounded independently of the in-run inner
/// products.
pub const SGR_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBounds {
    pub c1: f64,
    pub c2: f64,
    pub gamma: f64,
    pub delta: f64,
    pub alpha_max: f64,
    /// Guaranteed-acceptance threshold computed with `L_max`.
    pub alpha_low: f64,
    /// Worst-case number of backtracks.
    pub jstar: u32,
}

impl TraceBounds {
    pub fn new(sgr: &SgrParams, ls: &LineSearchParams, l_max: f64) -> Result<Self> {
        let alpha_low = linesearch::alpha_low(sgr.c1(), sgr.c2(), ls.gamma, l_max)?;
        Ok(Self {
            c1: sgr.c1(),
            c2: sgr.c2(),
            gamma: ls.gamma,
            delta: ls.delta,
            alpha_max: ls.alpha_max,
            alpha_low,
            jstar: linesearch::jstar(ls.alpha_max, alpha_low, ls.delta)?,
        })
    }

    /// The first violated bound on `row`, if any. `accepted_f` is the batch
    /// value at the new iterate; the decrease check is skipped without it.
    pub fn check(&self, row: &TraceRow, accepted_f: Option<f64>) -> Option<String> {
        if row.g_batch_norm == 0.0 {
            return (row.alpha != 0.0 || row.d_norm != 0.0)
                .then(|| "zero batch gradient but a step was taken".to_string());
        }
        if !(row.alpha > 0.0) {
            return Some(format!("nonpositive step {} with nonzero gradient", row.alpha));
        }
        let expected = LineSearchParams::trial_step(row.alpha0, self.delta, row.backtracks);
        if row.alpha != expected {
            return Some(format!(
                "alpha {} != alpha0 * delta^j = {} (j = {})",
                row.alpha, expected, row.backtracks
            ));
        }
        if row.alpha0 > self.alpha_max {
            return Some(format!("alpha0 {} exceeds alpha_max {}", row.alpha0, self.alpha_max));
        }
        let floor = row.alpha0.min(self.delta * self.alpha_low);
        if row.alpha < floor {
            return Some(format!("step floor: alpha {} < min(alpha0, delta * alpha_low) = {floor}", row.alpha));
        }
        if row.backtracks > self.jstar {
            return Some(format!("backtracks {} exceed j* = {}", row.backtracks, self.jstar));
        }
        let g = row.g_batch_norm;
        if row.d_norm > self.c1 * g * (1.0 + SGR_SLACK) {
            return Some(format!("safeguard: |d| = {} > c1 |g| = {}", row.d_norm, self.c1 * g));
        }
        if row.dtg > -self.c2 * g * g * (1.0 - SGR_SLACK) {
            return Some(format!("safeguard: d'g = {} > -c2 |g|^2 = {}", row.dtg, -self.c2 * g * g));
        }
        if let Some(fa) = accepted_f {
            let rhs = row.f_batch + self.gamma * row.alpha * row.dtg;
            if !(fa <= rhs && fa < row.f_batch) {
                return Some(format!(
                    "batch decrease: f_B(x+) = {fa} vs f_B(x) + gamma alpha d'g = {rhs}"
                ));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds() -> TraceBounds {
        TraceBounds::new(&SgrParams::new(1.0, 1.0).unwrap(), &LineSearchParams::default(), 1.0).unwrap()
    }

    fn row() -> TraceRow {
        TraceRow {
            k: 3,
            f_full: None,
            grad_full_norm: None,
            f_batch: 1.0,
            g_batch_norm: 2.0,
            d_norm: 2.0,
            dtg: -4.0,
            alpha0: 10.0,
            alpha: 1.25,
            backtracks: 3,
            sgr_pass: true,
            restarted: false,
        }
    }

    #[test]
    fn constants() {
        let b = bounds();
        // 2 · 1 · 0.9 / 1
        assert_eq!(b.alpha_low, 1.8);
        // 10 · 0.5^3 = 1.25 is the first trial at or below 1.8
        assert_eq!(b.jstar, 3);
    }

    #[test]
    fn clean_row_passes_and_tampering_is_caught() {
        let b = bounds();
        assert_eq!(b.check(&row(), Some(0.5)), None);
        let halved = TraceRow { alpha: 0.625, ..row() };
        assert!(b.check(&halved, None).unwrap().contains("alpha0 * delta^j"));
        let too_long = TraceRow { d_norm: 2.5, ..row() };
        assert!(b.check(&too_long, None).unwrap().contains("|d|"));
        let uphill = TraceRow { dtg: -3.0, ..row() };
        assert!(b.check(&uphill, None).unwrap().contains("d'g"));
        assert!(b.check(&row(), Some(1.0)).unwrap().contains("batch decrease"));
        let deep = TraceRow {
            alpha: 0.625,
            backtracks: 4,
            ..row()
        };
        let loose_floor = TraceBounds { alpha_low: 0.1, ..b };
        assert!(loose_floor.check(&deep, None).unwrap().contains("j*"));
    }

    #[test]
    fn step_floor() {
        let b = TraceBounds {
            jstar: 40,
            alpha_low: 1.0,
            ..bounds()
        };
        let r = TraceRow {
            alpha: 10.0 * 0.5f64.powi(5),
            backtracks: 5,
            ..row()
        };
        assert!(b.check(&r, None).unwrap().contains("step floor"));
    }

    #[test]
    fn zero_gradient_rows() {
        let b = bounds();
        let r = TraceRow {
            g_batch_norm: 0.0,
            d_norm: 0.0,
            dtg: 0.0,
            alpha: 0.0,
            backtracks: 0,
            ..row()
        };
        assert_eq!(b.check(&r, None), None);
        assert!(b.check(&TraceRow { alpha: 1.0, ..r }, None).is_some());
    }
}
