//! Finite-sum objectives `f(x) = (1/N) Σ f_i(x)`, batch sampling, and
//! synthetic generators whose constants are known in closed form.

mod least_squares;
mod nonconvex;
mod quadratic;
mod sampler;

use rand::Rng;
use rand_distr::StandardNormal;

pub use least_squares::{gen_interpolating_least_squares, LeastSquares, SingularValueSpec};
pub use nonconvex::{gen_nonconvex_interpolating, TwoFactor};
pub use quadratic::{gen_diagonal_quadratics, DiagonalQuadratics};
pub use sampler::{BatchSampler, SamplingMode};

use crate::linalg;
use crate::{Error, Result};

/// Analytically known facts about a problem instance.
///
/// `l`, `l_max` and `mu` are `None` when no closed form exists (the
/// nonconvex generator); `x_star` / `f_star` are always present.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownConstants {
    /// Smoothness constant of the full objective.
    pub l: Option<f64>,
    /// Largest smoothness constant over singleton batches.
    pub l_max: Option<f64>,
    /// PL constant of the full objective.
    pub mu: Option<f64>,
    pub f_star: f64,
    pub x_star: Vec<f64>,
}

/// A family of differentiable components `f_i`, `i ∈ 0..N`.
///
/// Implementations are immutable after construction and may be shared
/// between threads.
pub trait FiniteSum: Send + Sync {
    fn num_components(&self) -> usize;

    fn dim(&self) -> usize;

    /// Writes `∇f_i(x)` into `grad` and returns `f_i(x)`.
    fn component(&self, i: usize, x: &[f64], grad: &mut [f64]) -> f64;

    /// `f_i(x)` alone. Override when the value is cheaper than the gradient.
    fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim()];
        self.component(i, x, &mut g)
    }

    fn known_constants(&self) -> Option<&KnownConstants>;
}

/// Component indices of one sampled batch. Repeats are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch(Vec<usize>);

impl Batch {
    pub fn new(indices: Vec<usize>, num_components: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidBatch("empty batch".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= num_components) {
            return Err(Error::InvalidBatch(format!(
                "index {bad} out of range for {num_components} components"
            )));
        }
        Ok(Self(indices))
    }

    pub fn singleton(i: usize) -> Self {
        Self(vec![i])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_point<P: FiniteSum + ?Sized>(problem: &P, x: &[f64]) -> Result<()> {
    if x.len() != problem.dim() {
        return Err(Error::Shape {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

fn check_batch<P: FiniteSum + ?Sized>(problem: &P, batch: &Batch) -> Result<()> {
    let n = problem.num_components();
    if batch.is_empty() {
        return Err(Error::InvalidBatch("empty batch".into()));
    }
    match batch.indices().iter().find(|&&i| i >= n) {
        Some(bad) => Err(Error::InvalidBatch(format!(
            "index {bad} out of range for {n} components"
        ))),
        None => Ok(()),
    }
}

/// Batch mean of values and gradients over `batch`.
pub fn evaluate_batch<P: FiniteSum + ?Sized>(
    problem: &P,
    batch: &Batch,
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    check_point(problem, x)?;
    check_batch(problem, batch)?;
    let (f, g) = mean_over(problem, batch.indices().iter().copied(), batch.len(), x);
    if !f.is_finite() || !linalg::all_finite(&g) {
        return Err(Error::NumericDomain(format!(
            "non-finite batch evaluation (f = {f})"
        )));
    }
    Ok((f, g))
}

/// Batch mean of values only; one "stochastic function evaluation".
pub fn batch_value<P: FiniteSum + ?Sized>(problem: &P, batch: &Batch, x: &[f64]) -> Result<f64> {
    check_point(problem, x)?;
    check_batch(problem, batch)?;
    let sum: f64 = batch
        .indices()
        .iter()
        .map(|&i| problem.component_value(i, x))
        .sum();
    Ok(sum / batch.len() as f64)
}

/// Exact `f(x)` and `∇f(x)` over all components. O(N); meant for tracing
/// and diagnostics only.
pub fn full_oracle<P: FiniteSum + ?Sized>(problem: &P, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_point(problem, x)?;
    let n = problem.num_components();
    let (f, g) = mean_over(problem, 0..n, n, x);
    if !f.is_finite() || !linalg::all_finite(&g) {
        return Err(Error::NumericDomain(format!(
            "non-finite full evaluation (f = {f})"
        )));
    }
    Ok((f, g))
}

fn mean_over<P, I>(problem: &P, indices: I, count: usize, x: &[f64]) -> (f64, Vec<f64>)
where
    P: FiniteSum + ?Sized,
    I: Iterator<Item = usize>,
{
    let dim = problem.dim();
    let mut f = 0.0;
    let mut g = vec![0.0; dim];
    let mut gi = vec![0.0; dim];
    for i in indices {
        gi.iter_mut().for_each(|v| *v = 0.0);
        f += problem.component(i, x, &mut gi);
        linalg::axpy(1.0, &gi, &mut g);
    }
    let inv = 1.0 / count as f64;
    g.iter_mut().for_each(|v| *v *= inv);
    (f * inv, g)
}

/// Standard-normal entries scaled by `1/√n`.
pub fn gaussian_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
        .collect()
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Central differences of `f` around `x`.
    pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
        let mut xp = x.to_vec();
        (0..x.len())
            .map(|j| {
                let orig = xp[j];
                xp[j] = orig + h;
                let fp = f(&xp);
                xp[j] = orig - h;
                let fm = f(&xp);
                xp[j] = orig;
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    pub fn two_component_toy() -> DiagonalQuadratics {
        // f1 = ½x², f2 = x²
        DiagonalQuadratics::new(vec![1.0, 2.0], vec![0.0]).unwrap()
    }
}
