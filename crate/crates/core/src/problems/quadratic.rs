use rand::Rng;

use super::{FiniteSum, KnownConstants};
use crate::rng;
use crate::{Error, Result};

/// `f_i(x) = ½ Σ_j h_ij (x_j − c_j)²` with a shared center `c`.
///
/// Every component is minimized at `c`, so minimizer interpolation holds
/// exactly and all constants are available in closed form. Used for toy
/// problems and for instances where a theorem's constants must be tuned.
#[derive(Debug, Clone)]
pub struct DiagonalQuadratics {
    n_comp: usize,
    dim: usize,
    curvature: Vec<f64>,
    constants: KnownConstants,
}

impl DiagonalQuadratics {
    /// `curvature` is row-major `N × n` and must be strictly positive.
    pub fn new(curvature: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        let dim = center.len();
        if dim == 0 || curvature.is_empty() || !curvature.len().is_multiple_of(dim) {
            return Err(Error::InvalidSpec(
                "curvature must be a nonempty N x n table matching the center".into(),
            ));
        }
        if curvature.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return Err(Error::InvalidSpec("curvatures must be finite and positive".into()));
        }
        let n_comp = curvature.len() / dim;
        let mean_curv: Vec<f64> = (0..dim)
            .map(|j| (0..n_comp).map(|i| curvature[i * dim + j]).sum::<f64>() / n_comp as f64)
            .collect();
        let constants = KnownConstants {
            l: Some(mean_curv.iter().copied().fold(0.0, f64::max)),
            l_max: Some(curvature.iter().copied().fold(0.0, f64::max)),
            mu: Some(mean_curv.iter().copied().fold(f64::INFINITY, f64::min)),
            f_star: 0.0,
            x_star: center,
        };
        Ok(Self {
            n_comp,
            dim,
            curvature,
            constants,
        })
    }

    pub fn curvature(&self, i: usize) -> &[f64] {
        &self.curvature[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest curvature of component `i`, its smoothness constant.
    pub fn component_smoothness(&self, i: usize) -> f64 {
        self.curvature(i).iter().copied().fold(0.0, f64::max)
    }

    /// Exact strong growth constant: `max_j mean_i h_ij² / (mean_i h_ij)²`,
    /// attained along coordinate axes.
    pub fn strong_growth_constant(&self) -> f64 {
        let n = self.n_comp as f64;
        (0..self.dim)
            .map(|j| {
                let col = (0..self.n_comp).map(|i| self.curvature[i * self.dim + j]);
                let (s1, s2) = col.fold((0.0, 0.0), |(a, b), h| (a + h, b + h * h));
                (s2 / n) / (s1 / n).powi(2)
            })
            .fold(1.0, f64::max)
    }
}

/// Centered at the origin, `h_ij = scale · (1 + spread · U(−1, 1))`.
pub fn gen_diagonal_quadratics(
    n_comp: usize,
    dim: usize,
    seed: u64,
    scale: f64,
    spread: f64,
) -> Result<DiagonalQuadratics> {
    if !(0.0..1.0).contains(&spread) {
        return Err(Error::InvalidSpec(format!("spread must lie in [0, 1), got {spread}")));
    }
    let mut r = rng::stream(seed, rng::streams::PROBLEM);
    let curvature = (0..n_comp * dim)
        .map(|_| scale * (1.0 + spread * r.random_range(-1.0..=1.0)))
        .collect();
    DiagonalQuadratics::new(curvature, vec![0.0; dim])
}

impl FiniteSum for DiagonalQuadratics {
    fn num_components(&self) -> usize {
        self.n_comp
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn component(&self, i: usize, x: &[f64], grad: &mut [f64]) -> f64 {
        let c = &self.constants.x_star;
        let mut f = 0.0;
        for (((g, h), xj), cj) in grad.iter_mut().zip(self.curvature(i)).zip(x).zip(c) {
            let e = xj - cj;
            *g = h * e;
            f += h * e * e;
        }
        0.5 * f
    }

    fn known_constants(&self) -> Option<&KnownConstants> {
        Some(&self.constants)
    }
}
