use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{FiniteSum, KnownConstants};
use crate::linalg;
use crate::rng;
use crate::{Error, Result};

/// Two-factor linear model `f_i(u, V) = ½ (uᵀ V a_i − b_i)²`.
///
/// The decision vector packs `u ∈ ℝ^{n_u}` first, then `V ∈ ℝ^{n_u × n_v}`
/// row-major. Labels are generated by a planted `(u*, V*)`, so interpolation
/// holds there; the objective is nonconvex and has no closed-form `L` or `μ`.
#[derive(Debug, Clone)]
pub struct TwoFactor {
    n_u: usize,
    n_v: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
    constants: KnownConstants,
}

pub fn gen_nonconvex_interpolating(n_comp: usize, n_u: usize, n_v: usize, seed: u64) -> Result<TwoFactor> {
    if n_comp == 0 || n_u == 0 || n_v == 0 {
        return Err(Error::InvalidSpec("N, n_u and n_v must be >= 1".into()));
    }
    let mut r = rng::stream(seed, rng::streams::PROBLEM);
    let features = standard_normals(&mut r, n_comp * n_v, 1.0);
    let mut x_star = standard_normals(&mut r, n_u, 1.0);
    x_star.extend(standard_normals(&mut r, n_u * n_v, 1.0 / (n_v as f64).sqrt()));
    let mut p = TwoFactor {
        n_u,
        n_v,
        features,
        labels: vec![0.0; n_comp],
        constants: KnownConstants {
            l: None,
            l_max: None,
            mu: None,
            f_star: 0.0,
            x_star,
        },
    };
    p.labels = (0..n_comp)
        .map(|i| p.predict(i, &p.constants.x_star))
        .collect();
    Ok(p)
}

fn standard_normals(r: &mut ChaCha8Rng, count: usize, scale: f64) -> Vec<f64> {
    (0..count)
        .map(|_| scale * r.sample::<f64, _>(StandardNormal))
        .collect()
}

impl TwoFactor {
    pub fn dims(&self) -> (usize, usize) {
        (self.n_u, self.n_v)
    }

    fn feature(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_v..(i + 1) * self.n_v]
    }

    fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.n_u)
    }

    /// `V a_i`
    fn hidden(&self, i: usize, v: &[f64]) -> Vec<f64> {
        let a = self.feature(i);
        v.chunks(self.n_v).map(|row| linalg::dot(row, a)).collect()
    }

    fn predict(&self, i: usize, x: &[f64]) -> f64 {
        let (u, v) = self.split(x);
        linalg::dot(u, &self.hidden(i, v))
    }
}

impl FiniteSum for TwoFactor {
    fn num_components(&self) -> usize {
        self.labels.len()
    }

    fn dim(&self) -> usize {
        self.n_u + self.n_u * self.n_v
    }

    fn component(&self, i: usize, x: &[f64], grad: &mut [f64]) -> f64 {
        let (u, v) = self.split(x);
        let h = self.hidden(i, v);
        let r = linalg::dot(u, &h) - self.labels[i];
        let a = self.feature(i);
        let (gu, gv) = grad.split_at_mut(self.n_u);
        for (g, hj) in gu.iter_mut().zip(&h) {
            *g = r * hj;
        }
        for (row, uj) in gv.chunks_mut(self.n_v).zip(u) {
            for (g, al) in row.iter_mut().zip(a) {
                *g = r * uj * al;
            }
        }
        0.5 * r * r
    }

    fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        let r = self.predict(i, x) - self.labels[i];
        0.5 * r * r
    }

    fn known_constants(&self) -> Option<&KnownConstants> {
        Some(&self.constants)
    }
}
