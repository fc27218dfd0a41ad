use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{gaussian_point, FiniteSum, KnownConstants};
use crate::linalg;
use crate::rng;
use crate::{Error, Result};

/// Eigenvalues below this fraction of the largest one count as zero modes.
const NULL_EIGEN_RTOL: f64 = 1e-10;

/// `f_i(x) = ½ (a_iᵀx − b_i)²`, rows stored row-major.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    n_rows: usize,
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    constants: KnownConstants,
}

/// Nonzero singular values of the generated design matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum SingularValueSpec {
    /// `min(N, n)` values evenly spaced in `[lo, hi]`.
    Linspace { lo: f64, hi: f64 },
    /// `min(N, n)` values log-spaced in `[lo, hi]`.
    Geomspace { lo: f64, hi: f64 },
    /// Explicit values; fewer than `min(N, n)` gives a rank-deficient matrix.
    Values(Vec<f64>),
    /// i.i.d. `N(0, 1/n)` entries, spectrum whatever comes out.
    Gaussian,
}

impl Default for SingularValueSpec {
    fn default() -> Self {
        SingularValueSpec::Linspace { lo: 2.0, hi: 4.0 }
    }
}

impl fmt::Display for SingularValueSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularValueSpec::Linspace { lo, hi } => write!(f, "linspace:{lo}:{hi}"),
            SingularValueSpec::Geomspace { lo, hi } => write!(f, "geomspace:{lo}:{hi}"),
            SingularValueSpec::Values(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "values:{}", parts.join(","))
            }
            SingularValueSpec::Gaussian => write!(f, "gaussian"),
        }
    }
}

impl FromStr for SingularValueSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("cannot parse spectrum `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let mut parts = s.trim().splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next();
        match (head, rest) {
            ("gaussian", None) => Ok(SingularValueSpec::Gaussian),
            ("linspace" | "geomspace", Some(r)) => {
                let (lo, hi) = r.split_once(':').ok_or_else(bad)?;
                let (lo, hi) = (num(lo)?, num(hi)?);
                Ok(if head == "linspace" {
                    SingularValueSpec::Linspace { lo, hi }
                } else {
                    SingularValueSpec::Geomspace { lo, hi }
                })
            }
            ("values", Some(r)) => r
                .split(',')
                .map(num)
                .collect::<Result<Vec<_>>>()
                .map(SingularValueSpec::Values),
            _ => Err(bad()),
        }
    }
}

impl SingularValueSpec {
    fn values(&self, rank_cap: usize) -> Result<Vec<f64>> {
        let vals = match *self {
            SingularValueSpec::Linspace { lo, hi } => {
                check_range(lo, hi)?;
                spaced(rank_cap, |t| lo + t * (hi - lo))
            }
            SingularValueSpec::Geomspace { lo, hi } => {
                check_range(lo, hi)?;
                spaced(rank_cap, |t| (lo.ln() + t * (hi.ln() - lo.ln())).exp())
            }
            SingularValueSpec::Values(ref v) => {
                if v.is_empty() || v.len() > rank_cap {
                    return Err(Error::InvalidSpec(format!(
                        "need between 1 and {rank_cap} singular values, got {}",
                        v.len()
                    )));
                }
                v.clone()
            }
            SingularValueSpec::Gaussian => unreachable!("gaussian spectrum has no explicit values"),
        };
        if vals.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidSpec(
                "singular values must be finite and positive".into(),
            ));
        }
        Ok(vals)
    }
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if lo > 0.0 && hi >= lo && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "spectrum range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )))
    }
}

fn spaced(count: usize, at: impl Fn(f64) -> f64) -> Vec<f64> {
    if count == 1 {
        return vec![at(1.0)];
    }
    (0..count)
        .map(|k| at(k as f64 / (count - 1) as f64))
        .collect()
}

/// Orthonormal columns spanning a random `rows × cols` subspace.
fn random_orthonormal(rng: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let g = gaussian_point(rng, rows * cols);
    DMatrix::from_column_slice(rows, cols, &g).qr().q()
}

/// Interpolating least squares: `b = A x*`, so every component is minimized
/// at the planted `x*` and `f* = 0`.
pub fn gen_interpolating_least_squares(
    n_rows: usize,
    dim: usize,
    seed: u64,
    spectrum: &SingularValueSpec,
) -> Result<LeastSquares> {
    if n_rows == 0 || dim == 0 {
        return Err(Error::InvalidSpec("N and n must be >= 1".into()));
    }
    let mut rng = rng::stream(seed, rng::streams::PROBLEM);
    let a: DMatrix<f64> = match spectrum {
        SingularValueSpec::Gaussian => {
            let entries = gaussian_point(&mut rng, n_rows * dim);
            DMatrix::from_row_slice(n_rows, dim, &entries)
        }
        spec => {
            let s = spec.values(n_rows.min(dim))?;
            let r = s.len();
            let u = random_orthonormal(&mut rng, n_rows, r);
            let v = random_orthonormal(&mut rng, dim, r);
            u * DMatrix::from_diagonal(&DVector::from_vec(s)) * v.transpose()
        }
    };
    let x_star = gaussian_point(&mut rng, dim);
    let rows: Vec<f64> = a.transpose().as_slice().to_vec();
    let b: Vec<f64> = rows.chunks(dim).map(|row| linalg::dot(row, &x_star)).collect();
    LeastSquares::build(n_rows, dim, rows, b, Some(x_star))
}

impl LeastSquares {
    /// Builds from explicit rows and targets. The minimizer recorded in the
    /// known constants is the minimum-norm least-squares solution.
    pub fn from_rows(rows: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let n_rows = rows.len();
        let dim = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || dim == 0 {
            return Err(Error::InvalidSpec("need at least one nonempty row".into()));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidSpec("rows have differing lengths".into()));
        }
        if b.len() != n_rows {
            return Err(Error::Shape {
                expected: n_rows,
                got: b.len(),
            });
        }
        LeastSquares::build(n_rows, dim, rows.concat(), b, None)
    }

    fn build(
        n_rows: usize,
        dim: usize,
        a: Vec<f64>,
        b: Vec<f64>,
        planted: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !linalg::all_finite(&a) || !linalg::all_finite(&b) {
            return Err(Error::InvalidSpec("non-finite matrix entries".into()));
        }
        let row_norms_sq: Vec<f64> = a.chunks(dim).map(linalg::norm_sq).collect();
        if let Some(i) = row_norms_sq.iter().position(|&s| s == 0.0) {
            return Err(Error::InvalidSpec(format!("row {i} is identically zero")));
        }
        let l_max = row_norms_sq.iter().copied().fold(0.0, f64::max);

        let mat = DMatrix::from_row_slice(n_rows, dim, &a);
        let gram = if n_rows <= dim {
            &mat * mat.transpose()
        } else {
            mat.transpose() * &mat
        } / n_rows as f64;
        let eig = SymmetricEigen::new(gram).eigenvalues;
        let l = eig.iter().copied().fold(0.0, f64::max);
        let mu = eig
            .iter()
            .copied()
            .filter(|&e| e > NULL_EIGEN_RTOL * l)
            .fold(f64::INFINITY, f64::min);

        let x_star = match planted {
            Some(x) => x,
            None => {
                let svd = mat.clone().svd(true, true);
                let eps = NULL_EIGEN_RTOL.sqrt() * svd.singular_values.max();
                svd.solve(&DVector::from_column_slice(&b), eps)
                    .map_err(|e| Error::InvalidSpec(e.to_string()))?
                    .as_slice()
                    .to_vec()
            }
        };
        let mut problem = Self {
            n_rows,
            dim,
            a,
            b,
            constants: KnownConstants {
                l: Some(l),
                l_max: Some(l_max),
                mu: Some(mu),
                f_star: 0.0,
                x_star,
            },
        };
        let f_star = (0..n_rows)
            .map(|i| problem.component_value(i, &problem.constants.x_star))
            .sum::<f64>()
            / n_rows as f64;
        problem.constants.f_star = f_star;
        Ok(problem)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.dim..(i + 1) * self.dim]
    }

    pub fn targets(&self) -> &[f64] {
        &self.b
    }

    /// More unknowns than equations.
    pub fn is_overparametrized(&self) -> bool {
        self.dim >= self.n_rows
    }

    /// Plain-text dump: a `N n` header line, then `N` rows of `A`, then `b`
    /// on one line. Values are written in shortest round-trip form.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n_rows, self.dim)?;
        let line = |vals: &[f64]| vals.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ");
        for i in 0..self.n_rows {
            writeln!(w, "{}", line(self.row(i)))?;
        }
        writeln!(w, "{}", line(&self.b))?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let mut next_line = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::InvalidSpec(format!("unexpected end of input reading {what}")))?
                .map_err(Error::from)
        };
        let parse_row = |s: &str, want: usize, what: &str| -> Result<Vec<f64>> {
            let v = s
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::InvalidSpec(format!("bad number `{t}` in {what}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if v.len() != want {
                return Err(Error::InvalidSpec(format!(
                    "{what}: expected {want} values, got {}",
                    v.len()
                )));
            }
            Ok(v)
        };
        let header = next_line("header")?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidSpec(format!("bad header `{header}`")))?;
        let [n_rows, dim] = dims[..] else {
            return Err(Error::InvalidSpec(format!("bad header `{header}`")));
        };
        let mut rows = Vec::with_capacity(n_rows);
        for i in 0..n_rows {
            rows.push(parse_row(&next_line("matrix row")?, dim, &format!("row {i}"))?);
        }
        let b = parse_row(&next_line("targets")?, n_rows, "targets")?;
        LeastSquares::from_rows(rows, b)
    }
}

impl FiniteSum for LeastSquares {
    fn num_components(&self) -> usize {
        self.n_rows
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn component(&self, i: usize, x: &[f64], grad: &mut [f64]) -> f64 {
        let row = self.row(i);
        let r = linalg::dot(row, x) - self.b[i];
        for (g, a) in grad.iter_mut().zip(row) {
            *g = r * a;
        }
        0.5 * r * r
    }

    fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        let r = linalg::dot(self.row(i), x) - self.b[i];
        0.5 * r * r
    }

    fn known_constants(&self) -> Option<&KnownConstants> {
        Some(&self.constants)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::test_support::fd_gradient;
    use crate::problems::{evaluate_batch, full_oracle, Batch};
    use crate::rng;

    #[test]
    fn identity_design_constants() {
        // AᵀA/N = I/2: L = μ = 0.5; unit rows: L_max = 1
        let p = LeastSquares::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        let c = p.known_constants().unwrap();
        assert!((c.l.unwrap() - 0.5).abs() < 1e-15);
        assert!((c.mu.unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(c.l_max, Some(1.0));
        assert_eq!(c.f_star, 0.0);
    }

    #[test]
    fn generated_instance_interpolates() {
        for seed in 0..5 {
            let p = gen_interpolating_least_squares(20, 40, seed, &SingularValueSpec::default()).unwrap();
            let c = p.known_constants().unwrap();
            assert_eq!(c.f_star, 0.0);
            for i in 0..20 {
                let (_, g) = evaluate_batch(&p, &Batch::singleton(i), &c.x_star).unwrap();
                assert_eq!(linalg::norm(&g), 0.0);
            }
            let (_, g) = full_oracle(&p, &c.x_star).unwrap();
            assert!(linalg::norm(&g) <= 1e-10);
        }
    }

    #[test]
    fn spectrum_is_recovered() {
        let p = gen_interpolating_least_squares(
            10,
            30,
            3,
            &SingularValueSpec::Linspace { lo: 1.0, hi: 3.0 },
        )
        .unwrap();
        let c = p.known_constants().unwrap();
        assert!((c.l.unwrap() - 9.0 / 10.0).abs() < 1e-12);
        assert!((c.mu.unwrap() - 1.0 / 10.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_mu_uses_nonzero_spectrum() {
        let p = gen_interpolating_least_squares(
            8,
            12,
            11,
            &SingularValueSpec::Values(vec![2.0, 1.5, 0.5]),
        )
        .unwrap();
        let c = p.known_constants().unwrap().clone();
        let mu = c.mu.unwrap();
        assert!((mu - 0.25 / 8.0).abs() < 1e-12);
        // PL holds at random points with the nonzero-spectrum μ
        let mut r = rng::stream(99, 0);
        for _ in 0..1000 {
            let x: Vec<f64> = gaussian_point(&mut r, 12).iter().map(|v| v * 5.0).collect();
            let (f, g) = full_oracle(&p, &x).unwrap();
            assert!(2.0 * mu * (f - c.f_star) <= linalg::norm_sq(&g) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn degenerate_specs_rejected() {
        assert!(matches!(
            LeastSquares::from_rows(vec![vec![0.0, 0.0]], vec![0.0]),
            Err(Error::InvalidSpec(_))
        ));
        for bad in [
            SingularValueSpec::Values(vec![0.0]),
            SingularValueSpec::Values(vec![]),
            SingularValueSpec::Linspace { lo: 0.0, hi: 1.0 },
            SingularValueSpec::Geomspace { lo: 2.0, hi: 1.0 },
        ] {
            assert!(gen_interpolating_least_squares(4, 6, 0, &bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn spectrum_string_round_trip() {
        for s in [
            SingularValueSpec::Linspace { lo: 1.0, hi: 2.5 },
            SingularValueSpec::Geomspace { lo: 0.01, hi: 1.0 },
            SingularValueSpec::Values(vec![3.0, 0.125]),
            SingularValueSpec::Gaussian,
        ] {
            assert_eq!(s.to_string().parse::<SingularValueSpec>().unwrap(), s);
        }
        assert!("linspace:1".parse::<SingularValueSpec>().is_err());
        assert!("cauchy".parse::<SingularValueSpec>().is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = gen_interpolating_least_squares(6, 9, 5, &SingularValueSpec::Gaussian).unwrap();
        let mut r = rng::stream(1, 0);
        for _ in 0..20 {
            let x = gaussian_point(&mut r, 9);
            for i in 0..6 {
                let mut g = vec![0.0; 9];
                p.component(i, &x, &mut g);
                let fd = fd_gradient(|y| p.component_value(i, y), &x, 1e-6);
                let err = linalg::dist(&g, &fd) / linalg::norm(&g).max(1e-8);
                assert!(err <= 1e-5, "rel err {err}");
            }
        }
    }

    #[test]
    fn component_lipschitz_bounded_by_l_max() {
        let p = gen_interpolating_least_squares(10, 15, 2, &SingularValueSpec::default()).unwrap();
        let l_max = p.known_constants().unwrap().l_max.unwrap();
        let mut r = rng::stream(4, 0);
        let (mut gx, mut gy) = (vec![0.0; 15], vec![0.0; 15]);
        for _ in 0..100 {
            let x = gaussian_point(&mut r, 15);
            let y = gaussian_point(&mut r, 15);
            for i in 0..10 {
                p.component(i, &x, &mut gx);
                p.component(i, &y, &mut gy);
                assert!(linalg::dist(&gx, &gy) <= l_max * linalg::dist(&x, &y) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let p = gen_interpolating_least_squares(5, 7, 8, &SingularValueSpec::default()).unwrap();
        let mut buf = Vec::new();
        p.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("5 7\n"));
        let q = LeastSquares::read_text(&buf[..]).unwrap();
        assert_eq!(q.a, p.a);
        assert_eq!(q.b, p.b);
        // reloaded minimizer is the min-norm one; still interpolating
        let c = q.known_constants().unwrap();
        assert!(c.f_star < 1e-24);
        assert_eq!(c.l_max, p.known_constants().unwrap().l_max);
    }

    #[test]
    fn malformed_text_rejected() {
        assert!(LeastSquares::read_text("2 2\n1 0\n".as_bytes()).is_err());
        assert!(LeastSquares::read_text("2\n".as_bytes()).is_err());
        assert!(LeastSquares::read_text("1 2\n1 x\n0\n".as_bytes()).is_err());
        assert!(LeastSquares::read_text("1 2\n1 0 3\n0\n".as_bytes()).is_err());
    }
}
