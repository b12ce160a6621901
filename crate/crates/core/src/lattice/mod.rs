//! Lattices given by a column basis: reduction, Gram-Schmidt data,
//! nearest-plane decoding and discrete Gaussian sampling.

mod lll;
mod sampler;

pub use lll::lll_reduce;
pub use sampler::{sample_integer_gaussian, GaussianSampler};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::real::Real;

/// How a requested width is interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaMode {
    /// The value is the absolute width sigma.
    Absolute,
    /// The value is scaled by the geometric mean of the Gram-Schmidt norms.
    GeometricMean,
}

pub struct LatticeBundle<T: Real> {
    pub a: Matrix<T>,
    /// Unimodular transform, `b = a u`.
    pub u: Matrix<i64>,
    pub u_inv: Matrix<i64>,
    pub b: Matrix<T>,
    pub g: Matrix<T>,
    /// `mu[(i, j)]` is the coefficient of `g_j` in `b_i`.
    pub mu: Matrix<T>,
    pub gs_norms: Vec<T>,
    pub precision_bits: u32,
}

/// Classical Gram-Schmidt on the columns of `b`, also returning the
/// coefficient matrix.
pub fn gram_schmidt_full<T: Real>(b: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>, Matrix<T>)> {
    let n = b.cols;
    let bits = b.data[0].bits();
    let cols = b.columns();
    let mut g: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut sq: Vec<T> = Vec::with_capacity(n);
    let mut mu = Matrix::<T>::zeros(n, n, bits);
    let scale = dot(&cols[0], &cols[0]).to_f64().max(1e-300);
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            let m = dot(&cols[i], &g[j]) / &sq[j];
            for (x, y) in v.iter_mut().zip(&g[j]) {
                *x -= &(m.clone() * y);
            }
            mu[(i, j)] = m;
        }
        mu[(i, i)] = T::one(bits);
        let s = dot(&v, &v);
        if s.to_f64() <= scale * (-(2.0 * bits as f64)).exp2() {
            return Err(Error::PrecisionLoss(format!("Gram-Schmidt norm {i} underflows")));
        }
        g.push(v);
        sq.push(s);
    }
    let norms = sq.iter().map(|s| s.sqrt()).collect();
    Ok((Matrix::from_columns(&g), norms, mu))
}

pub fn gram_schmidt<T: Real>(b: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>)> {
    let (g, n, _) = gram_schmidt_full(b)?;
    Ok((g, n))
}

/// max_{i != j} |g_i . g_j| / (|g_i| |g_j|).
pub fn orthogonality_residual<T: Real>(g: &Matrix<T>) -> f64 {
    let cols = g.columns();
    let norms: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut worst = 0.0f64;
    for i in 0..cols.len() {
        for j in 0..i {
            let r = dot(&cols[i], &cols[j]).abs() / &(norms[i].clone() * &norms[j]);
            worst = worst.max(r.to_f64());
        }
    }
    worst
}

pub fn int_matmul(a: &Matrix<i64>, b: &Matrix<i64>) -> Option<Matrix<i64>> {
    let mut out = Matrix::from_fn(a.rows, b.cols, |_, _| 0i64);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a[(i, k)];
            if x == 0 {
                continue;
            }
            for j in 0..b.cols {
                out[(i, j)] = out[(i, j)].checked_add(x.checked_mul(b[(k, j)])?)?;
            }
        }
    }
    Some(out)
}

pub fn int_mat_vec(a: &Matrix<i64>, z: &[i64]) -> Vec<i64> {
    (0..a.rows).map(|i| a.row(i).iter().zip(z).map(|(x, y)| x * y).sum()).collect()
}

impl<T: Real> LatticeBundle<T> {
    /// LLL-reduces the columns of `a` and precomputes Gram-Schmidt data.
    pub fn new(a: Matrix<T>, delta: f64) -> Result<Self> {
        let bits = a.data[0].bits();
        let (u, u_inv) = lll_reduce(&a, delta)?;
        let b = a.matmul(&u.map(|&x| T::from_i64(x, bits)));
        let (g, gs_norms, mu) = gram_schmidt_full(&b)?;
        Ok(LatticeBundle { a, u, u_inv, b, g, mu, gs_norms, precision_bits: bits })
    }

    pub fn n(&self) -> usize {
        self.a.cols
    }

    /// Geometric mean of the Gram-Schmidt norms, i.e. |det a|^{1/n}.
    pub fn gs_geometric_mean(&self) -> f64 {
        let n = self.n() as f64;
        (self.gs_norms.iter().map(|x| x.to_f64().ln()).sum::<f64>() / n).exp()
    }

    /// Width actually used for a requested value under `mode`.
    pub fn final_sigma(&self, sigma: f64, mode: SigmaMode) -> f64 {
        match mode {
            SigmaMode::Absolute => sigma,
            SigmaMode::GeometricMean => sigma * self.gs_geometric_mean(),
        }
    }

    /// f64 tables for the randomized nearest-plane sampler.
    pub fn sampler(&self) -> GaussianSampler {
        GaussianSampler::new(
            self.mu.map(|x| x.to_f64()),
            self.gs_norms.iter().map(|x| x.to_f64()).collect(),
            self.u.clone(),
            self.u_inv.clone(),
        )
    }

    /// Nearest-plane decoding of `target`; returns the lattice vector and
    /// its coordinates with respect to `a`.
    pub fn babai_nearest_plane(&self, target: &[T]) -> (Vec<T>, Vec<i64>) {
        let n = self.n();
        let gcols = self.g.columns();
        let mut c: Vec<T> = gcols
            .iter()
            .zip(&self.gs_norms)
            .map(|(g, nr)| dot(target, g) / &(nr.clone() * nr))
            .collect();
        let mut zb = vec![0i64; n];
        for i in (0..n).rev() {
            let r = c[i].round();
            let zi = r.to_i64().expect("coordinate overflow");
            zb[i] = zi;
            if zi != 0 {
                for j in 0..i {
                    let t = self.mu[(i, j)].clone() * &r;
                    c[j] -= &t;
                }
            }
        }
        let za = int_mat_vec(&self.u, &zb);
        (self.a.mul_int_vec(&za), za)
    }
}
