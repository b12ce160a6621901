use crate::linalg::Matrix;
use rand::Rng;

const TAIL: f64 = 10.0;

/// Integer z with Pr(z) proportional to exp(-(z-c)^2 / (2 sigma^2)),
/// truncated to |z - c| <= 10 sigma (the nearest integer is always kept).
pub fn sample_integer_gaussian<R: Rng + ?Sized>(sigma: f64, center: f64, rng: &mut R) -> i64 {
    let nearest = center.round();
    let lo = (center - TAIL * sigma).ceil().min(nearest) as i64;
    let hi = (center + TAIL * sigma).floor().max(nearest) as i64;
    if lo == hi {
        return lo;
    }
    let s2 = 2.0 * sigma * sigma;
    let w = |z: i64| {
        let d = z as f64 - center;
        (-(d * d) / s2).exp()
    };
    let total: f64 = (lo..=hi).map(w).sum();
    let mut u = rng.gen::<f64>() * total;
    for z in lo..hi {
        u -= w(z);
        if u < 0.0 {
            return z;
        }
    }
    hi
}

/// Randomized nearest plane over a reduced basis, with all tables in f64.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    n: usize,
    mu: Matrix<f64>,
    gs_norms: Vec<f64>,
    u: Matrix<i64>,
    u_inv: Matrix<i64>,
}

impl GaussianSampler {
    pub fn new(mu: Matrix<f64>, gs_norms: Vec<f64>, u: Matrix<i64>, u_inv: Matrix<i64>) -> Self {
        GaussianSampler { n: gs_norms.len(), mu, gs_norms, u, u_inv }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gs_norms(&self) -> &[f64] {
        &self.gs_norms
    }

    /// One draw from (approximately) D_{Lambda, sigma, center}; `center` is
    /// given in coordinates with respect to the original basis. Returns
    /// coordinates with respect to the original basis.
    pub fn sample<R: Rng + ?Sized>(&self, sigma: f64, center: Option<&[f64]>, rng: &mut R) -> Vec<i64> {
        let n = self.n;
        // y: center in reduced-basis coordinates; c: running GS coefficients
        let mut c = vec![0.0f64; n];
        if let Some(x) = center {
            for i in 0..n {
                let yi: f64 = self.u_inv.row(i).iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
                for j in 0..=i {
                    c[j] += yi * self.mu[(i, j)];
                }
            }
        }
        let mut zb = vec![0i64; n];
        for i in (0..n).rev() {
            let z = sample_integer_gaussian(sigma / self.gs_norms[i], c[i], rng);
            zb[i] = z;
            if z != 0 {
                let zf = z as f64;
                for j in 0..i {
                    c[j] -= zf * self.mu[(i, j)];
                }
            }
        }
        super::int_mat_vec(&self.u, &zb)
    }
}
