//! Dual RLWE over Q(zeta_p), reduced to the one-dimensional observable
//! rho(b') mod p.

use crate::error::{Error, Result};
use crate::arith::is_prime;
use crate::rng::stream;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualObservation {
    pub value: f64,
}

/// epsilon_0 for p coefficients e_0..e_{p-1} of the scaled error.
pub fn epsilon0(e: &[f64]) -> f64 {
    let p = e.len();
    let head: f64 = e[..p - 1].iter().sum();
    head - (p as f64 - 1.0) * e[p - 1]
}

/// `count` observations epsilon_0 mod p with coefficient width sqrt(p)*r.
pub fn generate_dual_observations(p: u64, r: f64, count: usize, seed: u64) -> Result<Vec<DualObservation>> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let std = (p as f64).sqrt() * r / (2.0 * std::f64::consts::PI).sqrt();
    let normal = Normal::new(0.0, std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let pf = p as f64;
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, "dual", i);
            let e: Vec<f64> = (0..p).map(|_| normal.sample(&mut rng)).collect();
            let v = epsilon0(&e).rem_euclid(pf);
            // rem_euclid can round up to exactly p
            DualObservation { value: if v >= pf { 0.0 } else { v } }
        })
        .collect())
}

/// Exact arithmetic in Z[beta], beta = zeta_p - 1, for small p.
/// Elements are coefficient vectors of length p-1 in the power basis of beta.
pub struct BetaRing {
    pub p: u64,
    // beta^{p-1} = -sum_k minpoly[k] beta^k
    minpoly: Vec<i128>,
}

fn binomial(n: u64, k: u64) -> i128 {
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

impl BetaRing {
    pub fn new(p: u64) -> Result<Self> {
        if !(3..=23).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidArgument(format!("exact beta arithmetic needs an odd prime p <= 23, got {p}")));
        }
        // Phi_p(beta + 1) = sum_{k=0}^{p-1} C(p, k+1) beta^k
        let minpoly = (0..p - 1).map(|k| binomial(p, k + 1)).collect();
        Ok(BetaRing { p, minpoly })
    }

    fn dim(&self) -> usize {
        self.p as usize - 1
    }

    pub fn mul(&self, x: &[i128], y: &[i128]) -> Vec<i128> {
        let d = self.dim();
        let mut full = vec![0i128; 2 * d - 1];
        for (i, &a) in x.iter().enumerate() {
            for (j, &b) in y.iter().enumerate() {
                full[i + j] += a * b;
            }
        }
        for k in (d..full.len()).rev() {
            let c = full[k];
            if c != 0 {
                full[k] = 0;
                for (t, &mk) in self.minpoly.iter().enumerate() {
                    full[k - d + t] -= c * mk;
                }
            }
        }
        full.truncate(d);
        full
    }

    pub fn beta(&self) -> Vec<i128> {
        let mut b = vec![0i128; self.dim()];
        b[1] = 1;
        b
    }

    /// Converts sum_{i<p} c_i zeta^i (an overcomplete spanning set) to the beta basis.
    pub fn from_zeta_powers(&self, c: &[i128]) -> Vec<i128> {
        let d = self.dim();
        let mut zeta = vec![0i128; d];
        zeta[0] = 1;
        zeta[1] = 1;
        let mut pow = vec![0i128; d];
        pow[0] = 1;
        let mut out = vec![0i128; d];
        for &ci in c {
            for k in 0..d {
                out[k] += ci * pow[k];
            }
            pow = self.mul(&pow, &zeta);
        }
        out
    }
}

/// rho: the constant coefficient in the beta basis.
pub fn beta_constant_term(x: &[i128]) -> i128 {
    x[0]
}

/// Parameters of a dual observation stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualParams {
    pub p: u64,
    pub r: f64,
    pub seed: u64,
}

impl DualParams {
    pub fn generate(&self, count: usize) -> Result<Vec<DualObservation>> {
        generate_dual_observations(self.p, self.r, count, self.seed)
    }
}
