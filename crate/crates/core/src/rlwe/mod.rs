//! RLWE instances: secrets, discrete Gaussian errors, sample generation,
//! the prime-cyclotomic dual observations and modulus switching.

mod dual;
mod modswitch;

pub use dual::{beta_constant_term, epsilon0, generate_dual_observations, BetaRing, DualObservation, DualParams};
pub use modswitch::{modulus_switch, SwitchedSample};

use crate::arith::{inv_mod, is_prime, mul_mod};
use crate::cyclo_group::SubgroupDescriptor;
use crate::embedding::{embedding_matrix, sigma_from_sigma0_log};
use crate::error::{Error, Result};
use crate::lattice::{GaussianSampler, LatticeBundle, SigmaMode};
use crate::real::{default_precision_bits, MpFloat, Real};
use crate::rng::{stream, Rng};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const LLL_DELTA: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Subgroup {
        m: u64,
        #[serde(rename = "H_gens")]
        h_gens: Vec<i64>,
    },
    PrimeCyclotomic {
        p: u64,
    },
}

impl FieldSpec {
    pub fn descriptor(&self) -> Result<SubgroupDescriptor> {
        match self {
            FieldSpec::Subgroup { m, h_gens } => SubgroupDescriptor::new(*m, h_gens),
            FieldSpec::PrimeCyclotomic { p } => {
                if !is_prime(*p) || *p < 3 {
                    return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
                }
                SubgroupDescriptor::new(*p, &[1])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SecretMode {
    #[default]
    Uniform,
    Gaussian,
}

/// Everything needed to rebuild an instance deterministically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    #[serde(flatten)]
    pub field: FieldSpec,
    pub q: u64,
    pub sigma0: f64,
    #[serde(default = "default_sigma_mode")]
    pub sigma_mode: SigmaMode,
    #[serde(default)]
    pub secret_mode: SecretMode,
    pub seed: u64,
}

fn default_sigma_mode() -> SigmaMode {
    SigmaMode::GeometricMean
}

impl InstanceParams {
    pub fn subgroup(m: u64, gens: &[i64], q: u64, sigma0: f64, seed: u64) -> Self {
        InstanceParams {
            field: FieldSpec::Subgroup { m, h_gens: gens.to_vec() },
            q,
            sigma0,
            sigma_mode: SigmaMode::GeometricMean,
            secret_mode: SecretMode::Uniform,
            seed,
        }
    }

    /// Q(zeta_p) with the ramified modulus q = p.
    pub fn ramified(p: u64, sigma0: f64, seed: u64) -> Self {
        InstanceParams {
            field: FieldSpec::PrimeCyclotomic { p },
            q: p,
            sigma0,
            sigma_mode: SigmaMode::GeometricMean,
            secret_mode: SecretMode::Uniform,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RlweSample {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

/// Geometry shared by all instances over the same field.
#[derive(Clone, Debug)]
pub struct FieldGeometry {
    pub h: SubgroupDescriptor,
    pub n: usize,
    pub precision_bits: u32,
    pub log_disc: f64,
    pub sampler: GaussianSampler,
    /// Coordinates of w_1 * w_{c_k}.
    pub products: Vec<Vec<i64>>,
    /// Coordinates of 1.
    pub one: Vec<i64>,
    perms: Vec<Vec<usize>>,
    // index of c_j / c_i
    quot: Vec<Vec<usize>>,
}

fn build_geometry_with<T: Real>(h: &SubgroupDescriptor, bits: u32) -> Result<FieldGeometry> {
    let n = h.degree_n;
    let e = embedding_matrix::<T>(h, bits)?;
    let disc = e.discriminant_abs()?;
    let bundle = LatticeBundle::new(e.a_w.clone(), LLL_DELTA)?;
    let mut products = Vec::with_capacity(n);
    let mut unit = vec![0i64; n];
    unit[0] = 1;
    for k in 0..n {
        let mut y = vec![0i64; n];
        y[k] = 1;
        products.push(e.ring_product(&unit, &y)?);
    }
    let one = e.one_coordinates()?;
    let perms: Vec<Vec<usize>> = h.cosets.iter().map(|&c| h.galois_permutation(c)).collect::<Result<_>>()?;
    let mut quot = vec![vec![0usize; n]; n];
    for i in 0..n {
        let ci = inv_mod(h.cosets[i], h.m).expect("coset representatives are units");
        for j in 0..n {
            quot[i][j] = h.coset_index(mul_mod(h.cosets[j], ci, h.m) as i64)?;
        }
    }
    Ok(FieldGeometry {
        h: h.clone(),
        n,
        precision_bits: bits,
        log_disc: disc.log_abs,
        sampler: bundle.sampler(),
        products,
        one,
        perms,
        quot,
    })
}

impl FieldGeometry {
    /// Builds at `default_precision_bits(n)`, using hardware floats when
    /// that is 53.
    pub fn build(h: &SubgroupDescriptor) -> Result<Self> {
        Self::build_at(h, default_precision_bits(h.degree_n))
    }

    pub fn build_at(h: &SubgroupDescriptor, bits: u32) -> Result<Self> {
        if bits <= 53 {
            build_geometry_with::<f64>(h, 53)
        } else {
            build_geometry_with::<MpFloat>(h, bits)
        }
    }

    /// sigma_c applied to a coordinate vector.
    pub fn apply_galois(&self, coset_idx: usize, x: &[i64]) -> Vec<i64> {
        let mut y = vec![0i64; self.n];
        for (a, &v) in x.iter().enumerate() {
            y[self.perms[coset_idx][a]] = v;
        }
        y
    }

    /// Coordinates of x * w_{c_j}.
    fn mul_basis(&self, x: &[i64], j: usize) -> Vec<i128> {
        let mut out = vec![0i128; self.n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            // w_{c_i} w_{c_j} = sigma_{c_i}(w_1 w_{c_j / c_i})
            let p = &self.products[self.quot[i][j]];
            let perm = &self.perms[i];
            for (a, &v) in p.iter().enumerate() {
                if v != 0 {
                    out[perm[a]] += xi as i128 * v as i128;
                }
            }
        }
        out
    }

    /// Exact product in R.
    pub fn ring_mul(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        let mut acc = vec![0i128; self.n];
        for (j, &yj) in y.iter().enumerate() {
            if yj == 0 {
                continue;
            }
            for (a, v) in self.mul_basis(x, j).into_iter().enumerate() {
                acc[a] += v * yj as i128;
            }
        }
        acc.into_iter().map(|v| i64::try_from(v).expect("ring product overflow")).collect()
    }

    /// Matrix of multiplication by s modulo q, row-major.
    pub fn mul_matrix_mod(&self, s: &[u64], q: u64) -> Vec<u64> {
        let n = self.n;
        let si: Vec<i64> = s.iter().map(|&x| x as i64).collect();
        let mut m = vec![0u64; n * n];
        for j in 0..n {
            let col = self.mul_basis(&si, j);
            for (i, v) in col.into_iter().enumerate() {
                m[i * n + j] = v.rem_euclid(q as i128) as u64;
            }
        }
        m
    }
}

pub struct RlweInstance {
    pub params: InstanceParams,
    pub geometry: FieldGeometry,
    pub q: u64,
    pub n: usize,
    pub sigma0: f64,
    pub sigma: f64,
    pub secret: Vec<u64>,
    mul_s: Vec<u64>,
}

impl RlweInstance {
    pub fn new(params: InstanceParams) -> Result<Self> {
        let h = params.field.descriptor()?;
        let geometry = FieldGeometry::build(&h)?;
        Self::with_geometry(params, geometry)
    }

    pub fn with_geometry(params: InstanceParams, geometry: FieldGeometry) -> Result<Self> {
        let q = params.q;
        if !is_prime(q) {
            return Err(Error::InvalidArgument(format!("modulus {q} is not prime")));
        }
        if !(params.sigma0 > 0.0) {
            return Err(Error::InvalidArgument("sigma0 must be positive".into()));
        }
        let n = geometry.n;
        let sigma = match params.sigma_mode {
            SigmaMode::GeometricMean => sigma_from_sigma0_log(params.sigma0, geometry.log_disc, n),
            SigmaMode::Absolute => params.sigma0,
        };
        let mut rng = stream(params.seed, "secret", 0);
        let secret: Vec<u64> = match params.secret_mode {
            SecretMode::Uniform => (0..n).map(|_| rng.gen_range(0..q)).collect(),
            SecretMode::Gaussian => geometry
                .sampler
                .sample(sigma, None, &mut rng)
                .into_iter()
                .map(|x| x.rem_euclid(q as i64) as u64)
                .collect(),
        };
        let mul_s = geometry.mul_matrix_mod(&secret, q);
        Ok(RlweInstance { sigma0: params.sigma0, params, q, n, sigma, secret, mul_s, geometry })
    }

    /// Replaces the secret (entries reduced mod q).
    pub fn set_secret(&mut self, s: &[i64]) {
        self.secret = s.iter().map(|&x| x.rem_euclid(self.q as i64) as u64).collect();
        self.mul_s = self.geometry.mul_matrix_mod(&self.secret, self.q);
    }

    pub fn descriptor(&self) -> &SubgroupDescriptor {
        &self.geometry.h
    }

    /// One error draw, as integer coordinates (not reduced mod q).
    pub fn sample_error(&self, rng: &mut Rng) -> Vec<i64> {
        self.geometry.sampler.sample(self.sigma, None, rng)
    }

    /// a * s mod q.
    pub fn times_secret(&self, a: &[u64]) -> Vec<u64> {
        let n = self.n;
        let q = self.q;
        (0..n)
            .map(|i| {
                self.mul_s[i * n..(i + 1) * n]
                    .iter()
                    .zip(a)
                    .fold(0u64, |acc, (&m, &x)| (acc + mul_mod(m, x, q)) % q)
            })
            .collect()
    }

    fn one_sample(&self, i: u64) -> (RlweSample, Vec<i64>) {
        let mut rng = stream(self.params.seed, "sample", i);
        let a: Vec<u64> = (0..self.n).map(|_| rng.gen_range(0..self.q)).collect();
        let e = self.sample_error(&mut rng);
        let b = self
            .times_secret(&a)
            .iter()
            .zip(&e)
            .map(|(&x, &ei)| (x as i64 + ei).rem_euclid(self.q as i64) as u64)
            .collect();
        (RlweSample { a, b }, e)
    }

    /// Samples `first..first+count`, each from its own stream.
    pub fn generate_samples_from(&self, first: u64, count: usize) -> Vec<RlweSample> {
        (first..first + count as u64).into_par_iter().map(|i| self.one_sample(i).0).collect()
    }

    pub fn generate_samples(&self, count: usize) -> Vec<RlweSample> {
        self.generate_samples_from(0, count)
    }

    /// Samples together with their unreduced errors.
    pub fn generate_samples_with_errors(&self, count: usize) -> Vec<(RlweSample, Vec<i64>)> {
        (0..count as u64).into_par_iter().map(|i| self.one_sample(i)).collect()
    }

    /// `count` independent error draws from a dedicated stream family.
    pub fn sample_errors(&self, purpose: &str, count: usize) -> Vec<Vec<i64>> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(self.params.seed, purpose, i);
                self.sample_error(&mut rng)
            })
            .collect()
    }
}

/// Pairs uniform over (Z/q)^n x (Z/q)^n.
pub fn generate_uniform_samples(n: usize, q: u64, count: usize, seed: u64) -> Vec<RlweSample> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, "uniform", i);
            let a = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let b = (0..n).map(|_| rng.gen_range(0..q)).collect();
            RlweSample { a, b }
        })
        .collect()
}

/// Reduction of a coordinate vector of Q(zeta_p) modulo (1 - zeta_p):
/// every basis element goes to 1.
pub fn ramified_reduce(coeffs: &[i64], p: u64) -> u64 {
    coeffs.iter().fold(0i64, |acc, &c| (acc + c).rem_euclid(p as i64)) as u64
}
