//! Adjusted canonical embedding of the normal integral basis
//! w_c = sum_{h in H} zeta_m^{hc}.

use crate::cyclo_group::SubgroupDescriptor;
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::real::Real;

pub struct EmbeddingData<T: Real> {
    pub n: usize,
    /// Real and imaginary parts of sigma_{c_i}(w_{c_j}).
    pub a_can_re: Matrix<T>,
    pub a_can_im: Matrix<T>,
    pub t_re: Matrix<T>,
    pub t_im: Matrix<T>,
    /// Columns are the embedded basis vectors.
    pub a_w: Matrix<T>,
    pub precision_bits: u32,
    pub r1: usize,
    pub r2: usize,
    lu: Lu<T>,
}

/// |d_K| as recovered from the embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct Discriminant {
    pub log_abs: f64,
    /// `None` when it overflows an f64.
    pub value: Option<f64>,
    /// Nearest integer, when the working precision resolves it.
    pub integer: Option<u128>,
}

impl Discriminant {
    /// |d_K|^{1/(2n)}.
    pub fn root(&self, n: usize) -> f64 {
        (self.log_abs / (2.0 * n as f64)).exp()
    }
}

pub fn embedding_matrix<T: Real>(h: &SubgroupDescriptor, precision_bits: u32) -> Result<EmbeddingData<T>> {
    if precision_bits < 53 {
        return Err(Error::InvalidArgument("precision_bits must be at least 53".into()));
    }
    let bits = precision_bits;
    let m = h.m;
    let n = h.degree_n;
    let half = (m / 2) as usize;
    let mut cos = Vec::with_capacity(m as usize);
    let mut sin = Vec::with_capacity(m as usize);
    for k in 0..=half as u64 {
        let (c, s) = T::unit_root(k, m, bits);
        cos.push(c);
        sin.push(s);
    }
    for k in half as u64 + 1..m {
        let j = (m - k) as usize;
        cos.push(cos[j].clone());
        sin.push(-sin[j].clone());
    }

    let mut a_re = Matrix::<T>::zeros(n, n, bits);
    let mut a_im = Matrix::<T>::zeros(n, n, bits);
    for i in 0..n {
        for j in 0..n {
            let cij = crate::arith::mul_mod(h.cosets[i], h.cosets[j], m);
            let mut re = T::zero(bits);
            let mut im = T::zero(bits);
            for &e in &h.elements {
                let k = crate::arith::mul_mod(cij, e, m) as usize;
                re += &cos[k];
                im += &sin[k];
            }
            a_re[(i, j)] = re;
            a_im[(i, j)] = im;
        }
    }

    let (r1, r2) = if h.totally_real { (n, 0) } else { (0, n / 2) };
    let inv_sqrt2 = T::one(bits) / T::from_i64(2, bits).sqrt();
    let mut t_re = Matrix::<T>::zeros(n, n, bits);
    let mut t_im = Matrix::<T>::zeros(n, n, bits);
    if h.totally_real {
        t_re = Matrix::identity(n, bits);
    } else {
        let k = n / 2;
        for i in 0..k {
            t_re[(i, i)] = inv_sqrt2.clone();
            t_re[(i, i + k)] = inv_sqrt2.clone();
            t_im[(i + k, i)] = -inv_sqrt2.clone();
            t_im[(i + k, i + k)] = inv_sqrt2.clone();
        }
    }

    let tol = (-(precision_bits as f64) / 2.0).exp2();
    let unit = unitarity_residual(&t_re, &t_im);
    if unit > tol {
        return Err(Error::PrecisionLoss(format!("T*T - I residual {unit:e}")));
    }

    // A_w = T A_can; T has at most two nonzeros per row
    let mut a_w = Matrix::<T>::zeros(n, n, bits);
    let mut imag_resid = 0.0f64;
    let scale = (n as f64).sqrt();
    for i in 0..n {
        let nz: Vec<usize> = (0..n).filter(|&k| !t_re[(i, k)].is_zero() || !t_im[(i, k)].is_zero()).collect();
        for j in 0..n {
            let mut re = T::zero(bits);
            let mut im = T::zero(bits);
            for &k in &nz {
                re += &(t_re[(i, k)].clone() * &a_re[(k, j)] - t_im[(i, k)].clone() * &a_im[(k, j)]);
                im += &(t_re[(i, k)].clone() * &a_im[(k, j)] + t_im[(i, k)].clone() * &a_re[(k, j)]);
            }
            imag_resid = imag_resid.max(im.abs().to_f64());
            a_w[(i, j)] = re;
        }
    }
    if imag_resid > tol * scale {
        return Err(Error::PrecisionLoss(format!("imaginary residual {imag_resid:e} in T A_can")));
    }
    let lu = a_w.lu()?;
    Ok(EmbeddingData { n, a_can_re: a_re, a_can_im: a_im, t_re, t_im, a_w, precision_bits, r1, r2, lu })
}

/// max |(T*T - I)_{ij}|.
pub fn unitarity_residual<T: Real>(t_re: &Matrix<T>, t_im: &Matrix<T>) -> f64 {
    let n = t_re.rows;
    let bits = t_re.data[0].bits();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            // (T*T)_{ij} = sum_k conj(T_ki) T_kj
            let mut re = T::zero(bits);
            let mut im = T::zero(bits);
            for k in 0..n {
                let (ar, ai) = (&t_re[(k, i)], &t_im[(k, i)]);
                let (br, bi) = (&t_re[(k, j)], &t_im[(k, j)]);
                if (ar.is_zero() && ai.is_zero()) || (br.is_zero() && bi.is_zero()) {
                    continue;
                }
                re += &(ar.clone() * br + ai.clone() * bi);
                im += &(ar.clone() * bi - ai.clone() * br);
            }
            if i == j {
                re -= &T::one(bits);
            }
            worst = worst.max(re.abs().to_f64()).max(im.abs().to_f64());
        }
    }
    worst
}

impl<T: Real> EmbeddingData<T> {
    pub fn discriminant_abs(&self) -> Result<Discriminant> {
        let log_abs = 2.0 * self.lu.log_abs_det();
        let det = self.lu.det();
        let v = (det.clone() * &det).to_f64();
        let value = v.is_finite().then_some(v);
        let mut integer = None;
        if let Some(v) = value {
            // units are resolvable once the relative error budget is below 1/4
            let budget = v * (-(self.precision_bits as f64) / 2.0).exp2();
            if budget < 0.25 && v < 1e30 {
                let r = v.round();
                if (v - r).abs() > 1e-3 * v.max(1.0) || (v - r).abs() > 0.25 {
                    return Err(Error::PrecisionLoss(format!("discriminant {v} is not near an integer")));
                }
                integer = Some(r as u128);
            }
        }
        Ok(Discriminant { log_abs, value, integer })
    }

    /// Coordinates of the lattice point `v` with respect to the columns of `a_w`.
    pub fn solve(&self, v: &[T]) -> Vec<T> {
        self.lu.solve(v)
    }

    /// Embedding of an integer coordinate vector.
    pub fn embed(&self, z: &[i64]) -> Vec<T> {
        self.a_w.mul_int_vec(z)
    }

    /// Ring product of two elements given by coordinates: multiply in the
    /// complex embedding, map back, and round. Fails if any coordinate is
    /// half a unit or more away from an integer.
    pub fn ring_product(&self, x: &[i64], y: &[i64]) -> Result<Vec<i64>> {
        let bits = self.precision_bits;
        let ex = self.embed(x);
        let ey = self.embed(y);
        let n = self.n;
        let mut prod = vec![T::zero(bits); n];
        if self.r2 == 0 {
            for i in 0..n {
                prod[i] = ex[i].clone() * &ey[i];
            }
        } else {
            // rows i and i+k hold sqrt2 Re and sqrt2 Im of sigma_i
            let k = n / 2;
            let inv_sqrt2 = T::one(bits) / T::from_i64(2, bits).sqrt();
            for i in 0..k {
                let (xr, xi) = (ex[i].clone(), ex[i + k].clone());
                let (yr, yi) = (ey[i].clone(), ey[i + k].clone());
                prod[i] = (xr.clone() * &yr - xi.clone() * &yi) * &inv_sqrt2;
                prod[i + k] = (xr * &yi + xi * &yr) * &inv_sqrt2;
            }
        }
        let z = self.solve(&prod);
        let mut out = Vec::with_capacity(n);
        let mut worst = 0.0f64;
        for c in &z {
            let r = c.round();
            worst = worst.max((c.clone() - &r).abs().to_f64());
            out.push(r.to_i64().ok_or_else(|| Error::PrecisionLoss("product coordinate overflow".into()))?);
        }
        if worst >= 0.5 {
            return Err(Error::PrecisionLoss(format!("rounding residual {worst} in ring product")));
        }
        Ok(out)
    }

    /// Coordinates of 1, recovered from its embedding.
    pub fn one_coordinates(&self) -> Result<Vec<i64>> {
        let bits = self.precision_bits;
        let n = self.n;
        let mut v = vec![T::zero(bits); n];
        let sqrt2 = T::from_i64(2, bits).sqrt();
        if self.r2 == 0 {
            v.iter_mut().for_each(|x| *x = T::one(bits));
        } else {
            v[..n / 2].iter_mut().for_each(|x| *x = sqrt2.clone());
        }
        let z = self.solve(&v);
        z.iter()
            .map(|c| {
                let r = c.round();
                if (c.clone() - &r).abs().to_f64() > 0.25 {
                    Err(Error::PrecisionLoss("coordinates of 1 are not integral".into()))
                } else {
                    Ok(r.to_i64().unwrap())
                }
            })
            .collect()
    }
}

pub fn sigma_from_sigma0(sigma0: f64, disc_abs: f64, n: usize) -> f64 {
    sigma0 * disc_abs.powf(1.0 / (2.0 * n as f64))
}

/// Same as [`sigma_from_sigma0`] with the discriminant given by its log.
pub fn sigma_from_sigma0_log(sigma0: f64, log_disc_abs: f64, n: usize) -> f64 {
    sigma0 * (log_disc_abs / (2.0 * n as f64)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ramanujan_sum;
    use crate::real::MpFloat;

    fn exact_gram(h: &SubgroupDescriptor) -> Vec<Vec<i64>> {
        h.cosets
            .iter()
            .map(|&a| {
                h.cosets
                    .iter()
                    .map(|&b| {
                        h.elements
                            .iter()
                            .map(|&e| ramanujan_sum(h.m, a as i64 - (b * e % h.m) as i64))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    fn bareiss(mut a: Vec<Vec<i128>>) -> i128 {
        let n = a.len();
        let mut sign = 1;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        sign * a[n - 1][n - 1]
    }

    #[test]
    fn m3_columns_have_norm_sqrt2() {
        let h = SubgroupDescriptor::new(3, &[1]).unwrap();
        let e = embedding_matrix::<f64>(&h, 53).unwrap();
        for j in 0..2 {
            let c = e.a_w.col(j);
            assert!(((c[0] * c[0] + c[1] * c[1]) - 2.0).abs() < 1e-12);
        }
        let d = e.discriminant_abs().unwrap();
        assert_eq!(d.integer, Some(3));
    }

    #[test]
    fn prime_cyclotomic_discriminants() {
        for p in [5u64, 7, 11, 13] {
            let h = SubgroupDescriptor::new(p, &[1]).unwrap();
            let e = embedding_matrix::<MpFloat>(&h, 100).unwrap();
            let d = e.discriminant_abs().unwrap();
            let want = (p as u128).pow(p as u32 - 2);
            assert_eq!(d.integer, Some(want), "p={p}");
            assert!((d.value.unwrap() / want as f64 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_matches_ramanujan_oracle() {
        for (m, gens) in [(15u64, vec![1i64]), (21, vec![1]), (21, vec![4]), (35, vec![6]), (3003, vec![2276, 2729, 1123])] {
            let h = SubgroupDescriptor::new(m, &gens).unwrap();
            let e = embedding_matrix::<MpFloat>(&h, 100).unwrap();
            let g = e.a_w.gram();
            let exact = exact_gram(&h);
            for i in 0..h.degree_n {
                for j in 0..h.degree_n {
                    assert!((g[(i, j)].to_f64() - exact[i][j] as f64).abs() < 1e-9, "m={m}");
                }
            }
            if h.degree_n <= 12 {
                let big: Vec<Vec<i128>> = exact.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
                let det = bareiss(big);
                assert_eq!(e.discriminant_abs().unwrap().integer, Some(det as u128), "m={m}");
            }
        }
    }

    #[test]
    fn galois_permutation_preserves_gram_2805() {
        let h = SubgroupDescriptor::new(2805, &[1684, 1618]).unwrap();
        let e = embedding_matrix::<MpFloat>(&h, 100).unwrap();
        let g = e.a_w.gram();
        let tol = (-50f64).exp2() * 1e3;
        for &c in &h.cosets {
            let p = h.galois_permutation(c).unwrap();
            for i in 0..h.degree_n {
                for j in 0..h.degree_n {
                    let d = (g[(p[i], p[j])].clone() - &g[(i, j)]).abs().to_f64();
                    assert!(d < tol);
                }
            }
        }
    }

    #[test]
    fn discriminant_stable_across_precision() {
        let h = SubgroupDescriptor::new(2805, &[1684, 1618]).unwrap();
        let lo = embedding_matrix::<MpFloat>(&h, 100).unwrap().discriminant_abs().unwrap();
        let hi = embedding_matrix::<MpFloat>(&h, 200).unwrap().discriminant_abs().unwrap();
        assert!(lo.log_abs > 0.0);
        assert!(((lo.log_abs - hi.log_abs) / hi.log_abs).abs() < 1e-9);
        let (a, b) = (lo.value.unwrap(), hi.value.unwrap());
        assert!(((a - b) / b).abs() < 1e-6);
    }

    #[test]
    fn t_is_unitary_and_columns_equal_norm() {
        let h = SubgroupDescriptor::new(3003, &[2276, 2729, 1123]).unwrap();
        let e = embedding_matrix::<MpFloat>(&h, 100).unwrap();
        assert!(unitarity_residual(&e.t_re, &e.t_im) < (-50f64).exp2());
        assert_eq!((e.r1, e.r2), (0, 15));
        let g = e.a_w.gram();
        for i in 1..30 {
            assert!((g[(i, i)].to_f64() - g[(0, 0)].to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_product_matches_exact_structure() {
        // Q(zeta_7): w_a w_b = w_{a+b}, and w_0 = 1 = -(w_1 + ... + w_6)
        let h = SubgroupDescriptor::new(7, &[1]).unwrap();
        let e = embedding_matrix::<f64>(&h, 53).unwrap();
        let one = e.one_coordinates().unwrap();
        assert_eq!(one, vec![-1; 6]);
        for a in 0..6 {
            for b in 0..6 {
                let mut x = vec![0; 6];
                let mut y = vec![0; 6];
                x[a] = 1;
                y[b] = 1;
                let z = e.ring_product(&x, &y).unwrap();
                let s = (h.cosets[a] + h.cosets[b]) % 7;
                let want: Vec<i64> = if s == 0 {
                    vec![-1; 6]
                } else {
                    let idx = h.coset_index(s as i64).unwrap();
                    (0..6).map(|i| (i == idx) as i64).collect()
                };
                assert_eq!(z, want);
            }
        }
    }

    #[test]
    fn sigma_conversion() {
        assert_eq!(sigma_from_sigma0(1.0, 1.0, 10), 1.0);
        let s = sigma_from_sigma0_log(0.5, 249.0 * 251f64.ln(), 250);
        assert!((s - 0.5 * 251f64.powf(249.0 / 500.0)).abs() < 1e-12);
        assert!((sigma_from_sigma0(2.0, 125.0, 4) - 2.0 * sigma_from_sigma0(1.0, 125.0, 4)).abs() < 1e-15);
    }
}
