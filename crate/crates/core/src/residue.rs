//! Reduction of the normal integral basis modulo a prime ideal above q.
//!
//! The prime is pinned by a primitive m-th root of unity `zeta` in
//! F_{q^F}; the other primes above q are reached through coset twists.

use crate::arith::{divisors, factor, mul_mod, mult_order};
use crate::cyclo_group::SubgroupDescriptor;
use crate::error::{Error, Result};
use crate::finite_field::{ExtField, Fe, SmallField};
use crate::linalg::solve_mod_prime;

pub const MAX_BIG_DEGREE: usize = 24;
pub const MAX_SUBFIELD_SIZE: usize = 1 << 26;

#[derive(Clone, Debug)]
pub struct ResidueContext {
    pub q: u64,
    pub f: u32,
    pub big: ExtField,
    pub zeta: Fe,
    /// w_c mod the pinned prime, for c in coset order.
    pub reduction_vec: Vec<Fe>,
    /// F_{q^f} in coordinates over the basis 1, theta, .., theta^{f-1}.
    pub subfield: SmallField,
    pub theta: Fe,
    h: SubgroupDescriptor,
    theta_pows: Vec<Fe>,
    pivot_rows: Vec<usize>,
    pivot_inv: Vec<Vec<u64>>,
}

impl ResidueContext {
    pub fn build(h: &SubgroupDescriptor, q: u64) -> Result<Self> {
        let f = h.residue_degree(q)?;
        let m = h.m;
        let big_deg = mult_order(q % m, m) as usize;
        if big_deg > MAX_BIG_DEGREE {
            return Err(Error::UnsupportedContext(format!(
                "order of {q} modulo {m} is {big_deg} > {MAX_BIG_DEGREE}"
            )));
        }
        let order = (q as u128)
            .checked_pow(big_deg as u32)
            .ok_or_else(|| Error::UnsupportedContext(format!("{q}^{big_deg} overflows")))?;
        let sub_size = (q as u128).pow(f);
        if sub_size > MAX_SUBFIELD_SIZE as u128 {
            return Err(Error::UnsupportedContext(format!("subfield of size {sub_size} is too large")));
        }
        let big = ExtField::new_least(q, big_deg);
        let e = (order - 1) / m as u128;
        let m_primes: Vec<u64> = factor(m).into_iter().map(|(p, _)| p).collect();
        let one = big.one();
        let mut zeta = None;
        for idx in 2..order {
            let z = big.pow(&big.from_index(idx), e);
            if m_primes.iter().all(|&r| big.pow(&z, (m / r) as u128) != one) {
                zeta = Some(z);
                break;
            }
        }
        let zeta = zeta.ok_or_else(|| Error::UnsupportedContext("no primitive m-th root found".into()))?;

        let mut zpow = Vec::with_capacity(m as usize);
        let mut cur = big.one();
        for _ in 0..m {
            zpow.push(cur.clone());
            cur = big.mul(&cur, &zeta);
        }
        let reduction_vec: Vec<Fe> = h
            .cosets
            .iter()
            .map(|&c| {
                h.elements
                    .iter()
                    .fold(big.zero(), |acc, &x| big.add(&acc, &zpow[mul_mod(x, c, m) as usize]))
            })
            .collect();

        let f_us = f as usize;
        let proper: Vec<usize> = divisors(f as u64).into_iter().map(|d| d as usize).filter(|&d| d < f_us).collect();
        let mut theta = None;
        for idx in 1..order {
            let y = big.from_index(idx);
            let mut t = big.zero();
            let mut yj = y.clone();
            for _ in 0..big_deg / f_us {
                t = big.add(&t, &yj);
                yj = big.frobenius(&yj, f_us);
            }
            if proper.iter().all(|&d| big.frobenius(&t, d) != t) {
                theta = Some(t);
                break;
            }
        }
        let theta = theta.ok_or_else(|| Error::UnsupportedContext("no subfield generator".into()))?;

        // minimal polynomial prod_j (Y - theta^{q^j}), coefficients in F_q
        let mut poly: Vec<Fe> = vec![big.one()];
        let mut conj = theta.clone();
        for _ in 0..f_us {
            let mut next = vec![big.zero(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] = big.add(&next[i + 1], c);
                next[i] = big.sub(&next[i], &big.mul(c, &conj));
            }
            poly = next;
            conj = big.frobenius(&conj, 1);
        }
        let mut g = Vec::with_capacity(f_us + 1);
        for c in &poly {
            if c[1..].iter().any(|&x| x != 0) {
                return Err(Error::UnsupportedContext("minimal polynomial not over F_q".into()));
            }
            g.push(c[0]);
        }
        let subfield = SmallField::new(q, g);

        let mut theta_pows = vec![big.one()];
        for j in 1..f_us {
            theta_pows.push(big.mul(&theta_pows[j - 1], &theta));
        }
        // choose f coordinate rows on which the theta powers are independent
        let mut pivot_rows = Vec::new();
        for r in 0..big_deg {
            let mut trial = pivot_rows.clone();
            trial.push(r);
            let mat: Vec<Vec<u64>> = trial.iter().map(|&rr| theta_pows.iter().map(|t| t[rr]).collect()).collect();
            if rank_mod(&mat, q) == trial.len() {
                pivot_rows = trial;
            }
            if pivot_rows.len() == f_us {
                break;
            }
        }
        let sq: Vec<Vec<u64>> = pivot_rows.iter().map(|&r| theta_pows.iter().map(|t| t[r]).collect()).collect();
        let mut inv_cols = Vec::with_capacity(f_us);
        for j in 0..f_us {
            let e: Vec<u64> = (0..f_us).map(|i| (i == j) as u64).collect();
            inv_cols.push(solve_mod_prime(&sq, &e, q)?);
        }
        let pivot_inv: Vec<Vec<u64>> = (0..f_us).map(|i| (0..f_us).map(|j| inv_cols[j][i]).collect()).collect();

        Ok(ResidueContext {
            q,
            f,
            big,
            zeta,
            reduction_vec,
            subfield,
            theta,
            h: h.clone(),
            theta_pows,
            pivot_rows,
            pivot_inv,
        })
    }

    pub fn descriptor(&self) -> &SubgroupDescriptor {
        &self.h
    }

    /// Entry at coset a is `reduction_vec` at the class of a*c.
    pub fn twisted_reduction_vector(&self, c: u64) -> Result<Vec<Fe>> {
        let perm = self.h.galois_permutation(c)?;
        Ok(perm.iter().map(|&j| self.reduction_vec[j].clone()).collect())
    }

    pub fn reduce_ring_element(&self, coeffs: &[i64], twist: u64) -> Result<Fe> {
        let v = self.twisted_reduction_vector(twist)?;
        let mut acc = self.big.zero();
        for (c, x) in coeffs.iter().zip(&v) {
            let c = c.rem_euclid(self.q as i64) as u64;
            if c != 0 {
                acc = self.big.add(&acc, &self.big.scale(x, c));
            }
        }
        Ok(acc)
    }

    /// Coordinates over theta of an element of the subfield.
    pub fn to_sub_coords(&self, x: &Fe) -> Result<Vec<u64>> {
        let rhs: Vec<u64> = self.pivot_rows.iter().map(|&r| x[r]).collect();
        let c: Vec<u64> = self
            .pivot_inv
            .iter()
            .map(|row| row.iter().zip(&rhs).fold(0, |a, (&u, &v)| (a + mul_mod(u, v, self.q)) % self.q))
            .collect();
        if self.from_sub_coords(&c) != *x {
            return Err(Error::NotInSubfield { f: self.f });
        }
        Ok(c)
    }

    pub fn from_sub_coords(&self, c: &[u64]) -> Fe {
        c.iter()
            .zip(&self.theta_pows)
            .fold(self.big.zero(), |acc, (&cj, t)| self.big.add(&acc, &self.big.scale(t, cj)))
    }

    pub fn to_sub_index(&self, x: &Fe) -> Result<usize> {
        Ok(self.subfield.index(&self.to_sub_coords(x)?))
    }

    /// The twisted reduction vector in subfield coordinates.
    pub fn twisted_sub_vector(&self, c: u64) -> Result<Vec<Vec<u64>>> {
        self.twisted_reduction_vector(c)?.iter().map(|x| self.to_sub_coords(x)).collect()
    }

    /// Subfield index of the reduction of `coeffs` against a vector from
    /// [`Self::twisted_sub_vector`].
    pub fn reduce_to_sub(&self, coeffs: &[i64], sub_vec: &[Vec<u64>]) -> usize {
        let q = self.q;
        let f = self.f as usize;
        let mut acc = vec![0u64; f];
        for (c, v) in coeffs.iter().zip(sub_vec) {
            let c = c.rem_euclid(q as i64) as u64;
            if c == 0 {
                continue;
            }
            for j in 0..f {
                acc[j] = (acc[j] + mul_mod(c, v[j], q)) % q;
            }
        }
        self.subfield.index(&acc)
    }

    /// True iff x generates F_{q^f} over F_q.
    pub fn is_full_degree(&self, x: &Fe, f: u32) -> Result<bool> {
        if self.big.frobenius(x, f as usize) != *x {
            return Err(Error::NotInSubfield { f });
        }
        Ok(divisors(f as u64)
            .into_iter()
            .filter(|&d| d < f as u64)
            .all(|d| self.big.frobenius(x, d as usize) != *x))
    }
}

fn rank_mod(rows: &[Vec<u64>], q: u64) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, p);
        let inv = crate::arith::inv_mod(m[rank][c], q).unwrap();
        let pr: Vec<u64> = m[rank].iter().map(|&x| mul_mod(x, inv, q)).collect();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let k = row[c];
                for (x, &y) in row.iter_mut().zip(&pr) {
                    *x = (*x + q - mul_mod(k, y, q)) % q;
                }
            }
        }
        m[rank] = pr;
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{gcd, mobius};
    use crate::embedding::embedding_matrix;
    use crate::real::MpFloat;
    use crate::rng::stream;
    use rand::Rng;
    use std::collections::HashSet;

    fn h3003() -> SubgroupDescriptor {
        SubgroupDescriptor::new(3003, &[2276, 2729, 1123]).unwrap()
    }

    #[test]
    fn context_3003_131() {
        let h = h3003();
        let ctx = ResidueContext::build(&h, 131).unwrap();
        assert_eq!(ctx.f, 2);
        assert_eq!(ctx.reduction_vec.len(), 30);
        assert_eq!(ctx.big.pow(&ctx.zeta, 3003), ctx.big.one());
        for d in crate::arith::divisors(3003) {
            if d < 3003 {
                assert_ne!(ctx.big.pow(&ctx.zeta, d as u128), ctx.big.one());
            }
        }
        for x in &ctx.reduction_vec {
            assert_eq!(ctx.big.frobenius(x, 2), *x);
            ctx.to_sub_coords(x).unwrap();
        }
        assert_eq!(ctx.subfield.size, 131 * 131);
        // one distinct twisted vector per prime, 15 primes
        let twists = h.prime_twists(131).unwrap();
        assert_eq!(twists.len(), 15);
        let distinct: HashSet<Vec<Fe>> = h.cosets.iter().map(|&c| ctx.twisted_reduction_vector(c).unwrap()).collect();
        assert_eq!(distinct.len(), 30);
        // Frobenius pairs c with cq: twisted vectors are Frobenius images
        for &c in &twists {
            let v = ctx.twisted_reduction_vector(c).unwrap();
            let w = ctx.twisted_reduction_vector(c * 131 % 3003).unwrap();
            let fv: Vec<Fe> = v.iter().map(|x| ctx.big.frobenius(x, 1)).collect();
            assert_eq!(fv, w);
        }
    }

    #[test]
    fn split_prime_lands_in_base_field() {
        // 31 = 1 mod 15
        let h = SubgroupDescriptor::new(15, &[1]).unwrap();
        let ctx = ResidueContext::build(&h, 31).unwrap();
        assert_eq!(ctx.f, 1);
        assert_eq!(ctx.big.deg, 1);
    }

    #[test]
    fn ramanujan_identity_in_field() {
        for (m, q) in [(15u64, 7u64), (21, 13), (35, 3), (7, 13)] {
            let h = SubgroupDescriptor::new(m, &[1]).unwrap();
            let ctx = ResidueContext::build(&h, q).unwrap();
            let mut s = ctx.big.zero();
            for i in 1..m {
                if gcd(i, m) == 1 {
                    s = ctx.big.add(&s, &ctx.big.pow(&ctx.zeta, i as u128));
                }
            }
            let want = ctx.big.constant(mobius(m).rem_euclid(q as i64) as u64);
            assert_eq!(s, want, "m={m}");
        }
    }

    #[test]
    fn twisting_is_an_action() {
        let h = SubgroupDescriptor::new(21, &[1]).unwrap();
        let ctx = ResidueContext::build(&h, 13).unwrap();
        assert_eq!(ctx.twisted_reduction_vector(1).unwrap(), ctx.reduction_vec);
        for &c1 in &h.cosets {
            let t1 = ctx.twisted_reduction_vector(c1).unwrap();
            for &c2 in &h.cosets {
                let perm = h.galois_permutation(c2).unwrap();
                let twice: Vec<Fe> = perm.iter().map(|&j| t1[j].clone()).collect();
                let once = ctx.twisted_reduction_vector(c1 * c2 % 21).unwrap();
                assert_eq!(twice, once);
            }
        }
    }

    #[test]
    fn full_degree_counts() {
        let h = h3003();
        let ctx = ResidueContext::build(&h, 131).unwrap();
        let count = ctx.subfield.full_degree_table().iter().filter(|&&b| b).count();
        assert_eq!(count, 17030);
        let x = ctx.big.constant(5);
        assert!(!ctx.is_full_degree(&x, 2).unwrap());
        assert!(ctx.is_full_degree(&ctx.theta, 2).unwrap());
    }

    #[test]
    fn not_in_subfield_is_rejected() {
        // m = 7, q = 2: F = 3, f = 3 for H = {1}; with H = <2> f = 1
        let h = SubgroupDescriptor::new(7, &[2]).unwrap();
        let ctx = ResidueContext::build(&h, 2).unwrap();
        assert_eq!((ctx.f, ctx.big.deg), (1, 3));
        let y = ctx.big.generator();
        assert!(matches!(ctx.is_full_degree(&y, 1), Err(Error::NotInSubfield { .. })));
        assert!(matches!(ctx.to_sub_coords(&y), Err(Error::NotInSubfield { .. })));
    }

    #[test]
    fn subfield_scan_matches_coordinate_enumeration() {
        let h = SubgroupDescriptor::new(21, &[4]).unwrap();
        let ctx = ResidueContext::build(&h, 5).unwrap();
        // 5 has order 6 mod 21
        assert_eq!(ctx.big.deg, 6);
        let f = ctx.f as usize;
        let scanned: HashSet<Fe> = (0..ctx.big.order())
            .map(|i| ctx.big.from_index(i))
            .filter(|x| ctx.big.frobenius(x, f) == *x)
            .collect();
        assert_eq!(scanned.len(), ctx.subfield.size);
        let enumerated: HashSet<Fe> = (0..ctx.subfield.size).map(|i| ctx.from_sub_coords(&ctx.subfield.coords(i))).collect();
        assert_eq!(scanned, enumerated);
    }

    #[test]
    fn reduction_is_a_ring_homomorphism() {
        for (m, gens, q) in [(21u64, vec![1i64], 13u64), (3003, vec![2276, 2729, 1123], 131), (35, vec![6], 3)] {
            let h = SubgroupDescriptor::new(m, &gens).unwrap();
            let ctx = ResidueContext::build(&h, q).unwrap();
            let e = embedding_matrix::<MpFloat>(&h, 100).unwrap();
            let n = h.degree_n;
            let mut rng = stream(9, "residue", m);
            let twist = h.cosets[1];
            for _ in 0..100 {
                let x: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
                let y: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
                let xy = e.ring_product(&x, &y).unwrap();
                let rx = ctx.reduce_ring_element(&x, twist).unwrap();
                let ry = ctx.reduce_ring_element(&y, twist).unwrap();
                assert_eq!(ctx.reduce_ring_element(&xy, twist).unwrap(), ctx.big.mul(&rx, &ry));
                let s: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                assert_eq!(ctx.reduce_ring_element(&s, twist).unwrap(), ctx.big.add(&rx, &ry));
                let sv = ctx.twisted_sub_vector(twist).unwrap();
                assert_eq!(ctx.reduce_to_sub(&x, &sv), ctx.to_sub_index(&rx).unwrap());
            }
            assert!(ctx.big.is_zero(&ctx.reduce_ring_element(&vec![0; n], 1).unwrap()));
        }
    }

    #[test]
    fn large_order_is_unsupported() {
        // 2 has order 28 modulo 29
        let h = SubgroupDescriptor::new(29, &[1]).unwrap();
        assert!(matches!(ResidueContext::build(&h, 2), Err(Error::UnsupportedContext(_))));
        assert!(matches!(ResidueContext::build(&h, 29), Err(Error::RamifiedPrime { .. })));
    }
}
