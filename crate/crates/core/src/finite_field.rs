//! Arithmetic in F_{q^k} = F_q[x]/(P) with P monic irreducible, and a
//! compact coordinate form for small subfields.

use crate::arith::{inv_mod, mul_mod};

/// Element of an extension field: coefficients of 1, x, .., x^{k-1}.
pub type Fe = Vec<u64>;

fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

/// Remainder of `a` modulo the nonzero polynomial `b` over F_q.
pub fn poly_rem(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let inv_lead = inv_mod(b[db], q).expect("unit leading coefficient");
    while r.len() > db {
        let d = r.len() - 1;
        let c = mul_mod(r[d], inv_lead, q);
        if c != 0 {
            for i in 0..=db {
                let t = mul_mod(c, b[i], q);
                r[d - db + i] = (r[d - db + i] + q - t) % q;
            }
        }
        r.pop();
        trim(&mut r);
    }
    r
}

pub fn poly_gcd(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, q);
        a = b;
        b = r;
    }
    a
}

#[derive(Clone, Debug)]
pub struct ExtField {
    pub q: u64,
    pub deg: usize,
    /// Monic modulus, low coefficient first, length `deg + 1`.
    pub modulus: Vec<u64>,
}

impl ExtField {
    pub fn with_modulus(q: u64, modulus: Vec<u64>) -> Self {
        ExtField { q, deg: modulus.len() - 1, modulus }
    }

    /// Field over the lexicographically least monic irreducible of degree
    /// `deg`: candidates x^deg + c are ordered by c read as a base-q integer
    /// with the constant term as least significant digit.
    pub fn new_least(q: u64, deg: usize) -> Self {
        let mut c = vec![0u64; deg];
        loop {
            let mut p = c.clone();
            p.push(1);
            if is_irreducible(&p, q) {
                return ExtField::with_modulus(q, p);
            }
            for d in c.iter_mut() {
                *d += 1;
                if *d < q {
                    break;
                }
                *d = 0;
            }
        }
    }

    pub fn order(&self) -> u128 {
        (self.q as u128).pow(self.deg as u32)
    }

    pub fn zero(&self) -> Fe {
        vec![0; self.deg]
    }

    pub fn one(&self) -> Fe {
        self.constant(1)
    }

    pub fn constant(&self, c: u64) -> Fe {
        let mut v = self.zero();
        v[0] = c % self.q;
        v
    }

    /// The class of x (reduced, so this is a constant when deg = 1).
    pub fn generator(&self) -> Fe {
        if self.deg == 1 {
            self.constant(self.q - self.modulus[0] % self.q)
        } else {
            let mut v = self.zero();
            v[1] = 1;
            v
        }
    }

    pub fn is_zero(&self, a: &Fe) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.q).collect()
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        a.iter().zip(b).map(|(x, y)| (x + self.q - y) % self.q).collect()
    }

    pub fn scale(&self, a: &Fe, c: u64) -> Fe {
        let c = c % self.q;
        a.iter().map(|&x| mul_mod(x, c, self.q)).collect()
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        let k = self.deg;
        let q = self.q;
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mul_mod(x, y, q)) % q;
            }
        }
        // reduce using x^k = -(modulus[0] + .. + modulus[k-1] x^{k-1})
        for d in (k..prod.len()).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            for i in 0..k {
                let t = mul_mod(c, self.modulus[i], q);
                prod[d - k + i] = (prod[d - k + i] + q - t) % q;
            }
        }
        prod.truncate(k);
        prod
    }

    pub fn pow(&self, a: &Fe, mut e: u128) -> Fe {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// a^{q^k}.
    pub fn frobenius(&self, a: &Fe, k: usize) -> Fe {
        let mut x = a.clone();
        for _ in 0..k {
            x = self.pow(&x, self.q as u128);
        }
        x
    }

    pub fn index(&self, a: &Fe) -> u128 {
        a.iter().rev().fold(0u128, |acc, &c| acc * self.q as u128 + c as u128)
    }

    pub fn from_index(&self, mut idx: u128) -> Fe {
        let mut v = self.zero();
        for c in v.iter_mut() {
            *c = (idx % self.q as u128) as u64;
            idx /= self.q as u128;
        }
        v
    }
}

/// Rabin's irreducibility test for a monic polynomial over F_q.
pub fn is_irreducible(p: &[u64], q: u64) -> bool {
    let k = p.len() - 1;
    if k == 1 {
        return true;
    }
    if p[0] == 0 {
        return false;
    }
    let f = ExtField::with_modulus(q, p.to_vec());
    let x = f.generator();
    // x^{q^j} for j = 1..k
    let mut pows = Vec::with_capacity(k);
    let mut cur = x.clone();
    for _ in 0..k {
        cur = f.pow(&cur, q as u128);
        pows.push(cur.clone());
    }
    if pows[k - 1] != x {
        return false;
    }
    for (r, _) in crate::arith::factor(k as u64) {
        let j = k / r as usize;
        let mut d = f.sub(&pows[j - 1], &x);
        trim(&mut d);
        if poly_gcd(p, &d, q).len() != 1 {
            return false;
        }
    }
    true
}

/// F_{q^f} as F_q[y]/(g), elements packed as the index sum c_j q^j.
#[derive(Clone, Debug)]
pub struct SmallField {
    pub q: u64,
    pub f: usize,
    /// Monic, low coefficient first, length f + 1.
    pub g: Vec<u64>,
    pub size: usize,
}

impl SmallField {
    pub fn new(q: u64, g: Vec<u64>) -> Self {
        let f = g.len() - 1;
        SmallField { q, f, g, size: (q as usize).pow(f as u32) }
    }

    pub fn coords(&self, mut idx: usize) -> Vec<u64> {
        let mut v = vec![0u64; self.f];
        for c in v.iter_mut() {
            *c = (idx % self.q as usize) as u64;
            idx /= self.q as usize;
        }
        v
    }

    pub fn index(&self, c: &[u64]) -> usize {
        c.iter().rev().fold(0usize, |acc, &x| acc * self.q as usize + x as usize)
    }

    pub fn mul_coords(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let big = ExtField::with_modulus(self.q, self.g.clone());
        big.mul(&a.to_vec(), &b.to_vec())
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.index(&self.mul_coords(&self.coords(a), &self.coords(b)))
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.coords(a), self.coords(b));
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.q).collect();
        self.index(&s)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.coords(a), self.coords(b));
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + self.q - v) % self.q).collect();
        self.index(&s)
    }

    /// Coordinates of y^j * s for j < f; `a * s` is then sum_j a_j row_j.
    pub fn mul_table(&self, s: usize) -> Vec<Vec<u64>> {
        let sc = self.coords(s);
        let mut out = Vec::with_capacity(self.f);
        let mut yj = vec![0u64; self.f];
        yj[0] = 1;
        for _ in 0..self.f {
            out.push(self.mul_coords(&yj, &sc));
            if self.f > 1 {
                let mut y = vec![0u64; self.f];
                y[1] = 1;
                yj = self.mul_coords(&yj, &y);
            }
        }
        out
    }

    /// Which elements generate the whole field over F_q.
    pub fn full_degree_table(&self) -> Vec<bool> {
        let big = ExtField::with_modulus(self.q, self.g.clone());
        let proper: Vec<usize> = crate::arith::divisors(self.f as u64)
            .into_iter()
            .map(|d| d as usize)
            .filter(|&d| d < self.f)
            .collect();
        (0..self.size)
            .map(|i| {
                let x = self.coords(i);
                proper.iter().all(|&d| big.frobenius(&x, d) != x)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn least_irreducibles() {
        // over F_2: x^2 + x + 1, x^3 + x + 1
        assert_eq!(ExtField::new_least(2, 2).modulus, vec![1, 1, 1]);
        assert_eq!(ExtField::new_least(2, 3).modulus, vec![1, 1, 0, 1]);
        // over F_3 the least is x^2 + 1
        assert_eq!(ExtField::new_least(3, 2).modulus, vec![1, 0, 1]);
        assert_eq!(ExtField::new_least(7, 1).modulus, vec![0, 1]);
    }

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        // number of monic irreducibles of degree k over F_q is (1/k) sum mu(d) q^{k/d}
        for (q, k) in [(2u64, 4usize), (3, 3), (5, 2), (2, 6)] {
            let mut count = 0;
            let total = q.pow(k as u32);
            for c in 0..total {
                let mut p: Vec<u64> = (0..k).map(|i| (c / q.pow(i as u32)) % q).collect();
                p.push(1);
                if is_irreducible(&p, q) {
                    count += 1;
                }
            }
            let want: i64 = crate::arith::divisors(k as u64)
                .iter()
                .map(|&d| crate::arith::mobius(d) * (q as i64).pow((k as u64 / d) as u32))
                .sum::<i64>()
                / k as i64;
            assert_eq!(count, want, "q={q} k={k}");
        }
    }

    #[test]
    fn multiplicative_group_has_right_order() {
        let f = ExtField::new_least(13, 2);
        let x = f.generator();
        assert_eq!(f.pow(&x, 168), f.one());
        assert_eq!(f.frobenius(&x, 2), x);
        assert_ne!(f.frobenius(&x, 1), x);
    }

    #[test]
    fn small_field_full_degree_count() {
        let g = ExtField::new_least(131, 2).modulus;
        let s = SmallField::new(131, g);
        let full = s.full_degree_table().iter().filter(|&&b| b).count();
        assert_eq!(full, 131 * 131 - 131);
    }

    proptest! {
        #[test]
        fn field_axioms(a in 0u128..2197, b in 0u128..2197, c in 0u128..2197) {
            let f = ExtField::new_least(13, 3);
            let (a, b, c) = (f.from_index(a), f.from_index(b), f.from_index(c));
            prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
            prop_assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
            prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
            if !f.is_zero(&a) {
                prop_assert_eq!(f.pow(&a, f.order() - 1), f.one());
            }
        }

        #[test]
        fn small_field_mul_table_agrees(a in 0usize..169, s in 0usize..169) {
            let sf = SmallField::new(13, ExtField::new_least(13, 2).modulus);
            let t = sf.mul_table(s);
            let ac = sf.coords(a);
            let mut acc = vec![0u64; 2];
            for j in 0..2 {
                for k in 0..2 {
                    acc[k] = (acc[k] + ac[j] * t[j][k]) % 13;
                }
            }
            prop_assert_eq!(sf.index(&acc), sf.mul(a, s));
            prop_assert_eq!(sf.sub(sf.add(a, s), s), a);
        }
    }
}
