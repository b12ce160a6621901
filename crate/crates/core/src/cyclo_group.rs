//! Subgroups H of (Z/mZ)^* and the Galois combinatorics of the fixed field
//! K = Q(zeta_m)^H.

use crate::arith::{gcd, is_prime, is_squarefree, mul_mod, primes_between, rem};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct SubgroupDescriptor {
    pub m: u64,
    pub gens: Vec<u64>,
    /// Elements of H, ascending.
    pub elements: Vec<u64>,
    pub order: usize,
    pub degree_n: usize,
    pub cosets: Vec<u64>,
    pub totally_real: bool,
    // unit -> index into `cosets`
    class: Vec<u32>,
}

impl SubgroupDescriptor {
    pub fn new(m: u64, gens: &[i64]) -> Result<Self> {
        if m < 3 || m.is_multiple_of(2) || !is_squarefree(m) || m > u32::MAX as u64 {
            return Err(Error::BadModulus(m));
        }
        let mut g = Vec::with_capacity(gens.len());
        for &x in gens {
            let r = rem(x, m);
            if gcd(r, m) != 1 {
                return Err(Error::NonUnitGenerator { gen: x, m });
            }
            g.push(r);
        }

        let mut in_h = vec![false; m as usize];
        let mut elements = vec![1u64];
        in_h[1] = true;
        let mut i = 0;
        while i < elements.len() {
            let x = elements[i];
            for &s in &g {
                let y = mul_mod(x, s, m);
                if !in_h[y as usize] {
                    in_h[y as usize] = true;
                    elements.push(y);
                }
            }
            i += 1;
        }
        elements.sort_unstable();
        let totally_real = in_h[(m - 1) as usize];

        // smallest representative of each class, in increasing order
        let mut class = vec![NONE; m as usize];
        let mut smallest = Vec::new();
        for a in 1..m {
            if gcd(a, m) != 1 || class[a as usize] != NONE {
                continue;
            }
            let idx = smallest.len() as u32;
            for &h in &elements {
                class[mul_mod(a, h, m) as usize] = idx;
            }
            smallest.push(a);
        }

        let cosets = if totally_real {
            smallest
        } else {
            let mut taken = vec![false; smallest.len()];
            let mut first = Vec::with_capacity(smallest.len() / 2);
            for (j, &c) in smallest.iter().enumerate() {
                if taken[j] {
                    continue;
                }
                taken[j] = true;
                taken[class[(m - c) as usize] as usize] = true;
                first.push(c);
            }
            let second: Vec<u64> = first.iter().map(|&c| m - c).collect();
            first.into_iter().chain(second).collect()
        };

        // reindex classes to the final ordering
        let mut remap = vec![NONE; cosets.len()];
        for (i, &c) in cosets.iter().enumerate() {
            remap[class[c as usize] as usize] = i as u32;
        }
        for v in class.iter_mut() {
            if *v != NONE {
                *v = remap[*v as usize];
            }
        }

        Ok(SubgroupDescriptor {
            m,
            gens: g,
            order: elements.len(),
            degree_n: cosets.len(),
            elements,
            cosets,
            totally_real,
            class,
        })
    }

    /// Position in `cosets` of the class of `a`.
    pub fn coset_index(&self, a: i64) -> Result<usize> {
        let r = rem(a, self.m);
        match self.class[r as usize] {
            NONE => Err(Error::NonUnit { value: a, m: self.m }),
            i => Ok(i as usize),
        }
    }

    pub fn coset_of(&self, a: i64) -> Result<u64> {
        Ok(self.cosets[self.coset_index(a)?])
    }

    pub fn contains(&self, a: i64) -> bool {
        self.elements.binary_search(&rem(a, self.m)).is_ok()
    }

    /// Least f >= 1 with q^f in H.
    pub fn residue_degree(&self, q: u64) -> Result<u32> {
        if q.is_multiple_of(self.m) || gcd(q, self.m) != 1 {
            return Err(Error::RamifiedPrime { q, m: self.m });
        }
        let q = q % self.m;
        let mut x = q;
        let mut f = 1;
        while !self.contains(x as i64) {
            x = mul_mod(x, q, self.m);
            f += 1;
        }
        Ok(f)
    }

    /// `perm[i]` is the index of the class of `cosets[i] * c`.
    pub fn galois_permutation(&self, c: u64) -> Result<Vec<usize>> {
        self.coset_index(c as i64)?;
        self.cosets
            .iter()
            .map(|&a| self.coset_index(mul_mod(a, c, self.m) as i64))
            .collect()
    }

    /// Degree over Q of z = sum coeffs[i] w_{cosets[i]}.
    pub fn extension_degree(&self, coeffs: &[i64]) -> Result<usize> {
        if coeffs.len() != self.degree_n {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                self.degree_n,
                coeffs.len()
            )));
        }
        if coeffs.iter().all(|&c| c == 0) {
            return Err(Error::ZeroElement);
        }
        let mut stab = 0;
        for &l in &self.cosets {
            let perm = self.galois_permutation(l)?;
            if (0..self.degree_n).all(|i| coeffs[perm[i]] == coeffs[i]) {
                stab += 1;
            }
        }
        Ok(self.degree_n / stab)
    }

    /// Primes q in (lo, hi), not dividing m, with residue degree f.
    pub fn degree_f_primes(&self, lo: u64, hi: u64, f: u32) -> Vec<u64> {
        if hi <= lo {
            return Vec::new();
        }
        primes_between(lo, hi)
            .into_iter()
            .filter(|&q| !self.m.is_multiple_of(q) && self.residue_degree(q).ok() == Some(f))
            .collect()
    }

    /// One coset representative per prime above q: the classes modulo the
    /// decomposition group generated by q, earliest coset first.
    pub fn prime_twists(&self, q: u64) -> Result<Vec<u64>> {
        self.residue_degree(q)?;
        let mut seen = vec![false; self.degree_n];
        let mut out = Vec::new();
        for (i, &c) in self.cosets.iter().enumerate() {
            if seen[i] {
                continue;
            }
            out.push(c);
            let mut x = c;
            loop {
                let j = self.coset_index(x as i64)?;
                if seen[j] {
                    break;
                }
                seen[j] = true;
                x = mul_mod(x, q % self.m, self.m);
            }
        }
        Ok(out)
    }
}

/// True when q is prime and does not divide m.
pub fn is_unramified_prime(m: u64, q: u64) -> bool {
    is_prime(q) && !m.is_multiple_of(q)
}
