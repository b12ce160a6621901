//! Elementary integer arithmetic on machine words.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least nonnegative residue of `a` modulo `m`.
pub fn rem(a: i64, m: u64) -> u64 {
    a.rem_euclid(m as i64) as u64
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, as (prime, exponent) pairs.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, e)| e == 1)
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor(n) {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

/// Multiplicative order of `a` modulo `m`; `a` must be a unit.
pub fn mult_order(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 1;
    }
    let mut x = a % m;
    let mut k = 1;
    while x != 1 {
        x = mul_mod(x, a, m);
        k += 1;
    }
    k
}

/// Primes in the open interval (lo, hi), ascending.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo.saturating_add(1)..hi).filter(|&x| is_prime(x)).collect()
}

/// Ramanujan sum c_m(x) = sum of zeta_m^{kx} over units k.
pub fn ramanujan_sum(m: u64, x: i64) -> i64 {
    let g = gcd(rem(x, m), m);
    let g = if g == 0 { m } else { g };
    let t = m / g;
    mobius(t) * (euler_phi(m) / euler_phi(t)) as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_values() {
        assert_eq!(euler_phi(3003), 1440);
        assert_eq!(euler_phi(2805), 1280);
        assert_eq!(mobius(15), 1);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(primes_between(60, 70), vec![61, 67]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751));
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(mult_order(131, 3003), 2 * mult_order(131 * 131 % 3003, 3003));
    }

    #[test]
    fn ramanujan_matches_brute_force() {
        for m in [3u64, 7, 15, 21, 35] {
            for x in -10i64..40 {
                let mut s = 0.0f64;
                for k in 1..m {
                    if gcd(k, m) == 1 {
                        s += (2.0 * std::f64::consts::PI * (k as f64) * (x as f64) / m as f64).cos();
                    }
                }
                assert_eq!(s.round() as i64, ramanujan_sum(m, x), "m={m} x={x}");
            }
        }
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(a in 1u64..10_000, m in 2u64..10_000) {
            match inv_mod(a, m) {
                Some(b) => prop_assert_eq!(mul_mod(a, b, m), 1 % m),
                None => prop_assert!(gcd(a, m) != 1),
            }
        }

        #[test]
        fn primality_matches_trial_division(n in 0u64..50_000) {
            let naive = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            prop_assert_eq!(is_prime(n), naive);
        }

        #[test]
        fn factor_multiplies_back(n in 1u64..1_000_000) {
            let prod: u64 = factor(n).iter().map(|&(p, e)| p.pow(e)).product();
            prop_assert_eq!(prod, n);
        }
    }
}
