use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::real::Real;

fn axpy_int(dst: &mut [i64], q: i64, src: &[i64]) -> Result<()> {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = q
            .checked_mul(*s)
            .and_then(|t| d.checked_sub(t))
            .ok_or_else(|| Error::PrecisionLoss("LLL transform overflow".into()))?;
    }
    Ok(())
}

/// Floating-point LLL on the columns of `a`, size-reducing to |mu| <= 0.51. Returns the unimodular `u`
/// with `a u` reduced, and its inverse.
pub fn lll_reduce<T: Real>(a: &Matrix<T>, delta: f64) -> Result<(Matrix<i64>, Matrix<i64>)> {
    if !(0.25 < delta && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("LLL delta {delta} outside (1/4, 1)")));
    }
    let n = a.cols;
    let bits = a.data[0].bits();
    let eta = T::from_f64(0.51, bits);
    let delta_r = T::from_f64(delta, bits);
    let mut b = a.columns();
    // u[j]: coordinates of b_j in a; v = u^{-1} kept by rows
    let mut u: Vec<Vec<i64>> = (0..n).map(|j| (0..n).map(|i| (i == j) as i64).collect()).collect();
    let mut v: Vec<Vec<i64>> = u.clone();
    let mut gs: Vec<Vec<T>> = vec![Vec::new(); n];
    let mut sq: Vec<T> = vec![T::zero(bits); n];
    let mut mu = Matrix::<T>::zeros(n, n, bits);

    let refresh = |k: usize, b: &[Vec<T>], gs: &mut Vec<Vec<T>>, sq: &mut Vec<T>, mu: &mut Matrix<T>| {
        let mut w = b[k].clone();
        for j in 0..k {
            let m = dot(&b[k], &gs[j]) / &sq[j];
            for (x, y) in w.iter_mut().zip(&gs[j]) {
                *x -= &(m.clone() * y);
            }
            mu[(k, j)] = m;
        }
        sq[k] = dot(&w, &w);
        gs[k] = w;
    };

    refresh(0, &b, &mut gs, &mut sq, &mut mu);
    let cap = 10 * n * n + 10;
    let mut swaps = 0usize;
    let mut k = 1;
    while k < n {
        let mut rounds = 0;
        loop {
            refresh(k, &b, &mut gs, &mut sq, &mut mu);
            if (0..k).all(|j| mu[(k, j)].abs() <= eta) {
                break;
            }
            rounds += 1;
            if rounds > 64 {
                return Err(Error::PrecisionLoss("LLL size reduction did not converge".into()));
            }
            for j in (0..k).rev() {
                let r = mu[(k, j)].round();
                let qi = r.to_i64().ok_or_else(|| Error::PrecisionLoss("LLL coefficient overflow".into()))?;
                if qi == 0 {
                    continue;
                }
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= &(r.clone() * y);
                }
                let uj = u[j].clone();
                axpy_int(&mut u[k], qi, &uj)?;
                let vk = v[k].clone();
                axpy_int(&mut v[j], -qi, &vk)?;
                for l in 0..j {
                    let t = r.clone() * &mu[(j, l)];
                    mu[(k, l)] -= &t;
                }
                mu[(k, j)] -= &r;
            }
        }
        let m = mu[(k, k - 1)].clone();
        let lhs = sq[k].clone();
        let rhs = (delta_r.clone() - m.clone() * &m) * &sq[k - 1];
        if lhs >= rhs {
            k += 1;
            if k < n {
                refresh(k, &b, &mut gs, &mut sq, &mut mu);
            }
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            v.swap(k, k - 1);
            swaps += 1;
            if swaps > cap {
                return Err(Error::PrecisionLoss(format!("LLL exceeded {cap} swaps")));
            }
            refresh(k - 1, &b, &mut gs, &mut sq, &mut mu);
            k = (k - 1).max(1);
        }
    }
    let um = Matrix::from_fn(n, n, |i, j| u[j][i]);
    let vm = Matrix::from_fn(n, n, |i, j| v[i][j]);
    Ok((um, vm))
}
