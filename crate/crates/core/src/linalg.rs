//! Dense matrices over a `Real` backend and linear algebra over F_q.

use crate::arith::{inv_mod, mul_mod};
use crate::error::{Error, Result};
use crate::real::Real;
use std::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn from_columns(cols: &[Vec<T>]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = a[0].clone() * &b[0];
    for k in 1..a.len() {
        acc += &(a[k].clone() * &b[k]);
    }
    acc
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize, bits: u32) -> Self {
        Matrix::from_fn(rows, cols, |_, _| T::zero(bits))
    }

    pub fn identity(n: usize, bits: u32) -> Self {
        Matrix::from_fn(n, n, |i, j| T::from_i64((i == j) as i64, bits))
    }

    pub fn matmul(&self, o: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, o.rows);
        let ot = o.transpose();
        Matrix::from_fn(self.rows, o.cols, |i, j| dot(self.row(i), ot.row(j)))
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self * z` for an integer vector.
    pub fn mul_int_vec(&self, z: &[i64]) -> Vec<T> {
        let bits = self.data[0].bits();
        let zr: Vec<T> = z.iter().map(|&x| T::from_i64(x, bits)).collect();
        self.mul_vec(&zr)
    }

    pub fn gram(&self) -> Matrix<T> {
        self.transpose().matmul(self)
    }

    pub fn max_abs_diff(&self, o: &Matrix<T>) -> f64 {
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| (a.clone() - b).abs().to_f64())
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1i32;
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            for i in k + 1..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best.is_zero() {
                return Err(Error::PrecisionLoss("singular matrix in LU".into()));
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = a[(k, k)].clone();
            for i in k + 1..n {
                let l = a[(i, k)].clone() / &piv;
                if l.is_zero() {
                    a[(i, k)] = l;
                    continue;
                }
                for j in k + 1..n {
                    let t = l.clone() * &a[(k, j)];
                    a[(i, j)] -= &t;
                }
                a[(i, k)] = l;
            }
        }
        Ok(Lu { lu: a, perm, sign })
    }
}

pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: i32,
}

impl<T: Real> Lu<T> {
    pub fn det(&self) -> T {
        let n = self.lu.rows;
        let mut d = T::from_i64(self.sign as i64, self.lu.data[0].bits());
        for i in 0..n {
            d *= &self.lu[(i, i)];
        }
        d
    }

    /// Natural log of |det|, safe against overflow of the backend.
    pub fn log_abs_det(&self) -> f64 {
        (0..self.lu.rows).map(|i| self.lu[(i, i)].to_f64().abs().ln()).sum()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[(i, j)].clone() * &x[j];
                x[i] -= &t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[(i, j)].clone() * &x[j];
                x[i] -= &t;
            }
            x[i] = x[i].clone() / &self.lu[(i, i)];
        }
        x
    }
}

/// Solves `a x = b` over F_q by Gauss-Jordan elimination.
pub fn solve_mod_prime(a: &[Vec<u64>], b: &[u64], q: u64) -> Result<Vec<u64>> {
    let rows = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| r.iter().map(|x| x % q).chain(std::iter::once(bi % q)).collect())
        .collect();
    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        let Some(p) = (rank..rows).find(|&i| m[i][col] != 0) else { continue };
        m.swap(rank, p);
        let inv = inv_mod(m[rank][col], q).expect("nonzero mod prime");
        for x in m[rank].iter_mut() {
            *x = mul_mod(*x, inv, q);
        }
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[col] != 0 {
                let f = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + q - mul_mod(f, y, q)) % q;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rank < n {
        return Err(Error::SingularSystem { rank, n });
    }
    if m[rank..].iter().any(|r| r[n] != 0) {
        return Err(Error::SingularSystem { rank, n });
    }
    let mut x = vec![0u64; n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][n];
    }
    Ok(x)
}
