//! Small dense-matrix helpers over generic scalars.
//!
//! `nalgebra` handles plain `f64` matrices; these routines exist so that
//! matrix-valued fields can be evaluated over dual numbers, keeping every
//! derivative exact.

use crate::expr::Scalar;

pub type Mat<T> = Vec<Vec<T>>;

pub fn zeros<T: Scalar>(rows: usize, cols: usize) -> Mat<T> {
    vec![vec![T::from_f64(0.0); cols]; rows]
}

pub fn identity<T: Scalar>(n: usize) -> Mat<T> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::from_f64(1.0);
    }
    m
}

pub fn add<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(&x, &y)| x + y).collect())
        .collect()
}

pub fn sub<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(&x, &y)| x - y).collect())
        .collect()
}

pub fn mul<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let (n, k, p) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, p);
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            for j in 0..p {
                out[i][j] = out[i][j] + ail * b[l][j];
            }
        }
    }
    out
}

pub fn scale<T: Scalar>(c: T, a: &Mat<T>) -> Mat<T> {
    a.iter()
        .map(|r| r.iter().map(|&x| c * x).collect())
        .collect()
}

pub fn commutator<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    sub(&mul(a, b), &mul(b, a))
}

pub fn matvec<T: Scalar>(a: &Mat<T>, v: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(T::from_f64(0.0), |acc, (&x, &y)| acc + x * y)
        })
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting on primal values.
/// Returns `None` when a pivot column is numerically zero.
pub fn inverse<T: Scalar>(a: &Mat<T>) -> Option<Mat<T>> {
    let n = a.len();
    let mut m = a.clone();
    let mut inv = identity::<T>(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            m[i][col]
                .val()
                .abs()
                .partial_cmp(&m[j][col].val().abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot][col].val().abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let d = m[col][col];
        for j in 0..n {
            m[col][j] = m[col][j] / d;
            inv[col][j] = inv[col][j] / d;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = m[i][col];
            for j in 0..n {
                m[i][j] = m[i][j] - factor * m[col][j];
                inv[i][j] = inv[i][j] - factor * inv[col][j];
            }
        }
    }
    Some(inv)
}

pub fn max_abs<T: Scalar>(a: &Mat<T>) -> f64 {
    a.iter()
        .flatten()
        .map(|x| x.val().abs())
        .fold(0.0, f64::max)
}
