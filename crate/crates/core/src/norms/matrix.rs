use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| Complex64::new((i == j) as u8 as f64, 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }
}

/// Which Gram matrix the right-hand side is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsOrientation {
    /// `max_j sum_i |a_ij|^2 + (sum_{j != j'} |sum_i a_ij conj(a_ij')|^2)^{1/2}`.
    Columns,
    /// `max_i sum_j |a_ij|^2 + (sum_{i != i'} |sum_j a_i'j conj(a_ij)|^2)^{1/2}`.
    Rows,
}

/// `lhs = sum_i |sum_j a_ij b_j|^2` and the two-term bound with constant 1
/// for the chosen orientation. Requires `sum |b_j|^2 <= 1`.
pub fn matrix_cs_check(a: &Matrix, b: &[Complex64], orientation: CsOrientation) -> Result<(f64, f64)> {
    if b.len() != a.cols {
        return Err(Error::InvalidArgument(format!(
            "vector of length {} against {} columns",
            b.len(),
            a.cols
        )));
    }
    let norm2: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if norm2 > 1.0 + 1e-12 {
        return Err(Error::VectorNotInUnitBall(norm2));
    }
    let lhs: f64 = (0..a.rows)
        .map(|i| (0..a.cols).map(|j| a.get(i, j) * b[j]).sum::<Complex64>().norm_sqr())
        .sum();
    // Gram entries over the summed index; `m` is the matrix whose rows
    // index the Gram matrix.
    let m = match orientation {
        CsOrientation::Rows => a.clone(),
        CsOrientation::Columns => a.transpose(),
    };
    let mut diag: f64 = 0.0;
    let mut off = 0.0;
    for p in 0..m.rows {
        let d: f64 = (0..m.cols).map(|k| m.get(p, k).norm_sqr()).sum();
        diag = diag.max(d);
        for q in 0..m.rows {
            if q != p {
                let g: Complex64 = (0..m.cols).map(|k| m.get(q, k) * m.get(p, k).conj()).sum();
                off += g.norm_sqr();
            }
        }
    }
    Ok((lhs, diag + off.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_case() {
        let a = Matrix::identity(5);
        let b: Vec<Complex64> = (0..5).map(|k| c(0.4, 0.2 * k as f64 - 0.4) * 0.5).collect();
        let n2: f64 = b.iter().map(|x| x.norm_sqr()).sum();
        for o in [CsOrientation::Rows, CsOrientation::Columns] {
            let (lhs, rhs) = matrix_cs_check(&a, &b, o).unwrap();
            assert!((lhs - n2).abs() < 1e-15);
            assert_eq!(rhs, 1.0);
        }
    }

    #[test]
    fn all_ones() {
        for n in [1usize, 2, 5, 9] {
            let a = Matrix::from_fn(n, n, |_, _| c(1.0, 0.0));
            let mut b = vec![c(0.0, 0.0); n];
            b[0] = c(1.0, 0.0);
            let nf = n as f64;
            for o in [CsOrientation::Rows, CsOrientation::Columns] {
                let (lhs, rhs) = matrix_cs_check(&a, &b, o).unwrap();
                assert!((lhs - nf).abs() < 1e-12);
                assert!((rhs - (nf + (nf * (nf - 1.0) * nf * nf).sqrt())).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn precondition() {
        let a = Matrix::identity(2);
        assert!(matches!(
            matrix_cs_check(&a, &[c(1.0, 0.0), c(0.5, 0.0)], CsOrientation::Rows),
            Err(Error::VectorNotInUnitBall(_))
        ));
        assert!(matrix_cs_check(&a, &[c(1.0, 0.0)], CsOrientation::Rows).is_err());
    }
}
