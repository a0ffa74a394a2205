//! Row-major dense matrices and the three GEMM shapes backprop needs.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor2 {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl Tensor2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2 {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "tensor shape mismatch");
        Tensor2 { rows, cols, values }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Column-wise concatenation `[self | other]`.
    pub fn hcat(&self, other: &Tensor2) -> Tensor2 {
        assert_eq!(self.rows, other.rows);
        if other.cols == 0 {
            return self.clone();
        }
        let cols = self.cols + other.cols;
        let mut values = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            values.extend_from_slice(self.row(r));
            values.extend_from_slice(other.row(r));
        }
        Tensor2::from_vec(self.rows, cols, values)
    }

    /// Columns `start..end` as a new tensor.
    pub fn columns(&self, start: usize, end: usize) -> Tensor2 {
        let cols = end - start;
        let mut values = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            values.extend_from_slice(&self.row(r)[start..end]);
        }
        Tensor2::from_vec(self.rows, cols, values)
    }
}

/// `C = A·B` with `A: m×k`, `B: k×n` given as a row-major slice.
pub fn matmul(a: &Tensor2, b: &[f64], n: usize) -> Tensor2 {
    let (m, k) = (a.rows, a.cols);
    assert_eq!(b.len(), k * n);
    let mut c = Tensor2::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.values.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            0.0,
            c.values.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    c
}

/// `out = Aᵀ·B` with `A: r×m`, `B: r×n`, written into an `m×n` slice.
pub fn matmul_at_b(a: &Tensor2, b: &Tensor2, out: &mut [f64]) {
    assert_eq!(a.rows, b.rows);
    let (m, k, n) = (a.cols, a.rows, b.cols);
    assert_eq!(out.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out.fill(0.0);
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.values.as_ptr(),
            1,
            m as isize,
            b.values.as_ptr(),
            n as isize,
            1,
            0.0,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// `C = A·Bᵀ` with `A: m×n`, `B: k×n` given as a row-major slice.
pub fn matmul_a_bt(a: &Tensor2, b: &[f64], k: usize) -> Tensor2 {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), k * n);
    let mut c = Tensor2::zeros(m, k);
    if m == 0 || k == 0 || n == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            n,
            k,
            1.0,
            a.values.as_ptr(),
            n as isize,
            1,
            b.as_ptr(),
            1,
            n as isize,
            0.0,
            c.values.as_mut_ptr(),
            k as isize,
            1,
        );
    }
    c
}
