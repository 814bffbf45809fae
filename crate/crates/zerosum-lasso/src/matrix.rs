//! Dense column-major matrix storage plus the handful of slice kernels the
//! solver needs.
//!
//! Every 2-coordinate step works with two full columns of the design matrix,
//! so columns are stored contiguously and `column(j)` is a plain `&[F]`.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    /// Column-major: entry `(i, j)` lives at `data[j * rows + i]`.
    data: Vec<F>,
}

impl<F: Scalar> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    /// Builds from a flat row-major slice (the natural layout of CSV input).
    pub fn from_row_major(rows: usize, cols: usize, row_major: &[F]) -> Self {
        assert_eq!(
            row_major.len(),
            rows * cols,
            "row-major buffer has wrong length"
        );
        let mut data = vec![F::zero(); rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                data[j * rows + i] = row_major[i * cols + j];
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == n_cols),
            "rows must be rectangular"
        );
        let mut data = vec![F::zero(); n_rows * n_cols];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[j * n_rows + i] = v;
            }
        }
        Self {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    pub fn from_columns(cols: &[Vec<F>]) -> Self {
        let n_cols = cols.len();
        let n_rows = cols.first().map_or(0, Vec::len);
        assert!(
            cols.iter().all(|c| c.len() == n_rows),
            "columns must have equal length"
        );
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for c in cols {
            data.extend_from_slice(c);
        }
        Self {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    /// Contiguous view of column `j` in O(1).
    #[inline]
    pub fn column(&self, j: usize) -> &[F] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[F]> {
        self.data.chunks_exact(self.rows.max(1))
    }

    pub fn values(&self) -> impl Iterator<Item = &F> {
        self.data.iter()
    }

    pub fn row(&self, i: usize) -> Vec<F> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// `A x`, accumulated column by column.
    pub fn mul_vec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![F::zero(); self.rows];
        for (j, col) in self.columns().enumerate() {
            let xj = x[j];
            if xj != F::zero() {
                for (o, &a) in out.iter_mut().zip(col) {
                    *o += xj * a;
                }
            }
        }
        out
    }

    /// `A' v`: one dot product per column, in ascending column order.
    pub fn tr_mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.rows);
        self.columns().map(|col| dot(col, v)).collect()
    }

    pub fn with_appended_column(&self, col: &[F]) -> Self {
        assert_eq!(col.len(), self.rows);
        let mut data = self.data.clone();
        data.extend_from_slice(col);
        Self {
            rows: self.rows,
            cols: self.cols + 1,
            data,
        }
    }
}

#[inline]
pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
pub fn norm1<F: Scalar>(v: &[F]) -> F {
    let mut acc = F::zero();
    for &x in v {
        acc += x.abs();
    }
    acc
}

#[inline]
pub fn norm2_sq<F: Scalar>(v: &[F]) -> F {
    let mut acc = F::zero();
    for &x in v {
        acc += x * x;
    }
    acc
}

#[inline]
pub fn norm_inf<F: Scalar>(v: &[F]) -> F {
    let mut acc = F::zero();
    for &x in v {
        acc = acc.max(x.abs());
    }
    acc
}

#[inline]
pub fn sum<F: Scalar>(v: &[F]) -> F {
    let mut acc = F::zero();
    for &x in v {
        acc += x;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_is_contiguous_and_correct() {
        let m = DenseMatrix::from_row_major(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(m.column(0), &[1.0, 4.0]);
        assert_eq!(m.column(1), &[2.0, 5.0]);
        assert_eq!(m.column(2), &[3.0, 6.0]);
        assert_eq!(m.get(1, 2), 6.0);
        assert_eq!(m.row(0), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn mat_vec_products() {
        let m = DenseMatrix::from_row_major(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![3.0, 7.0]);
        assert_eq!(m.tr_mul_vec(&[1.0, 1.0]), vec![4.0, 6.0]);
    }

    #[test]
    fn appended_column() {
        let m = DenseMatrix::<f64>::identity(2).with_appended_column(&[5.0, 6.0]);
        assert_eq!(m.ncols(), 3);
        assert_eq!(m.column(2), &[5.0, 6.0]);
    }
}
