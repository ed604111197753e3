//! Dense linear algebra over a [`Field`]: row reduction, solving, kernels.
//!
//! Matrices are small (fit dimensions, quadratic-form ranks), so a plain
//! row-major `Vec` with Gaussian elimination is enough.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::{Field, FqElem};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<FqElem>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, a: vec![FqElem::default(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<FqElem>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut a = Vec::with_capacity(r * c);
        for row in rows {
            debug_assert_eq!(row.len(), c);
            a.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, a }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> FqElem {
        self.a[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FqElem) {
        self.a[r * self.cols + c] = v;
    }

    /// In-place reduced row echelon form; returns pivot columns.
    pub fn rref(&mut self, f: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.at(r, col).is_zero()) else {
                continue;
            };
            for c in 0..self.cols {
                let tmp = self.at(row, c);
                self.set(row, c, self.at(p, c));
                self.set(p, c, tmp);
            }
            let inv = f.inv(self.at(row, col));
            for c in col..self.cols {
                self.set(row, c, f.mul(self.at(row, c), inv));
            }
            for r in 0..self.rows {
                if r != row && !self.at(r, col).is_zero() {
                    let factor = self.at(r, col);
                    for c in col..self.cols {
                        let v = f.sub(self.at(r, c), f.mul(factor, self.at(row, c)));
                        self.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &Field) -> usize {
        let mut m = self.clone();
        m.rref(f).len()
    }
}

/// Solve `A x = b`. Returns `(particular, kernel_basis)` or `None` when
/// inconsistent.
pub fn solve(f: &Field, a: &Mat, b: &[FqElem]) -> Option<(Vec<FqElem>, Vec<Vec<FqElem>>)> {
    debug_assert_eq!(a.rows, b.len());
    let mut aug = Mat::zeros(a.rows, a.cols + 1);
    for r in 0..a.rows {
        for c in 0..a.cols {
            aug.set(r, c, a.at(r, c));
        }
        aug.set(r, a.cols, b[r]);
    }
    let pivots = aug.rref(f);
    if pivots.contains(&a.cols) {
        return None;
    }
    let mut x = vec![f.zero(); a.cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = aug.at(r, a.cols);
    }
    let pivot_set: Vec<bool> = {
        let mut s = vec![false; a.cols];
        for &pc in &pivots {
            s[pc] = true;
        }
        s
    };
    let mut kernel = Vec::new();
    for free in 0..a.cols {
        if pivot_set[free] {
            continue;
        }
        let mut v = vec![f.zero(); a.cols];
        v[free] = f.one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = f.neg(aug.at(r, free));
        }
        kernel.push(v);
    }
    Some((x, kernel))
}

/// Inverse of a square matrix, if invertible.
pub fn invert(f: &Field, a: &Mat) -> Option<Mat> {
    debug_assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut aug = Mat::zeros(n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            aug.set(r, c, a.at(r, c));
        }
        aug.set(r, n + r, f.one());
    }
    let pivots = aug.rref(f);
    // invertible iff the pivots are exactly the left block's columns
    if pivots.len() < n || pivots[..n].iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    let mut out = Mat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out.set(r, c, aug.at(r, n + c));
        }
    }
    Some(out)
}

pub fn mat_vec(f: &Field, a: &Mat, x: &[FqElem]) -> Vec<FqElem> {
    debug_assert_eq!(a.cols, x.len());
    (0..a.rows)
        .map(|r| {
            let mut acc = f.zero();
            for c in 0..a.cols {
                acc = f.add(acc, f.mul(a.at(r, c), x[c]));
            }
            acc
        })
        .collect()
}

pub fn dot(f: &Field, a: &[FqElem], b: &[FqElem]) -> FqElem {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = f.zero();
    for i in 0..a.len() {
        acc = f.add(acc, f.mul(a[i], b[i]));
    }
    acc
}
