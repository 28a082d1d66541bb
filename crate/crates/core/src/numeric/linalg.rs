//! Dense high-precision linear algebra: just enough for the moment system
//! and the Padé denominators.

use std::cmp::Ordering;

use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};

use super::precision::PrecisionContext;
use super::real::BigReal;

pub type Vector = Vec<BigReal>;

/// Row-major dense matrix of [`BigReal`].
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BigReal>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, ctx: PrecisionContext) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![ctx.zero(); rows * cols],
        }
    }

    pub fn identity(n: usize, ctx: PrecisionContext) -> Self {
        let mut m = Matrix::zeros(n, n, ctx);
        for i in 0..n {
            m[(i, i)] = ctx.one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigReal>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Validation {
                op: "lu_solve",
                detail: "ragged rows".into(),
            });
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigReal] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[BigReal]) -> Vector {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let prec = row.iter().chain(x).map(BigReal::prec).max().unwrap_or(64);
                let mut acc = Float::new(prec);
                for (a, b) in row.iter().zip(x) {
                    acc += &a.0 * &b.0;
                }
                BigReal(acc)
            })
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = BigReal;
    fn index(&self, (i, j): (usize, usize)) -> &BigReal {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigReal {
        &mut self.data[i * self.cols + j]
    }
}

/// `P·A = L·U` with unit lower-triangular `L` stored below the diagonal.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    lu: Matrix,
    perm: Vec<usize>,
    ctx: PrecisionContext,
}

const PARALLEL_ROWS: usize = 48;

impl LuFactorization {
    /// Partial pivoting: the pivot is the entry of largest magnitude in the
    /// column, ties going to the lowest row index, so the factorization is
    /// fully deterministic.
    pub fn factor(a: &Matrix, ctx: PrecisionContext) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Validation {
                op: "lu_solve",
                detail: format!("matrix is {}x{}, not square", a.rows, a.cols),
            });
        }
        let n = a.rows;
        let mut lu = Matrix {
            rows: n,
            cols: n,
            data: a.data.iter().map(|v| v.to_ctx(ctx)).collect(),
        };
        let eps = ctx.epsilon();
        let col_scale: Vec<BigReal> = (0..n)
            .map(|j| {
                BigReal::max_abs((0..n).map(|i| &a.data[i * n + j])).unwrap_or_else(|| ctx.zero())
            })
            .collect();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[(i, k)].cmp_abs(&lu[(p, k)]) == Ordering::Greater {
                    p = i;
                }
            }
            let threshold = &eps * &col_scale[k];
            if lu[(p, k)].is_zero() || lu[(p, k)].abs() < threshold {
                return Err(Error::SingularMatrix {
                    op: "lu_solve",
                    column: k,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot_row: Vec<BigReal> = lu.row(k)[k..].to_vec();
            let pivot = pivot_row[0].clone();
            let eliminate = |row: &mut [BigReal]| {
                let l = BigReal(Float::with_val(ctx.bits(), &row[k].0 / &pivot.0));
                for (dst, src) in row[k + 1..].iter_mut().zip(&pivot_row[1..]) {
                    dst.0 -= &l.0 * &src.0;
                }
                row[k] = l;
            };
            let tail = &mut lu.data[(k + 1) * n..];
            if n - k > PARALLEL_ROWS {
                tail.par_chunks_mut(n).for_each(eliminate);
            } else {
                tail.chunks_mut(n).for_each(eliminate);
            }
        }
        Ok(LuFactorization { lu, perm, ctx })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// Row permutation: row `i` of `P·A` is row `perm[i]` of `A`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn solve(&self, b: &[BigReal]) -> Result<Vector> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::Validation {
                op: "lu_solve",
                detail: format!("rhs has length {}, expected {n}", b.len()),
            });
        }
        let bits = self.ctx.bits();
        let mut y: Vec<Float> = self
            .perm
            .iter()
            .map(|&i| Float::with_val(bits, &b[i].0))
            .collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let (done, rest) = y.split_at_mut(i);
            for (l, yj) in row[..i].iter().zip(done.iter()) {
                rest[0] -= &l.0 * yj;
            }
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let (head, done) = y.split_at_mut(i + 1);
            for (u, xj) in row[i + 1..].iter().zip(done.iter()) {
                head[i] -= &u.0 * xj;
            }
            head[i] /= &row[i].0;
        }
        y.into_iter()
            .map(|v| BigReal(v).ensure_finite("lu_solve"))
            .collect()
    }
}

/// Solves `A·x = b` by LU factorization with partial pivoting.
pub fn lu_solve(a: &Matrix, b: &[BigReal], ctx: PrecisionContext) -> Result<Vector> {
    if a.rows != b.len() {
        return Err(Error::Validation {
            op: "lu_solve",
            detail: format!("matrix has {} rows but rhs has {}", a.rows, b.len()),
        });
    }
    LuFactorization::factor(a, ctx)?.solve(b)
}

/// `‖A·x − b‖∞ / ‖b‖∞`.
pub fn relative_residual(a: &Matrix, x: &[BigReal], b: &[BigReal]) -> BigReal {
    let ax = a.mul_vec(x);
    let r: Vec<BigReal> = ax.iter().zip(b).map(|(u, v)| u - v).collect();
    let num = BigReal::max_abs(&r).expect("non-empty system");
    let den = BigReal::max_abs(b).expect("non-empty system");
    if den.is_zero() {
        num
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    fn ints(c: PrecisionContext, v: &[i64]) -> Vector {
        v.iter().map(|&k| c.int(k)).collect()
    }

    #[test]
    fn identity_system() {
        let c = ctx();
        let x = lu_solve(&Matrix::identity(3, c), &ints(c, &[1, 2, 3]), c).unwrap();
        assert_eq!(x, ints(c, &[1, 2, 3]));
    }

    #[test]
    fn swap_forces_pivoting() {
        let c = ctx();
        let a = Matrix::from_rows(vec![ints(c, &[0, 1]), ints(c, &[1, 0])]).unwrap();
        let x = lu_solve(&a, &ints(c, &[5, 7]), c).unwrap();
        assert_eq!(x, ints(c, &[7, 5]));
    }

    #[test]
    fn ties_pick_lowest_row() {
        let c = ctx();
        let a = Matrix::from_rows(vec![
            ints(c, &[1, 2, 0]),
            ints(c, &[-2, 1, 1]),
            ints(c, &[2, 0, 1]),
        ])
        .unwrap();
        let lu = LuFactorization::factor(&a, c).unwrap();
        assert_eq!(lu.permutation()[0], 1);
    }

    #[test]
    fn singular_matrix_detected() {
        let c = ctx();
        let a = Matrix::from_rows(vec![ints(c, &[1, 2]), ints(c, &[2, 4])]).unwrap();
        let e = lu_solve(&a, &ints(c, &[1, 1]), c).unwrap_err();
        assert!(matches!(e, Error::SingularMatrix { column: 1, .. }));
    }

    #[test]
    fn dimension_mismatch() {
        let c = ctx();
        let e = lu_solve(&Matrix::identity(2, c), &ints(c, &[1, 2, 3]), c).unwrap_err();
        assert!(matches!(e, Error::Validation { .. }));
        let rect = Matrix::zeros(2, 3, c);
        assert!(LuFactorization::factor(&rect, c).is_err());
    }
}
