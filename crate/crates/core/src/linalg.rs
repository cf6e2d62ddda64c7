//! Exact linear algebra over the rationals.
//!
//! Structural decisions (ranks, kernels, consistency of linear systems) drive
//! control flow throughout the crate, so they are made with arbitrary
//! precision arithmetic. Elimination is fraction-free: every row is scaled to
//! a primitive integer vector before elimination, rows are combined by
//! cross-multiplication, and row content is divided out after each step.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    /// Builds a matrix from rows. All rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged matrix rows");
            data.extend(row);
        }
        QMatrix {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
                .collect(),
        )
    }

    /// Builds a matrix with the given columns.
    pub fn from_columns(nrows: usize, columns: &[Vec<BigRational>]) -> Self {
        let mut m = Self::zeros(nrows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), nrows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j) + a * b;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in product");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Appends `col` as a new last column.
    pub fn with_column(&self, col: &[BigRational]) -> QMatrix {
        assert_eq!(col.len(), self.rows);
        let mut out = QMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            out.set(i, self.cols, col[i].clone());
        }
        out
    }

    /// Restricts to the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> QMatrix {
        let mut out = QMatrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.set(i, jj, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(rational_to_f64).collect())
            .collect()
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Scales a rational row to a primitive integer row (same span).
fn primitive_row(row: &[BigRational]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut ints: Vec<BigInt> = row
        .iter()
        .map(|q| q.numer() * (&lcm / q.denom()))
        .collect();
    normalize_content(&mut ints);
    ints
}

fn normalize_content(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// Result of fraction-free elimination: an integer echelon form together
/// with the `(row, column)` positions of the pivots.
struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

/// Fraction-free elimination. With `reduce`, entries above pivots are cleared
/// as well (reduced echelon form up to positive row scaling).
fn eliminate(mut rows: Vec<Vec<BigInt>>, ncols: usize, reduce: bool) -> Echelon {
    let nrows = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        // Smallest nonzero magnitude keeps the growth of entries low.
        let pick = (r..nrows)
            .filter(|&i| !rows[i][c].is_zero())
            .min_by(|&a, &b| rows[a][c].magnitude().cmp(rows[b][c].magnitude()));
        let Some(p) = pick else { continue };
        rows.swap(r, p);
        if rows[r][c].is_negative() {
            for v in rows[r].iter_mut() {
                *v = -&*v;
            }
        }
        let (head, tail) = rows.split_at_mut(r);
        let (pivot_row, below) = tail.split_first_mut().expect("pivot row");
        let targets = below.iter_mut().chain(if reduce {
            head.iter_mut().collect::<Vec<_>>()
        } else {
            Vec::new()
        });
        for row in targets {
            if row[c].is_zero() {
                continue;
            }
            let g = row[c].gcd(&pivot_row[c]);
            let mul_row = &pivot_row[c] / &g;
            let mul_piv = &row[c] / &g;
            for (dst, src) in row.iter_mut().zip(pivot_row.iter()) {
                if src.is_zero() {
                    if !dst.is_zero() {
                        *dst *= &mul_row;
                    }
                } else {
                    *dst = &*dst * &mul_row - src * &mul_piv;
                }
            }
            normalize_content(row);
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(pivots.len());
    Echelon { rows, pivots }
}

fn integer_rows(m: &QMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| primitive_row(m.row(i)))
        .filter(|r| r.iter().any(|v| !v.is_zero()))
        .collect()
}

/// Rank over the rationals.
pub fn rank(m: &QMatrix) -> usize {
    eliminate(integer_rows(m), m.cols(), false).pivots.len()
}

/// Basis of the right kernel `{v : m v = 0}`. Each basis vector is a
/// primitive integer vector (denominators cleared, content removed) whose
/// entry at its defining free column is positive.
pub fn kernel(m: &QMatrix) -> Vec<Vec<BigInt>> {
    let ech = eliminate(integer_rows(m), m.cols(), true);
    let ncols = m.cols();
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; ncols];
        for &c in &ech.pivots {
            v[c] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let scale = ech
            .rows
            .iter()
            .zip(&ech.pivots)
            .filter(|(row, _)| !row[free].is_zero())
            .fold(BigInt::one(), |acc, (row, &pc)| acc.lcm(&row[pc]));
        let mut v = vec![BigInt::zero(); ncols];
        v[free] = scale.clone();
        for (row, &pc) in ech.rows.iter().zip(&ech.pivots) {
            if !row[free].is_zero() {
                v[pc] = -(&row[free] * &scale) / &row[pc];
            }
        }
        normalize_content(&mut v);
        basis.push(v);
    }
    basis
}

/// Kernel basis converted back to rationals.
pub fn kernel_rational(m: &QMatrix) -> Vec<Vec<BigRational>> {
    kernel(m)
        .into_iter()
        .map(|v| v.into_iter().map(BigRational::from_integer).collect())
        .collect()
}

/// `A x = b` has a solution iff `rank(A) = rank([A | b])`.
pub fn is_consistent(a: &QMatrix, b: &[BigRational]) -> bool {
    rank(a) == rank(&a.with_column(b))
}

/// Reduced row echelon form with the accumulated row transformation, so that
/// `transform * original = reduced`.
#[derive(Clone, Debug)]
pub struct Rref {
    pub reduced: QMatrix,
    pub pivots: Vec<usize>,
    pub transform: QMatrix,
}

/// Gauss-Jordan over rationals, tracking the transformation matrix.
pub fn rref(m: &QMatrix) -> Rref {
    let nrows = m.rows();
    let ncols = m.cols();
    let mut a = m.clone();
    let mut t = QMatrix::identity(nrows);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        swap_rows(&mut a, r, p);
        swap_rows(&mut t, r, p);
        let inv = a.get(r, c).recip();
        scale_row(&mut a, r, &inv);
        scale_row(&mut t, r, &inv);
        for i in 0..nrows {
            if i == r || a.get(i, c).is_zero() {
                continue;
            }
            let f = a.get(i, c).clone();
            axpy_row(&mut a, i, r, &f);
            axpy_row(&mut t, i, r, &f);
        }
        pivots.push(c);
        r += 1;
    }
    Rref {
        reduced: a,
        pivots,
        transform: t,
    }
}

fn swap_rows(m: &mut QMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols() {
        m.data.swap(a * m.cols + j, b * m.cols + j);
    }
}

fn scale_row(m: &mut QMatrix, i: usize, f: &BigRational) {
    for j in 0..m.cols() {
        let v = m.get(i, j) * f;
        m.set(i, j, v);
    }
}

/// row_i -= f * row_src
fn axpy_row(m: &mut QMatrix, i: usize, src: usize, f: &BigRational) {
    for j in 0..m.cols() {
        let s = m.get(src, j);
        if s.is_zero() {
            continue;
        }
        let v = m.get(i, j) - f * s;
        m.set(i, j, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[Vec<i64>]) -> QMatrix {
        QMatrix::from_i64_rows(rows)
    }

    #[test]
    fn identity_has_full_rank_and_trivial_kernel() {
        let m = QMatrix::identity(3);
        assert_eq!(rank(&m), 3);
        assert!(kernel(&m).is_empty());
    }

    #[test]
    fn histidine_stoichiometric_matrix_has_rank_two() {
        let gamma = q(&[
            vec![-1, 1, -1, 0],
            vec![1, -1, 1, 0],
            vec![0, -1, 1, 1],
            vec![0, 1, -1, -1],
        ]);
        assert_eq!(rank(&gamma), 2);
        let k = kernel(&gamma);
        assert_eq!(k.len(), 2);
        for v in &k {
            let vq: Vec<BigRational> = v.iter().cloned().map(BigRational::from_integer).collect();
            assert!(gamma.mul_vec(&vq).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn kernel_clears_denominators() {
        let m = QMatrix::from_rows(vec![vec![
            BigRational::new(1.into(), 2.into()),
            BigRational::new(1.into(), 3.into()),
        ]]);
        let k = kernel(&m);
        assert_eq!(k, vec![vec![BigInt::from(-2), BigInt::from(3)]]);
    }

    #[test]
    fn consistency_detects_incompatible_rhs() {
        let a = q(&[vec![1, 1], vec![2, 2]]);
        assert!(is_consistent(&a, &[int(1), int(2)]));
        assert!(!is_consistent(&a, &[int(1), int(3)]));
    }

    #[test]
    fn empty_matrices() {
        assert_eq!(rank(&QMatrix::zeros(0, 4)), 0);
        assert_eq!(kernel(&QMatrix::zeros(0, 2)).len(), 2);
        assert_eq!(rank(&QMatrix::zeros(3, 0)), 0);
    }

    #[test]
    fn rref_transform_reproduces_reduced_form() {
        let m = q(&[vec![2, 4, 1], vec![1, 2, 0], vec![3, 6, 1]]);
        let r = rref(&m);
        assert_eq!(r.transform.mul(&m), r.reduced);
        assert_eq!(r.pivots, vec![0, 2]);
    }
}
