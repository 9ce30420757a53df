//! Exact linear algebra over [`CycNumber`]: sparse row reduction and kernels,
//! plus small dense matrices for representation images.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};

type SparseRow = BTreeMap<usize, CycNumber>;

/// Sparse matrix; zero entries are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<SparseRow>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: vec![BTreeMap::new(); rows] }
    }

    pub fn from_dense(rows: &[Vec<CycNumber>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged dense matrix");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let dense: Vec<Vec<CycNumber>> =
            rows.iter().map(|r| r.iter().map(|&x| CycNumber::from_int(x)).collect()).collect();
        Self::from_dense(&dense)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, row: usize, col: usize, value: CycNumber) {
        assert!(row < self.rows && col < self.cols, "index ({row}, {col}) out of bounds");
        if value.is_zero() {
            self.data[row].remove(&col);
        } else {
            self.data[row].insert(col, value);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> CycNumber {
        self.data[row].get(&col).cloned().unwrap_or_else(CycNumber::zero)
    }

    /// Appends a row given as `(col, value)` pairs; zero values are dropped.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, CycNumber)>) {
        let mut row = BTreeMap::new();
        for (c, v) in entries {
            assert!(c < self.cols);
            if !v.is_zero() {
                row.insert(c, v);
            }
        }
        self.data.push(row);
        self.rows += 1;
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &CycNumber)> {
        self.data.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |(&j, v)| (i, j, v)))
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(BTreeMap::len).sum()
    }

    pub fn mul_vec(&self, v: &[CycNumber]) -> Vec<CycNumber> {
        assert_eq!(v.len(), self.cols);
        self.data
            .iter()
            .map(|row| row.iter().fold(CycNumber::zero(), |acc, (&j, x)| &acc + &(x * &v[j])))
            .collect()
    }

    /// Reduced row echelon form. Pivot columns are taken left to right, and
    /// within a column the first remaining row with a nonzero entry pivots.
    pub fn rref(&self) -> Echelon {
        let mut pending: Vec<SparseRow> = self.data.iter().filter(|r| !r.is_empty()).cloned().collect();
        let mut basis: Vec<(usize, SparseRow)> = Vec::new();
        // Forward elimination: reduce every pending row against the pivot
        // rows found so far, one column at a time.
        loop {
            let Some(col) = pending.iter().filter_map(|r| r.keys().next().copied()).min() else {
                break;
            };
            let idx = pending.iter().position(|r| r.keys().next() == Some(&col)).unwrap();
            let mut prow = pending.remove(idx);
            let inv = prow[&col].inverse().expect("pivot is nonzero");
            for v in prow.values_mut() {
                *v = &*v * &inv;
            }
            pending = pending
                .into_par_iter()
                .map(|mut r| {
                    if let Some(f) = r.get(&col).cloned() {
                        axpy(&mut r, &prow, &f);
                    }
                    r
                })
                .filter(|r| !r.is_empty())
                .collect();
            basis.push((col, prow));
        }
        // Back substitution to reach the reduced form.
        for i in (0..basis.len()).rev() {
            let (col, prow) = basis[i].clone();
            basis[..i].par_iter_mut().for_each(|(_, r)| {
                if let Some(f) = r.get(&col).cloned() {
                    axpy(r, &prow, &f);
                }
            });
        }
        Echelon { cols: self.cols, rows: basis }
    }

    pub fn rank(&self) -> usize {
        self.rref().rows.len()
    }
}

/// `row -= f * pivot`.
fn axpy(row: &mut SparseRow, pivot: &SparseRow, f: &CycNumber) {
    for (&j, p) in pivot {
        let t = p * f;
        let e = row.entry(j).or_insert_with(CycNumber::zero);
        *e = &*e - &t;
        if e.is_zero() {
            row.remove(&j);
        }
    }
}

/// Reduced row echelon form: `(pivot column, row)` pairs sorted by pivot.
#[derive(Clone, Debug)]
pub struct Echelon {
    cols: usize,
    rows: Vec<(usize, SparseRow)>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|(c, _)| *c).collect()
    }

    pub fn dense_rows(&self) -> Vec<Vec<CycNumber>> {
        self.rows
            .iter()
            .map(|(_, r)| {
                let mut v = vec![CycNumber::zero(); self.cols];
                for (&j, x) in r {
                    v[j] = x.clone();
                }
                v
            })
            .collect()
    }

    /// Right kernel basis: one vector per free column, with a 1 in that column
    /// and zeros in the other free columns.
    pub fn kernel(&self) -> Vec<Vec<CycNumber>> {
        let pivots = self.pivots();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![CycNumber::zero(); self.cols];
                v[free] = CycNumber::one();
                for (p, row) in &self.rows {
                    if let Some(x) = row.get(&free) {
                        v[*p] = -x;
                    }
                }
                v
            })
            .collect()
    }

    /// Reduces `v` against the row space; returns the remainder.
    pub fn reduce(&self, v: &[CycNumber]) -> Vec<CycNumber> {
        let mut r: SparseRow =
            v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, x)| (j, x.clone())).collect();
        for (p, row) in &self.rows {
            if let Some(f) = r.get(p).cloned() {
                axpy(&mut r, row, &f);
            }
        }
        let mut out = vec![CycNumber::zero(); self.cols];
        for (j, x) in r {
            out[j] = x;
        }
        out
    }

    pub fn contains(&self, v: &[CycNumber]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }
}

/// Basis of the right kernel of `m`, in reduced echelon normal form.
pub fn kernel_basis(m: &SparseMatrix) -> Vec<Vec<CycNumber>> {
    m.rref().kernel()
}

/// Dense square-or-rectangular matrix, used for representation images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CycMatrix(pub Vec<Vec<CycNumber>>);

impl CycMatrix {
    pub fn identity(n: usize) -> Self {
        Self::scalar(n, &CycNumber::one())
    }

    pub fn scalar(n: usize, s: &CycNumber) -> Self {
        CycMatrix(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { s.clone() } else { CycNumber::zero() }).collect())
                .collect(),
        )
    }

    pub fn zeros(r: usize, c: usize) -> Self {
        CycMatrix(vec![vec![CycNumber::zero(); c]; r])
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        CycMatrix(rows.iter().map(|r| r.iter().map(|&x| CycNumber::from_int(x)).collect()).collect())
    }

    pub fn nrows(&self) -> usize {
        self.0.len()
    }

    pub fn ncols(&self) -> usize {
        self.0.first().map_or(0, Vec::len)
    }

    pub fn is_square(&self) -> bool {
        self.0.iter().all(|r| r.len() == self.nrows())
    }

    pub fn mul(&self, other: &CycMatrix) -> CycMatrix {
        assert_eq!(self.ncols(), other.nrows(), "matrix shapes do not chain");
        let n = other.ncols();
        CycMatrix(
            self.0
                .iter()
                .map(|row| {
                    (0..n)
                        .map(|j| {
                            row.iter().zip(&other.0).fold(CycNumber::zero(), |acc, (a, brow)| {
                                if a.is_zero() || brow[j].is_zero() {
                                    acc
                                } else {
                                    &acc + &(a * &brow[j])
                                }
                            })
                        })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn apply(&self, v: &[CycNumber]) -> Vec<CycNumber> {
        assert_eq!(self.ncols(), v.len());
        self.0
            .iter()
            .map(|row| row.iter().zip(v).fold(CycNumber::zero(), |acc, (a, x)| &acc + &(a * x)))
            .collect()
    }

    pub fn scale(&self, s: &CycNumber) -> CycMatrix {
        CycMatrix(self.0.iter().map(|r| r.iter().map(|x| x * s).collect()).collect())
    }

    pub fn sub(&self, other: &CycMatrix) -> CycMatrix {
        CycMatrix(
            self.0.iter().zip(&other.0).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect(),
        )
    }

    pub fn transpose(&self) -> CycMatrix {
        let (r, c) = (self.nrows(), self.ncols());
        CycMatrix((0..c).map(|j| (0..r).map(|i| self.0[i][j].clone()).collect()).collect())
    }

    pub fn conj_transpose(&self) -> CycMatrix {
        let t = self.transpose();
        CycMatrix(t.0.iter().map(|r| r.iter().map(CycNumber::conj).collect()).collect())
    }

    pub fn kron(&self, other: &CycMatrix) -> CycMatrix {
        let (r1, c1, r2, c2) = (self.nrows(), self.ncols(), other.nrows(), other.ncols());
        let mut out = Self::zeros(r1 * r2, c1 * c2);
        for i in 0..r1 {
            for j in 0..c1 {
                let a = &self.0[i][j];
                if a.is_zero() {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        out.0[i * r2 + k][j * c2 + l] = a * &other.0[k][l];
                    }
                }
            }
        }
        out
    }

    pub fn block_diag(&self, other: &CycMatrix) -> CycMatrix {
        let (n1, n2) = (self.nrows(), other.nrows());
        let mut out = Self::zeros(n1 + n2, n1 + n2);
        for i in 0..n1 {
            out.0[i][..n1].clone_from_slice(&self.0[i]);
        }
        for i in 0..n2 {
            out.0[n1 + i][n1..].clone_from_slice(&other.0[i]);
        }
        out
    }

    pub fn pow(&self, e: u32) -> CycMatrix {
        (0..e).fold(Self::identity(self.nrows()), |acc, _| acc.mul(self))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.nrows())
    }

    /// `Some(s)` if the matrix is `s * I`.
    pub fn as_scalar(&self) -> Option<CycNumber> {
        let s = self.0.first()?.first()?.clone();
        (*self == Self::scalar(self.nrows(), &s)).then_some(s)
    }

    pub fn inverse(&self) -> Result<CycMatrix> {
        if !self.is_square() {
            return Err(Error::IncompatibleShapes("inverse of non-square matrix".into()));
        }
        let n = self.nrows();
        let mut a: Vec<Vec<CycNumber>> = self
            .0
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.clone();
                row.extend((0..n).map(|j| if i == j { CycNumber::one() } else { CycNumber::zero() }));
                row
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&i| !a[i][c].is_zero()).ok_or(Error::DivisionByZero)?;
            a.swap(c, p);
            let inv = a[c][c].inverse()?;
            for x in a[c].iter_mut() {
                *x = &*x * &inv;
            }
            for i in 0..n {
                if i != c && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    for j in 0..2 * n {
                        let t = &a[c][j] * &f;
                        a[i][j] = &a[i][j] - &t;
                    }
                }
            }
        }
        Ok(CycMatrix(a.into_iter().map(|r| r[n..].to_vec()).collect()))
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        SparseMatrix::from_dense(&self.0)
    }
}
