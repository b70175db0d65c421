//! Sparse complex matrices and shifted linear solves.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::Stream;

pub type C64 = Complex64;
pub type Mat3 = nalgebra::Matrix3<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative residual accepted from any solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Above this dimension the sparse LU is replaced by the series solver.
pub const DIRECT_MAX_DIM: usize = 20_000;

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Duplicates are summed; exact zeros are kept out of the pattern.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trips: Vec<(usize, usize, C64)>) -> Self {
        trips.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(trips.len());
        let mut values: Vec<C64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trips {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut m = SparseMatrix { nrows, ncols, col_ptr, row_idx, values };
        m.prune();
        m
    }

    fn prune(&mut self) {
        if self.values.iter().all(|v| *v != ZERO) {
            return;
        }
        let mut trips = Vec::with_capacity(self.values.len());
        for (r, c, v) in self.triplets() {
            if v != ZERO {
                trips.push((r, c, v));
            }
        }
        *self = SparseMatrix::from_triplets(self.nrows, self.ncols, trips);
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, ONE)).collect())
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix::from_triplets(nrows, ncols, Vec::new())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(row, value)` pairs of column `c`.
    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.col_ptr[c], self.col_ptr[c + 1]);
        self.row_idx[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.column(c).find(|&(rr, _)| rr == r).map_or(ZERO, |(_, v)| v)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.ncols).flat_map(move |c| self.column(c).map(move |(r, v)| (r, c, v)))
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        y.iter_mut().for_each(|v| *v = ZERO);
        for c in 0..self.ncols {
            let xc = x[c];
            if xc == ZERO {
                continue;
            }
            for (r, v) in self.column(c) {
                y[r] += v * xc;
            }
        }
    }

    /// `A† x`.
    pub fn adjoint_mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.ncols];
        self.adjoint_mul_vec_into(x, &mut y);
        y
    }

    pub fn adjoint_mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.nrows);
        for (c, yc) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (r, v) in self.column(c) {
                acc += v.conj() * x[r];
            }
            *yc = acc;
        }
    }

    pub fn adjoint(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.ncols, self.nrows, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    /// `self − other`.
    pub fn sub(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::contract("shape mismatch in sparse difference"));
        }
        let trips = self.triplets().chain(other.triplets().map(|(r, c, v)| (r, c, -v))).collect();
        Ok(SparseMatrix::from_triplets(self.nrows, self.ncols, trips))
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut trips = Vec::new();
        for c in 0..other.ncols {
            for (k, v) in other.column(c) {
                for (r, w) in self.column(k) {
                    trips.push((r, c, w * v));
                }
            }
        }
        SparseMatrix::from_triplets(self.nrows, other.ncols, trips)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn row_abs_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.nrows];
        for (r, _, v) in self.triplets() {
            s[r] += v.norm();
        }
        s
    }

    pub fn col_abs_sums(&self) -> Vec<f64> {
        (0..self.ncols).map(|c| self.column(c).map(|(_, v)| v.norm()).sum()).collect()
    }

    /// `max |A†A − I|` over all entries.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().mul(self);
        let mut worst: f64 = 0.0;
        for c in 0..g.ncols {
            let mut diag_seen = false;
            for (r, v) in g.column(c) {
                let e = if r == c {
                    diag_seen = true;
                    (v - ONE).norm()
                } else {
                    v.norm()
                };
                worst = worst.max(e);
            }
            if !diag_seen {
                worst = worst.max(1.0);
            }
        }
        if self.nrows != self.ncols {
            worst = worst.max(1.0);
        }
        worst
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn from_dense(m: &Mat<C64>) -> SparseMatrix {
        let mut trips = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)] != ZERO {
                    trips.push((r, c, m[(r, c)]));
                }
            }
        }
        SparseMatrix::from_triplets(m.nrows(), m.ncols(), trips)
    }

    /// `A − z I` in faer's format.
    fn shifted_faer(&self, z: C64) -> Result<SparseColMat<usize, C64>> {
        let mut trips: Vec<Triplet<usize, usize, C64>> =
            self.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        trips.extend((0..self.nrows).map(|i| Triplet::new(i, i, -z)));
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips)
            .map_err(|e| Error::contract(format!("sparse assembly failed: {e:?}")))
    }

    /// Spectral norm by power iteration on `A†A`, with a dense fallback.
    pub fn spectral_norm(&self) -> f64 {
        if self.nnz() == 0 {
            return 0.0;
        }
        match power_norm(self, 1e-10, 10_000) {
            Some(v) => v,
            None if self.nrows.max(self.ncols) <= 2000 => dense_norm(&self.to_dense()),
            None => power_norm(self, 1e-8, 100_000).unwrap_or(f64::NAN),
        }
    }
}

fn power_norm(a: &SparseMatrix, tol: f64, cap: usize) -> Option<f64> {
    let mut st = Stream::new(0x5eed, a.nnz() as u64);
    let mut v: Vec<C64> = (0..a.ncols).map(|_| C64::new(st.normal(), st.normal())).collect();
    normalize(&mut v);
    let mut prev = 0.0;
    let mut av = vec![ZERO; a.nrows];
    let mut w = vec![ZERO; a.ncols];
    for it in 0..cap {
        a.mul_vec_into(&v, &mut av);
        a.adjoint_mul_vec_into(&av, &mut w);
        let lambda: f64 = v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum();
        let nw = norm2(&w);
        if nw == 0.0 {
            return Some(0.0);
        }
        if it > 2 && (lambda - prev).abs() <= tol * lambda.abs() {
            return Some(lambda.max(0.0).sqrt());
        }
        prev = lambda;
        v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / nw);
    }
    None
}

/// Largest singular value of a dense matrix.
pub fn dense_norm(m: &Mat<C64>) -> f64 {
    m.singular_values()
        .map(|s| s.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NAN)
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(x: &mut [C64]) {
    let n = norm2(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Backend for `(W − z) u = b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Sparse LU up to [`DIRECT_MAX_DIM`], series above.
    Auto,
    SparseLu,
    /// Neumann series in `W†` (|z| < 1) or `W/z` (|z| > 1); needs unitary `W`.
    Series,
    DenseLu,
}

enum Factor {
    Sparse(faer::sparse::linalg::solvers::Lu<usize, C64>),
    Dense(faer::linalg::solvers::PartialPivLu<C64>),
    Series,
}

/// A factorization of `W − z` reusable over right-hand sides.
pub struct ShiftedSolver<'a> {
    w: &'a SparseMatrix,
    z: C64,
    factor: Factor,
}

impl<'a> ShiftedSolver<'a> {
    pub fn new(w: &'a SparseMatrix, z: C64, backend: Backend) -> Result<Self> {
        if w.nrows != w.ncols {
            return Err(Error::contract("shifted solve needs a square matrix"));
        }
        let backend = match backend {
            Backend::Auto if w.nrows <= DIRECT_MAX_DIM => Backend::SparseLu,
            Backend::Auto => Backend::Series,
            b => b,
        };
        let factor = match backend {
            Backend::SparseLu => {
                let a = w.shifted_faer(z)?;
                let lu = a.sp_lu().map_err(|e| Error::Numerical {
                    message: format!("sparse LU failed: {e:?}"),
                    residual: f64::INFINITY,
                })?;
                Factor::Sparse(lu)
            }
            Backend::DenseLu => {
                let mut d = w.to_dense();
                for i in 0..w.nrows {
                    d[(i, i)] -= z;
                }
                Factor::Dense(d.partial_piv_lu())
            }
            Backend::Series => {
                if (z.norm() - 1.0).abs() < 1e-3 {
                    return Err(Error::Numerical {
                        message: format!("series solver needs | |z| - 1 | >= 1e-3, got |z| = {}", z.norm()),
                        residual: f64::INFINITY,
                    });
                }
                Factor::Series
            }
            Backend::Auto => unreachable!(),
        };
        Ok(ShiftedSolver { w, z, factor })
    }

    fn raw_solve(&self, b: &[C64]) -> Vec<C64> {
        match &self.factor {
            Factor::Sparse(lu) => {
                let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
                let x = lu.solve(&rhs);
                (0..b.len()).map(|i| x[(i, 0)]).collect()
            }
            Factor::Dense(lu) => {
                let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
                let x = lu.solve(&rhs);
                (0..b.len()).map(|i| x[(i, 0)]).collect()
            }
            Factor::Series => series_solve(self.w, self.z, b),
        }
    }

    /// `(W − z) u − b`.
    pub fn residual(&self, u: &[C64], b: &[C64]) -> Vec<C64> {
        let mut r = self.w.mul_vec(u);
        for i in 0..r.len() {
            r[i] -= self.z * u[i] + b[i];
        }
        r
    }

    fn relative(&self, r: &[C64], u: &[C64], b: &[C64]) -> f64 {
        let scale = (1.0 + self.z.norm()) * norm2(u) + norm2(b);
        if scale == 0.0 {
            0.0
        } else {
            norm2(r) / scale
        }
    }

    /// Solve with residual check and up to three refinement sweeps.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let mut u = self.raw_solve(b);
        let mut r = self.residual(&u, b);
        let mut rel = self.relative(&r, &u, b);
        let mut sweeps = 0;
        while !(rel <= RESIDUAL_TOL * 1e-2) && sweeps < 3 && rel.is_finite() {
            let neg: Vec<C64> = r.iter().map(|v| -v).collect();
            let du = self.raw_solve(&neg);
            let cand: Vec<C64> = u.iter().zip(&du).map(|(a, b)| a + b).collect();
            let rc = self.residual(&cand, b);
            let relc = self.relative(&rc, &cand, b);
            sweeps += 1;
            if relc < rel {
                u = cand;
                r = rc;
                rel = relc;
            } else {
                break;
            }
        }
        if rel <= RESIDUAL_TOL {
            Ok(u)
        } else {
            Err(Error::Numerical { message: "linear solve residual above tolerance".into(), residual: rel })
        }
    }

    pub fn solve_unit(&self, col: usize) -> Result<Vec<C64>> {
        let mut b = vec![ZERO; self.w.nrows];
        b[col] = ONE;
        self.solve(&b)
    }
}

fn series_solve(w: &SparseMatrix, z: C64, b: &[C64]) -> Vec<C64> {
    let n = b.len();
    let mut u = vec![ZERO; n];
    let mut t = vec![ZERO; n];
    let inside = z.norm() < 1.0;
    if inside {
        // (W − z)^{-1} = Σ z^n W†^{n+1}
        w.adjoint_mul_vec_into(b, &mut t);
    } else {
        // (W − z)^{-1} = −(1/z) Σ (W/z)^n
        let s = -z.inv();
        t.iter_mut().zip(b).for_each(|(x, y)| *x = s * y);
    }
    let mut tmp = vec![ZERO; n];
    let factor = if inside { z } else { z.inv() };
    let cap = (60.0 / (factor.norm().ln().abs().max(1e-12))) as usize + 10;
    for _ in 0..cap.min(10_000_000) {
        let tn = norm2(&t);
        u.iter_mut().zip(&t).for_each(|(a, b)| *a += b);
        if tn <= 1e-17 * norm2(&u) {
            break;
        }
        if inside {
            w.adjoint_mul_vec_into(&t, &mut tmp);
        } else {
            w.mul_vec_into(&t, &mut tmp);
        }
        t.iter_mut().zip(&tmp).for_each(|(a, b)| *a = factor * b);
    }
    u
}
