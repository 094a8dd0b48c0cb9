//! Dense complex Hermitian matrices and the spectral helpers the rest of the
//! crate leans on.
//!
//! Matrix dimensions here are transmit-antenna counts, so everything is
//! stored dense (row-major) and decompositions go through `nalgebra` without
//! any blocking or sparsity tricks. All routines are deterministic: the same
//! input bits give the same output bits on a given build.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

/// Relative eigenvalue cutoff used when classifying numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Allowed relative Hermitian-symmetry deviation in validating constructors.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix entries deviate from Hermitian symmetry by {max_deviation:e} (relative)")]
    NotHermitian { max_deviation: f64 },
    #[error("matrix or vector contains a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("entry buffer of length {len} does not match dimension {dim}")]
    BadLength { dim: usize, len: usize },
    #[error("operation undefined for an all-zero matrix")]
    ZeroMatrix,
    #[error("matrices and vectors must have dimension at least one")]
    Empty,
}

/// Hermitian matrix with exactly conjugate-symmetric storage.
///
/// Constructors either validate or project, so `a[(i, j)] == conj(a[(j, i)])`
/// and real diagonals hold exactly for every value of this type.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    /// Row-major, `dim * dim` entries.
    entries: Vec<C64>,
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are real and sorted descending; `vectors[k]` is the unit
/// eigenvector paired with `values[k]`. Equal eigenvalues keep the order the
/// underlying decomposition produced them in, which is deterministic.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl HermitianMatrix {
    /// Validates Hermitian symmetry (within `1e-12` relative) and finiteness,
    /// then projects so the invariant holds exactly.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::BadLength { dim, len: entries.len() });
        }
        if !entries.iter().all(|e| e.re.is_finite() && e.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let scale = entries
            .iter()
            .map(|e| e.norm_sqr())
            .fold(0.0f64, f64::max)
            .sqrt()
            .max(1.0);
        let mut max_dev = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i];
                max_dev = max_dev.max((a - b.conj()).norm());
            }
        }
        if max_dev > HERMITIAN_TOL * scale {
            return Err(LinalgError::NotHermitian { max_deviation: max_dev / scale });
        }
        Ok(Self::project(dim, entries))
    }

    /// Builds from arbitrary entries by projecting onto the Hermitian part
    /// `(A + A^H) / 2`. Used where small asymmetric rounding is expected.
    pub fn projected(dim: usize, entries: Vec<C64>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::BadLength { dim, len: entries.len() });
        }
        if !entries.iter().all(|e| e.re.is_finite() && e.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self::project(dim, entries))
    }

    fn project(dim: usize, mut entries: Vec<C64>) -> Self {
        for i in 0..dim {
            entries[i * dim + i] = C64::new(entries[i * dim + i].re, 0.0);
            for j in (i + 1)..dim {
                let avg = (entries[i * dim + j] + entries[j * dim + i].conj()) * 0.5;
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg.conj();
            }
        }
        Self { dim, entries }
    }

    /// Builds from an entry function; `f` is consulted for `j >= i` only and
    /// mirrored, so the result is Hermitian by construction.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "dimension must be at least one");
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(f(i, i).re, 0.0);
            for j in (i + 1)..dim {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v.conj();
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least one");
        Self { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// `e_k e_k^H`: all zeros except a one at `(k, k)`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        let mut m = Self::zeros(dim);
        m.entries[k * dim + k] = C64::new(1.0, 0.0);
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        assert!(!diag.is_empty(), "dimension must be at least one");
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (k, &d) in diag.iter().enumerate() {
            m.entries[k * dim + k] = C64::new(d, 0.0);
        }
        m
    }

    /// Rank-one outer product `v v^H`.
    pub fn outer(v: &[C64]) -> Result<Self, LinalgError> {
        if v.is_empty() {
            return Err(LinalgError::Empty);
        }
        if !v.iter().all(|e| e.re.is_finite() && e.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let dim = v.len();
        Ok(Self::from_fn(dim, |i, j| v[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    /// Trace; real because diagonals are real by invariant.
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|e| e * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        let mut out = self.clone();
        out.add_scaled_assign(other, 1.0)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        let mut out = self.clone();
        out.add_scaled_assign(other, -1.0)?;
        Ok(out)
    }

    /// `self += c * other`.
    pub fn add_scaled_assign(&mut self, other: &Self, c: f64) -> Result<(), LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimMismatch { left: self.dim, right: other.dim });
        }
        for (a, b) in self.entries.iter_mut().zip(other.entries.iter()) {
            *a += b * c;
        }
        Ok(())
    }

    /// Real quadratic form `v^H A v`; the imaginary residue cancels by
    /// symmetry and is discarded.
    pub fn quad_form(&self, v: &[C64]) -> Result<f64, LinalgError> {
        if v.len() != self.dim {
            return Err(LinalgError::DimMismatch { left: self.dim, right: v.len() });
        }
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..self.dim {
                row += self.get(i, j) * v[j];
            }
            acc += v[i].conj() * row;
        }
        Ok(acc.re)
    }

    fn to_na(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Eigenvalues only, sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let ev = self.to_na().symmetric_eigenvalues();
        let mut vals: Vec<f64> = ev.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).expect("Hermitian eigenvalues are finite"));
        vals
    }

    /// Full eigendecomposition, eigenvalues descending, unit eigenvectors.
    ///
    /// Reconstruction `sum_k values[k] * v_k v_k^H` matches the input to
    /// within `1e-9 * ||A||_F`.
    pub fn herm_eig(&self) -> EigDecomposition {
        let eig = self.to_na().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .expect("Hermitian eigenvalues are finite")
        });
        let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors: Vec<Vec<C64>> = order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
            .collect();
        EigDecomposition { values, vectors }
    }

    /// `(lambda_1, u_1)`: largest eigenvalue and its unit eigenvector, with
    /// the phase fixed so the first non-negligible entry of `u_1` is real and
    /// non-negative. Errors on the all-zero matrix, where no direction is
    /// distinguished.
    pub fn dominant_component(&self) -> Result<(f64, Vec<C64>), LinalgError> {
        if self.max_abs() == 0.0 {
            return Err(LinalgError::ZeroMatrix);
        }
        let eig = self.herm_eig();
        let mut u = eig.vectors[0].clone();
        let peak = u.iter().map(|e| e.norm()).fold(0.0, f64::max);
        let pivot = u
            .iter()
            .find(|e| e.norm() > 1e-12 * peak)
            .copied()
            .expect("unit vector has a non-negligible entry");
        let phase = pivot.conj() / pivot.norm();
        for e in u.iter_mut() {
            *e *= phase;
        }
        Ok((eig.values[0], u))
    }

    /// Count of eigenvalues with `|lambda| > rel_tol * max |lambda|`.
    /// Zero matrices have rank zero.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let vals = self.eigenvalues();
        let peak = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0;
        }
        vals.iter().filter(|v| v.abs() > rel_tol * peak).count()
    }

    /// True iff the smallest eigenvalue is at least `-tol * max(1, max |lambda|)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let vals = self.eigenvalues();
        let peak = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let min = vals.last().copied().unwrap_or(0.0);
        min >= -tol * peak.max(1.0)
    }

    /// Smallest eigenvalue.
    pub fn min_eig(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }
}

/// `Tr(A B)`; real for Hermitian arguments (the imaginary residue is
/// discarded after a debug check).
pub fn frob_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64, LinalgError> {
    if a.dim != b.dim {
        return Err(LinalgError::DimMismatch { left: a.dim, right: b.dim });
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.dim {
        for j in 0..a.dim {
            acc += a.get(i, j) * b.get(j, i);
        }
    }
    debug_assert!(
        acc.im.abs() <= 1e-9 * (1.0 + a.frobenius_norm() * b.frobenius_norm()),
        "imaginary residue {} too large for Hermitian trace product",
        acc.im
    );
    Ok(acc.re)
}
