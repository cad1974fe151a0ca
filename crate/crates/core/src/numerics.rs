//! Dense complex linear algebra kernel.
//!
//! Everything downstream works with small dense matrices (a few hundred rows
//! at most), so the representation is a plain row-major `Vec<Complex64>`.
//! Matrix-closeness predicates use the Frobenius norm throughout; it is
//! basis-independent and cheap at these sizes. Eigen-decompositions of
//! Hermitian matrices (the only factorization needed) are delegated to
//! `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("entry count {got} does not match {rows}x{cols}")]
    BadEntryCount { rows: usize, cols: usize, got: usize },
    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),
    #[error("state norm {norm} deviates from 1 beyond tolerance {tol}")]
    NotNormalized { norm: f64, tol: f64 },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}

/// Numerical tolerances shared across the crate.
///
/// `eq` bounds residuals of algebraic identities; `rank_cut` is the threshold
/// below which singular values are treated as zero when counting Schmidt
/// ranks. The reference states used here have coefficients at least 1/2·1/√2,
/// seven orders of magnitude above the cut.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub eq: f64,
    pub rank_cut: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eq: 1e-9, rank_cut: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(eq: f64, rank_cut: f64) -> Result<Self, NumericsError> {
        if !(eq > 0.0) || !eq.is_finite() {
            return Err(NumericsError::InvalidTolerance(format!("eq = {eq}")));
        }
        if !(rank_cut > 0.0) || !rank_cut.is_finite() {
            return Err(NumericsError::InvalidTolerance(format!("rank_cut = {rank_cut}")));
        }
        if rank_cut < eq {
            return Err(NumericsError::InvalidTolerance(format!(
                "rank_cut {rank_cut} < eq {eq}"
            )));
        }
        Ok(Tolerance { eq, rank_cut })
    }

    /// Tolerance with the given identity threshold; the rank cut is raised to
    /// match when the threshold is looser than the default cut.
    pub fn from_eq(eq: f64) -> Result<Self, NumericsError> {
        let default_cut = Tolerance::default().rank_cut;
        Tolerance::new(eq, default_cut.max(eq))
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self, NumericsError> {
        if entries.len() != rows * cols {
            return Err(NumericsError::BadEntryCount { rows, cols, got: entries.len() });
        }
        for (i, e) in entries.iter().enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(NumericsError::NonFinite(i));
            }
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, entries: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, entries }
    }

    /// Real matrix from integer-ish rows; handy in tests and constructors.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
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

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.re == 0.0 && e.im == 0.0)
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.entries[i * self.cols + k];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.entries[i * rhs.cols + j] += aik * rhs.entries[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        let entries = self.entries.iter().map(|a| a * s).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i))
    }

    pub fn conj(&self) -> ComplexMatrix {
        let entries = self.entries.iter().map(|a| a.conj()).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.at(i, i)).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_part(&self) -> ComplexMatrix {
        assert!(self.is_square());
        self.add(&self.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// Applies the matrix to a vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self.entries[i * self.cols + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    fn from_na(m: &DMatrix<C64>) -> ComplexMatrix {
        ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// Kronecker product; block (i,j) of the result is `a[i,j] * b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a.at(i, j);
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out.set(i * br + k, j * bc + l, aij * b.at(k, l));
                }
            }
        }
    }
    out
}

/// Pauli σ_X.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
}

/// Pauli σ_Y.
pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => C64::new(0.0, 0.0),
    })
}

/// Pauli σ_Z.
pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]])
}

/// A unit vector in a bipartite space C^dimA ⊗ C^dimB, indexed (i,j) ↦ i·dimB+j.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<C64>,
}

impl BipartiteState {
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        amplitudes: Vec<C64>,
        tol: Tolerance,
    ) -> Result<Self, NumericsError> {
        if amplitudes.len() != dim_a * dim_b {
            return Err(NumericsError::BadEntryCount {
                rows: dim_a,
                cols: dim_b,
                got: amplitudes.len(),
            });
        }
        for (i, e) in amplitudes.iter().enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(NumericsError::NonFinite(i));
            }
        }
        let norm = amplitudes.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol.eq {
            return Err(NumericsError::NotNormalized { norm, tol: tol.eq });
        }
        Ok(BipartiteState { dim_a, dim_b, amplitudes })
    }

    /// The maximally entangled state (1/√d)·Σ eᵢ⊗eᵢ.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); d * d];
        let c = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            amplitudes[i * d + i] = C64::new(c, 0.0);
        }
        BipartiteState { dim_a: d, dim_b: d, amplitudes }
    }

    /// Product state a⊗b from (not necessarily normalized) local vectors.
    pub fn product(a: &[C64], b: &[C64]) -> Result<Self, NumericsError> {
        let na = a.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        let nb = b.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return Err(NumericsError::NotNormalized { norm: 0.0, tol: 0.0 });
        }
        let mut amplitudes = Vec::with_capacity(a.len() * b.len());
        for x in a {
            for y in b {
                amplitudes.push(x * y / (na * nb));
            }
        }
        BipartiteState::new(a.len(), b.len(), amplitudes, Tolerance::default())
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize, j: usize) -> C64 {
        self.amplitudes[i * self.dim_b + j]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Amplitudes reshaped as a dimA × dimB matrix.
    pub fn amplitude_matrix(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.dim_a,
            cols: self.dim_b,
            entries: self.amplitudes.clone(),
        }
    }

    pub fn from_matrix(m: &ComplexMatrix, tol: Tolerance) -> Result<Self, NumericsError> {
        BipartiteState::new(m.rows(), m.cols(), m.entries().to_vec(), tol)
    }
}

/// Schmidt decomposition Σ λᵢ·aᵢ⊗bᵢ with strictly positive coefficients in
/// descending order and orthonormal left/right families.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    coefficients: Vec<f64>,
    left: Vec<Vec<C64>>,
    right: Vec<Vec<C64>>,
    dim_a: usize,
    dim_b: usize,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn left_vectors(&self) -> &[Vec<C64>] {
        &self.left
    }

    pub fn right_vectors(&self) -> &[Vec<C64>] {
        &self.right
    }

    /// Left isometry U_A = Σ ξᵢ·eᵢ* (dimA × rank, columns are the left vectors).
    pub fn left_isometry(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim_a, self.rank(), |i, k| self.left[k][i])
    }

    /// Right isometry U_B = Σ ηᵢ·eᵢ* (dimB × rank).
    pub fn right_isometry(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim_b, self.rank(), |i, k| self.right[k][i])
    }

    /// Rebuilds the amplitude vector Σ λᵢ aᵢ⊗bᵢ.
    pub fn reconstruct(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim_a * self.dim_b];
        for (k, lam) in self.coefficients.iter().enumerate() {
            for i in 0..self.dim_a {
                for j in 0..self.dim_b {
                    v[i * self.dim_b + j] += lam * self.left[k][i] * self.right[k][j];
                }
            }
        }
        v
    }
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues descending, paired
/// eigenvector columns. The input is symmetrized first to shed accumulated
/// asymmetry; each eigenvector's largest component is phased real-positive so
/// the output is reproducible.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n == 0 {
        return Ok((vec![], ComplexMatrix::zeros(0, 0)));
    }
    let herm = m.hermitian_part().to_na();
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (new_col, &old_col) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(old_col);
        // phase fix: largest-magnitude component becomes real and positive
        let mut arg = 0usize;
        let mut best = -1.0f64;
        for i in 0..n {
            let a = col[i].norm_sqr();
            if a > best + 1e-15 {
                best = a;
                arg = i;
            }
        }
        let pivot = col[arg];
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            vecs[(i, new_col)] = col[i] * phase;
        }
    }
    Ok((vals, ComplexMatrix::from_na(&vecs)))
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64, NumericsError> {
    let (vals, _) = hermitian_eigen(m)?;
    Ok(vals.last().copied().unwrap_or(0.0))
}

/// Orthonormal basis of the range of a (near-)projection, as columns of a
/// dim × rank isometry. Eigenvectors with eigenvalue above 1/2 are kept.
pub fn projection_range_basis(p: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    let (vals, vecs) = hermitian_eigen(p)?;
    let rank = vals.iter().filter(|&&v| v > 0.5).count();
    Ok(ComplexMatrix::from_fn(p.rows(), rank, |i, k| vecs.at(i, k)))
}

/// Schmidt decomposition of a normalized bipartite state.
///
/// Computed from the Hermitian eigendecomposition of M·M† where M is the
/// amplitude matrix; right vectors are recovered as Mᵀ·āᵢ/λᵢ. Singular values
/// at or below `tol.rank_cut` are discarded from the rank.
pub fn schmidt(psi: &BipartiteState, tol: Tolerance) -> Result<SchmidtDecomposition, NumericsError> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > tol.eq {
        return Err(NumericsError::NotNormalized { norm, tol: tol.eq });
    }
    let m = psi.amplitude_matrix();
    let gram = m.mul(&m.adjoint());
    let (vals, vecs) = hermitian_eigen(&gram)?;
    let mt = m.transpose();
    let mut coefficients = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        let lam = v.max(0.0).sqrt();
        if lam <= tol.rank_cut {
            break;
        }
        let a: Vec<C64> = (0..psi.dim_a()).map(|i| vecs.at(i, k)).collect();
        let abar: Vec<C64> = a.iter().map(|e| e.conj()).collect();
        let b: Vec<C64> = mt.apply(&abar).iter().map(|e| e / lam).collect();
        coefficients.push(lam);
        left.push(a);
        right.push(b);
    }
    Ok(SchmidtDecomposition {
        coefficients,
        left,
        right,
        dim_a: psi.dim_a(),
        dim_b: psi.dim_b(),
    })
}

/// Whether `m` is a projection: Hermitian and idempotent within `tol.eq`
/// in Frobenius norm.
pub fn is_projection(m: &ComplexMatrix, tol: Tolerance) -> Result<bool, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    let herm = m.sub(&m.adjoint()).frob_norm();
    let idem = m.mul(m).sub(m).frob_norm();
    Ok(herm <= tol.eq && idem <= tol.eq)
}

/// Whether the family is a POVM: every element positive semidefinite
/// (smallest eigenvalue of the Hermitian part ≥ −tol.eq) and the sum equal to
/// the identity within tol.eq.
pub fn is_povm(family: &[ComplexMatrix], tol: Tolerance) -> Result<bool, NumericsError> {
    let first = match family.first() {
        Some(f) => f,
        None => return Ok(false),
    };
    if !first.is_square() {
        return Err(NumericsError::NonSquare { rows: first.rows(), cols: first.cols() });
    }
    let d = first.rows();
    for m in family {
        if m.rows() != d || m.cols() != d {
            return Err(NumericsError::DimensionMismatch(format!(
                "POVM element is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                d,
                d
            )));
        }
    }
    let mut sum = ComplexMatrix::zeros(d, d);
    for m in family {
        if min_eigenvalue(m)? < -tol.eq {
            return Ok(false);
        }
        sum = sum.add(m);
    }
    Ok(sum.sub(&ComplexMatrix::identity(d)).frob_norm() <= tol.eq)
}
