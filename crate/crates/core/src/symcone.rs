//! Symmetric matrices with the Frobenius geometry, and projection onto the
//! cone of positive semidefinite matrices.
//!
//! Every decision variable of the solver (P, Q, the constraint matrix R and
//! the update ΔP) lives in this space. Symmetry is enforced once, at
//! construction, by averaging a matrix with its transpose; the arithmetic
//! operators below are entrywise and therefore preserve it exactly.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on QR sweeps handed to the symmetric eigen-solver.
const EIGEN_MAX_ITERS: usize = 10_000;

/// Reconstruction tolerance of an eigendecomposition of an `n`×`n` matrix.
pub fn eig_tolerance(n: usize) -> f64 {
    1e-10 * n.max(1) as f64
}

/// A real symmetric `n`×`n` matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Builds a symmetric matrix from `m` by replacing it with `(m + mᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::symmetrize(m))
    }

    /// Row-major construction, as used by the JSON formats.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    /// `x xᵀ` for a vector `x`.
    pub fn outer(x: &DVector<f64>) -> Self {
        Self::symmetrize(x * x.transpose())
    }

    // (m + mᵀ)/2 without the finiteness check, for internal results.
    pub(crate) fn symmetrize(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        Self(out)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.0)
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.0[(i, j)] == self.0[(j, i)]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        inner_product(self, other)
    }

    pub fn eigen(&self) -> Result<EigenDecomposition> {
        sym_eigendecompose(self)
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(self.eigen()?.lambda_max())
    }

    pub fn lambda_min(&self) -> Result<f64> {
        Ok(self.eigen()?.lambda_min())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(&self.0 - &other.0))
    }
}

impl Add for &SymmetricMatrix {
    type Output = SymmetricMatrix;

    /// Panics on dimension mismatch; use [`SymmetricMatrix::try_add`] otherwise.
    fn add(self, rhs: Self) -> SymmetricMatrix {
        self.try_add(rhs).expect("symmetric matrix dimensions differ")
    }
}

impl Sub for &SymmetricMatrix {
    type Output = SymmetricMatrix;

    fn sub(self, rhs: Self) -> SymmetricMatrix {
        self.try_sub(rhs).expect("symmetric matrix dimensions differ")
    }
}

impl Mul<f64> for &SymmetricMatrix {
    type Output = SymmetricMatrix;

    fn mul(self, rhs: f64) -> SymmetricMatrix {
        self.scale(rhs)
    }
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymmetricMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Self::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `R = U Λ Uᵀ` with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors, column `i` belonging to `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `λ₁ − λ₂`, or infinity for a 1×1 matrix.
    pub fn top_gap(&self) -> f64 {
        if self.eigenvalues.len() < 2 {
            f64::INFINITY
        } else {
            self.eigenvalues[0] - self.eigenvalues[1]
        }
    }

    pub fn top_eigenvector(&self) -> DVector<f64> {
        self.eigenvectors.column(0).into_owned()
    }

    /// `U diag(g(λ)) Uᵀ`.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            let factor = g(*lambda);
            scaled.column_mut(j).scale_mut(factor);
        }
        SymmetricMatrix::symmetrize(scaled * u.transpose())
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.reconstruct_with(|l| l)
    }
}

pub fn frobenius_norm(r: &SymmetricMatrix) -> f64 {
    r.0.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `⟨R, S⟩ = tr RS`, which for symmetric arguments is `Σ R_ij S_ij`.
pub fn inner_product(r: &SymmetricMatrix, s: &SymmetricMatrix) -> Result<f64> {
    r.check_dim(s)?;
    Ok(r.0.iter().zip(s.0.iter()).map(|(a, b)| a * b).sum())
}

pub fn sym_eigendecompose(r: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = r.dim();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    if r.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let eig = SymmetricEigen::try_new(r.0.clone(), f64::EPSILON, EIGEN_MAX_ITERS).ok_or(Error::EigenNonConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, sorted descending. Cheaper than a full decomposition.
pub fn sym_eigenvalues(r: &SymmetricMatrix) -> Result<DVector<f64>> {
    if r.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut values: Vec<f64> = r.0.symmetric_eigenvalues().iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNonConvergence);
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(DVector::from_vec(values))
}

/// Nearest positive semidefinite matrix in the Frobenius norm: negative
/// eigenvalues are clipped to zero.
pub fn psd_projection(r: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = sym_eigendecompose(r)?;
    Ok(project_from_eigen(r, &eig))
}

/// Projection reusing an already computed decomposition of `r`.
pub(crate) fn project_from_eigen(r: &SymmetricMatrix, eig: &EigenDecomposition) -> SymmetricMatrix {
    if r.dim() == 0 || eig.lambda_min() >= 0.0 {
        return r.clone();
    }
    if eig.lambda_max() <= 0.0 {
        return SymmetricMatrix::zeros(r.dim());
    }
    eig.reconstruct_with(|l| l.max(0.0))
}

/// `R⁻ = R − R⁺`.
pub fn nsd_part(r: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    Ok(r - &psd_projection(r)?)
}

/// Largest singular value, via the largest eigenvalue of `AᵀA`.
pub fn sigma_max(a: &DMatrix<f64>) -> Result<f64> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let gram = SymmetricMatrix::symmetrize(a.transpose() * a);
    Ok(gram.lambda_max()?.max(0.0).sqrt())
}

/// Random symmetric matrix with entries drawn uniformly from `[-1, 1]` and
/// rescaled to Frobenius norm `norm`.
pub fn random_symmetric<R: Rng + ?Sized>(n: usize, norm: f64, rng: &mut R) -> SymmetricMatrix {
    loop {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.random_range(-1.0..=1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let current = m.norm();
        if current > 1e-3 || n == 0 {
            return SymmetricMatrix(m * (norm / current.max(f64::MIN_POSITIVE)));
        }
    }
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::Schema(format!(
            "ragged matrix: row of length {} where {} expected",
            bad.len(),
            ncols
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
