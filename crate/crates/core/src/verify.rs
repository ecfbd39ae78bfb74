//! Certification of a candidate `P` against `PAᵢ + AᵢᵀP + Q ⪯ 0`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FiniteFamily, IntervalFamily};
use crate::functionals::lyapunov_matrix;
use crate::symcone::{sym_eigenvalues, SymmetricMatrix};

/// Families at least this large are checked in parallel.
const PARALLEL_THRESHOLD: usize = 256;

/// `1e-9 · (1 + ‖P‖)`.
pub fn default_cert_tol(p: &SymmetricMatrix) -> f64 {
    1e-9 * (1.0 + p.frobenius_norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// 0-based constraint index (vertex number for interval families).
    pub constraint: usize,
    /// `λmax(PA + AᵀP + Q)`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub p: SymmetricMatrix,
    pub residuals: Vec<Residual>,
    pub worst_residual: f64,
    pub lambda_min_p: f64,
    pub cert_tol: f64,
    pub feasible: bool,
    /// Every residual is within tolerance yet `λmin(P) ≤ 0`. Any `P`
    /// satisfying one of the inequalities is positive definite, so this can
    /// only come from rounding.
    pub anomaly: bool,
}

impl Certificate {
    fn from_residuals(p: &SymmetricMatrix, residuals: Vec<Residual>, cert_tol: f64) -> Result<Self> {
        let worst_residual = residuals.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
        let lambda_min_p = p.lambda_min()?;
        let residuals_ok = worst_residual <= cert_tol;
        Ok(Self {
            p: p.clone(),
            residuals,
            worst_residual,
            lambda_min_p,
            cert_tol,
            feasible: residuals_ok && lambda_min_p > 0.0,
            anomaly: residuals_ok && lambda_min_p <= 0.0,
        })
    }
}

/// `λmax(PA + AᵀP + Q)`; non-positive means the constraint holds.
pub fn residual(p: &SymmetricMatrix, a: &DMatrix<f64>, q: &SymmetricMatrix) -> Result<f64> {
    let r = lyapunov_matrix(p, a, q)?;
    Ok(sym_eigenvalues(&r)?[0])
}

fn check_dims(p: &SymmetricMatrix, q: &SymmetricMatrix, n: usize) -> Result<()> {
    for d in [p.dim(), q.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, got: d });
        }
    }
    Ok(())
}

fn residuals_over<F>(count: usize, p: &SymmetricMatrix, q: &SymmetricMatrix, member: F) -> Result<Vec<Residual>>
where
    F: Fn(usize) -> DMatrix<f64> + Sync,
{
    let eval = |i: usize| residual(p, &member(i), q).map(|value| Residual { constraint: i, value });
    if count >= PARALLEL_THRESHOLD {
        (0..count).into_par_iter().map(eval).collect()
    } else {
        (0..count).map(eval).collect()
    }
}

pub fn verify_finite(
    p: &SymmetricMatrix,
    family: &FiniteFamily,
    q: &SymmetricMatrix,
    cert_tol: f64,
) -> Result<Certificate> {
    check_dims(p, q, family.dim())?;
    let residuals = residuals_over(family.len(), p, q, |i| family.get(i).clone())?;
    Certificate::from_residuals(p, residuals, cert_tol)
}

/// Checks every vertex of the box. The constraint is affine in `A` and its
/// largest eigenvalue is convex, so feasibility at all vertices covers the box.
pub fn verify_interval_via_vertices(
    p: &SymmetricMatrix,
    family: &IntervalFamily,
    q: &SymmetricMatrix,
    cert_tol: f64,
) -> Result<Certificate> {
    check_dims(p, q, family.dim())?;
    let count = family.vertex_count()?;
    let residuals = residuals_over(count, p, q, |i| family.vertex(i))?;
    Certificate::from_residuals(p, residuals, cert_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{v_eval, FunctionalChoice};
    use nalgebra::dmatrix;

    fn scalar(v: f64) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(&[vec![v]]).unwrap()
    }

    #[test]
    fn residual_examples() {
        let q = scalar(1.0);
        let a = dmatrix![-0.25];
        assert_eq!(residual(&scalar(2.5), &a, &q).unwrap(), -0.25);
        assert_eq!(residual(&scalar(1.0), &a, &q).unwrap(), 0.5);
        let q2 = SymmetricMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let r = residual(&SymmetricMatrix::zeros(2), &dmatrix![-1.0, 0.0; 0.0, -1.0], &q2).unwrap();
        assert!((r - q2.lambda_max().unwrap()).abs() < 1e-15 && r > 0.0);
    }

    #[test]
    fn residual_matches_max_eigenvalue_functional() {
        let p = SymmetricMatrix::from_rows(&[vec![1.3, 0.2], vec![0.2, 0.7]]).unwrap();
        let a = dmatrix![-1.0, 0.4; -0.3, -2.0];
        let q = SymmetricMatrix::identity(2);
        let lhs = residual(&p, &a, &q).unwrap();
        let rhs = v_eval(&p, &a, &q, FunctionalChoice::MaxEigenvalue).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn verify_finite_examples() {
        let fam = FiniteFamily::new(vec![dmatrix![-0.25]]).unwrap();
        let cert = verify_finite(&scalar(2.5), &fam, &scalar(1.0), 1e-9).unwrap();
        assert!(cert.feasible);
        assert_eq!(cert.worst_residual, -0.25);
        assert_eq!(cert.lambda_min_p, 2.5);

        let i2 = SymmetricMatrix::identity(2);
        let fam = FiniteFamily::new(vec![dmatrix![-1.0, 0.0; 0.0, -1.0]]).unwrap();
        let cert = verify_finite(&i2, &fam, &i2, 1e-9).unwrap();
        assert!(cert.feasible);
        assert!((cert.worst_residual + 1.0).abs() < 1e-15);

        // A + Aᵀ = 0 for the rotation generator, so its residual is λmax(I) = 1
        let fam = FiniteFamily::new(vec![dmatrix![-1.0, 0.0; 0.0, -1.0], dmatrix![0.0, 1.0; -1.0, 0.0]]).unwrap();
        let cert = verify_finite(&i2, &fam, &i2, 1e-9).unwrap();
        assert!(!cert.feasible);
        assert!((cert.residuals[1].value - 1.0).abs() < 1e-15);
        assert_eq!(cert.worst_residual, cert.residuals[1].value);
    }

    #[test]
    fn nonpositive_p_with_small_residuals_is_flagged() {
        // P = 0 with Q tiny: residual = λmax(Q) stays within a loose tolerance
        let fam = FiniteFamily::new(vec![dmatrix![-1.0]]).unwrap();
        let cert = verify_finite(&scalar(0.0), &fam, &scalar(1e-12), 1e-9).unwrap();
        assert!(!cert.feasible);
        assert!(cert.anomaly);
    }

    #[test]
    fn degenerate_box_matches_single_matrix() {
        let a = dmatrix![-1.0, 3.0; 0.0, -2.0];
        let p = SymmetricMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 3.0]]).unwrap();
        let q = SymmetricMatrix::identity(2);
        let boxed = IntervalFamily::new(a.clone(), a.clone()).unwrap();
        let single = FiniteFamily::new(vec![a]).unwrap();
        assert_eq!(
            verify_interval_via_vertices(&p, &boxed, &q, 1e-9).unwrap(),
            verify_finite(&p, &single, &q, 1e-9).unwrap()
        );
    }

    #[test]
    fn interior_violation_shows_up_at_a_vertex() {
        // dense grid over a 2-free-entry box as the oracle
        let lower = dmatrix![-1.5, -1.0; 0.0, -1.0];
        let upper = dmatrix![-0.5, 2.0; 0.0, -1.0];
        let family = IntervalFamily::new(lower, upper).unwrap();
        let q = SymmetricMatrix::identity(2);
        for p in [
            SymmetricMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            SymmetricMatrix::from_rows(&[vec![1.5, 0.3], vec![0.3, 2.0]]).unwrap(),
            SymmetricMatrix::from_rows(&[vec![3.0, 0.5], vec![0.5, 4.0]]).unwrap(),
        ] {
            let mut grid_worst = f64::NEG_INFINITY;
            for s in 0..=40 {
                for t in 0..=40 {
                    let a = dmatrix![-1.5 + s as f64 / 40.0, -1.0 + 3.0 * t as f64 / 40.0; 0.0, -1.0];
                    grid_worst = grid_worst.max(residual(&p, &a, &q).unwrap());
                }
            }
            let cert = verify_interval_via_vertices(&p, &family, &q, 1e-9).unwrap();
            assert_eq!(cert.residuals.len(), 4);
            assert!(cert.worst_residual >= grid_worst - 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let fam = FiniteFamily::new(vec![dmatrix![-1.0]]).unwrap();
        assert!(matches!(
            verify_finite(&SymmetricMatrix::identity(2), &fam, &scalar(1.0), 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
