//! Convex functionals on symmetric matrices and the per-constraint functional
//! `v(P, A) = f(PA + AᵀP + Q)` together with its gradient in `P`.
//!
//! Both functionals satisfy `f(R) ≤ 0 ⟺ R ⪯ 0`, so `v(P, A) ≤ 0` exactly when
//! `P` satisfies the Lyapunov inequality for `A`. The gradient follows the
//! chain rule `∂P v = A G + G Aᵀ` with `G = ∂R f(R)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcone::{frobenius_norm, project_from_eigen, sym_eigendecompose, sym_eigenvalues, SymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionalChoice {
    /// `f(R) = ‖R⁺‖²`, gradient `2R⁺`.
    #[serde(rename = "sqnorm")]
    SquaredPositivePart,
    /// `f(R) = λmax(R)`, gradient `xxᵀ` for a unit top eigenvector `x`.
    #[serde(rename = "lambdamax")]
    MaxEigenvalue,
}

impl FunctionalChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SquaredPositivePart => "sqnorm",
            Self::MaxEigenvalue => "lambdamax",
        }
    }
}

impl std::str::FromStr for FunctionalChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqnorm" => Ok(Self::SquaredPositivePart),
            "lambdamax" => Ok(Self::MaxEigenvalue),
            other => Err(Error::InvalidConfig(format!("unknown functional '{other}'"))),
        }
    }
}

/// Value and gradient of `v(·, A)` at one point.
#[derive(Debug, Clone)]
pub struct GradientReport {
    pub value: f64,
    pub gradient: SymmetricMatrix,
    /// Set only under [`FunctionalChoice::MaxEigenvalue`] when the largest
    /// eigenvalue of `R` is not numerically simple; the gradient is then a
    /// subgradient built from an arbitrary top eigenvector.
    pub degenerate_top_eigenvalue: bool,
}

/// Relative gap below which the top eigenvalue counts as repeated.
pub fn degeneracy_gap_threshold(r: &SymmetricMatrix) -> f64 {
    1e-8 * frobenius_norm(r).max(1.0)
}

pub fn f_eval(choice: FunctionalChoice, r: &SymmetricMatrix) -> Result<f64> {
    let eigenvalues = sym_eigenvalues(r)?;
    Ok(match choice {
        FunctionalChoice::SquaredPositivePart => eigenvalues.iter().filter(|l| **l > 0.0).map(|l| l * l).sum(),
        FunctionalChoice::MaxEigenvalue => eigenvalues[0],
    })
}

/// `∂R f`. Under `MaxEigenvalue` a repeated top eigenvalue is an error here;
/// [`v_grad`] reports it as a flag instead.
pub fn f_grad(choice: FunctionalChoice, r: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let (_, grad, degenerate) = value_and_grad(choice, r)?;
    if degenerate {
        let eig = sym_eigendecompose(r)?;
        return Err(Error::DegenerateTopEigenvalue {
            gap: eig.top_gap(),
            threshold: degeneracy_gap_threshold(r),
        });
    }
    Ok(grad)
}

fn value_and_grad(choice: FunctionalChoice, r: &SymmetricMatrix) -> Result<(f64, SymmetricMatrix, bool)> {
    let eig = sym_eigendecompose(r)?;
    match choice {
        FunctionalChoice::SquaredPositivePart => {
            let value = eig.eigenvalues.iter().filter(|l| **l > 0.0).map(|l| l * l).sum();
            let positive = project_from_eigen(r, &eig);
            Ok((value, positive.scale(2.0), false))
        }
        FunctionalChoice::MaxEigenvalue => {
            let degenerate = eig.top_gap() < degeneracy_gap_threshold(r);
            let x = eig.top_eigenvector();
            Ok((eig.lambda_max(), SymmetricMatrix::outer(&x), degenerate))
        }
    }
}

fn check_operands(p: &SymmetricMatrix, a: &DMatrix<f64>, q: &SymmetricMatrix) -> Result<()> {
    let n = p.dim();
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.nrows(),
        });
    }
    if q.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.dim(),
        });
    }
    Ok(())
}

/// `R = PA + AᵀP + Q`.
pub fn lyapunov_matrix(p: &SymmetricMatrix, a: &DMatrix<f64>, q: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    check_operands(p, a, q)?;
    let pa = p.as_matrix() * a;
    let r = &pa + pa.transpose() + q.as_matrix();
    Ok(SymmetricMatrix::symmetrize(r))
}

pub fn v_eval(p: &SymmetricMatrix, a: &DMatrix<f64>, q: &SymmetricMatrix, choice: FunctionalChoice) -> Result<f64> {
    f_eval(choice, &lyapunov_matrix(p, a, q)?)
}

pub fn v_grad(
    p: &SymmetricMatrix,
    a: &DMatrix<f64>,
    q: &SymmetricMatrix,
    choice: FunctionalChoice,
) -> Result<GradientReport> {
    let r = lyapunov_matrix(p, a, q)?;
    let (value, g, degenerate) = value_and_grad(choice, &r)?;
    let ag = a * g.as_matrix();
    let gradient = SymmetricMatrix::symmetrize(&ag + ag.transpose());
    Ok(GradientReport {
        value,
        gradient,
        degenerate_top_eigenvalue: degenerate,
    })
}
