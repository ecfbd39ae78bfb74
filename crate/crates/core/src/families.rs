//! Matrix families, problem specifications and instance generators.

use nalgebra::{DMatrix, Schur};
use rand::Rng;

use crate::error::{Error, Result};
use crate::symcone::{sigma_max, SymmetricMatrix};

/// Eigenvalues with real part at or above `-HURWITZ_MARGIN` count as unstable.
pub const HURWITZ_MARGIN: f64 = 1e-12;

/// Vertex enumeration refuses boxes with more free entries than this.
pub const MAX_FREE_ENTRIES: usize = 20;

const SCHUR_MAX_ITERS: usize = 10_000;

fn check_square(m: &DMatrix<f64>, n: usize) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.nrows(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// True iff every eigenvalue of `a` has real part below `-HURWITZ_MARGIN`.
pub fn hurwitz_check(a: &DMatrix<f64>) -> Result<bool> {
    check_square(a, a.nrows())?;
    if a.is_empty() {
        return Ok(true);
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITERS).ok_or(Error::EigenNonConvergence)?;
    Ok(schur.complex_eigenvalues().iter().all(|z| z.re < -HURWITZ_MARGIN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFamily {
    dim: usize,
    matrices: Vec<DMatrix<f64>>,
}

impl FiniteFamily {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Schema("a finite family needs at least one matrix".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::Schema("matrices must be at least 1x1".into()));
        }
        for m in &matrices {
            check_square(m, dim)?;
        }
        Ok(Self { dim, matrices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn get(&self, index: usize) -> &DMatrix<f64> {
        &self.matrices[index]
    }

    /// Index of the first member that fails [`hurwitz_check`].
    pub fn first_non_hurwitz(&self) -> Result<Option<usize>> {
        for (i, m) in self.matrices.iter().enumerate() {
            if !hurwitz_check(m)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// The entrywise box `{A : lower ≤ A ≤ upper}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFamily {
    dim: usize,
    lower: DMatrix<f64>,
    upper: DMatrix<f64>,
    free: Vec<(usize, usize)>,
}

impl IntervalFamily {
    pub fn new(lower: DMatrix<f64>, upper: DMatrix<f64>) -> Result<Self> {
        let dim = lower.nrows();
        if dim == 0 {
            return Err(Error::Schema("matrices must be at least 1x1".into()));
        }
        check_square(&lower, dim)?;
        check_square(&upper, dim)?;
        let mut free = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let (l, u) = (lower[(i, j)], upper[(i, j)]);
                if l > u {
                    return Err(Error::InvalidRange(format!(
                        "entry ({i}, {j}): lower bound {l} exceeds upper bound {u}"
                    )));
                }
                if l < u {
                    free.push((i, j));
                }
            }
        }
        Ok(Self {
            dim,
            lower,
            upper,
            free,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DMatrix<f64> {
        &self.upper
    }

    /// Entries with `lower < upper`, in row-major order.
    pub fn free_entries(&self) -> &[(usize, usize)] {
        &self.free
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    /// `2^free`, or `TooManyVertices` above the enumeration cap.
    pub fn vertex_count(&self) -> Result<usize> {
        if self.free.len() > MAX_FREE_ENTRIES {
            return Err(Error::TooManyVertices {
                free: self.free.len(),
                cap: MAX_FREE_ENTRIES,
            });
        }
        Ok(1usize << self.free.len())
    }

    /// Vertex number `index`: bit `b` set puts the `b`-th free entry at its
    /// upper bound, clear at its lower bound.
    pub fn vertex(&self, index: usize) -> DMatrix<f64> {
        let mut m = self.lower.clone();
        for (bit, &(i, j)) in self.free.iter().enumerate() {
            if (index >> bit) & 1 == 1 {
                m[(i, j)] = self.upper[(i, j)];
            }
        }
        m
    }

    pub fn contains(&self, a: &DMatrix<f64>) -> bool {
        a.shape() == self.lower.shape()
            && a.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }
}

pub fn enumerate_vertices(family: &IntervalFamily) -> Result<FiniteFamily> {
    let count = family.vertex_count()?;
    FiniteFamily::new((0..count).map(|i| family.vertex(i)).collect())
}

/// Member with each free entry drawn independently and uniformly from its interval.
pub fn sample_member<R: Rng + ?Sized>(family: &IntervalFamily, rng: &mut R) -> DMatrix<f64> {
    let mut m = family.lower.clone();
    for &(i, j) in &family.free {
        m[(i, j)] = rng.random_range(family.lower[(i, j)]..=family.upper[(i, j)]);
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Finite(FiniteFamily),
    Interval(IntervalFamily),
}

impl Family {
    pub fn dim(&self) -> usize {
        match self {
            Family::Finite(f) => f.dim(),
            Family::Interval(f) => f.dim(),
        }
    }
}

impl From<FiniteFamily> for Family {
    fn from(f: FiniteFamily) -> Self {
        Family::Finite(f)
    }
}

impl From<IntervalFamily> for Family {
    fn from(f: IntervalFamily) -> Self {
        Family::Interval(f)
    }
}

/// A family together with the fixed `Q ≻ 0` of the inequalities
/// `PA + AᵀP + Q ⪯ 0`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    family: Family,
    q: SymmetricMatrix,
}

impl ProblemSpec {
    pub fn new(family: impl Into<Family>, q: SymmetricMatrix) -> Result<Self> {
        let family = family.into();
        if q.dim() != family.dim() {
            return Err(Error::DimensionMismatch {
                expected: family.dim(),
                got: q.dim(),
            });
        }
        let lambda_min = q.lambda_min()?;
        if lambda_min <= 0.0 {
            return Err(Error::QNotPositiveDefinite(lambda_min));
        }
        Ok(Self { family, q })
    }

    /// `Q = I`.
    pub fn with_identity_q(family: impl Into<Family>) -> Result<Self> {
        let family = family.into();
        let n = family.dim();
        Self::new(family, SymmetricMatrix::identity(n))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn q(&self) -> &SymmetricMatrix {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }
}

/// Parameters of the upper-triangular interval generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularIntervalParams {
    pub n: usize,
    /// Diagonal values are drawn from `[lo, hi]`, `hi < 0`.
    pub diag_range: (f64, f64),
    pub offdiag_halfwidth: f64,
    /// Give each diagonal entry the interval `[c − w, min(c + w, hi)]`
    /// around its drawn value `c` instead of fixing it.
    pub interval_diagonal: bool,
}

impl Default for TriangularIntervalParams {
    fn default() -> Self {
        Self {
            n: 4,
            diag_range: (-2.0, -1.0),
            offdiag_halfwidth: 0.25,
            interval_diagonal: false,
        }
    }
}

/// Random interval family of upper-triangular matrices with negative diagonal.
///
/// Strict-lower entries are fixed at zero. Each strict-upper entry gets the
/// interval `[c − w, c + w]` with center `c` uniform in `[−1, 1]`. Every
/// member is triangular with negative diagonal and hence Hurwitz.
pub fn generate_triangular_interval<R: Rng + ?Sized>(
    params: &TriangularIntervalParams,
    rng: &mut R,
) -> Result<IntervalFamily> {
    let (lo, hi) = params.diag_range;
    let w = params.offdiag_halfwidth;
    if params.n == 0 {
        return Err(Error::InvalidRange("n must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && hi < 0.0) {
        return Err(Error::InvalidRange(format!(
            "diagonal range ({lo}, {hi}) must satisfy lo <= hi < 0"
        )));
    }
    if !(w.is_finite() && w >= 0.0) {
        return Err(Error::InvalidRange(format!("halfwidth {w} must be finite and >= 0")));
    }

    let n = params.n;
    let mut lower = DMatrix::zeros(n, n);
    let mut upper = DMatrix::zeros(n, n);
    for i in 0..n {
        let d = rng.random_range(lo..=hi);
        if params.interval_diagonal {
            lower[(i, i)] = d - w;
            upper[(i, i)] = (d + w).min(hi);
        } else {
            lower[(i, i)] = d;
            upper[(i, i)] = d;
        }
        for j in (i + 1)..n {
            let c = rng.random_range(-1.0..=1.0);
            lower[(i, j)] = c - w;
            upper[(i, j)] = c + w;
        }
    }
    IntervalFamily::new(lower, upper)
}

/// Radius `ρ = (γ − 1) λmin(Q) / (2 maxᵢ σmax(Aᵢ))` of a Frobenius ball
/// around `γP` that stays inside the feasible set whenever `P` is feasible.
pub fn inner_ball_bound(p: &SymmetricMatrix, family: &FiniteFamily, q: &SymmetricMatrix, gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma <= 1.0 {
        return Err(Error::InvalidRange(format!("gamma {gamma} must exceed 1")));
    }
    for d in [p.dim(), q.dim()] {
        if d != family.dim() {
            return Err(Error::DimensionMismatch {
                expected: family.dim(),
                got: d,
            });
        }
    }
    let mut largest = 0.0f64;
    for a in family.matrices() {
        largest = largest.max(sigma_max(a)?);
    }
    if largest == 0.0 {
        return Err(Error::InvalidRange("family contains only zero matrices".into()));
    }
    Ok((gamma - 1.0) * q.lambda_min()? / (2.0 * largest))
}
