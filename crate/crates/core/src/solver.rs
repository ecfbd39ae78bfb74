//! Sequential gradient correction iterations.
//!
//! At iteration `k` one family member `A` is selected by the scheduler. If
//! `v(P_k, A) > tol` the iterate moves against the gradient,
//!
//! ```text
//! μ_k     = (α v + r ‖∂P v‖) / ‖∂P v‖²
//! P_{k+1} = P_k − μ_k ∂P v             (plain)
//! P_{k+1} = [P_k − μ_k ∂P v]⁺          (projected)
//! ```
//!
//! and otherwise `P_{k+1} = P_k`. Any ball of radius `r` inside the feasible
//! set shrinks the squared distance to its center by at least `r²` on every
//! correction, which bounds the number of corrections for finite families.

use std::borrow::Cow;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{hurwitz_check, sample_member, Family, ProblemSpec};
use crate::functionals::{v_eval, v_grad, FunctionalChoice};
use crate::symcone::{frobenius_norm, psd_projection, random_symmetric, SymmetricMatrix};
use crate::verify::{default_cert_tol, verify_finite, verify_interval_via_vertices, Certificate};

/// Gradient norms at or below this abort a correction with `ZeroGradient`.
pub const ZERO_GRADIENT_TOL: f64 = 1e-14;

/// Perturbation attempts per iteration before giving up on a repeated top eigenvalue.
pub const MAX_PERTURBATION_ATTEMPTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheduler {
    /// `h(k) = k mod N`; finite families only.
    #[serde(rename = "roundrobin")]
    RoundRobin,
    /// Uniform index for finite families, uniform box sample for interval ones.
    #[serde(rename = "random")]
    Randomized,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    Identity,
    Given(SymmetricMatrix),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub alpha: f64,
    pub r: f64,
    pub functional: FunctionalChoice,
    pub variant: Variant,
    pub scheduler: Scheduler,
    pub seed: u64,
    pub max_iters: u64,
    pub feasibility_tol: f64,
    pub p0: InitialGuess,
    pub degeneracy_perturb_scale: f64,
    /// Non-correcting samples required before an interval family is certified.
    /// Defaults to `10 · (free entries + 1)`.
    pub candidate_window: Option<u64>,
    /// Certification tolerance; defaults to `1e-9 · (1 + ‖P‖)`.
    pub cert_tol: Option<f64>,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            r: 1.0,
            functional: FunctionalChoice::SquaredPositivePart,
            variant: Variant::Plain,
            scheduler: Scheduler::RoundRobin,
            seed: 0,
            max_iters: 1_000_000,
            feasibility_tol: 0.0,
            p0: InitialGuess::Identity,
            degeneracy_perturb_scale: 1e-8,
            candidate_window: None,
            cert_tol: None,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, family: &Family) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha {} must lie in [0, 1]", self.alpha)));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidConfig(format!("r {} must be positive", self.r)));
        }
        if self.feasibility_tol.is_nan() || self.feasibility_tol < 0.0 {
            return Err(Error::InvalidConfig("feasibility tolerance must be >= 0".into()));
        }
        if !(self.degeneracy_perturb_scale >= 0.0 && self.degeneracy_perturb_scale.is_finite()) {
            return Err(Error::InvalidConfig(
                "perturbation scale must be finite and >= 0".into(),
            ));
        }
        if matches!(family, Family::Interval(_)) && self.scheduler == Scheduler::RoundRobin {
            return Err(Error::InvalidConfig(
                "round-robin scheduling needs a finite family; use the randomized scheduler".into(),
            ));
        }
        if let InitialGuess::Given(p0) = &self.p0 {
            if p0.dim() != family.dim() {
                return Err(Error::DimensionMismatch {
                    expected: family.dim(),
                    got: p0.dim(),
                });
            }
        }
        Ok(())
    }

    fn initial_p(&self, n: usize) -> SymmetricMatrix {
        match &self.p0 {
            InitialGuess::Identity => SymmetricMatrix::identity(n),
            InitialGuess::Given(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub k: u64,
    pub p: SymmetricMatrix,
    pub corrections: u64,
    pub last_correction_iter: Option<u64>,
    pub consecutive_noncorrections: u64,
}

impl SolverState {
    pub fn new(p: SymmetricMatrix) -> Self {
        Self {
            k: 0,
            p,
            corrections: 0,
            last_correction_iter: None,
            consecutive_noncorrections: 0,
        }
    }
}

/// Which family member an iteration used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemberId {
    /// 0-based index into a finite family.
    Index(usize),
    /// Ordinal of a matrix sampled from an interval family.
    Sample(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: u64,
    pub member: MemberId,
    pub v_value: f64,
    /// Zero when no correction was made.
    pub step_size: f64,
    pub grad_norm: f64,
    pub was_correction: bool,
    pub was_degenerate_perturbation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Solved,
    MaxItersReached,
    DegeneracyStall,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Solved => "SOLVED",
            Status::MaxItersReached => "MAX_ITERS_REACHED",
            Status::DegeneracyStall => "DEGENERACY_STALL",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub status: Status,
    pub p_final: SymmetricMatrix,
    pub iterations: u64,
    pub corrections: u64,
    /// Always present when solved; otherwise present when the family could
    /// be checked exhaustively.
    pub certificate: Option<Certificate>,
    pub trace: Option<Vec<TraceRecord>>,
}

/// `μ = (α v + r ‖g‖) / ‖g‖²`.
pub fn step_size(v_value: f64, grad_norm: f64, alpha: f64, r: f64) -> Result<f64> {
    if grad_norm.is_nan() || grad_norm <= ZERO_GRADIENT_TOL {
        return Err(Error::ZeroGradient(grad_norm));
    }
    Ok((alpha * v_value + r * grad_norm) / (grad_norm * grad_norm))
}

/// `P + E` with `E` random symmetric of norm `scale · max(1, ‖P‖)`.
pub fn degenerate_perturbation<R: Rng + ?Sized>(p: &SymmetricMatrix, scale: f64, rng: &mut R) -> SymmetricMatrix {
    if scale == 0.0 {
        return p.clone();
    }
    let size = scale * frobenius_norm(p).max(1.0);
    p + &random_symmetric(p.dim(), size, rng)
}

/// Checks `‖P_after − P*‖² ≤ ‖P_before − P*‖² − r² + 1e-9 (1 + ‖P_before‖²)`
/// for one correction step, given a ball of radius `r` around `P*` inside
/// the feasible set.
pub fn descent_check(p_before: &SymmetricMatrix, p_after: &SymmetricMatrix, p_star: &SymmetricMatrix, r: f64) -> bool {
    let before = frobenius_norm(&(p_before - p_star)).powi(2);
    let after = frobenius_norm(&(p_after - p_star)).powi(2);
    let slack = 1e-9 * (1.0 + frobenius_norm(p_before).powi(2));
    after <= before - r * r + slack
}

/// Result of a single iteration.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: SolverState,
    pub record: TraceRecord,
    /// The top eigenvalue stayed repeated through every perturbation attempt.
    pub stalled: bool,
}

/// One iteration of the plain or projected update against member `a`.
pub fn correction_step<R: Rng + ?Sized>(
    state: &SolverState,
    a: &DMatrix<f64>,
    member: MemberId,
    q: &SymmetricMatrix,
    config: &SolverConfig,
    rng: &mut R,
) -> Result<StepResult> {
    let tol = config.feasibility_tol;
    let mut p = Cow::Borrowed(&state.p);
    let mut value = v_eval(&p, a, q, config.functional)?;
    let mut next = state.clone();
    next.k += 1;

    let mut record = TraceRecord {
        k: state.k,
        member,
        v_value: value,
        step_size: 0.0,
        grad_norm: 0.0,
        was_correction: false,
        was_degenerate_perturbation: false,
    };

    if value <= tol {
        next.consecutive_noncorrections += 1;
        return Ok(StepResult {
            state: next,
            record,
            stalled: false,
        });
    }

    let mut report = v_grad(&p, a, q, config.functional)?;
    let mut attempts = 0;
    while report.degenerate_top_eigenvalue {
        if attempts == MAX_PERTURBATION_ATTEMPTS {
            next.p = p.into_owned();
            next.consecutive_noncorrections = 0;
            record.v_value = value;
            return Ok(StepResult {
                state: next,
                record,
                stalled: true,
            });
        }
        attempts += 1;
        record.was_degenerate_perturbation = true;
        p = Cow::Owned(degenerate_perturbation(&p, config.degeneracy_perturb_scale, rng));
        value = v_eval(&p, a, q, config.functional)?;
        if value <= tol {
            break;
        }
        report = v_grad(&p, a, q, config.functional)?;
    }
    record.v_value = value;

    if value <= tol {
        // the perturbation alone made this constraint hold
        next.p = p.into_owned();
        next.consecutive_noncorrections = 0;
        return Ok(StepResult {
            state: next,
            record,
            stalled: false,
        });
    }

    let grad_norm = frobenius_norm(&report.gradient);
    let mu = step_size(value, grad_norm, config.alpha, config.r)?;
    let moved = &*p - &report.gradient.scale(mu);
    next.p = match config.variant {
        Variant::Plain => moved,
        Variant::Projected => psd_projection(&moved)?,
    };
    next.corrections += 1;
    next.last_correction_iter = Some(state.k);
    next.consecutive_noncorrections = 0;
    record.step_size = mu;
    record.grad_norm = grad_norm;
    record.was_correction = true;
    Ok(StepResult {
        state: next,
        record,
        stalled: false,
    })
}

/// Selects the family member for iteration `k`.
pub fn scheduler_next<'f, R: Rng + ?Sized>(
    scheduler: Scheduler,
    k: u64,
    family: &'f Family,
    rng: &mut R,
) -> Result<(Cow<'f, DMatrix<f64>>, MemberId)> {
    match (scheduler, family) {
        (Scheduler::RoundRobin, Family::Finite(f)) => {
            let i = (k % f.len() as u64) as usize;
            Ok((Cow::Borrowed(f.get(i)), MemberId::Index(i)))
        }
        (Scheduler::RoundRobin, Family::Interval(_)) => Err(Error::InvalidConfig(
            "round-robin scheduling needs a finite family".into(),
        )),
        (Scheduler::Randomized, Family::Finite(f)) => {
            let i = rng.random_range(0..f.len());
            Ok((Cow::Borrowed(f.get(i)), MemberId::Index(i)))
        }
        (Scheduler::Randomized, Family::Interval(f)) => Ok((Cow::Owned(sample_member(f, rng)), MemberId::Sample(k))),
    }
}

/// Rejects families with a non-Hurwitz member. Interval families are checked
/// at their vertices when those can be enumerated.
pub fn check_hurwitz_family(family: &Family) -> Result<()> {
    let first_bad = |count: usize, member: &(dyn Fn(usize) -> DMatrix<f64> + Sync)| -> Result<Option<usize>> {
        let flags: Vec<bool> = (0..count)
            .into_par_iter()
            .map(|i| hurwitz_check(&member(i)))
            .collect::<Result<_>>()?;
        Ok(flags.iter().position(|ok| !ok))
    };
    let bad = match family {
        Family::Finite(f) => first_bad(f.len(), &|i| f.get(i).clone())?,
        Family::Interval(f) => match f.vertex_count() {
            Ok(count) => first_bad(count, &|i| f.vertex(i))?,
            Err(_) => None,
        },
    };
    match bad {
        Some(index) => Err(Error::NonHurwitzInput { index }),
        None => Ok(()),
    }
}

/// Step-by-step driver; [`run`] loops it to termination.
pub struct Solver<'s> {
    spec: &'s ProblemSpec,
    config: SolverConfig,
    state: SolverState,
    rng: ChaCha8Rng,
    trace: Option<Vec<TraceRecord>>,
    window: u64,
}

impl<'s> Solver<'s> {
    pub fn new(spec: &'s ProblemSpec, config: SolverConfig) -> Result<Self> {
        config.validate(spec.family())?;
        check_hurwitz_family(spec.family())?;
        let window = match spec.family() {
            Family::Finite(f) => f.len() as u64,
            Family::Interval(f) => config
                .candidate_window
                .unwrap_or(10 * (f.free_count() as u64 + 1))
                .max(1),
        };
        Ok(Self {
            spec,
            state: SolverState::new(config.initial_p(spec.dim())),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            trace: config.record_trace.then(Vec::new),
            config,
            window,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Runs one iteration and returns its record plus whether the top
    /// eigenvalue stalled.
    pub fn step(&mut self) -> Result<(TraceRecord, bool)> {
        let (a, member) = scheduler_next(self.config.scheduler, self.state.k, self.spec.family(), &mut self.rng)?;
        let result = correction_step(&self.state, &a, member, self.spec.q(), &self.config, &mut self.rng)?;
        self.state = result.state;
        if let Some(trace) = &mut self.trace {
            trace.push(result.record.clone());
        }
        Ok((result.record, result.stalled))
    }

    fn cert_tol(&self, p: &SymmetricMatrix) -> f64 {
        self.config.cert_tol.unwrap_or_else(|| default_cert_tol(p))
    }

    /// Full certificate of the current iterate, if the family allows one.
    pub fn certify(&self) -> Result<Option<Certificate>> {
        let p = &self.state.p;
        let tol = self.cert_tol(p);
        match self.spec.family() {
            Family::Finite(f) => verify_finite(p, f, self.spec.q(), tol).map(Some),
            Family::Interval(f) => match verify_interval_via_vertices(p, f, self.spec.q(), tol) {
                Ok(cert) => Ok(Some(cert)),
                Err(Error::TooManyVertices { .. }) => Ok(None),
                Err(e) => Err(e),
            },
        }
    }

    /// After a long enough run of non-corrections, certify the iterate.
    fn try_finish(&mut self) -> Result<Option<Certificate>> {
        if self.state.consecutive_noncorrections < self.window {
            return Ok(None);
        }
        match self.certify()? {
            Some(cert) if cert.feasible => Ok(Some(cert)),
            _ => {
                self.state.consecutive_noncorrections = 0;
                Ok(None)
            }
        }
    }

    fn finish(self, status: Status, certificate: Option<Certificate>) -> SolverOutcome {
        SolverOutcome {
            status,
            p_final: self.state.p,
            iterations: self.state.k,
            corrections: self.state.corrections,
            certificate,
            trace: self.trace,
        }
    }

    pub fn run(mut self) -> Result<SolverOutcome> {
        while self.state.k < self.config.max_iters {
            let (_, stalled) = self.step()?;
            if stalled {
                let cert = self.certify()?;
                return Ok(self.finish(Status::DegeneracyStall, cert));
            }
            if let Some(cert) = self.try_finish()? {
                return Ok(self.finish(Status::Solved, Some(cert)));
            }
        }
        let cert = self.certify()?;
        Ok(self.finish(Status::MaxItersReached, cert))
    }
}

pub fn run(spec: &ProblemSpec, config: SolverConfig) -> Result<SolverOutcome> {
    Solver::new(spec, config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{FiniteFamily, IntervalFamily};
    use nalgebra::dmatrix;

    fn scalar(v: f64) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(&[vec![v]]).unwrap()
    }

    fn scalar_spec() -> ProblemSpec {
        ProblemSpec::with_identity_q(FiniteFamily::new(vec![dmatrix![-0.25]]).unwrap()).unwrap()
    }

    #[test]
    fn step_size_examples() {
        assert_eq!(step_size(0.25, 0.5, 1.0, 1.0).unwrap(), 3.0);
        assert_eq!(step_size(123.0, 4.0, 0.0, 2.0).unwrap(), 0.5);
        assert_eq!(step_size(1.0, 1.0, 1.0, 1.0).unwrap(), 2.0);
        assert!(matches!(step_size(1.0, 0.0, 1.0, 1.0), Err(Error::ZeroGradient(_))));
    }

    #[test]
    fn scalar_correction_chain() {
        let spec = scalar_spec();
        let a = dmatrix![-0.25];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for variant in [Variant::Plain, Variant::Projected] {
            let config = SolverConfig {
                variant,
                ..Default::default()
            };
            let state = SolverState::new(scalar(1.0));
            let step = correction_step(&state, &a, MemberId::Index(0), spec.q(), &config, &mut rng).unwrap();
            assert!(step.record.was_correction);
            assert_eq!(step.record.v_value, 0.25);
            assert_eq!(step.record.grad_norm, 0.5);
            assert_eq!(step.record.step_size, 3.0);
            assert_eq!(step.state.p, scalar(2.5));
            assert_eq!(step.state.k, 1);
            assert_eq!(step.state.corrections, 1);

            let again = correction_step(&step.state, &a, MemberId::Index(0), spec.q(), &config, &mut rng).unwrap();
            assert!(!again.record.was_correction);
            assert_eq!(again.state.p, step.state.p);
            assert_eq!(again.state.k, 2);
            assert_eq!(again.state.corrections, 1);
        }
    }

    #[test]
    fn scalar_run_solves_in_one_correction() {
        let outcome = run(&scalar_spec(), SolverConfig::default()).unwrap();
        assert_eq!(outcome.status, Status::Solved);
        assert_eq!(outcome.corrections, 1);
        assert_eq!(outcome.iterations, 2);
        assert_eq!(outcome.p_final, scalar(2.5));
        assert!(outcome.certificate.unwrap().feasible);
    }

    #[test]
    fn feasible_start_needs_no_corrections() {
        let fam = FiniteFamily::new(vec![dmatrix![-1.0, 0.0; 0.0, -1.0], dmatrix![-2.0, 0.1; 0.0, -1.5]]).unwrap();
        let spec = ProblemSpec::with_identity_q(fam).unwrap();
        let outcome = run(&spec, SolverConfig::default()).unwrap();
        assert_eq!(outcome.status, Status::Solved);
        assert_eq!(outcome.corrections, 0);
        assert_eq!(outcome.iterations, 2);
    }

    #[test]
    fn zero_budget_reports_max_iters() {
        let config = SolverConfig {
            max_iters: 0,
            ..Default::default()
        };
        let outcome = run(&scalar_spec(), config).unwrap();
        assert_eq!(outcome.status, Status::MaxItersReached);
        assert_eq!(outcome.iterations, 0);
        assert_eq!(outcome.p_final, scalar(1.0));
    }

    #[test]
    fn round_robin_order() {
        let fam: Family = FiniteFamily::new(vec![dmatrix![-1.0], dmatrix![-2.0], dmatrix![-3.0]])
            .unwrap()
            .into();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ids: Vec<_> = (0..4)
            .map(|k| scheduler_next(Scheduler::RoundRobin, k, &fam, &mut rng).unwrap().1)
            .collect();
        assert_eq!(
            ids,
            vec![
                MemberId::Index(0),
                MemberId::Index(1),
                MemberId::Index(2),
                MemberId::Index(0)
            ]
        );

        let single: Family = FiniteFamily::new(vec![dmatrix![-1.0]]).unwrap().into();
        for k in 0..5 {
            let (_, id) = scheduler_next(Scheduler::RoundRobin, k, &single, &mut rng).unwrap();
            assert_eq!(id, MemberId::Index(0));
        }
    }

    #[test]
    fn randomized_schedule_is_seeded() {
        let fam: Family = FiniteFamily::new(vec![dmatrix![-1.0], dmatrix![-2.0], dmatrix![-3.0]])
            .unwrap()
            .into();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|k| scheduler_next(Scheduler::Randomized, k, &fam, &mut rng).unwrap().1)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn round_robin_rejected_for_intervals() {
        let box_family = IntervalFamily::new(dmatrix![-2.0], dmatrix![-1.0]).unwrap();
        let spec = ProblemSpec::with_identity_q(box_family).unwrap();
        assert!(matches!(
            run(&spec, SolverConfig::default()),
            Err(Error::InvalidConfig(_))
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(scheduler_next(Scheduler::RoundRobin, 0, spec.family(), &mut rng).is_err());
    }

    #[test]
    fn interval_family_solved_by_sampling() {
        let box_family = IntervalFamily::new(dmatrix![-2.0, -0.5; 0.0, -1.5], dmatrix![-1.0, 0.5; 0.0, -1.0]).unwrap();
        let spec = ProblemSpec::with_identity_q(box_family).unwrap();
        let config = SolverConfig {
            scheduler: Scheduler::Randomized,
            seed: 5,
            ..Default::default()
        };
        let outcome = run(&spec, config).unwrap();
        assert_eq!(outcome.status, Status::Solved);
        assert_eq!(outcome.certificate.unwrap().residuals.len(), 8);
    }

    #[test]
    fn non_hurwitz_member_rejected() {
        let fam = FiniteFamily::new(vec![dmatrix![-1.0, 0.0; 0.0, -1.0], dmatrix![0.0, 1.0; -1.0, 0.0]]).unwrap();
        let spec = ProblemSpec::with_identity_q(fam).unwrap();
        assert!(matches!(
            run(&spec, SolverConfig::default()),
            Err(Error::NonHurwitzInput { index: 1 })
        ));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let spec = scalar_spec();
        for config in [
            SolverConfig {
                alpha: 1.5,
                ..Default::default()
            },
            SolverConfig {
                alpha: -0.1,
                ..Default::default()
            },
            SolverConfig {
                r: 0.0,
                ..Default::default()
            },
            SolverConfig {
                p0: InitialGuess::Given(SymmetricMatrix::identity(2)),
                ..Default::default()
            },
        ] {
            assert!(run(&spec, config).is_err());
        }
    }

    #[test]
    fn perturbation_examples() {
        let p = SymmetricMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(degenerate_perturbation(&p, 0.0, &mut rng), p);
        let out = degenerate_perturbation(&p, 1e-3, &mut rng);
        assert!(out.is_exactly_symmetric());
        let expected = 1e-3 * frobenius_norm(&p);
        assert!(((frobenius_norm(&(&out - &p)) - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_top_eigenvalue_is_perturbed_away() {
        // R = -2P + 3I = I at P = I: repeated top eigenvalue
        let fam = FiniteFamily::new(vec![dmatrix![-1.0, 0.0; 0.0, -1.0]]).unwrap();
        let spec = ProblemSpec::new(fam, SymmetricMatrix::identity(2).scale(3.0)).unwrap();
        let config = SolverConfig {
            functional: FunctionalChoice::MaxEigenvalue,
            record_trace: true,
            ..Default::default()
        };
        let outcome = run(&spec, config).unwrap();
        assert_eq!(outcome.status, Status::Solved);
        let trace = outcome.trace.unwrap();
        assert!(trace[0].was_degenerate_perturbation);
        assert!(trace[0].was_correction);
    }

    #[test]
    fn zero_scale_perturbation_stalls() {
        let fam = FiniteFamily::new(vec![dmatrix![-1.0, 0.0; 0.0, -1.0]]).unwrap();
        let spec = ProblemSpec::new(fam, SymmetricMatrix::identity(2).scale(3.0)).unwrap();
        let config = SolverConfig {
            functional: FunctionalChoice::MaxEigenvalue,
            degeneracy_perturb_scale: 0.0,
            ..Default::default()
        };
        let outcome = run(&spec, config).unwrap();
        assert_eq!(outcome.status, Status::DegeneracyStall);
        assert_eq!(outcome.iterations, 1);
    }

    #[test]
    fn descent_check_examples() {
        // feasible iff P ≥ 2, so [4, 6] is a ball of radius 1 around 5
        let (before, after, star) = (scalar(1.0), scalar(2.5), scalar(5.0));
        assert!(descent_check(&before, &after, &star, 1.0));
        assert!(!descent_check(&before, &after, &star, 3.5));
        assert!(descent_check(&before, &after, &star, 0.0));
        assert!(!descent_check(&after, &before, &star, 0.0));
    }
}
