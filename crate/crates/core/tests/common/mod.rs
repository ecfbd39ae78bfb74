#![allow(dead_code)]

use lyapgrad_core::{
    inner_ball_bound, sigma_max, v_eval, verify_finite, FiniteFamily, FunctionalChoice, SymmetricMatrix,
};
use nalgebra::DMatrix;
use rand::Rng;

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0))
}

pub fn random_spd<R: Rng>(rng: &mut R, n: usize, shift: f64) -> SymmetricMatrix {
    let g = random_matrix(rng, n, n);
    SymmetricMatrix::new(g.transpose() * &g + DMatrix::identity(n, n) * shift).unwrap()
}

pub fn random_sym<R: Rng>(rng: &mut R, n: usize, scale: f64) -> SymmetricMatrix {
    SymmetricMatrix::new(random_matrix(rng, n, n) * scale).unwrap()
}

/// A family sharing the Lyapunov matrix `L`: `Aᵢ = L⁻¹(−Wᵢ/2 + Kᵢ)` with
/// `Wᵢ ≻ 0` and `Kᵢ` skew gives `LAᵢ + AᵢᵀL = −Wᵢ`. Returns the family and
/// `P = cL` feasible for `Q`.
pub fn family_with_known_solution<R: Rng>(
    rng: &mut R,
    n: usize,
    count: usize,
    q: &SymmetricMatrix,
) -> (FiniteFamily, SymmetricMatrix) {
    let l = random_spd(rng, n, 0.5);
    let l_inv = l.as_matrix().clone().try_inverse().unwrap();
    let mut matrices = Vec::new();
    let mut min_w = f64::INFINITY;
    for _ in 0..count {
        let w = random_spd(rng, n, 0.2);
        min_w = min_w.min(w.lambda_min().unwrap());
        let g = random_matrix(rng, n, n);
        let skew = (&g - g.transpose()) * 0.5;
        matrices.push(&l_inv * (w.as_matrix() * -0.5 + skew));
    }
    let c = 1.01 * q.lambda_max().unwrap() / min_w;
    (FiniteFamily::new(matrices).unwrap(), l.scale(c))
}

/// Center and radius of a Frobenius ball inside the feasible set, with the
/// radius pinned to 1 by the choice of γ.
pub fn certified_ball(family: &FiniteFamily, q: &SymmetricMatrix, p: &SymmetricMatrix) -> (SymmetricMatrix, f64) {
    let cert = verify_finite(p, family, q, 0.0).unwrap();
    assert!(cert.feasible, "seed solution not feasible: {}", cert.worst_residual);
    let sigma = family
        .matrices()
        .iter()
        .map(|a| sigma_max(a).unwrap())
        .fold(0.0, f64::max);
    let gamma = 1.0 + 2.0 * sigma / q.lambda_min().unwrap();
    let rho = inner_ball_bound(p, family, q, gamma).unwrap();
    (p.scale(gamma), rho)
}

/// Central difference of `v(·, A)` at `P` along `direction`.
pub fn directional_fd(
    p: &SymmetricMatrix,
    a: &DMatrix<f64>,
    q: &SymmetricMatrix,
    choice: FunctionalChoice,
    direction: &SymmetricMatrix,
    h: f64,
) -> f64 {
    let plus = p + &direction.scale(h);
    let minus = p - &direction.scale(h);
    (v_eval(&plus, a, q, choice).unwrap() - v_eval(&minus, a, q, choice).unwrap()) / (2.0 * h)
}

pub fn ceil_ratio(p0: &SymmetricMatrix, p_star: &SymmetricMatrix, rho: f64) -> u64 {
    ((p0 - p_star).frobenius_norm().powi(2) / (rho * rho)).ceil() as u64
}
