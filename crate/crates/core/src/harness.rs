//! Instance generation and constant estimation for the convergence-bound
//! checks: random polyhedral problems with a known optimum planted through
//! their KKT conditions, sampled Lipschitz/subgradient bounds, and the
//! bound formulas the checks compare against.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::sample_ball;
use crate::geometry::{self, Halfspace};
use crate::linalg;
use crate::model::{ConstraintFunction, ObjectiveFunction, Optimum, Problem, SimpleSet};

/// Builds a random problem with affine constraints, a quadratic objective
/// (alternating between the shifted and general kinds) and a planted
/// optimum: the active constraint normals and multipliers are drawn first,
/// and the objective is shifted so that its gradient at the chosen point is
/// the negative multiplier combination.
pub fn random_affine_instance(
    seed: u64,
    n_max: usize,
    m_max: usize,
    bounded_q: bool,
) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=n_max.max(2));
    let m = rng.random_range(1..=m_max.max(1));
    let x_star: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();

    // Active constraints and the gradient they must absorb.
    let n_active = rng.random_range(1..=m.min(n));
    let (actives, grad_at_star) = loop {
        let mut normals = Vec::with_capacity(n_active);
        let mut combo = vec![0.0; n];
        for _ in 0..n_active {
            let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let na = linalg::norm(&a);
            if na < 0.1 {
                a[0] += 1.0;
            }
            let lambda: f64 = rng.random_range(0.2..1.0);
            combo = linalg::add_scaled(&combo, lambda, &a);
            normals.push(a);
        }
        let grad = linalg::scale(&combo, -1.0);
        if linalg::norm(&grad) >= 0.3 {
            break (normals, grad);
        }
    };

    let objective = if rng.random_range(0..2) == 0 {
        // f'(x) = x - x0, so x0 = x* - grad.
        let x0 = linalg::sub(&x_star, &grad_at_star);
        ObjectiveFunction::ShiftedQuadratic { x0 }
    } else {
        // f'(x) = A x + b with A = M'M + 0.5 I.
        let mut mat = vec![0.0; n * n];
        for v in mat.iter_mut() {
            *v = rng.random_range(-0.7..0.7);
        }
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = if i == j { 0.5 } else { 0.0 };
                for k in 0..n {
                    s += mat[k * n + i] * mat[k * n + j];
                }
                a[i][j] = s;
            }
        }
        let ax: Vec<f64> = (0..n).map(|i| linalg::dot(&a[i], &x_star)).collect();
        let b = linalg::sub(&grad_at_star, &ax);
        ObjectiveFunction::GeneralQuadratic { a, b, mu: None, lipschitz: None }
    };

    let mut constraints: Vec<ConstraintFunction> = actives
        .iter()
        .map(|a| ConstraintFunction::Affine {
            a: a.clone(),
            b: linalg::dot(a, &x_star),
        })
        .collect();
    for _ in n_active..m {
        let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if linalg::norm(&a) < 0.1 {
            a[0] += 1.0;
        }
        let slack: f64 = rng.random_range(0.1..2.0);
        let b = linalg::dot(&a, &x_star) + slack;
        constraints.push(ConstraintFunction::Affine { a, b });
    }

    let start = objective.unconstrained_minimizer();
    let reach = linalg::dist(&start, &x_star);
    let (q, diameter) = if bounded_q {
        let rho = reach.max(1.0) * 1.5;
        (
            SimpleSet::Ball { center: x_star.clone(), radius: rho },
            2.0 * rho,
        )
    } else {
        (SimpleSet::AllSpace, 2.0 * (reach + 1.0))
    };

    let value = objective.value(&x_star);
    Problem::new(
        objective,
        constraints,
        q,
        diameter,
        None,
        Some(Optimum { point: x_star, value }),
    )
    .expect("planted instance is always valid")
}

/// Sampled Lipschitz constant of the objective over `B(x_star, r)`:
/// the largest gradient norm seen.
pub fn objective_lipschitz_bound(
    f: &ObjectiveFunction,
    x_star: &[f64],
    r: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x_star.len();
    let mut best = linalg::norm(&f.gradient(x_star));
    for _ in 0..samples {
        let x = sample_ball(&mut rng, x_star, r, n);
        best = best.max(linalg::norm(&f.gradient(&x)));
    }
    best
}

/// Sampled bound on constraint subgradient norms over `B(x_star, r)`.
pub fn constraint_subgradient_bound(
    constraints: &[ConstraintFunction],
    x_star: &[f64],
    r: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x_star.len();
    let mut best = 0.0f64;
    for _ in 0..samples {
        let x = sample_ball(&mut rng, x_star, r, n);
        for c in constraints {
            best = best.max(linalg::norm(&c.subgradient(&x)));
        }
    }
    best
}

/// Objective-gap / violation bound of the subgradient method at budget `k`:
/// `sqrt(3) * M * R / sqrt(k - 1.5)`.
pub fn subgrad_rhs(m_const: f64, r: f64, k: usize) -> f64 {
    assert!(k >= 2, "the bound needs k >= 2");
    3.0_f64.sqrt() * m_const * r / ((k as f64) - 1.5).sqrt()
}

/// Feasibility-distance bound of the sweep rule at budget `k`:
/// `kappa * sqrt(3 m) * R / sqrt(k - 1.5)`.
pub fn subgrad_feasibility_rhs(kappa: f64, m: usize, r: f64, k: usize) -> f64 {
    assert!(k >= 2, "the bound needs k >= 2");
    kappa * (3.0 * m as f64).sqrt() * r / ((k as f64) - 1.5).sqrt()
}

/// The two readings of the sequence-decrement constant
/// `eps_bar = eps1 * eps2^2 / 4` with `eps1 = ||f'(x*)|| / (2 kappa^2 mu)`:
/// one with `eps2 = 2 mu / ||f'(x*)||^2`, one with `eps2 = 2 mu / ||f'(x*)||`.
pub fn epsilon_bar_readings(mu: f64, grad_norm_star: f64, kappa: f64) -> (f64, f64) {
    let eps1 = grad_norm_star / (2.0 * kappa * kappa * mu);
    let eps2_a = 2.0 * mu / (grad_norm_star * grad_norm_star);
    let eps2_b = 2.0 * mu / grad_norm_star;
    (
        0.25 * eps1 * eps2_a * eps2_a,
        0.25 * eps1 * eps2_b * eps2_b,
    )
}

/// Exact distance from `x` to the feasible set, for problems whose
/// constraints are all polyhedral (or a single distance kind).
pub fn distance_to_feasible(p: &Problem, x: &[f64]) -> Option<f64> {
    if p.constraints.len() == 1 {
        if let Some(v) = match &p.constraints[0] {
            c @ (ConstraintFunction::DistanceToBall { .. }
            | ConstraintFunction::DistanceToBox { .. }) => Some(c.value(x).max(0.0)),
            _ => None,
        } {
            return Some(v);
        }
    }
    let planes: Option<Vec<Halfspace>> = p
        .constraints
        .iter()
        .map(|c| c.as_halfspace().map(|(a, b)| Halfspace::proper(a, b)))
        .collect();
    let planes = planes?;
    geometry::project_intersection(x, &planes)
        .ok()
        .map(|st| linalg::dist(x, &st.solution))
}
