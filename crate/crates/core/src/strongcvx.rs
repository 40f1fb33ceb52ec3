//! Constrained optimization for objectives that are strongly convex with
//! Lipschitz gradient, without an exact two-halfspace minimizer: an outer
//! loop maintains a pair of halfspaces (a combined "history" halfspace and a
//! fresh separating halfspace), and an inner projected-gradient loop solves
//! each pair subproblem approximately.
//!
//! The inner loop certifies its accuracy through the gradient-mapping
//! residual: with one more projected-gradient evaluation,
//! `err = (L/mu) * ||x - P_K(x - f'(x)/L)||` is an upper bound on the
//! distance from `x` to the subproblem minimizer. The inner loop runs until
//! `err <= alpha/k^2` and the separating halfspace found at `x` is at least
//! `2*err` away.

use thiserror::Error;

use crate::geometry::{self, GeometryError, Halfspace};
use crate::linalg;
use crate::model::{Problem, SimpleSet};
use crate::trace::{IterateTrace, StepKind, TraceRow};

#[derive(Debug, Error)]
pub enum StrongcvxError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("objective must be strongly convex with Lipschitz gradient")]
    NotStronglyConvex,
    #[error("the outer halfspace scheme requires q = all-space")]
    SimpleSetUnsupported,
    #[error("inner iteration cap {cap} exceeded at outer iteration {outer}")]
    InnerCap { outer: usize, cap: usize },
}

#[derive(Debug, Clone)]
pub struct StrongcvxConfig {
    /// Outer accuracy schedule: the k-th subproblem is solved to `alpha/k^2`.
    pub alpha: f64,
    pub max_outer: usize,
    /// Cap on inner projected-gradient steps per outer iteration. Near the
    /// optimum the separating-distance condition can demand arbitrarily many
    /// inner steps; hitting the cap is reported as an error naming the outer
    /// iteration.
    pub inner_cap: usize,
}

impl StrongcvxConfig {
    pub fn new(alpha: f64, max_outer: usize) -> Self {
        Self {
            alpha,
            max_outer,
            inner_cap: 1_000_000,
        }
    }
}

/// One projected-gradient step `P_K(x - f'(x)/L)` with an exact projector.
pub fn projected_gradient_step<P>(
    f: &crate::model::ObjectiveFunction,
    project: P,
    x: &[f64],
) -> Vec<f64>
where
    P: Fn(&[f64]) -> Vec<f64>,
{
    let l = f.lipschitz().expect("projected gradient requires a Lipschitz constant");
    let g = f.gradient(x);
    project(&linalg::add_scaled(x, -1.0 / l, &g))
}

/// Farthest supporting halfspace over the constraints (lowest index wins
/// ties); the whole space exactly when every constraint is strictly
/// satisfied.
pub fn separating_halfspace(p: &Problem, x: &[f64]) -> Halfspace {
    let mut best = Halfspace::AllSpace;
    let mut best_d = f64::NEG_INFINITY;
    for c in &p.constraints {
        let h = geometry::supporting_halfspace(c, x);
        if !h.is_proper() {
            continue;
        }
        let d = h.distance(x);
        if d > best_d {
            best_d = d;
            best = h;
        }
    }
    best
}

/// Combines the current halfspace pair into the next history halfspace.
/// When either input is improper, or the boundaries miss each other, or the
/// iterate is farther than `alpha/k^2` from their intersection, the
/// separating halfspace alone carries over; otherwise the new halfspace is
/// anchored at the boundary intersection with the cone-projected negative
/// gradient as its normal.
pub fn combine_halfspaces(
    h_circ: &Halfspace,
    h_plus: &Halfspace,
    x_k: &[f64],
    grad: &[f64],
    k: usize,
    alpha: f64,
) -> Halfspace {
    let (Halfspace::Proper { normal: n_circ, .. }, Halfspace::Proper { normal: n_plus, .. }) =
        (h_circ, h_plus)
    else {
        return h_plus.clone();
    };
    let x_tilde = match geometry::project_boundary_intersection(x_k, h_circ, h_plus) {
        Ok(x) => x,
        Err(_) => return h_plus.clone(),
    };
    if linalg::dist(x_k, &x_tilde) > alpha / (k as f64).powi(2) {
        return h_plus.clone();
    }
    let neg_grad = linalg::scale(grad, -1.0);
    let v = geometry::project_cone2(&neg_grad, n_circ, n_plus);
    if linalg::norm(&v) <= 1e-15 * (1.0 + linalg::norm(grad)) {
        return Halfspace::AllSpace;
    }
    let offset = linalg::dot(&v, &x_tilde);
    Halfspace::proper(v, offset)
}

/// Theorem-style performance estimate from run quantities: with
/// `d_bar = err_bound + kappa * d_plus`,
/// the objective gap is bounded by `||f'(x*)|| * d_bar + M * err_bound` and
/// the iterate error by `err_bound + sqrt(2 mu ||f'(x*)|| d_bar)`.
pub fn performance_estimate(
    err_bound: f64,
    d_plus: f64,
    kappa: f64,
    grad_norm_star: f64,
    lip_m: f64,
    mu: f64,
) -> (f64, f64) {
    let d_bar = err_bound + kappa * d_plus;
    let gap_bound = grad_norm_star * d_bar + lip_m * err_bound;
    let dist_bound = err_bound + (2.0 * mu * grad_norm_star * d_bar).sqrt();
    (gap_bound, dist_bound)
}

/// Everything the k-th outer iteration produced, for instrumentation.
#[derive(Debug, Clone)]
pub struct OuterRecord {
    pub k: usize,
    /// The pair the inner loop minimized over.
    pub h_circ: Halfspace,
    pub h_plus: Halfspace,
    /// Accepted inner solution and its certificate.
    pub x: Vec<f64>,
    pub residual: f64,
    pub err_bound: f64,
    pub inner: usize,
    /// Separating halfspace found at `x` (the next `H^+`) and its distance.
    pub h_plus_next: Halfspace,
    pub d_plus_next: f64,
}

#[derive(Debug, Clone)]
pub struct StrongcvxRun {
    pub trace: IterateTrace,
    pub outers: Vec<OuterRecord>,
    pub converged: bool,
}

/// Runs the outer loop for up to `max_outer` iterations. Trace row `k`
/// (1-based) records the accepted inner solution of outer iteration `k`,
/// with `dist` the distance to the next separating halfspace and `inner`
/// the number of projected-gradient steps spent.
pub fn run(p: &Problem, cfg: &StrongcvxConfig) -> Result<StrongcvxRun, StrongcvxError> {
    let f = &p.objective;
    let (Some(mu), Some(lip)) = (f.mu(), f.lipschitz()) else {
        return Err(StrongcvxError::NotStronglyConvex);
    };
    if p.q != SimpleSet::AllSpace {
        return Err(StrongcvxError::SimpleSetUnsupported);
    }

    let mut h_circ = Halfspace::AllSpace;
    let mut h_plus = Halfspace::AllSpace;
    let mut x = f.unconstrained_minimizer();
    let mut trace = IterateTrace::new();
    let mut outers = Vec::new();
    let mut converged = false;

    for k in 1..=cfg.max_outer {
        let pair = [h_circ.clone(), h_plus.clone()];
        let target = cfg.alpha / (k as f64).powi(2);
        let mut inner = 0usize;
        let accepted = loop {
            let x_next = {
                let g = f.gradient(&x);
                let stepped = linalg::add_scaled(&x, -1.0 / lip, &g);
                geometry::project_intersection(&stepped, &pair)?.solution
            };
            let residual = linalg::dist(&x, &x_next);
            let err_bound = (lip / mu) * residual;
            if err_bound <= target {
                let h_next = separating_halfspace(p, &x);
                let d_next = h_next.distance(&x);
                // A feasible iterate with a vanishing certificate solves the
                // full problem: no proper halfspace separates it and the
                // subproblem minimizer is where it stands.
                let solved = !h_next.is_proper() && err_bound <= 1e-12;
                if d_next >= 2.0 * err_bound || solved {
                    break (x.clone(), residual, err_bound, h_next, d_next, solved);
                }
            }
            x = x_next;
            inner += 1;
            if inner > cfg.inner_cap {
                return Err(StrongcvxError::InnerCap {
                    outer: k,
                    cap: cfg.inner_cap,
                });
            }
        };
        let (x_k, residual, err_bound, h_plus_next, d_plus_next, done) = accepted;

        trace.push(TraceRow {
            k,
            f: f.value(&x_k),
            viol: p.max_violation(&x_k),
            step: if h_plus_next.is_proper() {
                StepKind::Feasibility
            } else {
                StepKind::Objective
            },
            h: None,
            dist: d_plus_next,
            sweep_norm_sq: None,
            inner: Some(inner),
        });
        outers.push(OuterRecord {
            k,
            h_circ: h_circ.clone(),
            h_plus: h_plus.clone(),
            x: x_k.clone(),
            residual,
            err_bound,
            inner,
            h_plus_next: h_plus_next.clone(),
            d_plus_next,
        });

        if done {
            converged = true;
            break;
        }

        let grad = f.gradient(&x_k);
        h_circ = combine_halfspaces(&h_circ, &h_plus, &x_k, &grad, k, cfg.alpha);
        h_plus = h_plus_next;
        x = x_k;
    }

    Ok(StrongcvxRun {
        trace,
        outers,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstraintFunction, ObjectiveFunction, Optimum};

    fn shifted(x0: &[f64]) -> ObjectiveFunction {
        ObjectiveFunction::ShiftedQuadratic { x0: x0.to_vec() }
    }

    fn hs(a: &[f64], b: f64) -> Halfspace {
        Halfspace::proper(a.to_vec(), b)
    }

    #[test]
    fn gradient_step_fixes_constrained_optimum() {
        let f = shifted(&[1.0, 0.0]);
        let h = hs(&[1.0, 0.0], 0.0);
        let project = |y: &[f64]| h.project(y);
        let x = projected_gradient_step(&f, project, &[0.0, 0.0]);
        assert!(linalg::dist(&x, &[0.0, 0.0]) < 1e-15);
    }

    #[test]
    fn gradient_step_exact_for_identity_hessian() {
        let f = shifted(&[3.0, -2.0]);
        let x = projected_gradient_step(&f, |y: &[f64]| y.to_vec(), &[10.0, 10.0]);
        assert!(linalg::dist(&x, &[3.0, -2.0]) < 1e-12);
    }

    #[test]
    fn gradient_step_contracts_at_theorem_rate() {
        // Eigenvalues 1 and 4: contraction factor 1 - mu/L = 3/4 on the
        // squared distance.
        let f = ObjectiveFunction::GeneralQuadratic {
            a: vec![vec![1.0, 0.0], vec![0.0, 4.0]],
            b: vec![-1.0, -8.0],
            mu: Some(1.0),
            lipschitz: Some(4.0),
        };
        let h = hs(&[1.0, 0.0], 0.5);
        let x_star = geometry::minimize_two_halfspaces(&f, &h, &Halfspace::AllSpace, 1e-14).unwrap();
        let mut x = vec![-3.0, 7.0];
        for _ in 0..50 {
            let next = projected_gradient_step(&f, |y: &[f64]| h.project(y), &x);
            let lhs = linalg::norm_sq(&linalg::sub(&next, &x_star));
            let rhs = 0.75 * linalg::norm_sq(&linalg::sub(&x, &x_star));
            assert!(lhs <= rhs + 1e-12);
            x = next;
        }
    }

    fn problem(
        objective: ObjectiveFunction,
        constraints: Vec<ConstraintFunction>,
        opt: Option<Optimum>,
    ) -> Problem {
        Problem::new(objective, constraints, SimpleSet::AllSpace, 4.0, None, opt).unwrap()
    }

    #[test]
    fn separating_halfspace_picks_farthest() {
        let p = problem(
            shifted(&[0.0, 0.0]),
            vec![
                ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 },
                ConstraintFunction::Affine { a: vec![1.0, 1.0], b: -5.0 },
            ],
            None,
        );
        let h = separating_halfspace(&p, &[1.0, 0.0]);
        let (a, _) = h.unit_form().unwrap();
        let unit = 1.0 / 2.0_f64.sqrt();
        assert!(linalg::dist(&a, &[unit, unit]) < 1e-12);
        assert!((h.distance(&[1.0, 0.0]) - 6.0 / 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn separating_halfspace_of_strictly_feasible_point_is_all_space() {
        let p = problem(
            shifted(&[0.0, 0.0]),
            vec![ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 }],
            None,
        );
        assert_eq!(separating_halfspace(&p, &[-1.0, 0.0]), Halfspace::AllSpace);
    }

    #[test]
    fn combine_passes_through_when_history_is_all_space() {
        let plus = hs(&[1.0, 0.0], 0.0);
        let got = combine_halfspaces(
            &Halfspace::AllSpace,
            &plus,
            &[0.0, 0.0],
            &[1.0, 0.0],
            1,
            1.0,
        );
        assert_eq!(got, plus);
    }

    #[test]
    fn combine_passes_through_for_parallel_distinct_boundaries() {
        let circ = hs(&[1.0, 0.0], 0.0);
        let plus = hs(&[1.0, 0.0], -1.0);
        let got = combine_halfspaces(&circ, &plus, &[0.0, 0.0], &[1.0, 1.0], 1, 1.0);
        assert_eq!(got, plus);
    }

    #[test]
    fn combine_uses_cone_projection_at_boundary_intersection() {
        let circ = hs(&[1.0, 0.0], 0.0);
        let plus = hs(&[0.0, 1.0], 0.0);
        let got = combine_halfspaces(&circ, &plus, &[0.0, 0.0], &[-1.0, -1.0], 1, 1.0);
        let (a, b) = got.unit_form().unwrap();
        let unit = 1.0 / 2.0_f64.sqrt();
        assert!(linalg::dist(&a, &[unit, unit]) < 1e-12);
        assert!(b.abs() < 1e-12);
    }

    #[test]
    fn combine_passes_through_when_iterate_is_far_from_corner() {
        let circ = hs(&[1.0, 0.0], 0.0);
        let plus = hs(&[0.0, 1.0], 0.0);
        // d(x, corner) = sqrt(2) > alpha/k^2 = 1.
        let got = combine_halfspaces(&circ, &plus, &[1.0, 1.0], &[-1.0, -1.0], 1, 1.0);
        assert_eq!(got, plus);
    }

    #[test]
    fn strictly_feasible_minimizer_terminates_at_first_outer() {
        let p = problem(
            shifted(&[-2.0, 0.0]),
            vec![ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 }],
            None,
        );
        let run = run(&p, &StrongcvxConfig::new(1.0, 50)).unwrap();
        assert!(run.converged);
        assert_eq!(run.outers.len(), 1);
        assert!(!run.outers[0].h_plus_next.is_proper());
    }

    #[test]
    fn affine_corner_is_finished_once_both_faces_are_held() {
        // With two affine constraints the pair eventually holds both faces
        // and the subproblem equals the full problem.
        let p = problem(
            shifted(&[1.0, 0.0]),
            vec![
                ConstraintFunction::Affine { a: vec![1.0, 1.0], b: 0.0 },
                ConstraintFunction::Affine { a: vec![1.0, -1.0], b: 0.0 },
            ],
            Some(Optimum { point: vec![0.0, 0.0], value: 0.5 }),
        );
        let run = run(&p, &StrongcvxConfig::new(1.0, 60)).unwrap();
        assert!(run.converged);
        let last = run.outers.last().unwrap();
        assert!(linalg::dist(&last.x, &[0.0, 0.0]) < 1e-9);
    }

    #[test]
    fn certificates_meet_both_acceptance_conditions() {
        // Lens corner: projecting (2,0) onto the intersection of two unit
        // balls centered at (0, +-0.6) has the corner (0.8, 0) as optimum.
        // The curved boundaries keep the outer loop from finishing finitely.
        let p = problem(
            shifted(&[2.0, 0.0]),
            vec![
                ConstraintFunction::DistanceToBall { center: vec![0.0, 0.6], radius: 1.0 },
                ConstraintFunction::DistanceToBall { center: vec![0.0, -0.6], radius: 1.0 },
            ],
            Some(Optimum { point: vec![0.8, 0.0], value: 0.72 }),
        );
        let cfg = StrongcvxConfig::new(1.0, 60);
        let run = run(&p, &cfg).unwrap();
        assert!(run.trace.len() >= 50);
        for rec in &run.outers {
            assert!(rec.err_bound <= cfg.alpha / (rec.k as f64).powi(2) + 1e-15);
            assert!(rec.d_plus_next >= 2.0 * rec.err_bound || !rec.h_plus_next.is_proper());
        }
        // Gap shrinks substantially over the run.
        let first_gap = 0.72 - run.trace.rows[0].f;
        let last_gap = 0.72 - run.trace.rows.last().unwrap().f;
        assert!(last_gap.abs() < first_gap / 5.0);
    }

    #[test]
    fn performance_estimate_formula_substitution() {
        let (gap, dist) = performance_estimate(0.0, 0.0, 2.0, 1.0, 1.0, 1.0);
        assert_eq!(gap, 0.0);
        assert_eq!(dist, 0.0);
        let (gap, dist) = performance_estimate(0.01, 0.1, 2.0, 1.0, 1.0, 1.0);
        assert!((gap - 0.22).abs() < 1e-15);
        assert!((dist - (0.01 + 0.42_f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn rejects_unsupported_simple_set() {
        let p = Problem::new(
            shifted(&[1.0, 0.0]),
            vec![ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 }],
            SimpleSet::Ball { center: vec![0.0, 0.0], radius: 5.0 },
            10.0,
            None,
            None,
        )
        .unwrap();
        assert!(matches!(
            run(&p, &StrongcvxConfig::new(1.0, 5)),
            Err(StrongcvxError::SimpleSetUnsupported)
        ));
    }

    #[test]
    fn rejects_objective_outside_class() {
        let p = problem(
            ObjectiveFunction::PNormShift { p: 4, dim: 2 },
            vec![ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 }],
            None,
        );
        assert!(matches!(
            run(&p, &StrongcvxConfig::new(1.0, 5)),
            Err(StrongcvxError::NotStronglyConvex)
        ));
    }
}
