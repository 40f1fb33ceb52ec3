//! Generalized Haugazeau iteration for strongly convex objectives: each
//! outer step intersects the "history" halfspace on which the current
//! iterate is optimal with a fresh separating halfspace of the constraints,
//! and minimizes the objective over that pair.
//!
//! Two variants: the classic rule picks the constraint whose supporting
//! halfspace is farthest from the iterate; the sweep rule walks through all
//! constraints once per outer iteration, refreshing the history halfspace
//! after every inner minimize. An opt-in acceleration keeps a pool of recent
//! separating halfspaces and minimizes over all of them (quadratic
//! objectives only).

use thiserror::Error;

use crate::geometry::{self, GeometryError, Halfspace};
use crate::linalg;
use crate::model::{ConvexFunction, ObjectiveFunction, Problem};
use crate::trace::{IterateTrace, StepKind, TraceRow};

#[derive(Debug, Error)]
pub enum HaugazeauError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("objective must be strongly convex (mu > 0)")]
    NotStronglyConvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Farthest supporting halfspace per outer iteration.
    Classic,
    /// Per-constraint sweep with history refresh after each inner minimize.
    Sweep,
}

#[derive(Debug, Clone)]
pub struct HaugazeauConfig {
    pub variant: Variant,
    pub max_iters: usize,
    /// Tolerance for the iterative two-halfspace subproblem (only reached for
    /// non-quadratic objectives).
    pub inner_tol: f64,
    /// Stop once `f* - f(x_k) <= stop_gap`, when the problem carries a known
    /// optimum.
    pub stop_gap: Option<f64>,
    /// Keep this many recent separating halfspaces in addition to the
    /// history/separating pair and minimize over all of them. Requires a
    /// quadratic objective. Zero disables the acceleration.
    pub extra_halfspaces: usize,
    /// Start iterate override (default: the unconstrained minimizer). The
    /// history halfspace is initialized from the objective gradient there.
    pub start: Option<Vec<f64>>,
}

impl HaugazeauConfig {
    pub fn new(variant: Variant, max_iters: usize) -> Self {
        Self {
            variant,
            max_iters,
            inner_tol: 1e-12,
            stop_gap: None,
            extra_halfspaces: 0,
            start: None,
        }
    }
}

/// History halfspace `{y : <-f'(x), y - x> <= 0}`: the set on which `x`
/// minimizes `f`. Degenerates to the whole space at the unconstrained
/// minimizer.
pub fn gradient_halfspace(f: &ObjectiveFunction, x: &[f64]) -> Halfspace {
    let g = f.gradient(x);
    if linalg::norm(&g) <= 1e-14 * (1.0 + linalg::norm(x)) {
        return Halfspace::AllSpace;
    }
    let normal = linalg::scale(&g, -1.0);
    let offset = linalg::dot(&normal, x);
    Halfspace::proper(normal, offset)
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub x_next: Vec<f64>,
    pub h_circ_next: Halfspace,
    /// The separating halfspace used (classic) or the last one built (sweep).
    pub h_plus: Halfspace,
    /// Distance from the incoming iterate to the separating halfspace.
    pub dist: f64,
    /// Inner minimizations performed.
    pub inner: usize,
    pub converged: bool,
}

fn farthest_supporting(p: &Problem, x: &[f64]) -> (Halfspace, f64) {
    let mut best = (Halfspace::AllSpace, 0.0);
    let mut best_d = f64::NEG_INFINITY;
    for c in &p.constraints {
        let h = geometry::supporting_halfspace(c, x);
        if !h.is_proper() {
            continue;
        }
        let d = h.distance(x);
        if d > best_d {
            best_d = d;
            best = (h, d);
        }
    }
    best
}

/// One outer iteration of the classic variant.
pub fn classic_step(
    p: &Problem,
    cfg: &HaugazeauConfig,
    x: &[f64],
    h_circ: &Halfspace,
    pool: &mut Vec<Halfspace>,
) -> Result<StepOutcome, HaugazeauError> {
    let f = &p.objective;
    let (h_plus, dist) = farthest_supporting(p, x);
    if !h_plus.is_proper() {
        // Every constraint is strictly satisfied: x minimizes f over a
        // superset of the feasible set and is feasible itself.
        debug_assert!(p.max_violation(x) <= 1e-9);
        return Ok(StepOutcome {
            x_next: x.to_vec(),
            h_circ_next: h_circ.clone(),
            h_plus,
            dist: 0.0,
            inner: 0,
            converged: true,
        });
    }

    let x_next = if cfg.extra_halfspaces > 0 {
        let mut all = vec![h_circ.clone(), h_plus.clone()];
        all.extend(pool.iter().cloned());
        let x = geometry::minimize_quadratic_over_halfspaces(f, &all)?;
        pool.push(h_plus.clone());
        if pool.len() > cfg.extra_halfspaces {
            pool.remove(0);
        }
        x
    } else {
        geometry::minimize_two_halfspaces(f, h_circ, &h_plus, cfg.inner_tol)?
    };

    // A fixed point with a feasible iterate is optimal: nothing can change
    // on later iterations.
    let converged =
        linalg::dist(&x_next, x) <= 1e-15 * (1.0 + linalg::norm(x)) && p.max_violation(x) <= 1e-9;

    let h_circ_next = gradient_halfspace(f, &x_next);
    Ok(StepOutcome {
        x_next,
        h_circ_next,
        h_plus,
        dist,
        inner: 1,
        converged,
    })
}

/// One outer iteration of the sweep variant: supporting halfspaces are built
/// at the running inner point, and the history halfspace is rebuilt after
/// every inner minimize.
pub fn sweep_step(
    p: &Problem,
    cfg: &HaugazeauConfig,
    x: &[f64],
    h_circ: &Halfspace,
) -> Result<StepOutcome, HaugazeauError> {
    let f = &p.objective;
    let mut y = x.to_vec();
    let mut h = h_circ.clone();
    let mut last_plus = Halfspace::AllSpace;
    let mut first_dist = 0.0;
    let mut any_proper = false;
    let mut inner = 0usize;
    for c in &p.constraints {
        let h_plus = geometry::supporting_halfspace(c, &y);
        if !h_plus.is_proper() {
            continue;
        }
        if !any_proper {
            first_dist = h_plus.distance(&y);
            any_proper = true;
        }
        y = geometry::minimize_two_halfspaces(f, &h, &h_plus, cfg.inner_tol)?;
        h = gradient_halfspace(f, &y);
        last_plus = h_plus;
        inner += 1;
    }
    if !any_proper {
        debug_assert!(p.max_violation(&y) <= 1e-9);
        return Ok(StepOutcome {
            x_next: y,
            h_circ_next: h,
            h_plus: last_plus,
            dist: 0.0,
            inner,
            converged: true,
        });
    }
    let converged =
        linalg::dist(&y, x) <= 1e-15 * (1.0 + linalg::norm(x)) && p.max_violation(x) <= 1e-9;
    Ok(StepOutcome {
        x_next: y,
        h_circ_next: h,
        h_plus: last_plus,
        dist: first_dist,
        inner,
        converged,
    })
}

#[derive(Debug, Clone)]
pub struct HaugazeauRun {
    pub trace: IterateTrace,
    /// `x_0, x_1, ..` including the start iterate.
    pub iterates: Vec<Vec<f64>>,
    /// Per iteration: the history halfspace it started from and the
    /// separating halfspace it used.
    pub halfspaces: Vec<(Halfspace, Halfspace)>,
    pub converged: bool,
}

/// Runs the generalized Haugazeau iteration. Trace row `k` describes the
/// iterate produced by outer iteration `k` (so `f` is nondecreasing down the
/// trace), with `dist` the distance to the separating halfspace it used.
pub fn run(p: &Problem, cfg: &HaugazeauConfig) -> Result<HaugazeauRun, HaugazeauError> {
    let f = &p.objective;
    if f.mu().is_none() {
        return Err(HaugazeauError::NotStronglyConvex);
    }
    let (mut x, mut h_circ) = match &cfg.start {
        Some(s) => (s.clone(), gradient_halfspace(f, s)),
        None => (f.unconstrained_minimizer(), Halfspace::AllSpace),
    };
    let mut trace = IterateTrace::new();
    let mut iterates = vec![x.clone()];
    let mut halfspaces = Vec::new();
    let mut pool: Vec<Halfspace> = Vec::new();
    let mut converged = false;

    for k in 0..cfg.max_iters {
        let out = match cfg.variant {
            Variant::Classic => classic_step(p, cfg, &x, &h_circ, &mut pool)?,
            Variant::Sweep => sweep_step(p, cfg, &x, &h_circ)?,
        };
        halfspaces.push((h_circ.clone(), out.h_plus.clone()));
        let step = if out.h_plus.is_proper() {
            StepKind::Feasibility
        } else {
            StepKind::Objective
        };
        trace.push(TraceRow {
            k,
            f: f.value(&out.x_next),
            viol: p.max_violation(&out.x_next),
            step,
            h: None,
            dist: out.dist,
            sweep_norm_sq: None,
            inner: Some(out.inner),
        });
        x = out.x_next;
        h_circ = out.h_circ_next;
        iterates.push(x.clone());
        if out.converged {
            converged = true;
            break;
        }
        if let (Some(tol), Some(opt)) = (cfg.stop_gap, &p.optimum) {
            if opt.value - f.value(&x) <= tol {
                converged = true;
                break;
            }
        }
    }

    Ok(HaugazeauRun {
        trace,
        iterates,
        halfspaces,
        converged,
    })
}

/// A pair violating the supporting-halfspace triangle comparison
/// `d(y, H_y) <= ||y - z|| + d(z, H_z)`.
#[derive(Debug, Clone)]
pub struct TriangularViolation {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub d_y: f64,
    pub d_z: f64,
    pub separation: f64,
}

/// Evaluates the triangle comparison for each `(y, z)` pair with this
/// module's subgradient selection and returns the violating pairs. Distance
/// functions never violate it; general convex functions can.
pub fn check_triangular<F: ConvexFunction + ?Sized>(
    g: &F,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Vec<TriangularViolation> {
    let mut out = Vec::new();
    for (y, z) in pairs {
        let d_y = geometry::supporting_halfspace(g, y).distance(y);
        let d_z = geometry::supporting_halfspace(g, z).distance(z);
        let separation = linalg::dist(y, z);
        if d_y > separation + d_z + 1e-9 {
            out.push(TriangularViolation {
                y: y.clone(),
                z: z.clone(),
                d_y,
                d_z,
                separation,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstraintFunction, Optimum, SimpleSet};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bap(x0: &[f64], constraints: Vec<ConstraintFunction>, opt: Option<Optimum>) -> Problem {
        Problem::new(
            ObjectiveFunction::ShiftedQuadratic { x0: x0.to_vec() },
            constraints,
            SimpleSet::AllSpace,
            4.0,
            None,
            opt,
        )
        .unwrap()
    }

    #[test]
    fn single_affine_constraint_is_solved_in_one_step() {
        let p = bap(
            &[2.0, 0.0],
            vec![ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 }],
            Some(Optimum { point: vec![0.0, 0.0], value: 2.0 }),
        );
        let run = run(&p, &HaugazeauConfig::new(Variant::Classic, 5)).unwrap();
        assert!(linalg::dist(&run.iterates[1], &[0.0, 0.0]) < 1e-12);
        // Subsequent iterations never move and the run reports convergence.
        assert!(run.converged);
        assert!(linalg::dist(run.iterates.last().unwrap(), &[0.0, 0.0]) < 1e-12);
    }

    #[test]
    fn strictly_feasible_iterate_converges_immediately() {
        let p = bap(
            &[-3.0, 0.0],
            vec![ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 }],
            None,
        );
        let run = run(&p, &HaugazeauConfig::new(Variant::Classic, 5)).unwrap();
        assert!(run.converged);
        assert_eq!(run.trace.len(), 1);
        assert_eq!(run.trace.rows[0].step, StepKind::Objective);
    }

    #[test]
    fn wedge_first_step_projects_onto_chosen_face() {
        // Wedge faces at angle pi/4; listing the lower face first makes the
        // lowest-index tie-break pick it, landing on (0.5, -0.5).
        let p = bap(
            &[1.0, 0.0],
            vec![
                ConstraintFunction::Affine { a: vec![1.0, 1.0], b: 0.0 },
                ConstraintFunction::Affine { a: vec![1.0, -1.0], b: 0.0 },
            ],
            Some(Optimum { point: vec![0.0, 0.0], value: 0.5 }),
        );
        let cfg = HaugazeauConfig::new(Variant::Classic, 1);
        let run = run(&p, &cfg).unwrap();
        let half = 2.0_f64.sqrt() / 2.0;
        assert!((run.trace.rows[0].dist - half).abs() < 1e-12);
        assert!(linalg::dist(&run.iterates[1], &[0.5, -0.5]) < 1e-12);
    }

    #[test]
    fn f_is_nondecreasing_and_below_optimum() {
        let p = bap(
            &[1.0, 0.0],
            vec![
                ConstraintFunction::Affine { a: vec![1.0, 1.0], b: 0.0 },
                ConstraintFunction::Affine { a: vec![1.0, -1.0], b: 0.0 },
            ],
            Some(Optimum { point: vec![0.0, 0.0], value: 0.5 }),
        );
        let run = run(&p, &HaugazeauConfig::new(Variant::Classic, 200)).unwrap();
        let f_star = 0.5;
        let mut prev = f64::NEG_INFINITY;
        for row in &run.trace.rows {
            assert!(row.f >= prev - 1e-12);
            assert!(row.f <= f_star + 1e-9);
            prev = row.f;
        }
        // Iterate-error bound from strong convexity.
        let mu = 1.0;
        for (i, x) in run.iterates.iter().enumerate().skip(1) {
            let gap = f_star - p.objective.value(x);
            assert!(
                linalg::dist(x, &[0.0, 0.0]) <= (2.0 / mu * gap.max(0.0)).sqrt() + 1e-9,
                "iterate {i}"
            );
        }
    }

    #[test]
    fn feasible_set_stays_inside_both_halfspaces() {
        let p = bap(
            &[1.0, 0.2],
            vec![
                ConstraintFunction::Affine { a: vec![1.0, 1.0], b: 0.0 },
                ConstraintFunction::Affine { a: vec![1.0, -1.0], b: 0.0 },
            ],
            None,
        );
        let run = run(&p, &HaugazeauConfig::new(Variant::Classic, 50)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            // Feasible points of the wedge u <= -|v|.
            let v: f64 = rng.random_range(-2.0..2.0);
            let u: f64 = -v.abs() - rng.random_range(0.0..2.0);
            let c = vec![u, v];
            for (h_circ, h_plus) in &run.halfspaces {
                assert!(h_circ.contains(&c));
                assert!(h_plus.contains(&c));
            }
        }
    }

    #[test]
    fn sweep_variant_matches_classic_for_single_constraint() {
        let constraints = vec![ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 }];
        let p = bap(&[2.0, 1.0], constraints, None);
        let classic = run(&p, &HaugazeauConfig::new(Variant::Classic, 10)).unwrap();
        let sweep = run(&p, &HaugazeauConfig::new(Variant::Sweep, 10)).unwrap();
        for (a, b) in classic.iterates.iter().zip(&sweep.iterates) {
            assert!(linalg::dist(a, b) < 1e-12);
        }
    }

    #[test]
    fn sweep_with_inactive_constraints_keeps_iterate() {
        let p = bap(
            &[-3.0, 0.0],
            vec![
                ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 },
                ConstraintFunction::Affine { a: vec![0.0, 1.0], b: 5.0 },
            ],
            None,
        );
        let cfg = HaugazeauConfig::new(Variant::Sweep, 3);
        let run = run(&p, &cfg).unwrap();
        assert!(run.converged);
        assert!(linalg::dist(&run.iterates[1], &[-3.0, 0.0]) < 1e-15);
    }

    #[test]
    fn sweep_outer_iteration_dominates_one_classic_step() {
        // One sweep iteration visits both wedge faces, so its objective
        // value is at least the single classic step's.
        let constraints = vec![
            ConstraintFunction::Affine { a: vec![1.0, 1.0], b: 0.0 },
            ConstraintFunction::Affine { a: vec![1.0, -1.0], b: 0.0 },
        ];
        let p = bap(&[1.0, 0.0], constraints, None);
        let classic = run(&p, &HaugazeauConfig::new(Variant::Classic, 1)).unwrap();
        let sweep = run(&p, &HaugazeauConfig::new(Variant::Sweep, 1)).unwrap();
        assert!(sweep.trace.rows[0].f >= classic.trace.rows[0].f - 1e-12);
    }

    #[test]
    fn keeping_more_halfspaces_never_hurts_the_gap() {
        let constraints = vec![
            ConstraintFunction::Affine { a: vec![1.0, 1.0], b: 0.0 },
            ConstraintFunction::Affine { a: vec![1.0, -1.0], b: 0.0 },
        ];
        let p = bap(&[1.0, 0.0], constraints, None);
        let plain = run(&p, &HaugazeauConfig::new(Variant::Classic, 30)).unwrap();
        let mut cfg = HaugazeauConfig::new(Variant::Classic, 30);
        cfg.extra_halfspaces = 4;
        let multi = run(&p, &cfg).unwrap();
        let last_plain = plain.trace.rows.last().unwrap().f;
        let last_multi = multi.trace.rows.last().unwrap().f;
        assert!(last_multi >= last_plain - 1e-10);
        let mut prev = f64::NEG_INFINITY;
        for row in &multi.trace.rows {
            assert!(row.f >= prev - 1e-12);
            prev = row.f;
        }
    }

    #[test]
    fn rejects_non_strongly_convex_objective() {
        let p = Problem::new(
            ObjectiveFunction::PNormShift { p: 4, dim: 2 },
            vec![ConstraintFunction::Affine { a: vec![1.0, 1.0], b: 0.0 }],
            SimpleSet::AllSpace,
            4.0,
            None,
            None,
        )
        .unwrap();
        assert!(matches!(
            run(&p, &HaugazeauConfig::new(Variant::Classic, 5)),
            Err(HaugazeauError::NotStronglyConvex)
        ));
    }

    #[test]
    fn triangular_check_passes_for_distance_and_affine_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ball = ConstraintFunction::DistanceToBall { center: vec![0.3, -0.2], radius: 1.0 };
        let affine = ConstraintFunction::Affine { a: vec![0.8, -0.6], b: 0.4 };
        let mut pairs = Vec::new();
        for _ in 0..500 {
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
            let z: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
            pairs.push((y, z));
        }
        assert!(check_triangular(&ball, &pairs).is_empty());
        assert!(check_triangular(&affine, &pairs).is_empty());
    }

    /// 1-D max of two affine pieces; not in the constraint taxonomy, which
    /// is exactly why the checker is generic.
    struct MaxOfTwoAffine;

    impl ConvexFunction for MaxOfTwoAffine {
        fn value(&self, x: &[f64]) -> f64 {
            x[0].max(2.0 * x[0] - 1.0)
        }
        fn subgradient(&self, x: &[f64]) -> Vec<f64> {
            if 2.0 * x[0] - 1.0 > x[0] {
                vec![2.0]
            } else {
                vec![1.0]
            }
        }
    }

    #[test]
    fn triangular_check_flags_piecewise_affine_counterexample() {
        let pairs = vec![(vec![0.9], vec![1.1])];
        let v = check_triangular(&MaxOfTwoAffine, &pairs);
        assert_eq!(v.len(), 1);
        assert!((v[0].d_y - 0.9).abs() < 1e-12);
        assert!((v[0].d_z - 0.6).abs() < 1e-12);
        assert!((v[0].separation - 0.2).abs() < 1e-12);
    }
}
