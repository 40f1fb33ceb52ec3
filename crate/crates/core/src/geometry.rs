//! Halfspace calculus shared by all solvers: supporting halfspaces from
//! constraint subgradients, distances and projections (single halfspace,
//! intersections via a dual active-set scheme, two-dimensional cones,
//! boundary intersections), and minimization of strongly convex objectives
//! over one or two halfspaces.

use thiserror::Error;

use crate::linalg;
use crate::model::{ConvexFunction, ObjectiveFunction, Quadratic};

/// Slack applied to halfspace membership tests (on normalized distance).
pub const MEMBERSHIP_SLACK: f64 = 1e-12;
/// Residual tolerance for KKT conditions of exact projections.
pub const KKT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("halfspace intersection is infeasible")]
    InfeasibleIntersection,
    #[error("active-set projection exceeded {0} iterations")]
    MaxIterations(usize),
    #[error("the two halfspaces have empty intersection")]
    InfeasiblePair,
    #[error("boundaries are parallel and distinct: empty intersection")]
    EmptyBoundaryIntersection,
    #[error("objective is not strongly convex")]
    NotStronglyConvex,
}

/// A halfspace `{y : <a, y> <= b}` with nonzero normal, or the whole space.
/// The whole-space variant is what a constraint contributes when it is
/// satisfied strictly and has nothing to cut.
#[derive(Debug, Clone, PartialEq)]
pub enum Halfspace {
    AllSpace,
    Proper { normal: Vec<f64>, offset: f64 },
}

impl Halfspace {
    pub fn proper(normal: Vec<f64>, offset: f64) -> Self {
        assert!(linalg::norm(&normal) > 0.0, "halfspace normal must be nonzero");
        Halfspace::Proper { normal, offset }
    }

    pub fn is_proper(&self) -> bool {
        matches!(self, Halfspace::Proper { .. })
    }

    /// Signed distance `(<a,x> - b) / ||a||`; negative inside.
    fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            Halfspace::AllSpace => f64::NEG_INFINITY,
            Halfspace::Proper { normal, offset } => {
                (linalg::dot(normal, x) - offset) / linalg::norm(normal)
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Halfspace::AllSpace => true,
            _ => self.signed_distance(x) <= MEMBERSHIP_SLACK,
        }
    }

    /// Distance from `x` to the halfspace: zero inside.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Halfspace::AllSpace => 0.0,
            _ => self.signed_distance(x).max(0.0),
        }
    }

    /// Euclidean projection onto the halfspace.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Halfspace::AllSpace => x.to_vec(),
            Halfspace::Proper { normal, offset } => {
                let excess = linalg::dot(normal, x) - offset;
                if excess <= 0.0 {
                    x.to_vec()
                } else {
                    linalg::add_scaled(x, -excess / linalg::norm_sq(normal), normal)
                }
            }
        }
    }

    /// Normalized `(a / ||a||, b / ||a||)` for a proper halfspace.
    pub fn unit_form(&self) -> Option<(Vec<f64>, f64)> {
        match self {
            Halfspace::AllSpace => None,
            Halfspace::Proper { normal, offset } => {
                let n = linalg::norm(normal);
                Some((linalg::scale(normal, 1.0 / n), offset / n))
            }
        }
    }
}

/// Supporting halfspace of `{y : g(y) <= 0}` cut at `x`: the linearization
/// `{y : g(x) + <s, y - x> <= 0}` when `g(x) >= 0`, and the whole space when
/// `x` is strictly feasible. The result always contains `{y : g(y) <= 0}`.
pub fn supporting_halfspace<F: ConvexFunction + ?Sized>(g: &F, x: &[f64]) -> Halfspace {
    let v = g.value(x);
    if v < 0.0 {
        return Halfspace::AllSpace;
    }
    let s = g.subgradient(x);
    if linalg::norm(&s) == 0.0 {
        // Only possible at the kink of a distance function, where g(x) = 0
        // and the linearization is vacuous.
        assert!(
            v <= MEMBERSHIP_SLACK,
            "zero subgradient with strictly positive constraint value"
        );
        return Halfspace::AllSpace;
    }
    let offset = linalg::dot(&s, x) - v;
    Halfspace::proper(s, offset)
}

/// Result of the dual active-set projection. `solution` is the projection of
/// the query point onto the intersection when `converged` is set, and the
/// projection onto the boundaries of the active subset otherwise.
#[derive(Debug, Clone)]
pub struct ActiveSetState {
    /// Indices (into the caller's halfspace list) that are active, in the
    /// order they entered.
    pub active: Vec<usize>,
    pub solution: Vec<f64>,
    /// KKT multipliers with respect to the caller's (unnormalized) normals,
    /// parallel to `active`.
    pub multipliers: Vec<f64>,
    /// `||x0 - x||` recorded after each activation; nondecreasing.
    pub distances: Vec<f64>,
    pub converged: bool,
    pub steps: usize,
}

struct NormalizedHalfspace {
    index: usize,
    a: Vec<f64>,
    b: f64,
    scale: f64,
}

/// Projects `x0` onto the intersection of the given halfspaces with a dual
/// active-set scheme: the active Gram system is re-solved densely at every
/// step, the entering constraint is the most violated one (lowest index on
/// ties), and blocked multipliers are driven to zero and dropped.
pub fn project_intersection(
    x0: &[f64],
    hs: &[Halfspace],
) -> Result<ActiveSetState, GeometryError> {
    let cap = 100 * (hs.len() + 1) + 1000;
    let state = active_set_project(x0, hs, cap)?;
    if !state.converged {
        return Err(GeometryError::MaxIterations(cap));
    }
    Ok(state)
}

/// Like [`project_intersection`] but stops after `cap` active-set steps and
/// returns the partial state; the aggregate halfspace of a partial state is
/// still valid (it contains the full intersection).
pub fn project_intersection_capped(
    x0: &[f64],
    hs: &[Halfspace],
    cap: usize,
) -> Result<ActiveSetState, GeometryError> {
    active_set_project(x0, hs, cap)
}

fn active_set_project(
    x0: &[f64],
    hs: &[Halfspace],
    cap: usize,
) -> Result<ActiveSetState, GeometryError> {
    let planes: Vec<NormalizedHalfspace> = hs
        .iter()
        .enumerate()
        .filter_map(|(index, h)| {
            h.unit_form().map(|(a, b)| {
                let scale = match h {
                    Halfspace::Proper { normal, .. } => linalg::norm(normal),
                    Halfspace::AllSpace => unreachable!(),
                };
                NormalizedHalfspace { index, a, b, scale }
            })
        })
        .collect();

    let mut x = x0.to_vec();
    let mut active: Vec<usize> = Vec::new(); // indices into `planes`
    let mut lam: Vec<f64> = Vec::new();
    let mut distances: Vec<f64> = Vec::new();
    let mut steps = 0usize;
    let mut converged = false;

    'outer: loop {
        // Most violated constraint not in the active set.
        let mut entering: Option<(usize, f64)> = None;
        for (pi, plane) in planes.iter().enumerate() {
            if active.contains(&pi) {
                continue;
            }
            let viol = linalg::dot(&plane.a, &x) - plane.b;
            if viol > MEMBERSHIP_SLACK && entering.map_or(true, |(_, best)| viol > best) {
                entering = Some((pi, viol));
            }
        }
        let Some((p, _)) = entering else {
            converged = true;
            break;
        };

        // Dual iteration for constraint p: raise its multiplier, dropping
        // blocking active constraints until p can be made tight.
        loop {
            steps += 1;
            if steps > cap {
                break 'outer;
            }
            let k = active.len();
            let ap = &planes[p].a;
            // r = G^{-1} A_S a_p with G the active Gram matrix.
            let r = if k == 0 {
                Vec::new()
            } else {
                let mut gram = vec![0.0; k * k];
                let mut rhs = vec![0.0; k];
                for i in 0..k {
                    let ai = &planes[active[i]].a;
                    rhs[i] = linalg::dot(ai, ap);
                    for j in 0..k {
                        gram[i * k + j] = linalg::dot(ai, &planes[active[j]].a);
                    }
                }
                linalg::spd_solve(&gram, k, &rhs)
                    .ok_or(GeometryError::InfeasibleIntersection)?
            };
            let mut z = ap.clone();
            for (i, ri) in r.iter().enumerate() {
                z = linalg::add_scaled(&z, -ri, &planes[active[i]].a);
            }
            let z_sq = linalg::norm_sq(&z);
            let viol = linalg::dot(ap, &x) - planes[p].b;

            let t_full = if z_sq > 1e-18 { viol / z_sq } else { f64::INFINITY };
            let mut t_drop = f64::INFINITY;
            let mut drop_idx = None;
            for (i, ri) in r.iter().enumerate() {
                if *ri > 1e-14 {
                    let t = lam[i] / ri;
                    if t < t_drop {
                        t_drop = t;
                        drop_idx = Some(i);
                    }
                }
            }

            if t_full.is_infinite() && t_drop.is_infinite() {
                return Err(GeometryError::InfeasibleIntersection);
            }

            if t_drop < t_full {
                // Partial step: a multiplier reaches zero before p is tight.
                let i = drop_idx.unwrap();
                if z_sq > 1e-18 {
                    x = linalg::add_scaled(&x, -t_drop, &z);
                }
                for (j, rj) in r.iter().enumerate() {
                    lam[j] -= t_drop * rj;
                }
                active.remove(i);
                lam.remove(i);
                continue;
            }

            // Full step: p enters the active set. Re-solve the equality
            // projection from scratch to keep the KKT residual at rounding
            // level regardless of how many steps were taken.
            active.push(p);
            let k = active.len();
            let mut gram = vec![0.0; k * k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let ai = &planes[active[i]].a;
                rhs[i] = linalg::dot(ai, x0) - planes[active[i]].b;
                for j in 0..k {
                    gram[i * k + j] = linalg::dot(ai, &planes[active[j]].a);
                }
            }
            lam = linalg::spd_solve(&gram, k, &rhs)
                .ok_or(GeometryError::InfeasibleIntersection)?;
            x = x0.to_vec();
            for (i, li) in lam.iter().enumerate() {
                x = linalg::add_scaled(&x, -li, &planes[active[i]].a);
            }
            distances.push(linalg::dist(x0, &x));
            break;
        }
    }

    Ok(ActiveSetState {
        active: active.iter().map(|&pi| planes[pi].index).collect(),
        multipliers: active
            .iter()
            .zip(&lam)
            .map(|(&pi, l)| l / planes[pi].scale)
            .collect(),
        solution: x,
        distances,
        converged,
        steps,
    })
}

/// The aggregate halfspace `{x : <x0 - xk, x - xk> <= 0}` of an active-set
/// state: it contains the intersection the state was projecting onto, and
/// `d(x0, aggregate) = ||x0 - xk||`. Degenerates to the whole space when the
/// state never moved off `x0`.
pub fn aggregate_halfspace(x0: &[f64], state: &ActiveSetState) -> Halfspace {
    let xk = &state.solution;
    let normal = linalg::sub(x0, xk);
    if linalg::norm(&normal) <= 1e-15 {
        return Halfspace::AllSpace;
    }
    let offset = linalg::dot(&normal, xk);
    Halfspace::proper(normal, offset)
}

/// Minimizes a strongly convex objective over the intersection of two
/// halfspaces. Quadratic kinds are solved exactly by case analysis over the
/// active boundaries; other strongly convex kinds run projected gradient
/// steps until the gradient-mapping residual falls below `iter_tol`.
pub fn minimize_two_halfspaces(
    f: &ObjectiveFunction,
    h1: &Halfspace,
    h2: &Halfspace,
    iter_tol: f64,
) -> Result<Vec<f64>, GeometryError> {
    if f.mu().is_none() {
        return Err(GeometryError::NotStronglyConvex);
    }
    check_pair_feasible(h1, h2)?;
    match f.quadratic() {
        Some(q) => minimize_quadratic_pair(&q, h1, h2),
        None => minimize_pair_projected_gradient(f, h1, h2, iter_tol),
    }
}

fn check_pair_feasible(h1: &Halfspace, h2: &Halfspace) -> Result<(), GeometryError> {
    let (Some((a1, b1)), Some((a2, b2))) = (h1.unit_form(), h2.unit_form()) else {
        return Ok(());
    };
    // Antiparallel normals bound a slab {-b2 <= <a1, x> <= b1}, empty when
    // b1 + b2 < 0.
    let anti = linalg::norm(&linalg::add_scaled(&a1, 1.0, &a2));
    if anti <= 1e-10 && b1 + b2 < -1e-12 {
        return Err(GeometryError::InfeasiblePair);
    }
    Ok(())
}

fn minimize_quadratic_pair(
    q: &Quadratic,
    h1: &Halfspace,
    h2: &Halfspace,
) -> Result<Vec<f64>, GeometryError> {
    let planes: Vec<(Vec<f64>, f64)> = [h1, h2]
        .iter()
        .filter_map(|h| h.unit_form())
        .collect();
    let neg_c = linalg::scale(&q.linear, -1.0);
    let x_free = q.solve(&neg_c);

    let feasible = |x: &Vec<f64>| {
        planes
            .iter()
            .all(|(a, b)| linalg::dot(a, x) - b <= 1e-10 * (1.0 + linalg::norm(x)))
    };
    let quad_value = |x: &Vec<f64>| 0.5 * linalg::dot(x, &q.apply(x)) + linalg::dot(&q.linear, x);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |x: Vec<f64>| {
        let v = quad_value(&x);
        if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
            best = Some((v, x));
        }
    };

    if feasible(&x_free) {
        consider(x_free.clone());
    }
    // One boundary active.
    for (i, (a, b)) in planes.iter().enumerate() {
        let w = q.solve(a);
        let denom = linalg::dot(a, &w);
        let lambda = (linalg::dot(a, &x_free) - b) / denom;
        if lambda < -1e-12 {
            continue;
        }
        let x = linalg::add_scaled(&x_free, -lambda, &w);
        let other_ok = planes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .all(|(_, (a2, b2))| linalg::dot(a2, &x) - b2 <= 1e-10 * (1.0 + linalg::norm(&x)));
        if other_ok {
            consider(x);
        }
    }
    // Both boundaries active: 2x2 dual system on the transformed Gram.
    if planes.len() == 2 {
        let w1 = q.solve(&planes[0].0);
        let w2 = q.solve(&planes[1].0);
        let g = [
            linalg::dot(&planes[0].0, &w1),
            linalg::dot(&planes[0].0, &w2),
            linalg::dot(&planes[1].0, &w1),
            linalg::dot(&planes[1].0, &w2),
        ];
        let det = g[0] * g[3] - g[1] * g[2];
        if det.abs() > 1e-12 * g[0].abs() * g[3].abs() {
            let r1 = linalg::dot(&planes[0].0, &x_free) - planes[0].1;
            let r2 = linalg::dot(&planes[1].0, &x_free) - planes[1].1;
            let l1 = (r1 * g[3] - r2 * g[1]) / det;
            let l2 = (g[0] * r2 - g[2] * r1) / det;
            if l1 >= -1e-12 && l2 >= -1e-12 {
                let mut x = linalg::add_scaled(&x_free, -l1, &w1);
                x = linalg::add_scaled(&x, -l2, &w2);
                consider(x);
            }
        }
    }

    best.map(|(_, x)| x).ok_or(GeometryError::InfeasiblePair)
}

/// Minimizes a quadratic objective over the intersection of arbitrarily many
/// halfspaces, by projecting in the metric induced by the quadratic term.
/// Used by the keep-more-halfspaces acceleration.
pub fn minimize_quadratic_over_halfspaces(
    f: &ObjectiveFunction,
    hs: &[Halfspace],
) -> Result<Vec<f64>, GeometryError> {
    let q = f.quadratic().ok_or(GeometryError::NotStronglyConvex)?;
    let x_free = f.unconstrained_minimizer();
    match &q.m {
        crate::model::QuadMatrix::ScaledIdentity(_) => {
            Ok(project_intersection(&x_free, hs)?.solution)
        }
        crate::model::QuadMatrix::Dense(a) => {
            let n = q.dim();
            let l = linalg::cholesky_factor(a, n).ok_or(GeometryError::NotStronglyConvex)?;
            // Under y = L'x the objective is 0.5||y - y0||^2 up to a
            // constant, with y0 = -L^{-1} c, and each halfspace transforms
            // to {y : <L^{-1} a, y> <= b}.
            let y0 = linalg::scale(&linalg::forward_subst(&l, n, &q.linear), -1.0);
            let transformed: Vec<Halfspace> = hs
                .iter()
                .map(|h| match h {
                    Halfspace::AllSpace => Halfspace::AllSpace,
                    Halfspace::Proper { normal, offset } => Halfspace::proper(
                        linalg::forward_subst(&l, n, normal),
                        *offset,
                    ),
                })
                .collect();
            let y = project_intersection(&y0, &transformed)?.solution;
            Ok(linalg::backward_subst_transpose(&l, n, &y))
        }
    }
}

/// Projected-gradient fallback for the two-halfspace subproblem; also used
/// as an independent route to cross-check the exact quadratic solver.
pub(crate) fn minimize_pair_projected_gradient(
    f: &ObjectiveFunction,
    h1: &Halfspace,
    h2: &Halfspace,
    iter_tol: f64,
) -> Result<Vec<f64>, GeometryError> {
    let lipschitz = f.lipschitz().ok_or(GeometryError::NotStronglyConvex)?;
    let pair = [h1.clone(), h2.clone()];
    let mut x = project_intersection(&f.unconstrained_minimizer(), &pair)?.solution;
    let cap = 1_000_000usize;
    for _ in 0..cap {
        let g = f.gradient(&x);
        let step = linalg::add_scaled(&x, -1.0 / lipschitz, &g);
        let next = project_intersection(&step, &pair)?.solution;
        let residual = linalg::dist(&x, &next);
        x = next;
        if residual <= iter_tol {
            return Ok(x);
        }
    }
    Err(GeometryError::MaxIterations(cap))
}

/// Projection of `v` onto the cone `{l1 n1 + l2 n2 : l >= 0}`, by case
/// analysis over the face the projection lands on.
pub fn project_cone2(v: &[f64], n1: &[f64], n2: &[f64]) -> Vec<f64> {
    assert!(linalg::norm(n1) > 0.0 && linalg::norm(n2) > 0.0, "cone generators must be nonzero");
    let mut best = vec![0.0; v.len()];
    let mut best_d = linalg::norm_sq(v);
    let mut consider = |cand: Vec<f64>| {
        let d = linalg::norm_sq(&linalg::sub(v, &cand));
        if d < best_d {
            best_d = d;
            best = cand;
        }
    };
    let l1 = linalg::dot(v, n1) / linalg::norm_sq(n1);
    if l1 >= 0.0 {
        consider(linalg::scale(n1, l1));
    }
    let l2 = linalg::dot(v, n2) / linalg::norm_sq(n2);
    if l2 >= 0.0 {
        consider(linalg::scale(n2, l2));
    }
    let g11 = linalg::norm_sq(n1);
    let g12 = linalg::dot(n1, n2);
    let g22 = linalg::norm_sq(n2);
    let det = g11 * g22 - g12 * g12;
    if det > 1e-14 * g11 * g22 {
        let r1 = linalg::dot(v, n1);
        let r2 = linalg::dot(v, n2);
        let l1 = (r1 * g22 - r2 * g12) / det;
        let l2 = (g11 * r2 - g12 * r1) / det;
        if l1 >= 0.0 && l2 >= 0.0 {
            consider(linalg::add_scaled(&linalg::scale(n1, l1), l2, n2));
        }
    }
    best
}

/// Projection of `x` onto the affine set `bd(h1) ∩ bd(h2)` (both halfspace
/// boundaries), via the 2x2 Gram system. Coincident boundaries reduce to a
/// single hyperplane; parallel distinct boundaries are an error.
pub fn project_boundary_intersection(
    x: &[f64],
    h1: &Halfspace,
    h2: &Halfspace,
) -> Result<Vec<f64>, GeometryError> {
    let (a1, b1) = h1.unit_form().expect("boundary projection requires proper halfspaces");
    let (a2, b2) = h2.unit_form().expect("boundary projection requires proper halfspaces");
    let g12 = linalg::dot(&a1, &a2);
    let det = 1.0 - g12 * g12;
    if det <= 1e-12 {
        // Parallel normals: coincident boundaries project like one plane.
        let coincident = if g12 > 0.0 {
            (b1 - b2).abs() <= 1e-10
        } else {
            (b1 + b2).abs() <= 1e-10
        };
        if coincident {
            let r = linalg::dot(&a1, x) - b1;
            return Ok(linalg::add_scaled(x, -r, &a1));
        }
        return Err(GeometryError::EmptyBoundaryIntersection);
    }
    let r1 = linalg::dot(&a1, x) - b1;
    let r2 = linalg::dot(&a2, x) - b2;
    let l1 = (r1 - r2 * g12) / det;
    let l2 = (r2 - r1 * g12) / det;
    let y = linalg::add_scaled(x, -l1, &a1);
    Ok(linalg::add_scaled(&y, -l2, &a2))
}
