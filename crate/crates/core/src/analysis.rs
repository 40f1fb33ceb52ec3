//! Closed-form references and study runners used to verify the solvers:
//! the halfspace-revelation lower-bound family and its exact subproblem
//! values, the two-halfspace projection recurrence, the no-regularity family
//! with arbitrarily slow convergence, sequence bounds, and an empirical
//! estimator for the linear-regularity constant.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{self, GeometryError, Halfspace};
use crate::haugazeau::{self, HaugazeauConfig, HaugazeauRun, Variant};
use crate::linalg;
use crate::model::{ConstraintFunction, ObjectiveFunction, Optimum, Problem, SimpleSet};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid constraint order: {0}")]
    InvalidOrder(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("no infeasible samples drawn; enlarge the sampling region")]
    NoInfeasibleSamples,
    #[error("regularity estimation requires polyhedral constraints or a single distance constraint")]
    UnsupportedConstraints,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Haugazeau(#[from] haugazeau::HaugazeauError),
}

/// Parameters of the lower-bound family: minimize `||e1 - x||_p^p` subject
/// to `<e1 + eps*e_{j+1}, x> <= 0` for `j = 1..n-1`.
#[derive(Debug, Clone, Copy)]
pub struct ModelProblemParams {
    pub n: usize,
    pub p: u32,
    pub eps: f64,
}

impl ModelProblemParams {
    pub fn new(n: usize, p: u32, eps: f64) -> Result<Self, AnalysisError> {
        if n < 2 {
            return Err(AnalysisError::InvalidParams("n must be >= 2".into()));
        }
        if p < 2 || p % 2 != 0 {
            return Err(AnalysisError::InvalidParams(
                "p must be a positive even integer".into(),
            ));
        }
        if !(eps > 0.0) {
            return Err(AnalysisError::InvalidParams("eps must be positive".into()));
        }
        Ok(Self { n, p, eps })
    }

    /// `theta = eps^{-p}`.
    pub fn theta(&self) -> f64 {
        self.eps.powi(-(self.p as i32))
    }
}

/// Builds the lower-bound family instance with its known optimum attached.
pub fn build_model_problem(params: &ModelProblemParams) -> Problem {
    let n = params.n;
    let constraints: Vec<ConstraintFunction> = (0..n - 1)
        .map(|j| {
            let mut a = vec![0.0; n];
            a[0] = 1.0;
            a[j + 1] = params.eps;
            ConstraintFunction::Affine { a, b: 0.0 }
        })
        .collect();
    let objective = ObjectiveFunction::PNormShift { p: params.p, dim: n };
    // Optimum of the full (k = n-1) subproblem: first coordinate alpha,
    // the constrained coordinates -alpha/eps, all constraints tight.
    let alpha = reduced_minimizer(n - 1, params);
    let mut point = vec![-alpha / params.eps; n];
    point[0] = alpha;
    let value = objective.value(&point);
    Problem::new(
        objective,
        constraints,
        SimpleSet::AllSpace,
        4.0,
        None,
        Some(Optimum { point, value }),
    )
    .expect("lower-bound family instance is always valid")
}

/// Exact subproblem value when `k` of the constraints are active:
/// `f_k = k*theta / (1 + (k*theta)^{1/(p-1)})^{p-1}`.
pub fn lower_bound_fk(k: usize, params: &ModelProblemParams) -> f64 {
    let p = params.p as f64;
    let kt = k as f64 * params.theta();
    kt / (1.0 + kt.powf(1.0 / (p - 1.0))).powf(p - 1.0)
}

/// Minimizer of the reduced scalar program `(1-a)^p + k*theta*a^p`.
fn reduced_minimizer(k: usize, params: &ModelProblemParams) -> f64 {
    let p = params.p as f64;
    let kt = k as f64 * params.theta();
    1.0 / (1.0 + kt.powf(1.0 / (p - 1.0)))
}

/// Runs the constraint-revelation study: for each prefix of `order`,
/// numerically minimizes the objective over the revealed halfspaces and
/// returns the optimal values. The `p = 2` case goes through the active-set
/// projection; larger even `p` runs a safeguarded Newton iteration on the
/// symmetry-reduced scalar program.
pub fn run_analyze_lower_bdd(
    params: &ModelProblemParams,
    order: &[usize],
) -> Result<Vec<f64>, AnalysisError> {
    Ok(run_analyze_lower_bdd_points(params, order)?
        .into_iter()
        .map(|(v, _)| v)
        .collect())
}

/// Like [`run_analyze_lower_bdd`] but also returns the subproblem
/// minimizers.
pub fn run_analyze_lower_bdd_points(
    params: &ModelProblemParams,
    order: &[usize],
) -> Result<Vec<(f64, Vec<f64>)>, AnalysisError> {
    let m = params.n - 1;
    let mut seen = vec![false; m];
    for &j in order {
        if j >= m {
            return Err(AnalysisError::InvalidOrder(format!(
                "constraint index {j} out of range (m = {m})"
            )));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(AnalysisError::InvalidOrder(format!("duplicate index {j}")));
        }
    }

    let problem = build_model_problem(params);
    let mut e1 = vec![0.0; params.n];
    e1[0] = 1.0;
    let mut out = Vec::with_capacity(order.len());
    for k in 1..=order.len() {
        let entry = if params.p == 2 {
            let planes: Vec<Halfspace> = order[..k]
                .iter()
                .map(|&j| {
                    let (a, b) = problem.constraints[j].as_halfspace().unwrap();
                    Halfspace::proper(a, b)
                })
                .collect();
            let x = geometry::project_intersection(&e1, &planes)?.solution;
            (problem.objective.value(&x), x)
        } else {
            let alpha = newton_reduced_minimizer(k, params);
            let mut x = vec![0.0; params.n];
            x[0] = alpha;
            for &j in &order[..k] {
                x[j + 1] = -alpha / params.eps;
            }
            (problem.objective.value(&x), x)
        };
        out.push(entry);
    }
    Ok(out)
}

/// Safeguarded Newton on `g'(a) = -p(1-a)^{p-1} + k*theta*p*a^{p-1} = 0`
/// over `(0, 1)`; `g` is strictly convex there so bisection brackets are
/// preserved.
fn newton_reduced_value(k: usize, params: &ModelProblemParams) -> f64 {
    let p = params.p as i32;
    let pf = p as f64;
    let kt = k as f64 * params.theta();
    let dg = |a: f64| -pf * (1.0 - a).powi(p - 1) + kt * pf * a.powi(p - 1);
    let d2g = |a: f64| {
        pf * (pf - 1.0) * (1.0 - a).powi(p - 2) + kt * pf * (pf - 1.0) * a.powi(p - 2)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut a = 0.5;
    for _ in 0..200 {
        let g1 = dg(a);
        if g1 > 0.0 {
            hi = a;
        } else {
            lo = a;
        }
        let mut next = a - g1 / d2g(a);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - a).abs() <= 1e-16 {
            a = next;
            break;
        }
        a = next;
    }
    (1.0 - a).powi(p) + kt * a.powi(p)
}

/// Upper bound `1 / (1/delta0 + eps_bar * k)` for sequences with the
/// quadratic-decrement recurrence.
pub fn seq_upper_bound(delta0: f64, eps_bar: f64, k: usize) -> f64 {
    1.0 / (1.0 / delta0 + eps_bar * k as f64)
}

/// Lower bound `(2 p gamma (k + m2))^{-1/p}` for strictly decreasing
/// sequences with `a_{k+1} >= a_k (1 - gamma a_k^p)`.
pub fn seq_lower_bound(k: usize, p: f64, gamma: f64, m2: f64) -> f64 {
    (2.0 * p * gamma * (k as f64 + m2)).powf(-1.0 / p)
}

/// Searches the smallest `m2` in `{0, 1, 10, 100, .., 1e6}` for which every
/// element of `seq` (interpreted as `a_1, a_2, ..`) dominates the
/// corresponding lower bound.
pub fn fit_seq_lower_bound_m2(seq: &[f64], p: f64, gamma: f64) -> Option<f64> {
    let candidates = [0.0, 1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6];
    candidates.into_iter().find(|&m2| {
        seq.iter()
            .enumerate()
            .all(|(i, &a)| a >= seq_lower_bound(i + 1, p, gamma, m2))
    })
}

/// Parameters of the two-halfspace projection study: wedge faces whose
/// boundary rays sit at angle `theta` either side of the anchor direction.
#[derive(Debug, Clone, Copy)]
pub struct TwoHalfspaceParams {
    pub theta: f64,
}

impl TwoHalfspaceParams {
    pub fn new(theta: f64) -> Result<Self, AnalysisError> {
        if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
            return Err(AnalysisError::InvalidParams(
                "theta must lie in (0, pi/2)".into(),
            ));
        }
        Ok(Self { theta })
    }
}

/// One step of the wedge recurrence
/// `a_{k+1} = a_k (cos t - a_k) / (cos t - a_k cos 2t)`, valid for
/// `0 <= a_k < cos t`.
pub fn two_halfspace_recurrence(alpha_k: f64, theta: f64) -> Result<f64, AnalysisError> {
    let c = theta.cos();
    if !(0.0..c).contains(&alpha_k) {
        return Err(AnalysisError::OutOfRange(format!(
            "alpha = {alpha_k} outside [0, cos theta = {c})"
        )));
    }
    Ok(alpha_k * (c - alpha_k) / (c - alpha_k * (2.0 * theta).cos()))
}

/// The projection problem behind the recurrence: project `(1, 0)` onto the
/// wedge `{(u, v) : u tan t <= v <= -u tan t}`, whose apex at the origin is
/// the solution.
pub fn build_two_halfspace_bap(params: &TwoHalfspaceParams) -> Problem {
    let t = params.theta.tan();
    Problem::new(
        ObjectiveFunction::ShiftedQuadratic { x0: vec![1.0, 0.0] },
        vec![
            ConstraintFunction::Affine { a: vec![t, -1.0], b: 0.0 },
            ConstraintFunction::Affine { a: vec![t, 1.0], b: 0.0 },
        ],
        SimpleSet::AllSpace,
        4.0,
        None,
        Some(Optimum { point: vec![0.0, 0.0], value: 0.5 }),
    )
    .expect("wedge instance is always valid")
}

/// Start iterate on the upper wedge face at distance `alpha1` from the apex.
pub fn two_halfspace_start(params: &TwoHalfspaceParams, alpha1: f64) -> Vec<f64> {
    vec![alpha1 * params.theta.cos(), alpha1 * params.theta.sin()]
}

/// Runs the Haugazeau iteration on the wedge from the boundary start; the
/// returned iterates' norms are the recurrence variables `a_k`.
pub fn run_two_halfspace_haugazeau(
    params: &TwoHalfspaceParams,
    alpha1: f64,
    steps: usize,
) -> Result<HaugazeauRun, AnalysisError> {
    if !(alpha1 > 0.0 && alpha1 < params.theta.cos()) {
        return Err(AnalysisError::InvalidParams(
            "alpha1 must lie in (0, cos theta)".into(),
        ));
    }
    let p = build_two_halfspace_bap(params);
    let mut cfg = HaugazeauConfig::new(Variant::Classic, steps);
    cfg.start = Some(two_halfspace_start(params, alpha1));
    Ok(haugazeau::run(&p, &cfg)?)
}

/// Parameters of the no-regularity family `C_pm = {(u,v) : pm v >= |u|^p}`.
#[derive(Debug, Clone, Copy)]
pub struct NoRegularityParams {
    pub p: f64,
}

impl NoRegularityParams {
    pub fn new(p: f64) -> Result<Self, AnalysisError> {
        if !(p >= 1.0) {
            return Err(AnalysisError::InvalidParams("p must be >= 1".into()));
        }
        Ok(Self { p })
    }
}

/// Certified lower bound on the next first coordinate of the no-regularity
/// iteration: `u (1 - 2u^{2p-1} / (1 - u + u^{2p-1}))`, for `0 < u < 1`.
pub fn no_regularity_lower_step(u: f64, p: f64) -> Result<f64, AnalysisError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(AnalysisError::OutOfRange(format!("u = {u} outside (0, 1)")));
    }
    let w = u.powf(2.0 * p - 1.0);
    Ok(u * (1.0 - 2.0 * w / (1.0 - u + w)))
}

/// Projection foot of `x` on the boundary curve `v = sign * s^p`, `s >= 0`.
fn curve_foot(x: &[f64], p: f64, sign: f64) -> Vec<f64> {
    let (u, v) = (x[0], x[1]);
    // Stationarity of the squared distance: (s - u) + p s^{p-1} (s^p - sign*v).
    let dd = |s: f64| (s - u) + p * s.powf(p - 1.0) * (s.powf(p) - sign * v);
    let (mut lo, mut hi) = (0.0_f64, u.max(1e-12));
    if dd(hi) < 0.0 {
        // Foot beyond u (possible when x is deep inside the opposite set).
        while dd(hi) < 0.0 {
            hi *= 2.0;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dd(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    vec![s, sign * s.powf(p)]
}

/// Runs the projection iteration onto `C_+ ∩ C_-` from the anchor `(1, 0)`:
/// the two sets fail linear regularity at the origin, and the first
/// coordinate decays like `k^{-1/(2p-1)}`. Implemented directly in the plane
/// because the curved sets are outside the constraint taxonomy. Returns the
/// iterates starting with `x_1 = (1, 0)`.
pub fn run_no_regularity(params: &NoRegularityParams, steps: usize) -> Vec<Vec<f64>> {
    let p = params.p;
    let anchor = vec![1.0, 0.0];
    let objective = ObjectiveFunction::ShiftedQuadratic { x0: anchor.clone() };
    let mut x = anchor.clone();
    let mut h_circ = Halfspace::AllSpace;
    let mut iterates = vec![x.clone()];
    for _ in 0..steps {
        // Supporting halfspaces at the projection feet; the farther set is
        // the one the iteration cuts with (upper set wins ties).
        let foot_up = curve_foot(&x, p, 1.0);
        let foot_dn = curve_foot(&x, p, -1.0);
        let d_up = linalg::dist(&x, &foot_up);
        let d_dn = linalg::dist(&x, &foot_dn);
        let foot = if d_up >= d_dn { foot_up } else { foot_dn };
        let normal = linalg::sub(&x, &foot);
        if linalg::norm(&normal) <= 1e-15 {
            break;
        }
        let h_plus = Halfspace::proper(normal.clone(), linalg::dot(&normal, &foot));
        let next = geometry::minimize_two_halfspaces(&objective, &h_circ, &h_plus, 1e-14)
            .expect("wedge-like subproblem is always feasible");
        h_circ = haugazeau::gradient_halfspace(&objective, &next);
        x = next;
        iterates.push(x.clone());
    }
    iterates
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Empirical lower estimate of the linear-regularity constant: the largest
/// sampled ratio `d(x, C) / max_j d(x, H_j)` over infeasible points of a
/// ball. Exact distances to `C` require polyhedral constraints (or a single
/// distance-kind constraint).
pub fn estimate_kappa(
    p: &Problem,
    samples: usize,
    center: &[f64],
    radius: f64,
    seed: u64,
) -> Result<f64, AnalysisError> {
    enum Feasible {
        Polyhedral(Vec<Halfspace>),
        Single(ConstraintFunction),
    }
    let feasible = if p.constraints.len() == 1 {
        Feasible::Single(p.constraints[0].clone())
    } else {
        let planes: Option<Vec<Halfspace>> = p
            .constraints
            .iter()
            .map(|c| c.as_halfspace().map(|(a, b)| Halfspace::proper(a, b)))
            .collect();
        Feasible::Polyhedral(planes.ok_or(AnalysisError::UnsupportedConstraints)?)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.dim();
    let mut best: Option<f64> = None;
    for _ in 0..samples {
        let x = sample_ball(&mut rng, center, radius, n);
        let max_h = p
            .constraints
            .iter()
            .map(|c| geometry::supporting_halfspace(c, &x).distance(&x))
            .fold(0.0, f64::max);
        if max_h <= 1e-12 {
            continue;
        }
        let d_c = match &feasible {
            Feasible::Polyhedral(planes) => {
                let st = geometry::project_intersection(&x, planes)?;
                linalg::dist(&x, &st.solution)
            }
            Feasible::Single(c) => c.value(&x).max(0.0),
        };
        let ratio = d_c / max_h;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or(AnalysisError::NoInfeasibleSamples)
}

pub(crate) fn sample_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64, n: usize) -> Vec<f64> {
    // Gaussian direction via Box-Muller, then a radius with the right law.
    let mut dir = Vec::with_capacity(n);
    while dir.len() < n {
        let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.random_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        dir.push(r * (2.0 * std::f64::consts::PI * u2).cos());
        if dir.len() < n {
            dir.push(r * (2.0 * std::f64::consts::PI * u2).sin());
        }
    }
    let nd = linalg::norm(&dir).max(1e-300);
    let u: f64 = rng.random_range(0.0..1.0);
    let scale = radius * u.powf(1.0 / n as f64) / nd;
    center
        .iter()
        .zip(&dir)
        .map(|(c, d)| c + scale * d)
        .collect()
}
