//! Problem data: objective and constraint function families with exact
//! value/gradient/subgradient oracles, simple sets with exact projections,
//! and the textual problem-file format.
//!
//! The constraint taxonomy is deliberately closed (affine functions and
//! distances to halfspaces, balls and boxes) so that every oracle is exact;
//! convergence-bound checks are only meaningful when the oracles carry no
//! approximation error of their own.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("problem file parse error: {0}")]
    Parse(#[from] Box<toml::de::Error>),
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ModelError {
    ModelError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Objective function kinds. All kinds are differentiable and convex; the
/// quadratic kinds are strongly convex with Lipschitz gradient, while the
/// even-p-norm kind for `p >= 4` has neither property globally and reports
/// `None` for both parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObjectiveFunction {
    /// `f(x) = 0.5 * ||x - x0||^2`, with `mu = lipschitz = 1`.
    ShiftedQuadratic { x0: Vec<f64> },
    /// `f(x) = 0.5 * x' A x + b' x` with `A` symmetric positive definite;
    /// `mu`/`lipschitz` are the extreme eigenvalues of `A` (computed at
    /// construction when absent, checked against `A` when supplied).
    GeneralQuadratic {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    /// `f(x) = ||e1 - x||_p^p` for a positive even integer `p`, in `dim`
    /// variables. Quadratic (so `mu = lipschitz = 2`) when `p = 2`.
    PNormShift { p: u32, dim: usize },
}

/// Quadratic representation `0.5 x' M x + c' x` (constant term dropped) used
/// by the exact two-halfspace subproblem solvers.
#[derive(Debug, Clone)]
pub(crate) enum QuadMatrix {
    ScaledIdentity(f64),
    Dense(Vec<f64>),
}

#[derive(Debug, Clone)]
pub(crate) struct Quadratic {
    pub m: QuadMatrix,
    pub linear: Vec<f64>,
}

impl Quadratic {
    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.m {
            QuadMatrix::ScaledIdentity(c) => linalg::scale(x, *c),
            QuadMatrix::Dense(a) => linalg::matvec(a, self.dim(), x),
        }
    }

    /// Solves `M y = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.m {
            QuadMatrix::ScaledIdentity(c) => linalg::scale(rhs, 1.0 / c),
            QuadMatrix::Dense(a) => linalg::spd_solve(a, self.dim(), rhs)
                .expect("quadratic objective matrix validated positive definite"),
        }
    }
}

impl ObjectiveFunction {
    pub fn dim(&self) -> usize {
        match self {
            Self::ShiftedQuadratic { x0 } => x0.len(),
            Self::GeneralQuadratic { b, .. } => b.len(),
            Self::PNormShift { dim, .. } => *dim,
        }
    }

    /// Strong-convexity parameter, when the kind is in `S^{1,1}`.
    /// Computed from the eigenvalues of `A` when not cached; problem
    /// validation caches it.
    pub fn mu(&self) -> Option<f64> {
        match self {
            Self::ShiftedQuadratic { .. } => Some(1.0),
            Self::GeneralQuadratic { mu, .. } => mu.or_else(|| Some(self.eig_bounds().0)),
            Self::PNormShift { p: 2, .. } => Some(2.0),
            Self::PNormShift { .. } => None,
        }
    }

    /// Gradient Lipschitz constant, when the kind is in `S^{1,1}`.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Self::ShiftedQuadratic { .. } => Some(1.0),
            Self::GeneralQuadratic { lipschitz, .. } => {
                lipschitz.or_else(|| Some(self.eig_bounds().1))
            }
            Self::PNormShift { p: 2, .. } => Some(2.0),
            Self::PNormShift { .. } => None,
        }
    }

    fn eig_bounds(&self) -> (f64, f64) {
        match self {
            Self::GeneralQuadratic { a, b, .. } => {
                let flat: Vec<f64> = a.iter().flatten().copied().collect();
                linalg::sym_eig_bounds(&flat, b.len())
            }
            _ => unreachable!("eig_bounds is only used for the general quadratic kind"),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "dimension mismatch in objective value");
        match self {
            Self::ShiftedQuadratic { x0 } => 0.5 * linalg::norm_sq(&linalg::sub(x, x0)),
            Self::GeneralQuadratic { a, b, .. } => {
                let n = b.len();
                let mut v = 0.0;
                for i in 0..n {
                    v += b[i] * x[i];
                    let row = &a[i];
                    v += 0.5 * x[i] * linalg::dot(row, x);
                }
                v
            }
            Self::PNormShift { p, dim } => {
                let p = *p as i32;
                let mut v = (1.0 - x[0]).powi(p);
                for xi in &x[1..*dim] {
                    v += (-xi).powi(p);
                }
                v
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "dimension mismatch in objective gradient");
        match self {
            Self::ShiftedQuadratic { x0 } => linalg::sub(x, x0),
            Self::GeneralQuadratic { a, b, .. } => {
                let n = b.len();
                (0..n).map(|i| linalg::dot(&a[i], x) + b[i]).collect()
            }
            Self::PNormShift { p, dim } => {
                let p = *p as i32;
                (0..*dim)
                    .map(|i| {
                        let e = if i == 0 { 1.0 } else { 0.0 };
                        -(p as f64) * (e - x[i]).powi(p - 1)
                    })
                    .collect()
            }
        }
    }

    /// The minimizer of the objective over all of space, in closed form.
    pub fn unconstrained_minimizer(&self) -> Vec<f64> {
        match self {
            Self::ShiftedQuadratic { x0 } => x0.clone(),
            Self::GeneralQuadratic { a, b, .. } => {
                let n = b.len();
                let flat: Vec<f64> = a.iter().flatten().copied().collect();
                let neg_b: Vec<f64> = b.iter().map(|v| -v).collect();
                linalg::spd_solve(&flat, n, &neg_b)
                    .expect("quadratic objective matrix validated positive definite")
            }
            Self::PNormShift { dim, .. } => {
                let mut e1 = vec![0.0; *dim];
                e1[0] = 1.0;
                e1
            }
        }
    }

    /// Quadratic form `0.5 x'Mx + c'x` matching this objective up to an
    /// additive constant, for the kinds that are quadratic.
    pub(crate) fn quadratic(&self) -> Option<Quadratic> {
        match self {
            Self::ShiftedQuadratic { x0 } => Some(Quadratic {
                m: QuadMatrix::ScaledIdentity(1.0),
                linear: linalg::scale(x0, -1.0),
            }),
            Self::GeneralQuadratic { a, b, .. } => Some(Quadratic {
                m: QuadMatrix::Dense(a.iter().flatten().copied().collect()),
                linear: b.clone(),
            }),
            Self::PNormShift { p: 2, dim } => {
                let mut linear = vec![0.0; *dim];
                linear[0] = -2.0;
                Some(Quadratic {
                    m: QuadMatrix::ScaledIdentity(2.0),
                    linear,
                })
            }
            Self::PNormShift { .. } => None,
        }
    }

    fn validate(&mut self) -> Result<(), ModelError> {
        match self {
            Self::ShiftedQuadratic { x0 } => {
                if x0.is_empty() {
                    return Err(invalid("objective.x0", "must be nonempty"));
                }
            }
            Self::GeneralQuadratic { a, b, mu, lipschitz } => {
                let n = b.len();
                if n == 0 {
                    return Err(invalid("objective.b", "must be nonempty"));
                }
                if a.len() != n || a.iter().any(|row| row.len() != n) {
                    return Err(invalid("objective.a", format!("must be {n}x{n}")));
                }
                let flat: Vec<f64> = a.iter().flatten().copied().collect();
                let scale = linalg::norm(&flat).max(1.0);
                for i in 0..n {
                    for j in 0..n {
                        if (flat[i * n + j] - flat[j * n + i]).abs() > 1e-12 * scale {
                            return Err(invalid("objective.a", "must be symmetric"));
                        }
                    }
                }
                let (lo, hi) = linalg::sym_eig_bounds(&flat, n);
                if lo <= 0.0 {
                    return Err(invalid("objective.a", "must be positive definite"));
                }
                match mu {
                    Some(m) if (*m - lo).abs() > 1e-8 => {
                        return Err(invalid(
                            "objective.mu",
                            format!("{m} does not match smallest eigenvalue {lo}"),
                        ));
                    }
                    _ => *mu = Some(lo),
                }
                match lipschitz {
                    Some(l) if (*l - hi).abs() > 1e-8 => {
                        return Err(invalid(
                            "objective.lipschitz",
                            format!("{l} does not match largest eigenvalue {hi}"),
                        ));
                    }
                    _ => *lipschitz = Some(hi),
                }
            }
            Self::PNormShift { p, dim } => {
                if *p < 2 || *p % 2 != 0 {
                    return Err(invalid("objective.p", "must be a positive even integer"));
                }
                if *dim == 0 {
                    return Err(invalid("objective.dim", "must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Convex function exposing value and subgradient oracles. Implemented by
/// [`ConstraintFunction`]; the triangular-property checker accepts any
/// implementor so that functions outside the constraint taxonomy can be
/// examined too.
pub trait ConvexFunction {
    fn value(&self, x: &[f64]) -> f64;
    fn subgradient(&self, x: &[f64]) -> Vec<f64>;
}

/// Constraint function kinds `f_j`, each convex with an exact subgradient
/// oracle. Distance kinds return the zero vector at points of the set
/// (a valid subgradient at the kink).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstraintFunction {
    /// `f(x) = <a, x> - b`.
    Affine { a: Vec<f64>, b: f64 },
    /// `f(x) = d(x, {y : <a, y> <= b})`.
    DistanceToHalfspace { a: Vec<f64>, b: f64 },
    /// `f(x) = d(x, B(center, radius))`.
    DistanceToBall { center: Vec<f64>, radius: f64 },
    /// `f(x) = d(x, [lower, upper])`.
    DistanceToBox { lower: Vec<f64>, upper: Vec<f64> },
}

impl ConstraintFunction {
    pub fn dim(&self) -> usize {
        match self {
            Self::Affine { a, .. } => a.len(),
            Self::DistanceToHalfspace { a, .. } => a.len(),
            Self::DistanceToBall { center, .. } => center.len(),
            Self::DistanceToBox { lower, .. } => lower.len(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "dimension mismatch in constraint value");
        match self {
            Self::Affine { a, b } => linalg::dot(a, x) - b,
            Self::DistanceToHalfspace { a, b } => {
                (linalg::dot(a, x) - b).max(0.0) / linalg::norm(a)
            }
            Self::DistanceToBall { center, radius } => {
                (linalg::dist(x, center) - radius).max(0.0)
            }
            Self::DistanceToBox { lower, upper } => {
                let p = clamp_to_box(x, lower, upper);
                linalg::dist(x, &p)
            }
        }
    }

    /// An element of the subdifferential at `x`. At kinks of the distance
    /// kinds (point on the set boundary) the zero vector is returned; it is
    /// a valid subgradient and avoids dividing by the vanishing distance.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "dimension mismatch in constraint subgradient");
        match self {
            Self::Affine { a, .. } => a.clone(),
            Self::DistanceToHalfspace { a, b } => {
                if linalg::dot(a, x) - b > 0.0 {
                    linalg::scale(a, 1.0 / linalg::norm(a))
                } else {
                    vec![0.0; a.len()]
                }
            }
            Self::DistanceToBall { center, radius } => {
                let d = linalg::sub(x, center);
                let nd = linalg::norm(&d);
                if nd > *radius {
                    linalg::scale(&d, 1.0 / nd)
                } else {
                    vec![0.0; center.len()]
                }
            }
            Self::DistanceToBox { lower, upper } => {
                let p = clamp_to_box(x, lower, upper);
                let d = linalg::sub(x, &p);
                let nd = linalg::norm(&d);
                if nd > 0.0 {
                    linalg::scale(&d, 1.0 / nd)
                } else {
                    vec![0.0; lower.len()]
                }
            }
        }
    }

    /// For polyhedral kinds, the halfspace `{y : <a, y> <= b}` whose distance
    /// function / affine residual this constraint measures.
    pub fn as_halfspace(&self) -> Option<(Vec<f64>, f64)> {
        match self {
            Self::Affine { a, b } | Self::DistanceToHalfspace { a, b } => {
                Some((a.clone(), *b))
            }
            _ => None,
        }
    }

    fn validate(&self, idx: usize) -> Result<(), ModelError> {
        let field = format!("constraints[{idx}]");
        match self {
            Self::Affine { a, .. } | Self::DistanceToHalfspace { a, .. } => {
                if a.is_empty() || linalg::norm(a) == 0.0 {
                    return Err(invalid(&field, "normal vector must be nonzero"));
                }
            }
            Self::DistanceToBall { center, radius } => {
                if center.is_empty() {
                    return Err(invalid(&field, "center must be nonempty"));
                }
                if *radius <= 0.0 {
                    return Err(invalid(&field, "radius must be positive"));
                }
            }
            Self::DistanceToBox { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return Err(invalid(&field, "lower/upper must be nonempty with equal length"));
                }
                if lower.iter().zip(upper).any(|(l, u)| l > u) {
                    return Err(invalid(&field, "requires lower <= upper"));
                }
            }
        }
        Ok(())
    }
}

impl ConvexFunction for ConstraintFunction {
    fn value(&self, x: &[f64]) -> f64 {
        ConstraintFunction::value(self, x)
    }
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        ConstraintFunction::subgradient(self, x)
    }
}

fn clamp_to_box(x: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(lower.iter().zip(upper))
        .map(|(v, (l, u))| v.max(*l).min(*u))
        .collect()
}

/// The simple set `Q` with an exact, idempotent projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SimpleSet {
    AllSpace,
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl SimpleSet {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::AllSpace => x.to_vec(),
            Self::Ball { center, radius } => {
                let d = linalg::sub(x, center);
                let nd = linalg::norm(&d);
                if nd <= *radius {
                    x.to_vec()
                } else {
                    linalg::add_scaled(center, radius / nd, &d)
                }
            }
            Self::Box { lower, upper } => clamp_to_box(x, lower, upper),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        linalg::dist(x, &self.project(x)) <= tol
    }

    fn dim(&self) -> Option<usize> {
        match self {
            Self::AllSpace => None,
            Self::Ball { center, .. } => Some(center.len()),
            Self::Box { lower, .. } => Some(lower.len()),
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::AllSpace => Ok(()),
            Self::Ball { radius, .. } => {
                if *radius <= 0.0 {
                    Err(invalid("q.radius", "must be positive"))
                } else {
                    Ok(())
                }
            }
            Self::Box { lower, upper } => {
                if lower.len() != upper.len() || lower.iter().zip(upper).any(|(l, u)| l > u) {
                    Err(invalid("q", "requires lower <= upper with equal lengths"))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// A known optimal solution, carried for bound verification only; the
/// solvers never read it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub point: Vec<f64>,
    pub value: f64,
}

/// A full problem instance. `diameter` is the step-size constant `R`: an
/// upper bound on the diameter of `Q` when `Q` is bounded, and otherwise a
/// bound on the distance from the start iterate to an optimal solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub diameter: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub objective: ObjectiveFunction,
    pub constraints: Vec<ConstraintFunction>,
    pub q: SimpleSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum: Option<Optimum>,
}

impl Problem {
    pub fn new(
        objective: ObjectiveFunction,
        constraints: Vec<ConstraintFunction>,
        q: SimpleSet,
        diameter: f64,
        kappa: Option<f64>,
        optimum: Option<Optimum>,
    ) -> Result<Self, ModelError> {
        let mut p = Problem {
            diameter,
            kappa,
            objective,
            constraints,
            q,
            optimum,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Parses the textual problem-file format (see the repository README for
    /// the schema) and validates every invariant.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut p: Problem = toml::from_str(text).map_err(Box::new)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("problem serialization cannot fail")
    }

    fn validate(&mut self) -> Result<(), ModelError> {
        self.objective.validate()?;
        let n = self.objective.dim();
        if self.constraints.is_empty() {
            return Err(invalid("constraints", "at least one constraint required"));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            c.validate(i)?;
            if c.dim() != n {
                return Err(invalid(
                    &format!("constraints[{i}]"),
                    format!("dimension {} does not match objective dimension {n}", c.dim()),
                ));
            }
        }
        self.q.validate()?;
        if let Some(qd) = self.q.dim() {
            if qd != n {
                return Err(invalid("q", format!("dimension {qd} does not match objective dimension {n}")));
            }
        }
        if !(self.diameter > 0.0) {
            return Err(invalid("diameter", "must be positive"));
        }
        if let Some(k) = self.kappa {
            if !(k >= 1.0) {
                return Err(invalid("kappa", "must be >= 1"));
            }
        }
        if let Some(opt) = &self.optimum {
            if opt.point.len() != n {
                return Err(invalid("optimum.point", format!("dimension must be {n}")));
            }
            for (i, c) in self.constraints.iter().enumerate() {
                let v = c.value(&opt.point);
                if v > 1e-9 {
                    return Err(invalid(
                        "optimum.point",
                        format!("violates constraints[{i}] by {v:.3e}"),
                    ));
                }
            }
            let fv = self.objective.value(&opt.point);
            if (fv - opt.value).abs() > 1e-8 {
                return Err(invalid(
                    "optimum.value",
                    format!("{} does not match objective value {fv} at the point", opt.value),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shifted(x0: &[f64]) -> ObjectiveFunction {
        ObjectiveFunction::ShiftedQuadratic { x0: x0.to_vec() }
    }

    #[test]
    fn objective_values_match_direct_substitution() {
        assert_eq!(shifted(&[0.0, 0.0]).value(&[0.0, 0.0]), 0.0);
        assert_eq!(shifted(&[1.0, 0.0]).value(&[0.0, 0.0]), 0.5);
        let pn = ObjectiveFunction::PNormShift { p: 2, dim: 2 };
        assert_eq!(pn.value(&[0.0, 0.0]), 1.0);
    }

    #[test]
    fn gradients_match_hand_computation() {
        assert_eq!(shifted(&[1.0, 0.0]).gradient(&[0.0, 0.0]), vec![-1.0, 0.0]);
        let pn = ObjectiveFunction::PNormShift { p: 2, dim: 2 };
        assert_eq!(pn.gradient(&[0.0, 0.0]), vec![-2.0, 0.0]);
        let gq = ObjectiveFunction::GeneralQuadratic {
            a: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            b: vec![0.0, 0.0],
            mu: None,
            lipschitz: None,
        };
        assert_eq!(gq.gradient(&[3.0, 4.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn subgradients_match_hand_computation() {
        let aff = ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 };
        assert_eq!(aff.subgradient(&[5.0, -3.0]), vec![1.0, 0.0]);

        let ball = ConstraintFunction::DistanceToBall {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        assert_eq!(ball.subgradient(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(ball.subgradient(&[0.5, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn value_panics_on_dimension_mismatch() {
        shifted(&[0.0, 0.0]).value(&[1.0]);
    }

    fn each_constraint_kind() -> Vec<ConstraintFunction> {
        vec![
            ConstraintFunction::Affine { a: vec![1.0, -2.0, 0.5], b: 0.3 },
            ConstraintFunction::DistanceToHalfspace { a: vec![0.5, 1.0, -1.0], b: -0.2 },
            ConstraintFunction::DistanceToBall { center: vec![0.1, -0.3, 0.4], radius: 0.8 },
            ConstraintFunction::DistanceToBox {
                lower: vec![-1.0, -0.5, 0.0],
                upper: vec![0.5, 0.5, 1.0],
            },
        ]
    }

    fn sample(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-r..r)).collect()
    }

    #[test]
    fn subgradient_inequality_holds_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in each_constraint_kind() {
            for _ in 0..200 {
                let x = sample(&mut rng, 3, 2.0);
                let y = sample(&mut rng, 3, 2.0);
                let gx = g.value(&x);
                let sg = g.subgradient(&x);
                let lower = gx + linalg::dot(&sg, &linalg::sub(&y, &x));
                assert!(
                    g.value(&y) >= lower - 1e-9,
                    "subgradient inequality failed for {g:?} at {x:?}, {y:?}"
                );
            }
        }
    }

    fn each_objective_kind() -> Vec<ObjectiveFunction> {
        let mut kinds = vec![
            shifted(&[0.3, -0.7, 1.1]),
            ObjectiveFunction::GeneralQuadratic {
                a: vec![
                    vec![3.0, 0.5, 0.0],
                    vec![0.5, 2.0, 0.1],
                    vec![0.0, 0.1, 1.5],
                ],
                b: vec![0.2, -0.1, 0.4],
                mu: None,
                lipschitz: None,
            },
            ObjectiveFunction::PNormShift { p: 4, dim: 3 },
        ];
        for f in &mut kinds {
            f.validate().unwrap();
        }
        kinds
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for f in each_objective_kind() {
            for _ in 0..100 {
                let x = sample(&mut rng, 3, 1.5);
                let g = f.gradient(&x);
                for i in 0..3 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
                    let scale = g[i].abs().max(1.0);
                    assert!(
                        (fd - g[i]).abs() <= 1e-6 * scale,
                        "gradient mismatch for {f:?} at {x:?} component {i}: {fd} vs {}",
                        g[i]
                    );
                }
            }
        }
    }

    #[test]
    fn strong_convexity_inequality_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for f in each_objective_kind() {
            let Some(mu) = f.mu() else { continue };
            for _ in 0..200 {
                let x = sample(&mut rng, 3, 2.0);
                let y = sample(&mut rng, 3, 2.0);
                let d = linalg::sub(&y, &x);
                let lower = f.value(&x)
                    + linalg::dot(&f.gradient(&x), &d)
                    + 0.5 * mu * linalg::norm_sq(&d);
                assert!(f.value(&y) >= lower - 1e-9);
            }
        }
    }

    #[test]
    fn parse_minimal_file() {
        let text = r#"
diameter = 4.0

[objective]
kind = "shifted-quadratic"
x0 = [2.0, 0.0]

[[constraints]]
kind = "affine"
a = [1.0, 0.0]
b = 0.0

[q]
kind = "all-space"
"#;
        let p = Problem::parse(text).unwrap();
        assert_eq!(p.num_constraints(), 1);
        assert_eq!(p.dim(), 2);
        assert!(p.kappa.is_none());
    }

    #[test]
    fn parse_rejects_nonpositive_diameter() {
        let text = r#"
diameter = -1.0

[objective]
kind = "shifted-quadratic"
x0 = [2.0, 0.0]

[[constraints]]
kind = "affine"
a = [1.0, 0.0]
b = 0.0

[q]
kind = "all-space"
"#;
        let err = Problem::parse(text).unwrap_err();
        assert!(err.to_string().contains("diameter"), "{err}");
    }

    #[test]
    fn parse_rejects_kappa_below_one() {
        let text = r#"
diameter = 1.0
kappa = 0.5

[objective]
kind = "shifted-quadratic"
x0 = [2.0, 0.0]

[[constraints]]
kind = "affine"
a = [1.0, 0.0]
b = 0.0

[q]
kind = "all-space"
"#;
        let err = Problem::parse(text).unwrap_err();
        assert!(err.to_string().contains("kappa"), "{err}");
    }

    #[test]
    fn parse_rejects_infeasible_declared_optimum() {
        let text = r#"
diameter = 1.0

[objective]
kind = "shifted-quadratic"
x0 = [2.0, 0.0]

[[constraints]]
kind = "affine"
a = [1.0, 0.0]
b = 0.0

[q]
kind = "all-space"

[optimum]
point = [1.0, 0.0]
value = 0.5
"#;
        let err = Problem::parse(text).unwrap_err();
        assert!(err.to_string().contains("optimum.point"), "{err}");
    }

    #[test]
    fn roundtrip_through_serialize_and_parse() {
        let p = Problem::new(
            ObjectiveFunction::GeneralQuadratic {
                a: vec![vec![2.0, 0.3], vec![0.3, 1.0]],
                b: vec![0.1, -0.4],
                mu: None,
                lipschitz: None,
            },
            vec![
                ConstraintFunction::Affine { a: vec![1.0, 1.0], b: 5.0 },
                ConstraintFunction::DistanceToBall { center: vec![0.0, 0.0], radius: 9.0 },
                ConstraintFunction::DistanceToBox {
                    lower: vec![-9.0, -9.0],
                    upper: vec![9.0, 9.0],
                },
                ConstraintFunction::DistanceToHalfspace { a: vec![0.0, 1.0], b: 8.0 },
            ],
            SimpleSet::Ball { center: vec![0.0, 0.0], radius: 20.0 },
            40.0,
            Some(2.0),
            None,
        )
        .unwrap();
        let text = p.to_toml_string();
        let q = Problem::parse(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn mu_mismatch_is_rejected() {
        let r = Problem::new(
            ObjectiveFunction::GeneralQuadratic {
                a: vec![vec![2.0, 0.0], vec![0.0, 1.0]],
                b: vec![0.0, 0.0],
                mu: Some(0.9),
                lipschitz: None,
            },
            vec![ConstraintFunction::Affine { a: vec![1.0, 0.0], b: 0.0 }],
            SimpleSet::AllSpace,
            1.0,
            None,
            None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn simple_set_projections_are_exact_and_idempotent() {
        let sets = vec![
            SimpleSet::AllSpace,
            SimpleSet::Ball { center: vec![1.0, 1.0], radius: 2.0 },
            SimpleSet::Box { lower: vec![-1.0, 0.0], upper: vec![1.0, 3.0] },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in sets {
            for _ in 0..100 {
                let x = sample(&mut rng, 2, 5.0);
                let p = s.project(&x);
                let pp = s.project(&p);
                assert!(linalg::dist(&p, &pp) <= 1e-12);
                assert!(s.contains(&p, 1e-12));
            }
        }
    }
}
