//! Subgradient method with feasibility updates.
//!
//! Each iteration either takes a normalized subgradient step on the
//! objective (step length `R/sqrt(k+0.5)`) or, when some supporting
//! halfspace of the constraints is at least that far away, a projection
//! step that moves toward the feasible set instead. Two rules decide which:
//!
//! - **farthest halfspace**: scan the constraints at the current iterate and
//!   project onto the first supporting halfspace found at distance `>= h_k`
//!   (optionally onto an aggregate of all of them);
//! - **projection sweep**: cycle through the constraints, projecting onto
//!   each supporting halfspace in turn, and stop the sweep once the summed
//!   squared displacement reaches `h_k^2`.

use thiserror::Error;

use crate::geometry::{self, GeometryError, Halfspace};
use crate::linalg;
use crate::model::Problem;
use crate::trace::{IterateTrace, StepKind, TraceRow};

#[derive(Debug, Error)]
pub enum SubgradError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Which feasibility update the iteration uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityUpdate {
    /// Supporting halfspace of largest distance from the current iterate.
    FarthestHalfspace,
    /// Alternating projections onto the supporting halfspaces in sweep order.
    ProjectionSweep,
}

#[derive(Debug, Clone)]
pub struct SubgradConfig {
    pub update: FeasibilityUpdate,
    /// Sweep window: each sweep position projects onto the intersection of
    /// the last `window` supporting halfspaces (>= 1).
    pub window: usize,
    /// Opt-in: when no single halfspace reaches `h_k`, try the aggregate
    /// halfspace produced by the active-set projection onto all of them.
    pub aggregate: bool,
    /// Constraint scan order; defaults to `0..m`.
    pub scan_order: Option<Vec<usize>>,
    pub max_iters: usize,
}

impl SubgradConfig {
    pub fn new(update: FeasibilityUpdate, max_iters: usize) -> Self {
        Self {
            update,
            window: 1,
            aggregate: false,
            scan_order: None,
            max_iters,
        }
    }
}

/// Step-size schedule `h_k = R / sqrt(k + 0.5)`.
pub fn step_size(k: usize, r: f64) -> f64 {
    r / (k as f64 + 0.5).sqrt()
}

/// Result of one iteration.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub x_next: Vec<f64>,
    /// The point this iteration acted from: the current iterate for the
    /// farthest-halfspace rule, the sweep endpoint for the sweep rule.
    pub eval_point: Vec<f64>,
    pub kind: StepKind,
    pub dist: f64,
    pub sweep_norm_sq: Option<f64>,
    pub inner: Option<usize>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SubgradRun {
    pub trace: IterateTrace,
    /// `x_0, x_1, ..` including the start iterate.
    pub iterates: Vec<Vec<f64>>,
    /// The per-iteration evaluation points matching the trace rows.
    pub eval_points: Vec<Vec<f64>>,
    pub converged: bool,
}

fn scan_order(p: &Problem, cfg: &SubgradConfig) -> Result<Vec<usize>, SubgradError> {
    let m = p.num_constraints();
    match &cfg.scan_order {
        None => Ok((0..m).collect()),
        Some(order) => {
            let mut seen = vec![false; m];
            if order.len() != m
                || order
                    .iter()
                    .any(|&j| j >= m || std::mem::replace(&mut seen[j], true))
            {
                return Err(SubgradError::Config(format!(
                    "scan_order must be a permutation of 0..{m}"
                )));
            }
            Ok(order.clone())
        }
    }
}

fn objective_step(p: &Problem, x: &[f64], h_k: f64) -> (Vec<f64>, bool) {
    let g = p.objective.gradient(x);
    let gn = linalg::norm(&g);
    if gn <= 1e-12 {
        // At the unconstrained minimizer; converged if also feasible.
        let feasible = p.max_violation(x) <= 1e-9;
        return (p.q.project(x), feasible);
    }
    (p.q.project(&linalg::add_scaled(x, -h_k / gn, &g)), false)
}

/// One iteration under the farthest-halfspace rule.
pub fn farthest_halfspace_step(
    p: &Problem,
    cfg: &SubgradConfig,
    k: usize,
    x: &[f64],
) -> Result<StepOutcome, SubgradError> {
    let h_k = step_size(k, p.diameter);
    let order = scan_order(p, cfg)?;

    let mut collected: Vec<Halfspace> = Vec::with_capacity(order.len());
    let mut chosen: Option<(f64, Halfspace)> = None;
    let mut max_dist = 0.0f64;
    for &j in &order {
        let h = geometry::supporting_halfspace(&p.constraints[j], x);
        let d = h.distance(x);
        max_dist = max_dist.max(d);
        if d >= h_k {
            // Acting as soon as one qualifying halfspace is found; the
            // remaining distances are never evaluated.
            chosen = Some((d, h));
            break;
        }
        collected.push(h);
    }

    if chosen.is_none() && cfg.aggregate {
        let cap = 100 * (collected.len() + 1) + 1000;
        let st = geometry::project_intersection_capped(x, &collected, cap)?;
        let agg = geometry::aggregate_halfspace(x, &st);
        let d = agg.distance(x);
        if d >= h_k {
            chosen = Some((d, agg));
        }
    }

    if let Some((d, h)) = chosen {
        let x_next = p.q.project(&h.project(x));
        return Ok(StepOutcome {
            x_next,
            eval_point: x.to_vec(),
            kind: StepKind::Feasibility,
            dist: d,
            sweep_norm_sq: None,
            inner: None,
            converged: false,
        });
    }

    let (x_next, converged) = objective_step(p, x, h_k);
    Ok(StepOutcome {
        x_next,
        eval_point: x.to_vec(),
        kind: StepKind::Objective,
        dist: max_dist,
        sweep_norm_sq: None,
        inner: None,
        converged,
    })
}

/// One iteration under the projection-sweep rule.
pub fn sweep_step(
    p: &Problem,
    cfg: &SubgradConfig,
    k: usize,
    x: &[f64],
) -> Result<StepOutcome, SubgradError> {
    if cfg.window == 0 {
        return Err(SubgradError::Config("window must be >= 1".into()));
    }
    let h_k = step_size(k, p.diameter);
    let h_sq = h_k * h_k;
    let order = scan_order(p, cfg)?;

    let mut y = x.to_vec();
    let mut built: Vec<Halfspace> = Vec::with_capacity(order.len());
    let mut sum_sq = 0.0;
    let mut projections = 0usize;
    for &j in &order {
        let h = geometry::supporting_halfspace(&p.constraints[j], &y);
        built.push(h);
        let lo = built.len() - cfg.window.min(built.len());
        let st = geometry::project_intersection(&y, &built[lo..])?;
        projections += 1;
        sum_sq += linalg::norm_sq(&linalg::sub(&st.solution, &y));
        y = st.solution;
        if sum_sq >= h_sq {
            let x_next = p.q.project(&y);
            return Ok(StepOutcome {
                x_next,
                eval_point: y,
                kind: StepKind::Feasibility,
                dist: sum_sq.sqrt(),
                sweep_norm_sq: Some(sum_sq),
                inner: Some(projections),
                converged: false,
            });
        }
    }

    let (x_next, converged) = objective_step(p, &y, h_k);
    Ok(StepOutcome {
        x_next,
        eval_point: y,
        kind: StepKind::Objective,
        dist: sum_sq.sqrt(),
        sweep_norm_sq: Some(sum_sq),
        inner: Some(projections),
        converged,
    })
}

/// Runs the subgradient method for `cfg.max_iters` iterations from
/// `P_Q(argmin f)`, or until the iterate is feasible with vanishing
/// objective gradient.
pub fn run(p: &Problem, cfg: &SubgradConfig) -> Result<SubgradRun, SubgradError> {
    let mut x = p.q.project(&p.objective.unconstrained_minimizer());
    let mut trace = IterateTrace::new();
    let mut iterates = vec![x.clone()];
    let mut eval_points = Vec::with_capacity(cfg.max_iters);
    let mut converged = false;

    for k in 0..cfg.max_iters {
        let out = match cfg.update {
            FeasibilityUpdate::FarthestHalfspace => farthest_halfspace_step(p, cfg, k, &x)?,
            FeasibilityUpdate::ProjectionSweep => sweep_step(p, cfg, k, &x)?,
        };
        debug_assert!(p.q.contains(&out.x_next, 1e-9));
        trace.push(TraceRow {
            k,
            f: p.objective.value(&out.eval_point),
            viol: p.max_violation(&out.eval_point),
            step: out.kind,
            h: Some(step_size(k, p.diameter)),
            dist: out.dist,
            sweep_norm_sq: out.sweep_norm_sq,
            inner: out.inner,
        });
        x = out.x_next;
        iterates.push(x.clone());
        eval_points.push(out.eval_point);
        if out.converged {
            converged = true;
            break;
        }
    }

    Ok(SubgradRun {
        trace,
        iterates,
        eval_points,
        converged,
    })
}
