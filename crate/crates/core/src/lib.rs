//! First-order convex optimization with halfspace feasibility updates.
//!
//! This crate solves problems of the form
//!
//! ```text
//!     minimize   f(x)
//!     s.t.       f_j(x) <= 0,  j = 1..m
//!                x in Q
//! ```
//!
//! where the feasible set is explored through supporting halfspaces built
//! from subgradients of the constraint functions. Three solver families are
//! provided:
//!
//! - [`subgrad`]: a subgradient method with per-iteration feasibility
//!   updates, converging at rate `O(1/sqrt(k))` in objective value;
//! - [`haugazeau`]: a generalization of Haugazeau's alternating-halfspace
//!   scheme for strongly convex objectives, converging at `O(1/k)`;
//! - [`strongcvx`]: an outer halfspace-combination loop with an inner
//!   projected-gradient solver, for objectives that are strongly convex with
//!   Lipschitz gradient but not easy to minimize over two halfspaces exactly.
//!
//! The [`analysis`] module holds the closed-form references these solvers are
//! benchmarked against (halfspace-revelation lower bounds, the two-halfspace
//! recurrence, the slow no-regularity family), and [`harness`] builds random
//! instances with known optima plus the constant estimators used by the
//! convergence-bound checks.

pub mod analysis;
pub mod geometry;
pub mod harness;
pub mod haugazeau;
pub mod linalg;
pub mod model;
pub mod strongcvx;
pub mod subgrad;
pub mod trace;

pub use geometry::Halfspace;
pub use model::{ConstraintFunction, ObjectiveFunction, Problem, SimpleSet};
pub use trace::{IterateTrace, StepKind, TraceRow};
