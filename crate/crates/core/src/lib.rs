//! Numerical laboratory for the inverse mean curvature flow of star-shaped,
//! mean-convex hypersurfaces in hyperbolic space H^n.
//!
//! Hypersurfaces are radial graphs over S^{n-1}. The crate evolves them by
//! IMCF and evaluates the Willmore-type functional
//! `Q(t) = |Σ_t|^{-(n-3)/(n-1)} ∫(p_1² − 1) dμ`, the inequalities bounding it
//! and the large-time expansions behind its limit.
//!
//! - [`sphere`]: grids, stencils and quadrature on S^{n-1}
//! - [`geometry`]: metric, second fundamental form, principal curvatures
//! - [`flow`]: the flow itself, RK4 time stepping and run diagnostics
//! - [`functionals`]: Q, inequality deficits, Hawking mass, residuals
//! - [`shapes`]: initial data

pub mod error;
pub mod flow;
pub mod functionals;
pub mod geometry;
pub mod shapes;
pub mod sphere;

pub use error::{ImcfError, Result};
pub use flow::{DtPolicy, FlowConfig, FlowRun, FlowState, StepDiagnostics, Termination};
pub use functionals::InequalityReport;
pub use geometry::{compute_geometry, GeometryFields, RadialGraph};
pub use shapes::{make_shape, validate_shape, ShapeKind, ShapeSpec};
pub use sphere::{build_grid, unit_sphere_measure, GridMode, ScalarField, SphereGrid};
