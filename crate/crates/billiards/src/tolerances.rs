//! Centralized numeric tolerances and step sizes.
//!
//! Every threshold the pipeline relies on lives here with its justification,
//! so tests and documentation reference one authoritative value instead of
//! scattered literals. Quantities suffixed `_REL` are dimensionless factors
//! applied to a body-dependent scale (diameter or function value); the rest
//! are absolute in the stated unit.

/// How far `|u|` may drift from 1 before a direction argument is rejected
/// instead of being silently renormalized.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Orthonormality defect allowed in a tangent frame (dot products and norm
/// deviations). Frames come from one Gram-Schmidt step at double precision,
/// which lands around 1e-16; 1e-12 leaves margin without hiding bugs.
pub const FRAME_ORTHO_TOL: f64 = 1e-12;

/// Residual (implicit form for ellipsoids, radial form otherwise) at which a
/// ray-exit root search stops refining.
pub const RAY_RESIDUAL_TOL: f64 = 1e-12;

/// Residual bound every point claimed to lie on the surface must satisfy.
pub const SURFACE_RESIDUAL_TOL: f64 = 1e-10;

/// Step for the curvature-proxy second differences, relative to diameter.
/// Second differences lose two orders to roundoff (eps / h^2 ~ 1e-8 at
/// h = 1e-4), which is far below the 2% accuracy the proxy needs.
pub const CURVATURE_FD_STEP_REL: f64 = 1e-4;

/// Step for validation-grade first-derivative oracles (normals, gradients),
/// relative to diameter. Central differences at 1e-5 balance truncation
/// (~1e-10) against roundoff (~1e-11).
pub const VALIDATION_FD_STEP_REL: f64 = 1e-5;

/// Margin by which a ray origin must be strictly inside the body
/// (radial residual at most minus this).
pub const INTERIOR_MARGIN: f64 = 1e-9;

/// Gradient norm at which Newton iteration declares convergence. Reported
/// orbits are later required to satisfy the looser `REPORT_GRAD_NORM`, so
/// converged points carry two orders of slack.
pub const GRAD_CONVERGENCE_TOL: f64 = 1e-10;

/// Gradient norm every reported critical orbit must satisfy.
pub const REPORT_GRAD_NORM: f64 = 1e-8;

/// Newton iteration cap per seed; seeds that have not converged by then are
/// counted as failed, never reported.
pub const MAX_NEWTON_ITERS: usize = 500;

/// Step for the Hessian central differences of the chart gradient, relative
/// to diameter (chart coordinates measure ambient length, so the two
/// readings coincide for unit-scale bodies).
pub const HESSIAN_FD_STEP_REL: f64 = 1e-5;

/// Relative asymmetry `|H - H^T| / |H|` tolerated before symmetrization;
/// larger indicates a broken chart derivative, not finite-difference noise.
pub const HESSIAN_ASYMMETRY_TOL: f64 = 1e-4;

/// Eigenvalues below this fraction of the largest-magnitude eigenvalue count
/// as zero when classifying Morse index and nullity.
pub const NULLITY_SCALE_TOL: f64 = 1e-6;

/// Positional half of orbit deduplication: two configurations belong to the
/// same orbit only if some dihedral relabeling brings every vertex within
/// this fraction of the diameter.
pub const DEDUP_POS_REL: f64 = 1e-5;

/// Value half of orbit deduplication: perimeters must also agree to this
/// relative tolerance.
pub const DEDUP_VAL_REL: f64 = 1e-8;

/// Separation floor, relative to diameter: cyclically consecutive vertices
/// closer than this do not count as distinct, and the configuration is
/// rejected as degenerate.
pub const SEPARATION_FLOOR_REL: f64 = 1e-7;

/// The collision log-barrier activates below this multiple of the
/// separation floor; converged points inside the zone are rejected.
pub const BARRIER_ZONE_FACTOR: f64 = 10.0;

/// Reflection-law residual (angle-balance and coplanarity defects) every
/// reported orbit must satisfy.
pub const REFLECT_RESIDUAL_TOL: f64 = 1e-6;

/// Closure gap of the forward-shooting check, relative to diameter.
pub const SHOOT_CLOSURE_REL: f64 = 1e-6;

/// Directions with `|dir . normal|` below this are tangential and cannot
/// start a shooting step.
pub const TANGENTIAL_DIR_TOL: f64 = 1e-9;

/// Tolerance (relative to diameter) under which a dihedral element is
/// counted as stabilizing a configuration.
pub const STABILIZER_POS_REL: f64 = 1e-5;

/// Exact-symmetry tolerance: acting by a dihedral element and comparing via
/// orbit distance must give zero at this absolute scale.
pub const SYMMETRY_EXACT_TOL: f64 = 1e-12;
