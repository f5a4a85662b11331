//! Periodic billiard trajectories in smooth strictly convex bodies.
//!
//! A billiard trajectory bounces inside a convex body, reflecting off the
//! boundary with equal angles in the plane spanned by the ray and the normal.
//! The n-periodic trajectories are exactly the critical points of the
//! perimeter functional on inscribed n-gons, and for odd n on a generic
//! surface the number of trajectories distinct up to the dihedral relabeling
//! group is bounded below by 2(n-1). This crate makes that statement
//! executable from both ends:
//!
//! * [`surface`] — strictly convex bodies given as radial graphs over the
//!   unit sphere (ellipsoids, harmonic perturbations of a sphere), with
//!   normals, tangent frames, curvature validation, and ray exits;
//! * [`configspace`] — inscribed n-gons, the perimeter functional with its
//!   chart gradient and Hessian, the dihedral action, and orbit-level
//!   comparison;
//! * [`solver`] — deterministic multistart Newton search for critical points
//!   of every Morse index, orbit deduplication, degeneracy classification,
//!   and forward-shooting cross-validation;
//! * [`cohomology`] — the exact integer arithmetic producing the bound
//!   2(n-1) and the ring structure behind it;
//! * [`cli`] — configuration loading and the report/trajectory artifacts for
//!   the `billiards` binary.

pub mod cli;
pub mod cohomology;
pub mod configspace;
pub mod error;
pub mod solver;
pub mod surface;
pub mod tolerances;

pub use error::{Error, Result};
