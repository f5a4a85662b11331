//! Crate-wide error type.
//!
//! One enum covers the whole pipeline so the CLI can map failures onto its
//! exit-code contract in a single match: configuration problems (exit 2),
//! geometric rejections such as a non-convex body (exit 3), and internal
//! identity failures that indicate a bug rather than bad input.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A surface or run configuration failed validation (bad axes, amplitude
    /// budget exceeded, malformed JSON, inconsistent field combination).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The surface failed the strict-convexity check; carries the worst
    /// sampled curvature proxy and the direction where it was found.
    #[error("surface is not strictly convex: min curvature proxy {min_proxy:.6e} at direction ({at_direction:?})")]
    NotConvex {
        min_proxy: f64,
        at_direction: [f64; 3],
    },

    /// An operation was called outside its domain (even n where odd is
    /// required, n too small, mixed-n ring operands, tangential shooting
    /// direction, point not inside the body, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numeric procedure failed: integer overflow in exact arithmetic,
    /// root bracketing failure, or a linear solve that did not converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A configuration violated the separation floor (cyclically consecutive
    /// vertices too close to count as distinct).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A mathematical identity that must hold by construction failed.
    /// Any occurrence is a bug in this crate, never a property of the input.
    #[error("internal identity violated: {0}")]
    InternalIdentity(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
