//! Forward shooting: iterate the billiard map directly, as a dynamical
//! cross-check on variational critical points.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::surface::{SurfacePoint, SurfaceSpec};
use crate::tolerances::TANGENTIAL_DIR_TOL;

/// Specular reflection of a direction at a unit normal.
pub fn reflect(dir: &Vector3<f64>, nu: &Vector3<f64>) -> Vector3<f64> {
    dir - nu * (2.0 * dir.dot(nu))
}

/// A shot polyline: the launch point followed by every bounce, plus the
/// mismatch between the final state and the launch state.
#[derive(Debug, Clone)]
pub struct ShotRecord {
    /// Launch point first, then one entry per bounce (`bounces + 1` total).
    pub points: Vec<Vector3<f64>>,
    /// Distance from the final bounce back to the launch point.
    pub closure_gap: f64,
    /// Distance between the final outgoing direction and the launch
    /// direction.
    pub direction_gap: f64,
}

/// Launches a ray from a boundary point into the body and follows it
/// through `bounces` specular reflections.
pub fn shoot(
    spec: &SurfaceSpec,
    start: &SurfacePoint,
    dir: &Vector3<f64>,
    bounces: usize,
) -> Result<ShotRecord> {
    if bounces == 0 {
        return Err(Error::Domain("shooting needs at least one bounce".into()));
    }
    let dir0 = dir
        .try_normalize(0.0)
        .ok_or_else(|| Error::Domain("shot direction must be nonzero".into()))?;
    let inward = dir0.dot(&start.nu);
    if inward.abs() < TANGENTIAL_DIR_TOL {
        return Err(Error::Domain(format!(
            "shot direction is tangential to the boundary (dir.nu = {inward:.3e})"
        )));
    }
    if inward > 0.0 {
        return Err(Error::Domain(
            "shot direction points out of the body".into(),
        ));
    }

    let mut points = Vec::with_capacity(bounces + 1);
    points.push(start.x);
    let mut here = start.x;
    let mut d = dir0;
    for _ in 0..bounces {
        let hit = spec.ray_exit_from_boundary(&here, &d)?;
        d = reflect(&d, &hit.nu);
        here = hit.x;
        points.push(here);
    }
    Ok(ShotRecord {
        closure_gap: (here - start.x).norm(),
        direction_gap: (d - dir0).norm(),
        points,
    })
}
