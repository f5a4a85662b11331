//! Damped Newton refinement toward critical points of the perimeter.
//!
//! Critical points of every Morse index are wanted, so the iteration
//! follows the plain Newton direction (which converges to saddles as well
//! as extrema) with two safeguards: the Hessian spectrum is clamped away
//! from zero to bound the step, and steps are backtracked against the
//! squared gradient norm as a merit function. A logarithmic barrier on
//! consecutive vertex distances switches on only inside a thin zone above
//! the separation floor, keeping iterates away from the degenerate
//! boundary of the configuration space without biasing interior critical
//! points; converged points inside that zone are rejected.

use nalgebra::{DVector, Vector3};

use crate::configspace::{grad, separation_floor, Chart, Configuration};
use crate::error::Result;
use crate::surface::SurfaceSpec;
use crate::tolerances::{BARRIER_ZONE_FACTOR, MAX_NEWTON_ITERS};

/// Eigenvalues are clamped in magnitude to this fraction of the largest
/// one before inverting, bounding the Newton step without flipping the
/// direction's saddle-seeking character.
const EIGENVALUE_FLOOR_REL: f64 = 1e-8;
/// Newton steps are capped at this fraction of the body diameter.
const STEP_CAP_REL: f64 = 0.25;
/// Deepest backtracking halving before the attempt is abandoned.
const MAX_BACKTRACKS: u32 = 16;
/// Every this many iterations the merit must have dropped to a quarter,
/// else the attempt is written off as stagnant.
const STAGNATION_WINDOW: usize = 25;

/// A successfully refined critical point (pure perimeter gradient below
/// the convergence tolerance and clear of the separation floor).
#[derive(Debug, Clone)]
pub struct ConvergedPoint {
    pub config: Configuration,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Chart-coordinate gradient of the barrier term at the configuration:
/// zero outside the zone, a mutual repulsion on consecutive vertices
/// closer than `zone`.
fn barrier_gradient(spec: &SurfaceSpec, c: &Configuration, zone: f64) -> Result<DVector<f64>> {
    let points = c.points(spec)?;
    let n = points.len();
    let mut forces = vec![Vector3::zeros(); n];
    let mu = zone;
    for i in 0..n {
        let j = (i + 1) % n;
        let sep = points[j].x - points[i].x;
        let d = sep.norm();
        if d < zone {
            // Gradient of -mu*log(d/zone) with respect to each endpoint:
            // pushes the pair apart with strength mu/d.
            let strength = mu / (d * d);
            forces[i] -= sep * strength;
            forces[j] += sep * strength;
        }
    }
    let mut g = DVector::zeros(2 * n);
    for (i, p) in points.iter().enumerate() {
        g[2 * i] = forces[i].dot(&p.e1);
        g[2 * i + 1] = forces[i].dot(&p.e2);
    }
    Ok(g)
}

/// Squared norm of the barrier-augmented gradient; the line-search merit.
fn merit(spec: &SurfaceSpec, c: &Configuration, zone: f64) -> Result<f64> {
    let g = grad(spec, c)? + barrier_gradient(spec, c, zone)?;
    Ok(g.norm_squared())
}

/// Refines one seed until the pure perimeter gradient norm falls below
/// `grad_tol`. Returns `None` when the attempt fails — separation
/// collapse, stalled line search, stagnation, or the iteration cap —
/// which multistart treats as an unconverged seed, not an error.
pub fn refine(spec: &SurfaceSpec, seed: &Configuration, grad_tol: f64) -> Option<ConvergedPoint> {
    let floor = separation_floor(spec);
    let zone = BARRIER_ZONE_FACTOR * floor;
    let step_cap = STEP_CAP_REL * spec.diameter();

    let mut c = seed.clone();
    let mut checkpoint_merit = f64::INFINITY;
    for iter in 0..MAX_NEWTON_ITERS {
        let chart = Chart::new(spec, &c).ok()?;
        let g_pure = chart.gradient_at(&DVector::zeros(chart.dim())).ok()?;
        let gn = g_pure.norm();
        if !gn.is_finite() {
            return None;
        }
        if gn <= grad_tol {
            if c.min_separation(spec) < zone {
                return None;
            }
            let value = crate::configspace::perimeter(spec, &c).ok()?;
            return Some(ConvergedPoint {
                config: c,
                value,
                grad_norm: gn,
                iterations: iter,
            });
        }

        let g_aug = &g_pure + barrier_gradient(spec, &c, zone).ok()?;
        let merit_here = g_aug.norm_squared();
        if iter % STAGNATION_WINDOW == 0 {
            if merit_here > 0.25 * checkpoint_merit {
                return None;
            }
            checkpoint_merit = merit_here;
        }

        let (h, _) = chart.hessian_with_asymmetry().ok()?;
        let eig = h.symmetric_eigen();
        let max_abs = eig.eigenvalues.amax();
        let mut step = if max_abs > 0.0 {
            // p = -Q clamp(L)^-1 Q^T g, preserving each eigenvalue's sign.
            let floor_mag = EIGENVALUE_FLOOR_REL * max_abs;
            let coeffs = eig.eigenvectors.transpose() * &g_aug;
            let scaled = DVector::from_iterator(
                coeffs.len(),
                coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| {
                    let clamped = l.signum() * l.abs().max(floor_mag);
                    -c / clamped
                }),
            );
            &eig.eigenvectors * scaled
        } else {
            -g_aug.clone()
        };
        let len = step.norm();
        if !len.is_finite() || len == 0.0 {
            return None;
        }
        if len > step_cap {
            step *= step_cap / len;
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            if let Ok(cand) = chart.configuration_at(&(&step * t)) {
                if let Ok(m) = merit(spec, &cand, zone) {
                    if m.is_finite() && m <= merit_here * (1.0 - 1e-4 * t) {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        c = accepted?;
    }
    None
}
