//! Smooth strictly convex surface models and their geometry queries.
//!
//! Both supported kinds are radial graphs over the unit sphere, x = rho(u) u:
//! ellipsoids with rho(u) = (u_x^2/a^2 + u_y^2/b^2 + u_z^2/c^2)^(-1/2), and
//! harmonically perturbed spheres with rho = base + sum of real spherical
//! harmonic terms. One parameterization serves evaluation, optimization
//! charts, and containment tests alike.
//!
//! The outward normal comes from the radial-graph identity
//! `normal ~ u - grad_S(rho)/rho` with the spherical gradient of rho known
//! analytically for both kinds (for ellipsoids this reduces exactly to the
//! implicit-form gradient `(x/a^2, y/b^2, z/c^2)`). Strict convexity is not
//! assumed from the parameters: [`SurfaceSpec::convexity_check`] estimates
//! the smallest principal curvature over a quasi-uniform sample by second
//! differences and rejects any body whose proxy is not strictly positive.
//!
//! All operations are pure; a validated spec is immutable and freely
//! shareable across threads.

pub mod harmonics;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::{CURVATURE_FD_STEP_REL, INTERIOR_MARGIN, RAY_RESIDUAL_TOL, UNIT_NORM_TOL};

/// Amplitude budget: the sum of |amplitude| over all harmonic terms must
/// stay below this fraction of the base radius, keeping the radial function
/// positive for every body that can pass the convexity check.
pub const AMPLITUDE_BUDGET_FRACTION: f64 = 0.5;

/// Smallest admissible convexity sample count; fewer directions cannot see
/// a dent reliably.
pub const MIN_CONVEXITY_SAMPLES: usize = 100;

/// Shape parameters as they appear in configuration files.
///
/// Serialized forms:
/// `{"kind":"ellipsoid","axes":[a,b,c]}` and
/// `{"kind":"radial_harmonic","base_radius":r,"coeffs":[[l,m,amp],...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceShape {
    /// Semi-axes (a, b, c) along the coordinate directions.
    Ellipsoid { axes: [f64; 3] },
    /// Base radius plus real spherical-harmonic perturbations, each given
    /// as (degree l, order m, amplitude).
    RadialHarmonic {
        base_radius: f64,
        coeffs: Vec<(u32, i32, f64)>,
    },
}

/// A validated surface: shape parameters plus derived bounds, with the
/// convexity margin filled in once [`SurfaceSpec::convexity_check`] has run.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    shape: SurfaceShape,
    diameter: f64,
    convexity_margin: Option<f64>,
}

/// A boundary point with its chart data: parameter direction, position,
/// outward unit normal, and a deterministic orthonormal tangent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    /// Unit parameter direction on the sphere.
    pub u: Vector3<f64>,
    /// Ambient position x = rho(u) u.
    pub x: Vector3<f64>,
    /// Outward unit normal.
    pub nu: Vector3<f64>,
    /// First tangent frame vector.
    pub e1: Vector3<f64>,
    /// Second tangent frame vector, nu x e1.
    pub e2: Vector3<f64>,
}

impl SurfaceSpec {
    /// Validates shape parameters and derives scale bounds. Convexity is
    /// *not* checked here; call [`Self::convexity_check`] before trusting
    /// the body.
    pub fn new(shape: SurfaceShape) -> Result<Self> {
        match &shape {
            SurfaceShape::Ellipsoid { axes } => {
                for &axis in axes {
                    if !axis.is_finite() || axis <= 0.0 {
                        return Err(Error::InvalidConfig(format!(
                            "ellipsoid semi-axes must be finite and positive, got {axes:?}"
                        )));
                    }
                }
            }
            SurfaceShape::RadialHarmonic {
                base_radius,
                coeffs,
            } => {
                if !base_radius.is_finite() || *base_radius <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "base radius must be finite and positive, got {base_radius}"
                    )));
                }
                let mut amplitude_sum = 0.0;
                for &(l, m, amp) in coeffs {
                    if l > harmonics::MAX_DEGREE {
                        return Err(Error::InvalidConfig(format!(
                            "harmonic degree {l} exceeds the supported maximum {}",
                            harmonics::MAX_DEGREE
                        )));
                    }
                    if m.unsigned_abs() > l {
                        return Err(Error::InvalidConfig(format!(
                            "harmonic order {m} exceeds degree {l}"
                        )));
                    }
                    if !amp.is_finite() {
                        return Err(Error::InvalidConfig(format!(
                            "harmonic amplitude for (l={l}, m={m}) is not finite"
                        )));
                    }
                    amplitude_sum += amp.abs();
                }
                if amplitude_sum >= AMPLITUDE_BUDGET_FRACTION * base_radius {
                    return Err(Error::InvalidConfig(format!(
                        "harmonic amplitude budget exceeded: sum |amp| = {amplitude_sum} \
                         must stay below {AMPLITUDE_BUDGET_FRACTION} * base radius = {}",
                        AMPLITUDE_BUDGET_FRACTION * base_radius
                    )));
                }
            }
        }
        let diameter = match &shape {
            SurfaceShape::Ellipsoid { axes } => 2.0 * axes.iter().cloned().fold(0.0, f64::max),
            SurfaceShape::RadialHarmonic {
                base_radius,
                coeffs,
            } => {
                // sup rho <= base + sum |amp| sup|Y_lm|; cheap, deterministic,
                // and only used to scale tolerances, so an upper bound is fine.
                let sup: f64 = coeffs
                    .iter()
                    .map(|&(l, _, amp)| amp.abs() * harmonics::sup_bound(l))
                    .sum();
                2.0 * (base_radius + sup)
            }
        };
        Ok(Self {
            shape,
            diameter,
            convexity_margin: None,
        })
    }

    /// Convenience constructor for an ellipsoid with semi-axes (a, b, c).
    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(SurfaceShape::Ellipsoid { axes: [a, b, c] })
    }

    /// Convenience constructor for a harmonically perturbed sphere.
    pub fn radial_harmonic(base_radius: f64, coeffs: Vec<(u32, i32, f64)>) -> Result<Self> {
        Self::new(SurfaceShape::RadialHarmonic {
            base_radius,
            coeffs,
        })
    }

    pub fn shape(&self) -> &SurfaceShape {
        &self.shape
    }

    /// Upper bound on the body diameter, used to scale every relative
    /// tolerance. Exact for ellipsoids (2 max axis).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Smallest sampled curvature proxy, available after
    /// [`Self::convexity_check`] has succeeded.
    pub fn convexity_margin(&self) -> Option<f64> {
        self.convexity_margin
    }

    /// A copy guaranteed to have passed the convexity check; reuses an
    /// existing margin, otherwise samples afresh.
    pub fn ensure_convex(&self) -> Result<Self> {
        let mut copy = self.clone();
        if copy.convexity_margin.is_none() {
            copy.convexity_check(4 * MIN_CONVEXITY_SAMPLES)?;
        }
        Ok(copy)
    }

    /// Stable content digest of the shape (FNV-1a over its canonical JSON),
    /// identifying the surface in reports.
    pub fn digest(&self) -> String {
        let canonical =
            serde_json::to_string(&self.shape).expect("shape serialization is infallible");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in canonical.bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("fnv1a:{hash:016x}")
    }

    /// Radial function rho at a unit direction.
    pub fn rho(&self, u: &Vector3<f64>) -> f64 {
        self.rho_and_gradient(u).0
    }

    /// Radial function together with its spherical (tangential) gradient at
    /// a unit direction. The gradient is exact, not finite-differenced.
    pub fn rho_and_gradient(&self, u: &Vector3<f64>) -> (f64, Vector3<f64>) {
        match &self.shape {
            SurfaceShape::Ellipsoid { axes } => {
                let m = Vector3::new(
                    u.x / (axes[0] * axes[0]),
                    u.y / (axes[1] * axes[1]),
                    u.z / (axes[2] * axes[2]),
                );
                let q = u.dot(&m);
                let rho = q.powf(-0.5);
                // Ambient extension rho(v) = q(v)^(-1/2) restricted to the
                // sphere; only the tangential part of its gradient matters.
                let ambient = m * (-q.powf(-1.5));
                let tangential = ambient - u * ambient.dot(u);
                (rho, tangential)
            }
            SurfaceShape::RadialHarmonic {
                base_radius,
                coeffs,
            } => {
                let mut rho = *base_radius;
                let mut grad = Vector3::zeros();
                for &(l, m, amp) in coeffs {
                    let (value, gradient) = harmonics::eval_with_gradient(l, m, u);
                    rho += amp * value;
                    grad += amp * gradient;
                }
                (rho, grad)
            }
        }
    }

    /// Signed radial residual |x| - rho(x/|x|): negative strictly inside,
    /// zero on the surface, positive outside.
    pub fn radial_residual(&self, x: &Vector3<f64>) -> f64 {
        let r = x.norm();
        if r < 1e-300 {
            // The origin is interior to every valid body.
            return -self.rho(&Vector3::z());
        }
        r - self.rho(&(x / r))
    }

    /// Evaluates the surface point at a unit direction: position, outward
    /// normal, and the deterministic tangent frame.
    ///
    /// The direction must be unit to within `UNIT_NORM_TOL` and is
    /// renormalized internally.
    pub fn point_at(&self, u: &Vector3<f64>) -> Result<SurfacePoint> {
        if !u.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain("direction has non-finite components".into()));
        }
        let norm = u.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::Domain(format!(
                "direction must be unit to within {UNIT_NORM_TOL:.0e}, |u| = {norm}"
            )));
        }
        let u = u / norm;
        let (rho, grad) = self.rho_and_gradient(&u);
        if rho <= 0.0 {
            return Err(Error::Domain(format!(
                "radial function is not positive at direction {u:?}"
            )));
        }
        let x = u * rho;
        // Radial-graph normal direction: u - grad_S(rho)/rho, outward since
        // rho > 0. For ellipsoids this is exactly parallel to the implicit
        // gradient (x/a^2, y/b^2, z/c^2).
        let nu = (u - grad / rho).normalize();
        let (e1, e2) = tangent_frame(&nu);
        Ok(SurfacePoint { u, x, nu, e1, e2 })
    }

    /// Curvature proxy at one direction: the smallest eigenvalue of the
    /// second-fundamental-form estimate built from second differences of the
    /// position over the tangent frame. Positive for locally convex points;
    /// equals the smallest principal curvature up to O(step^2).
    pub fn curvature_proxy(&self, u: &Vector3<f64>) -> Result<f64> {
        let p = self.point_at(u)?;
        let h = CURVATURE_FD_STEP_REL * self.diameter;
        let rho = p.x.norm();
        // Chart pullbacks of the frame onto the parameter sphere; the chart
        // below has d(position)/d(delta_j) = e_j exactly at delta = 0, so the
        // second differences live in an orthonormal parameterization and the
        // 2x2 form's eigenvalues approximate the principal curvatures.
        let te1 = (p.e1 - p.u * p.e1.dot(&p.u)) / rho;
        let te2 = (p.e2 - p.u * p.e2.dot(&p.u)) / rho;
        let position = |d1: f64, d2: f64| -> Vector3<f64> {
            let un = (p.u + te1 * d1 + te2 * d2).normalize();
            un * self.rho(&un)
        };
        let d11 = (position(h, 0.0) + position(-h, 0.0) - 2.0 * p.x) / (h * h);
        let d22 = (position(0.0, h) + position(0.0, -h) - 2.0 * p.x) / (h * h);
        let d12 =
            (position(h, h) + position(-h, -h) - position(h, -h) - position(-h, h)) / (4.0 * h * h);
        let s11 = -p.nu.dot(&d11);
        let s22 = -p.nu.dot(&d22);
        let s12 = -p.nu.dot(&d12);
        let mean = 0.5 * (s11 + s22);
        let spread = (0.25 * (s11 - s22).powi(2) + s12 * s12).sqrt();
        Ok(mean - spread)
    }

    /// Verifies strict convexity on a quasi-uniform sample of directions and
    /// stores the smallest curvature proxy as the convexity margin.
    ///
    /// Directions where the radial function fails to be positive are
    /// reported as non-convex too: such a body is not a closed radial graph
    /// at all.
    pub fn convexity_check(&mut self, sample_count: usize) -> Result<f64> {
        if sample_count < MIN_CONVEXITY_SAMPLES {
            return Err(Error::Domain(format!(
                "convexity check needs at least {MIN_CONVEXITY_SAMPLES} samples, got {sample_count}"
            )));
        }
        let mut min_proxy = f64::INFINITY;
        let mut min_direction = Vector3::z();
        for u in fibonacci_directions(sample_count) {
            if self.rho(&u) <= 0.0 {
                return Err(Error::NotConvex {
                    min_proxy: f64::NEG_INFINITY,
                    at_direction: [u.x, u.y, u.z],
                });
            }
            let proxy = self.curvature_proxy(&u)?;
            if proxy < min_proxy {
                min_proxy = proxy;
                min_direction = u;
            }
        }
        if min_proxy <= 0.0 {
            return Err(Error::NotConvex {
                min_proxy,
                at_direction: [min_direction.x, min_direction.y, min_direction.z],
            });
        }
        self.convexity_margin = Some(min_proxy);
        Ok(min_proxy)
    }

    /// Residual used for ray root finding: the dimensionless implicit form
    /// for ellipsoids, the radial residual otherwise. Negative inside,
    /// positive outside, zero on the surface.
    fn exit_residual(&self, x: &Vector3<f64>) -> f64 {
        match &self.shape {
            SurfaceShape::Ellipsoid { axes } => {
                (x.x / axes[0]).powi(2) + (x.y / axes[1]).powi(2) + (x.z / axes[2]).powi(2) - 1.0
            }
            SurfaceShape::RadialHarmonic { .. } => self.radial_residual(x),
        }
    }

    /// The unique boundary point `origin + t dir`, t > 0, for a strictly
    /// interior origin. Root located by geometric bracketing followed by
    /// safeguarded (Illinois) refinement to residual `RAY_RESIDUAL_TOL`.
    pub fn ray_exit(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Result<SurfacePoint> {
        let dir = normalize_dir(dir)?;
        if self.radial_residual(origin) > -INTERIOR_MARGIN {
            return Err(Error::Domain(format!(
                "ray origin must be strictly inside the body (radial residual {:.3e})",
                self.radial_residual(origin)
            )));
        }
        let f = |t: f64| self.exit_residual(&(origin + dir * t));
        let (lo, hi) = bracket_upward(&f, 0.0, f(0.0), self.diameter)?;
        let t = refine_bracketed_root(&f, lo, hi)?;
        self.point_at(&(origin + dir * t).normalize())
    }

    /// Boundary-start variant used by the shooting map: from a point on the
    /// surface, follow an inward direction to the *next* boundary point.
    ///
    /// The caller is responsible for `dir` genuinely entering the body
    /// (negative component along the outward normal); a direction that never
    /// re-enters is a domain error.
    pub(crate) fn ray_exit_from_boundary(
        &self,
        start: &Vector3<f64>,
        dir: &Vector3<f64>,
    ) -> Result<SurfacePoint> {
        let dir = normalize_dir(dir)?;
        let f = |t: f64| self.exit_residual(&(start + dir * t));
        // Find a strictly interior time; chord lengths of interest are
        // O(diameter), so start at a modest fraction and shrink.
        let mut t_inside = 1e-3 * self.diameter;
        let mut f_inside = f(t_inside);
        let mut shrink = 0;
        while f_inside >= 0.0 {
            t_inside *= 0.1;
            f_inside = f(t_inside);
            shrink += 1;
            if shrink > 12 {
                return Err(Error::Domain(
                    "shooting direction does not enter the body".into(),
                ));
            }
        }
        let (lo, hi) = bracket_upward(&f, t_inside, f_inside, self.diameter)?;
        let t = refine_bracketed_root(&f, lo, hi)?;
        self.point_at(&(start + dir * t).normalize())
    }
}

/// Validates finiteness and unit norm, returning the normalized direction.
fn normalize_dir(dir: &Vector3<f64>) -> Result<Vector3<f64>> {
    if !dir.iter().all(|c| c.is_finite()) {
        return Err(Error::Domain("direction has non-finite components".into()));
    }
    let norm = dir.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::Domain(format!(
            "direction must be unit to within {UNIT_NORM_TOL:.0e}, |dir| = {norm}"
        )));
    }
    Ok(dir / norm)
}

/// Deterministic tangent frame: seed with the global axis least aligned with
/// the normal (lowest index on ties), project, normalize, and complete with
/// the cross product.
pub fn tangent_frame(nu: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let abs = [nu.x.abs(), nu.y.abs(), nu.z.abs()];
    let mut k = 0;
    for j in 1..3 {
        if abs[j] < abs[k] {
            k = j;
        }
    }
    let mut axis = Vector3::zeros();
    axis[k] = 1.0;
    let e1 = (axis - nu * nu[k]).normalize();
    let e2 = nu.cross(&e1);
    (e1, e2)
}

/// Quasi-uniform directions on the sphere (Fibonacci lattice), deterministic
/// in the count.
pub fn fibonacci_directions(count: usize) -> impl Iterator<Item = Vector3<f64>> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    (0..count).map(move |i| {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let p = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
        Vector3::new(r * p.cos(), r * p.sin(), z)
    })
}

/// Grows an upper bracket geometrically from a known-inside time until the
/// residual turns positive. Returns (lo, hi) with f(lo) < 0 <= f(hi).
fn bracket_upward(
    f: &impl Fn(f64) -> f64,
    t_inside: f64,
    f_inside: f64,
    diameter: f64,
) -> Result<(f64, f64)> {
    debug_assert!(f_inside < 0.0);
    let mut lo = t_inside;
    let mut step = diameter / 16.0;
    let limit = t_inside + 4.0 * diameter;
    let mut hi = lo + step;
    loop {
        let fh = f(hi);
        if fh >= 0.0 {
            return Ok((lo, hi));
        }
        lo = hi;
        step *= 2.0;
        hi = lo + step;
        if hi > limit {
            return Err(Error::Numeric(format!(
                "failed to bracket a surface exit within {limit} length units"
            )));
        }
    }
}

/// Illinois-damped regula falsi with bisection safeguard on a sign-changing
/// bracket; terminates when the residual magnitude drops below
/// `RAY_RESIDUAL_TOL`.
fn refine_bracketed_root(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    debug_assert!(f_lo < 0.0 && f_hi >= 0.0);
    if f_hi.abs() <= RAY_RESIDUAL_TOL {
        return Ok(hi);
    }
    let mut last_moved_lo = false;
    for _ in 0..256 {
        let denom = f_hi - f_lo;
        let mut t = if denom.abs() > 0.0 {
            lo - f_lo * (hi - lo) / denom
        } else {
            0.5 * (lo + hi)
        };
        // Keep strictly interior so the bracket always shrinks.
        let mid = 0.5 * (lo + hi);
        if !(t > lo && t < hi) {
            t = mid;
        }
        let ft = f(t);
        if ft.abs() <= RAY_RESIDUAL_TOL {
            return Ok(t);
        }
        if ft < 0.0 {
            lo = t;
            f_lo = ft;
            if last_moved_lo {
                // Illinois weighting breaks one-sided stagnation.
                f_hi *= 0.5;
            }
            last_moved_lo = true;
        } else {
            hi = t;
            f_hi = ft;
            if !last_moved_lo {
                f_lo *= 0.5;
            }
            last_moved_lo = false;
        }
        if hi - lo < f64::EPSILON * hi.abs().max(1.0) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Numeric(
        "root refinement exceeded its iteration budget".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::tolerances::{FRAME_ORTHO_TOL, SURFACE_RESIDUAL_TOL, VALIDATION_FD_STEP_REL};

    fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
        loop {
            let v = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v / n;
            }
        }
    }

    fn wavy_spec() -> SurfaceSpec {
        SurfaceSpec::radial_harmonic(1.0, vec![(2, 1, 0.05), (3, -2, 0.04), (4, 0, 0.03)]).unwrap()
    }

    #[test]
    fn point_at_axis_cases() {
        let sphere = SurfaceSpec::ellipsoid(1.0, 1.0, 1.0).unwrap();
        let p = sphere.point_at(&Vector3::z()).unwrap();
        assert_relative_eq!(p.x, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-14);
        assert_relative_eq!(p.nu, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-14);

        let ell = SurfaceSpec::ellipsoid(2.0, 1.0, 1.0).unwrap();
        let p = ell.point_at(&Vector3::x()).unwrap();
        assert_relative_eq!(p.x, Vector3::new(2.0, 0.0, 0.0), epsilon = 1e-14);
        assert_relative_eq!(p.nu, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn point_at_renormalizes_within_tolerance_only() {
        let sphere = SurfaceSpec::ellipsoid(1.0, 1.0, 1.0).unwrap();
        let almost = Vector3::z() * (1.0 + 5e-10);
        assert!(sphere.point_at(&almost).is_ok());
        let off = Vector3::z() * (1.0 + 5e-9);
        assert!(matches!(sphere.point_at(&off), Err(Error::Domain(_))));
        assert!(sphere.point_at(&Vector3::zeros()).is_err());
        assert!(sphere.point_at(&Vector3::new(f64::NAN, 0.0, 1.0)).is_err());
    }

    #[test]
    fn ellipsoid_normal_matches_finite_difference_oracle() {
        let spec = SurfaceSpec::ellipsoid(1.0, 1.1, 1.25).unwrap();
        let [a, b, c] = match spec.shape() {
            SurfaceShape::Ellipsoid { axes } => *axes,
            _ => unreachable!(),
        };
        let implicit =
            |x: &Vector3<f64>| (x.x / a).powi(2) + (x.y / b).powi(2) + (x.z / c).powi(2) - 1.0;
        let h = VALIDATION_FD_STEP_REL * spec.diameter();
        let p = spec
            .point_at(&Vector3::new(1.0, 1.0, 1.0).normalize())
            .unwrap();
        let mut fd = Vector3::zeros();
        for k in 0..3 {
            let mut step = Vector3::zeros();
            step[k] = h;
            fd[k] = (implicit(&(p.x + step)) - implicit(&(p.x - step))) / (2.0 * h);
        }
        let fd = fd.normalize();
        assert!(
            (fd - p.nu).norm() <= 1e-6,
            "normal defect {}",
            (fd - p.nu).norm()
        );
    }

    #[test]
    fn ellipsoid_normal_is_parallel_to_implicit_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (a, b, c) = (
                rng.random_range(0.5..2.0),
                rng.random_range(0.5..2.0),
                rng.random_range(0.5..2.0),
            );
            let spec = SurfaceSpec::ellipsoid(a, b, c).unwrap();
            let u = random_unit(&mut rng);
            let p = spec.point_at(&u).unwrap();
            let implicit_grad =
                Vector3::new(p.x.x / (a * a), p.x.y / (b * b), p.x.z / (c * c)).normalize();
            assert!((implicit_grad - p.nu).norm() <= 1e-10);
        }
    }

    #[test]
    fn harmonic_normal_matches_finite_difference_oracle() {
        let spec = wavy_spec();
        let h = VALIDATION_FD_STEP_REL * spec.diameter();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut dirs: Vec<Vector3<f64>> = (0..30).map(|_| random_unit(&mut rng)).collect();
        dirs.push(Vector3::z());
        dirs.push(-Vector3::z());
        for u in dirs {
            let p = spec.point_at(&u).unwrap();
            let mut fd = Vector3::zeros();
            for k in 0..3 {
                let mut step = Vector3::zeros();
                step[k] = h;
                fd[k] = (spec.radial_residual(&(p.x + step)) - spec.radial_residual(&(p.x - step)))
                    / (2.0 * h);
            }
            let fd = fd.normalize();
            assert!(
                (fd - p.nu).norm() <= 1e-6,
                "normal defect {} at {u:?}",
                (fd - p.nu).norm()
            );
        }
    }

    #[test]
    fn frames_are_orthonormal_for_both_kinds() {
        let specs = [SurfaceSpec::ellipsoid(1.0, 1.1, 1.25).unwrap(), wavy_spec()];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in &specs {
            for _ in 0..200 {
                let p = spec.point_at(&random_unit(&mut rng)).unwrap();
                assert!((p.u.norm() - 1.0).abs() <= FRAME_ORTHO_TOL);
                assert!((p.nu.norm() - 1.0).abs() <= FRAME_ORTHO_TOL);
                assert!((p.e1.norm() - 1.0).abs() <= FRAME_ORTHO_TOL);
                assert!((p.e2.norm() - 1.0).abs() <= FRAME_ORTHO_TOL);
                assert!(p.e1.dot(&p.e2).abs() <= FRAME_ORTHO_TOL);
                assert!(p.e1.dot(&p.nu).abs() <= FRAME_ORTHO_TOL);
                assert!(p.e2.dot(&p.nu).abs() <= FRAME_ORTHO_TOL);
                assert_relative_eq!(p.x, p.u * spec.rho(&p.u), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sphere_curvature_proxy_is_inverse_radius() {
        for radius in [0.5, 1.0, 2.0] {
            let mut spec = SurfaceSpec::ellipsoid(radius, radius, radius).unwrap();
            let margin = spec.convexity_check(150).unwrap();
            assert!(
                (margin - 1.0 / radius).abs() <= 0.02 / radius,
                "radius {radius}: proxy {margin}"
            );
            for u in fibonacci_directions(50) {
                let proxy = spec.curvature_proxy(&u).unwrap();
                assert!((proxy - 1.0 / radius).abs() <= 0.02 / radius);
            }
        }
    }

    #[test]
    fn ellipsoid_min_curvature_matches_analytic_oracle() {
        // Analytic shape operator of an ellipsoid in the tangent frame:
        // S_jk = (e_j . M e_k) / |M x| with M = diag(a^-2, b^-2, c^-2).
        // Oracle is exact; the proxy should track it to finite-difference
        // accuracy sample by sample, and its minimum should approach the
        // global minimum a/c^2 = 1/4 attained on the equator of (1,1,2).
        let mut spec = SurfaceSpec::ellipsoid(1.0, 1.0, 2.0).unwrap();
        let m = Vector3::new(1.0, 1.0, 0.25);
        let analytic_min = |p: &SurfacePoint| {
            let me = |v: &Vector3<f64>| Vector3::new(m.x * v.x, m.y * v.y, m.z * v.z);
            let denom = me(&p.x).norm();
            let s11 = p.e1.dot(&me(&p.e1)) / denom;
            let s22 = p.e2.dot(&me(&p.e2)) / denom;
            let s12 = p.e1.dot(&me(&p.e2)) / denom;
            let mean = 0.5 * (s11 + s22);
            mean - (0.25 * (s11 - s22).powi(2) + s12 * s12).sqrt()
        };
        let mut sampled_min = f64::INFINITY;
        for u in fibonacci_directions(500) {
            let p = spec.point_at(&u).unwrap();
            let proxy = spec.curvature_proxy(&u).unwrap();
            let exact = analytic_min(&p);
            assert!(
                (proxy - exact).abs() <= 1e-4 * exact.abs().max(1.0),
                "proxy {proxy} vs exact {exact}"
            );
            sampled_min = sampled_min.min(proxy);
        }
        assert!((sampled_min - 0.25).abs() <= 0.01 * 0.25);
        let margin = spec.convexity_check(500).unwrap();
        assert!(margin > 0.0);
    }

    #[test]
    fn dented_surface_is_rejected_above_an_amplitude_threshold() {
        // 1-D search on the amplitude of a (4, 0) harmonic: the sampled
        // minimum proxy is positive for small amplitudes, negative for large
        // ones, and the sign change sits strictly inside the budget.
        let proxy_at = |amp: f64| -> f64 {
            let spec = SurfaceSpec::radial_harmonic(1.0, vec![(4, 0, amp)]).unwrap();
            fibonacci_directions(400)
                .map(|u| spec.curvature_proxy(&u).unwrap())
                .fold(f64::INFINITY, f64::min)
        };
        let (mut lo, mut hi) = (0.01, 0.4);
        assert!(proxy_at(lo) > 0.0, "small perturbation must stay convex");
        assert!(proxy_at(hi) < 0.0, "large dent must be caught");
        for _ in 0..20 {
            let mid = 0.5 * (lo + hi);
            if proxy_at(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let threshold = 0.5 * (lo + hi);
        assert!(threshold > 0.01 && threshold < 0.4);

        let mut dented = SurfaceSpec::radial_harmonic(1.0, vec![(4, 0, threshold * 1.2)]).unwrap();
        match dented.convexity_check(400) {
            Err(Error::NotConvex { min_proxy, .. }) => assert!(min_proxy <= 0.0),
            other => panic!("expected NotConvex, got {other:?}"),
        }
        let mut convex = SurfaceSpec::radial_harmonic(1.0, vec![(4, 0, threshold * 0.8)]).unwrap();
        assert!(convex.convexity_check(400).unwrap() > 0.0);
    }

    #[test]
    fn convexity_check_validates_sample_count() {
        let mut spec = SurfaceSpec::ellipsoid(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(spec.convexity_check(99), Err(Error::Domain(_))));
        assert!(spec.convexity_margin().is_none());
        spec.convexity_check(100).unwrap();
        assert!(spec.convexity_margin().unwrap() > 0.9);
    }

    #[test]
    fn ray_exit_axis_cases() {
        let sphere = SurfaceSpec::ellipsoid(1.0, 1.0, 1.0).unwrap();
        let p = sphere.ray_exit(&Vector3::zeros(), &Vector3::z()).unwrap();
        assert!((p.x - Vector3::new(0.0, 0.0, 1.0)).norm() <= 1e-10);

        let ell = SurfaceSpec::ellipsoid(2.0, 1.0, 1.0).unwrap();
        let p = ell.ray_exit(&Vector3::zeros(), &Vector3::x()).unwrap();
        assert!((p.x - Vector3::new(2.0, 0.0, 0.0)).norm() <= 1e-10);
    }

    #[test]
    fn ray_exit_matches_pure_bisection_oracle() {
        let spec = SurfaceSpec::ellipsoid(1.0, 1.1, 1.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let origin = random_unit(&mut rng) * rng.random_range(0.0..0.6);
            let dir = random_unit(&mut rng);
            let p = spec.ray_exit(&origin, &dir).unwrap();
            assert!(spec.exit_residual(&p.x).abs() <= 1e-10);
            assert!(spec.radial_residual(&p.x).abs() <= SURFACE_RESIDUAL_TOL);

            // Oracle: bisection only, to an interval of width 1e-12.
            let f = |t: f64| spec.exit_residual(&(origin + dir * t));
            let (mut lo, mut hi) = (0.0, 4.0 * spec.diameter());
            assert!(f(lo) < 0.0 && f(hi) > 0.0);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t_oracle = 0.5 * (lo + hi);
            let t_found = (p.x - origin).norm();
            assert!((t_found - t_oracle).abs() <= 1e-9);
        }
    }

    #[test]
    fn ray_exit_on_harmonic_surface_lands_on_surface() {
        let spec = wavy_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let origin = random_unit(&mut rng) * rng.random_range(0.0..0.4);
            let dir = random_unit(&mut rng);
            let p = spec.ray_exit(&origin, &dir).unwrap();
            assert!(spec.radial_residual(&p.x).abs() <= SURFACE_RESIDUAL_TOL);
            // The exit lies on the ray.
            let along = (p.x - origin).dot(&dir);
            assert!(along > 0.0);
            assert!(((p.x - origin) - dir * along).norm() <= 1e-9);
        }
    }

    #[test]
    fn ray_exit_rejects_exterior_and_boundary_origins() {
        let spec = SurfaceSpec::ellipsoid(1.0, 1.0, 1.0).unwrap();
        let outside = Vector3::new(2.0, 0.0, 0.0);
        assert!(matches!(
            spec.ray_exit(&outside, &Vector3::x()),
            Err(Error::Domain(_))
        ));
        let boundary = Vector3::new(1.0, 0.0, 0.0);
        assert!(matches!(
            spec.ray_exit(&boundary, &Vector3::x()),
            Err(Error::Domain(_))
        ));
        let inside = Vector3::new(0.5, 0.0, 0.0);
        assert!(matches!(
            spec.ray_exit(&inside, &(Vector3::x() * 2.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn boundary_exit_traverses_a_chord() {
        let spec = SurfaceSpec::ellipsoid(1.0, 1.1, 1.25).unwrap();
        let start = spec.point_at(&Vector3::x()).unwrap();
        // Aim inward at a slant; the result must be a different surface
        // point along the ray.
        let dir = (-start.nu + Vector3::new(0.0, 0.4, 0.3)).normalize();
        let p = spec.ray_exit_from_boundary(&start.x, &dir).unwrap();
        assert!(spec.radial_residual(&p.x).abs() <= SURFACE_RESIDUAL_TOL);
        assert!((p.x - start.x).norm() > 0.1 * spec.diameter());
        // A direction that leaves the body immediately is a domain error.
        let out = spec.ray_exit_from_boundary(&start.x, &start.nu);
        assert!(matches!(out, Err(Error::Domain(_))));
    }

    #[test]
    fn spec_validation_rejects_bad_parameters() {
        assert!(SurfaceSpec::ellipsoid(0.0, 1.0, 1.0).is_err());
        assert!(SurfaceSpec::ellipsoid(-1.0, 1.0, 1.0).is_err());
        assert!(SurfaceSpec::ellipsoid(f64::NAN, 1.0, 1.0).is_err());
        assert!(SurfaceSpec::radial_harmonic(0.0, vec![]).is_err());
        assert!(SurfaceSpec::radial_harmonic(1.0, vec![(2, 3, 0.1)]).is_err());
        assert!(SurfaceSpec::radial_harmonic(1.0, vec![(65, 0, 0.1)]).is_err());
        assert!(SurfaceSpec::radial_harmonic(1.0, vec![(2, 1, f64::INFINITY)]).is_err());
        // Amplitude budget: sum |amp| must stay below half the base radius.
        assert!(SurfaceSpec::radial_harmonic(1.0, vec![(2, 0, 0.3), (3, 1, 0.25)]).is_err());
        assert!(SurfaceSpec::radial_harmonic(1.0, vec![(2, 0, 0.3), (3, 1, 0.15)]).is_ok());
    }

    #[test]
    fn diameter_bounds() {
        assert_relative_eq!(
            SurfaceSpec::ellipsoid(1.0, 1.1, 1.25).unwrap().diameter(),
            2.5
        );
        // Harmonic diameter is an upper bound on 2 sup rho.
        let spec = wavy_spec();
        let max_r = fibonacci_directions(2000)
            .map(|u| spec.rho(&u))
            .fold(0.0, f64::max);
        assert!(spec.diameter() >= 2.0 * max_r);
        assert!(spec.diameter() <= 2.0 * (max_r + 0.2));
    }

    #[test]
    fn shape_serialization_round_trips_the_documented_forms() {
        let json = r#"{"kind":"ellipsoid","axes":[1.0,1.1,1.25]}"#;
        let shape: SurfaceShape = serde_json::from_str(json).unwrap();
        assert_eq!(
            shape,
            SurfaceShape::Ellipsoid {
                axes: [1.0, 1.1, 1.25]
            }
        );

        let json =
            r#"{"kind":"radial_harmonic","base_radius":1.0,"coeffs":[[2,1,0.05],[3,-2,0.04]]}"#;
        let shape: SurfaceShape = serde_json::from_str(json).unwrap();
        assert_eq!(
            shape,
            SurfaceShape::RadialHarmonic {
                base_radius: 1.0,
                coeffs: vec![(2, 1, 0.05), (3, -2, 0.04)]
            }
        );
        // Unknown keys are config errors, not silent drops.
        let json = r#"{"kind":"ellipsoid","axes":[1.0,1.0,1.0],"extra":1}"#;
        assert!(serde_json::from_str::<SurfaceShape>(json).is_err());
    }
}
