//! The cyclic configuration space of inscribed n-gons.
//!
//! A configuration is an n-tuple of boundary points, cyclically consecutive
//! ones distinct, encoded by its n unit parameter directions. This module
//! owns the perimeter functional and its first two derivatives in chart
//! coordinates, the dihedral relabeling action, and orbit-level comparison.
//!
//! Derivative conventions: at each vertex the tangent frame (e1, e2) of the
//! surface point provides two chart coordinates, and the chart moves the
//! parameter direction by the retraction `u <- normalize(u + d1*p1 + d2*p2)`
//! where p1, p2 are the frame vectors pulled back to the parameter sphere
//! (p_j = (e_j - (e_j.u) u)/rho, which makes d(position)/d(d_j) = e_j exactly
//! at the base point). The perimeter gradient in these coordinates is
//! `w_i . e_j` with `w_i` the sum of the two outgoing unit chord directions
//! at vertex i; it vanishes exactly when the reflection law (equal angles,
//! coplanar with the normal) holds at every vertex. The Hessian is a central
//! finite difference of the *exact* chart gradient, evaluated through the
//! fixed chart of the base point, then symmetrized.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::surface::{SurfacePoint, SurfaceSpec};
use crate::tolerances::{
    HESSIAN_ASYMMETRY_TOL, HESSIAN_FD_STEP_REL, SEPARATION_FLOOR_REL, UNIT_NORM_TOL,
};

/// An n-tuple of unit parameter directions; the ambient vertices are
/// `x_i = rho(u_i) u_i` for whichever surface the caller pairs it with.
/// Separation (the "consecutive points distinct" condition) is checked by
/// every surface-dependent operation, since it depends on the surface scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    us: Vec<Vector3<f64>>,
}

impl Configuration {
    /// Validates counts and unit norms (renormalizing within tolerance).
    pub fn new(us: Vec<Vector3<f64>>) -> Result<Self> {
        if us.len() < 2 {
            return Err(Error::Domain(format!(
                "a configuration needs at least 2 vertices, got {}",
                us.len()
            )));
        }
        let mut normalized = Vec::with_capacity(us.len());
        for (i, u) in us.iter().enumerate() {
            if !u.iter().all(|c| c.is_finite()) {
                return Err(Error::Domain(format!(
                    "vertex {i} has non-finite direction"
                )));
            }
            let norm = u.norm();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::Domain(format!(
                    "vertex {i} direction must be unit to within {UNIT_NORM_TOL:.0e}, |u| = {norm}"
                )));
            }
            normalized.push(u / norm);
        }
        Ok(Self { us: normalized })
    }

    pub fn n(&self) -> usize {
        self.us.len()
    }

    pub fn us(&self) -> &[Vector3<f64>] {
        &self.us
    }

    /// Ambient vertex positions on the given surface.
    pub fn positions(&self, spec: &SurfaceSpec) -> Vec<Vector3<f64>> {
        self.us.iter().map(|u| u * spec.rho(u)).collect()
    }

    /// Full surface points (with normals and frames) on the given surface.
    pub fn points(&self, spec: &SurfaceSpec) -> Result<Vec<SurfacePoint>> {
        self.us.iter().map(|u| spec.point_at(u)).collect()
    }

    /// Smallest cyclically consecutive vertex distance on the surface.
    pub fn min_separation(&self, spec: &SurfaceSpec) -> f64 {
        let xs = self.positions(spec);
        let n = xs.len();
        (0..n)
            .map(|i| (xs[(i + 1) % n] - xs[i]).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Configurations serialize as arrays of n unit vectors (each an array of
/// three floats), the parameter directions.
impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<[f64; 3]> = self.us.iter().map(|u| [u.x, u.y, u.z]).collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<[f64; 3]>::deserialize(deserializer)?;
        Configuration::new(
            rows.into_iter()
                .map(|[x, y, z]| Vector3::new(x, y, z))
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// The separation floor below which consecutive vertices stop counting as
/// distinct, for a given surface.
pub fn separation_floor(spec: &SurfaceSpec) -> f64 {
    SEPARATION_FLOOR_REL * spec.diameter()
}

fn require_separated(spec: &SurfaceSpec, c: &Configuration) -> Result<Vec<Vector3<f64>>> {
    let xs = c.positions(spec);
    let floor = separation_floor(spec);
    let n = xs.len();
    for i in 0..n {
        let gap = (xs[(i + 1) % n] - xs[i]).norm();
        if gap <= floor {
            return Err(Error::Degenerate(format!(
                "vertices {i} and {} are {gap:.3e} apart, at or below the separation floor {floor:.3e}",
                (i + 1) % n
            )));
        }
    }
    Ok(xs)
}

/// Perimeter of the inscribed polygon: the sum of cyclic chord lengths.
pub fn perimeter(spec: &SurfaceSpec, c: &Configuration) -> Result<f64> {
    let xs = require_separated(spec, c)?;
    let n = xs.len();
    Ok((0..n).map(|i| (xs[(i + 1) % n] - xs[i]).norm()).sum())
}

/// Sum of the two outgoing unit chord directions at every vertex; the
/// ambient gradient of the perimeter with respect to vertex positions.
fn chord_sums(xs: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let prev = xs[(i + n - 1) % n];
            let next = xs[(i + 1) % n];
            (xs[i] - prev).normalize() + (xs[i] - next).normalize()
        })
        .collect()
}

/// Tangential perimeter gradient in the per-vertex frames: component
/// (i, j) is `w_i . e_j(u_i)`. Zero exactly at billiard trajectories.
pub fn grad(spec: &SurfaceSpec, c: &Configuration) -> Result<DVector<f64>> {
    require_separated(spec, c)?;
    let points = c.points(spec)?;
    let ws = chord_sums(&points.iter().map(|p| p.x).collect::<Vec<_>>());
    let mut g = DVector::zeros(2 * points.len());
    for (i, (p, w)) in points.iter().zip(&ws).enumerate() {
        g[2 * i] = w.dot(&p.e1);
        g[2 * i + 1] = w.dot(&p.e2);
    }
    Ok(g)
}

/// A fixed chart around a base configuration: 2n coordinates, two per
/// vertex. Exposes the exact gradient of (perimeter o chart) at arbitrary
/// chart displacements, which is what the finite-difference Hessian needs.
pub struct Chart<'a> {
    spec: &'a SurfaceSpec,
    base: Vec<SurfacePoint>,
    /// Frame vectors pulled back to the parameter sphere, per vertex.
    pullbacks: Vec<(Vector3<f64>, Vector3<f64>)>,
}

impl<'a> Chart<'a> {
    pub fn new(spec: &'a SurfaceSpec, c: &Configuration) -> Result<Self> {
        require_separated(spec, c)?;
        let base = c.points(spec)?;
        let pullbacks = base
            .iter()
            .map(|p| {
                let rho = p.x.norm();
                (
                    (p.e1 - p.u * p.e1.dot(&p.u)) / rho,
                    (p.e2 - p.u * p.e2.dot(&p.u)) / rho,
                )
            })
            .collect();
        Ok(Self {
            spec,
            base,
            pullbacks,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.base.len()
    }

    /// Raw (pre-normalization) parameter vectors at a displacement.
    fn raw_params(&self, delta: &DVector<f64>) -> Vec<Vector3<f64>> {
        debug_assert_eq!(delta.len(), self.dim());
        self.base
            .iter()
            .zip(&self.pullbacks)
            .enumerate()
            .map(|(i, (p, (p1, p2)))| p.u + p1 * delta[2 * i] + p2 * delta[2 * i + 1])
            .collect()
    }

    /// The configuration reached by retracting the displacement onto the
    /// parameter sphere.
    pub fn configuration_at(&self, delta: &DVector<f64>) -> Result<Configuration> {
        Configuration::new(
            self.raw_params(delta)
                .into_iter()
                .map(|v| v.normalize())
                .collect(),
        )
    }

    /// Exact gradient of (perimeter o chart) at the displacement `delta`,
    /// differentiating through the *fixed* chart of the base point. At
    /// `delta = 0` this coincides with [`grad`].
    pub fn gradient_at(&self, delta: &DVector<f64>) -> Result<DVector<f64>> {
        let raw = self.raw_params(delta);
        let mut us = Vec::with_capacity(raw.len());
        let mut xs = Vec::with_capacity(raw.len());
        let mut rhos = Vec::with_capacity(raw.len());
        let mut rho_grads = Vec::with_capacity(raw.len());
        for v in &raw {
            let u = v.normalize();
            let (rho, rho_grad) = self.spec.rho_and_gradient(&u);
            xs.push(u * rho);
            us.push(u);
            rhos.push(rho);
            rho_grads.push(rho_grad);
        }
        let ws = chord_sums(&xs);
        let mut g = DVector::zeros(self.dim());
        for i in 0..raw.len() {
            let inv_len = 1.0 / raw[i].norm();
            let (p1, p2) = self.pullbacks[i];
            for (j, pull) in [p1, p2].into_iter().enumerate() {
                // Chain rule through u = v/|v| and x = rho(u) u: the
                // tangential step on the sphere, then its radial-graph lift.
                let du = (pull - us[i] * us[i].dot(&pull)) * inv_len;
                let dx = us[i] * rho_grads[i].dot(&du) + du * rhos[i];
                g[2 * i + j] = ws[i].dot(&dx);
            }
        }
        Ok(g)
    }

    /// Central finite-difference Hessian of (perimeter o chart) at the base
    /// point, symmetrized as (H + H^T)/2. Also returns the relative
    /// asymmetry observed before symmetrization, which must stay tiny when
    /// the chart gradient is correct.
    pub fn hessian_with_asymmetry(&self) -> Result<(DMatrix<f64>, f64)> {
        let dim = self.dim();
        let h = HESSIAN_FD_STEP_REL * self.spec.diameter();
        let mut raw = DMatrix::zeros(dim, dim);
        let mut delta = DVector::zeros(dim);
        for col in 0..dim {
            delta[col] = h;
            let plus = self.gradient_at(&delta)?;
            delta[col] = -h;
            let minus = self.gradient_at(&delta)?;
            delta[col] = 0.0;
            raw.set_column(col, &((plus - minus) / (2.0 * h)));
        }
        let max_entry = raw.amax();
        let asym = (&raw - raw.transpose()).amax();
        let rel_asym = if max_entry > 0.0 {
            asym / max_entry
        } else {
            0.0
        };
        if rel_asym > HESSIAN_ASYMMETRY_TOL {
            return Err(Error::Numeric(format!(
                "Hessian asymmetry {rel_asym:.3e} exceeds {HESSIAN_ASYMMETRY_TOL:.0e}; chart gradient inconsistent"
            )));
        }
        let sym = (&raw + raw.transpose()) * 0.5;
        Ok((sym, rel_asym))
    }
}

/// Symmetrized chart Hessian of the perimeter at `c`. Meaningful at
/// near-critical points; callers enforce a small gradient first.
pub fn hessian(spec: &SurfaceSpec, c: &Configuration) -> Result<DMatrix<f64>> {
    Ok(Chart::new(spec, c)?.hessian_with_asymmetry()?.0)
}

/// Worst per-vertex violation of the reflection law: the angle-balance
/// defect `|sin(in) - sin(out)|` and the coplanarity defect
/// `|det(d_in, d_out, nu)|`, maximized over vertices and both defects.
pub fn reflection_residual(spec: &SurfaceSpec, c: &Configuration) -> Result<f64> {
    require_separated(spec, c)?;
    let points = c.points(spec)?;
    let n = points.len();
    let mut worst = 0.0_f64;
    for i in 0..n {
        let prev = &points[(i + n - 1) % n];
        let here = &points[i];
        let next = &points[(i + 1) % n];
        let d_in = (here.x - prev.x).normalize();
        let d_out = (next.x - here.x).normalize();
        let sin_in = d_in.cross(&here.nu).norm();
        let sin_out = d_out.cross(&here.nu).norm();
        let coplanarity = nalgebra::Matrix3::from_columns(&[d_in, d_out, here.nu])
            .determinant()
            .abs();
        worst = worst.max((sin_in - sin_out).abs()).max(coplanarity);
    }
    Ok(worst)
}

/// One of the 2n dihedral relabelings: rotations `i -> i + k` and
/// reflections `i -> k - i` (indices mod n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DihedralElement {
    pub kind: DihedralKind,
    /// Rotation amount or reflection axis index, in `[0, n)`.
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DihedralKind {
    Rotation,
    Reflection,
}

impl DihedralElement {
    pub fn identity() -> Self {
        Self {
            kind: DihedralKind::Rotation,
            k: 0,
        }
    }

    /// The relabeling as an index map: entry i is the source index of the
    /// new vertex i, so `act(g, c)[i] = c[perm(i)]`.
    pub fn permutation(&self, n: usize) -> Result<Vec<usize>> {
        if self.k >= n {
            return Err(Error::Domain(format!(
                "dihedral index {} out of range for n = {n}",
                self.k
            )));
        }
        Ok((0..n)
            .map(|i| match self.kind {
                DihedralKind::Rotation => (i + self.k) % n,
                DihedralKind::Reflection => (self.k + n - i) % n,
            })
            .collect())
    }
}

/// All 2n elements of the dihedral group, rotations first.
pub fn dihedral_elements(n: usize) -> Vec<DihedralElement> {
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        out.push(DihedralElement {
            kind: DihedralKind::Rotation,
            k,
        });
    }
    for k in 0..n {
        out.push(DihedralElement {
            kind: DihedralKind::Reflection,
            k,
        });
    }
    out
}

/// Applies a dihedral relabeling. The reflection with axis 0 realizes the
/// involution `(x_1, x_2, ..., x_n) -> (x_1, x_n, ..., x_2)`.
pub fn act(g: DihedralElement, c: &Configuration) -> Result<Configuration> {
    let perm = g.permutation(c.n())?;
    Ok(Configuration {
        us: perm.into_iter().map(|i| c.us[i]).collect(),
    })
}

/// Distance between the dihedral orbits of two configurations on a common
/// surface: the minimum over all 2n relabelings of the worst per-vertex
/// position distance. A pseudometric that vanishes exactly on orbits.
pub fn orbit_distance(spec: &SurfaceSpec, c1: &Configuration, c2: &Configuration) -> Result<f64> {
    if c1.n() != c2.n() {
        return Err(Error::Domain(format!(
            "orbit distance needs equal vertex counts, got {} and {}",
            c1.n(),
            c2.n()
        )));
    }
    let xs1 = c1.positions(spec);
    let xs2 = c2.positions(spec);
    let n = xs1.len();
    let mut best = f64::INFINITY;
    for g in dihedral_elements(n) {
        let perm = g.permutation(n)?;
        let mut worst = 0.0_f64;
        for i in 0..n {
            worst = worst.max((xs1[perm[i]] - xs2[i]).norm());
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    Ok(best)
}

/// Number of dihedral elements that move every vertex of `c` by at most
/// `tol` (as positions on the surface). Always contains the identity; a
/// genuine symmetry group's size divides 2n, which tests assert on every
/// configuration they touch.
pub fn stabilizer_size(spec: &SurfaceSpec, c: &Configuration, tol: f64) -> Result<usize> {
    let xs = c.positions(spec);
    let n = xs.len();
    let mut count = 0;
    for g in dihedral_elements(n) {
        let perm = g.permutation(n)?;
        let moved = (0..n)
            .map(|i| (xs[perm[i]] - xs[i]).norm())
            .fold(0.0, f64::max);
        if moved <= tol {
            count += 1;
        }
    }
    Ok(count)
}

/// Unit directions of the star polygon {n/k} inscribed in the plane spanned
/// by the orthonormal pair (p, q): vertex j sits at angle `phase + 2 pi k j / n`.
pub fn star_polygon(
    n: usize,
    k: usize,
    p: &Vector3<f64>,
    q: &Vector3<f64>,
    phase: f64,
) -> Vec<Vector3<f64>> {
    (0..n)
        .map(|j| {
            let angle = phase + std::f64::consts::TAU * (k * j % n) as f64 / n as f64;
            (p * angle.cos() + q * angle.sin()).normalize()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::tolerances::DEDUP_POS_REL;

    fn unit_sphere() -> SurfaceSpec {
        SurfaceSpec::ellipsoid(1.0, 1.0, 1.0).unwrap()
    }

    fn bench_ellipsoid() -> SurfaceSpec {
        SurfaceSpec::ellipsoid(1.0, 1.1, 1.25).unwrap()
    }

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

    /// Random configuration kept clear of the separation floor.
    fn random_config(rng: &mut ChaCha8Rng, spec: &SurfaceSpec, n: usize) -> Configuration {
        loop {
            let us: Vec<_> = (0..n).map(|_| random_unit(rng)).collect();
            let c = Configuration::new(us).unwrap();
            if c.min_separation(spec) > 1e-2 * spec.diameter() {
                return c;
            }
        }
    }

    fn great_circle_polygon(n: usize, k: usize) -> Configuration {
        Configuration::new(star_polygon(n, k, &Vector3::x(), &Vector3::y(), 0.0)).unwrap()
    }

    /// Neumaier-compensated summation: the extended-precision oracle for
    /// perimeter recomputation.
    fn compensated_perimeter(xs: &[Vector3<f64>]) -> f64 {
        let n = xs.len();
        let mut sum = 0.0_f64;
        let mut compensation = 0.0_f64;
        for i in 0..n {
            let term = (xs[(i + 1) % n] - xs[i]).norm();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                compensation += (sum - t) + term;
            } else {
                compensation += (term - t) + sum;
            }
            sum = t;
        }
        sum + compensation
    }

    #[test]
    fn perimeter_of_inscribed_regular_polygons() {
        // 2 n sin(pi k / n) on the unit circle.
        let sphere = unit_sphere();
        let triangle = great_circle_polygon(3, 1);
        assert_relative_eq!(
            perimeter(&sphere, &triangle).unwrap(),
            3.0 * 3.0_f64.sqrt(),
            epsilon = 1e-12
        );
        let pentagram = great_circle_polygon(5, 2);
        assert_relative_eq!(
            perimeter(&sphere, &pentagram).unwrap(),
            10.0 * (0.4 * std::f64::consts::PI).sin(),
            epsilon = 1e-12
        );
        for (n, k) in [(5, 1), (7, 2), (9, 4)] {
            let poly = great_circle_polygon(n, k);
            assert_relative_eq!(
                perimeter(&sphere, &poly).unwrap(),
                2.0 * n as f64 * (std::f64::consts::PI * k as f64 / n as f64).sin(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn perimeter_matches_compensated_summation_oracle() {
        let spec = bench_ellipsoid();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let c = random_config(&mut rng, &spec, 6);
            let fast = perimeter(&spec, &c).unwrap();
            let oracle = compensated_perimeter(&c.positions(&spec));
            assert!(
                (fast - oracle).abs() <= 1e-12,
                "defect {}",
                (fast - oracle).abs()
            );
        }
    }

    #[test]
    fn perimeter_rejects_near_coincident_consecutive_vertices() {
        let spec = unit_sphere();
        let base = Vector3::z();
        let nudged = (base + Vector3::x() * 1e-9).normalize();
        let c = Configuration::new(vec![base, nudged, Vector3::x()]).unwrap();
        assert!(matches!(perimeter(&spec, &c), Err(Error::Degenerate(_))));
        // Non-consecutive coincidences are allowed (x_i = x_{i+2}).
        let c = Configuration::new(vec![base, Vector3::x(), base, -Vector3::x()]).unwrap();
        assert!(perimeter(&spec, &c).is_ok());
    }

    #[test]
    fn gradient_vanishes_on_regular_great_circle_polygons() {
        let sphere = unit_sphere();
        for (n, k) in [(3, 1), (5, 1), (5, 2), (7, 3)] {
            let c = great_circle_polygon(n, k);
            let g = grad(&sphere, &c).unwrap();
            assert!(g.amax() <= 1e-10, "n={n} k={k}: |grad| = {}", g.amax());
        }
    }

    #[test]
    fn gradient_matches_finite_differences_of_the_chart() {
        let specs = [
            bench_ellipsoid(),
            SurfaceSpec::radial_harmonic(1.0, vec![(2, 1, 0.05), (3, -2, 0.04), (4, 0, 0.03)])
                .unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for spec in &specs {
            for _ in 0..25 {
                let c = random_config(&mut rng, spec, 5);
                let chart = Chart::new(spec, &c).unwrap();
                let g = grad(spec, &c).unwrap();
                // The chart gradient at zero is the frame gradient.
                let g_chart = chart.gradient_at(&DVector::zeros(chart.dim())).unwrap();
                assert!((&g - &g_chart).amax() <= 1e-12);

                let mut fd = DVector::zeros(chart.dim());
                let mut delta = DVector::zeros(chart.dim());
                for j in 0..chart.dim() {
                    delta[j] = h;
                    let plus = perimeter(spec, &chart.configuration_at(&delta).unwrap()).unwrap();
                    delta[j] = -h;
                    let minus = perimeter(spec, &chart.configuration_at(&delta).unwrap()).unwrap();
                    delta[j] = 0.0;
                    fd[j] = (plus - minus) / (2.0 * h);
                }
                let rel = (&g - &fd).norm() / fd.norm().max(1e-12);
                assert!(rel <= 1e-6, "relative gradient defect {rel}");
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_and_detects_sphere_degeneracy() {
        let sphere = unit_sphere();
        let triangle = great_circle_polygon(3, 1);
        let chart = Chart::new(&sphere, &triangle).unwrap();
        let (h, rel_asym) = chart.hessian_with_asymmetry().unwrap();
        assert!(rel_asym <= 1e-4);
        assert_eq!(h.nrows(), 6);
        // Round-sphere symmetry forces null directions at every critical
        // point; the smallest |eigenvalue| must be tiny against the largest.
        let eigs = h.symmetric_eigenvalues();
        let max_abs = eigs.amax();
        let min_abs = eigs.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
        assert!(min_abs <= 1e-6 * max_abs, "spectrum {eigs:?}");
    }

    #[test]
    fn dihedral_action_examples() {
        let sphere = unit_sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_config(&mut rng, &sphere, 5);

        let id = DihedralElement::identity();
        assert_eq!(act(id, &c).unwrap(), c);

        // The base reflection sends (x1, x2, x3, x4, x5) to (x1, x5, x4, x3, x2).
        let t = DihedralElement {
            kind: DihedralKind::Reflection,
            k: 0,
        };
        let tc = act(t, &c).unwrap();
        assert_eq!(tc.us()[0], c.us()[0]);
        assert_eq!(tc.us()[1], c.us()[4]);
        assert_eq!(tc.us()[2], c.us()[3]);
        assert_eq!(tc.us()[3], c.us()[2]);
        assert_eq!(tc.us()[4], c.us()[1]);

        // Rotation by one advances labels; applying it n times is the identity.
        let r = DihedralElement {
            kind: DihedralKind::Rotation,
            k: 1,
        };
        let rc = act(r, &c).unwrap();
        assert_eq!(rc.us()[0], c.us()[1]);
        assert_eq!(rc.us()[4], c.us()[0]);
        let mut back = c.clone();
        for _ in 0..5 {
            back = act(r, &back).unwrap();
        }
        assert_eq!(back, c);

        // Out-of-range index is a domain error.
        let bad = DihedralElement {
            kind: DihedralKind::Rotation,
            k: 5,
        };
        assert!(act(bad, &c).is_err());
    }

    #[test]
    fn dihedral_elements_close_under_composition() {
        let n = 6;
        let elements = dihedral_elements(n);
        assert_eq!(elements.len(), 2 * n);
        let perms: Vec<Vec<usize>> = elements.iter().map(|g| g.permutation(n).unwrap()).collect();
        for a in &perms {
            for b in &perms {
                let composed: Vec<usize> = (0..n).map(|i| b[a[i]]).collect();
                assert!(
                    perms.contains(&composed),
                    "composition escapes the group: {composed:?}"
                );
            }
        }
        // All permutations distinct: exactly the 2n group elements.
        for (i, a) in perms.iter().enumerate() {
            for b in perms.iter().skip(i + 1) {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn perimeter_is_dihedral_invariant() {
        let spec = bench_ellipsoid();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [3, 4, 5, 7] {
            let c = random_config(&mut rng, &spec, n);
            let base = perimeter(&spec, &c).unwrap();
            for g in dihedral_elements(n) {
                let moved = perimeter(&spec, &act(g, &c).unwrap()).unwrap();
                assert!((moved - base).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn orbit_distance_vanishes_on_orbits_and_separates_them() {
        let sphere = unit_sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let c = random_config(&mut rng, &sphere, 5);
        for g in dihedral_elements(5) {
            let d = orbit_distance(&sphere, &c, &act(g, &c).unwrap()).unwrap();
            assert!(d <= 1e-12, "distance {d} for {g:?}");
        }

        // Regular triangles in orthogonal great circles are far apart:
        // direct computation puts them sqrt(6)/2 apart, well above any
        // dedup radius.
        let xy = great_circle_polygon(3, 1);
        let xz = Configuration::new(star_polygon(3, 1, &Vector3::x(), &Vector3::z(), 0.0)).unwrap();
        let d = orbit_distance(&sphere, &xy, &xz).unwrap();
        assert!(d >= std::f64::consts::SQRT_2 - 0.2);
        assert!(d >= 1e3 * DEDUP_POS_REL * sphere.diameter());

        // A small perturbation of an orbit member stays within a Lipschitz
        // factor of the perturbation size.
        let g = DihedralElement {
            kind: DihedralKind::Reflection,
            k: 2,
        };
        let moved = act(g, &c).unwrap();
        let wobbled: Vec<Vector3<f64>> = moved
            .us()
            .iter()
            .map(|u| (u + random_unit(&mut rng) * 1e-3).normalize())
            .collect();
        let wobbled = Configuration::new(wobbled).unwrap();
        let d = orbit_distance(&sphere, &c, &wobbled).unwrap();
        assert!(d <= 2e-3, "perturbed distance {d}");
    }

    #[test]
    fn orbit_distance_requires_matching_lengths() {
        let sphere = unit_sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c3 = random_config(&mut rng, &sphere, 3);
        let c5 = random_config(&mut rng, &sphere, 5);
        assert!(matches!(
            orbit_distance(&sphere, &c3, &c5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn stabilizer_sizes() {
        let sphere = unit_sphere();
        let tol = 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        // Generic configurations are free points.
        for n in [3, 5, 6, 9] {
            let c = random_config(&mut rng, &sphere, n);
            assert_eq!(stabilizer_size(&sphere, &c, tol).unwrap(), 1);
        }
        // The action relabels vertices, so even a regular n-gon is a free
        // point: relabeling shifts the tuple by a full chord. For prime n
        // the action is free on every admissible configuration.
        for n in [3, 5, 7] {
            let c = great_circle_polygon(n, 1);
            assert_eq!(stabilizer_size(&sphere, &c, tol).unwrap(), 1);
        }
        // A doubled triangle traversing the hexagon pattern twice: the
        // stabilizer is a proper nontrivial subgroup for composite n.
        let hexagon: Vec<Vector3<f64>> = star_polygon(3, 1, &Vector3::x(), &Vector3::y(), 0.0)
            .into_iter()
            .cycle()
            .take(6)
            .collect();
        let c = Configuration::new(hexagon).unwrap();
        let size = stabilizer_size(&sphere, &c, tol).unwrap();
        assert!(size > 1 && size < 12 && 12 % size == 0, "stabilizer {size}");
    }

    #[test]
    fn reflection_residual_is_small_exactly_at_critical_points() {
        let sphere = unit_sphere();
        let triangle = great_circle_polygon(3, 1);
        assert!(reflection_residual(&sphere, &triangle).unwrap() <= 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let random = random_config(&mut rng, &sphere, 3);
        // A random triangle essentially never satisfies the billiard law.
        assert!(reflection_residual(&sphere, &random).unwrap() > 1e-3);
    }

    #[test]
    fn star_polygon_respects_vertex_count_and_plane() {
        let us = star_polygon(7, 2, &Vector3::y(), &Vector3::z(), 0.3);
        assert_eq!(us.len(), 7);
        for u in &us {
            assert_relative_eq!(u.norm(), 1.0, epsilon = 1e-14);
            assert!(u.x.abs() < 1e-14, "stays in the spanned plane");
        }
    }
}
