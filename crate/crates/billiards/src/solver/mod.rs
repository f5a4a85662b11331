//! Multistart search for periodic billiard trajectories.
//!
//! Every n-periodic trajectory is a critical point of the perimeter on
//! inscribed n-gons, so the solver refines a deterministic portfolio of
//! seed polygons with damped Newton iteration, groups the converged
//! configurations into dihedral orbits, classifies each orbit by its
//! Morse data, cross-checks it dynamically by forward shooting, and
//! finally compares the nondegenerate orbit count against the lower
//! bound 2(n-1) that holds for odd n on generic strictly convex
//! surfaces.

mod newton;
mod seeds;
mod shoot;

pub use newton::{refine, ConvergedPoint};
pub use seeds::{seed_portfolio, Seed};
pub use shoot::{reflect, shoot, ShotRecord};

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configspace::{
    hessian, orbit_distance, reflection_residual, stabilizer_size, Configuration,
};
use crate::error::{Error, Result};
use crate::surface::SurfaceSpec;
use crate::tolerances::{
    DEDUP_POS_REL, DEDUP_VAL_REL, NULLITY_SCALE_TOL, SHOOT_CLOSURE_REL, STABILIZER_POS_REL,
};

/// Environment variable capping the solver thread pool; results are
/// identical for every thread count.
pub const THREADS_ENV: &str = "BILLIARD_THREADS";

/// Tunable tolerances of a solver run. The defaults are the crate-wide
/// constants; overrides exist for exploration, not for the acceptance
/// invariants.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Refinement stops when the perimeter gradient norm falls below this.
    pub grad_tol: f64,
    /// Positional dedup radius, relative to the body diameter.
    pub dedup_pos_rel: f64,
    /// Value dedup gap, relative to the perimeter.
    pub dedup_val_rel: f64,
    /// Nullity threshold, relative to the largest Hessian eigenvalue.
    pub nullity_scale: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grad_tol: crate::tolerances::GRAD_CONVERGENCE_TOL,
            dedup_pos_rel: DEDUP_POS_REL,
            dedup_val_rel: DEDUP_VAL_REL,
            nullity_scale: NULLITY_SCALE_TOL,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("dedup_pos", self.dedup_pos_rel),
            ("dedup_val", self.dedup_val_rel),
            ("nullity_scale", self.nullity_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "tolerance override {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One distinct dihedral orbit of critical configurations, with its full
/// classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalOrbit {
    /// Representative configuration (parameter directions).
    pub rep: Configuration,
    /// Perimeter at the representative.
    pub value: f64,
    /// Final gradient norm of the refinement.
    pub grad_norm: f64,
    /// Morse index: negative Hessian eigenvalues.
    pub index: usize,
    /// Near-zero Hessian eigenvalues; nonzero flags a degenerate orbit.
    pub nullity: usize,
    /// Size of the dihedral stabilizer of the representative.
    pub stabilizer: usize,
    /// Worst per-vertex reflection-law violation.
    pub reflect_residual: f64,
    /// Whether forward shooting from the first chord reproduces every
    /// vertex and closes up.
    pub closed_by_shooting: bool,
    /// Which multistart seed found the orbit first.
    pub seed_id: String,
}

/// Outcome of a full multistart run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    /// Content digest of the surface shape.
    pub surface_digest: String,
    /// All distinct orbits found, sorted by perimeter.
    pub orbits: Vec<CriticalOrbit>,
    /// Nondegenerate (nullity zero) distinct orbits — the count the lower
    /// bound speaks about.
    pub distinct_count: usize,
    /// The bound 2(n-1); absent for even n, where it does not apply.
    pub bound: Option<usize>,
    /// Whether distinct_count reached the bound; absent for even n.
    pub bound_met: Option<bool>,
    /// Morse index histogram over nondegenerate orbits.
    pub per_index_counts: BTreeMap<usize, usize>,
    pub seeds_used: usize,
    pub seeds_converged: usize,
    /// Human-readable notes: degeneracy warnings, empty-run diagnostics.
    pub diagnostics: Vec<String>,
}

/// Morse classification of a symmetric matrix: the number of eigenvalues
/// below `-tau` and the number within `tau` of zero, where `tau` is
/// `scale_tol` times the largest eigenvalue magnitude.
pub fn morse_index(h: &DMatrix<f64>, scale_tol: f64) -> (usize, usize) {
    let eigenvalues = h.clone().symmetric_eigen().eigenvalues;
    let tau = scale_tol * eigenvalues.amax();
    let index = eigenvalues.iter().filter(|l| **l < -tau).count();
    let nullity = eigenvalues.iter().filter(|l| l.abs() <= tau).count();
    (index, nullity)
}

/// Lower bound on distinct nondegenerate orbits for odd n.
fn odd_bound(n: usize) -> Option<usize> {
    (n % 2 == 1).then(|| 2 * (n - 1))
}

/// Whether two converged points represent the same dihedral orbit: close
/// in orbit distance AND in perimeter. Both clauses are required — value
/// alone could merge distinct orbits with coincidentally equal perimeter,
/// position alone wastes the cheap value screen.
fn same_orbit(
    spec: &SurfaceSpec,
    options: &SolverOptions,
    a: &ConvergedPoint,
    b: &ConvergedPoint,
) -> Result<bool> {
    let value_scale = a.value.max(b.value);
    if (a.value - b.value).abs() > options.dedup_val_rel * value_scale {
        return Ok(false);
    }
    let d = orbit_distance(spec, &a.config, &b.config)?;
    Ok(d <= options.dedup_pos_rel * spec.diameter())
}

/// Shooting cross-check: launch along the first chord and require every
/// bounce to land on the corresponding vertex, and the path to close.
fn closes_by_shooting(spec: &SurfaceSpec, c: &Configuration) -> bool {
    let tol = SHOOT_CLOSURE_REL * spec.diameter();
    let Ok(points) = c.points(spec) else {
        return false;
    };
    let n = points.len();
    let dir = points[1].x - points[0].x;
    let Ok(shot) = shoot(spec, &points[0], &dir, n) else {
        return false;
    };
    let vertices_match = (0..n).all(|i| (shot.points[i] - points[i].x).norm() <= tol);
    vertices_match && shot.closure_gap <= tol
}

/// Runs the full multistart pipeline with default tolerances. See
/// [`find_critical_with`].
pub fn find_critical(
    spec: &SurfaceSpec,
    n: usize,
    budget: usize,
    rng_seed: u64,
) -> Result<SolveReport> {
    find_critical_with(spec, n, budget, rng_seed, &SolverOptions::default())
}

/// Runs the full multistart pipeline: seed, refine in parallel, reject
/// floor-hugging points, deduplicate into orbits in deterministic seed
/// order, classify, and report. Identical inputs give byte-identical
/// reports regardless of thread count.
pub fn find_critical_with(
    spec: &SurfaceSpec,
    n: usize,
    budget: usize,
    rng_seed: u64,
    options: &SolverOptions,
) -> Result<SolveReport> {
    options.validate()?;
    if n < 3 {
        return Err(Error::Domain(format!(
            "periodic trajectories need n >= 3 bounces, got {n}"
        )));
    }
    if budget == 0 {
        return Err(Error::InvalidConfig(
            "seed budget must be at least 1".into(),
        ));
    }
    let spec = spec.ensure_convex()?;

    let seeds = seed_portfolio(&spec, n, budget, rng_seed);
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(count) = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|c| *c > 0)
        {
            builder = builder.num_threads(count);
        }
        builder
            .build()
            .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?
    };
    // Order-preserving parallel map keeps the downstream dedup (and hence
    // the whole report) independent of scheduling.
    let refined: Vec<Option<ConvergedPoint>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|seed| refine(&spec, &seed.config, options.grad_tol))
            .collect()
    });

    let converged: Vec<(usize, ConvergedPoint)> = refined
        .into_iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|p| (i, p)))
        .collect();
    let seeds_converged = converged.len();

    // First-seen-wins dedup in seed order.
    let mut kept: Vec<(usize, ConvergedPoint)> = Vec::new();
    'candidates: for (seed_idx, point) in converged {
        for (_, rep) in &kept {
            if same_orbit(&spec, options, rep, &point)? {
                continue 'candidates;
            }
        }
        kept.push((seed_idx, point));
    }

    let mut orbits = Vec::with_capacity(kept.len());
    for (seed_idx, point) in kept {
        let h = hessian(&spec, &point.config)?;
        let (index, nullity) = morse_index(&h, options.nullity_scale);
        let stabilizer =
            stabilizer_size(&spec, &point.config, STABILIZER_POS_REL * spec.diameter())?;
        let reflect_residual = reflection_residual(&spec, &point.config)?;
        let closed_by_shooting = closes_by_shooting(&spec, &point.config);
        orbits.push(CriticalOrbit {
            rep: point.config,
            value: point.value,
            grad_norm: point.grad_norm,
            index,
            nullity,
            stabilizer,
            reflect_residual,
            closed_by_shooting,
            seed_id: seeds[seed_idx].id.clone(),
        });
    }
    orbits.sort_by(|a, b| a.value.total_cmp(&b.value));

    let degenerate = orbits.iter().filter(|o| o.nullity > 0).count();
    let distinct_count = orbits.len() - degenerate;
    let mut per_index_counts = BTreeMap::new();
    for orbit in orbits.iter().filter(|o| o.nullity == 0) {
        *per_index_counts.entry(orbit.index).or_insert(0) += 1;
    }

    let bound = odd_bound(n);
    let bound_met = bound.map(|b| distinct_count >= b);
    let mut diagnostics = Vec::new();
    if seeds_converged == 0 {
        diagnostics.push(
            "no seeds converged: report is empty; raise the budget or loosen the surface"
                .to_string(),
        );
    }
    if degenerate > 0 {
        diagnostics.push(format!(
            "{degenerate} orbit(s) have nullity > 0 and are excluded from distinct_count; \
             the surface may be non-generic (e.g. admits continuous symmetries)"
        ));
    }
    if n.is_multiple_of(2) {
        diagnostics.push(
            "even n: the 2(n-1) lower bound assumes odd n, so no bound is reported".to_string(),
        );
    }

    Ok(SolveReport {
        n,
        surface_digest: spec.digest(),
        orbits,
        distinct_count,
        bound,
        bound_met,
        per_index_counts,
        seeds_used: seeds.len(),
        seeds_converged,
        diagnostics,
    })
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Renders the report as a human-readable summary: the bound verdict, a
/// weaker reference bound for prime n, and the Morse counts next to the
/// equivariant Betti numbers (a soft comparison — deficits are flagged,
/// never asserted).
pub fn report_bound(report: &SolveReport) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    let _ = writeln!(out, "critical-orbit report: n = {}", report.n);
    let _ = writeln!(out, "surface: {}", report.surface_digest);
    let _ = writeln!(
        out,
        "seeds: {} used, {} converged",
        report.seeds_used, report.seeds_converged
    );
    let degenerate = report.orbits.len().saturating_sub(report.distinct_count);
    let _ = writeln!(
        out,
        "orbits: {} reported, {} nondegenerate distinct, {} degenerate",
        report.orbits.len(),
        report.distinct_count,
        degenerate
    );
    match (report.bound, report.bound_met) {
        (Some(bound), Some(met)) => {
            let verdict = if met { "MET" } else { "NOT MET" };
            let _ = writeln!(
                out,
                "bound {bound}: {verdict} (distinct {} vs 2(n-1) = {bound})",
                report.distinct_count
            );
            if is_prime(report.n) {
                let _ = writeln!(
                    out,
                    "prime n reference bound: (n+1)/2 = {}",
                    report.n.div_ceil(2)
                );
            }
        }
        _ => {
            let _ = writeln!(out, "bound: not applicable (even n)");
        }
    }

    if report.n % 2 == 1 {
        if let Ok(poly) = crate::cohomology::equivariant_poincare(report.n) {
            let _ = writeln!(
                out,
                "Morse counts vs equivariant Betti numbers (soft comparison):"
            );
            let max_index = report
                .per_index_counts
                .keys()
                .next_back()
                .copied()
                .unwrap_or(0)
                .max(poly.degree().unwrap_or(0));
            for i in 0..=max_index {
                let count = report.per_index_counts.get(&i).copied().unwrap_or(0);
                let betti = poly.coeff(i);
                let marker = if (count as i64) < betti {
                    "  (deficit)"
                } else {
                    ""
                };
                let _ = writeln!(out, "  index {i}: count {count}, betti {betti}{marker}");
            }
        }
    }

    if !report.diagnostics.is_empty() {
        let _ = writeln!(out, "diagnostics:");
        for d in &report.diagnostics {
            let _ = writeln!(out, "  - {d}");
        }
    }
    out
}
