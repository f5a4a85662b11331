//! Deterministic multistart seed portfolio.
//!
//! A fixed recipe turns (surface, n, budget, rng_seed) into exactly
//! `budget` starting configurations: planar star polygons in the three
//! coordinate planes, randomly perturbed copies of those stars, and
//! uniform random configurations, in that order. Identical inputs always
//! produce the identical list, which is what makes solver runs
//! reproducible.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::configspace::{separation_floor, star_polygon, Configuration};
use crate::surface::SurfaceSpec;

/// A starting configuration together with its provenance label.
#[derive(Debug, Clone)]
pub struct Seed {
    pub id: String,
    pub config: Configuration,
}

/// The three coordinate planes, as orthonormal spanning pairs.
const PLANES: [(&str, [Vector3<f64>; 2]); 3] = [
    (
        "xy",
        [Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0)],
    ),
    (
        "yz",
        [Vector3::new(0.0, 1.0, 0.0), Vector3::new(0.0, 0.0, 1.0)],
    ),
    (
        "zx",
        [Vector3::new(0.0, 0.0, 1.0), Vector3::new(1.0, 0.0, 0.0)],
    ),
];

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0f64),
            rng.random_range(-1.0..1.0f64),
            rng.random_range(-1.0..1.0f64),
        );
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            return v / norm;
        }
    }
}

/// All star polygon turning classes for n vertices: winding numbers
/// 1 ..= (n-1)/2.
fn star_classes(n: usize) -> impl Iterator<Item = usize> {
    1..=(n - 1) / 2
}

fn structured_seeds(n: usize) -> Vec<Seed> {
    let mut out = Vec::new();
    for k in star_classes(n) {
        for (plane, [p, q]) in PLANES {
            let us = star_polygon(n, k, &p, &q, 0.0);
            let config =
                Configuration::new(us).expect("star polygons are unit-norm by construction");
            out.push(Seed {
                id: format!("star-{k}-{plane}"),
                config,
            });
        }
    }
    out
}

/// Tangentially jitters every direction of a configuration by roughly
/// `scale` radians.
fn perturb(rng: &mut ChaCha8Rng, base: &Configuration, scale: f64) -> Vec<Vector3<f64>> {
    base.us()
        .iter()
        .map(|u| (u + random_unit(rng) * scale).normalize())
        .collect()
}

/// Draws until the candidate clears the separation floor with margin.
fn accept(spec: &SurfaceSpec, us: Vec<Vector3<f64>>) -> Option<Configuration> {
    let c = Configuration::new(us).ok()?;
    (c.min_separation(spec) > 20.0 * separation_floor(spec)).then_some(c)
}

/// Builds the deterministic portfolio of exactly `budget` seeds.
pub fn seed_portfolio(spec: &SurfaceSpec, n: usize, budget: usize, rng_seed: u64) -> Vec<Seed> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds = structured_seeds(n);
    seeds.truncate(budget);

    let structured: Vec<Configuration> = seeds.iter().map(|s| s.config.clone()).collect();
    let remaining = budget - seeds.len();
    let perturbed_quota = remaining / 2;

    for i in 0..perturbed_quota {
        let config = loop {
            let base = &structured[rng.random_range(0..structured.len())];
            // Log-uniform jitter from barely-off-critical to a deep shake.
            let scale = 10.0_f64.powf(rng.random_range(-2.3..-0.5));
            if let Some(c) = accept(spec, perturb(&mut rng, base, scale)) {
                break c;
            }
        };
        seeds.push(Seed {
            id: format!("perturb-{i:06}"),
            config,
        });
    }

    for i in 0..remaining - perturbed_quota {
        let config = loop {
            let us = (0..n).map(|_| random_unit(&mut rng)).collect();
            if let Some(c) = accept(spec, us) {
                break c;
            }
        };
        seeds.push(Seed {
            id: format!("random-{i:06}"),
            config,
        });
    }

    seeds
}
