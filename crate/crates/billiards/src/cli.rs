//! Command-line entry point: JSON run configs, subcommand dispatch, and
//! deterministic output artifacts.
//!
//! Exit codes are a stable contract: 0 success, 1 generic failure (or a
//! `--assert-bound` miss), 2 configuration/usage error, 3 non-convex
//! surface.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use serde::Deserialize;

use crate::cohomology::{betti_table, ring_consistency_check};
use crate::error::{Error, Result};
use crate::solver::{find_critical_with, report_bound, shoot, SolveReport, SolverOptions};
use crate::surface::{SurfaceShape, SurfaceSpec};

/// Searches for periodic billiard trajectories in strictly convex bodies
/// and cross-checks the orbit-count bound against exact cohomology.
#[derive(Debug, Parser)]
#[command(name = "billiards", version, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the multistart critical-orbit search described by a JSON config.
    Solve(SolveArgs),
    /// Print the equivariant Betti table for odd n up to n_max as CSV.
    Betti(BettiArgs),
    /// Verify the cohomology ring relations (associativity, commutation,
    /// truncation) up to a degree cap.
    RingCheck(RingCheckArgs),
    /// Shoot a single billiard ray described by a JSON config and print
    /// its polyline and closure gap.
    Shoot(ShootArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Path to the JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Override: number of bounces.
    #[arg(long)]
    n: Option<usize>,
    /// Override: multistart seed budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Override: RNG stream seed.
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Override: artifact directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override: gradient convergence tolerance.
    #[arg(long)]
    grad_tol: Option<f64>,
    /// Override: positional dedup radius (relative to diameter).
    #[arg(long)]
    dedup_pos: Option<f64>,
    /// Override: perimeter dedup gap (relative).
    #[arg(long)]
    dedup_val: Option<f64>,
    /// Override: nullity threshold (relative to the top eigenvalue).
    #[arg(long)]
    nullity_scale: Option<f64>,
    /// Exit 1 unless the report meets the 2(n-1) bound.
    #[arg(long)]
    assert_bound: bool,
}

#[derive(Debug, Args)]
struct BettiArgs {
    /// Largest n in the table (rows cover odd n from 3 up).
    n_max: usize,
    /// Also write the table to this CSV file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RingCheckArgs {
    /// Odd n selecting the ring.
    n: usize,
    /// Highest total degree of basis triples to test.
    degree_cap: usize,
}

#[derive(Debug, Args)]
struct ShootArgs {
    /// Path to the JSON shot config.
    #[arg(long)]
    config: PathBuf,
}

/// JSON run config for `solve`: the surface, the experiment parameters,
/// optional tolerance overrides, and where artifacts land.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    surface: SurfaceShape,
    n: usize,
    budget: usize,
    rng_seed: u64,
    #[serde(default)]
    tolerances: ToleranceOverrides,
    output_dir: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToleranceOverrides {
    grad_tol: Option<f64>,
    dedup_pos: Option<f64>,
    dedup_val: Option<f64>,
    nullity_scale: Option<f64>,
}

/// JSON config for `shoot`: a surface, a launch parameter direction
/// (normalized internally, the boundary point is its radial-graph image),
/// an ambient launch direction, and the bounce count.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShotConfig {
    surface: SurfaceShape,
    start: [f64; 3],
    dir: [f64; 3],
    bounces: usize,
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("bad config {}: {e}", path.display())))
}

fn solve_options(config: &RunConfig, args: &SolveArgs) -> SolverOptions {
    let mut options = SolverOptions::default();
    if let Some(v) = args.grad_tol.or(config.tolerances.grad_tol) {
        options.grad_tol = v;
    }
    if let Some(v) = args.dedup_pos.or(config.tolerances.dedup_pos) {
        options.dedup_pos_rel = v;
    }
    if let Some(v) = args.dedup_val.or(config.tolerances.dedup_val) {
        options.dedup_val_rel = v;
    }
    if let Some(v) = args.nullity_scale.or(config.tolerances.nullity_scale) {
        options.nullity_scale = v;
    }
    options
}

/// Serializes the report exactly as written to report.json: pretty JSON
/// plus a trailing newline, a deterministic function of the report.
pub fn render_report_json(report: &SolveReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

/// One JSON line per orbit.
pub fn render_orbits_jsonl(report: &SolveReport) -> Result<String> {
    let mut out = String::new();
    for orbit in &report.orbits {
        out.push_str(&serde_json::to_string(orbit)?);
        out.push('\n');
    }
    Ok(out)
}

/// Vertex polylines of every orbit as CSV rows.
pub fn render_trajectories_csv(spec: &SurfaceSpec, report: &SolveReport) -> String {
    let mut out = String::from("orbit_id,bounce_index,x,y,z\n");
    for (orbit_id, orbit) in report.orbits.iter().enumerate() {
        for (bounce_index, x) in orbit.rep.positions(spec).iter().enumerate() {
            let _ = writeln!(out, "{orbit_id},{bounce_index},{},{},{}", x.x, x.y, x.z);
        }
    }
    out
}

/// The Betti table as CSV. Every row is padded to the widest row's Betti
/// count so the header applies to all of them.
pub fn render_betti_csv(n_max: usize) -> Result<String> {
    let rows = betti_table(n_max)?;
    let width = rows.last().map_or(0, |r| r.betti.len());
    let mut out = String::from("n");
    for i in 0..width {
        let _ = write!(out, ",b_{i}");
    }
    out.push_str(",sum,bound\n");
    for row in &rows {
        let _ = write!(out, "{}", row.n);
        for i in 0..width {
            let _ = write!(out, ",{}", row.betti.get(i).copied().unwrap_or(0));
        }
        let _ = writeln!(out, ",{},{}", row.sum, row.bound);
    }
    Ok(out)
}

fn cmd_solve(args: &SolveArgs) -> Result<Option<i32>> {
    let mut config: RunConfig = load_json(&args.config)?;
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(budget) = args.budget {
        config.budget = budget;
    }
    if let Some(seed) = args.rng_seed {
        config.rng_seed = seed;
    }
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.clone();
    }
    let options = solve_options(&config, args);
    options.validate()?;

    let spec = SurfaceSpec::new(config.surface.clone())?.ensure_convex()?;
    let report = find_critical_with(&spec, config.n, config.budget, config.rng_seed, &options)?;

    fs::create_dir_all(&config.output_dir)?;
    fs::write(
        config.output_dir.join("report.json"),
        render_report_json(&report)?,
    )?;
    fs::write(
        config.output_dir.join("orbits.jsonl"),
        render_orbits_jsonl(&report)?,
    )?;
    fs::write(
        config.output_dir.join("trajectories.csv"),
        render_trajectories_csv(&spec, &report),
    )?;

    print!("{}", report_bound(&report));
    if args.assert_bound && report.bound_met != Some(true) {
        eprintln!("assert-bound: the 2(n-1) bound was not met");
        return Ok(Some(1));
    }
    Ok(None)
}

fn cmd_betti(args: &BettiArgs) -> Result<Option<i32>> {
    if args.n_max.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "the Betti table covers odd vertex counts; give an odd upper bound, got {}",
            args.n_max
        )));
    }
    let csv = render_betti_csv(args.n_max)?;
    if let Some(path) = &args.output {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, &csv)?;
    }
    print!("{csv}");
    Ok(None)
}

fn cmd_ring_check(args: &RingCheckArgs) -> Result<Option<i32>> {
    ring_consistency_check(args.n, args.degree_cap)?;
    println!(
        "ring-check n={} degree_cap={}: pass",
        args.n, args.degree_cap
    );
    Ok(None)
}

fn cmd_shoot(args: &ShootArgs) -> Result<Option<i32>> {
    let config: ShotConfig = load_json(&args.config)?;
    let spec = SurfaceSpec::new(config.surface)?.ensure_convex()?;
    let u = Vector3::from(config.start)
        .try_normalize(0.0)
        .ok_or_else(|| Error::InvalidConfig("start direction must be nonzero".into()))?;
    let start = spec.point_at(&u)?;
    let dir = Vector3::from(config.dir);
    let shot = shoot(&spec, &start, &dir, config.bounces)?;

    println!("orbit_id,bounce_index,x,y,z");
    for (i, x) in shot.points.iter().enumerate() {
        println!("0,{i},{},{},{}", x.x, x.y, x.z);
    }
    println!("closure_gap = {:e}", shot.closure_gap);
    println!("direction_gap = {:e}", shot.direction_gap);
    Ok(None)
}

fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::NotConvex { .. } => 3,
        Error::InvalidConfig(_) | Error::Domain(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Parses argv and runs the selected command, returning the process exit
/// code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Betti(args) => cmd_betti(args),
        Command::RingCheck(args) => cmd_ring_check(args),
        Command::Shoot(args) => cmd_shoot(args),
    };
    match outcome {
        Ok(None) => 0,
        Ok(Some(code)) => code,
        Err(error) => {
            eprintln!("error: {error}");
            exit_code_for(&error)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::find_critical;

    #[test]
    fn betti_csv_has_padded_rows_and_correct_sums() {
        let csv = render_betti_csv(9).unwrap();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("n,b_0,b_1,"));
        assert!(header.ends_with(",sum,bound"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 4, "odd n in 3..=9");
        let field_count = header.split(',').count();
        for row in &rows {
            assert_eq!(row.split(',').count(), field_count);
        }
        assert!(rows[0].starts_with("3,1,1,1,1,0,"));
        assert!(rows[0].ends_with(",4,4"));
        assert!(rows[3].ends_with(",16,16"));
    }

    #[test]
    fn trajectories_csv_lists_every_vertex_once() {
        let spec = SurfaceSpec::ellipsoid(1.0, 1.1, 1.25).unwrap();
        let report = find_critical(&spec, 3, 20, 1).unwrap();
        let csv = render_trajectories_csv(&spec, &report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "orbit_id,bounce_index,x,y,z");
        assert_eq!(lines.len(), 1 + 3 * report.orbits.len());
        // Rows are grouped by orbit, with bounce indices 0..n.
        for (orbit_id, chunk) in lines[1..].chunks(3).enumerate() {
            for (bounce, row) in chunk.iter().enumerate() {
                assert!(row.starts_with(&format!("{orbit_id},{bounce},")));
            }
        }
    }

    #[test]
    fn run_config_rejects_unknown_fields() {
        let json = r#"{
            "surface": {"kind": "ellipsoid", "axes": [1.0, 1.1, 1.25]},
            "n": 3, "budget": 10, "rng_seed": 1,
            "output_dir": "out", "surprise": true
        }"#;
        assert!(serde_json::from_str::<RunConfig>(json).is_err());
    }

    #[test]
    fn tolerance_overrides_parse_and_apply() {
        let json = r#"{
            "surface": {"kind": "ellipsoid", "axes": [1.0, 1.1, 1.25]},
            "n": 3, "budget": 10, "rng_seed": 1,
            "tolerances": {"grad_tol": 1e-9},
            "output_dir": "out"
        }"#;
        let config: RunConfig = serde_json::from_str(json).unwrap();
        let args = SolveArgs {
            config: PathBuf::new(),
            n: None,
            budget: None,
            rng_seed: None,
            output_dir: None,
            grad_tol: None,
            dedup_pos: Some(2e-5),
            dedup_val: None,
            nullity_scale: None,
            assert_bound: false,
        };
        let options = solve_options(&config, &args);
        assert_eq!(options.grad_tol, 1e-9, "file override");
        assert_eq!(options.dedup_pos_rel, 2e-5, "flag override");
        assert_eq!(
            options.dedup_val_rel,
            SolverOptions::default().dedup_val_rel,
            "untouched fields keep defaults"
        );
    }

    #[test]
    fn exit_codes_map_the_stable_contract() {
        assert_eq!(exit_code_for(&Error::InvalidConfig("x".into())), 2);
        assert_eq!(
            exit_code_for(&Error::NotConvex {
                min_proxy: -1.0,
                at_direction: [0.0, 0.0, 1.0]
            }),
            3
        );
        assert_eq!(exit_code_for(&Error::Domain("x".into())), 2);
        assert_eq!(exit_code_for(&Error::Numeric("x".into())), 1);
    }
}
