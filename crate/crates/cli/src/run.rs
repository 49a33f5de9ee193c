//! Job execution.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use aoi_core::optimize::{optimize_waiting, tradeoff_curve, Objective, SearchConfig};
use aoi_core::sim::{simulate, simulate_with_dump, SimConfig};
use aoi_core::{evaluate, format::sig12, Scheme};
use log::info;
use rayon::prelude::*;

use crate::csv_out::{emit_csv, write_table, ResultRow, Source};
use crate::error::{CliError, CliResult};
use crate::job::{Command, JobSpec};

pub const OPTIMIZE_HEADER: [&str; 13] = [
    "scheme",
    "dist",
    "lambda",
    "w1",
    "w2",
    "eps_i_star",
    "eps_b_star",
    "value_star",
    "value_zero_wait",
    "improvement",
    "avg_aoi_star",
    "avg_peak_aoi_star",
    "grid_resolution",
];

pub const TRADEOFF_HEADER: [&str; 8] = [
    "scheme",
    "dist",
    "lambda",
    "eps_i",
    "eps_b",
    "avg_aoi",
    "avg_peak_aoi",
    "pareto",
];

/// Runs a job and writes its CSV to `spec.out` or standard output.
pub fn run_job(spec: &JobSpec) -> CliResult<()> {
    match &spec.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            run_to(spec, BufWriter::new(file)).map_err(|e| with_path(e, path))
        }
        None => run_to(spec, io::stdout().lock()),
    }
}

fn with_path(e: CliError, path: &Path) -> CliError {
    match e {
        CliError::Io { path: p, source } if p.as_os_str().is_empty() => CliError::io(path, source),
        other => other,
    }
}

/// Runs a job, writing its CSV to `out`.
pub fn run_to<W: Write>(spec: &JobSpec, mut out: W) -> CliResult<()> {
    let write = |r: io::Result<()>| r.map_err(|e| CliError::io("", e));
    match spec.command {
        Command::Analytic | Command::Sweep => {
            let rows = sweep_rows(spec)?;
            write(emit_csv(&mut out, &rows))?;
        }
        Command::Simulate => {
            let row = simulate_row(spec)?;
            write(emit_csv(&mut out, &[row]))?;
        }
        Command::Optimize => {
            let rows = optimize_rows(spec)?;
            write(write_table(&mut out, &OPTIMIZE_HEADER, &rows))?;
        }
        Command::Tradeoff => {
            let rows = tradeoff_rows(spec)?;
            write(write_table(&mut out, &TRADEOFF_HEADER, &rows))?;
        }
    }
    write(out.flush())
}

#[derive(Debug, Clone, Copy)]
struct Point {
    index: u64,
    lambda: f64,
    eps_i: f64,
    eps_b: f64,
}

fn grid_points(spec: &JobSpec) -> Vec<Point> {
    let mut pts = Vec::new();
    for &lambda in &spec.lambda {
        for &eps_i in &spec.eps_i {
            for &eps_b in &spec.eps_b {
                pts.push(Point {
                    index: pts.len() as u64,
                    lambda,
                    eps_i,
                    eps_b,
                });
            }
        }
    }
    pts
}

fn context(spec: &JobSpec, p: &Point) -> String {
    format!(
        "{} {} {} at lambda={}, eps_i={}, eps_b={}",
        spec.command.name(),
        spec.scheme,
        spec.dist,
        sig12(p.lambda),
        sig12(p.eps_i),
        sig12(p.eps_b)
    )
}

/// Seed for grid point `index`, so each point has its own streams and
/// the result does not depend on thread scheduling.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    // SplitMix64 finalizer over the combined value.
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sim_config(spec: &JobSpec, p: &Point, seed: u64) -> SimConfig {
    SimConfig::new(spec.scheme, spec.dist, p.lambda, p.eps_i, p.eps_b)
        .with_packets(spec.packets_or_default())
        .with_seed(seed)
        .with_batches(spec.batches)
}

fn sweep_rows(spec: &JobSpec) -> CliResult<Vec<ResultRow>> {
    let points = grid_points(spec);
    let simulate_points = spec.command == Command::Sweep && spec.packets.is_some();
    let eval = |p: &Point| -> CliResult<ResultRow> {
        if simulate_points {
            let cfg = sim_config(spec, p, point_seed(spec.seed, p.index));
            let r = simulate(&cfg).map_err(|e| CliError::from_core(context(spec, p), e))?;
            Ok(sim_row(spec, p, &r))
        } else {
            let m = evaluate(spec.scheme, &spec.dist, p.lambda, p.eps_i, p.eps_b)
                .map_err(|e| CliError::from_core(context(spec, p), e))?;
            Ok(ResultRow {
                scheme: spec.scheme,
                dist: spec.dist,
                lambda: p.lambda,
                eps_i: p.eps_i,
                eps_b: p.eps_b,
                avg_aoi: m.avg_aoi,
                avg_peak_aoi: m.avg_peak_aoi,
                source: Source::Analytic,
                se: None,
            })
        }
    };
    info!("{} points on {} threads", points.len(), spec.jobs);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs {}: {e}", spec.jobs)))?;
    // `collect` keeps grid order whatever the completion order.
    pool.install(|| points.par_iter().map(eval).collect())
}

fn sim_row(spec: &JobSpec, p: &Point, r: &aoi_core::sim::SimResult) -> ResultRow {
    ResultRow {
        scheme: spec.scheme,
        dist: spec.dist,
        lambda: p.lambda,
        eps_i: p.eps_i,
        eps_b: p.eps_b,
        avg_aoi: r.avg_aoi,
        avg_peak_aoi: r.avg_peak_aoi,
        source: Source::Sim,
        se: Some((r.se_aoi, r.se_peak)),
    }
}

fn simulate_row(spec: &JobSpec) -> CliResult<ResultRow> {
    let p = grid_points(spec)[0];
    let cfg = sim_config(spec, &p, spec.seed);
    let ctx = || context(spec, &p);
    let r = match &spec.dump_trajectory {
        None => simulate(&cfg),
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            simulate_with_dump(&cfg, BufWriter::new(file)).map_err(|e| CliError::io(path, e))?
        }
    }
    .map_err(|e| CliError::from_core(ctx(), e))?;
    info!(
        "{} arrivals, {} deliveries, {} discarded, horizon {}",
        r.arrivals, r.deliveries, r.discarded, r.horizon
    );
    Ok(sim_row(spec, &p, &r))
}

fn optimize_rows(spec: &JobSpec) -> CliResult<Vec<Vec<String>>> {
    let objective = Objective::new(spec.w1, spec.w2)
        .map_err(|e| CliError::from_core("optimize objective", e))?;
    let search = SearchConfig::default();
    spec.lambda
        .iter()
        .map(|&lambda| {
            let r = optimize_waiting(spec.scheme, &spec.dist, lambda, objective, &search).map_err(
                |e| {
                    CliError::from_core(
                        format!(
                            "optimize {} {} at lambda={}",
                            spec.scheme,
                            spec.dist,
                            sig12(lambda)
                        ),
                        e,
                    )
                },
            )?;
            let eps_b = match spec.scheme {
                Scheme::Mg11 => 0.0,
                Scheme::Mg12Star => r.eps_b_star,
            };
            Ok(vec![
                spec.scheme.to_string(),
                spec.dist.to_string(),
                sig12(lambda),
                sig12(spec.w1),
                sig12(spec.w2),
                sig12(r.eps_i_star),
                sig12(eps_b),
                sig12(r.value_star),
                sig12(r.value_zero_wait),
                sig12(r.improvement),
                sig12(r.avg_aoi_star),
                sig12(r.avg_peak_aoi_star),
                sig12(r.grid_resolution),
            ])
        })
        .collect()
}

fn tradeoff_rows(spec: &JobSpec) -> CliResult<Vec<Vec<String>>> {
    let lambda = spec.lambda[0];
    let pts = tradeoff_curve(spec.scheme, &spec.dist, lambda, &spec.eps_i, &spec.eps_b)
        .map_err(|e| CliError::from_core(format!("tradeoff {} {}", spec.scheme, spec.dist), e))?;
    Ok(pts
        .iter()
        .map(|p| {
            vec![
                spec.scheme.to_string(),
                spec.dist.to_string(),
                sig12(lambda),
                sig12(p.eps_i),
                sig12(p.eps_b),
                sig12(p.avg_aoi),
                sig12(p.avg_peak_aoi),
                if p.pareto { "1" } else { "0" }.to_string(),
            ]
        })
        .collect())
}
