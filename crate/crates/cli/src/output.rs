//! Artifact directory: `config.resolved`, `trajectory.csv`, `metrics.json`
//! and `log.txt`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Resolved;
use crate::error::{CliError, Result};
use crate::run::ReplicaResult;

pub const TOOL: &str = "rbm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped when CSV columns or metric keys change.
pub const OUTPUT_FORMAT: u32 = 1;

#[derive(Serialize)]
struct Metrics<'a> {
    tool: &'static str,
    version: &'static str,
    format: u32,
    model: &'static str,
    method: &'static str,
    n: usize,
    p: usize,
    steps: u64,
    seed: u64,
    replicas: Vec<ReplicaMetrics<'a>>,
    /// Mean of each metric over replicas.
    mean: BTreeMap<&'a str, f64>,
}

#[derive(Serialize)]
struct ReplicaMetrics<'a> {
    replica: usize,
    metrics: &'a BTreeMap<String, f64>,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// `<config stem>-seed<seed>`.
pub fn run_id(config_path: &Path, seed: u64) -> String {
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    format!("{stem}-seed{seed}")
}

pub fn resolved_header(cfg: &Resolved) -> String {
    format!(
        "# {TOOL} {VERSION}\n# replica r draws from ChaCha8 streams of seed {} with ids 64r + k\n",
        cfg.seed
    )
}

pub fn metrics_json(cfg: &Resolved, results: &[ReplicaResult]) -> String {
    let mut mean: BTreeMap<&str, f64> = BTreeMap::new();
    for r in results {
        for (k, v) in &r.metrics {
            *mean.entry(k.as_str()).or_default() += v / results.len() as f64;
        }
    }
    let m = Metrics {
        tool: TOOL,
        version: VERSION,
        format: OUTPUT_FORMAT,
        model: cfg.model.name(),
        method: cfg.method.name(),
        n: cfg.n,
        p: cfg.p,
        steps: cfg.steps,
        seed: cfg.seed,
        replicas: results
            .iter()
            .map(|r| ReplicaMetrics {
                replica: r.replica,
                metrics: &r.metrics,
            })
            .collect(),
        mean,
    };
    let mut s = serde_json::to_string_pretty(&m).expect("metrics serialize");
    s.push('\n');
    s
}

/// Rows `replica,step,time,particle,x0..,v0..`.
pub fn write_trajectory(path: &Path, results: &[ReplicaResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let dim = results.first().map_or(1, |r| r.dim);
    let has_v = results
        .iter()
        .any(|r| r.frames.iter().any(|f| f.velocities.is_some()));
    let mut header: Vec<String> = ["replica", "step", "time", "particle"].map(String::from).to_vec();
    header.extend((0..dim).map(|c| format!("x{c}")));
    if has_v {
        header.extend((0..dim).map(|c| format!("v{c}")));
    }
    let csv_err = |e: csv::Error| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    w.write_record(&header).map_err(csv_err)?;
    for r in results {
        for f in &r.frames {
            for (i, x) in f.positions.chunks(dim).enumerate() {
                let mut row = vec![r.replica.to_string(), f.step.to_string(), f.time.to_string(), i.to_string()];
                row.extend(x.iter().map(f64::to_string));
                if let Some(v) = &f.velocities {
                    row.extend(v[i * dim..(i + 1) * dim].iter().map(f64::to_string));
                }
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(io_err(path))
}

/// Create `<out>/<run_id>` and write every artifact; returns the directory.
pub fn write_run(out: &Path, id: &str, cfg: &Resolved, results: &[ReplicaResult], log: &str) -> Result<PathBuf> {
    let dir = out.join(id);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let resolved = dir.join("config.resolved");
    fs::write(&resolved, resolved_header(cfg) + &cfg.to_toml()).map_err(io_err(&resolved))?;
    write_trajectory(&dir.join("trajectory.csv"), results)?;
    let metrics = dir.join("metrics.json");
    fs::write(&metrics, metrics_json(cfg, results)).map_err(io_err(&metrics))?;
    let log_path = dir.join("log.txt");
    fs::write(&log_path, log).map_err(io_err(&log_path))?;
    Ok(dir)
}
