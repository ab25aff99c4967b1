use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{Output, Scenario};
use crate::dde::{self, IntegratorConfig, Trajectory};
use crate::error::Error;
use crate::io::{fmt_f64, sha256_hex, write_file};
use crate::params::SystemParams;
use crate::{field, oracle, spectral};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{module}: {source}")]
    Numerical { module: &'static str, source: Error },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

fn numerical(module: &'static str) -> impl Fn(Error) -> RunError {
    move |source| RunError::Numerical { module, source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scenario: Scenario,
    pub files: Vec<ManifestEntry>,
    pub warnings: Vec<String>,
}

pub const MANIFEST: &str = "manifest.json";

struct Artifact {
    name: String,
    bytes: Vec<u8>,
}

#[derive(Default)]
struct JobOutput {
    artifacts: Vec<Artifact>,
    warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    variant: usize,
    n: u32,
    output: Output,
}

/// Poles record as written to disk and printed by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleRecord {
    pub n: u32,
    pub branch: spectral::Branch,
    pub omega: f64,
    pub q: i64,
    pub residue_re: f64,
    pub residue_im: f64,
    pub phase_residual: f64,
}

impl From<&spectral::BicSolution> for PoleRecord {
    fn from(s: &spectral::BicSolution) -> Self {
        PoleRecord {
            n: s.n,
            branch: s.branch,
            omega: s.omega,
            q: s.q,
            residue_re: s.residue_e.re,
            residue_im: s.residue_e.im,
            phase_residual: s.phase_residual,
        }
    }
}

fn suffix(scenario: &Scenario, variant: usize) -> String {
    if scenario.g_sweep.is_empty() {
        String::new()
    } else {
        format!("_g{variant}")
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn trajectory(scenario: &Scenario, p: &SystemParams, n: u32, t_max: f64, point_like: bool) -> Result<Trajectory, RunError> {
    let cfg = IntegratorConfig::with_steps(scenario.steps_per_delay);
    let run = if point_like {
        dde::integrate_point_atom
    } else {
        dde::integrate
    };
    run(p, n, &scenario.init, t_max, &cfg).map_err(numerical("dde"))
}

fn run_job(scenario: &Scenario, p: &SystemParams, job: Job) -> Result<JobOutput, RunError> {
    let tag = format!("n{}{}", job.n, suffix(scenario, job.variant));
    let mut out = JobOutput::default();
    match job.output {
        Output::Trajectory => {
            let tr = trajectory(scenario, p, job.n, scenario.horizon, scenario.point_like)?;
            out.artifacts.push(Artifact {
                name: format!("trajectory_{tag}.csv"),
                bytes: csv_bytes(|b| tr.write_csv(b)),
            });
        }
        Output::Poles => {
            let search =
                spectral::find_bics_with_init(p, job.n, &scenario.init, scenario.bic_tol).map_err(numerical("spectral"))?;
            for m in &search.near_misses {
                out.warnings.push(format!(
                    "{tag}: near miss on branch {} (q = {}, phase residual {:e})",
                    m.branch, m.q, m.phase_residual
                ));
            }
            let records: Vec<PoleRecord> = search.solutions.iter().map(PoleRecord::from).collect();
            out.artifacts.push(Artifact {
                name: format!("poles_{tag}.json"),
                bytes: json_bytes(&records),
            });
        }
        Output::FieldMap => {
            let grid = scenario.field_grid;
            let tr = trajectory(scenario, p, job.n, grid.t_max.max(grid.t_min), false)?;
            let map = field::intensity_map(&tr, p, &grid).map_err(numerical("field"))?;
            out.artifacts.push(Artifact {
                name: format!("field_{tag}.csv"),
                bytes: csv_bytes(|b| map.write_csv(b)),
            });
            let sidecar = json!({
                "scenario": scenario.name,
                "n": job.n,
                "grid": grid,
                "params": p,
                "columns": ["x", "t", "intensity"],
                "order": "t-major, then x",
                "max_intensity": map.max(),
            });
            out.artifacts.push(Artifact {
                name: format!("field_{tag}.json"),
                bytes: json_bytes(&sidecar),
            });
        }
        Output::OracleCompare => {
            let settings = scenario.oracle;
            let tr = trajectory(scenario, p, job.n, settings.horizon, false)?;
            let grid = settings.config.grid(p, settings.horizon).map_err(numerical("oracle"))?;
            let run = oracle::integrate_full(p, job.n, &scenario.init, &grid, settings.horizon, tr.dt, &[])
                .map_err(numerical("oracle"))?;
            out.warnings.extend(run.warnings.iter().map(|w| format!("{tag}: {w}")));
            let (pd, po) = (dde::population(&tr), dde::population(&run.trajectory));
            let rows = pd.len().min(po.len());
            let mut csv = String::from("t,p_dde,p_oracle,abs_diff\n");
            let mut max_diff = 0.0f64;
            for k in 0..rows {
                let diff = (pd[k] - po[k]).abs();
                max_diff = max_diff.max(diff);
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    fmt_f64(tr.time(k)),
                    fmt_f64(pd[k]),
                    fmt_f64(po[k]),
                    fmt_f64(diff)
                );
            }
            out.artifacts.push(Artifact {
                name: format!("oracle_{tag}.csv"),
                bytes: csv.into_bytes(),
            });
            let verdict = json!({
                "max_diff": max_diff,
                "pass": max_diff < settings.threshold && run.norm_drift < 1e-6,
                "threshold": settings.threshold,
                "horizon": settings.horizon,
                "modes": grid.modes,
                "band": [p.v * grid.k_min, p.v * grid.k_max],
                "recurrence_time": grid.recurrence_time(p.v),
                "first_echo": grid.first_echo(p),
                "norm_drift": run.norm_drift,
                "step": run.dt,
            });
            out.artifacts.push(Artifact {
                name: format!("oracle_{tag}.json"),
                bytes: json_bytes(&verdict),
            });
        }
    }
    Ok(out)
}

/// Executes every requested output into `out_dir` and writes the manifest
/// last. Jobs run on at most `workers` threads; file contents do not depend
/// on the worker count.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path, workers: usize) -> Result<Manifest, RunError> {
    let variants = scenario.variants();
    let mut jobs = Vec::new();
    for (variant, _) in variants.iter().enumerate() {
        for &n in &scenario.subspaces {
            for &output in &scenario.outputs {
                jobs.push(Job { variant, n, output });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let results: Vec<Result<JobOutput, RunError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&job| run_job(scenario, &variants[job.variant], job))
            .collect()
    });

    let mut artifacts = Vec::new();
    let mut warnings = Vec::new();
    for r in results {
        let out = r?;
        artifacts.extend(out.artifacts);
        warnings.extend(out.warnings);
    }
    artifacts.sort_by(|a, b| a.name.cmp(&b.name));

    let mut files = Vec::with_capacity(artifacts.len());
    for a in &artifacts {
        let path = out_dir.join(&a.name);
        write_file(&path, &a.bytes).map_err(|source| RunError::Io { path, source })?;
        files.push(ManifestEntry {
            path: a.name.clone(),
            sha256: sha256_hex(&a.bytes),
            bytes: a.bytes.len(),
        });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        scenario: scenario.clone(),
        files,
        warnings,
    };
    let path = out_dir.join(MANIFEST);
    write_file(&path, &json_bytes(&manifest)).map_err(|source| RunError::Io { path, source })?;
    Ok(manifest)
}
