//! CSV artifacts and run manifests.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), so identical runs
//! give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::WaveMetrics;
use crate::config::{build_scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{GaugeTrace, RunOutput, Snapshot, StepReport};
use crate::variational::ResidualReport;

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Io(format!("config not found: {}", path.display())),
        _ => Error::Io(format!("{}: {e}", path.display())),
    })?;
    build_scenario(&raw)
}

/// Hex SHA-256 of the canonical TOML form.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    Sha256::digest(cfg.to_toml().as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn snapshot_file_name(step: usize) -> String {
    format!("snap_{step:06}.csv")
}

pub fn snapshot_csv(grid: &Grid, snap: &Snapshot) -> String {
    let two_d = grid.is_2d();
    let mut s = String::from(if two_d { "X,Y,U,v,gamma,S,Z\n" } else { "X,U,v,gamma,S,Z\n" });
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = j * grid.nx() + i;
            let _ = write!(s, "{:.16e},", grid.x(i));
            if two_d {
                let _ = write!(s, "{:.16e},", grid.y(j));
            }
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                snap.u[k], snap.v[k], snap.gamma[k], snap.s[k], snap.z[k]
            );
        }
    }
    s
}

pub fn gauge_csv(trace: &GaugeTrace) -> String {
    let mut s = String::from("t,S,gamma,sigma_lateral_proxy\n");
    for g in &trace.samples {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", g.t, g.s, g.gamma, g.sigma_lateral_proxy);
    }
    s
}

/// Per-step energy budget and monitors.
pub fn energy_csv(reports: &[StepReport]) -> String {
    let mut s = String::from(
        "t,kinetic,free_energy,dissipated,boundary_work,boundary_release,entropy,imbalance,\
         min_z_gammadot,peak_z_gammadot,cfl,diffusion_number\n",
    );
    for r in reports {
        let e = &r.energy;
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.time,
            e.kinetic,
            e.free_energy,
            e.dissipated,
            e.boundary_work,
            e.boundary_release,
            e.entropy,
            e.imbalance,
            r.min_z_gammadot,
            r.peak_z_gammadot,
            r.max_cfl,
            r.max_diff
        );
    }
    s
}

pub fn residual_csv(rep: &ResidualReport) -> String {
    let mut s = String::from("time,residU_L2,residGamma_L2\n");
    for ((t, u), g) in rep.times.iter().zip(&rep.norm_u).zip(&rep.norm_gamma) {
        let _ = writeln!(s, "{t:.16e},{u:.16e},{g:.16e}");
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub steps: usize,
    pub final_time: f64,
    pub relative_imbalance: f64,
    pub min_z_gammadot: f64,
    pub peak_z_gammadot: f64,
    pub entropy_produced: f64,
    pub wave: Option<WaveMetrics>,
    /// Why the run stopped early, if it did.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config_hash: String,
    /// Wall-clock start and end, seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub files: Vec<FileEntry>,
    pub metrics: SummaryMetrics,
}

pub fn wall_clock() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Writes files under one directory and remembers what it wrote.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.files.retain(|f| f.path != rel);
        self.files.push(FileEntry {
            path: rel.to_string(),
            bytes: contents.len() as u64,
        });
        Ok(path)
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Writes `manifest.json` after checking that every listed file exists.
    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest> {
        for f in &self.files {
            if !self.dir.join(&f.path).is_file() {
                return Err(Error::Io(format!("artifact vanished: {}", f.path)));
            }
        }
        manifest.files = self.files;
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(self.dir.join("manifest.json"), json + "\n")?;
        Ok(manifest)
    }
}

/// Writes snapshots, gauges, the energy log and the manifest of one run.
pub fn write_run(
    cfg: &ScenarioConfig,
    out: &RunOutput,
    wave: Option<WaveMetrics>,
    error: Option<&Error>,
    dir: impl Into<PathBuf>,
    started: f64,
) -> Result<RunManifest> {
    let mut w = ArtifactWriter::new(dir)?;
    w.write("config.toml", &cfg.to_toml())?;
    for snap in &out.snapshots {
        w.write(&format!("snapshots/{}", snapshot_file_name(snap.step)), &snapshot_csv(&cfg.grid, snap))?;
    }
    for (k, tr) in out.gauges.iter().enumerate() {
        w.write(&format!("gauge_{k}.csv"), &gauge_csv(tr))?;
    }
    w.write("energy.csv", &energy_csv(&out.reports))?;
    let (min_zg, peak_zg) = out.admissibility_margin();
    let metrics = SummaryMetrics {
        steps: out.reports.len(),
        final_time: out.state.time,
        relative_imbalance: out.relative_imbalance(),
        min_z_gammadot: min_zg,
        peak_z_gammadot: peak_zg,
        entropy_produced: out.reports.last().map_or(0.0, |r| r.energy.entropy),
        wave,
        error: error.map(|e| e.to_string()),
    };
    w.finish(RunManifest {
        scenario: cfg.name.clone(),
        config_hash: config_hash(cfg),
        started,
        finished: wall_clock(),
        files: Vec::new(),
        metrics,
    })
}
