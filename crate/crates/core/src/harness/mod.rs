//! Batch experiments: configuration, seeded episode batches, record and
//! report files, plot data.
//!
//! Output layout of a run directory:
//!
//! ```text
//! manifest.json               status is "running" until every file is written
//! records_<mode>.jsonl        one EpisodeRecord per line, episode order
//! report_<mode>.csv / .json   SafetyReport
//! ```

mod config;

pub use config::{load_config, parse_config, ExperimentConfig};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perception::PerceptionMode;
use crate::safety::{aggregate_summaries, detection_histogram, EpisodeSummary, SafetyReport};
use crate::stochastic::rng::episode_seed;
use crate::stochastic::sample_initial_scene;
use crate::world::{run_episode, EpisodeRecord, ScenarioConfig};

/// Environment variable overriding the output directory.
pub const OUTPUT_DIR_ENV: &str = "PEDSIM_OUTPUT_DIR";

/// Episodes simulated per parallel batch before writing.
const CHUNK: usize = 64;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime fault: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Runtime(_) => 2,
            HarnessError::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state")]
pub enum RunStatus {
    Running,
    Complete,
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeOutputs {
    pub mode: PerceptionMode,
    pub records: PathBuf,
    pub report_csv: PathBuf,
    pub report_json: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch when the run started.
    pub started_unix: u64,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub outputs: Vec<ModeOutputs>,
    pub status: RunStatus,
}

impl RunManifest {
    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }
}

pub fn records_file(mode: PerceptionMode) -> String {
    format!("records_{mode}.jsonl")
}

pub fn report_file(mode: PerceptionMode, ext: &str) -> String {
    format!("report_{mode}.{ext}")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn write_manifest(dir: &Path, m: &RunManifest) -> Result<()> {
    write_json(&dir.join("manifest.json"), m)
}

/// Simulates episode `index` of `mode`. The episode seed does not depend on
/// the mode, so both modes see the same initial scene and sensor noise.
pub fn simulate_episode(
    scenario: &ScenarioConfig,
    master_seed: u64,
    index: u64,
    mode: PerceptionMode,
) -> Result<EpisodeRecord> {
    let seed = episode_seed(master_seed, index);
    let theta = sample_initial_scene(scenario, seed).map_err(|e| HarnessError::Runtime(format!("episode {index}: {e}")))?;
    let mut rec =
        run_episode(scenario, &theta, mode, seed).map_err(|e| HarnessError::Runtime(format!("episode {index}: {e}")))?;
    rec.episode = index;
    Ok(rec)
}

/// Runs every mode's batch and writes the run directory
/// `config.output_dir`. Outputs are a function of the config alone.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(RunManifest, Vec<SafetyReport>)> {
    config.validate()?;
    let scenario = config.resolve_scenario()?;
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;

    let started_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix,
        master_seed: config.master_seed,
        config: config.clone(),
        outputs: config
            .modes
            .iter()
            .map(|&mode| ModeOutputs {
                mode,
                records: PathBuf::from(records_file(mode)),
                report_csv: PathBuf::from(report_file(mode, "csv")),
                report_json: PathBuf::from(report_file(mode, "json")),
            })
            .collect(),
        status: RunStatus::Running,
    };
    write_manifest(&dir, &manifest)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| HarnessError::Runtime(e.to_string()))?;

    let result = pool.install(|| {
        config
            .modes
            .iter()
            .map(|&mode| run_mode(&scenario, config, mode, &dir))
            .collect::<Result<Vec<_>>>()
    });
    match result {
        Ok(reports) => {
            manifest.status = RunStatus::Complete;
            write_manifest(&dir, &manifest)?;
            Ok((manifest, reports))
        }
        Err(e) => {
            manifest.status = RunStatus::Failed { reason: e.to_string() };
            // The original error matters more than a second failure here.
            let _ = write_manifest(&dir, &manifest);
            Err(e)
        }
    }
}

fn run_mode(scenario: &ScenarioConfig, config: &ExperimentConfig, mode: PerceptionMode, dir: &Path) -> Result<SafetyReport> {
    let path = dir.join(records_file(mode));
    let file = File::create(&path).map_err(|e| io_err(&path, e))?;
    let mut out = BufWriter::new(file);
    let mut summaries = Vec::with_capacity(config.episodes);
    let n = config.episodes as u64;
    let mut start = 0u64;
    while start < n {
        let end = (start + CHUNK as u64).min(n);
        let batch: Vec<Result<EpisodeRecord>> = (start..end)
            .into_par_iter()
            .map(|i| simulate_episode(scenario, config.master_seed, i, mode))
            .collect();
        for rec in batch {
            let rec = rec?;
            serde_json::to_writer(&mut out, &rec).map_err(|e| io_err(&path, e))?;
            out.write_all(b"\n").map_err(|e| io_err(&path, e))?;
            summaries.push(EpisodeSummary::from_record(&rec));
        }
        start = end;
    }
    out.flush().map_err(|e| io_err(&path, e))?;

    let report = aggregate_summaries(&summaries, &scenario.name, mode, scenario.evaluation.injury_speed_unit)
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    write_report(dir, &report)?;
    Ok(report)
}

/// Writes `report_<mode>.csv` and `report_<mode>.json` into `dir`.
pub fn write_report(dir: &Path, report: &SafetyReport) -> Result<()> {
    let csv = dir.join(report_file(report.mode, "csv"));
    std::fs::write(&csv, report.to_csv()).map_err(|e| io_err(&csv, e))?;
    write_json(&dir.join(report_file(report.mode, "json")), report)
}

pub fn read_report(path: &Path) -> Result<SafetyReport> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))
}

/// Recomputes a report from a records file, one line at a time.
pub fn report_from_records(path: &Path) -> Result<SafetyReport> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut summaries = Vec::new();
    let mut head: Option<(String, PerceptionMode, crate::safety::SpeedUnit)> = None;
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EpisodeRecord = serde_json::from_str(&line)
            .map_err(|e| HarnessError::Runtime(format!("{}:{}: {e}", path.display(), k + 1)))?;
        let key = (rec.scenario.clone(), rec.mode, rec.injury_speed_unit);
        match &head {
            None => head = Some(key),
            Some(h) if *h != key => {
                return Err(HarnessError::Runtime(format!(
                    "{}:{}: record belongs to a different batch",
                    path.display(),
                    k + 1
                )))
            }
            _ => {}
        }
        summaries.push(EpisodeSummary::from_record(&rec));
    }
    let (scenario, mode, unit) =
        head.ok_or_else(|| HarnessError::Runtime(format!("{}: no records", path.display())))?;
    aggregate_summaries(&summaries, &scenario, mode, unit).map_err(|e| HarnessError::Runtime(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    InjurySurface,
    DetectionHistogram,
}

impl PlotKind {
    pub const ALL: [PlotKind; 2] = [PlotKind::InjurySurface, PlotKind::DetectionHistogram];

    pub fn file_name(self) -> &'static str {
        match self {
            PlotKind::InjurySurface => "injury_surface.csv",
            PlotKind::DetectionHistogram => "detection_histogram.csv",
        }
    }
}

/// Writes one plot table comparing the two modes.
pub fn emit_plot_data(sv: &SafetyReport, v2i: &SafetyReport, kind: PlotKind, path: &Path) -> Result<()> {
    let mut s = String::new();
    match kind {
        PlotKind::InjurySurface => {
            if sv.injury_surface.len() != v2i.injury_surface.len() {
                return Err(HarnessError::Runtime("injury surfaces have different grids".into()));
            }
            s.push_str("V,A,P_I_single_vehicle,P_I_v2i\n");
            for (a, b) in sv.injury_surface.iter().zip(&v2i.injury_surface) {
                s.push_str(&format!("{},{},{},{}\n", a.v, a.a, a.p, b.p));
            }
        }
        PlotKind::DetectionHistogram => {
            s.push_str("bin_left_m,bin_right_m,count_sv,count_v2i\n");
            for (l, r, a, b) in detection_histogram(sv, v2i) {
                s.push_str(&format!("{l},{r},{a},{b}\n"));
            }
        }
    }
    std::fs::write(path, s).map_err(|e| io_err(path, e))
}

/// Output directory after applying the environment override.
pub fn output_dir_with_env(configured: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => configured.to_path_buf(),
    }
}
