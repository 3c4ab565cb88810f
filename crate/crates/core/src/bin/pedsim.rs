use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pedsim::harness::{
    emit_plot_data, load_config, output_dir_with_env, read_report, report_file, report_from_records,
    run_experiment, write_report, ExperimentConfig, HarnessError, PlotKind,
};
use pedsim::perception::PerceptionMode;

#[derive(Parser)]
#[command(name = "pedsim", version, about = "Pedestrian-safety simulation: single-vehicle vs V2I perception")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sv,
    V2i,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    InjurySurface,
    DetectionHistogram,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of episodes and write records, reports and a manifest.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in scenario; replaces the config's scenario.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Recompute a report from a records file.
    Report {
        records: PathBuf,
        /// Directory for report_<mode>.csv/.json; prints CSV to stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write plot tables from the two reports in a run directory.
    PlotData {
        /// Run directory holding report_single_vehicle.json and report_v2i.json.
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        kind: KindArg,
        /// Destination directory; defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file without running anything.
    Validate { config: PathBuf },
}

fn build_config(
    config: Option<PathBuf>,
    scenario: Option<String>,
    mode: Option<ModeArg>,
    episodes: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<ExperimentConfig, HarnessError> {
    let mut c = match &config {
        Some(p) => load_config(p)?,
        None => {
            let name = scenario
                .clone()
                .ok_or_else(|| HarnessError::Config("give --config or --scenario".into()))?;
            ExperimentConfig::builtin(&name, 1000, 0)
        }
    };
    if let Some(name) = scenario {
        c.scenario = Some(name);
        c.scenario_config = None;
    }
    if let Some(m) = mode {
        c.modes = match m {
            ModeArg::Sv => vec![PerceptionMode::SingleVehicle],
            ModeArg::V2i => vec![PerceptionMode::V2i],
            ModeArg::Both => PerceptionMode::ALL.to_vec(),
        };
    }
    if let Some(n) = episodes {
        c.episodes = n;
    }
    if let Some(s) = seed {
        c.master_seed = s;
    }
    if workers.is_some() {
        c.workers = workers;
    }
    c.output_dir = match out {
        Some(o) => o,
        None => output_dir_with_env(&c.output_dir),
    };
    c.validate()?;
    Ok(c)
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            scenario,
            mode,
            episodes,
            seed,
            out,
            workers,
        } => {
            let c = build_config(config, scenario, mode, episodes, seed, out, workers)?;
            let (_, reports) = run_experiment(&c)?;
            println!("{}", pedsim::safety::CSV_HEADER);
            for r in &reports {
                println!("{}", r.csv_row());
            }
            eprintln!("wrote {}", c.output_dir.display());
        }
        Command::Report { records, out } => {
            let r = report_from_records(&records)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
                    write_report(&dir, &r)?;
                }
                None => print!("{}", r.to_csv()),
            }
        }
        Command::PlotData { dir, kind, out } => {
            let sv = read_report(&dir.join(report_file(PerceptionMode::SingleVehicle, "json")))?;
            let v2i = read_report(&dir.join(report_file(PerceptionMode::V2i, "json")))?;
            let out = out.unwrap_or(dir);
            std::fs::create_dir_all(&out).map_err(|e| HarnessError::Io(format!("{}: {e}", out.display())))?;
            let kinds: Vec<PlotKind> = match kind {
                KindArg::InjurySurface => vec![PlotKind::InjurySurface],
                KindArg::DetectionHistogram => vec![PlotKind::DetectionHistogram],
                KindArg::All => PlotKind::ALL.to_vec(),
            };
            for k in kinds {
                let path = out.join(k.file_name());
                emit_plot_data(&sv, &v2i, k, &path)?;
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Validate { config } => {
            let c = load_config(&config)?;
            println!("ok: {} x {} episodes", c.scenario_name(), c.episodes);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pedsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
