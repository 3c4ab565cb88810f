//! Runs a small batch through the harness into a temporary directory and
//! lists what it wrote.

use pedsim::harness::{emit_plot_data, run_experiment, ExperimentConfig, PlotKind};

fn main() {
    let dir = std::env::temp_dir().join("pedsim_example_run");
    let mut config = ExperimentConfig::builtin("crossing", 50, 11);
    config.output_dir = dir.clone();
    let (manifest, reports) = run_experiment(&config).expect("run succeeds");
    println!("{}", serde_json::to_string_pretty(&manifest.outputs).expect("serializable"));
    for r in &reports {
        print!("{}", r.to_csv());
    }
    for kind in PlotKind::ALL {
        let path = dir.join(kind.file_name());
        emit_plot_data(&reports[0], &reports[1], kind, &path).expect("writable");
        println!("wrote {}", path.display());
    }
}
