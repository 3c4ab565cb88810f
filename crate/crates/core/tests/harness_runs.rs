use std::io::BufRead;
use std::path::Path;

use pedsim::harness::{
    emit_plot_data, read_report, records_file, report_file, report_from_records, run_experiment, ExperimentConfig,
    HarnessError, PlotKind, RunManifest, RunStatus,
};
use pedsim::perception::PerceptionMode;
use pedsim::safety::{injury_probability, SafetyReport};
use pedsim::world::EpisodeRecord;

fn config(dir: &Path, n: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::builtin("crossing", n, 9);
    c.output_dir = dir.to_path_buf();
    c
}

fn records(path: &Path) -> Vec<EpisodeRecord> {
    std::io::BufReader::new(std::fs::File::open(path).unwrap())
        .lines()
        .map(|l| serde_json::from_str(&l.unwrap()).unwrap())
        .collect()
}

#[test]
fn every_index_once_in_order_and_reports_recompute_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), 30);
    let (manifest, reports) = run_experiment(&c).unwrap();
    assert!(manifest.is_complete());
    assert_eq!(reports.len(), 2);
    for (mode, report) in PerceptionMode::ALL.into_iter().zip(&reports) {
        let path = tmp.path().join(records_file(mode));
        let recs = records(&path);
        let idx: Vec<u64> = recs.iter().map(|r| r.episode).collect();
        assert_eq!(idx, (0..30).collect::<Vec<_>>());
        assert!(recs.iter().all(|r| r.mode == mode));

        let again = report_from_records(&path).unwrap();
        assert_eq!(&again, report);
        let stored = read_report(&tmp.path().join(report_file(mode, "json"))).unwrap();
        assert_eq!(serde_json::to_string(&stored).unwrap(), serde_json::to_string(&again).unwrap());
        assert_eq!(report.collision_rate, report.collisions as f64 / 30.0);
        assert_eq!(report.conflict_rate, report.conflicts as f64 / 30.0);
    }
}

#[test]
fn plot_tables_follow_the_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, reports) = run_experiment(&config(tmp.path(), 25)).unwrap();
    let (sv, v2i): (&SafetyReport, &SafetyReport) = (&reports[0], &reports[1]);

    let surface = tmp.path().join(PlotKind::InjurySurface.file_name());
    emit_plot_data(sv, v2i, PlotKind::InjurySurface, &surface).unwrap();
    let text = std::fs::read_to_string(&surface).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("V,A,P_I_single_vehicle,P_I_v2i"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 17 * 8);
    for r in &rows {
        assert_eq!(r[2], injury_probability(sv.collision_rate, r[0], r[1]).unwrap());
        assert_eq!(r[3], injury_probability(v2i.collision_rate, r[0], r[1]).unwrap());
    }

    let hist = tmp.path().join(PlotKind::DetectionHistogram.file_name());
    emit_plot_data(sv, v2i, PlotKind::DetectionHistogram, &hist).unwrap();
    let text = std::fs::read_to_string(&hist).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin_left_m,bin_right_m,count_sv,count_v2i"));
    let (mut a, mut b) = (0usize, 0usize);
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        let (left, right): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        assert_eq!(right - left, 1.0);
        a += f[2].parse::<usize>().unwrap();
        b += f[3].parse::<usize>().unwrap();
    }
    assert_eq!(a, sv.first_detection_distances.len());
    assert_eq!(b, v2i.first_detection_distances.len());
}

#[test]
fn manifest_is_written_before_outputs_and_marks_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), 3);
    // A directory where the v2i records file should go makes that write fail.
    std::fs::create_dir_all(tmp.path().join(records_file(PerceptionMode::V2i))).unwrap();
    let err = run_experiment(&c).unwrap_err();
    assert!(matches!(err, HarnessError::Io(_)), "{err:?}");
    assert_eq!(err.exit_code(), 3);
    let text = std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
    let m: RunManifest = serde_json::from_str(&text).unwrap();
    assert!(!m.is_complete());
    assert!(matches!(m.status, RunStatus::Failed { .. }));
    assert_eq!(m.master_seed, 9);
}

#[test]
fn invalid_configs_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path(), 0);
    assert_eq!(run_experiment(&c).unwrap_err().exit_code(), 1);
    c.episodes = 1;
    c.modes.clear();
    assert_eq!(run_experiment(&c).unwrap_err().exit_code(), 1);
    assert!(!tmp.path().join("manifest.json").exists());
}
