use std::path::{Path, PathBuf};

use holevo_lab::channels::BoundDirection;
use holevo_lab::error::LabError;
use holevo_lab::experiments::{self, ExperimentConfig, ExperimentKind, ExperimentReport, ScanFile, ScanIndex};

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(name);
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&value).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, path: &Path) {
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let errors: Vec<String> = v.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", path.display());
}

/// One cheap config per experiment.
fn small_configs(dir: &Path) -> Vec<ExperimentConfig> {
    ExperimentKind::ALL
        .iter()
        .map(|&kind| {
            let mut c = ExperimentConfig::new(kind, dir.join(format!("{kind}.json")));
            c.seed = 7;
            match kind {
                ExperimentKind::HaarOpnormMean | ExperimentKind::HaarFroMean => {
                    c.k = Some(3);
                    c.n_samples = Some(50);
                }
                ExperimentKind::HaydenWinter | ExperimentKind::AdditivityGap => {
                    (c.k, c.d, c.m, c.n_samples) = (Some(2), Some(3), Some(2), Some(3));
                }
                ExperimentKind::DesignQuality => {
                    (c.d, c.depth, c.n_samples) = (Some(4), Some(3), Some(200));
                }
                ExperimentKind::LevyTails => {
                    (c.d, c.lambda, c.n_samples) = (Some(8), Some(0.3), Some(1000));
                }
                ExperimentKind::SubspaceVariation => {
                    (c.k, c.d, c.m, c.n_samples) = (Some(2), Some(4), Some(2), Some(2));
                }
                ExperimentKind::PolyEnvelope => {
                    (c.p, c.eps, c.n_samples) = (Some(1.0), Some(0.5), Some(101));
                }
            }
            c
        })
        .collect()
}

fn csv_header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

#[test]
fn every_experiment_matches_the_schema_and_its_csv() {
    let dir = tempfile::tempdir().unwrap();
    let v = schema("report.schema.json");
    for c in small_configs(dir.path()) {
        let r = experiments::run(&c).unwrap_or_else(|e| panic!("{}: {e}", c.experiment));
        assert_valid(&v, &c.out_path);
        let back = ExperimentReport::from_json_file(&c.out_path).unwrap();
        assert_eq!(back.records, r.records);
        assert_eq!(csv_header(&c.csv_path()), r.columns);
        let rows = csv::Reader::from_path(c.csv_path()).unwrap().records().count();
        assert_eq!(rows, r.records.len());
        // the summary is recomputable from the records
        let vals = r.column_f64(&r.summary.metric).unwrap();
        assert_eq!(vals.len(), r.summary.n);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((mean - r.summary.mean).abs() <= 1e-12 * mean.abs().max(1.0));
    }
}

#[test]
fn same_seed_gives_identical_records_at_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    for mut c in small_configs(dir.path()) {
        let a = experiments::run(&c).unwrap();
        let bytes_a = std::fs::read(c.csv_path()).unwrap();
        c.parallel = true;
        let b = experiments::run(&c).unwrap();
        assert_eq!(a.records, b.records, "{}", c.experiment);
        assert_eq!(bytes_a, std::fs::read(c.csv_path()).unwrap());
    }
}

#[test]
fn seeds_and_streams_change_the_records() {
    let dir = tempfile::tempdir().unwrap();
    let base = small_configs(dir.path()).remove(0);
    let a = experiments::run(&base).unwrap();
    let mut other = base.clone();
    other.stream = 1;
    assert_ne!(a.records, experiments::run(&other).unwrap().records);
}

#[test]
fn failed_run_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hw.json");
    let mut c = ExperimentConfig::new(ExperimentKind::HaydenWinter, &out);
    (c.k, c.d, c.m) = (Some(20), Some(2), Some(2));
    let err = experiments::run(&c).unwrap_err();
    assert!(matches!(err, LabError::Guard { param: "k", .. }));
    assert_eq!(err.exit_code(), 3);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    std::fs::write(&out, b"previous").unwrap();
    assert!(experiments::run(&c).is_err());
    assert_eq!(std::fs::read(&out).unwrap(), b"previous");
}

#[test]
fn successful_run_writes_exactly_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = small_configs(&dir.path().join("nested/deeper")).remove(1);
    experiments::run(&c).unwrap();
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("nested/deeper"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["haar-fro-mean.csv", "haar-fro-mean.json"]);
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::new(ExperimentKind::PolyEnvelope, dir.path().join("p.json"));
    (c.p, c.eps, c.precision_bits) = (Some(2.0), Some(0.25), Some(512));
    assert_eq!(experiments::run(&c).unwrap_err().exit_code(), 4);
    c.p = None;
    assert_eq!(experiments::run(&c).unwrap_err().exit_code(), 2);
    let mut d = ExperimentConfig::new(ExperimentKind::DesignQuality, dir.path().join("d.json"));
    (d.d, d.depth) = (Some(6), Some(2));
    assert_eq!(experiments::run(&d).unwrap_err().exit_code(), 2);
}

#[test]
fn hayden_winter_run_beats_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::new(ExperimentKind::HaydenWinter, dir.path().join("hw.json"));
    (c.k, c.d, c.m, c.n_samples) = (Some(4), Some(16), Some(32), Some(10));
    let r = experiments::run(&c).unwrap();
    assert!(r.column_f64("margin").unwrap().iter().all(|&m| m >= -1e-12));
    assert_eq!(r.summary.bounds[0].direction, BoundDirection::Lower);
    assert_eq!(r.details["hypothesis_m_le_d"], false);
}

#[test]
fn opnorm_run_at_k8() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::new(ExperimentKind::HaarOpnormMean, dir.path().join("o.json"));
    (c.k, c.n_samples) = (Some(8), Some(1000));
    let r = experiments::run(&c).unwrap();
    assert!(r.summary.mean < 2.0 / 8f64.sqrt());
}

fn fro_scan(dir: &Path) -> Vec<ExperimentConfig> {
    [4usize, 6, 8]
        .iter()
        .map(|&k| {
            let mut c = ExperimentConfig::new(ExperimentKind::HaarFroMean, dir.join(format!("fro{k}.json")));
            (c.k, c.n_samples, c.seed) = (Some(k), Some(500), 3);
            c
        })
        .collect()
}

#[test]
fn scan_regresses_fro_means() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    let (idx, reports) = experiments::scan(&fro_scan(dir.path()), true, &index).unwrap();
    assert_eq!(idx.failures(), 0);
    assert_valid(&schema("index.schema.json"), &index);
    let means: Vec<f64> = reports.iter().map(|r| r.as_ref().unwrap().summary.mean).collect();
    let slope = experiments::log_log_slope(&[4.0, 6.0, 8.0], &means);
    assert!((-1.2..=-0.8).contains(&slope), "{slope}");
}

#[test]
fn scan_rejects_bad_lists_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    assert!(matches!(experiments::scan(&[], false, &index), Err(LabError::Validation(_))));
    let mut cfgs = fro_scan(dir.path());
    cfgs[2].out_path = cfgs[0].out_path.clone();
    let err = experiments::scan(&cfgs, false, &index).unwrap_err();
    assert!(matches!(err, LabError::Collision(_)));
    assert_eq!(err.exit_code(), 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn scan_isolates_failures() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    let mut cfgs = fro_scan(dir.path());
    cfgs[1].k = Some(64);
    let (idx, reports) = experiments::scan(&cfgs, false, &index).unwrap();
    assert_eq!(idx.failures(), 1);
    assert!(!idx.entries[1].ok && idx.entries[1].exit_code == 3);
    assert!(reports[0].is_some() && reports[1].is_none() && reports[2].is_some());
    assert!(!cfgs[1].out_path.exists());
    let on_disk: ScanIndex = serde_json::from_str(&std::fs::read_to_string(&index).unwrap()).unwrap();
    assert_eq!(on_disk, idx);
}

#[test]
fn scan_file_parses() {
    let text = r#"
        index = "out/index.json"
        parallel = true

        [[run]]
        experiment = "levy-tails"
        d = 16
        lambda = 0.25
        out_path = "out/levy.json"

        [[run]]
        experiment = "poly-envelope"
        p = 1.0
        eps = 0.5
        out_path = "out/poly.json"
    "#;
    let f = ScanFile::from_toml_str(text).unwrap();
    assert_eq!(f.run.len(), 2);
    assert_eq!(f.index, Some(PathBuf::from("out/index.json")));
    assert_eq!(f.run[1].experiment, ExperimentKind::PolyEnvelope);
}
