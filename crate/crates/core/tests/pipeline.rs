use std::time::Instant;

use cbr_core::config::ExperimentConfig;
use cbr_core::experiment::run_experiment;
use cbr_core::export::{read_csv, ArtifactKind, DimensionRecord, ExponentRecord, RegionRecord};
use cbr_core::fourier::kernel::KernelScanRow;
use cbr_core::fourier::probe::ProbeRow;

fn minimal(dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        output: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn minimal_config_runs_quickly_and_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let c = minimal(dir.path());
    assert_eq!((c.n, c.p, c.depth, c.delta_ladder.len()), (4, 4.0, 2, 3));
    let t = Instant::now();
    let first = run_experiment(&c).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed} s");
    assert!(first.manifest.complete);
    let second = run_experiment(&c).unwrap();
    assert_eq!(first.manifest_sha256, second.manifest_sha256);

    let d = dir.path();
    assert_eq!(read_csv::<DimensionRecord>(&d.join(ArtifactKind::Dimension.file_name())).unwrap().len(), 3);
    assert_eq!(read_csv::<ExponentRecord>(&d.join(ArtifactKind::Energy.file_name())).unwrap().len(), 3);
    assert_eq!(read_csv::<KernelScanRow>(&d.join(ArtifactKind::Kernel.file_name())).unwrap().len(), 3);
    assert_eq!(read_csv::<ProbeRow>(&d.join(ArtifactKind::Probe1d.file_name())).unwrap().len(), 2);
    assert_eq!(read_csv::<ProbeRow>(&d.join(ArtifactKind::Probe2d.file_name())).unwrap().len(), 1);
    assert!(!read_csv::<RegionRecord>(&d.join(ArtifactKind::Regions.file_name())).unwrap().is_empty());
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    let out = dir.path().join("out");
    std::fs::write(
        &path,
        format!(
            "n = 4\np = 4\ngrid = 3\ndelta_ladder = 2^-4, 2^-8\nkernel_deltas = 2^-3, 2^-4\nprobe_levels = 1\noutput = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let c = ExperimentConfig::load(&path).unwrap();
    let s = run_experiment(&c).unwrap();
    assert!(s.manifest.stages.iter().all(|st| st.status == "ok"));
}
