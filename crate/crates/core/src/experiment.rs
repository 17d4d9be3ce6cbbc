//! Config-driven pipeline with a deterministic manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cantor::{seed_from_points, CantorSystem};
use crate::config::ExperimentConfig;
use crate::domain::{build_domain, cap_cover, dimension_table};
use crate::energy::{energy_exponent_table, energy_partition};
use crate::error::{Error, Result};
use crate::export::{self, ArtifactKind, DimensionRecord, ExponentRecord};
use crate::fourier::kernel::kernel_scan;
use crate::fourier::probe::{decoupling_probe_1d, decoupling_probe_2d, ProbeRow, ProbeWindow};
use crate::lambdap::{self, build_p};
use crate::regions::{self, Region};
use crate::rng;

#[derive(Clone, Debug, Serialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageEntry {
    pub name: &'static str,
    pub status: &'static str,
    pub artifacts: Vec<ArtifactEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub package: &'static str,
    pub version: &'static str,
    pub config: String,
    pub config_sha256: String,
    pub grid: u64,
    pub feasible: bool,
    pub stages: Vec<StageEntry>,
    pub complete: bool,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output: PathBuf,
    pub manifest: Manifest,
    /// sha256 of the manifest file bytes.
    pub manifest_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Writer<'a> {
    dir: &'a Path,
    manifest: Manifest,
}

impl Writer<'_> {
    fn put(&self, kind: ArtifactKind, bytes: Vec<u8>) -> Result<ArtifactEntry> {
        fs::write(self.dir.join(kind.file_name()), &bytes)?;
        Ok(ArtifactEntry {
            file: kind.file_name().into(),
            sha256: sha256_hex(&bytes),
        })
    }

    fn stage<T>(
        &mut self,
        name: &'static str,
        f: impl FnOnce(&Self) -> Result<(T, Vec<ArtifactEntry>, Option<String>)>,
    ) -> Result<T> {
        match f(self) {
            Ok((v, artifacts, note)) => {
                self.manifest.stages.push(StageEntry { name, status: "ok", artifacts, note });
                Ok(v)
            }
            Err(e) => {
                self.manifest.stages.push(StageEntry {
                    name,
                    status: "failed",
                    artifacts: vec![],
                    note: Some(e.to_string()),
                });
                self.finish()?;
                Err(Error::Stage { stage: name, source: Box::new(e) })
            }
        }
    }

    fn finish(&self) -> Result<String> {
        let bytes = export::json_bytes(&self.manifest)?;
        fs::write(self.dir.join(ArtifactKind::Manifest.file_name()), &bytes)?;
        Ok(sha256_hex(&bytes))
    }
}

/// Runs every stage in order, writing artifacts and `manifest.json` into
/// `config.output`. A failing stage still leaves a manifest naming it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let dir = config.output.as_path();
    fs::create_dir_all(dir)?;
    let text = config.to_text();
    let (grid, feasible) = config.feasibility();
    let mut w = Writer {
        dir,
        manifest: Manifest {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: sha256_hex(text.as_bytes()),
            config: text,
            grid,
            feasible,
            stages: vec![],
            complete: false,
        },
    };
    let (n, p, seed) = (config.n, config.p, config.seed);
    let m = lambdap::even_half(p);

    let points = w.stage("build_p", |w| {
        let ps = build_p(n, p, rng::derive_seed(seed, 0), config.grid)?;
        let a = w.put(ArtifactKind::Points, export::json_bytes(&ps)?)?;
        Ok((ps, vec![a], None))
    })?;
    let g = points.g_star();

    let sys = w.stage("seed", |w| {
        let fam = seed_from_points(points.clone())?;
        fam.verify()?;
        let a = w.put(ArtifactKind::Seed, export::json_bytes(&fam)?)?;
        Ok((CantorSystem::new(fam), vec![a], None))
    })?;

    let dom = w.stage("domain", |w| {
        let d = build_domain(&sys, config.depth)?;
        let a = w.put(ArtifactKind::Domain, export::json_bytes(&d)?)?;
        Ok((d, vec![a], None))
    })?;

    w.stage("caps", |w| {
        let last = config.delta_ladder.last().unwrap();
        let k = sys.k_delta(last)?;
        let deep = build_domain(&sys, k.max(config.depth))?;
        let cover = cap_cover(&deep, &sys, last)?;
        if !cover.verified() {
            return Err(Error::Certification(format!("cap cover at delta = {last} has failures")));
        }
        let a = w.put(ArtifactKind::Caps, export::json_bytes(&cover)?)?;
        Ok(((), vec![a], None))
    })?;

    w.stage("dimension", |w| {
        let rows = dimension_table(&sys, &config.delta_ladder, true)?;
        let recs: Vec<DimensionRecord> = rows.iter().map(DimensionRecord::from).collect();
        let a = w.put(ArtifactKind::Dimension, export::csv_bytes(&recs)?)?;
        let outside = rows.iter().filter(|r| !r.within).count();
        let note = (outside > 0).then(|| format!("{outside} rows outside the dimension envelope"));
        Ok(((), vec![a], note))
    })?;

    w.stage("energy", |w| match (m, g) {
        (Some(m), Some(g)) => {
            let rows = energy_exponent_table(&sys, m, &config.delta_ladder, g, config.sweep_budget)?;
            let recs: Vec<ExponentRecord> = rows.iter().map(ExponentRecord::from).collect();
            let a = w.put(ArtifactKind::Energy, export::csv_bytes(&recs)?)?;
            let first = &config.delta_ladder[0];
            let report = energy_partition(&sys.scale_partition(first)?, m, n, g, config.sweep_budget)?;
            if !report.within_bound() {
                return Err(Error::Certification("energy report exceeds its bound".into()));
            }
            let b = w.put(ArtifactKind::EnergyReport, export::json_bytes(&report)?)?;
            Ok(((), vec![a, b], None))
        }
        _ => Ok(((), vec![], Some(format!("skipped: p = {p} is not an even integer")))),
    })?;

    w.stage("kernels", |w| {
        let (rows, fit) = kernel_scan(&dom, &config.kernel_deltas, config.alpha, config.kernel_max_side)?;
        let a = w.put(ArtifactKind::Kernel, export::csv_bytes(&rows)?)?;
        Ok(((), vec![a], Some(format!("fit a = {}, b = {}, residual = {}", fit.a, fit.b, fit.residual))))
    })?;

    w.stage("probes", |w| {
        let mut one = Vec::new();
        let mut two = Vec::new();
        let mut note = None;
        for level in 1..=config.probe_levels {
            let intervals = sys.level(level)?;
            let s = rng::derive_seed(seed, 100 + level as u64);
            let r1 = decoupling_probe_1d(&intervals, p, ProbeWindow::Whole, config.probe_trials, s)?;
            one.push(ProbeRow {
                level,
                q: p,
                trials: r1.trials,
                max_ratio: r1.max_ratio,
                ref_exponent: 0.5 * p * config.epsilon,
            });
            if note.is_some() {
                continue;
            }
            let r2 = match decoupling_probe_2d(&intervals, config.probe_q, config.probe_trials, s) {
                Err(e @ Error::Budget { .. }) if !two.is_empty() => {
                    note = Some(format!("2-d probe stops before level {level}: {e}"));
                    continue;
                }
                r => r?,
            };
            two.push(ProbeRow {
                level,
                q: config.probe_q,
                trials: r2.trials,
                max_ratio: r2.max_ratio,
                ref_exponent: 0.75 * p * config.epsilon,
            });
        }
        let a = w.put(ArtifactKind::Probe1d, export::csv_bytes(&one)?)?;
        let b = w.put(ArtifactKind::Probe2d, export::csv_bytes(&two)?)?;
        Ok(((), vec![a, b], note))
    })?;

    w.stage("regions", |w| {
        let mut list: Vec<Region> = regions::comparison(m.unwrap_or(2).max(2), config.epsilon)?.to_vec();
        list.push(Region::LambdaP { p, eps: config.epsilon });
        let mut recs = Vec::new();
        for r in &list {
            recs.extend(export::region_records(r)?);
        }
        let a = w.put(ArtifactKind::Regions, export::csv_bytes(&recs)?)?;
        Ok(((), vec![a], None))
    })?;

    w.manifest.complete = true;
    let manifest_sha256 = w.finish()?;
    Ok(RunSummary {
        output: dir.to_path_buf(),
        manifest: w.manifest,
        manifest_sha256,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infeasible_config_stops_at_build_p() {
        let dir = tempfile::tempdir().unwrap();
        let c = ExperimentConfig {
            n: 6,
            grid: None,
            output: dir.path().to_path_buf(),
            ..ExperimentConfig::default()
        };
        let err = run_experiment(&c).unwrap_err();
        assert!(matches!(&err, Error::Stage { stage: "build_p", source } if matches!(**source, Error::Infeasible { .. })));
        assert!(err.to_string().contains("N too small for p"));
        let m: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["stages"][0]["status"], "failed");
        assert_eq!(m["complete"], false);
    }
}
