//! CSV and JSON artifact schemas.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::domain::DimensionRow;
use crate::energy::ExponentRow;
use crate::error::{Error, Result};
use crate::regions::Region;

/// `delta,caps,ratio,envelope`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionRecord {
    pub delta: f64,
    pub caps: usize,
    pub ratio: f64,
    pub envelope: f64,
}

impl From<&DimensionRow> for DimensionRecord {
    fn from(r: &DimensionRow) -> Self {
        DimensionRecord {
            delta: r.delta,
            caps: r.caps,
            ratio: r.ratio,
            envelope: r.envelope,
        }
    }
}

/// `delta,K,xi_upper,paper_bound,ratio`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRecord {
    pub delta: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub xi_upper: u128,
    #[serde(rename = "paper_bound")]
    pub bound: u128,
    pub ratio: f64,
}

impl From<&ExponentRow> for ExponentRecord {
    fn from(r: &ExponentRow) -> Self {
        ExponentRecord {
            delta: r.delta,
            k: r.k,
            xi_upper: r.xi_upper,
            bound: r.bound,
            ratio: r.ratio,
        }
    }
}

/// `theorem,param,kappa,eps,inv_q,alpha`; param is m for the integer
/// families, p for the Λ(p) family and empty otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub theorem: String,
    pub param: Option<f64>,
    pub kappa: f64,
    pub eps: f64,
    pub inv_q: f64,
    pub alpha: f64,
}

pub fn region_records(region: &Region) -> Result<Vec<RegionRecord>> {
    let (param, eps) = match *region {
        Region::SeegerZiesler { .. } => (None, 0.0),
        Region::Cladek { m, .. } => (Some(m as f64), 0.0),
        Region::Main { m, eps, .. } => (Some(m as f64), eps),
        Region::LambdaP { p, eps } => (Some(p), eps),
    };
    Ok(crate::regions::polyline(region)?
        .into_iter()
        .map(|(x, a)| RegionRecord {
            theorem: region.name().into(),
            param,
            kappa: region.kappa(),
            eps,
            inv_q: x,
            alpha: a,
        })
        .collect())
}

/// Writes rows with a header line; an empty table is an error.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    fs::write(path, csv_bytes(rows)?)?;
    Ok(())
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::invalid("refusing to export an empty table"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.display().to_string()));
    }
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, json_bytes(value)?)?;
    Ok(())
}

/// Artifact kinds a finished run can export.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArtifactKind {
    Points,
    Seed,
    Domain,
    Caps,
    Dimension,
    Energy,
    EnergyReport,
    Kernel,
    Probe1d,
    Probe2d,
    Regions,
    Manifest,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 12] = [
        ArtifactKind::Points,
        ArtifactKind::Seed,
        ArtifactKind::Domain,
        ArtifactKind::Caps,
        ArtifactKind::Dimension,
        ArtifactKind::Energy,
        ArtifactKind::EnergyReport,
        ArtifactKind::Kernel,
        ArtifactKind::Probe1d,
        ArtifactKind::Probe2d,
        ArtifactKind::Regions,
        ArtifactKind::Manifest,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            ArtifactKind::Points => "points.json",
            ArtifactKind::Seed => "seed.json",
            ArtifactKind::Domain => "domain.json",
            ArtifactKind::Caps => "caps.json",
            ArtifactKind::Dimension => "dimension.csv",
            ArtifactKind::Energy => "energy_table.csv",
            ArtifactKind::EnergyReport => "energy_report.json",
            ArtifactKind::Kernel => "kernel_scan.csv",
            ArtifactKind::Probe1d => "probe1d.csv",
            ArtifactKind::Probe2d => "probe2d.csv",
            ArtifactKind::Regions => "regions.csv",
            ArtifactKind::Manifest => "manifest.json",
        }
    }

    pub fn name(self) -> &'static str {
        self.file_name().split('.').next().unwrap()
    }
}

impl std::str::FromStr for ArtifactKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ArtifactKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown artifact kind {s:?}")))
    }
}

fn check_csv<T: DeserializeOwned>(path: &Path) -> Result<usize> {
    let rows: Vec<T> = read_csv(path)?;
    if rows.is_empty() {
        return Err(Error::invalid(format!("{} has no rows", path.display())));
    }
    Ok(rows.len())
}

/// Copies one artifact out of a run directory after checking it parses
/// under its schema.
pub fn export(kind: ArtifactKind, run_dir: &Path, dest: &Path) -> Result<()> {
    let src = run_dir.join(kind.file_name());
    if !src.exists() {
        return Err(Error::MissingArtifact(src.display().to_string()));
    }
    match kind {
        ArtifactKind::Dimension => check_csv::<DimensionRecord>(&src).map(drop)?,
        ArtifactKind::Energy => check_csv::<ExponentRecord>(&src).map(drop)?,
        ArtifactKind::Kernel => check_csv::<crate::fourier::kernel::KernelScanRow>(&src).map(drop)?,
        ArtifactKind::Probe1d | ArtifactKind::Probe2d => check_csv::<crate::fourier::probe::ProbeRow>(&src).map(drop)?,
        ArtifactKind::Regions => check_csv::<RegionRecord>(&src).map(drop)?,
        _ => {
            serde_json::from_slice::<serde_json::Value>(&fs::read(&src)?)?;
        }
    }
    fs::copy(&src, dest)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::kernel::KernelScanRow;
    use crate::regions::comparison;

    #[test]
    fn empty_table_rejected() {
        let rows: Vec<DimensionRecord> = vec![];
        assert!(csv_bytes(&rows).is_err());
    }

    #[test]
    fn headers() {
        let d = DimensionRecord { delta: 0.5, caps: 3, ratio: 0.1, envelope: 2.0 };
        let s = String::from_utf8(csv_bytes(&[d]).unwrap()).unwrap();
        assert!(s.starts_with("delta,caps,ratio,envelope\n"));
        let e = ExponentRecord { delta: 0.5, k: 1, xi_upper: u128::MAX, bound: 3, ratio: 0.25 };
        let s = String::from_utf8(csv_bytes(&[e]).unwrap()).unwrap();
        assert!(s.starts_with("delta,K,xi_upper,paper_bound,ratio\n"));
        let k = KernelScanRow {
            delta: 0.125,
            alpha: 0.3,
            j_id: "whole".into(),
            l1: 1.0,
            tail_share: 0.0,
            fit_a: 0.0,
            fit_b: 0.0,
            residual: 0.0,
        };
        let s = String::from_utf8(csv_bytes(&[k]).unwrap()).unwrap();
        assert!(s.starts_with("delta,alpha,J_id,l1,tail_share,fit_a,fit_b,residual\n"));
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<RegionRecord> = comparison(3, 0.01)
            .unwrap()
            .iter()
            .flat_map(|r| region_records(r).unwrap())
            .collect();
        let path = dir.path().join("regions.csv");
        write_csv(&path, &rows).unwrap();
        assert_eq!(read_csv::<RegionRecord>(&path).unwrap(), rows);
        let out = dir.path().join("copy.csv");
        export(ArtifactKind::Regions, dir.path(), &out).unwrap();
        assert!(matches!(export(ArtifactKind::Kernel, dir.path(), &out), Err(Error::MissingArtifact(_))));
        assert_eq!("energy_report".parse::<ArtifactKind>().unwrap(), ArtifactKind::EnergyReport);
    }
}
