//! Protocol runner and biometric metrics over manifest-described splits.

pub mod manifest;
pub mod metrics;
pub mod synth;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::descriptor::{Extractor, FeatureVector};
use crate::error::{Error, Result};
use crate::imaging::read_image;
use crate::recognition::{identify, verify_scores, Gallery, GalleryEntry, Metric};
use crate::subspace::{self, LabeledData, SubspaceModel};

pub use manifest::{DatasetManifest, ManifestRow, Role};
pub use metrics::{cmc, eer, identity_rank, roc, vr_at_far, RocPoint};
pub use synth::{synth_dataset, synth_images};

/// FAR operating points reported as verification rates.
pub const REPORT_FARS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub n_train: usize,
    pub n_gallery: usize,
    pub n_probe: usize,
    pub n_subjects: usize,
    pub n_genuine: usize,
    pub n_impostor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub method: String,
    pub metric: Metric,
    pub feature_dim: usize,
    pub model_dim: usize,
    pub counts: Counts,
    pub rank1: f64,
    pub eer: f64,
    /// Keyed by the FAR target as written in [`REPORT_FARS`].
    pub vr_at: BTreeMap<String, f64>,
    /// Entry `r − 1` is the identification rate at rank `r`.
    pub cmc: Vec<f64>,
    pub roc: Vec<RocPoint>,
    /// Resolved configuration, key by key.
    pub config: BTreeMap<String, String>,
}

impl EvalReport {
    /// Pretty JSON with a fixed key order and trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidData(format!("report serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// `rank,rate` rows.
    pub fn cmc_csv(&self) -> String {
        let mut out = String::from("rank,rate\n");
        for (i, r) in self.cmc.iter().enumerate() {
            out.push_str(&format!("{},{r}\n", i + 1));
        }
        out
    }

    /// `far,vr` rows in ascending threshold order.
    pub fn roc_csv(&self) -> String {
        let mut out = String::from("far,vr\n");
        for p in &self.roc {
            out.push_str(&format!("{},{}\n", p.far, 1.0 - p.frr));
        }
        out
    }
}

/// Runs `f` on a pool of `jobs` threads, or the global pool when `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Reads and extracts every path in parallel; output order matches input.
pub fn extract_paths(extractor: &Extractor, paths: &[PathBuf]) -> Result<Vec<FeatureVector>> {
    paths
        .par_iter()
        .map(|p| extractor.extract(&read_image(p)?))
        .collect()
}

fn identity_key(p: &Path) -> PathBuf {
    std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Fails if any probe file is also a training file.
pub fn check_separation(manifest: &DatasetManifest) -> Result<()> {
    let train: HashSet<PathBuf> = manifest
        .with_role(Role::Train)
        .map(|r| identity_key(&manifest.resolve(r)))
        .collect();
    if let Some(r) = manifest
        .with_role(Role::Probe)
        .find(|r| train.contains(&identity_key(&manifest.resolve(r))))
    {
        return Err(Error::ProtocolViolation(format!(
            "probe {:?} is also a training sample",
            r.path
        )));
    }
    Ok(())
}

/// Fits the configured subspace on training rows only.
fn fit_on_train(train: Vec<(FeatureVector, String)>, cfg: &PipelineConfig) -> Result<SubspaceModel> {
    let (samples, labels) = train.into_iter().unzip();
    let data = LabeledData::new(samples, labels)?;
    subspace::fit(&data, &cfg.subspace)
}

/// Extracts features for all rows, fits on `train`, enrolls `gallery`,
/// and scores `probe` rows for identification and verification.
pub fn run_protocol(manifest: &DatasetManifest, cfg: &PipelineConfig, jobs: Option<usize>) -> Result<EvalReport> {
    cfg.validate()?;
    manifest.validate()?;
    check_separation(manifest)?;

    let extractor = Extractor::new(cfg.descriptor)?;
    let mut unique: Vec<PathBuf> = Vec::new();
    let mut index: HashMap<PathBuf, usize> = HashMap::new();
    for r in &manifest.rows {
        let p = manifest.resolve(r);
        if !index.contains_key(&p) {
            index.insert(p.clone(), unique.len());
            unique.push(p);
        }
    }
    info!("extracting {} images", unique.len());
    let features = with_jobs(jobs, || extract_paths(&extractor, &unique))??;
    let feature_of = |r: &ManifestRow| &features[index[&manifest.resolve(r)]];

    let train: Vec<(FeatureVector, String)> = manifest
        .with_role(Role::Train)
        .map(|r| (feature_of(r).clone(), r.subject.clone()))
        .collect();
    let model = fit_on_train(train, cfg)?;
    info!(
        "fitted {} ({} -> {} dims)",
        model.method,
        model.input_dim(),
        model.output_dim()
    );

    let gallery = Gallery::new(
        manifest
            .with_role(Role::Gallery)
            .map(|r| {
                Ok(GalleryEntry {
                    id: r.path.clone(),
                    subject: r.subject.clone(),
                    vector: model.project(feature_of(r).values())?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    let probes: Vec<(Vec<f64>, String)> = manifest
        .with_role(Role::Probe)
        .map(|r| Ok((model.project(feature_of(r).values())?, r.subject.clone())))
        .collect::<Result<_>>()?;

    let metric = cfg.metric;
    let ranked = probes
        .iter()
        .map(|(v, _)| identify(&gallery, v, metric, gallery.len()))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<String> = probes.iter().map(|(_, s)| s.clone()).collect();
    let cmc_curve = cmc(&ranked, &truth)?;
    let pools = verify_scores(&gallery, &probes, metric)?;
    let roc_points = if pools.impostor.is_empty() {
        return Err(Error::InvalidData(
            "verification needs at least two gallery identities".into(),
        ));
    } else {
        roc(&pools.genuine, &pools.impostor)?
    };
    let eer_value = eer(&roc_points);
    if eer_value > 0.5 {
        warn!("EER {eer_value:.4} exceeds 0.5; scores look inverted");
    }
    let vr_at = REPORT_FARS
        .iter()
        .map(|&f| (f.to_string(), vr_at_far(&roc_points, f)))
        .collect();

    Ok(EvalReport {
        method: model.method.to_string(),
        metric,
        feature_dim: model.input_dim(),
        model_dim: model.output_dim(),
        counts: Counts {
            n_train: manifest.count(Role::Train),
            n_gallery: manifest.count(Role::Gallery),
            n_probe: manifest.count(Role::Probe),
            n_subjects: manifest.subjects(),
            n_genuine: pools.genuine.len(),
            n_impostor: pools.impostor.len(),
        },
        rank1: cmc_curve.first().copied().unwrap_or(0.0),
        eer: eer_value,
        vr_at,
        cmc: cmc_curve,
        roc: roc_points,
        config: cfg
            .entries()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    })
}
