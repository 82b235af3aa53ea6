//! Gallery storage and nearest-neighbour identification / verification over
//! projected features.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use log::info;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Cosine,
    Euclid,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Cosine => "cosine",
            Metric::Euclid => "euclid",
        })
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cosine" => Ok(Metric::Cosine),
            "euclid" => Ok(Metric::Euclid),
            other => Err(format!("expected cosine|euclid, got {other:?}")),
        }
    }
}

/// Similarity oriented so that larger means more alike.
pub fn similarity(a: &[f64], b: &[f64], metric: Metric) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::dims(a.len(), b.len()));
    }
    Ok(match metric {
        Metric::Euclid => -a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        Metric::Cosine => {
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                0.0
            } else {
                a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryEntry {
    pub id: String,
    pub subject: String,
    pub vector: Vec<f64>,
}

/// Enrolled projected templates.
#[derive(Debug, Clone)]
pub struct Gallery {
    entries: Vec<GalleryEntry>,
    dim: usize,
}

impl Gallery {
    pub fn new(entries: Vec<GalleryEntry>) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptyGallery)?;
        let dim = first.vector.len();
        let mut ids = HashSet::new();
        for e in &entries {
            if e.vector.len() != dim {
                return Err(Error::dims(dim, e.vector.len()));
            }
            if !ids.insert(e.id.as_str()) {
                return Err(Error::InvalidData(format!("duplicate gallery id {:?}", e.id)));
            }
        }
        Ok(Self { entries, dim })
    }

    pub fn entries(&self) -> &[GalleryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Distinct subjects in first-enrolment order.
    pub fn subjects(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.subject.as_str()))
            .map(|e| e.subject.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Match {
    pub subject: String,
    pub id: String,
    pub score: f64,
}

fn by_score_then_id(a: &Match, b: &Match) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id))
}

/// Top-`k` gallery entries by descending score; ties go to the smaller id.
pub fn identify(g: &Gallery, probe: &[f64], metric: Metric, k: usize) -> Result<Vec<Match>> {
    if g.is_empty() {
        return Err(Error::EmptyGallery);
    }
    if k > g.len() {
        return Err(Error::InvalidParams(format!("top {k} requested from a gallery of {}", g.len())));
    }
    let mut all = g
        .entries
        .iter()
        .map(|e| {
            Ok(Match {
                subject: e.subject.clone(),
                id: e.id.clone(),
                score: similarity(&e.vector, probe, metric)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    all.sort_by(by_score_then_id);
    all.truncate(k);
    Ok(all)
}

/// Best score per subject for one probe.
fn best_per_subject<'g>(g: &'g Gallery, probe: &[f64], metric: Metric) -> Result<BTreeMap<&'g str, f64>> {
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for e in &g.entries {
        let s = similarity(&e.vector, probe, metric)?;
        best.entry(&e.subject)
            .and_modify(|b| *b = b.max(s))
            .or_insert(s);
    }
    Ok(best)
}

/// Genuine and impostor score pools.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScorePools {
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
}

/// Scores probes that claim an identity. The claimed identity's best score
/// is a genuine attempt; the best score against every other enrolled
/// identity is an impostor attempt.
pub fn verify_scores(g: &Gallery, probes: &[(Vec<f64>, String)], metric: Metric) -> Result<ScorePools> {
    if g.is_empty() {
        return Err(Error::EmptyGallery);
    }
    if probes.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut pools = ScorePools::default();
    for (vector, claim) in probes {
        let best = best_per_subject(g, vector, metric)?;
        if !best.contains_key(claim.as_str()) {
            return Err(Error::UnknownClaimedLabel(claim.clone()));
        }
        for subject in g.subjects() {
            let s = best[subject];
            if subject == claim {
                pools.genuine.push(s);
            } else {
                pools.impostor.push(s);
            }
        }
    }
    info!(
        "verification pools: {} genuine, {} impostor",
        pools.genuine.len(),
        pools.impostor.len()
    );
    Ok(pools)
}
