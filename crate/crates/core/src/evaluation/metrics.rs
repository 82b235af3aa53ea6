//! Identification (CMC) and verification (ROC, EER, VR@FAR) metrics.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::recognition::Match;

/// One operating point. FAR counts impostor scores `≥ threshold`, FRR
/// counts genuine scores `< threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    #[serde(serialize_with = "serialize_threshold")]
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// Infinite sentinels are written as the strings `"-inf"` / `"inf"`.
fn serialize_threshold<S: Serializer>(t: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if t.is_finite() {
        s.serialize_f64(*t)
    } else if *t > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn sorted_finite(pool: &[f64], name: &str) -> Result<Vec<f64>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if pool.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidData(format!("{name} pool contains NaN")));
    }
    let mut v = pool.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Operating points at every distinct score plus the `±∞` sentinels,
/// ascending by threshold.
pub fn roc(genuine: &[f64], impostor: &[f64]) -> Result<Vec<RocPoint>> {
    let g = sorted_finite(genuine, "genuine")?;
    let i = sorted_finite(impostor, "impostor")?;
    let mut thresholds: Vec<f64> = g.iter().chain(&i).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let (ng, ni) = (g.len() as f64, i.len() as f64);
    let point = |t: f64| RocPoint {
        threshold: t,
        far: (i.len() - i.partition_point(|&s| s < t)) as f64 / ni,
        frr: g.partition_point(|&s| s < t) as f64 / ng,
    };
    let mut out = Vec::with_capacity(thresholds.len() + 2);
    out.push(point(f64::NEG_INFINITY));
    out.extend(thresholds.into_iter().filter(|t| t.is_finite()).map(point));
    out.push(point(f64::INFINITY));
    Ok(out)
}

/// Equal error rate: FAR where `far − frr` changes sign, linearly
/// interpolated between the two bracketing points.
pub fn eer(roc: &[RocPoint]) -> f64 {
    let Some(first) = roc.first() else {
        return 0.0;
    };
    let mut prev = first;
    let d0 = prev.far - prev.frr;
    if d0 <= 0.0 {
        return prev.far;
    }
    for p in &roc[1..] {
        let d = p.far - p.frr;
        if d == 0.0 {
            return p.far;
        }
        if d < 0.0 {
            let dp = prev.far - prev.frr;
            let t = dp / (dp - d);
            return prev.far + t * (p.far - prev.far);
        }
        prev = p;
    }
    prev.far
}

/// Verification rate `1 − FRR` at the lowest threshold whose FAR does not
/// exceed `far_target` (step function, no interpolation).
pub fn vr_at_far(roc: &[RocPoint], far_target: f64) -> f64 {
    roc.iter()
        .find(|p| p.far <= far_target)
        .map_or(0.0, |p| 1.0 - p.frr)
}

/// Rank (1-based) of `truth` among the distinct subjects of `ranked`, in
/// order of their best-ranked sample.
pub fn identity_rank(ranked: &[Match], truth: &str) -> Option<usize> {
    let mut seen: Vec<&str> = Vec::new();
    for m in ranked {
        if !seen.contains(&m.subject.as_str()) {
            seen.push(&m.subject);
            if m.subject == truth {
                return Some(seen.len());
            }
        }
    }
    None
}

/// Cumulative match curve: entry `r − 1` is the fraction of probes whose
/// true identity is ranked at or above `r`. The curve spans the largest
/// number of distinct identities in any ranking.
pub fn cmc(ranked: &[Vec<Match>], truth: &[String]) -> Result<Vec<f64>> {
    if ranked.len() != truth.len() {
        return Err(Error::dims(ranked.len(), truth.len()));
    }
    if ranked.is_empty() {
        return Ok(Vec::new());
    }
    let depth = ranked
        .iter()
        .map(|r| {
            let mut s: Vec<&str> = r.iter().map(|m| m.subject.as_str()).collect();
            s.sort_unstable();
            s.dedup();
            s.len()
        })
        .max()
        .unwrap_or(0);
    let mut hits = vec![0usize; depth];
    for (r, t) in ranked.iter().zip(truth) {
        if let Some(k) = identity_rank(r, t) {
            hits[k - 1] += 1;
        }
    }
    let n = ranked.len() as f64;
    let mut acc = 0;
    Ok(hits
        .into_iter()
        .map(|h| {
            acc += h;
            acc as f64 / n
        })
        .collect())
}
