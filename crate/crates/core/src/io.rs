//! Binary container formats: feature sets (`LEGF`) and subspace models
//! (`LGSM`). All integers and floats are little-endian.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::descriptor::FeatureVector;
use crate::error::{Error, Result};
use crate::subspace::{Method, SubspaceModel};

const FEATURE_MAGIC: &[u8; 4] = b"LEGF";
const MODEL_MAGIC: &[u8; 4] = b"LGSM";
const VERSION: u32 = 1;

/// Identified feature vectors. Ids conventionally read `subject,path`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub ids: Vec<String>,
    pub vectors: Vec<FeatureVector>,
}

impl FeatureSet {
    pub fn new(ids: Vec<String>, vectors: Vec<FeatureVector>) -> Result<Self> {
        if ids.len() != vectors.len() {
            return Err(Error::dims(format!("{} ids", vectors.len()), ids.len()));
        }
        if let Some(first) = vectors.first() {
            if let Some(bad) = vectors.iter().find(|v| v.dim() != first.dim()) {
                return Err(Error::dims(first.dim(), bad.dim()));
            }
        }
        if let Some(bad) = ids.iter().find(|id| id.contains('\n')) {
            return Err(Error::InvalidData(format!("sample id {bad:?} contains a newline")));
        }
        Ok(Self { ids, vectors })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, FeatureVector::dim)
    }
}

/// Joins a subject label and a sample path into a feature id.
pub fn sample_id(subject: &str, path: &str) -> String {
    format!("{subject},{path}")
}

/// Splits a feature id at its first comma into `(subject, path)`.
pub fn split_sample_id(id: &str) -> Result<(&str, &str)> {
    id.split_once(',')
        .ok_or_else(|| Error::InvalidData(format!("sample id {id:?} lacks a subject prefix")))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::MalformedPayload(format!("{}: truncated at byte {}", self.what, self.pos))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn expect_header(&mut self, magic: &[u8; 4]) -> Result<()> {
        if self.take(4)? != magic {
            return Err(Error::MalformedPayload(format!("{}: bad magic", self.what)));
        }
        let v = self.u32()?;
        if v != VERSION {
            return Err(Error::MalformedPayload(format!("{}: unsupported version {v}", self.what)));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::MalformedPayload(format!(
                "{}: {} trailing bytes",
                self.what,
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn u32_of(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::InvalidData(format!("{what} {n} exceeds the u32 range")))
}

/// Serializes a feature set. Values are stored as `f32`.
pub fn encode_features(set: &FeatureSet) -> Result<Vec<u8>> {
    let dim = set.dim();
    let mut out = Vec::with_capacity(16 + set.len() * dim * 4);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&u32_of(set.len(), "count")?.to_le_bytes());
    out.extend_from_slice(&u32_of(dim, "dim")?.to_le_bytes());
    for v in &set.vectors {
        for &x in v.values() {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    for id in &set.ids {
        out.extend_from_slice(id.as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}

pub fn decode_features(bytes: &[u8]) -> Result<FeatureSet> {
    let mut c = Cursor {
        bytes,
        pos: 0,
        what: "feature file",
    };
    c.expect_header(FEATURE_MAGIC)?;
    let count = c.u32()? as usize;
    let dim = c.u32()? as usize;
    let values = count
        .checked_mul(dim)
        .filter(|&n| n.saturating_mul(4) <= bytes.len())
        .ok_or_else(|| Error::MalformedPayload("feature file: header sizes exceed payload".into()))?;
    let mut vectors = Vec::with_capacity(count);
    for _ in 0..count {
        let v = (0..dim).map(|_| c.f32().map(f64::from)).collect::<Result<Vec<_>>>()?;
        vectors.push(FeatureVector(v));
    }
    debug_assert_eq!(vectors.len() * dim, values);
    let tail = std::str::from_utf8(c.take(bytes.len() - c.pos)?)
        .map_err(|_| Error::MalformedPayload("feature file: ids are not UTF-8".into()))?;
    let ids: Vec<String> = if count == 0 {
        if !tail.is_empty() {
            return Err(Error::MalformedPayload("feature file: ids present for zero samples".into()));
        }
        Vec::new()
    } else {
        let body = tail
            .strip_suffix('\n')
            .ok_or_else(|| Error::MalformedPayload("feature file: last id is not newline-terminated".into()))?;
        body.split('\n').map(str::to_string).collect()
    };
    if ids.len() != count {
        return Err(Error::MalformedPayload(format!(
            "feature file: {} ids for {count} samples",
            ids.len()
        )));
    }
    FeatureSet::new(ids, vectors)
}

pub fn write_features(path: &Path, set: &FeatureSet) -> Result<()> {
    write_file(path, &encode_features(set)?)
}

pub fn read_features(path: &Path) -> Result<FeatureSet> {
    decode_features(&read_file(path)?)
}

fn hyper_record(hp: &BTreeMap<String, String>) -> Result<Vec<u8>> {
    let mut s = String::new();
    for (k, v) in hp {
        if k.contains(['=', '\n']) || v.contains('\n') {
            return Err(Error::InvalidData(format!("hyperparameter {k:?} cannot be serialized")));
        }
        s.push_str(k);
        s.push('=');
        s.push_str(v);
        s.push('\n');
    }
    Ok(s.into_bytes())
}

fn parse_hyper_record(bytes: &[u8]) -> Result<BTreeMap<String, String>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::MalformedPayload("model file: hyperparameters are not UTF-8".into()))?;
    text.lines()
        .map(|line| {
            line.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::MalformedPayload(format!("model file: bad hyperparameter line {line:?}")))
        })
        .collect()
}

pub fn encode_model(model: &SubspaceModel) -> Result<Vec<u8>> {
    let (d, big_d) = model.projection.shape();
    if model.mean.len() != big_d {
        return Err(Error::dims(big_d, model.mean.len()));
    }
    let mut out = Vec::with_capacity(17 + 8 * big_d * (d + 1));
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(model.method.tag());
    out.extend_from_slice(&u32_of(big_d, "input dim")?.to_le_bytes());
    out.extend_from_slice(&u32_of(d, "output dim")?.to_le_bytes());
    for &m in model.mean.iter() {
        out.extend_from_slice(&m.to_le_bytes());
    }
    for r in 0..d {
        for c in 0..big_d {
            out.extend_from_slice(&model.projection[(r, c)].to_le_bytes());
        }
    }
    let record = hyper_record(&model.hyperparams)?;
    out.extend_from_slice(&u32_of(record.len(), "hyperparameter record")?.to_le_bytes());
    out.extend_from_slice(&record);
    Ok(out)
}

pub fn decode_model(bytes: &[u8]) -> Result<SubspaceModel> {
    let mut c = Cursor {
        bytes,
        pos: 0,
        what: "model file",
    };
    c.expect_header(MODEL_MAGIC)?;
    let tag = c.u8()?;
    let method = Method::from_tag(tag)
        .ok_or_else(|| Error::MalformedPayload(format!("model file: unknown method tag {tag}")))?;
    let big_d = c.u32()? as usize;
    let d = c.u32()? as usize;
    let floats = big_d
        .checked_mul(d + 1)
        .filter(|&n| n.saturating_mul(8) <= bytes.len())
        .ok_or_else(|| Error::MalformedPayload("model file: header sizes exceed payload".into()))?;
    let mean = (0..big_d).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let proj = (0..floats - big_d).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let len = c.u32()? as usize;
    let hyperparams = parse_hyper_record(c.take(len)?)?;
    c.finish()?;
    if d == 0 || big_d == 0 {
        return Err(Error::MalformedPayload("model file: empty projection".into()));
    }
    Ok(SubspaceModel {
        method,
        mean: DVector::from_vec(mean),
        projection: DMatrix::from_row_slice(d, big_d, &proj),
        hyperparams,
    })
}

pub fn write_model(path: &Path, model: &SubspaceModel) -> Result<()> {
    write_file(path, &encode_model(model)?)
}

pub fn read_model(path: &Path) -> Result<SubspaceModel> {
    decode_model(&read_file(path)?)
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut out))
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(out)
}
