//! Dataset manifests: UTF-8 CSV with header `path,subject,role`. Paths are
//! relative to the manifest's directory unless absolute; commas in any
//! field are rejected (no quoting).

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Gallery,
    Probe,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Train => "train",
            Role::Gallery => "gallery",
            Role::Probe => "probe",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Role::Train),
            "gallery" => Ok(Role::Gallery),
            "probe" => Ok(Role::Probe),
            other => Err(format!("expected train|gallery|probe, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    /// Path as written in the manifest.
    pub path: String,
    pub subject: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub rows: Vec<ManifestRow>,
    /// Directory against which relative paths resolve.
    pub base_dir: PathBuf,
}

pub const HEADER: &str = "path,subject,role";

impl DatasetManifest {
    pub fn parse(text: &str, base_dir: &Path, origin: &str) -> Result<Self> {
        let at = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == HEADER => {}
            Some((_, h)) => return Err(at(1, format!("expected header {HEADER:?}, got {h:?}"))),
            None => return Err(at(1, "empty manifest".into())),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(at(
                    i + 1,
                    format!("expected 3 fields, got {} (commas in paths are not supported)", fields.len()),
                ));
            }
            let (path, subject) = (fields[0].trim(), fields[1].trim());
            if path.is_empty() || subject.is_empty() {
                return Err(at(i + 1, "path and subject must be non-empty".into()));
            }
            let role = fields[2].trim().parse::<Role>().map_err(|e| at(i + 1, e))?;
            rows.push(ManifestRow {
                path: path.to_string(),
                subject: subject.to_string(),
                role,
            });
        }
        let m = Self {
            rows,
            base_dir: base_dir.to_path_buf(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = crate::io::read_file(path)?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            msg: "manifest is not UTF-8".into(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.path, r.subject, r.role));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::io::write_file(path, self.to_csv().as_bytes())
    }

    /// Closed-set checks: every role present, every probe subject enrolled,
    /// no row repeated within a role.
    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            if r.path.contains(',') || r.subject.contains(',') {
                return Err(Error::InvalidData(format!("comma in manifest row {:?}", r.path)));
            }
        }
        for role in [Role::Train, Role::Gallery, Role::Probe] {
            if !self.rows.iter().any(|r| r.role == role) {
                return Err(Error::InvalidData(format!("manifest has no {role} rows")));
            }
        }
        let enrolled: HashSet<&str> = self.with_role(Role::Gallery).map(|r| r.subject.as_str()).collect();
        if let Some(r) = self.with_role(Role::Probe).find(|r| !enrolled.contains(r.subject.as_str())) {
            return Err(Error::InvalidData(format!(
                "probe subject {:?} has no gallery rows (closed-set protocol)",
                r.subject
            )));
        }
        let mut seen = HashSet::new();
        for r in &self.rows {
            if !seen.insert((r.role, r.path.as_str())) {
                return Err(Error::InvalidData(format!("{} row {:?} listed twice", r.role, r.path)));
            }
        }
        Ok(())
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &ManifestRow> {
        self.rows.iter().filter(move |r| r.role == role)
    }

    pub fn resolve(&self, row: &ManifestRow) -> PathBuf {
        let p = Path::new(&row.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn count(&self, role: Role) -> usize {
        self.with_role(role).count()
    }

    pub fn subjects(&self) -> usize {
        self.rows.iter().map(|r| r.subject.as_str()).collect::<HashSet<_>>().len()
    }
}
