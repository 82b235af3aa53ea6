//! Pipeline configuration: a flat `key = value` file with dotted section
//! prefixes. Absent keys take their defaults; unknown keys are rejected.
//!
//! ```text
//! # comments start with '#'
//! gabor.l_max = 0.25
//! subspace.method = slpp_lge
//! ```

use std::path::Path;

use log::info;

use crate::descriptor::{DescriptorParams, DownsampleMode};
use crate::error::{Error, Result};
use crate::imaging::Illumination;
use crate::recognition::Metric;
use crate::subspace::{FitOptions, Heat, Method};

/// Every tunable of extraction, fitting and matching.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PipelineConfig {
    pub descriptor: DescriptorParams,
    pub subspace: FitOptions,
    pub metric: Metric,
}

/// Recognized keys in canonical (echo) order.
pub const KEYS: [&str; 23] = [
    "imaging.illum",
    "imaging.width",
    "imaging.height",
    "pisp.sigma1",
    "pisp.sigma2",
    "pisp.size1",
    "pisp.size2",
    "gabor.sigma",
    "gabor.l_max",
    "gabor.s_f",
    "gabor.scales",
    "gabor.orients",
    "descriptor.p",
    "descriptor.downsample",
    "descriptor.normalize",
    "subspace.method",
    "subspace.dims",
    "subspace.knn_k",
    "subspace.alpha",
    "subspace.epsilon",
    "subspace.heat_t",
    "subspace.pca_variance",
    "recognition.metric",
];

fn parse_value<T: std::str::FromStr>(raw: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| format!("cannot parse {raw:?}: {e}"))
}

fn parse_bool(raw: &str) -> std::result::Result<bool, String> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true|false, got {raw:?}")),
    }
}

impl PipelineConfig {
    /// Assigns one key. The error is a bare message; callers attach location.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let d = &mut self.descriptor;
        let s = &mut self.subspace;
        let outcome: std::result::Result<(), String> = (|| {
            match key {
                "imaging.illum" => d.illumination = parse_value::<Illumination>(raw)?,
                "imaging.width" => d.gabor.grid_w = parse_value(raw)?,
                "imaging.height" => d.gabor.grid_h = parse_value(raw)?,
                "pisp.sigma1" => d.pisp.sigma1 = parse_value(raw)?,
                "pisp.sigma2" => d.pisp.sigma2 = parse_value(raw)?,
                "pisp.size1" => d.pisp.size1 = parse_value(raw)?,
                "pisp.size2" => d.pisp.size2 = parse_value(raw)?,
                "gabor.sigma" => d.gabor.sigma = parse_value(raw)?,
                "gabor.l_max" => d.gabor.l_max = parse_value(raw)?,
                "gabor.s_f" => d.gabor.s_f = parse_value(raw)?,
                "gabor.scales" => d.gabor.n_scales = parse_value(raw)?,
                "gabor.orients" => d.gabor.n_orients = parse_value(raw)?,
                "descriptor.p" => d.downsample_factor = parse_value(raw)?,
                "descriptor.downsample" => d.downsample_mode = parse_value::<DownsampleMode>(raw)?,
                "descriptor.normalize" => d.normalize = parse_bool(raw)?,
                "subspace.method" => s.method = parse_value::<Method>(raw)?,
                "subspace.dims" => {
                    s.dims = if raw == "auto" { None } else { Some(parse_value(raw)?) }
                }
                "subspace.knn_k" => s.knn_k = parse_value(raw)?,
                "subspace.alpha" => s.alpha = parse_value(raw)?,
                "subspace.epsilon" => s.epsilon = parse_value(raw)?,
                "subspace.heat_t" => s.heat = parse_value::<Heat>(raw)?,
                "subspace.pca_variance" => s.pca_variance = parse_value(raw)?,
                "recognition.metric" => self.metric = parse_value::<Metric>(raw)?,
                _ => return Err(String::new()),
            }
            Ok(())
        })();
        match outcome {
            Ok(()) => Ok(()),
            Err(msg) if msg.is_empty() => Err(Error::UnknownKey(key.to_string())),
            Err(msg) => Err(Error::InvariantViolation {
                field: key.to_string(),
                msg,
            }),
        }
    }

    /// Current value of `key` in the textual form `set` accepts.
    pub fn get(&self, key: &str) -> Result<String> {
        let d = &self.descriptor;
        let s = &self.subspace;
        Ok(match key {
            "imaging.illum" => d.illumination.to_string(),
            "imaging.width" => d.gabor.grid_w.to_string(),
            "imaging.height" => d.gabor.grid_h.to_string(),
            "pisp.sigma1" => d.pisp.sigma1.to_string(),
            "pisp.sigma2" => d.pisp.sigma2.to_string(),
            "pisp.size1" => d.pisp.size1.to_string(),
            "pisp.size2" => d.pisp.size2.to_string(),
            "gabor.sigma" => d.gabor.sigma.to_string(),
            "gabor.l_max" => d.gabor.l_max.to_string(),
            "gabor.s_f" => d.gabor.s_f.to_string(),
            "gabor.scales" => d.gabor.n_scales.to_string(),
            "gabor.orients" => d.gabor.n_orients.to_string(),
            "descriptor.p" => d.downsample_factor.to_string(),
            "descriptor.downsample" => d.downsample_mode.to_string(),
            "descriptor.normalize" => d.normalize.to_string(),
            "subspace.method" => s.method.to_string(),
            "subspace.dims" => s.dims.map_or_else(|| "auto".to_string(), |v| v.to_string()),
            "subspace.knn_k" => s.knn_k.to_string(),
            "subspace.alpha" => s.alpha.to_string(),
            "subspace.epsilon" => s.epsilon.to_string(),
            "subspace.heat_t" => s.heat.to_string(),
            "subspace.pca_variance" => s.pca_variance.to_string(),
            "recognition.metric" => self.metric.to_string(),
            other => return Err(Error::UnknownKey(other.to_string())),
        })
    }

    /// `(key, value)` for every key in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|&k| (k, self.get(k).expect("canonical key")))
            .collect()
    }

    /// Full resolved configuration in the file format; parsing it back
    /// yields an identical config.
    pub fn echo(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.descriptor.validate()?;
        self.subspace.validate()
    }

    /// Parses configuration text; `origin` labels parse errors.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) && KEYS.contains(&key) {
                return Err(at(format!("duplicate key {key:?}")));
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::InvariantViolation { msg, .. } => at(format!("{key}: {msg}")),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads, validates and logs a configuration file.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let bytes = crate::io::read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: "file is not UTF-8".into(),
    })?;
    let cfg = PipelineConfig::parse(&text, &path.display().to_string())?;
    info!("resolved configuration:\n{}", cfg.echo());
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::GaborParams;
    use crate::pisp::PispParams;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = PipelineConfig::parse("", "mem").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        let g = cfg.descriptor.gabor;
        assert_eq!(g.sigma, std::f64::consts::SQRT_2);
        assert_eq!(g.l_max, 0.25);
        assert_eq!(g.s_f, std::f64::consts::SQRT_2);
        assert_eq!((g.n_scales, g.n_orients), (5, 8));
        assert_eq!(cfg.descriptor.downsample_factor, 64);
        assert_eq!(cfg.descriptor.pisp, PispParams::default());
        assert_eq!(cfg.descriptor.pisp.sigma1, 1.0);
        assert_eq!(cfg.descriptor.pisp.sigma2, 2.0);
        assert_eq!(cfg.descriptor.feature_dim().unwrap(), 10240);
    }

    #[test]
    fn small_sigma2_is_rejected() {
        let err = PipelineConfig::parse("pisp.sigma2 = 0.5\n", "mem").unwrap_err();
        match err {
            Error::InvariantViolation { field, .. } => assert_eq!(field, "pisp.sigma2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn three_scales_shrink_the_feature() {
        let cfg = PipelineConfig::parse("gabor.scales = 3", "mem").unwrap();
        assert_eq!(cfg.descriptor.gabor.bank_size(), 24);
        assert_eq!(cfg.descriptor.feature_dim().unwrap(), 6144);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = PipelineConfig::parse("# header\n\ngabor.l_max = abc\n", "cfg.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = PipelineConfig::parse("gabor.l_max\n", "cfg.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = PipelineConfig::parse("a=1\na=2", "cfg.txt").unwrap_err();
        assert!(matches!(err, Error::UnknownKey(k) if k == "a"));
        let err = PipelineConfig::parse("gabor.scales=2\ngabor.scales=3", "cfg.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(
            PipelineConfig::parse("gabor.lmax = 0.2", "mem"),
            Err(Error::UnknownKey(k)) if k == "gabor.lmax"
        ));
    }

    #[test]
    fn echo_reproduces_config() {
        let text = "imaging.illum = none\ngabor.sigma = 1.7320508075688772\nsubspace.method = lsda_olge\n\
                    subspace.dims = 7\nsubspace.heat_t = binary\nrecognition.metric = euclid\n\
                    descriptor.downsample = bilinear\ndescriptor.normalize = false\ndescriptor.p = 16";
        let cfg = PipelineConfig::parse(text, "mem").unwrap();
        assert_eq!(cfg.subspace.dims, Some(7));
        assert_eq!(cfg.metric, Metric::Euclid);
        let again = PipelineConfig::parse(&cfg.echo(), "echo").unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.echo(), cfg.echo());
        let default_echo = PipelineConfig::default().echo();
        assert_eq!(PipelineConfig::parse(&default_echo, "echo").unwrap(), PipelineConfig::default());
        assert_eq!(default_echo.lines().count(), KEYS.len());
    }

    #[test]
    fn grid_size_keys_drive_the_bank() {
        let cfg = PipelineConfig::parse("imaging.width = 64\nimaging.height = 32\ndescriptor.p = 16", "mem").unwrap();
        assert_eq!(
            cfg.descriptor.gabor,
            GaborParams {
                grid_w: 64,
                grid_h: 32,
                ..GaborParams::default()
            }
        );
        assert_eq!(cfg.descriptor.feature_dim().unwrap(), 16 * 8 * 40);
        assert!(PipelineConfig::parse("imaging.width = 100", "mem").is_err());
    }

    #[test]
    fn load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.cfg");
        std::fs::write(&p, "subspace.knn_k = 3\n").unwrap();
        assert_eq!(load_config(&p).unwrap().subspace.knn_k, 3);
        assert!(matches!(load_config(&dir.path().join("nope")), Err(Error::Io { .. })));
    }
}
