//! Seeded synthetic face-proxy corpus: each class is a 128×128 prototype of
//! oriented bars and ellipses over a smooth background; samples perturb it
//! by gain, integer translation and additive Gaussian noise.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::manifest::{DatasetManifest, ManifestRow, Role};
use crate::error::{Error, Result};
use crate::imaging::{encode_pgm, Image};

pub const SIZE: usize = 128;
pub const NOISE_SIGMA: f64 = 0.02;
pub const GAIN_RANGE: (f64, f64) = (0.9, 1.1);
pub const MAX_SHIFT: i64 = 2;

#[derive(Debug, Clone, Copy)]
enum Shape {
    Bar {
        cx: f64,
        cy: f64,
        half_len: f64,
        half_width: f64,
        angle: f64,
        delta: f64,
    },
    Ellipse {
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
        angle: f64,
        delta: f64,
    },
}

impl Shape {
    /// Coverage in `[0, 1]` with a one-pixel linear ramp at the boundary.
    fn coverage(&self, x: f64, y: f64) -> f64 {
        let ramp = |signed_dist: f64| (0.5 - signed_dist).clamp(0.0, 1.0);
        match *self {
            Shape::Bar {
                cx,
                cy,
                half_len,
                half_width,
                angle,
                ..
            } => {
                let (s, c) = angle.sin_cos();
                let (dx, dy) = (x - cx, y - cy);
                let u = (dx * c + dy * s).abs() - half_len;
                let v = (-dx * s + dy * c).abs() - half_width;
                ramp(u.max(v))
            }
            Shape::Ellipse {
                cx,
                cy,
                rx,
                ry,
                angle,
                ..
            } => {
                let (s, c) = angle.sin_cos();
                let (dx, dy) = (x - cx, y - cy);
                let u = (dx * c + dy * s) / rx;
                let v = (-dx * s + dy * c) / ry;
                // radial distance scaled back to pixels along the minor axis
                ramp(((u * u + v * v).sqrt() - 1.0) * rx.min(ry))
            }
        }
    }

    fn delta(&self) -> f64 {
        match *self {
            Shape::Bar { delta, .. } | Shape::Ellipse { delta, .. } => delta,
        }
    }
}

fn signed_delta(rng: &mut ChaCha8Rng) -> f64 {
    let mag = rng.random_range(0.15..0.35);
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Deterministic prototype of class `class` under `seed`.
pub fn prototype(seed: u64, class: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(class as u64);
    let n = SIZE as f64;

    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.03..0.08),
                f64::from(rng.random_range(0..3u8)),
                f64::from(rng.random_range(0..3u8)),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();

    let mut shapes = vec![Shape::Ellipse {
        cx: n / 2.0 + rng.random_range(-4.0..4.0),
        cy: n / 2.0 + rng.random_range(-4.0..4.0),
        rx: rng.random_range(38.0..50.0),
        ry: rng.random_range(48.0..60.0),
        angle: rng.random_range(-0.2..0.2),
        delta: signed_delta(&mut rng),
    }];
    for _ in 0..7 {
        let cx = rng.random_range(24.0..n - 24.0);
        let cy = rng.random_range(24.0..n - 24.0);
        let angle = rng.random_range(0.0..PI);
        let delta = signed_delta(&mut rng);
        shapes.push(if rng.random_bool(0.5) {
            Shape::Bar {
                cx,
                cy,
                half_len: rng.random_range(10.0..28.0),
                half_width: rng.random_range(2.0..5.0),
                angle,
                delta,
            }
        } else {
            Shape::Ellipse {
                cx,
                cy,
                rx: rng.random_range(5.0..16.0),
                ry: rng.random_range(5.0..16.0),
                angle,
                delta,
            }
        });
    }

    Image::from_fn(SIZE, SIZE, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let mut v = 0.5;
        for &(amp, fx, fy, phase) in &waves {
            v += amp * (2.0 * PI * (fx * xf + fy * yf) / n + phase).sin();
        }
        for s in &shapes {
            v += s.delta() * s.coverage(xf, yf);
        }
        v.clamp(0.05, 0.95)
    })
}

/// Sample `index` of class `class`: gain, shift and noise applied to the
/// prototype, quantized to 8 bits as it would be on disk.
pub fn sample(proto: &Image, seed: u64, class: usize, index: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f5a_4d91_e7c3);
    rng.set_stream(((class as u64) << 20) | index as u64);
    let gain = rng.random_range(GAIN_RANGE.0..=GAIN_RANGE.1);
    let dx = rng.random_range(-MAX_SHIFT..=MAX_SHIFT);
    let dy = rng.random_range(-MAX_SHIFT..=MAX_SHIFT);
    let noise = Normal::new(0.0, NOISE_SIGMA).expect("valid sigma");
    Image::from_fn(SIZE, SIZE, |x, y| {
        let v = gain * proto.get_clamped(x as isize - dx as isize, y as isize - dy as isize) + noise.sample(&mut rng);
        (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
    })
}

/// File name of a generated sample.
pub fn file_name(class: usize, index: usize) -> String {
    format!("s{class:03}_{index:02}.pgm")
}

pub fn subject_name(class: usize) -> String {
    format!("s{class:03}")
}

/// In-memory corpus: `corpus[class][index]`.
pub fn synth_images(n_classes: usize, per_class: usize, seed: u64) -> Result<Vec<Vec<Image>>> {
    check_counts(n_classes, per_class)?;
    Ok((0..n_classes)
        .map(|c| {
            let proto = prototype(seed, c);
            (0..per_class).map(|i| sample(&proto, seed, c, i)).collect()
        })
        .collect())
}

fn check_counts(n_classes: usize, per_class: usize) -> Result<()> {
    if n_classes < 2 || per_class < 2 {
        return Err(Error::InvalidParams(format!(
            "synthetic corpus needs ≥ 2 classes and ≥ 2 samples per class, got {n_classes}×{per_class}"
        )));
    }
    Ok(())
}

/// Writes the corpus as PGMs plus `manifest.csv` into `out_dir`. The first
/// `per_class − 1` samples of each class are listed as both train and
/// gallery; the last is the probe.
pub fn synth_dataset(n_classes: usize, per_class: usize, seed: u64, out_dir: &Path) -> Result<DatasetManifest> {
    check_counts(n_classes, per_class)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let corpus = synth_images(n_classes, per_class, seed)?;
    let mut rows = Vec::new();
    for (c, images) in corpus.iter().enumerate() {
        for (i, img) in images.iter().enumerate() {
            let name = file_name(c, i);
            crate::io::write_file(&out_dir.join(&name), &encode_pgm(img))?;
            let roles: &[Role] = if i + 1 < per_class {
                &[Role::Train, Role::Gallery]
            } else {
                &[Role::Probe]
            };
            for &role in roles {
                rows.push(ManifestRow {
                    path: name.clone(),
                    subject: subject_name(c),
                    role,
                });
            }
        }
    }
    let manifest = DatasetManifest {
        rows,
        base_dir: out_dir.to_path_buf(),
    };
    manifest.validate()?;
    manifest.write(&out_dir.join("manifest.csv"))?;
    Ok(manifest)
}
