//! Primitive inherent structural pattern: the fine-scale minus coarse-scale
//! Laplacian-of-Gaussian response of an image, and its additive embedding
//! back into the grey-level image.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imaging::Image;

/// Square, odd-sized filter kernel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::EvenSize(size));
        }
        if weights.len() != size * size {
            return Err(Error::dims(size * size, weights.len()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidData("non-finite kernel weight".into()));
        }
        Ok(Self { size, weights })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(dx, dy)` from the center tap.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius() as isize;
        self.weights[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PispParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub size1: usize,
    pub size2: usize,
}

impl Default for PispParams {
    fn default() -> Self {
        Self {
            sigma1: 1.0,
            sigma2: 2.0,
            size1: 7,
            size2: 13,
        }
    }
}

impl PispParams {
    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("pisp.sigma1", self.sigma1), ("pisp.sigma2", self.sigma2)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvariantViolation {
                    field: name.into(),
                    msg: format!("must be positive, got {s}"),
                });
            }
        }
        if self.sigma2 <= self.sigma1 {
            return Err(Error::InvariantViolation {
                field: "pisp.sigma2".into(),
                msg: format!("must exceed sigma1 = {}, got {}", self.sigma1, self.sigma2),
            });
        }
        for (name, s) in [("pisp.size1", self.size1), ("pisp.size2", self.size2)] {
            if s < 3 || s % 2 == 0 {
                return Err(Error::InvariantViolation {
                    field: name.into(),
                    msg: format!("must be odd and >= 3, got {s}"),
                });
            }
        }
        if self.size1 >= self.size2 {
            return Err(Error::InvariantViolation {
                field: "pisp.size2".into(),
                msg: format!("must exceed size1 = {}, got {}", self.size1, self.size2),
            });
        }
        Ok(())
    }
}

/// Discrete Gaussian normalized to unit mass.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel> {
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if size.is_multiple_of(2) {
        return Err(Error::EvenSize(size));
    }
    let r = (size / 2) as isize;
    let denom = 2.0 * sigma * sigma;
    let mut weights = Vec::with_capacity(size * size);
    for dy in -r..=r {
        for dx in -r..=r {
            weights.push((-((dx * dx + dy * dy) as f64) / denom).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Kernel::new(size, weights)
}

/// 4-neighbour negative Laplacian stencil.
pub fn laplacian_kernel() -> Kernel {
    Kernel {
        size: 3,
        weights: vec![0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0],
    }
}

/// Negative Laplacian-of-Gaussian built by filtering the Gaussian kernel with
/// the Laplacian stencil (replicate borders), then forced to zero sum.
///
/// The zero-sum correction subtracts the mean from every tap and then sets
/// the center tap to minus the sum of the others, so the taps add to exactly
/// `0.0` in floating point.
pub fn dog_kernel(size: usize, sigma: f64) -> Result<Kernel> {
    if size < 3 {
        return Err(Error::InvalidParams(format!("DoG kernel size must be >= 3, got {size}")));
    }
    let g = gaussian_kernel(size, sigma)?;
    let as_image = Image::from_raw(size, size, g.weights);
    let filtered = conv2_replicate(&as_image, &laplacian_kernel());
    let mut weights = filtered.into_data();
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    weights.iter_mut().for_each(|w| *w -= mean);
    let center = weights.len() / 2;
    let others: f64 = weights
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != center)
        .map(|(_, w)| w)
        .sum();
    weights[center] = -others;
    Kernel::new(size, weights)
}

/// Same-size correlation with clamp-to-edge borders:
/// `out(x, y) = Σ k(dx, dy) · img(clamp(x + dx), clamp(y + dy))`.
pub fn conv2_replicate(img: &Image, k: &Kernel) -> Image {
    let (w, h) = img.dims();
    let r = k.radius() as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    acc += k.at(dx, dy) * img.get_clamped(x + dx, y + dy);
                }
            }
            out.push(acc);
        }
    }
    Image::from_raw(w, h, out)
}

/// Zero-sum variant of [`conv2_replicate`] evaluated on differences from the
/// center pixel, so constant neighbourhoods produce exactly `0.0`.
fn conv2_replicate_zero_sum(img: &Image, k: &Kernel) -> Image {
    let (w, h) = img.dims();
    let r = k.radius() as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let center = img.get(x as usize, y as usize);
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    acc += k.at(dx, dy) * (img.get_clamped(x + dx, y + dy) - center);
                }
            }
            out.push(acc);
        }
    }
    Image::from_raw(w, h, out)
}

/// The two zero-sum DoG kernels used by [`extract_pisp`].
#[derive(Debug, Clone)]
pub struct PispKernels {
    pub fine: Kernel,
    pub coarse: Kernel,
}

impl PispKernels {
    pub fn new(p: &PispParams) -> Result<Self> {
        p.validate()?;
        Ok(Self {
            fine: dog_kernel(p.size1, p.sigma1)?,
            coarse: dog_kernel(p.size2, p.sigma2)?,
        })
    }

    pub fn apply(&self, img: &Image) -> Image {
        let fine = conv2_replicate_zero_sum(img, &self.fine);
        let coarse = conv2_replicate_zero_sum(img, &self.coarse);
        let data = fine
            .data()
            .iter()
            .zip(coarse.data())
            .map(|(a, b)| a - b)
            .collect();
        Image::from_raw(img.width(), img.height(), data)
    }
}

/// Fine-scale minus coarse-scale DoG response of `img`.
pub fn extract_pisp(img: &Image, p: &PispParams) -> Result<Image> {
    Ok(PispKernels::new(p)?.apply(img))
}

/// Additive embedding of the structural pattern into the grey-level image.
pub fn embed(pisp: &Image, gray: &Image) -> Result<Image> {
    pisp.check_same_dims(gray)?;
    let data = pisp.data().iter().zip(gray.data()).map(|(a, b)| a + b).collect();
    Ok(Image::from_raw(gray.width(), gray.height(), data))
}
