//! 2-D discrete Fourier transforms, frequency-domain circular convolution
//! and magnitude extraction.
//!
//! Conventions: the forward transform is unnormalized
//! (`X[k] = Σ x[n] e^{-2πi k·n/N}`), the inverse carries the `1/(NM)`
//! factor, and zero frequency sits at index `(0, 0)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::imaging::Image;

/// Row-major grid of complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn new(width: usize, height: usize, data: Vec<Complex64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidData("complex grid dims must be positive".into()));
        }
        if data.len() != width * height {
            return Err(Error::dims(width * height, data.len()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidData("non-finite complex sample".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_real(img: &Image) -> Self {
        Self::from_raw(
            img.width(),
            img.height(),
            img.data().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.data[y * self.width + x]
    }

    pub fn real_part(&self) -> Image {
        Image::from_raw(self.width, self.height, self.data.iter().map(|z| z.re).collect())
    }

    pub fn imag_part(&self) -> Image {
        Image::from_raw(self.width, self.height, self.data.iter().map(|z| z.im).collect())
    }

    /// Circular shift so that pixel `(dx, dy)` lands at `(0, 0)`.
    pub fn roll_to_origin(&self, dx: usize, dy: usize) -> ComplexGrid {
        let (w, h) = (self.width, self.height);
        let mut out = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                out.push(self.get((x + dx) % w, (y + dy) % h));
            }
        }
        ComplexGrid::from_raw(w, h, out)
    }
}

/// Frequency-domain coefficients, zero frequency at index `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, kx: usize, ky: usize) -> Complex64 {
        self.data[ky * self.width + kx]
    }
}

/// Reusable row/column transform plans for one grid size.
#[derive(Clone)]
pub struct Fft2Plan {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2Plan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2Plan({}x{})", self.width, self.height)
    }
}

impl Fft2Plan {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (w, h) = (self.width, self.height);
        let (rows, cols) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        for row in data.chunks_exact_mut(w) {
            rows.process(row);
        }
        let mut column = vec![Complex64::default(); h];
        for x in 0..w {
            for y in 0..h {
                column[y] = data[y * w + x];
            }
            cols.process(&mut column);
            for y in 0..h {
                data[y * w + x] = column[y];
            }
        }
    }

    pub fn forward(&self, grid: &ComplexGrid) -> Result<Spectrum> {
        self.check(grid.width, grid.height)?;
        let mut data = grid.data.clone();
        self.transform(&mut data, false);
        Ok(Spectrum {
            width: grid.width,
            height: grid.height,
            data,
        })
    }

    pub fn forward_real(&self, img: &Image) -> Result<Spectrum> {
        self.forward(&ComplexGrid::from_real(img))
    }

    pub fn inverse(&self, spectrum: &Spectrum) -> Result<ComplexGrid> {
        self.check(spectrum.width, spectrum.height)?;
        let mut data = spectrum.data.clone();
        self.inverse_in_place(&mut data);
        Ok(ComplexGrid::from_raw(spectrum.width, spectrum.height, data))
    }

    fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let norm = 1.0 / (self.width * self.height) as f64;
        data.iter_mut().for_each(|z| *z *= norm);
    }

    /// Inverse transform of the elementwise product `a · b`.
    pub fn inverse_of_product(&self, a: &Spectrum, b: &Spectrum) -> Result<ComplexGrid> {
        self.check(a.width, a.height)?;
        self.check(b.width, b.height)?;
        let mut data: Vec<Complex64> = a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect();
        self.inverse_in_place(&mut data);
        Ok(ComplexGrid::from_raw(a.width, a.height, data))
    }

    fn check(&self, w: usize, h: usize) -> Result<()> {
        if (w, h) != (self.width, self.height) {
            return Err(Error::dims(
                format!("{}x{}", self.width, self.height),
                format!("{w}x{h}"),
            ));
        }
        Ok(())
    }
}

pub fn fft2(grid: &ComplexGrid) -> Spectrum {
    Fft2Plan::new(grid.width, grid.height)
        .forward(grid)
        .expect("plan built for grid dims")
}

pub fn ifft2(spectrum: &Spectrum) -> ComplexGrid {
    Fft2Plan::new(spectrum.width, spectrum.height)
        .inverse(spectrum)
        .expect("plan built for spectrum dims")
}

/// Circular convolution of `image` with the kernel whose (origin-centered)
/// spectrum is given.
pub fn conv_freq(image: &Image, kernel_spectrum: &Spectrum) -> Result<ComplexGrid> {
    conv_freq_with(&Fft2Plan::new(image.width(), image.height()), image, kernel_spectrum)
}

pub fn conv_freq_with(plan: &Fft2Plan, image: &Image, kernel_spectrum: &Spectrum) -> Result<ComplexGrid> {
    if image.dims() != (kernel_spectrum.width, kernel_spectrum.height) {
        return Err(Error::dims(
            format!("{}x{}", kernel_spectrum.width, kernel_spectrum.height),
            format!("{}x{}", image.width(), image.height()),
        ));
    }
    let img_spec = plan.forward_real(image)?;
    plan.inverse_of_product(&img_spec, kernel_spectrum)
}

/// Per-pixel modulus.
pub fn magnitude(resp: &ComplexGrid) -> Image {
    Image::from_raw(resp.width, resp.height, resp.data.iter().map(|z| z.norm()).collect())
}

/// Fraction of non-DC spectral energy whose radial frequency exceeds
/// `radius_frac` of Nyquist. Frequencies are normalized per axis so that
/// Nyquist is 1; a signal with no non-DC energy yields 0.
pub fn highfreq_energy_ratio(img: &Image, radius_frac: f64) -> Result<f64> {
    if !(radius_frac > 0.0 && radius_frac < 1.0) {
        return Err(Error::InvalidParams(format!(
            "radius_frac must lie in (0, 1), got {radius_frac}"
        )));
    }
    let (w, h) = img.dims();
    let spec = fft2(&ComplexGrid::from_real(img));
    let centered = |k: usize, n: usize| -> f64 {
        let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        signed / (n as f64 / 2.0)
    };
    let (mut high, mut total) = (0.0, 0.0);
    for ky in 0..h {
        let fy = centered(ky, h);
        for kx in 0..w {
            if kx == 0 && ky == 0 {
                continue;
            }
            let fx = centered(kx, w);
            let e = spec.get(kx, ky).norm_sqr();
            total += e;
            if (fx * fx + fy * fy).sqrt() > radius_frac {
                high += e;
            }
        }
    }
    Ok(if total > 0.0 { high / total } else { 0.0 })
}
