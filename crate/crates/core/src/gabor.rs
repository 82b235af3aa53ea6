//! Complex Gabor wavelet family over `n_scales × n_orients` scale/orientation
//! pairs, sampled on the full working grid.
//!
//! `ψ(c) = (‖l‖²/σ²) · exp(-‖l‖²‖c‖²/(2σ²)) · [exp(i l·c) - exp(-σ²/2)]`
//! with wave vector magnitude `l_max / s_f^μ` and orientation `πν / n_orients`.

use rayon::prelude::*;
use serde::Serialize;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{ComplexGrid, Fft2Plan, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaborParams {
    pub sigma: f64,
    pub l_max: f64,
    pub s_f: f64,
    pub n_scales: usize,
    pub n_orients: usize,
    pub grid_w: usize,
    pub grid_h: usize,
}

impl Default for GaborParams {
    fn default() -> Self {
        Self {
            sigma: std::f64::consts::SQRT_2,
            l_max: 0.25,
            s_f: std::f64::consts::SQRT_2,
            n_scales: 5,
            n_orients: 8,
            grid_w: 128,
            grid_h: 128,
        }
    }
}

impl GaborParams {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("gabor.sigma", self.sigma),
            ("gabor.l_max", self.l_max),
            ("gabor.s_f", self.s_f),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvariantViolation {
                    field: field.into(),
                    msg: format!("must be positive, got {v}"),
                });
            }
        }
        for (field, v) in [
            ("gabor.scales", self.n_scales),
            ("gabor.orients", self.n_orients),
            ("imaging.width", self.grid_w),
            ("imaging.height", self.grid_h),
        ] {
            if v == 0 {
                return Err(Error::InvariantViolation {
                    field: field.into(),
                    msg: "must be at least 1".into(),
                });
            }
        }
        Ok(())
    }

    pub fn bank_size(&self) -> usize {
        self.n_scales * self.n_orients
    }

    /// Wave vector magnitude `l_max / s_f^mu`.
    pub fn wave_number(&self, mu: usize) -> f64 {
        self.l_max / self.s_f.powi(mu as i32)
    }

    pub fn orientation(&self, nu: usize) -> f64 {
        std::f64::consts::PI * nu as f64 / self.n_orients as f64
    }

    fn check_index(&self, mu: usize, nu: usize) -> Result<()> {
        if mu >= self.n_scales || nu >= self.n_orients {
            return Err(Error::IndexOutOfRange(format!(
                "(mu, nu) = ({mu}, {nu}) outside {}x{}",
                self.n_scales, self.n_orients
            )));
        }
        Ok(())
    }
}

/// Evaluates one wavelet at offset `(x, y)` from its center.
pub fn gabor_value(wave_number: f64, phi: f64, sigma: f64, x: f64, y: f64) -> Complex64 {
    let k2 = wave_number * wave_number;
    let s2 = sigma * sigma;
    let envelope = (k2 / s2) * (-k2 * (x * x + y * y) / (2.0 * s2)).exp();
    let phase = wave_number * (x * phi.cos() + y * phi.sin());
    envelope * (Complex64::from_polar(1.0, phase) - (-s2 / 2.0).exp())
}

/// Samples `ψ_{mu,nu}` on the `grid_w × grid_h` lattice with the center tap
/// at `(grid_w / 2, grid_h / 2)`.
pub fn gabor_kernel(mu: usize, nu: usize, p: &GaborParams) -> Result<ComplexGrid> {
    p.check_index(mu, nu)?;
    let (cx, cy) = ((p.grid_w / 2) as f64, (p.grid_h / 2) as f64);
    let k = p.wave_number(mu);
    let phi = p.orientation(nu);
    let mut data = Vec::with_capacity(p.grid_w * p.grid_h);
    for y in 0..p.grid_h {
        for x in 0..p.grid_w {
            data.push(gabor_value(k, phi, p.sigma, x as f64 - cx, y as f64 - cy));
        }
    }
    ComplexGrid::new(p.grid_w, p.grid_h, data)
}

/// Precomputed kernels and their origin-centered spectra, ordered
/// scale-major: `(0,0), (0,1), …, (n_scales-1, n_orients-1)`.
#[derive(Debug, Clone)]
pub struct GaborBank {
    params: GaborParams,
    kernels: Vec<ComplexGrid>,
    spectra: Vec<Spectrum>,
    plan: Fft2Plan,
}

pub fn build_bank(p: &GaborParams) -> Result<GaborBank> {
    p.validate()?;
    let plan = Fft2Plan::new(p.grid_w, p.grid_h);
    let (cx, cy) = (p.grid_w / 2, p.grid_h / 2);
    let pairs: Vec<(usize, usize)> = (0..p.n_scales)
        .flat_map(|mu| (0..p.n_orients).map(move |nu| (mu, nu)))
        .collect();
    let built: Vec<(ComplexGrid, Spectrum)> = pairs
        .par_iter()
        .map(|&(mu, nu)| {
            let kernel = gabor_kernel(mu, nu, p)?;
            let spectrum = plan.forward(&kernel.roll_to_origin(cx, cy))?;
            Ok((kernel, spectrum))
        })
        .collect::<Result<_>>()?;
    let (kernels, spectra) = built.into_iter().unzip();
    Ok(GaborBank {
        params: *p,
        kernels,
        spectra,
        plan,
    })
}

/// Summary of one kernel for inspection output.
#[derive(Debug, Clone, Serialize)]
pub struct KernelInfo {
    pub mu: usize,
    pub nu: usize,
    pub wave_number: f64,
    pub phi: f64,
    /// `|Σψ| / Σ|ψ|` over the lattice.
    pub dc_residue: f64,
}

impl GaborBank {
    pub fn params(&self) -> &GaborParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn kernels(&self) -> &[ComplexGrid] {
        &self.kernels
    }

    pub fn spectra(&self) -> &[Spectrum] {
        &self.spectra
    }

    pub fn plan(&self) -> &Fft2Plan {
        &self.plan
    }

    pub fn grid_dims(&self) -> (usize, usize) {
        (self.params.grid_w, self.params.grid_h)
    }

    /// `(mu, nu)` of the kernel at position `index`.
    pub fn indices(&self, index: usize) -> (usize, usize) {
        (index / self.params.n_orients, index % self.params.n_orients)
    }

    pub fn inspect(&self) -> Vec<KernelInfo> {
        self.kernels
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let (mu, nu) = self.indices(i);
                let sum: Complex64 = k.data().iter().sum();
                let abs: f64 = k.data().iter().map(|z| z.norm()).sum();
                KernelInfo {
                    mu,
                    nu,
                    wave_number: self.params.wave_number(mu),
                    phi: self.params.orientation(nu),
                    dc_residue: sum.norm() / abs,
                }
            })
            .collect()
    }
}
