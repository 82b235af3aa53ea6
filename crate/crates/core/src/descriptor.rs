//! The full descriptor pipeline: structural pattern, Gabor magnitude stack,
//! block down-sampling, per-map standardization and concatenation.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gabor::{build_bank, GaborBank, GaborParams};
use crate::imaging::{resize_bilinear, Illumination, Image};
use crate::pisp::{embed, PispKernels, PispParams};
use crate::spectral::magnitude;

/// Ordered magnitude maps, one per bank kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseStack {
    maps: Vec<Image>,
}

impl ResponseStack {
    pub fn new(maps: Vec<Image>) -> Result<Self> {
        if let Some(first) = maps.first() {
            for m in &maps[1..] {
                first.check_same_dims(m)?;
            }
        }
        Ok(Self { maps })
    }

    pub fn maps(&self) -> &[Image] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn map_each(&self, f: impl Fn(&Image) -> Result<Image> + Sync) -> Result<Self> {
        Ok(Self {
            maps: self.maps.iter().map(f).collect::<Result<_>>()?,
        })
    }
}

/// Dense real feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DownsampleMode {
    #[default]
    Blockmean,
    Bilinear,
}

impl std::str::FromStr for DownsampleMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "blockmean" => Ok(DownsampleMode::Blockmean),
            "bilinear" => Ok(DownsampleMode::Bilinear),
            other => Err(format!("expected blockmean|bilinear, got {other:?}")),
        }
    }
}

impl fmt::Display for DownsampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DownsampleMode::Blockmean => "blockmean",
            DownsampleMode::Bilinear => "bilinear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptorParams {
    pub illumination: Illumination,
    pub pisp: PispParams,
    pub gabor: GaborParams,
    pub downsample_factor: usize,
    pub downsample_mode: DownsampleMode,
    pub normalize: bool,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        Self {
            illumination: Illumination::Histeq,
            pisp: PispParams::default(),
            gabor: GaborParams::default(),
            downsample_factor: 64,
            downsample_mode: DownsampleMode::Blockmean,
            normalize: true,
        }
    }
}

impl DescriptorParams {
    pub fn block_side(&self) -> Result<usize> {
        block_side(self.downsample_factor)
    }

    pub fn validate(&self) -> Result<()> {
        self.pisp.validate()?;
        self.gabor.validate()?;
        let side = self.block_side().map_err(|e| Error::InvariantViolation {
            field: "descriptor.p".into(),
            msg: e.to_string(),
        })?;
        let (w, h) = (self.gabor.grid_w, self.gabor.grid_h);
        if w % side != 0 || h % side != 0 {
            return Err(Error::InvariantViolation {
                field: "descriptor.p".into(),
                msg: format!("block side {side} does not divide the {w}x{h} grid"),
            });
        }
        Ok(())
    }

    /// Length of the feature vector produced under these parameters.
    pub fn feature_dim(&self) -> Result<usize> {
        let side = self.block_side()?;
        Ok((self.gabor.grid_w / side) * (self.gabor.grid_h / side) * self.gabor.bank_size())
    }
}

fn block_side(p: usize) -> Result<usize> {
    let side = (p as f64).sqrt().round() as usize;
    if p == 0 || side * side != p {
        return Err(Error::NonSquareFactor(p));
    }
    Ok(side)
}

/// Gabor magnitude responses of `chi`, one map per bank kernel.
pub fn gabor_transform(chi: &Image, bank: &GaborBank) -> Result<ResponseStack> {
    if chi.dims() != bank.grid_dims() {
        let (w, h) = bank.grid_dims();
        return Err(Error::dims(
            format!("{w}x{h}"),
            format!("{}x{}", chi.width(), chi.height()),
        ));
    }
    let plan = bank.plan();
    let chi_spec = plan.forward_real(chi)?;
    let maps = bank
        .spectra()
        .iter()
        .map(|ks| Ok(magnitude(&plan.inverse_of_product(&chi_spec, ks)?)))
        .collect::<Result<_>>()?;
    Ok(ResponseStack { maps })
}

/// Block-mean pooling over non-overlapping `√p × √p` blocks.
pub fn downsample(map: &Image, p: usize) -> Result<Image> {
    let side = block_side(p)?;
    let (w, h) = map.dims();
    check_divisible(w, h, side)?;
    let (ow, oh) = (w / side, h / side);
    let norm = 1.0 / (side * side) as f64;
    let mut out = Vec::with_capacity(ow * oh);
    for by in 0..oh {
        for bx in 0..ow {
            let mut acc = 0.0;
            for y in by * side..(by + 1) * side {
                for x in bx * side..(bx + 1) * side {
                    acc += map.get(x, y);
                }
            }
            out.push(acc * norm);
        }
    }
    Ok(Image::from_raw(ow, oh, out))
}

/// Bilinear point-sampling alternative to [`downsample`].
pub fn downsample_bilinear(map: &Image, p: usize) -> Result<Image> {
    let side = block_side(p)?;
    let (w, h) = map.dims();
    check_divisible(w, h, side)?;
    resize_bilinear(map, w / side, h / side)
}

fn check_divisible(width: usize, height: usize, block: usize) -> Result<()> {
    if !width.is_multiple_of(block) || !height.is_multiple_of(block) {
        return Err(Error::IndivisibleDims {
            width,
            height,
            block,
        });
    }
    Ok(())
}

const DEGENERATE_STD: f64 = 1e-12;

/// Zero-mean, unit population variance; near-constant maps become zeros.
pub fn znorm(map: &Image) -> Image {
    let n = map.data().len() as f64;
    let mean = map.data().iter().sum::<f64>() / n;
    let var = map.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < DEGENERATE_STD {
        return Image::zeros(map.width(), map.height());
    }
    map.map(|v| (v - mean) / std)
}

/// Row-major concatenation of the maps in stack order.
pub fn augment(stack: &ResponseStack) -> FeatureVector {
    FeatureVector(
        stack
            .maps
            .iter()
            .flat_map(|m| m.data().iter().copied())
            .collect(),
    )
}

/// Intermediate products of one extraction, kept for debug dumps.
#[derive(Debug, Clone)]
pub struct Stages {
    pub input: Image,
    pub illuminated: Image,
    pub pisp: Image,
    pub chi: Image,
    pub responses: ResponseStack,
    pub pooled: ResponseStack,
    pub feature: FeatureVector,
}

/// Reusable extractor holding the precomputed bank and DoG kernels.
#[derive(Debug, Clone)]
pub struct Extractor {
    params: DescriptorParams,
    bank: GaborBank,
    pisp: PispKernels,
}

impl Extractor {
    pub fn new(params: DescriptorParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            bank: build_bank(&params.gabor)?,
            pisp: PispKernels::new(&params.pisp)?,
        })
    }

    pub fn params(&self) -> &DescriptorParams {
        &self.params
    }

    pub fn bank(&self) -> &GaborBank {
        &self.bank
    }

    pub fn feature_dim(&self) -> usize {
        self.params.feature_dim().expect("validated on construction")
    }

    pub fn stages(&self, img: &Image) -> Result<Stages> {
        let (w, h) = self.bank.grid_dims();
        let input = resize_bilinear(img, w, h)?;
        let illuminated = self.params.illumination.apply(&input);
        let pisp = self.pisp.apply(&illuminated);
        let chi = embed(&pisp, &illuminated)?;
        let responses = gabor_transform(&chi, &self.bank)?;
        let p = self.params.downsample_factor;
        let pooled = responses.map_each(|m| {
            let small = match self.params.downsample_mode {
                DownsampleMode::Blockmean => downsample(m, p)?,
                DownsampleMode::Bilinear => downsample_bilinear(m, p)?,
            };
            Ok(if self.params.normalize { znorm(&small) } else { small })
        })?;
        let feature = augment(&pooled);
        Ok(Stages {
            input,
            illuminated,
            pisp,
            chi,
            responses,
            pooled,
            feature,
        })
    }

    pub fn extract(&self, img: &Image) -> Result<FeatureVector> {
        Ok(self.stages(img)?.feature)
    }

    /// Extracts every image in parallel; output order follows input order.
    pub fn extract_batch(&self, images: &[Image]) -> Result<Vec<FeatureVector>> {
        images.par_iter().map(|img| self.extract(img)).collect()
    }
}

/// One-shot extraction with a prebuilt bank.
pub fn extract(img: &Image, params: &DescriptorParams, bank: &GaborBank) -> Result<FeatureVector> {
    if bank.params() != &params.gabor {
        return Err(Error::InvalidParams("bank was built with different Gabor parameters".into()));
    }
    params.validate()?;
    let extractor = Extractor {
        params: *params,
        bank: bank.clone(),
        pisp: PispKernels::new(&params.pisp)?,
    };
    extractor.extract(img)
}
