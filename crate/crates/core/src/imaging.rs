//! Grey-level image carrier, PGM/PNG codecs, bilinear resizing and
//! histogram-equalization illumination preprocessing.
//!
//! All intensities are `f64`; decoded 8-bit payloads are mapped linearly
//! onto `[0, 1]`.

use std::fmt;

use crate::error::{Error, Result};

/// Row-major grid of real intensities.
#[derive(Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidData(format!(
                "image dims must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::dims(width * height, data.len()));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite intensity at index {i}")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0 && value.is_finite());
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0);
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self {
            width,
            height,
            data,
        }
    }

    /// Crate-internal constructor for buffers produced by our own kernels.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Clamp-to-edge pixel fetch.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image::from_raw(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub(crate) fn check_same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        Ok(())
    }
}

/// Encoded payload formats accepted by [`decode_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm8,
    PngGray,
}

impl ImageFormat {
    /// Guesses the format from the leading magic bytes.
    pub fn sniff(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(b"P5") {
            Some(ImageFormat::Pgm8)
        } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
            Some(ImageFormat::PngGray)
        } else {
            None
        }
    }
}

pub fn decode_image(bytes: &[u8], format: ImageFormat) -> Result<Image> {
    match format {
        ImageFormat::Pgm8 => decode_pgm(bytes),
        ImageFormat::PngGray => decode_png(bytes),
    }
}

/// Decodes either supported format after sniffing the magic bytes.
pub fn decode_any(bytes: &[u8]) -> Result<Image> {
    let format = ImageFormat::sniff(bytes)
        .ok_or_else(|| Error::MalformedPayload("unrecognized image signature".into()))?;
    decode_image(bytes, format)
}

pub fn read_image(path: &std::path::Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    decode_any(&bytes).map_err(|e| match e {
        Error::MalformedPayload(msg) => {
            Error::MalformedPayload(format!("{}: {msg}", path.display()))
        }
        other => other,
    })
}

fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let malformed = |msg: &str| Error::MalformedPayload(format!("PGM: {msg}"));
    if !bytes.starts_with(b"P5") {
        return Err(malformed("missing P5 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments between header tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(malformed("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(malformed("expected a decimal header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("header field out of range"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(malformed("missing raster separator"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(malformed("zero-sized image"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(malformed("maxval out of range"));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedDepth(16));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| malformed("dims overflow"))?;
    let raster = bytes
        .get(pos..pos + n)
        .ok_or_else(|| malformed("truncated raster"))?;
    let scale = maxval as f64;
    let data = raster.iter().map(|&b| (b as f64 / scale).min(1.0)).collect();
    Ok(Image::from_raw(width, height, data))
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let malformed = |e: png::DecodingError| Error::MalformedPayload(format!("PNG: {e}"));
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    // palette images are expanded to RGB; bit depth is checked before that
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(malformed)?;
    let info = reader.info();
    let depth = info.bit_depth as u32;
    if info.color_type != png::ColorType::Indexed && depth != 8 {
        return Err(Error::UnsupportedDepth(depth));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let mut buf = vec![0u8; reader.output_buffer_size().ok_or_else(|| {
        Error::MalformedPayload("PNG: output buffer size overflow".into())
    })?];
    let frame = reader.next_frame(&mut buf).map_err(malformed)?;
    if frame.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedDepth(frame.bit_depth as u32));
    }
    let channels = frame.color_type.samples();
    let stride = frame.line_size;
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let row = &buf[y * stride..y * stride + width * channels];
        for px in row.chunks_exact(channels) {
            let v = match frame.color_type {
                png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha => px[0] as f64,
                png::ColorType::Rgb | png::ColorType::Rgba => {
                    0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64
                }
                png::ColorType::Indexed => {
                    return Err(Error::MalformedPayload("PNG: unexpanded palette".into()))
                }
            };
            data.push(v / 255.0);
        }
    }
    Ok(Image::from_raw(width, height, data))
}

/// Encodes as binary PGM (P5, maxval 255), clamping to `[0, 1]` and
/// rounding to the nearest level.
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(
        img.data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

/// Affinely rescales `img` onto `[0, 1]` for visualisation and returns the
/// `(offset, scale)` used, such that `out = (v - offset) * scale`.
pub fn rescale_for_display(img: &Image) -> (Image, f64, f64) {
    let (lo, hi) = img.min_max();
    let scale = if hi - lo > 0.0 { 1.0 / (hi - lo) } else { 0.0 };
    (img.map(|v| (v - lo) * scale), lo, scale)
}

/// Bilinear resampling with pixel-center alignment.
pub fn resize_bilinear(img: &Image, out_w: usize, out_h: usize) -> Result<Image> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidParams(format!(
            "resize target must be positive, got {out_w}x{out_h}"
        )));
    }
    if (out_w, out_h) == img.dims() {
        return Ok(img.clone());
    }
    let axis = |n_in: usize, n_out: usize| -> Vec<(usize, usize, f64)> {
        let scale = n_in as f64 / n_out as f64;
        (0..n_out)
            .map(|i| {
                let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (n_in - 1) as f64);
                let i0 = s.floor() as usize;
                let i1 = (i0 + 1).min(n_in - 1);
                (i0, i1, s - i0 as f64)
            })
            .collect()
    };
    let xs = axis(img.width, out_w);
    let ys = axis(img.height, out_h);
    let mut data = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
            let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
            data.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    Ok(Image::from_raw(out_w, out_h, data))
}

const HIST_LEVELS: usize = 256;

/// Histogram equalization over 256 levels; level `k` maps to `cdf(k) / N`.
///
/// Images occupying a single level are returned unchanged.
pub fn illum_normalize(img: &Image) -> Image {
    let level = |v: f64| ((v.clamp(0.0, 1.0) * (HIST_LEVELS - 1) as f64).round()) as usize;
    let mut hist = [0usize; HIST_LEVELS];
    for &v in &img.data {
        hist[level(v)] += 1;
    }
    if hist.iter().filter(|&&c| c > 0).count() <= 1 {
        return img.clone();
    }
    let n = img.data.len() as f64;
    let mut lut = [0.0; HIST_LEVELS];
    let mut acc = 0usize;
    for (k, &count) in hist.iter().enumerate() {
        acc += count;
        lut[k] = acc as f64 / n;
    }
    img.map(|v| lut[level(v)])
}

/// Illumination preprocessing selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Illumination {
    None,
    #[default]
    Histeq,
}

impl Illumination {
    pub fn apply(self, img: &Image) -> Image {
        match self {
            Illumination::None => img.clone(),
            Illumination::Histeq => illum_normalize(img),
        }
    }
}

impl std::str::FromStr for Illumination {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(Illumination::None),
            "histeq" => Ok(Illumination::Histeq),
            other => Err(format!("expected none|histeq, got {other:?}")),
        }
    }
}

impl fmt::Display for Illumination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Illumination::None => "none",
            Illumination::Histeq => "histeq",
        })
    }
}
