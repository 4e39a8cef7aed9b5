//! Gray rasters, binary masks, and the small amount of image I/O the detector
//! needs: PNG (8-bit gray or RGB/RGBA) and binary PGM (`P5`) in, PNG and PGM out.

use std::io::Cursor;

use thiserror::Error;

use crate::region::BoundingBox;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid image dimensions {width}x{height} for {len} bytes")]
    InvalidDimensions { width: u32, height: u32, len: usize },
    #[error("malformed image at byte {offset}: {cause}")]
    Malformed { offset: usize, cause: String },
    #[error("unsupported image format: {0}")]
    Unsupported(String),
    #[error("box {bbox} lies outside the {width}x{height} image")]
    OutOfBounds { bbox: BoundingBox, width: u32, height: u32 },
    #[error("png encoding failed: {0}")]
    Encode(String),
}

/// 8-bit single channel image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 || data.len() != width as usize * height as usize {
            return Err(RasterError::InvalidDimensions { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self { width, height, data: vec![value; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = value;
    }

    pub fn map(&self, f: impl Fn(u8) -> u8) -> Self {
        Self { width: self.width, height: self.height, data: self.data.iter().map(|&p| f(p)).collect() }
    }
}

/// Row-major boolean membership raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, bits: vec![false; width as usize * height as usize] }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Option<Self> {
        (bits.len() == width as usize * height as usize).then_some(Self { width, height, bits })
    }

    /// Parses rows of `#` (set) and anything else (clear). Rows must have equal length.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.chars().count()) as u32;
        let mut mask = Self::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            assert_eq!(row.chars().count() as u32, width, "ragged mask row {y}");
            for (x, c) in row.chars().enumerate() {
                mask.set(x as u32, y as u32, c == '#');
            }
        }
        mask
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-range coordinates read as background.
    #[inline]
    pub fn get_or_clear(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as u64) < self.width as u64 && (y as u64) < self.height as u64 && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width.max(1);
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }

    /// Every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

/// ITU-R BT.601 luma, rounded half-up.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Decodes a PNG or binary PGM stream into a gray image, sniffing the format from the magic bytes.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage, RasterError> {
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.len() < 2 {
        Err(RasterError::Malformed { offset: 0, cause: "stream too short to identify".into() })
    } else {
        Err(RasterError::Malformed { offset: 0, cause: "unrecognized magic bytes (expected PNG or P5 PGM)".into() })
    }
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage, RasterError> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| RasterError::Malformed { offset: 0, cause: format!("png header: {e}") })?;
    let info = reader.info();
    let (width, height) = (info.width, info.height);
    let (color, depth) = (info.color_type, info.bit_depth);
    if depth != png::BitDepth::Eight {
        return Err(RasterError::Unsupported(format!("png bit depth {depth:?}, only 8-bit is supported")));
    }
    let channels = match color {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(RasterError::Unsupported("indexed-color png".into()));
        }
    };
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| RasterError::Malformed { offset: 0, cause: format!("png data: {e}") })?;
    let stride = frame.line_size;
    let mut data = Vec::with_capacity(width as usize * height as usize);
    for row in buf.chunks(stride).take(height as usize) {
        for px in row[..width as usize * channels].chunks_exact(channels) {
            data.push(match channels {
                1 | 2 => px[0],
                _ => luma(px[0], px[1], px[2]),
            });
        }
    }
    GrayImage::new(width, height, data)
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, RasterError> {
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            let name = ["width", "height", "maxval"][i];
            return Err(RasterError::Malformed { offset: start, cause: format!("expected pgm {name}") });
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| RasterError::Malformed { offset: start, cause: "pgm header number out of range".into() })?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(RasterError::Malformed { offset: pos, cause: "missing whitespace after pgm header".into() }),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(RasterError::Unsupported(format!("pgm maxval {maxval}, only 255 is supported")));
    }
    if width == 0 || height == 0 {
        return Err(RasterError::Malformed { offset: pos, cause: format!("empty pgm dimensions {width}x{height}") });
    }
    let n = width as usize * height as usize;
    let pixels = bytes.get(pos..pos + n).ok_or_else(|| RasterError::Malformed {
        offset: bytes.len(),
        cause: format!("pgm raster truncated: need {n} bytes, have {}", bytes.len() - pos),
    })?;
    GrayImage::new(width, height, pixels.to_vec())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

fn encode_png_raw(width: u32, height: u32, color: png::ColorType, data: &[u8]) -> Result<Vec<u8>, RasterError> {
    let mut out = Vec::new();
    let mut encoder = png::Encoder::new(&mut out, width, height);
    encoder.set_color(color);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| RasterError::Encode(e.to_string()))?;
    writer.write_image_data(data).map_err(|e| RasterError::Encode(e.to_string()))?;
    writer.finish().map_err(|e| RasterError::Encode(e.to_string()))?;
    Ok(out)
}

pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>, RasterError> {
    encode_png_raw(img.width, img.height, png::ColorType::Grayscale, &img.data)
}

pub const HIGHLIGHT: [u8; 3] = [255, 0, 0];

/// RGB PNG of `img` with a one pixel outline in [`HIGHLIGHT`] around every box.
pub fn encode_annotated(img: &GrayImage, boxes: &[BoundingBox]) -> Result<Vec<u8>, RasterError> {
    for b in boxes {
        if !b.fits_within(img.width, img.height) {
            return Err(RasterError::OutOfBounds { bbox: *b, width: img.width, height: img.height });
        }
    }
    let mut rgb: Vec<u8> = img.data.iter().flat_map(|&p| [p, p, p]).collect();
    let w = img.width as usize;
    let mut paint = |x: u32, y: u32| {
        let i = (y as usize * w + x as usize) * 3;
        rgb[i..i + 3].copy_from_slice(&HIGHLIGHT);
    };
    for b in boxes {
        let (x1, y1) = (b.right() - 1, b.bottom() - 1);
        for x in b.x..=x1 {
            paint(x, b.y);
            paint(x, y1);
        }
        for y in b.y..=y1 {
            paint(b.x, y);
            paint(x1, y);
        }
    }
    encode_png_raw(img.width, img.height, png::ColorType::Rgb, &rgb)
}

/// Mean and population standard deviation of the intensities.
pub fn intensity_stats(img: &GrayImage) -> (f64, f64) {
    let n = img.data.len() as f64;
    let mean = img.data.iter().map(|&p| p as f64).sum::<f64>() / n;
    let var = img.data.iter().map(|&p| (p as f64 - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Linear remap of `[mean - k*sd, mean + k*sd]` onto `[0, 255]`, clamped.
/// Zero variance, or a `k` that is not positive, returns the image unchanged.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN k counts as not positive
pub fn contrast_stretch(img: &GrayImage, k: f64) -> GrayImage {
    let (mean, sd) = intensity_stats(img);
    if sd == 0.0 || !(k > 0.0) {
        return img.clone();
    }
    let lo = mean - k * sd;
    let span = 2.0 * k * sd;
    let mut lut = [0u8; 256];
    for (v, out) in lut.iter_mut().enumerate() {
        *out = ((v as f64 - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8;
    }
    img.map(|p| lut[p as usize])
}

pub fn invert(img: &GrayImage) -> GrayImage {
    img.map(|p| 255 - p)
}
