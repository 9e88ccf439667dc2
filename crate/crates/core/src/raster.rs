//! Row-major raster containers and their PNG encodings.

use std::io::Cursor;
use std::path::Path;

use image::{ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "raster dimensions must be positive, got {width}x{height}"
        )));
    }
    if width * height != len {
        return Err(Error::InvalidParameter(format!(
            "buffer of length {len} does not match {width}x{height}"
        )));
    }
    Ok(())
}

fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn quantize_u16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0).round() as u16
}

/// Single-channel image with intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        GrayImage {
            width,
            height,
            data: vec![value.clamp(0.0, 1.0); width * height],
        }
    }

    /// Values are clamped into `[0, 1]`.
    pub fn from_vec(width: usize, height: usize, mut data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite intensity".into()));
        }
        data.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        Ok(GrayImage { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut img = GrayImage::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y).clamp(0.0, 1.0);
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v.clamp(0.0, 1.0);
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn encode_png8(&self) -> Vec<u8> {
        let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(
            self.width as u32,
            self.height as u32,
            self.data.iter().map(|&v| quantize_u8(v)).collect(),
        )
        .expect("buffer length matches dimensions");
        encode_png(&buf)
    }

    pub fn encode_png16(&self) -> Vec<u8> {
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(
            self.width as u32,
            self.height as u32,
            self.data.iter().map(|&v| quantize_u16(v)).collect(),
        )
        .expect("buffer length matches dimensions");
        encode_png(&buf)
    }

    /// Loads any PNG as gray; color inputs go through the decoder's luma conversion.
    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::image(path, e))?;
        let g = img.to_luma16();
        let (w, h) = g.dimensions();
        GrayImage::from_vec(
            w as usize,
            h as usize,
            g.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        )
    }
}

/// Three-channel linear color image with channels in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn filled(width: usize, height: usize, value: [f64; 3]) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        RgbImage {
            width,
            height,
            data: vec![value.map(|c| c.clamp(0.0, 1.0)); width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, mut data: Vec<[f64; 3]>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite color".into()));
        }
        for px in &mut data {
            *px = px.map(|c| c.clamp(0.0, 1.0));
        }
        Ok(RgbImage { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    pub fn encode_png8(&self) -> Vec<u8> {
        let buf: ImageBuffer<Rgb<u8>, Vec<u8>> = ImageBuffer::from_raw(
            self.width as u32,
            self.height as u32,
            self.data.iter().flatten().map(|&v| quantize_u8(v)).collect(),
        )
        .expect("buffer length matches dimensions");
        encode_png(&buf)
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::image(path, e))?;
        let rgb = img.to_rgb16();
        let (w, h) = rgb.dimensions();
        let data = rgb
            .pixels()
            .map(|p| p.0.map(|c| c as f64 / 65535.0))
            .collect();
        RgbImage::from_vec(w as usize, h as usize, data)
    }
}

/// Per-pixel unit 3-vectors (surface normals, tangent-space convention:
/// `+z` points out of the surface towards the camera).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorMap {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl VectorMap {
    pub fn from_vec(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(VectorMap { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    /// `(n + 1) / 2` per component.
    pub fn encode_unit(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|n| n.map(|c| ((c + 1.0) * 0.5).clamp(0.0, 1.0)))
                .collect(),
        }
    }

    /// Inverse of [`VectorMap::encode_unit`], renormalizing each vector.
    pub fn decode_unit(img: &RgbImage) -> Self {
        VectorMap {
            width: img.width,
            height: img.height,
            data: img
                .data
                .iter()
                .map(|c| normalize3(c.map(|v| v * 2.0 - 1.0)).unwrap_or([0.0, 0.0, 1.0]))
                .collect(),
        }
    }
}

pub(crate) fn normalize3(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n > 0.0 && n.is_finite() {
        Some([v[0] / n, v[1] / n, v[2] / n])
    } else {
        None
    }
}

/// Binary segmentation map.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        BinaryMask {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(BinaryMask { width, height, data })
    }

    pub fn from_points(width: usize, height: usize, points: &[(usize, usize)]) -> Self {
        let mut m = BinaryMask::new(width, height);
        for &(x, y) in points {
            m.set(x, y, true);
        }
        m
    }

    /// Parses rows of `'1'`/`'0'` (or `'#'`/`'.'`) characters.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), width, "ragged ascii mask");
                r.chars().map(|c| c == '1' || c == '#')
            })
            .collect();
        BinaryMask::from_vec(width, height, data).expect("valid ascii mask")
    }

    pub fn to_ascii(&self) -> Vec<String> {
        self.data
            .chunks(self.width)
            .map(|row| row.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Out-of-bounds reads are `false`.
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> usize {
        self.data
            .iter()
            .zip(&other.data)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    pub fn positive_rate(&self) -> f64 {
        self.count() as f64 / self.data.len() as f64
    }

    pub fn require_same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }

    /// 8-bit gray PNG with values {0, 255}.
    pub fn encode_png(&self) -> Vec<u8> {
        let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(
            self.width as u32,
            self.height as u32,
            self.data.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        )
        .expect("buffer length matches dimensions");
        encode_png(&buf)
    }

    /// Any nonzero gray level counts as set.
    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::image(path, e))?;
        let g = img.to_luma8();
        let (w, h) = g.dimensions();
        BinaryMask::from_vec(
            w as usize,
            h as usize,
            g.into_raw().into_iter().map(|v| v > 0).collect(),
        )
    }
}

fn encode_png<P>(buf: &ImageBuffer<P, Vec<P::Subpixel>>) -> Vec<u8>
where
    P: image::Pixel + image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
{
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .expect("in-memory PNG encoding cannot fail");
    out.into_inner()
}
