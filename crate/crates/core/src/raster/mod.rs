//! Pixel buffers: binary masks, RGB images, resampling and binary-alpha fusion.

mod io;
mod morphology;

pub use io::{encode_png, load_mask, load_rgb, load_rgba, save_mask, save_rgb, save_rgba, MASK_THRESHOLD};
pub use morphology::{dilate, erode, open, MaskCleanup, MorphOp, StructuringElement};

use crate::error::{Error, Result};
use crate::geometry::{PixelBox, Point};

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!("dimensions must be positive, got {width}x{height}")));
    }
    Ok(())
}

/// Row-major grid of set/unset pixels with a cached population count.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
    count: u64,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("population", &self.count)
            .finish()
    }
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
            count: 0,
        })
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if bits.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "bit buffer holds {} entries, expected {}",
                bits.len(),
                width as usize * height as usize
            )));
        }
        let count = bits.iter().filter(|&&b| b).count() as u64;
        Ok(Self {
            width,
            height,
            bits,
            count,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        check_dims(width, height)?;
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::from_bits(width, height, bits)
    }

    /// Mask with every pixel of `rect` set.
    pub fn from_box(width: u32, height: u32, rect: &PixelBox) -> Result<Self> {
        Self::from_fn(width, height, |x, y| rect.contains_pixel(x.into(), y.into()))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn population(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Like [`get`](Self::get) but out-of-bounds positions read as unset.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < i64::from(self.width) && y < i64::from(self.height) && self.get(x as u32, y as u32)
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let idx = y as usize * self.width as usize + x as usize;
        let old = std::mem::replace(&mut self.bits[idx], value);
        match (old, value) {
            (false, true) => self.count += 1,
            (true, false) => self.count -= 1,
            _ => {}
        }
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    /// Minimal box containing every set pixel.
    pub fn tight_box(&self) -> Option<PixelBox> {
        if self.count == 0 {
            return None;
        }
        let (mut x1, mut y1, mut x2, mut y2) = (u32::MAX, u32::MAX, 0, 0);
        for (x, y) in self.iter_set() {
            x1 = x1.min(x);
            y1 = y1.min(y);
            x2 = x2.max(x + 1);
            y2 = y2.max(y + 1);
        }
        PixelBox::new(x1.into(), y1.into(), x2.into(), y2.into()).ok()
    }

    fn zip_with(&self, other: &BinaryMask, op: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect();
        BinaryMask::from_bits(self.width, self.height, bits)
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    /// Pixels set in `self` and unset in `other`.
    pub fn and_not(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Copies the pixels covered by `rect`; fails if `rect` leaves the mask.
    pub fn crop(&self, rect: &PixelBox) -> Result<BinaryMask> {
        if rect.x2() > self.width || rect.y2() > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop box {rect} exceeds mask {}x{}",
                self.width, self.height
            )));
        }
        BinaryMask::from_fn(rect.width(), rect.height(), |x, y| self.get(rect.x1() + x, rect.y1() + y))
    }

    /// Translates the mask by `offset` onto a `width x height` canvas,
    /// dropping whatever falls outside.
    pub fn place(&self, width: u32, height: u32, offset: Point) -> Result<BinaryMask> {
        let mut out = BinaryMask::new(width, height)?;
        for (x, y) in self.iter_set() {
            let (cx, cy) = (i64::from(x) + offset.x, i64::from(y) + offset.y);
            if cx >= 0 && cy >= 0 && cx < i64::from(width) && cy < i64::from(height) {
                out.set(cx as u32, cy as u32, true);
            }
        }
        Ok(out)
    }
}

/// 8-bit RGB image, row-major, three bytes per pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

impl RasterImage {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: rgb.repeat(width as usize * height as usize),
        })
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width as usize * height as usize * 3 {
            return Err(Error::InvalidParameter(format!(
                "pixel buffer holds {} bytes, expected {}",
                data.len(),
                width as usize * height as usize * 3
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn put_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn crop(&self, rect: &PixelBox) -> Result<RasterImage> {
        if rect.x2() > self.width || rect.y2() > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop box {rect} exceeds image {}x{}",
                self.width, self.height
            )));
        }
        RasterImage::from_fn(rect.width(), rect.height(), |x, y| self.pixel(rect.x1() + x, rect.y1() + y))
    }
}

// Nearest-neighbour source index for output coordinate `i` (pixel centres).
#[inline]
fn nearest_source(i: u32, src: u32, dst: u32) -> u32 {
    (((2 * u64::from(i) + 1) * u64::from(src)) / (2 * u64::from(dst))) as u32
}

/// Nearest-neighbour resize of an asset's pixels and mask together.
///
/// A non-empty mask never resizes to an empty one: if sampling misses every
/// set pixel, the set pixel closest to the mask centroid is mapped into the
/// output.
pub fn resize_mask_and_pixels(
    pixels: &RasterImage,
    mask: &BinaryMask,
    new_w: u32,
    new_h: u32,
) -> Result<(RasterImage, BinaryMask)> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::InvalidParameter(format!("resize target {new_w}x{new_h} has a zero dimension")));
    }
    if pixels.dims() != mask.dims() {
        return Err(Error::DimensionMismatch {
            expected: pixels.dims(),
            actual: mask.dims(),
        });
    }
    let (src_w, src_h) = mask.dims();
    if (src_w, src_h) == (new_w, new_h) {
        return Ok((pixels.clone(), mask.clone()));
    }
    let xs: Vec<u32> = (0..new_w).map(|x| nearest_source(x, src_w, new_w)).collect();
    let ys: Vec<u32> = (0..new_h).map(|y| nearest_source(y, src_h, new_h)).collect();

    let out_pixels = RasterImage::from_fn(new_w, new_h, |x, y| pixels.pixel(xs[x as usize], ys[y as usize]))?;
    let mut out_mask = BinaryMask::from_fn(new_w, new_h, |x, y| mask.get(xs[x as usize], ys[y as usize]))?;

    if out_mask.is_empty() && !mask.is_empty() {
        let n = mask.population() as f64;
        let (sx, sy) = mask
            .iter_set()
            .fold((0.0, 0.0), |(ax, ay), (x, y)| (ax + f64::from(x), ay + f64::from(y)));
        let (cx, cy) = (sx / n, sy / n);
        let (px, py) = mask
            .iter_set()
            .min_by(|a, b| {
                let da = (f64::from(a.0) - cx).powi(2) + (f64::from(a.1) - cy).powi(2);
                let db = (f64::from(b.0) - cx).powi(2) + (f64::from(b.1) - cy).powi(2);
                da.total_cmp(&db)
            })
            .expect("mask is non-empty");
        let ox = ((u64::from(px) * u64::from(new_w)) / u64::from(src_w)) as u32;
        let oy = ((u64::from(py) * u64::from(new_h)) / u64::from(src_h)) as u32;
        out_mask.set(ox, oy, true);
        let mut out_pixels = out_pixels;
        out_pixels.put_pixel(ox, oy, pixels.pixel(px, py));
        return Ok((out_pixels, out_mask));
    }
    Ok((out_pixels, out_mask))
}

/// Pastes `fg` onto `bg` at `offset` wherever `visible` is set.
///
/// The blend weight is strictly binary: each output pixel is either the
/// foreground value or the untouched background value. Parts of the
/// footprint outside `bg` are dropped.
pub fn fuse(bg: &RasterImage, fg: &RasterImage, visible: &BinaryMask, offset: Point) -> Result<RasterImage> {
    let mut out = bg.clone();
    fuse_into(&mut out, fg, visible, offset)?;
    Ok(out)
}

/// In-place form of [`fuse`]; returns the number of pixels written.
pub fn fuse_into(bg: &mut RasterImage, fg: &RasterImage, visible: &BinaryMask, offset: Point) -> Result<u64> {
    if fg.dims() != visible.dims() {
        return Err(Error::DimensionMismatch {
            expected: fg.dims(),
            actual: visible.dims(),
        });
    }
    let (bw, bh) = (i64::from(bg.width), i64::from(bg.height));
    let x_lo = (-offset.x).clamp(0, i64::from(fg.width)) as u32;
    let x_hi = (bw - offset.x).clamp(0, i64::from(fg.width)) as u32;
    let y_lo = (-offset.y).clamp(0, i64::from(fg.height)) as u32;
    let y_hi = (bh - offset.y).clamp(0, i64::from(fg.height)) as u32;

    let mut written = 0u64;
    for y in y_lo..y_hi {
        for x in x_lo..x_hi {
            if visible.get(x, y) {
                let (bx, by) = ((i64::from(x) + offset.x) as u32, (i64::from(y) + offset.y) as u32);
                bg.put_pixel(bx, by, fg.pixel(x, y));
                written += 1;
            }
        }
    }
    if written == 0 {
        return Err(Error::EmptyFootprint);
    }
    Ok(written)
}
