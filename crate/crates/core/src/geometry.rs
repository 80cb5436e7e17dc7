//! Integer pixel geometry: boxes, overlap, IoU and the occlusion taxonomy.
//!
//! Coordinates follow image convention: origin at the top-left corner, x
//! grows right, y grows down. Right and bottom edges are exclusive, so a box
//! `(x1, y1, x2, y2)` covers the pixels `x1..x2` by `y1..y2` and its area is
//! `(x2 - x1) * (y2 - y1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest occlusion rate admitted by the ten-class taxonomy.
pub const MAX_OCCLUSION_RATE: f64 = 0.99;

/// Number of occlusion classes, from "not occluded" up to 99%.
pub const BUCKET_COUNT: usize = 10;

/// Axis-aligned pixel box with exclusive right/bottom edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 4]", into = "[u32; 4]")]
pub struct PixelBox {
    x1: u32,
    y1: u32,
    x2: u32,
    y2: u32,
}

impl PixelBox {
    pub fn new(x1: i64, y1: i64, x2: i64, y2: i64) -> Result<Self> {
        let in_range = |v: i64| (0..=i64::from(u32::MAX)).contains(&v);
        if x2 <= x1 || y2 <= y1 || ![x1, y1, x2, y2].into_iter().all(in_range) {
            return Err(Error::InvalidBox { x1, y1, x2, y2 });
        }
        Ok(Self {
            x1: x1 as u32,
            y1: y1 as u32,
            x2: x2 as u32,
            y2: y2 as u32,
        })
    }

    /// Builds a box from a top-left corner and a size, as in COCO `[x, y, w, h]`.
    pub fn from_xywh(x: i64, y: i64, w: i64, h: i64) -> Result<Self> {
        Self::new(x, y, x + w, y + h)
    }

    pub fn x1(&self) -> u32 {
        self.x1
    }

    pub fn y1(&self) -> u32 {
        self.y1
    }

    pub fn x2(&self) -> u32 {
        self.x2
    }

    pub fn y2(&self) -> u32 {
        self.y2
    }

    pub fn width(&self) -> u32 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> u32 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn to_xywh(&self) -> [u32; 4] {
        [self.x1, self.y1, self.width(), self.height()]
    }

    pub fn contains_pixel(&self, x: i64, y: i64) -> bool {
        x >= i64::from(self.x1) && x < i64::from(self.x2) && y >= i64::from(self.y1) && y < i64::from(self.y2)
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains_box(&self, other: &PixelBox) -> bool {
        other.x1 >= self.x1 && other.y1 >= self.y1 && other.x2 <= self.x2 && other.y2 <= self.y2
    }

    /// Largest box inside both, or `None` when they share no pixel.
    pub fn intersect(&self, other: &PixelBox) -> Option<PixelBox> {
        let x1 = self.x1.max(other.x1);
        let y1 = self.y1.max(other.y1);
        let x2 = self.x2.min(other.x2);
        let y2 = self.y2.min(other.y2);
        (x2 > x1 && y2 > y1).then_some(PixelBox { x1, y1, x2, y2 })
    }

    /// Intersection and union pixel counts.
    pub fn overlap_counts(&self, other: &PixelBox) -> (u64, u64) {
        let inter = self.intersect(other).map_or(0, |b| b.area());
        (inter, self.area() + other.area() - inter)
    }

    pub fn iou(&self, other: &PixelBox) -> f64 {
        let (inter, union) = self.overlap_counts(other);
        inter as f64 / union as f64
    }
}

impl fmt::Display for PixelBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.y1, self.x2, self.y2)
    }
}

impl TryFrom<[u32; 4]> for PixelBox {
    type Error = Error;

    fn try_from([x1, y1, x2, y2]: [u32; 4]) -> Result<Self> {
        PixelBox::new(x1.into(), y1.into(), x2.into(), y2.into())
    }
}

impl From<PixelBox> for [u32; 4] {
    fn from(b: PixelBox) -> Self {
        [b.x1, b.y1, b.x2, b.y2]
    }
}

pub fn box_area(b: &PixelBox) -> u64 {
    b.area()
}

pub fn intersect(a: &PixelBox, b: &PixelBox) -> Option<PixelBox> {
    a.intersect(b)
}

pub fn iou(a: &PixelBox, b: &PixelBox) -> f64 {
    a.iou(b)
}

/// Signed pixel position; paste offsets may leave the image on the top or left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

/// Fraction of a pedestrian hidden from view: `1 - visible / full`.
pub fn occlusion_rate(visible_pixels: u64, full_pixels: u64) -> Result<f64> {
    if full_pixels == 0 {
        return Err(Error::DegenerateMask);
    }
    if visible_pixels > full_pixels {
        return Err(Error::InvalidParameter(format!(
            "visible pixel count {visible_pixels} exceeds full count {full_pixels}"
        )));
    }
    Ok(1.0 - visible_pixels as f64 / full_pixels as f64)
}

/// One of the ten occlusion classes; class `k` starts at `10 * k` percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct OcclusionBucket(u8);

impl OcclusionBucket {
    pub const NOT_OCCLUDED: OcclusionBucket = OcclusionBucket(0);

    pub fn new(index: u8) -> Result<Self> {
        if usize::from(index) < BUCKET_COUNT {
            Ok(Self(index))
        } else {
            Err(Error::InvalidParameter(format!("occlusion bucket {index} out of range 0..=9")))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn lower_percent(self) -> u32 {
        u32::from(self.0) * 10
    }

    pub fn all() -> impl Iterator<Item = OcclusionBucket> {
        (0..BUCKET_COUNT as u8).map(OcclusionBucket)
    }
}

impl TryFrom<u8> for OcclusionBucket {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        OcclusionBucket::new(v)
    }
}

impl From<OcclusionBucket> for u8 {
    fn from(b: OcclusionBucket) -> u8 {
        b.0
    }
}

impl fmt::Display for OcclusionBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            f.write_str("not occluded")
        } else {
            write!(f, "{}%", self.lower_percent())
        }
    }
}

/// Maps a rate to its class with `floor(10 * rate)` clamped to 9.
///
/// Rates above 0.99 fall outside the taxonomy and are rejected with
/// [`Error::OcclusionOverCap`] so the caller can resample.
pub fn bucket_of(rate: f64) -> Result<OcclusionBucket> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidParameter(format!("occlusion rate {rate} outside [0, 1]")));
    }
    if rate > MAX_OCCLUSION_RATE {
        return Err(Error::OcclusionOverCap { rate });
    }
    let index = ((rate * 10.0).floor() as u8).min(BUCKET_COUNT as u8 - 1);
    Ok(OcclusionBucket(index))
}
