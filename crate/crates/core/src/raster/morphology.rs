//! Binary erosion, dilation and opening with a square structuring element.
//!
//! Window counts come from a summed-area table, so every operator is linear
//! in the mask size regardless of the element side.

use serde::{Deserialize, Serialize};

use super::BinaryMask;
use crate::error::{Error, Result};

/// Square footprint with an odd side length, centred on the output pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct StructuringElement(u32);

impl StructuringElement {
    pub fn new(side: u32) -> Result<Self> {
        if side == 0 || side.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "structuring element side must be odd and positive, got {side}"
            )));
        }
        Ok(Self(side))
    }

    pub fn side(self) -> u32 {
        self.0
    }

    fn radius(self) -> i64 {
        i64::from(self.0 / 2)
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self(3)
    }
}

impl TryFrom<u32> for StructuringElement {
    type Error = Error;

    fn try_from(side: u32) -> Result<Self> {
        Self::new(side)
    }
}

impl From<StructuringElement> for u32 {
    fn from(k: StructuringElement) -> u32 {
        k.0
    }
}

struct Integral {
    stride: usize,
    sums: Vec<u32>,
}

impl Integral {
    fn of(m: &BinaryMask) -> Self {
        let (w, h) = (m.width() as usize, m.height() as usize);
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += u32::from(m.bits()[y * w + x]);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { stride, sums }
    }

    /// Set-pixel count in the half-open window `[x0, x1) x [y0, y1)`.
    fn window(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> u32 {
        let s = self.stride;
        self.sums[y1 * s + x1] + self.sums[y0 * s + x0] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0]
    }
}

fn check_element(m: &BinaryMask, k: StructuringElement) -> Result<()> {
    if k.side() > m.width().min(m.height()) {
        return Err(Error::InvalidParameter(format!(
            "structuring element side {} exceeds mask {}x{}",
            k.side(),
            m.width(),
            m.height()
        )));
    }
    Ok(())
}

// Applies `keep(set_count_in_window, full_footprint_area)` at every pixel;
// out-of-bounds footprint pixels never contribute to the count.
fn window_op(m: &BinaryMask, k: StructuringElement, keep: impl Fn(u32, u32) -> bool) -> Result<BinaryMask> {
    check_element(m, k)?;
    let table = Integral::of(m);
    let (w, h) = (i64::from(m.width()), i64::from(m.height()));
    let r = k.radius();
    let full = k.side() * k.side();
    BinaryMask::from_fn(m.width(), m.height(), |x, y| {
        let (x, y) = (i64::from(x), i64::from(y));
        let x0 = (x - r).max(0) as usize;
        let y0 = (y - r).max(0) as usize;
        let x1 = (x + r + 1).min(w) as usize;
        let y1 = (y + r + 1).min(h) as usize;
        keep(table.window(x0, y0, x1, y1), full)
    })
}

/// A pixel survives iff the whole footprint around it is set; neighbours
/// outside the mask count as unset.
pub fn erode(m: &BinaryMask, k: StructuringElement) -> Result<BinaryMask> {
    window_op(m, k, |count, full| count == full)
}

/// A pixel is set iff any in-bounds pixel under the footprint is set.
pub fn dilate(m: &BinaryMask, k: StructuringElement) -> Result<BinaryMask> {
    window_op(m, k, |count, _| count > 0)
}

/// Dilation of the erosion with the same element.
pub fn open(m: &BinaryMask, k: StructuringElement) -> Result<BinaryMask> {
    dilate(&erode(m, k)?, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphOp {
    Open,
    Erode,
}

/// An ordered list of morphological passes sharing one element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskCleanup {
    pub steps: Vec<MorphOp>,
    pub element: StructuringElement,
}

impl Default for MaskCleanup {
    /// One OPEN followed by one ERODE with a 3x3 element.
    fn default() -> Self {
        Self {
            steps: vec![MorphOp::Open, MorphOp::Erode],
            element: StructuringElement::default(),
        }
    }
}

impl MaskCleanup {
    pub fn with_element(element: StructuringElement) -> Self {
        Self {
            element,
            ..Self::default()
        }
    }

    pub fn apply(&self, m: &BinaryMask) -> Result<BinaryMask> {
        let mut out = m.clone();
        for step in &self.steps {
            out = match step {
                MorphOp::Open => open(&out, self.element)?,
                MorphOp::Erode => erode(&out, self.element)?,
            };
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(side: u32) -> StructuringElement {
        StructuringElement::new(side).unwrap()
    }

    #[test]
    fn element_must_be_odd() {
        assert!(StructuringElement::new(0).is_err());
        assert!(StructuringElement::new(4).is_err());
        assert_eq!(StructuringElement::default().side(), 3);
    }

    #[test]
    fn erode_full_mask_keeps_interior() {
        let m = BinaryMask::from_fn(10, 10, |_, _| true).unwrap();
        let e = erode(&m, k(3)).unwrap();
        for y in 0..10 {
            for x in 0..10 {
                assert_eq!(e.get(x, y), (1..9).contains(&x) && (1..9).contains(&y));
            }
        }
        assert_eq!(e.population(), 64);
    }

    #[test]
    fn erode_single_pixel_vanishes() {
        let mut m = BinaryMask::new(5, 5).unwrap();
        m.set(2, 2, true);
        assert!(erode(&m, k(3)).unwrap().is_empty());
    }

    #[test]
    fn erode_plus_keeps_only_the_centre() {
        // 3x3 hub with one-pixel arms out to the border. Footprint scan by
        // hand: every interior pixel but the centre has an arm-side corner
        // pixel (e.g. (0, 1) for (1, 2)) that is unset.
        let plus = BinaryMask::from_fn(5, 5, |x, y| {
            x == 2 || y == 2 || ((1..4).contains(&x) && (1..4).contains(&y))
        })
        .unwrap();
        let e = erode(&plus, k(3)).unwrap();
        assert_eq!(e.population(), 1);
        assert!(e.get(2, 2));

        // a plain one-pixel-wide cross has no fully set 3x3 window at all
        let thin = BinaryMask::from_fn(5, 5, |x, y| x == 2 || y == 2).unwrap();
        assert!(erode(&thin, k(3)).unwrap().is_empty());
    }

    #[test]
    fn element_larger_than_mask_is_rejected() {
        let m = BinaryMask::new(4, 8).unwrap();
        assert!(erode(&m, k(5)).is_err());
        assert!(open(&m, k(5)).is_err());
    }

    #[test]
    fn open_examples() {
        let empty = BinaryMask::new(12, 12).unwrap();
        assert!(open(&empty, k(3)).unwrap().is_empty());

        let rect = BinaryMask::from_fn(20, 20, |x, y| (3..15).contains(&x) && (2..18).contains(&y)).unwrap();
        assert_eq!(open(&rect, k(3)).unwrap(), rect);

        let square = BinaryMask::from_fn(12, 12, |x, y| x < 10 && y < 10).unwrap();
        let mut speckled = square.clone();
        speckled.set(11, 11, true);
        assert_eq!(open(&speckled, k(3)).unwrap(), square);
    }

    #[test]
    fn default_cleanup_is_open_then_erode() {
        let m = BinaryMask::from_fn(16, 16, |x, y| (2..13).contains(&x) && (1..15).contains(&y) || (x, y) == (15, 0))
            .unwrap();
        let want = erode(&open(&m, k(3)).unwrap(), k(3)).unwrap();
        assert_eq!(MaskCleanup::default().apply(&m).unwrap(), want);
    }

    fn arb_mask() -> impl Strategy<Value = BinaryMask> {
        (3u32..20, 3u32..20).prop_flat_map(|(w, h)| {
            proptest::collection::vec(proptest::bool::weighted(0.6), (w * h) as usize)
                .prop_map(move |bits| BinaryMask::from_bits(w, h, bits).unwrap())
        })
    }

    proptest! {
        #[test]
        fn erode_is_subset(m in arb_mask()) {
            prop_assert!(erode(&m, k(3)).unwrap().is_subset_of(&m));
        }

        #[test]
        fn open_within_dilation_and_idempotent(m in arb_mask()) {
            let o = open(&m, k(3)).unwrap();
            prop_assert!(o.is_subset_of(&dilate(&m, k(3)).unwrap()));
            prop_assert!(o.is_subset_of(&m));
            prop_assert_eq!(open(&o, k(3)).unwrap(), o);
        }
    }
}
