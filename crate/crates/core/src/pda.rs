//! Posture augmentation: paste a posture-varied pedestrian, fully visible,
//! standing on the background's freespace (drivable ground) mask.

use serde::{Deserialize, Serialize};

use crate::annotate::{Generator, Provenance, PseudoLabel};
use crate::corpus::{PedestrianAsset, RandomStream, SceneBackground};
use crate::error::{Error, Result};
use crate::geometry::{OcclusionBucket, Point};
use crate::raster::{fuse_into, resize_mask_and_pixels, BinaryMask, MaskCleanup, RasterImage};
use crate::record::{Placement, SyntheticRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdaParams {
    /// Uniform scale factor range `(lo, hi)` applied to the asset.
    pub scale_range: (f64, f64),
    /// Minimum fraction of the mask's bottom-row pixels whose ground pixel
    /// must be freespace. 1.0 demands the whole footing be on freespace.
    pub min_coverage: f64,
    pub retry_budget: u32,
    /// Pedestrians pasted per record.
    pub multiplicity: usize,
    pub cleanup: Option<MaskCleanup>,
}

impl Default for PdaParams {
    fn default() -> Self {
        Self {
            scale_range: (0.8, 1.2),
            min_coverage: 0.5,
            retry_budget: 16,
            multiplicity: 1,
            cleanup: None,
        }
    }
}

impl PdaParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.scale_range;
        let problem = if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            Some(format!("scale range must satisfy 0 < lo <= hi, got ({lo}, {hi})"))
        } else if !(self.min_coverage > 0.0 && self.min_coverage <= 1.0) {
            Some(format!("coverage fraction must lie in (0, 1], got {}", self.min_coverage))
        } else if self.retry_budget == 0 {
            Some("retry_budget must be at least 1".to_string())
        } else if self.multiplicity == 0 {
            Some("multiplicity must be at least 1".to_string())
        } else {
            None
        };
        problem.map_or(Ok(()), |p| Err(Error::InvalidParameter(p)))
    }
}

/// Top-left offset of a `footprint_w x footprint_h` box whose ground-contact
/// pixel `(x + footprint_w / 2, y + footprint_h)` is `ground`.
pub fn offset_for_anchor(ground: Point, footprint_w: u32, footprint_h: u32) -> Point {
    Point::new(ground.x - i64::from(footprint_w / 2), ground.y - i64::from(footprint_h))
}

fn footprint_fits(offset: Point, w: u32, h: u32, width: u32, height: u32) -> bool {
    offset.x >= 0
        && offset.y >= 0
        && offset.x + i64::from(w) <= i64::from(width)
        && offset.y + i64::from(h) <= i64::from(height)
}

/// Freespace pixels as row-major indices, for uniform sampling.
pub(crate) fn set_indices(m: &BinaryMask) -> Vec<u32> {
    m.bits()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u32)
        .collect()
}

fn sample_from(
    candidates: &[u32],
    width: u32,
    height: u32,
    footprint_w: u32,
    footprint_h: u32,
    budget: u32,
    rng: &mut RandomStream,
) -> Result<(Point, Point)> {
    if candidates.is_empty() {
        return Err(Error::PlacementInfeasible("freespace mask is empty".into()));
    }
    for _ in 0..budget {
        let i = candidates[rng.index(candidates.len())];
        let ground = Point::new(i64::from(i % width), i64::from(i / width));
        let offset = offset_for_anchor(ground, footprint_w, footprint_h);
        if footprint_fits(offset, footprint_w, footprint_h, width, height) {
            return Ok((offset, ground));
        }
    }
    Err(Error::PlacementInfeasible(format!(
        "no freespace anchor fits a {footprint_w}x{footprint_h} footprint within {budget} draws"
    )))
}

/// Draws a freespace pixel uniformly and returns the footprint offset that
/// stands on it, rejecting anchors whose footprint would leave the image.
pub fn sample_freespace_anchor(
    freespace: &BinaryMask,
    footprint_w: u32,
    footprint_h: u32,
    budget: u32,
    rng: &mut RandomStream,
) -> Result<Point> {
    let (w, h) = freespace.dims();
    if footprint_w == 0 || footprint_h == 0 || footprint_w > w || footprint_h > h {
        return Err(Error::PlacementInfeasible(format!(
            "footprint {footprint_w}x{footprint_h} does not fit a {w}x{h} image"
        )));
    }
    sample_from(&set_indices(freespace), w, h, footprint_w, footprint_h, budget, rng).map(|(offset, _)| offset)
}

/// Resizes an asset by a factor drawn uniformly from `params.scale_range`.
pub fn limited_rescale(
    asset: &PedestrianAsset,
    params: &PdaParams,
    rng: &mut RandomStream,
) -> Result<(RasterImage, BinaryMask)> {
    let (lo, hi) = params.scale_range;
    let s = if lo == hi { lo } else { rng.uniform_range(lo, hi) };
    let scaled = |v: u32| (f64::from(v) * s + 0.5).floor() as u32;
    let (new_w, new_h) = (scaled(asset.width()), scaled(asset.height()));
    if new_w == 0 || new_h == 0 {
        return Err(Error::DegenerateAsset {
            asset_id: asset.id().to_string(),
            reason: format!("scale {s:.3} shrinks it to {new_w}x{new_h}"),
        });
    }
    resize_mask_and_pixels(asset.pixels(), asset.mask(), new_w, new_h)
}

// Fraction of the mask's bottom-row pixels that stand on freespace.
fn footing_coverage(mask: &BinaryMask, offset: Point, freespace: &BinaryMask) -> f64 {
    let row = mask.height() - 1;
    let ground_y = offset.y + i64::from(mask.height());
    let (mut on, mut total) = (0u32, 0u32);
    for x in 0..mask.width() {
        if mask.get(x, row) {
            total += 1;
            on += u32::from(freespace.get_signed(offset.x + i64::from(x), ground_y));
        }
    }
    if total == 0 {
        0.0
    } else {
        f64::from(on) / f64::from(total)
    }
}

/// Generates one posture record on `bg`'s freespace.
pub fn generate_pda(
    bg: &SceneBackground,
    assets: &[PedestrianAsset],
    params: &PdaParams,
    rng: &mut RandomStream,
) -> Result<SyntheticRecord> {
    params.validate()?;
    let freespace = bg.freespace().ok_or_else(|| Error::MissingFreespace(bg.id().to_string()))?;
    if assets.is_empty() {
        return Err(Error::EmptyAssetPool);
    }
    let candidates = set_indices(freespace);
    let (width, height) = bg.pixels().dims();
    let mut image = bg.pixels().clone();
    let mut placements: Vec<Placement> = Vec::with_capacity(params.multiplicity);
    let mut occupied = BinaryMask::new(width, height)?;
    let mut failures = Vec::new();

    for _ in 0..params.multiplicity {
        let mut last_err = None;
        for _ in 0..params.retry_budget {
            let attempt = (|| -> Result<Placement> {
                let picked = &assets[rng.index(assets.len())];
                let asset = match &params.cleanup {
                    Some(c) => PedestrianAsset::new(
                        picked.id(),
                        picked.pixels(),
                        &c.apply(picked.mask())?,
                        picked.posture(),
                        picked.source(),
                    )?,
                    None => picked.clone(),
                };
                let (foreground, mask) = limited_rescale(&asset, params, rng)?;
                let (fw, fh) = mask.dims();
                if fw > width || fh > height {
                    return Err(Error::PlacementInfeasible(format!(
                        "rescaled asset {fw}x{fh} exceeds background {width}x{height}"
                    )));
                }
                let (offset, ground) = sample_from(&candidates, width, height, fw, fh, params.retry_budget, rng)?;
                let coverage = footing_coverage(&mask, offset, freespace);
                if coverage < params.min_coverage {
                    return Err(Error::PlacementInfeasible(format!(
                        "footing coverage {coverage:.2} below {}",
                        params.min_coverage
                    )));
                }
                let placed = mask.place(width, height, offset)?;
                if !placed.and(&occupied)?.is_empty() {
                    return Err(Error::PlacementInfeasible("overlaps an earlier pedestrian".into()));
                }
                Ok(Placement {
                    asset_id: asset.id().to_string(),
                    occluder_index: None,
                    offset,
                    resized: (fw, fh),
                    foreground,
                    visible: placed.clone(),
                    full_pixels: mask.population(),
                    placed,
                    occluded_count: 0,
                    bucket: OcclusionBucket::NOT_OCCLUDED,
                    anchor: Some(ground),
                })
            })();
            match attempt {
                Ok(p) => {
                    let local = crate::oda::local_view(&p.visible, p.offset, p.resized.0, p.resized.1)?;
                    fuse_into(&mut image, &p.foreground, &local, p.offset)?;
                    occupied = occupied.or(&p.placed)?;
                    placements.push(p);
                    last_err = None;
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        if let Some(e) = last_err {
            failures.push(e.to_string());
        }
    }

    if placements.is_empty() {
        let reasons = failures.join("; ");
        return Err(match failures.len() {
            0 => Error::GenerationFailed(format!("background {}", bg.id())),
            _ => Error::PlacementInfeasible(format!("background {}: {reasons}", bg.id())),
        });
    }

    let labels = placements
        .iter()
        .map(|p| {
            let asset = assets.iter().find(|a| a.id() == p.asset_id).expect("placed asset is in the pool");
            PseudoLabel {
                image_id: 0,
                bbox: p.placed.tight_box().expect("placed mask is non-empty"),
                bucket: OcclusionBucket::NOT_OCCLUDED,
                posture: Some(asset.posture()),
                occluder_kind: None,
                generator: Generator::Pda,
                provenance: Provenance {
                    asset_id: Some(p.asset_id.clone()),
                    background_id: Some(bg.id().to_string()),
                    ..Provenance::default()
                },
            }
        })
        .collect();

    Ok(SyntheticRecord {
        generator: Generator::Pda,
        background_id: bg.id().to_string(),
        image,
        labels,
        placements,
    })
}
