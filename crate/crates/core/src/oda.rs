//! Occlusion augmentation: paste pedestrians just above annotated occluders
//! so the occluder hides the lower part of the body.
//!
//! Per record, `t` occluders are drawn without replacement. For each one a
//! random asset is resized to the occluder's height, its top-left corner is
//! placed at
//!
//! ```text
//! x = randint(x1, x2 - w')
//! y = y1 - randint(floor(lo * h_car), floor(hi * h_car))
//! ```
//!
//! and the occluder mask is carved out of the pasted mask before a
//! binary-alpha paste. A later pedestrian covers an earlier one where they
//! overlap, and every label is computed from the final visible pixels.

use serde::{Deserialize, Serialize};

use crate::annotate::{Generator, Provenance, PseudoLabel};
use crate::corpus::{PedestrianAsset, RandomStream, SceneBackground};
use crate::error::{Error, Result};
use crate::geometry::{bucket_of, occlusion_rate, OcclusionBucket, PixelBox, Point};
use crate::raster::{fuse_into, resize_mask_and_pixels, BinaryMask, MaskCleanup, RasterImage};
use crate::record::{Placement, SyntheticRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OdaParams {
    /// Reference body height in meters.
    pub human_height_m: f64,
    /// Reference body width in meters.
    pub human_width_m: f64,
    /// Fractions of the occluder height bounding how far above the occluder
    /// top the pedestrian's top edge sits.
    pub band: (f64, f64),
    /// Upper bound on occluders used per record.
    pub max_occluders: usize,
    /// Placement attempts per occluder before it is skipped.
    pub retry_budget: u32,
    /// Optional mask cleanup applied to each selected asset.
    pub cleanup: Option<MaskCleanup>,
}

impl Default for OdaParams {
    fn default() -> Self {
        Self {
            human_height_m: 1.7,
            human_width_m: 0.3,
            band: (0.2, 0.3),
            max_occluders: 3,
            retry_budget: 8,
            cleanup: None,
        }
    }
}

impl OdaParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.band;
        let problem = if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            Some(format!("band must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})"))
        } else if !(self.human_height_m > 0.0 && self.human_width_m > 0.0) {
            Some("reference body size must be positive".to_string())
        } else if self.max_occluders == 0 {
            Some("max_occluders must be at least 1".to_string())
        } else if self.retry_budget == 0 {
            Some("retry_budget must be at least 1".to_string())
        } else {
            None
        };
        problem.map_or(Ok(()), |p| Err(Error::InvalidParameter(p)))
    }
}

/// Resizes an asset so its height equals `h_car`, keeping the aspect ratio:
/// `w' = round_half_up(w * h_car / h)`.
pub fn occlusion_aware_scale(asset: &PedestrianAsset, h_car: u32) -> Result<(RasterImage, BinaryMask)> {
    if h_car == 0 {
        return Err(Error::InvalidParameter("occluder height must be at least 1".into()));
    }
    let (w, h) = (u64::from(asset.width()), u64::from(asset.height()));
    let new_w = (2 * w * u64::from(h_car) + h) / (2 * h);
    if new_w == 0 {
        return Err(Error::DegenerateAsset {
            asset_id: asset.id().to_string(),
            reason: format!("width rounds to 0 at height {h_car}"),
        });
    }
    let new_w = u32::try_from(new_w).map_err(|_| Error::InvalidParameter(format!("resized width {new_w} overflows")))?;
    resize_mask_and_pixels(asset.pixels(), asset.mask(), new_w, h_car)
}

/// Band bounds `[floor(lo * h_car), floor(hi * h_car)]` for the vertical lift.
pub fn lift_range(h_car: u32, band: (f64, f64)) -> (i64, i64) {
    let h = f64::from(h_car);
    ((band.0 * h).floor() as i64, (band.1 * h).floor() as i64)
}

/// Draws the paste offset for a resized pedestrian of width `resized_width`
/// above `car_box`. The returned `y` may be negative.
pub fn sample_offset(car_box: &PixelBox, resized_width: u32, band: (f64, f64), rng: &mut RandomStream) -> Result<Point> {
    if resized_width > car_box.width() {
        return Err(Error::PlacementInfeasible(format!(
            "pedestrian width {resized_width} exceeds occluder width {}",
            car_box.width()
        )));
    }
    let x = rng.randint(car_box.x1().into(), i64::from(car_box.x2()) - i64::from(resized_width));
    let (lo, hi) = lift_range(car_box.height(), band);
    let y = i64::from(car_box.y1()) - rng.randint(lo, hi);
    Ok(Point::new(x, y))
}

/// Splits a placed pedestrian mask into what stays visible in front of the
/// occluder and the count of pixels the occluder hides.
pub fn carve_occlusion(ped_mask_placed: &BinaryMask, car_mask: &BinaryMask) -> Result<(BinaryMask, u64)> {
    let visible = ped_mask_placed.and_not(car_mask)?;
    if visible.is_empty() {
        return Err(Error::FullyOccluded);
    }
    let occluded = ped_mask_placed.population() - visible.population();
    Ok((visible, occluded))
}

/// The part of a background-space mask that falls on a `w x h` foreground at `offset`.
pub(crate) fn local_view(canvas_mask: &BinaryMask, offset: Point, w: u32, h: u32) -> Result<BinaryMask> {
    BinaryMask::from_fn(w, h, |x, y| canvas_mask.get_signed(i64::from(x) + offset.x, i64::from(y) + offset.y))
}

fn bucket_for(visible: u64, full: u64) -> Result<OcclusionBucket> {
    bucket_of(occlusion_rate(visible, full)?)
}

fn cleaned(asset: &PedestrianAsset, cleanup: Option<&MaskCleanup>) -> Result<PedestrianAsset> {
    match cleanup {
        None => Ok(asset.clone()),
        Some(c) => PedestrianAsset::new(asset.id(), asset.pixels(), &c.apply(asset.mask())?, asset.posture(), asset.source()),
    }
}

/// Tries one placement above occluder `occ_idx`; on success returns the new
/// placement and the updated visible masks of earlier placements.
fn try_place(
    bg: &SceneBackground,
    occ_idx: usize,
    asset: &PedestrianAsset,
    params: &OdaParams,
    earlier: &[Placement],
    rng: &mut RandomStream,
) -> Result<(Placement, Vec<BinaryMask>)> {
    let occluder = &bg.occluders()[occ_idx];
    let car_box = occluder.bbox();
    let asset = cleaned(asset, params.cleanup.as_ref())?;
    let (foreground, mask) = occlusion_aware_scale(&asset, car_box.height())?;
    let offset = sample_offset(&car_box, mask.width(), params.band, rng)?;

    let placed = mask.place(bg.width(), bg.height(), offset)?;
    let (visible, _) = carve_occlusion(&placed, occluder.mask())?;
    let bucket = bucket_for(visible.population(), mask.population())?;

    // The new pedestrian is pasted on top of earlier ones.
    let mut updated = Vec::with_capacity(earlier.len());
    for p in earlier {
        let v = p.visible.and_not(&visible)?;
        if v.is_empty() {
            return Err(Error::PlacementInfeasible(format!("would hide earlier pedestrian {}", p.asset_id)));
        }
        bucket_for(v.population(), p.full_pixels)?;
        updated.push(v);
    }

    let occluded_count = placed.population() - visible.population();
    Ok((
        Placement {
            asset_id: asset.id().to_string(),
            occluder_index: Some(occ_idx),
            offset,
            resized: mask.dims(),
            foreground,
            placed,
            visible,
            full_pixels: mask.population(),
            occluded_count,
            bucket,
            anchor: None,
        },
        updated,
    ))
}

/// Generates one occlusion record from `bg`.
///
/// Placements that exhaust the retry budget are skipped; a record with no
/// successful placement is an error carrying every failure reason.
pub fn generate_oda(
    bg: &SceneBackground,
    assets: &[PedestrianAsset],
    params: &OdaParams,
    rng: &mut RandomStream,
) -> Result<SyntheticRecord> {
    params.validate()?;
    if assets.is_empty() {
        return Err(Error::EmptyAssetPool);
    }
    if bg.occluders().is_empty() {
        return Err(Error::NoOccluders(bg.id().to_string()));
    }
    let available = bg.occluders().len();
    let t = rng.randint(1, params.max_occluders.min(available) as i64) as usize;
    let chosen = rng.choose_distinct(available, t);

    let mut image = bg.pixels().clone();
    let mut placements: Vec<Placement> = Vec::with_capacity(t);
    let mut failures = Vec::new();

    for occ_idx in chosen {
        let mut last_err = None;
        for _ in 0..params.retry_budget {
            let asset = &assets[rng.index(assets.len())];
            match try_place(bg, occ_idx, asset, params, &placements, rng) {
                Ok((placement, updated)) => {
                    for (p, v) in placements.iter_mut().zip(updated) {
                        p.occluded_count = p.placed.population() - v.population();
                        p.bucket = bucket_for(v.population(), p.full_pixels)?;
                        p.visible = v;
                    }
                    let (w, h) = placement.resized;
                    let local = local_view(&placement.visible, placement.offset, w, h)?;
                    fuse_into(&mut image, &placement.foreground, &local, placement.offset)?;
                    placements.push(placement);
                    last_err = None;
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        if let Some(e) = last_err {
            failures.push(format!("occluder {occ_idx}: {e}"));
        }
    }

    if placements.is_empty() {
        return Err(Error::GenerationFailed(format!(
            "no placement succeeded on background {}: {}",
            bg.id(),
            failures.join("; ")
        )));
    }

    let labels = placements
        .iter()
        .map(|p| {
            let occ_idx = p.occluder_index.expect("ODA placements carry an occluder");
            let asset = assets.iter().find(|a| a.id() == p.asset_id).expect("placed asset is in the pool");
            PseudoLabel {
                image_id: 0,
                bbox: p.visible.tight_box().expect("visible mask is non-empty"),
                bucket: p.bucket,
                posture: Some(asset.posture()),
                occluder_kind: Some(bg.occluders()[occ_idx].kind()),
                generator: Generator::Oda,
                provenance: Provenance {
                    asset_id: Some(p.asset_id.clone()),
                    background_id: Some(bg.id().to_string()),
                    occluder_index: Some(occ_idx),
                    seed: None,
                    record_index: None,
                },
            }
        })
        .collect();

    Ok(SyntheticRecord {
        generator: Generator::Oda,
        background_id: bg.id().to_string(),
        image,
        labels,
        placements,
    })
}
