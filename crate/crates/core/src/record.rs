use crate::annotate::{Generator, PseudoLabel};
use crate::geometry::{OcclusionBucket, Point};
use crate::raster::{BinaryMask, RasterImage};

/// One pasted pedestrian, with the masks needed to audit its label.
///
/// All masks are in background coordinates.
#[derive(Debug, Clone)]
pub struct Placement {
    pub asset_id: String,
    /// Occluder used for carving (ODA only).
    pub occluder_index: Option<usize>,
    /// Top-left of the resized asset; may lie outside the image.
    pub offset: Point,
    /// The resized asset pixels that were pasted, `resized.0 x resized.1`.
    pub foreground: RasterImage,
    pub resized: (u32, u32),
    /// Resized mask translated to `offset`, clipped to the image.
    pub placed: BinaryMask,
    /// Pixels of `placed` that show the pedestrian in the final image.
    pub visible: BinaryMask,
    /// Population of the resized mask before clipping.
    pub full_pixels: u64,
    pub occluded_count: u64,
    pub bucket: OcclusionBucket,
    /// Ground-contact pixel the footprint stands on (PDA only).
    pub anchor: Option<Point>,
}

impl Placement {
    /// `placed` minus `visible`: pixels hidden by an occluder or a later paste.
    pub fn occluded(&self) -> BinaryMask {
        self.placed.and_not(&self.visible).expect("masks share background dimensions")
    }
}

/// A composite image with its pseudo-labels, one label per placement.
#[derive(Debug, Clone)]
pub struct SyntheticRecord {
    pub generator: Generator,
    pub background_id: String,
    pub image: RasterImage,
    pub labels: Vec<PseudoLabel>,
    pub placements: Vec<Placement>,
}

impl SyntheticRecord {
    /// Sets image id and seed provenance on every label.
    pub fn stamp(&mut self, record_index: u64, seed: u64) {
        for l in &mut self.labels {
            l.image_id = record_index;
            l.provenance.record_index = Some(record_index);
            l.provenance.seed = Some(seed);
        }
    }
}
