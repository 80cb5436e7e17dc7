//! Pseudo-labels and the bookkeeping around them: label files, the
//! occluded-box size estimator, train/val/test splitting and statistics.

mod coco;
mod estimate;
mod split;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub(crate) use coco::box_from_xywh;
pub use coco::{read_label_set, write_label_set, ImageEntry, LabelSet, EXTENSION_KEY};
pub use estimate::{estimate_occluded_box, to_pixels, OccludedBoxEstimate, AVERAGE_HUMAN_HEIGHT_M, AVERAGE_HUMAN_WIDTH_M};
pub use split::{read_split, split, write_split, Split, SplitAssignment};
pub use stats::{stats, StatsTable};

use crate::corpus::{OccluderKind, Posture};
use crate::error::{Error, Result};
use crate::geometry::{OcclusionBucket, PixelBox};

pub const CATEGORY_NAME: &str = "pedestrian";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Oda,
    Pda,
    Manual,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::Oda, Generator::Pda, Generator::Manual];

    pub fn as_str(self) -> &'static str {
        match self {
            Generator::Oda => "oda",
            Generator::Pda => "pda",
            Generator::Manual => "manual",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oda" => Ok(Generator::Oda),
            "pda" => Ok(Generator::Pda),
            "manual" => Ok(Generator::Manual),
            other => Err(Error::UnknownGenerator(other.to_string())),
        }
    }
}

/// Where a label came from; every field is optional so hand-made labels fit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asset_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occluder_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_index: Option<u64>,
}

/// One pedestrian instance of ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoLabel {
    pub image_id: u64,
    pub bbox: PixelBox,
    pub bucket: OcclusionBucket,
    pub posture: Option<Posture>,
    pub occluder_kind: Option<OccluderKind>,
    pub generator: Generator,
    pub provenance: Provenance,
}

impl PseudoLabel {
    /// Checks the per-generator invariants against an image of the given size.
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        if self.bbox.x2() > width || self.bbox.y2() > height {
            return Err(Error::MalformedAnnotation(format!(
                "box {} leaves the {width}x{height} image {}",
                self.bbox, self.image_id
            )));
        }
        match self.generator {
            Generator::Oda if self.occluder_kind.is_none() => {
                Err(Error::MalformedAnnotation("ODA label without an occluder kind".into()))
            }
            Generator::Pda if self.posture.is_none() || self.bucket != OcclusionBucket::NOT_OCCLUDED => Err(
                Error::MalformedAnnotation("PDA label needs a posture and occlusion bucket 0".into()),
            ),
            _ => Ok(()),
        }
    }
}
