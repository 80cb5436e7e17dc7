//! COCO-style label files.
//!
//! Boxes are written as `[x, y, width, height]` in whole pixels, where
//! `x + width` and `y + height` are the exclusive right and bottom edges.
//! Fields COCO has no slot for (occlusion bucket, posture, occluder kind,
//! generator, provenance) live under the [`EXTENSION_KEY`] object of each
//! annotation. Annotations without it are read as manual, unoccluded labels.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Generator, Provenance, PseudoLabel, CATEGORY_NAME};
use crate::corpus::{OccluderKind, Posture};
use crate::error::{Error, Result};
use crate::geometry::{OcclusionBucket, PixelBox};

pub const EXTENSION_KEY: &str = "parkaug";
const CATEGORY_ID: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

/// Images plus their labels; the in-memory form of one label file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet {
    pub images: Vec<ImageEntry>,
    pub labels: Vec<PseudoLabel>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct CocoInfo {
    description: String,
    version: String,
    box_convention: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoCategory {
    id: u64,
    name: String,
    #[serde(default)]
    supercategory: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Extension {
    occlusion_bucket: OcclusionBucket,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    posture: Option<Posture>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    occluder_kind: Option<OccluderKind>,
    generator: Generator,
    #[serde(default)]
    provenance: Provenance,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoAnnotation {
    id: u64,
    image_id: u64,
    category_id: u64,
    bbox: [f64; 4],
    #[serde(default)]
    area: f64,
    #[serde(default)]
    iscrowd: u8,
    #[serde(rename = "parkaug", default, skip_serializing_if = "Option::is_none")]
    extension: Option<Extension>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    info: Option<CocoInfo>,
    images: Vec<ImageEntry>,
    annotations: Vec<CocoAnnotation>,
    #[serde(default)]
    categories: Vec<CocoCategory>,
}

/// Rounds a possibly fractional `[x, y, w, h]` to a pixel box.
pub(crate) fn box_from_xywh(xywh: [f64; 4]) -> Result<PixelBox> {
    let [x, y, w, h] = xywh;
    if !xywh.iter().all(|v| v.is_finite()) {
        return Err(Error::MalformedAnnotation(format!("non-finite bbox {xywh:?}")));
    }
    let (x1, y1) = (x.round() as i64, y.round() as i64);
    let (x2, y2) = ((x + w).round() as i64, (y + h).round() as i64);
    PixelBox::new(x1, y1, x2, y2).map_err(|_| Error::MalformedAnnotation(format!("degenerate bbox {xywh:?}")))
}

impl LabelSet {
    fn to_coco(&self) -> CocoFile {
        let annotations = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let [x, y, w, h] = l.bbox.to_xywh();
                CocoAnnotation {
                    id: i as u64 + 1,
                    image_id: l.image_id,
                    category_id: CATEGORY_ID,
                    bbox: [x, y, w, h].map(f64::from),
                    area: l.bbox.area() as f64,
                    iscrowd: 0,
                    extension: Some(Extension {
                        occlusion_bucket: l.bucket,
                        posture: l.posture,
                        occluder_kind: l.occluder_kind,
                        generator: l.generator,
                        provenance: l.provenance.clone(),
                    }),
                }
            })
            .collect();
        CocoFile {
            info: Some(CocoInfo {
                description: "synthetic parking-scene pedestrians".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                box_convention: "bbox = [x, y, width, height] in pixels; x + width and y + height are exclusive".into(),
            }),
            images: self.images.clone(),
            annotations,
            categories: vec![CocoCategory {
                id: CATEGORY_ID,
                name: CATEGORY_NAME.into(),
                supercategory: "person".into(),
            }],
        }
    }

    fn from_coco(file: CocoFile) -> Result<Self> {
        let labels = file
            .annotations
            .into_iter()
            .map(|a| {
                let bbox = box_from_xywh(a.bbox)?;
                let label = match a.extension {
                    Some(ext) => PseudoLabel {
                        image_id: a.image_id,
                        bbox,
                        bucket: ext.occlusion_bucket,
                        posture: ext.posture,
                        occluder_kind: ext.occluder_kind,
                        generator: ext.generator,
                        provenance: ext.provenance,
                    },
                    None => PseudoLabel {
                        image_id: a.image_id,
                        bbox,
                        bucket: OcclusionBucket::NOT_OCCLUDED,
                        posture: None,
                        occluder_kind: None,
                        generator: Generator::Manual,
                        provenance: Provenance::default(),
                    },
                };
                Ok(label)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            images: file.images,
            labels,
        })
    }
}

pub fn write_label_set(set: &LabelSet, path: &Path) -> Result<()> {
    let json = serde_json::to_vec_pretty(&set.to_coco()).map_err(|e| Error::json(path, e))?;
    crate::fsutil::write_atomic(path, &json)
}

pub fn read_label_set(path: &Path) -> Result<LabelSet> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let file: CocoFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    LabelSet::from_coco(file)
}
