//! The corpus manifest: one JSON document naming every asset and background.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "master_seed": 7,
//!   "assets": [
//!     { "id": "walker", "image": "assets/walker.png", "mask": "assets/walker_mask.png",
//!       "posture": "standing", "source": "real_cutout" }
//!   ],
//!   "backgrounds": [
//!     { "id": "lot-01", "image": "bg/lot01.png",
//!       "occluders": [
//!         { "kind": "car_front", "polygon": [[10, 20], [40, 20], [40, 50]] },
//!         { "kind": "cube_obstacle", "mask": "bg/lot01_pillar.png" }
//!       ],
//!       "freespace": "bg/lot01_free.png" }
//!   ]
//! }
//! ```
//!
//! Paths are relative to the manifest's directory. An asset without `mask`
//! takes its mask from the image's alpha channel.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::assets::{AssetSource, OccluderKind, OccluderRegion, PedestrianAsset, Posture, SceneBackground};
use crate::error::{Error, Result};
use crate::raster::{self, BinaryMask};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawManifest {
    schema_version: u32,
    master_seed: u64,
    #[serde(default)]
    assets: Vec<RawAsset>,
    #[serde(default)]
    backgrounds: Vec<RawBackground>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawAsset {
    id: String,
    image: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<String>,
    posture: String,
    source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawOccluder {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polygon: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawBackground {
    id: String,
    image: String,
    #[serde(default)]
    occluders: Vec<RawOccluder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    freespace: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssetEntry {
    pub id: String,
    pub image: PathBuf,
    pub mask: Option<PathBuf>,
    pub posture: Posture,
    pub source: AssetSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OccluderShape {
    /// Vertex list in pixel coordinates, rasterized at load.
    Polygon(Vec<[f64; 2]>),
    Mask(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccluderEntry {
    pub kind: OccluderKind,
    pub shape: OccluderShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundEntry {
    pub id: String,
    pub image: PathBuf,
    pub occluders: Vec<OccluderEntry>,
    pub freespace: Option<PathBuf>,
}

/// A validated manifest. Paths are kept relative to `base_dir`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusManifest {
    pub schema_version: u32,
    pub master_seed: u64,
    pub assets: Vec<AssetEntry>,
    pub backgrounds: Vec<BackgroundEntry>,
    pub base_dir: PathBuf,
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

impl CorpusManifest {
    pub fn resolve(&self, relative: &Path) -> PathBuf {
        self.base_dir.join(relative)
    }

    fn from_raw(raw: RawManifest, base_dir: PathBuf) -> Result<Self> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion(raw.schema_version));
        }
        let assets = raw
            .assets
            .into_iter()
            .map(|a| {
                Ok(AssetEntry {
                    posture: a.posture.parse()?,
                    source: a.source.parse()?,
                    image: a.image.into(),
                    mask: a.mask.map(PathBuf::from),
                    id: a.id,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let backgrounds = raw
            .backgrounds
            .into_iter()
            .map(|b| {
                let occluders = b
                    .occluders
                    .into_iter()
                    .enumerate()
                    .map(|(index, o)| {
                        let kind = o.kind.parse()?;
                        let malformed = |reason: &str| Error::MalformedPolygon {
                            background: b.id.clone(),
                            index,
                            reason: reason.to_string(),
                        };
                        let shape = match (o.polygon, o.mask) {
                            (Some(vertices), None) => OccluderShape::Polygon(parse_polygon(&vertices).map_err(|r| malformed(&r))?),
                            (None, Some(mask)) => OccluderShape::Mask(mask.into()),
                            (Some(_), Some(_)) => return Err(malformed("both `polygon` and `mask` given")),
                            (None, None) => return Err(malformed("needs a `polygon` or a `mask`")),
                        };
                        Ok(OccluderEntry { kind, shape })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(BackgroundEntry {
                    image: b.image.into(),
                    freespace: b.freespace.map(PathBuf::from),
                    occluders,
                    id: b.id,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = Self {
            schema_version: raw.schema_version,
            master_seed: raw.master_seed,
            assets,
            backgrounds,
            base_dir,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    fn to_raw(&self) -> RawManifest {
        RawManifest {
            schema_version: self.schema_version,
            master_seed: self.master_seed,
            assets: self
                .assets
                .iter()
                .map(|a| RawAsset {
                    id: a.id.clone(),
                    image: path_string(&a.image),
                    mask: a.mask.as_deref().map(path_string),
                    posture: a.posture.to_string(),
                    source: a.source.to_string(),
                })
                .collect(),
            backgrounds: self
                .backgrounds
                .iter()
                .map(|b| RawBackground {
                    id: b.id.clone(),
                    image: path_string(&b.image),
                    occluders: b
                        .occluders
                        .iter()
                        .map(|o| {
                            let (polygon, mask) = match &o.shape {
                                OccluderShape::Polygon(v) => (Some(v.iter().map(|p| p.to_vec()).collect()), None),
                                OccluderShape::Mask(p) => (None, Some(path_string(p))),
                            };
                            RawOccluder {
                                kind: o.kind.to_string(),
                                polygon,
                                mask,
                            }
                        })
                        .collect(),
                    freespace: b.freespace.as_deref().map(path_string),
                })
                .collect(),
        }
    }

    /// Checks id uniqueness and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for a in &self.assets {
            if !seen.insert(a.id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "asset",
                    id: a.id.clone(),
                });
            }
        }
        seen.clear();
        for b in &self.backgrounds {
            if !seen.insert(b.id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "background",
                    id: b.id.clone(),
                });
            }
        }
        let asset_files = self.assets.iter().flat_map(|a| std::iter::once(&a.image).chain(a.mask.as_ref()));
        let background_files = self.backgrounds.iter().flat_map(|b| {
            std::iter::once(&b.image)
                .chain(b.freespace.as_ref())
                .chain(b.occluders.iter().filter_map(|o| match &o.shape {
                    OccluderShape::Mask(p) => Some(p),
                    OccluderShape::Polygon(_) => None,
                }))
        });
        for rel in asset_files.chain(background_files) {
            let full = self.resolve(rel);
            if !full.is_file() {
                return Err(Error::MissingFile(full));
            }
        }
        Ok(())
    }
}

fn parse_polygon(vertices: &[Vec<f64>]) -> std::result::Result<Vec<[f64; 2]>, String> {
    if vertices.len() < 3 {
        return Err(format!("polygon has {} vertices, need at least 3", vertices.len()));
    }
    vertices
        .iter()
        .enumerate()
        .map(|(i, v)| match v.as_slice() {
            [x, y] if x.is_finite() && y.is_finite() => Ok([*x, *y]),
            _ => Err(format!("vertex {i} is not a finite [x, y] pair")),
        })
        .collect()
}

/// Reads and fully validates a manifest.
pub fn load_manifest(path: &Path) -> Result<CorpusManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let raw: RawManifest = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    CorpusManifest::from_raw(raw, base_dir)
}

/// Writes the manifest as pretty JSON; paths are stored as given, so they
/// stay relative to the directory the manifest was loaded from.
pub fn save_manifest(manifest: &CorpusManifest, path: &Path) -> Result<()> {
    let json = serde_json::to_vec_pretty(&manifest.to_raw()).map_err(|e| Error::json(path, e))?;
    crate::fsutil::write_atomic(path, &json)
}

/// Fills pixels whose centre lies inside the polygon (even-odd rule).
pub fn rasterize_polygon(width: u32, height: u32, vertices: &[[f64; 2]]) -> Result<BinaryMask> {
    let n = vertices.len();
    BinaryMask::from_fn(width, height, |x, y| {
        let (px, py) = (f64::from(x) + 0.5, f64::from(y) + 0.5);
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let ([xi, yi], [xj, yj]) = (vertices[i], vertices[j]);
            if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    })
}

/// Every asset and background of a manifest, decoded into memory.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub assets: Vec<PedestrianAsset>,
    pub backgrounds: Vec<SceneBackground>,
    pub master_seed: u64,
}

impl Corpus {
    pub fn load(manifest: &CorpusManifest) -> Result<Self> {
        let assets = manifest
            .assets
            .iter()
            .map(|a| {
                let (pixels, alpha) = raster::load_rgba(&manifest.resolve(&a.image))?;
                let mask = match &a.mask {
                    Some(p) => raster::load_mask(&manifest.resolve(p))?,
                    None => alpha.ok_or_else(|| Error::DegenerateAsset {
                        asset_id: a.id.clone(),
                        reason: "no mask file and the image has no alpha channel".into(),
                    })?,
                };
                PedestrianAsset::new(a.id.clone(), &pixels, &mask, a.posture, a.source)
            })
            .collect::<Result<Vec<_>>>()?;

        let backgrounds = manifest
            .backgrounds
            .iter()
            .map(|b| {
                let pixels = raster::load_rgb(&manifest.resolve(&b.image))?;
                let (w, h) = pixels.dims();
                let occluders = b
                    .occluders
                    .iter()
                    .enumerate()
                    .map(|(index, o)| {
                        let mask = match &o.shape {
                            OccluderShape::Polygon(v) => rasterize_polygon(w, h, v)?,
                            OccluderShape::Mask(p) => raster::load_mask(&manifest.resolve(p))?,
                        };
                        if mask.is_empty() {
                            return Err(Error::MalformedPolygon {
                                background: b.id.clone(),
                                index,
                                reason: "occluder covers no pixel of the image".into(),
                            });
                        }
                        OccluderRegion::new(o.kind, mask)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let freespace = b
                    .freespace
                    .as_ref()
                    .map(|p| raster::load_mask(&manifest.resolve(p)))
                    .transpose()?;
                SceneBackground::new(b.id.clone(), pixels, occluders, freespace)
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            assets,
            backgrounds,
            master_seed: manifest.master_seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::RasterImage;

    fn write_png(dir: &Path, name: &str, w: u32, h: u32) {
        let img = RasterImage::filled(w, h, [10, 20, 30]).unwrap();
        let mask = BinaryMask::from_fn(w, h, |x, y| x > 0 && y > 0).unwrap();
        raster::save_rgba(&img, &mask, &dir.join(name)).unwrap();
    }

    fn manifest_json(assets: &str, backgrounds: &str) -> String {
        format!(r#"{{"schema_version": 1, "master_seed": 3, "assets": [{assets}], "backgrounds": [{backgrounds}]}}"#)
    }

    fn write_manifest(dir: &Path, json: &str) -> PathBuf {
        let p = dir.join("manifest.json");
        std::fs::write(&p, json).unwrap();
        p
    }

    #[test]
    fn empty_asset_list_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let m = load_manifest(&write_manifest(dir.path(), &manifest_json("", ""))).unwrap();
        assert!(m.assets.is_empty());
        assert_eq!(m.master_seed, 3);
    }

    #[test]
    fn duplicate_asset_id_is_named() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "a.png", 4, 8);
        let asset = r#"{"id": "dup", "image": "a.png", "posture": "standing", "source": "real_cutout"}"#;
        let p = write_manifest(dir.path(), &manifest_json(&format!("{asset}, {asset}"), ""));
        let err = load_manifest(&p).unwrap_err();
        assert!(matches!(&err, Error::DuplicateId { kind: "asset", id } if id == "dup"));
        assert!(err.to_string().contains("dup"));
    }

    #[test]
    fn distinct_errors_for_bad_entries() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "a.png", 4, 8);
        let cases = [
            (
                manifest_json(r#"{"id": "x", "image": "missing.png", "posture": "standing", "source": "real_cutout"}"#, ""),
                "missing",
            ),
            (
                manifest_json(r#"{"id": "x", "image": "a.png", "posture": "jumping", "source": "real_cutout"}"#, ""),
                "posture",
            ),
            (
                manifest_json("", r#"{"id": "b", "image": "a.png", "occluders": [{"kind": "truck", "polygon": [[0,0],[1,0],[1,1]]}]}"#),
                "kind",
            ),
            (
                manifest_json("", r#"{"id": "b", "image": "a.png", "occluders": [{"kind": "car_front", "polygon": [[0,0],[1,0]]}]}"#),
                "polygon",
            ),
            (
                manifest_json("", r#"{"id": "b", "image": "a.png", "occluders": [{"kind": "car_front", "polygon": [[0,0],[1],[1,1]]}]}"#),
                "polygon",
            ),
        ];
        for (json, what) in cases {
            let err = load_manifest(&write_manifest(dir.path(), &json)).unwrap_err();
            let ok = match what {
                "missing" => matches!(err, Error::MissingFile(_)),
                "posture" => matches!(err, Error::UnknownPosture(_)),
                "kind" => matches!(err, Error::UnknownOccluderKind(_)),
                _ => matches!(err, Error::MalformedPolygon { .. }),
            };
            assert!(ok, "{what}: got {err}");
        }
    }

    #[test]
    fn round_trip_three_assets_two_backgrounds() {
        let dir = tempfile::tempdir().unwrap();
        for n in ["a0.png", "a1.png", "a2.png", "bg0.png", "bg1.png", "free.png", "pillar.png"] {
            write_png(dir.path(), n, 16, 12);
        }
        let assets = [
            r#"{"id": "a0", "image": "a0.png", "posture": "standing", "source": "real_cutout"}"#,
            r#"{"id": "a1", "image": "a1.png", "mask": "a1.png", "posture": "lying_down", "source": "synthesized_pose"}"#,
            r#"{"id": "a2", "image": "a2.png", "posture": "squatting", "source": "synthesized_pose"}"#,
        ]
        .join(",");
        let bgs = [
            r#"{"id": "b0", "image": "bg0.png", "occluders": [{"kind": "car_front", "polygon": [[1,1],[10.5,1],[10.5,8],[1,8]]}], "freespace": "free.png"}"#,
            r#"{"id": "b1", "image": "bg1.png", "occluders": [{"kind": "cube_obstacle", "mask": "pillar.png"}, {"kind": "car_rear", "polygon": [[0,0],[5,0],[0,5]]}]}"#,
        ]
        .join(",");
        let first = load_manifest(&write_manifest(dir.path(), &manifest_json(&assets, &bgs))).unwrap();
        let saved = dir.path().join("saved.json");
        save_manifest(&first, &saved).unwrap();
        let second = load_manifest(&saved).unwrap();
        assert_eq!(first, second);

        let corpus = Corpus::load(&second).unwrap();
        assert_eq!(corpus.assets.len(), 3);
        assert_eq!(corpus.backgrounds[1].occluders().len(), 2);
        assert!(corpus.backgrounds[0].freespace().is_some());
    }

    #[test]
    fn polygon_rasterization_uses_pixel_centres() {
        let m = rasterize_polygon(10, 10, &[[2.0, 3.0], [6.0, 3.0], [6.0, 7.0], [2.0, 7.0]]).unwrap();
        assert_eq!(m.population(), 16);
        assert_eq!(m.tight_box(), Some(crate::geometry::PixelBox::new(2, 3, 6, 7).unwrap()));
        // right triangle with legs of 4: centres strictly below the hypotenuse
        let t = rasterize_polygon(10, 10, &[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]]).unwrap();
        let brute = (0..4).flat_map(|y| (0..4).map(move |x| (x, y))).filter(|&(x, y)| x as f64 + y as f64 + 1.0 < 4.0).count();
        assert_eq!(t.population(), brute as u64);
    }
}
