use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PixelBox;
use crate::raster::{BinaryMask, RasterImage};

macro_rules! vocabulary {
    ($name:ident, $err:ident, { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::$err(other.to_string())),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

vocabulary!(Posture, UnknownPosture, {
    Standing => "standing",
    Sitting => "sitting",
    Squatting => "squatting",
    BendingOver => "bending_over",
    LyingDown => "lying_down",
});

vocabulary!(AssetSource, UnknownSource, {
    RealCutout => "real_cutout",
    SynthesizedPose => "synthesized_pose",
});

vocabulary!(OccluderKind, UnknownOccluderKind, {
    CarFront => "car_front",
    CarRear => "car_rear",
    CubeObstacle => "cube_obstacle",
});

/// A pedestrian cut-out, normalized to its tight box at construction.
///
/// `pixels` and `mask` cover exactly the tight box of the source mask, so the
/// asset's pixel width and height are the tight-box dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PedestrianAsset {
    id: String,
    pixels: RasterImage,
    mask: BinaryMask,
    source_box: PixelBox,
    posture: Posture,
    source: AssetSource,
}

impl PedestrianAsset {
    pub fn new(
        id: impl Into<String>,
        pixels: &RasterImage,
        mask: &BinaryMask,
        posture: Posture,
        source: AssetSource,
    ) -> Result<Self> {
        let id = id.into();
        if pixels.dims() != mask.dims() {
            return Err(Error::DimensionMismatch {
                expected: pixels.dims(),
                actual: mask.dims(),
            });
        }
        let source_box = mask.tight_box().ok_or_else(|| Error::DegenerateAsset {
            asset_id: id.clone(),
            reason: "mask has no set pixels".into(),
        })?;
        Ok(Self {
            pixels: pixels.crop(&source_box)?,
            mask: mask.crop(&source_box)?,
            id,
            source_box,
            posture,
            source,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn pixels(&self) -> &RasterImage {
        &self.pixels
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    /// Tight box of the mask in the asset's own (cropped) coordinates.
    pub fn tight_box(&self) -> PixelBox {
        PixelBox::new(0, 0, self.mask.width().into(), self.mask.height().into()).expect("mask dims are positive")
    }

    /// Tight box in the coordinates of the image the asset was cut from.
    pub fn source_box(&self) -> PixelBox {
        self.source_box
    }

    pub fn width(&self) -> u32 {
        self.mask.width()
    }

    pub fn height(&self) -> u32 {
        self.mask.height()
    }

    pub fn posture(&self) -> Posture {
        self.posture
    }

    pub fn source(&self) -> AssetSource {
        self.source
    }
}

/// An annotated object in a background that can hide a pasted pedestrian.
#[derive(Debug, Clone, PartialEq)]
pub struct OccluderRegion {
    kind: OccluderKind,
    mask: BinaryMask,
    bbox: PixelBox,
}

impl OccluderRegion {
    pub fn new(kind: OccluderKind, mask: BinaryMask) -> Result<Self> {
        let bbox = mask
            .tight_box()
            .ok_or_else(|| Error::InvalidParameter(format!("{kind} occluder mask is empty")))?;
        Ok(Self { kind, mask, bbox })
    }

    pub fn kind(&self) -> OccluderKind {
        self.kind
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn bbox(&self) -> PixelBox {
        self.bbox
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneBackground {
    id: String,
    pixels: RasterImage,
    occluders: Vec<OccluderRegion>,
    freespace: Option<BinaryMask>,
}

impl SceneBackground {
    pub fn new(
        id: impl Into<String>,
        pixels: RasterImage,
        occluders: Vec<OccluderRegion>,
        freespace: Option<BinaryMask>,
    ) -> Result<Self> {
        let dims = pixels.dims();
        for m in occluders.iter().map(|o| &o.mask).chain(freespace.as_ref()) {
            if m.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    actual: m.dims(),
                });
            }
        }
        Ok(Self {
            id: id.into(),
            pixels,
            occluders,
            freespace,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn pixels(&self) -> &RasterImage {
        &self.pixels
    }

    pub fn occluders(&self) -> &[OccluderRegion] {
        &self.occluders
    }

    pub fn freespace(&self) -> Option<&BinaryMask> {
        self.freespace.as_ref()
    }

    pub fn width(&self) -> u32 {
        self.pixels.width()
    }

    pub fn height(&self) -> u32 {
        self.pixels.height()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabularies_parse_and_reject() {
        assert_eq!("bending_over".parse::<Posture>().unwrap(), Posture::BendingOver);
        assert_eq!("cube_obstacle".parse::<OccluderKind>().unwrap(), OccluderKind::CubeObstacle);
        assert!(matches!("dancing".parse::<Posture>(), Err(Error::UnknownPosture(s)) if s == "dancing"));
        assert!(matches!("bus".parse::<OccluderKind>(), Err(Error::UnknownOccluderKind(_))));
        for p in Posture::ALL {
            assert_eq!(p.as_str().parse::<Posture>().unwrap(), *p);
            assert_eq!(serde_json::to_string(p).unwrap(), format!("\"{p}\""));
        }
    }

    #[test]
    fn asset_is_cropped_to_tight_box() {
        let px = RasterImage::from_fn(20, 30, |x, y| [x as u8, y as u8, 0]).unwrap();
        let m = BinaryMask::from_fn(20, 30, |x, y| (4..9).contains(&x) && (10..25).contains(&y)).unwrap();
        let a = PedestrianAsset::new("p", &px, &m, Posture::Standing, AssetSource::RealCutout).unwrap();
        assert_eq!((a.width(), a.height()), (5, 15));
        assert_eq!(a.source_box(), PixelBox::new(4, 10, 9, 25).unwrap());
        assert_eq!(a.mask().tight_box(), Some(a.tight_box()));
        assert_eq!(a.pixels().pixel(0, 0), [4, 10, 0]);
    }

    #[test]
    fn empty_asset_mask_is_degenerate() {
        let px = RasterImage::filled(4, 4, [0; 3]).unwrap();
        let m = BinaryMask::new(4, 4).unwrap();
        assert!(matches!(
            PedestrianAsset::new("e", &px, &m, Posture::Sitting, AssetSource::RealCutout),
            Err(Error::DegenerateAsset { .. })
        ));
    }

    #[test]
    fn background_checks_mask_dims() {
        let px = RasterImage::filled(8, 6, [1; 3]).unwrap();
        let bad = BinaryMask::new(6, 8).unwrap();
        assert!(SceneBackground::new("b", px.clone(), vec![], Some(bad)).is_err());
        let occ = OccluderRegion::new(OccluderKind::CarFront, BinaryMask::from_fn(8, 6, |x, _| x > 4).unwrap()).unwrap();
        assert_eq!(occ.bbox(), PixelBox::new(5, 0, 8, 6).unwrap());
        assert!(SceneBackground::new("b", px, vec![occ], None).is_ok());
    }
}
