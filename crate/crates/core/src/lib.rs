//! Occlusion- and posture-aware copy-paste augmentation for parking-scene
//! pedestrian detection, with pseudo-label export and strict-IoU scoring.

pub mod annotate;
pub mod corpus;
pub mod error;
pub mod evalkit;
pub mod geometry;
pub mod oda;
pub mod pda;
pub mod pipeline;
pub mod raster;
pub mod record;

mod fsutil;

pub use error::{Error, Result};
pub use annotate::{Generator, PseudoLabel, Split};
pub use corpus::{Corpus, CorpusManifest, OccluderKind, PedestrianAsset, Posture, RandomStream, SceneBackground};
pub use evalkit::{Detection, EvalParams, EvalReport};
pub use geometry::{OcclusionBucket, PixelBox, Point};
pub use oda::OdaParams;
pub use pda::PdaParams;
pub use pipeline::{GenerationMode, PipelineConfig};
pub use raster::{BinaryMask, RasterImage};
pub use record::{Placement, SyntheticRecord};
