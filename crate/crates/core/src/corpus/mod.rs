//! Asset ingestion, the manifest format, and seeded randomness.

mod assets;
mod manifest;
mod rng;

pub use assets::{AssetSource, OccluderKind, OccluderRegion, PedestrianAsset, Posture, SceneBackground};
pub use manifest::{
    load_manifest, rasterize_polygon, save_manifest, AssetEntry, BackgroundEntry, Corpus, CorpusManifest,
    OccluderEntry, OccluderShape, SCHEMA_VERSION,
};
pub use rng::{mix64, record_rng, seeded_shuffle, RandomStream};
