use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box ({x1}, {y1}, {x2}, {y2}): need x2 > x1 and y2 > y1")]
    InvalidBox { x1: i64, y1: i64, x2: i64, y2: i64 },

    #[error("degenerate mask: full pixel count is zero")]
    DegenerateMask,

    #[error("occlusion rate {rate:.4} is outside the 0..=0.99 taxonomy")]
    OcclusionOverCap { rate: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("placement footprint is empty after clipping to the background")]
    EmptyFootprint,

    #[error("placement infeasible: {0}")]
    PlacementInfeasible(String),

    #[error("pedestrian fully occluded by occluder")]
    FullyOccluded,

    #[error("degenerate asset {asset_id}: {reason}")]
    DegenerateAsset { asset_id: String, reason: String },

    #[error("asset pool is empty")]
    EmptyAssetPool,

    #[error("background {0} has no occluder regions")]
    NoOccluders(String),

    #[error("background {0} has no freespace mask")]
    MissingFreespace(String),

    #[error("generation failed: {0}")]
    GenerationFailed(String),

    #[error("invalid depth: D_o = {d_o}, D_max = {d_max}")]
    InvalidDepth { d_o: f64, d_max: f64 },

    #[error("metric undefined: no ground-truth instances")]
    UndefinedMetric,

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("malformed polygon in background `{background}`, occluder {index}: {reason}")]
    MalformedPolygon {
        background: String,
        index: usize,
        reason: String,
    },

    #[error("unknown posture `{0}`")]
    UnknownPosture(String),

    #[error("unknown occluder kind `{0}`")]
    UnknownOccluderKind(String),

    #[error("unknown asset source `{0}`")]
    UnknownSource(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),

    #[error("malformed annotation: {0}")]
    MalformedAnnotation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
