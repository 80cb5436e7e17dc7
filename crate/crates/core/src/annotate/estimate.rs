use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Average human height in meters used by the occluded-box estimator.
pub const AVERAGE_HUMAN_HEIGHT_M: f64 = 1.7;
/// Average human width in meters used by the occluded-box estimator.
pub const AVERAGE_HUMAN_WIDTH_M: f64 = 0.3;

/// Expected full-body box size, in meters, of a pedestrian at depth `depth_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccludedBoxEstimate {
    pub width_m: f64,
    pub height_m: f64,
    pub depth_m: f64,
    pub max_depth_m: f64,
    pub human_height_m: f64,
    pub human_width_m: f64,
}

/// Shrinks the reference body size linearly with depth:
/// `W_o = W_p (1 - D_o / D_max)` and `H_o = H_p (1 - D_o / D_max)`.
pub fn estimate_occluded_box(
    depth_m: f64,
    max_depth_m: f64,
    human_height_m: f64,
    human_width_m: f64,
) -> Result<OccludedBoxEstimate> {
    let depth_ok = max_depth_m.is_finite() && max_depth_m > 0.0 && (0.0..=max_depth_m).contains(&depth_m);
    if !depth_ok {
        return Err(Error::InvalidDepth {
            d_o: depth_m,
            d_max: max_depth_m,
        });
    }
    if !(human_height_m.is_finite() && human_height_m > 0.0 && human_width_m.is_finite() && human_width_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference body size must be positive, got {human_width_m} x {human_height_m} m"
        )));
    }
    let keep = 1.0 - depth_m / max_depth_m;
    Ok(OccludedBoxEstimate {
        width_m: human_width_m * keep,
        height_m: human_height_m * keep,
        depth_m,
        max_depth_m,
        human_height_m,
        human_width_m,
    })
}

/// Projects an estimate to pixels, rounding half up.
pub fn to_pixels(est: &OccludedBoxEstimate, pixels_per_meter: f64) -> Result<(u32, u32)> {
    if !(pixels_per_meter.is_finite() && pixels_per_meter > 0.0) {
        return Err(Error::InvalidParameter(format!("pixels per meter must be positive, got {pixels_per_meter}")));
    }
    let px = |m: f64| (m * pixels_per_meter + 0.5).floor() as u32;
    Ok((px(est.width_m), px(est.height_m)))
}
