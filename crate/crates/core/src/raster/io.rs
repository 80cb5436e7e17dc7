use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage, RgbaImage};

use super::{BinaryMask, RasterImage};
use crate::error::{Error, Result};

/// Channel value at or above which a mask pixel counts as set.
pub const MASK_THRESHOLD: u8 = 128;

fn open_image(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn from_rgb(img: RgbImage) -> Result<RasterImage> {
    let (w, h) = img.dimensions();
    RasterImage::from_raw(w, h, img.into_raw())
}

pub fn load_rgb(path: &Path) -> Result<RasterImage> {
    from_rgb(open_image(path)?.to_rgb8())
}

/// Loads a mask from the alpha channel of an image that has one, otherwise
/// from its single (luma) channel.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let img = open_image(path)?;
    let (w, h) = (img.width(), img.height());
    let bits = if img.color().has_alpha() {
        img.to_rgba8().pixels().map(|p| p.0[3] >= MASK_THRESHOLD).collect()
    } else {
        img.to_luma8().pixels().map(|p| p.0[0] >= MASK_THRESHOLD).collect()
    };
    BinaryMask::from_bits(w, h, bits)
}

/// Loads colour pixels plus the alpha-derived mask, if the file has alpha.
pub fn load_rgba(path: &Path) -> Result<(RasterImage, Option<BinaryMask>)> {
    let img = open_image(path)?;
    let mask = if img.color().has_alpha() {
        let rgba = img.to_rgba8();
        let bits = rgba.pixels().map(|p| p.0[3] >= MASK_THRESHOLD).collect();
        Some(BinaryMask::from_bits(img.width(), img.height(), bits)?)
    } else {
        None
    };
    Ok((from_rgb(img.to_rgb8())?, mask))
}

fn to_rgb(img: &RasterImage) -> RgbImage {
    RgbImage::from_raw(img.width(), img.height(), img.as_raw().to_vec()).expect("buffer length checked at construction")
}

fn write_image(path: &Path, img: DynamicImage) -> Result<()> {
    img.save_with_format(path, ImageFormat::Png).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_rgb(img: &RasterImage, path: &Path) -> Result<()> {
    write_image(path, DynamicImage::ImageRgb8(to_rgb(img)))
}

/// Writes `img` with `mask` as a 0/255 alpha channel.
pub fn save_rgba(img: &RasterImage, mask: &BinaryMask, path: &Path) -> Result<()> {
    if img.dims() != mask.dims() {
        return Err(Error::DimensionMismatch {
            expected: img.dims(),
            actual: mask.dims(),
        });
    }
    let mut data = Vec::with_capacity(img.as_raw().len() / 3 * 4);
    for (rgb, &bit) in img.as_raw().chunks_exact(3).zip(mask.bits()) {
        data.extend_from_slice(rgb);
        data.push(if bit { 255 } else { 0 });
    }
    let rgba = RgbaImage::from_raw(img.width(), img.height(), data).expect("length matches");
    write_image(path, DynamicImage::ImageRgba8(rgba))
}

/// Writes a single-channel 0/255 PNG.
pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    let data = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let gray = GrayImage::from_raw(mask.width(), mask.height(), data).expect("length matches");
    write_image(path, DynamicImage::ImageLuma8(gray))
}

/// PNG bytes of an RGB image, as written by [`save_rgb`].
pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    DynamicImage::ImageRgb8(to_rgb(img))
        .write_to(&mut buf, ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: "<memory>".into(),
            source,
        })?;
    Ok(buf.into_inner())
}
