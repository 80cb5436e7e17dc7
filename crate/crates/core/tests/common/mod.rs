#![allow(dead_code)]

use parkaug::corpus::{AssetSource, OccluderRegion};
use parkaug::{BinaryMask, Corpus, OccluderKind, PedestrianAsset, Posture, RasterImage, SceneBackground};

/// Pedestrian-like cut-out: a head disc over a slightly ragged body.
pub fn asset(k: u32) -> PedestrianAsset {
    let (w, h) = (16 + 3 * (k % 5), 44 + 7 * (k % 6));
    let px = RasterImage::from_fn(w, h, |x, y| [(x * 11 + k * 40) as u8, (y * 5) as u8, (k * 29) as u8]).unwrap();
    let head = i64::from(h) / 7;
    let m = BinaryMask::from_fn(w, h, |x, y| {
        let (cx, x, y) = (i64::from(w) / 2, i64::from(x), i64::from(y));
        if y < 2 * head {
            (x - cx).pow(2) + (y - head).pow(2) <= head * head
        } else {
            (x - cx).abs() <= i64::from(w) / 2 - ((y + i64::from(k)) % 5) / 4
        }
    })
    .unwrap();
    let posture = Posture::ALL[k as usize % Posture::ALL.len()];
    let source = if k.is_multiple_of(2) { AssetSource::RealCutout } else { AssetSource::SynthesizedPose };
    PedestrianAsset::new(format!("ped{k}"), &px, &m, posture, source).unwrap()
}

// Rectangle with clipped corners, so the mask differs from its box.
fn car(w: u32, h: u32, x0: u32, y0: u32, cw: u32, ch: u32) -> BinaryMask {
    let cut = ch / 4;
    BinaryMask::from_fn(w, h, |x, y| {
        if x < x0 || x >= x0 + cw || y < y0 || y >= y0 + ch {
            return false;
        }
        let (dx, dy) = (x - x0, y - y0);
        let from_right = x0 + cw - 1 - x;
        !(dy < cut && (dx + dy < cut || from_right + dy < cut))
    })
    .unwrap()
}

pub fn background(k: u32, w: u32, h: u32) -> SceneBackground {
    let px = RasterImage::from_fn(w, h, |x, y| [(x / 3 + k * 50) as u8, (y / 2) as u8, (x ^ y) as u8]).unwrap();
    let (cw, ch) = (w / 5, h / 5);
    let kinds = [OccluderKind::CarFront, OccluderKind::CarRear, OccluderKind::CubeObstacle];
    let occluders = (0..3)
        .map(|i| {
            let x0 = w / 20 + i * (w / 3) + k * 3;
            let y0 = h / 2 + (i % 2) * (h / 10);
            OccluderRegion::new(kinds[((i + k) % 3) as usize], car(w, h, x0, y0, cw, ch)).unwrap()
        })
        .collect();
    let free = BinaryMask::from_fn(w, h, |_, y| y >= h * 3 / 5).unwrap();
    SceneBackground::new(format!("scene{k}"), px, occluders, Some(free)).unwrap()
}

pub fn corpus(w: u32, h: u32, n_backgrounds: u32, n_assets: u32) -> Corpus {
    Corpus {
        assets: (0..n_assets).map(asset).collect(),
        backgrounds: (0..n_backgrounds).map(|k| background(k, w, h)).collect(),
        master_seed: 0,
    }
}

/// Square-window erosion by direct scan; outside pixels count as unset.
pub fn erode_oracle(m: &BinaryMask, side: u32) -> BinaryMask {
    let r = i64::from(side / 2);
    BinaryMask::from_fn(m.width(), m.height(), |x, y| {
        (-r..=r).all(|dy| (-r..=r).all(|dx| m.get_signed(i64::from(x) + dx, i64::from(y) + dy)))
    })
    .unwrap()
}

pub fn dilate_oracle(m: &BinaryMask, side: u32) -> BinaryMask {
    let r = i64::from(side / 2);
    BinaryMask::from_fn(m.width(), m.height(), |x, y| {
        (-r..=r).any(|dy| (-r..=r).any(|dx| m.get_signed(i64::from(x) + dx, i64::from(y) + dy)))
    })
    .unwrap()
}
