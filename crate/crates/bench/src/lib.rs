//! Synthetic inputs shared by the benchmarks.

use parkaug::corpus::{AssetSource, OccluderRegion};
use parkaug::{BinaryMask, Corpus, OccluderKind, PedestrianAsset, Posture, RasterImage, SceneBackground};

/// Pseudo-random mask with roughly `density` of its pixels set.
pub fn noisy_mask(w: u32, h: u32, density: f64, seed: u64) -> BinaryMask {
    let mut rng = parkaug::RandomStream::from_seed(seed);
    let bits = (0..w * h).map(|_| rng.uniform() < density).collect();
    BinaryMask::from_bits(w, h, bits).expect("sizes match")
}

/// A scene-sized corpus: `n` backgrounds with three occluders and freespace each.
pub fn corpus(w: u32, h: u32, n: u32) -> Corpus {
    let assets = (0..8u32)
        .map(|k| {
            let (aw, ah) = (18 + 2 * k, 50 + 6 * k);
            let px = RasterImage::from_fn(aw, ah, |x, y| [(x * 9) as u8, (y * 3) as u8, (k * 30) as u8]).unwrap();
            let m = BinaryMask::from_fn(aw, ah, |x, y| (i64::from(x) - i64::from(aw / 2)).abs() <= i64::from(aw / 2) - i64::from(y % 3 / 2)).unwrap();
            PedestrianAsset::new(format!("a{k}"), &px, &m, Posture::ALL[k as usize % 5], AssetSource::RealCutout).unwrap()
        })
        .collect();
    let backgrounds = (0..n)
        .map(|k| {
            let px = RasterImage::from_fn(w, h, |x, y| [(x + k) as u8, y as u8, 90]).unwrap();
            let occluders = (0..3)
                .map(|i| {
                    let (x0, y0) = (w / 20 + i * w / 3, h / 2);
                    let m = BinaryMask::from_fn(w, h, |x, y| x >= x0 && x < x0 + w / 5 && y >= y0 && y < y0 + h / 5).unwrap();
                    OccluderRegion::new(OccluderKind::ALL[i as usize % 3], m).unwrap()
                })
                .collect();
            let free = BinaryMask::from_fn(w, h, |_, y| y >= h * 3 / 5).unwrap();
            SceneBackground::new(format!("bg{k}"), px, occluders, Some(free)).unwrap()
        })
        .collect();
    Corpus {
        assets,
        backgrounds,
        master_seed: 0,
    }
}
