#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use parkaug::raster::{save_mask, save_rgb, save_rgba};
use parkaug::{BinaryMask, Posture, RasterImage};
use serde_json::json;

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_parkaug"));
    c.env_remove("PARKAUG_SEED").env_remove("PARKAUG_WORKERS");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Blob-shaped pedestrian cut-out: head disc over a tapered body.
pub fn person(w: u32, h: u32, tint: u8) -> (RasterImage, BinaryMask) {
    let px = RasterImage::from_fn(w, h, |x, y| [tint, (x * 7) as u8, (y * 3) as u8]).unwrap();
    let head = h as i64 / 6;
    let m = BinaryMask::from_fn(w, h, |x, y| {
        let (cx, x, y) = (w as i64 / 2, x as i64, y as i64);
        if y < 2 * head {
            (x - cx).pow(2) + (y - head).pow(2) <= head * head
        } else {
            (x - cx).abs() <= w as i64 / 2 - (y % 4) / 3
        }
    })
    .unwrap();
    (px, m)
}

/// Writes a corpus of 5 assets and 3 backgrounds with car polygons and
/// freespace masks; returns the manifest path.
pub fn write_corpus(dir: &Path, asset_width: u32) -> PathBuf {
    std::fs::create_dir_all(dir.join("assets")).unwrap();
    std::fs::create_dir_all(dir.join("bg")).unwrap();
    let mut assets = Vec::new();
    for k in 0..5u32 {
        let (px, m) = person(asset_width + 2 * k, 40 + 6 * k, 40 * k as u8);
        let id = format!("person{k}");
        let rel = format!("assets/{id}.png");
        save_rgba(&px, &m, &dir.join(&rel)).unwrap();
        let posture = Posture::ALL[k as usize % Posture::ALL.len()];
        assets.push(json!({ "id": id, "image": rel, "posture": posture.as_str(), "source": "real_cutout" }));
    }
    let (w, h) = (240u32, 135u32);
    let mut backgrounds = Vec::new();
    for k in 0..3u32 {
        let px = RasterImage::from_fn(w, h, |x, y| [(x + k * 30) as u8, (y * 2) as u8, 128]).unwrap();
        let img = format!("bg/lot{k}.png");
        save_rgb(&px, &dir.join(&img)).unwrap();
        let free = BinaryMask::from_fn(w, h, |_, y| y >= 95).unwrap();
        let free_rel = format!("bg/lot{k}_free.png");
        save_mask(&free, &dir.join(&free_rel)).unwrap();
        let x0 = 20.0 + 10.0 * k as f64;
        backgrounds.push(json!({
            "id": format!("lot{k}"),
            "image": img,
            "occluders": [
                { "kind": "car_front", "polygon": [[x0, 70.0], [x0 + 70.0, 70.0], [x0 + 70.0, 110.0], [x0, 110.0]] },
                { "kind": "car_rear", "polygon": [[140.0, 60.0], [220.0, 60.0], [220.0, 105.0], [140.0, 105.0]] }
            ],
            "freespace": free_rel
        }));
    }
    let manifest = json!({ "schema_version": 1, "master_seed": 7, "assets": assets, "backgrounds": backgrounds });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    path
}

/// Every file under `dir`, relative path and bytes, sorted.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
