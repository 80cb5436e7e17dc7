//! `prepare-masks`: clean raw cut-out masks with OPEN then ERODE.
//!
//! An input is either an RGBA PNG (alpha is the mask) or a pair
//! `<stem>.png` + `<stem>.mask.png`. Cleaned assets are written as RGBA PNGs
//! named `<stem>.png`.

use std::path::{Path, PathBuf};

use parkaug::raster::{load_mask, load_rgba, save_rgba, MaskCleanup, StructuringElement};
use parkaug::Result;
use serde::Serialize;

const MASK_SUFFIX: &str = ".mask.png";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Default, Serialize)]
pub struct PrepareReport {
    pub inputs: u64,
    pub cleaned: Vec<String>,
    /// Assets whose mask was empty after cleanup.
    pub excluded: Vec<String>,
    pub errors: Vec<FileError>,
}

#[derive(Debug, Serialize)]
pub struct FileError {
    pub file: String,
    pub reason: String,
}

fn is_png(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// PNG inputs in `dir`, sorted, with mask side files left out.
pub fn list_inputs(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && is_png(&path) && !file_name(&path).ends_with(MASK_SUFFIX) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn clean_one(input: &Path, cleanup: &MaskCleanup, out_dir: &Path) -> Result<bool> {
    let (pixels, alpha) = load_rgba(input)?;
    let mask = match alpha {
        Some(m) => m,
        None => {
            let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            load_mask(&input.with_file_name(format!("{stem}{MASK_SUFFIX}")))?
        }
    };
    let cleaned = cleanup.apply(&mask)?;
    if cleaned.is_empty() {
        return Ok(false);
    }
    save_rgba(&pixels, &cleaned, &out_dir.join(file_name(input)))?;
    Ok(true)
}

pub fn prepare_masks(input_dir: &Path, out_dir: &Path, element: StructuringElement) -> std::io::Result<PrepareReport> {
    let inputs = list_inputs(input_dir)?;
    std::fs::create_dir_all(out_dir)?;
    let cleanup = MaskCleanup::with_element(element);
    let mut report = PrepareReport {
        inputs: inputs.len() as u64,
        ..PrepareReport::default()
    };
    for input in &inputs {
        let name = file_name(input);
        match clean_one(input, &cleanup, out_dir) {
            Ok(true) => report.cleaned.push(name),
            Ok(false) => report.excluded.push(name),
            Err(e) => report.errors.push(FileError {
                file: name,
                reason: e.to_string(),
            }),
        }
    }
    Ok(report)
}
