//! Single-class detection scoring at a strict IoU threshold: greedy
//! score-ordered matching, all-point interpolated AP, and AR.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotate::{box_from_xywh, PseudoLabel};
use crate::error::{Error, Result};
use crate::geometry::{OcclusionBucket, PixelBox, BUCKET_COUNT};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.75;
pub const DEFAULT_MAX_DETS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub image_id: u64,
    pub bbox: PixelBox,
    pub score: f64,
}

impl Detection {
    pub fn new(image_id: u64, bbox: PixelBox, score: f64) -> Result<Self> {
        if !(score.is_finite() && (0.0..=1.0).contains(&score)) {
            return Err(Error::InvalidParameter(format!("detection score {score} outside [0, 1]")));
        }
        Ok(Self { image_id, bbox, score })
    }
}

#[derive(Deserialize)]
struct RawDetection {
    image_id: u64,
    bbox: [f64; 4],
    score: f64,
}

/// Parses a JSON array of `{image_id, bbox: [x, y, w, h], score}`.
pub fn parse_detections(text: &str) -> Result<Vec<Detection>> {
    let raw: Vec<RawDetection> =
        serde_json::from_str(text).map_err(|e| Error::MalformedAnnotation(format!("detections: {e}")))?;
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let bbox = box_from_xywh(r.bbox)?;
            Detection::new(r.image_id, bbox, r.score)
                .map_err(|_| Error::MalformedAnnotation(format!("detection {i}: score {} outside [0, 1]", r.score)))
        })
        .collect()
}

pub fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    parse_detections(&text)
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("IoU threshold must lie in (0, 1], got {t}")))
    }
}

/// Indices of `scores` by descending score; equal scores keep input order.
fn score_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Outcome of matching one image's detections against its ground truths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageMatches {
    /// Scores of the detections in descending order.
    pub scores: Vec<f64>,
    /// Matched ground-truth index per detection, same order as `scores`.
    pub matched: Vec<Option<usize>>,
    /// Input index of each detection, same order as `scores`.
    pub det_index: Vec<usize>,
    pub gt_count: usize,
}

impl ImageMatches {
    pub fn true_positives(&self) -> usize {
        self.matched.iter().filter(|m| m.is_some()).count()
    }

    pub fn false_positives(&self) -> usize {
        self.matched.len() - self.true_positives()
    }

    pub fn false_negatives(&self) -> usize {
        self.gt_count - self.true_positives()
    }

    /// Matched ground-truth index per detection, indexed like the input.
    pub fn by_input(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.matched.len()];
        for (&i, &m) in self.det_index.iter().zip(&self.matched) {
            out[i] = m;
        }
        out
    }
}

/// Greedy matching on raw boxes; see [`match_detections`].
pub fn match_boxes(dets: &[(PixelBox, f64)], gts: &[PixelBox], iou_threshold: f64) -> Result<ImageMatches> {
    check_threshold(iou_threshold)?;
    let scores: Vec<f64> = dets.iter().map(|d| d.1).collect();
    let order = score_order(&scores);
    let mut taken = vec![false; gts.len()];
    let mut matched = Vec::with_capacity(dets.len());
    for &d in &order {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if taken[g] {
                continue;
            }
            let v = dets[d].0.iou(gt);
            // strict `>` keeps the lower index on ties
            if v >= iou_threshold && best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        if let Some((g, _)) = best {
            taken[g] = true;
        }
        matched.push(best.map(|(g, _)| g));
    }
    Ok(ImageMatches {
        scores: order.iter().map(|&i| scores[i]).collect(),
        matched,
        det_index: order,
        gt_count: gts.len(),
    })
}

/// Matches one image: detections by descending score each take the unmatched
/// ground truth of highest IoU at or above the threshold, ties to the lower
/// ground-truth index.
pub fn match_detections(dets: &[Detection], gts: &[PseudoLabel], iou_threshold: f64) -> Result<ImageMatches> {
    let ids: BTreeSet<u64> = dets.iter().map(|d| d.image_id).chain(gts.iter().map(|g| g.image_id)).collect();
    if ids.len() > 1 {
        return Err(Error::InvalidParameter(format!("matching spans several images: {ids:?}")));
    }
    let d: Vec<(PixelBox, f64)> = dets.iter().map(|d| (d.bbox, d.score)).collect();
    let g: Vec<PixelBox> = gts.iter().map(|g| g.bbox).collect();
    match_boxes(&d, &g, iou_threshold)
}

fn total_gt(matches: &[ImageMatches]) -> Result<usize> {
    match matches.iter().map(|m| m.gt_count).sum() {
        0 => Err(Error::UndefinedMetric),
        n => Ok(n),
    }
}

/// Area under the precision-recall curve with all-point interpolation over
/// detections pooled from every image.
pub fn average_precision(matches: &[ImageMatches]) -> Result<f64> {
    let n_gt = total_gt(matches)? as f64;
    let pooled: Vec<(f64, bool)> = matches
        .iter()
        .flat_map(|m| m.scores.iter().zip(&m.matched).map(|(&s, g)| (s, g.is_some())))
        .collect();
    let scores: Vec<f64> = pooled.iter().map(|p| p.0).collect();
    let order = score_order(&scores);

    let (mut tp, mut fp) = (0u64, 0u64);
    let mut recall = Vec::with_capacity(order.len());
    let mut precision = Vec::with_capacity(order.len());
    for &i in &order {
        if pooled[i].1 {
            tp += 1;
        } else {
            fp += 1;
        }
        recall.push(tp as f64 / n_gt);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (r, p) in recall.iter().zip(&precision) {
        ap += (r - prev_recall) * p;
        prev_recall = *r;
    }
    Ok(ap)
}

/// TP / (TP + FN), counting only the `max_dets` highest-scoring detections
/// per image.
pub fn average_recall(matches: &[ImageMatches], max_dets: usize) -> Result<f64> {
    let n_gt = total_gt(matches)?;
    let tp: usize = matches
        .iter()
        .map(|m| m.matched.iter().take(max_dets).filter(|g| g.is_some()).count())
        .sum();
    Ok(tp as f64 / n_gt as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub iou_threshold: f64,
    pub max_dets: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            max_dets: DEFAULT_MAX_DETS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketReport {
    pub bucket: u8,
    pub ground_truths: u64,
    /// `None` when the bucket has no ground truth.
    pub ap: Option<f64>,
    pub ar: Option<f64>,
    pub tp: u64,
    pub fn_: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub iou_threshold: f64,
    pub max_dets: usize,
    pub images: u64,
    pub detections: u64,
    pub ground_truths: u64,
    pub ap: f64,
    pub ar: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub per_bucket: Vec<BucketReport>,
}

fn match_all(
    dets: &BTreeMap<u64, Vec<(PixelBox, f64)>>,
    gts: &BTreeMap<u64, Vec<PixelBox>>,
    images: &BTreeSet<u64>,
    iou_threshold: f64,
) -> Result<Vec<ImageMatches>> {
    images
        .iter()
        .map(|id| {
            let d = dets.get(id).map_or(&[][..], Vec::as_slice);
            let g = gts.get(id).map_or(&[][..], Vec::as_slice);
            match_boxes(d, g, iou_threshold)
        })
        .collect()
}

/// Scores `dets` against `gts` overall and per occlusion bucket. The bucket
/// rows keep only that bucket's ground truths and re-match every detection.
pub fn evaluate(dets: &[Detection], gts: &[PseudoLabel], params: &EvalParams) -> Result<EvalReport> {
    check_threshold(params.iou_threshold)?;
    let mut by_image: BTreeMap<u64, Vec<(PixelBox, f64)>> = BTreeMap::new();
    for d in dets {
        by_image.entry(d.image_id).or_default().push((d.bbox, d.score));
    }
    let images: BTreeSet<u64> = by_image.keys().copied().chain(gts.iter().map(|g| g.image_id)).collect();
    let gts_where = |keep: &dyn Fn(&PseudoLabel) -> bool| {
        let mut m: BTreeMap<u64, Vec<PixelBox>> = BTreeMap::new();
        for g in gts.iter().filter(|g| keep(g)) {
            m.entry(g.image_id).or_default().push(g.bbox);
        }
        m
    };

    let all = match_all(&by_image, &gts_where(&|_| true), &images, params.iou_threshold)?;
    let tp: usize = all.iter().map(ImageMatches::true_positives).sum();
    let fp: usize = all.iter().map(ImageMatches::false_positives).sum();
    let ap = average_precision(&all)?;
    let ar = average_recall(&all, params.max_dets)?;

    let mut per_bucket = Vec::with_capacity(BUCKET_COUNT);
    for b in OcclusionBucket::all() {
        let subset = gts_where(&|g| g.bucket == b);
        let n: usize = subset.values().map(Vec::len).sum();
        let row = if n == 0 {
            BucketReport {
                bucket: b.index(),
                ground_truths: 0,
                ap: None,
                ar: None,
                tp: 0,
                fn_: 0,
            }
        } else {
            let m = match_all(&by_image, &subset, &images, params.iou_threshold)?;
            let btp: usize = m.iter().map(ImageMatches::true_positives).sum();
            BucketReport {
                bucket: b.index(),
                ground_truths: n as u64,
                ap: Some(average_precision(&m)?),
                ar: Some(average_recall(&m, params.max_dets)?),
                tp: btp as u64,
                fn_: (n - btp) as u64,
            }
        };
        per_bucket.push(row);
    }

    Ok(EvalReport {
        iou_threshold: params.iou_threshold,
        max_dets: params.max_dets,
        images: images.len() as u64,
        detections: dets.len() as u64,
        ground_truths: gts.len() as u64,
        ap,
        ar,
        tp: tp as u64,
        fp: fp as u64,
        fn_: (gts.len() - tp) as u64,
        per_bucket,
    })
}

impl EvalReport {
    /// Fixed-width plain-text rendering.
    pub fn render(&self) -> String {
        let pct = (self.iou_threshold * 100.0).round();
        let mut out = String::new();
        let _ = writeln!(out, "{:<16}{:>10.4}", format!("AP{pct}"), self.ap);
        let _ = writeln!(out, "{:<16}{:>10.4}", format!("AR{pct}"), self.ar);
        for (k, v) in [
            ("images", self.images),
            ("detections", self.detections),
            ("ground truths", self.ground_truths),
            ("TP", self.tp),
            ("FP", self.fp),
            ("FN", self.fn_),
        ] {
            let _ = writeln!(out, "{k:<16}{v:>10}");
        }
        let _ = writeln!(out, "\n{:<12}{:>8}{:>10}{:>10}{:>8}{:>8}", "bucket", "gts", "AP", "AR", "TP", "FN");
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        for r in &self.per_bucket {
            let name = if r.bucket == 0 { "0%".to_string() } else { format!("{}-{}%", r.bucket * 10, r.bucket * 10 + 9) };
            let _ = writeln!(
                out,
                "{:<12}{:>8}{:>10}{:>10}{:>8}{:>8}",
                name,
                r.ground_truths,
                fmt(r.ap),
                fmt(r.ar),
                r.tp,
                r.fn_
            );
        }
        out
    }
}
