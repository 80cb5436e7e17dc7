use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Generator, PseudoLabel, Split};
use crate::corpus::{OccluderKind, Posture};
use crate::geometry::BUCKET_COUNT;

const NONE: &str = "none";
const UNASSIGNED: &str = "unassigned";

/// Label counts under several groupings; each grouping sums to `labels`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsTable {
    pub images: u64,
    pub labels: u64,
    pub images_by_generator: BTreeMap<String, u64>,
    pub by_generator: BTreeMap<String, u64>,
    pub by_occluder: BTreeMap<String, u64>,
    pub by_posture: BTreeMap<String, u64>,
    pub by_bucket: [u64; BUCKET_COUNT],
    pub by_split: BTreeMap<String, u64>,
}

fn zeroed<'a>(keys: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, u64> {
    keys.into_iter().map(|k| (k.to_string(), 0)).collect()
}

/// Tallies labels by generator, occluder kind, posture, occlusion bucket and
/// (when an assignment is given) split.
pub fn stats(labels: &[PseudoLabel], split: Option<&HashMap<u64, Split>>) -> StatsTable {
    let generators = Generator::ALL.map(Generator::as_str);
    let mut table = StatsTable {
        images: 0,
        labels: labels.len() as u64,
        images_by_generator: zeroed(generators),
        by_generator: zeroed(generators),
        by_occluder: zeroed(OccluderKind::ALL.iter().map(|k| k.as_str()).chain([NONE])),
        by_posture: zeroed(Posture::ALL.iter().map(|p| p.as_str()).chain([NONE])),
        by_bucket: [0; BUCKET_COUNT],
        by_split: zeroed(Split::ALL.map(Split::as_str).into_iter().chain([UNASSIGNED])),
    };
    let mut images = BTreeSet::new();
    let mut images_per_generator: BTreeMap<&str, BTreeSet<u64>> = BTreeMap::new();
    for l in labels {
        images.insert(l.image_id);
        images_per_generator.entry(l.generator.as_str()).or_default().insert(l.image_id);
        *table.by_generator.get_mut(l.generator.as_str()).expect("pre-filled") += 1;
        *table.by_occluder.get_mut(l.occluder_kind.map_or(NONE, OccluderKind::as_str)).expect("pre-filled") += 1;
        *table.by_posture.get_mut(l.posture.map_or(NONE, Posture::as_str)).expect("pre-filled") += 1;
        table.by_bucket[usize::from(l.bucket.index())] += 1;
        let split_key = split.and_then(|s| s.get(&l.image_id)).map_or(UNASSIGNED, |s| s.as_str());
        *table.by_split.get_mut(split_key).expect("pre-filled") += 1;
    }
    table.images = images.len() as u64;
    for (g, ids) in images_per_generator {
        table.images_by_generator.insert(g.to_string(), ids.len() as u64);
    }
    table
}

impl StatsTable {
    /// Fixed-width plain-text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<24}{:>10}", "#images", self.images);
        let _ = writeln!(out, "{:<24}{:>10}", "#pedestrians", self.labels);
        let section = |out: &mut String, title: &str, rows: &mut dyn Iterator<Item = (String, u64)>| {
            let _ = writeln!(out, "\n{title}");
            for (k, v) in rows {
                let _ = writeln!(out, "  {:<22}{:>10}", k, v);
            }
        };
        section(
            &mut out,
            "generator            images / labels",
            &mut Generator::ALL.iter().map(|g| {
                let key = g.as_str();
                (
                    format!("{key} ({})", self.images_by_generator[key]),
                    self.by_generator[key],
                )
            }),
        );
        section(
            &mut out,
            "occluder kind",
            &mut OccluderKind::ALL
                .iter()
                .map(|k| k.as_str())
                .chain([NONE])
                .map(|k| (k.to_string(), self.by_occluder[k])),
        );
        section(
            &mut out,
            "posture",
            &mut Posture::ALL
                .iter()
                .map(|p| p.as_str())
                .chain([NONE])
                .map(|k| (k.to_string(), self.by_posture[k])),
        );
        section(
            &mut out,
            "occlusion bucket",
            &mut self.by_bucket.iter().enumerate().map(|(i, &n)| {
                let label = if i == 0 { "0% (not occluded)".to_string() } else { format!("{}-{}%", i * 10, i * 10 + 9) };
                (label, n)
            }),
        );
        section(
            &mut out,
            "split",
            &mut Split::ALL
                .map(Split::as_str)
                .into_iter()
                .chain([UNASSIGNED])
                .map(|k| (k.to_string(), self.by_split[k])),
        );
        out
    }
}
