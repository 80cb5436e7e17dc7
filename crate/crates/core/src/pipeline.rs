//! Dataset generation: record index `i` is a pure function of
//! `(corpus, config, i)`, so records can be produced in any order on any
//! number of threads and the output is byte-identical.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{write_label_set, Generator, ImageEntry, LabelSet};
use crate::corpus::{record_rng, seeded_shuffle, Corpus, RandomStream};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::oda::{generate_oda, OdaParams};
use crate::pda::{generate_pda, PdaParams};
use crate::raster::{encode_png, save_mask};
use crate::record::SyntheticRecord;

pub const IMAGES_DIR: &str = "images";
pub const MASKS_DIR: &str = "masks";
pub const LABELS_FILE: &str = "labels.json";
pub const RECORDS_FILE: &str = "records.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum GenerationMode {
    Oda,
    Pda,
    /// Each record is ODA with probability `oda_fraction`, otherwise PDA.
    Mixed { oda_fraction: f64 },
}

impl GenerationMode {
    fn oda_fraction(self) -> f64 {
        match self {
            GenerationMode::Oda => 1.0,
            GenerationMode::Pda => 0.0,
            GenerationMode::Mixed { oda_fraction } => oda_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub count: u64,
    pub mode: GenerationMode,
    pub oda: OdaParams,
    pub pda: PdaParams,
    /// Also write each placement's visible mask under `masks/`.
    pub write_masks: bool,
}

impl PipelineConfig {
    pub fn new(seed: u64, count: u64, mode: GenerationMode) -> Self {
        Self {
            seed,
            count,
            mode,
            oda: OdaParams::default(),
            pda: PdaParams::default(),
            write_masks: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter("count must be at least 1".into()));
        }
        let f = self.mode.oda_fraction();
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameter(format!("mix ratio must lie in [0, 1], got {f}")));
        }
        self.oda.validate()?;
        self.pda.validate()
    }
}

/// Background pools for each generator, fixed for a whole run.
#[derive(Debug)]
pub struct Plan<'a> {
    corpus: &'a Corpus,
    config: PipelineConfig,
    oda_backgrounds: Vec<usize>,
    pda_backgrounds: Vec<usize>,
}

impl<'a> Plan<'a> {
    pub fn new(corpus: &'a Corpus, config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        if corpus.assets.is_empty() {
            return Err(Error::EmptyAssetPool);
        }
        let eligible = |keep: &dyn Fn(usize) -> bool| (0..corpus.backgrounds.len()).filter(|&i| keep(i)).collect::<Vec<_>>();
        let oda = eligible(&|i| !corpus.backgrounds[i].occluders().is_empty());
        let pda = eligible(&|i| corpus.backgrounds[i].freespace().is_some());
        let f = config.mode.oda_fraction();
        if f > 0.0 && oda.is_empty() {
            return Err(Error::NoOccluders("no background in the corpus has an occluder".into()));
        }
        if f < 1.0 && pda.is_empty() {
            return Err(Error::MissingFreespace("no background in the corpus has a freespace mask".into()));
        }
        Ok(Self {
            corpus,
            oda_backgrounds: seeded_shuffle(oda, config.seed, "oda-backgrounds"),
            pda_backgrounds: seeded_shuffle(pda, config.seed, "pda-backgrounds"),
            config,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Which generator record `index` uses; the first draw of its stream.
    pub fn generator_for(&self, index: u64) -> Generator {
        choose_generator(self.config.mode, &mut record_rng(self.config.seed, index))
    }

    /// Produces record `index`, with labels stamped with the index and seed.
    pub fn generate_record(&self, index: u64) -> (Generator, Result<SyntheticRecord>) {
        let mut rng = record_rng(self.config.seed, index);
        let generator = choose_generator(self.config.mode, &mut rng);
        let result = match generator {
            Generator::Oda => {
                let bg = &self.corpus.backgrounds[self.oda_backgrounds[rng.index(self.oda_backgrounds.len())]];
                generate_oda(bg, &self.corpus.assets, &self.config.oda, &mut rng)
            }
            _ => {
                let bg = &self.corpus.backgrounds[self.pda_backgrounds[rng.index(self.pda_backgrounds.len())]];
                generate_pda(bg, &self.corpus.assets, &self.config.pda, &mut rng)
            }
        };
        let result = result.map(|mut r| {
            r.stamp(index, self.config.seed);
            r
        });
        (generator, result)
    }
}

fn choose_generator(mode: GenerationMode, rng: &mut RandomStream) -> Generator {
    // drawn in every mode so the rest of the stream does not depend on it
    let u = rng.uniform();
    if u < mode.oda_fraction() {
        Generator::Oda
    } else {
        Generator::Pda
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementSummary {
    pub asset_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occluder_index: Option<usize>,
    pub offset: Point,
    pub resized: (u32, u32),
    pub full_pixels: u64,
    pub visible_pixels: u64,
    pub bucket: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub index: u64,
    pub generator: Generator,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub placements: Vec<PlacementSummary>,
}

impl RecordEntry {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorTally {
    pub succeeded: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub seed: u64,
    pub attempted: u64,
    pub succeeded: u64,
    pub failed: u64,
    pub labels: u64,
    pub by_generator: BTreeMap<Generator, GeneratorTally>,
    /// Failure messages and how often each occurred.
    pub failure_reasons: BTreeMap<String, u64>,
}

fn image_name(index: u64) -> String {
    format!("{IMAGES_DIR}/{index:06}.png")
}

fn mask_name(index: u64, k: usize) -> String {
    format!("{MASKS_DIR}/{index:06}_{k}.png")
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

// Generates and writes one record; a generation failure is an entry, an I/O
// failure is an error.
fn produce(plan: &Plan<'_>, index: u64, out_dir: &Path) -> Result<(RecordEntry, Option<SyntheticRecord>)> {
    let (generator, result) = plan.generate_record(index);
    let record = match result {
        Ok(r) => r,
        Err(e) => {
            let entry = RecordEntry {
                index,
                generator,
                background_id: None,
                file_name: None,
                error: Some(e.to_string()),
                placements: Vec::new(),
            };
            return Ok((entry, None));
        }
    };
    let file_name = image_name(index);
    let path = out_dir.join(&file_name);
    let png = encode_png(&record.image)?;
    std::fs::write(&path, png).map_err(|e| Error::io(&path, e))?;
    let mut placements = Vec::with_capacity(record.placements.len());
    for (k, p) in record.placements.iter().enumerate() {
        let mask_file = if plan.config.write_masks {
            let name = mask_name(index, k);
            save_mask(&p.visible, &out_dir.join(&name))?;
            Some(name)
        } else {
            None
        };
        placements.push(PlacementSummary {
            asset_id: p.asset_id.clone(),
            occluder_index: p.occluder_index,
            offset: p.offset,
            resized: p.resized,
            full_pixels: p.full_pixels,
            visible_pixels: p.visible.population(),
            bucket: p.bucket.index(),
            anchor: p.anchor,
            mask_file,
        });
    }
    let entry = RecordEntry {
        index,
        generator,
        background_id: Some(record.background_id.clone()),
        file_name: Some(file_name),
        error: None,
        placements,
    };
    Ok((entry, Some(record)))
}

/// Generates records `0..count` into `out_dir` on `workers` threads, writing
/// `images/NNNNNN.png`, `labels.json` (COCO) and `records.json`.
///
/// Records that cannot be generated are listed in `records.json` with their
/// reason; a run in which every record fails is `GenerationFailed`.
pub fn generate_dataset(corpus: &Corpus, config: &PipelineConfig, workers: usize, out_dir: &Path) -> Result<DatasetSummary> {
    let plan = Plan::new(corpus, config.clone())?;
    if workers == 0 {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    create_dir(&out_dir.join(IMAGES_DIR))?;
    if config.write_masks {
        create_dir(&out_dir.join(MASKS_DIR))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;

    let produced: Vec<(RecordEntry, Option<(ImageEntry, Vec<_>)>)> = pool.install(|| {
        (0..config.count)
            .into_par_iter()
            .map(|i| {
                let (entry, record) = produce(&plan, i, out_dir)?;
                let labelled = record.map(|r| {
                    let image = ImageEntry {
                        id: i,
                        file_name: entry.file_name.clone().unwrap_or_default(),
                        width: r.image.width(),
                        height: r.image.height(),
                    };
                    (image, r.labels)
                });
                Ok((entry, labelled))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut summary = DatasetSummary {
        seed: config.seed,
        attempted: config.count,
        succeeded: 0,
        failed: 0,
        labels: 0,
        by_generator: BTreeMap::new(),
        failure_reasons: BTreeMap::new(),
    };
    let mut set = LabelSet {
        images: Vec::new(),
        labels: Vec::new(),
    };
    let mut entries = Vec::with_capacity(produced.len());
    for (entry, labelled) in produced {
        let tally = summary.by_generator.entry(entry.generator).or_default();
        match &entry.error {
            None => {
                tally.succeeded += 1;
                summary.succeeded += 1;
            }
            Some(reason) => {
                tally.failed += 1;
                summary.failed += 1;
                *summary.failure_reasons.entry(reason.clone()).or_default() += 1;
            }
        }
        if let Some((image, labels)) = labelled {
            set.images.push(image);
            set.labels.extend(labels);
        }
        entries.push(entry);
    }
    summary.labels = set.labels.len() as u64;

    write_label_set(&set, &out_dir.join(LABELS_FILE))?;
    let records_path = out_dir.join(RECORDS_FILE);
    let json = serde_json::to_vec_pretty(&entries).map_err(|e| Error::json(&records_path, e))?;
    crate::fsutil::write_atomic(&records_path, &json)?;

    if summary.succeeded == 0 {
        let reasons: Vec<&str> = summary.failure_reasons.keys().map(String::as_str).collect();
        return Err(Error::GenerationFailed(format!(
            "all {} records failed: {}",
            config.count,
            reasons.join("; ")
        )));
    }
    Ok(summary)
}

pub fn read_records(path: &Path) -> Result<Vec<RecordEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AssetSource, OccluderKind, OccluderRegion, PedestrianAsset, Posture, SceneBackground};
    use crate::raster::{BinaryMask, RasterImage};

    fn corpus() -> Corpus {
        let assets = (0..3)
            .map(|k| {
                let (w, h) = (8 + 2 * k, 24 + 4 * k);
                let px = RasterImage::from_fn(w, h, |x, y| [x as u8 * 9, y as u8 * 5, k as u8 * 70]).unwrap();
                let m = BinaryMask::from_fn(w, h, |x, y| (x as i64 - w as i64 / 2).abs() < 3 + (y % 3) as i64).unwrap();
                PedestrianAsset::new(format!("p{k}"), &px, &m, Posture::ALL[k as usize], AssetSource::RealCutout).unwrap()
            })
            .collect();
        let backgrounds = (0..2)
            .map(|k| {
                let px = RasterImage::from_fn(160, 90, |x, y| [x as u8, y as u8, k as u8]).unwrap();
                let car = BinaryMask::from_fn(160, 90, |x, y| (30..110).contains(&x) && (50..80).contains(&y)).unwrap();
                let free = BinaryMask::from_fn(160, 90, |_, y| y >= 60).unwrap();
                SceneBackground::new(format!("bg{k}"), px, vec![OccluderRegion::new(OccluderKind::CarRear, car).unwrap()], Some(free))
                    .unwrap()
            })
            .collect();
        Corpus {
            assets,
            backgrounds,
            master_seed: 0,
        }
    }

    #[test]
    fn generator_choice_is_first_draw_and_stable() {
        let c = corpus();
        let plan = Plan::new(&c, PipelineConfig::new(3, 10, GenerationMode::Mixed { oda_fraction: 0.5 })).unwrap();
        for i in 0..50 {
            let u = record_rng(3, i).uniform();
            let want = if u < 0.5 { Generator::Oda } else { Generator::Pda };
            assert_eq!(plan.generator_for(i), want);
            assert_eq!(plan.generate_record(i).0, want);
        }
    }

    #[test]
    fn record_is_pure_in_index() {
        let c = corpus();
        let plan = Plan::new(&c, PipelineConfig::new(11, 10, GenerationMode::Mixed { oda_fraction: 0.5 })).unwrap();
        for i in [7, 0, 3] {
            let a = plan.generate_record(i).1.unwrap();
            let b = plan.generate_record(i).1.unwrap();
            assert_eq!(a.image, b.image);
            assert_eq!(a.labels, b.labels);
            assert!(a.labels.iter().all(|l| l.image_id == i && l.provenance.record_index == Some(i)));
        }
    }

    #[test]
    fn config_validation() {
        let c = corpus();
        assert!(Plan::new(&c, PipelineConfig::new(0, 0, GenerationMode::Oda)).is_err());
        assert!(Plan::new(&c, PipelineConfig::new(0, 1, GenerationMode::Mixed { oda_fraction: 1.5 })).is_err());
        let mut bare = corpus();
        bare.backgrounds = vec![SceneBackground::new("b", RasterImage::filled(10, 10, [0; 3]).unwrap(), vec![], None).unwrap()];
        assert!(matches!(Plan::new(&bare, PipelineConfig::new(0, 1, GenerationMode::Oda)), Err(Error::NoOccluders(_))));
        assert!(matches!(Plan::new(&bare, PipelineConfig::new(0, 1, GenerationMode::Pda)), Err(Error::MissingFreespace(_))));
    }

    #[test]
    fn dataset_written_and_worker_count_irrelevant() {
        let c = corpus();
        let mut config = PipelineConfig::new(5, 12, GenerationMode::Mixed { oda_fraction: 0.5 });
        config.write_masks = true;
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let sa = generate_dataset(&c, &config, 1, a.path()).unwrap();
        let sb = generate_dataset(&c, &config, 4, b.path()).unwrap();
        assert_eq!(sa, sb);
        assert_eq!(sa.succeeded + sa.failed, 12);
        for name in [LABELS_FILE, RECORDS_FILE] {
            assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        }
        let records = read_records(&a.path().join(RECORDS_FILE)).unwrap();
        assert_eq!(records.len(), 12);
        for r in records.iter().filter(|r| r.succeeded()) {
            let f = r.file_name.as_ref().unwrap();
            assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
            for p in &r.placements {
                assert!(a.path().join(p.mask_file.as_ref().unwrap()).exists());
            }
        }
    }
}
