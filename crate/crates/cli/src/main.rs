mod exit;
mod prepare;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parkaug::annotate::{read_label_set, read_split, split, stats, write_split};
use parkaug::corpus::{load_manifest, Corpus};
use parkaug::evalkit::{evaluate, read_detections, EvalParams, DEFAULT_IOU_THRESHOLD, DEFAULT_MAX_DETS};
use parkaug::pipeline::{generate_dataset, GenerationMode, PipelineConfig};
use parkaug::raster::StructuringElement;
use serde_json::{json, Value};

use exit::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "parkaug", version, about = "Occlusion and posture augmentation for parking-scene pedestrians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean raw asset masks with OPEN then ERODE.
    PrepareMasks(PrepareArgs),
    /// Generate a synthetic dataset from a corpus manifest.
    Gen(GenArgs),
    /// Split a label set's images 5:3:2 into train/val/test.
    Split(SplitArgs),
    /// Print label statistics.
    Stats(StatsArgs),
    /// Score detections against labels.
    Eval(EvalArgs),
}

#[derive(Args)]
struct PrepareArgs {
    /// Directory of raw assets.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Side of the square structuring element (odd).
    #[arg(long, default_value_t = 3)]
    element: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Oda,
    Pda,
    Mixed,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Master seed; defaults to the manifest's.
    #[arg(long, env = "PARKAUG_SEED")]
    seed: Option<u64>,
    /// Number of records to generate.
    #[arg(long)]
    count: u64,
    #[arg(long, value_enum, default_value_t = Mode::Mixed)]
    mode: Mode,
    /// Fraction of ODA records in mixed mode.
    #[arg(long, default_value_t = 0.5)]
    mix_ratio: f64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "PARKAUG_WORKERS")]
    workers: Option<usize>,
    /// Maximum occluders used per ODA record.
    #[arg(long, default_value_t = 3)]
    max_occluders: usize,
    /// Lower and upper lift fractions of the occluder height.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.2, 0.3])]
    band: Vec<f64>,
    /// PDA scale factor range.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.8, 1.2])]
    scale: Vec<f64>,
    /// Minimum fraction of a PDA pedestrian's footing on freespace.
    #[arg(long, default_value_t = 0.5)]
    min_coverage: f64,
    /// Pedestrians per PDA record.
    #[arg(long, default_value_t = 1)]
    pda_count: usize,
    /// Placement attempts before giving up on a slot.
    #[arg(long)]
    retry_budget: Option<u32>,
    /// Also write each placement's visible mask.
    #[arg(long)]
    write_masks: bool,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, env = "PARKAUG_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file for the split.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    labels: PathBuf,
    /// Split file produced by `split`.
    #[arg(long)]
    split: Option<PathBuf>,
    /// Also write the table as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    detections: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DETS)]
    max_dets: usize,
    /// Also write the report as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Writes one structured event as a JSON line on stderr.
pub(crate) fn event(name: &str, fields: Value) {
    let mut obj = json!({ "event": name });
    if let (Some(o), Value::Object(extra)) = (obj.as_object_mut(), fields) {
        o.extend(extra);
    }
    eprintln!("{obj}");
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_prepare(a: PrepareArgs) -> CliResult {
    let element = StructuringElement::new(a.element)?;
    if !a.input.is_dir() {
        return Err(CliError::Config(format!("input directory {} does not exist", a.input.display())));
    }
    let report = prepare::prepare_masks(&a.input, &a.out, element).map_err(|e| CliError::Io(e.to_string()))?;
    for e in &report.errors {
        event("file_error", json!({ "file": e.file, "reason": e.reason }));
    }
    write_json(&a.out.join(prepare::REPORT_FILE), &report)?;
    println!(
        "inputs {}  cleaned {}  excluded {}  errors {}",
        report.inputs,
        report.cleaned.len(),
        report.excluded.len(),
        report.errors.len()
    );
    if report.inputs > 0 && report.errors.len() as u64 == report.inputs {
        return Err(CliError::Io(format!("all {} inputs failed", report.inputs)));
    }
    Ok(())
}

fn gen_config(a: &GenArgs, manifest_seed: u64) -> CliResult<PipelineConfig> {
    let mode = match a.mode {
        Mode::Oda => GenerationMode::Oda,
        Mode::Pda => GenerationMode::Pda,
        Mode::Mixed => GenerationMode::Mixed { oda_fraction: a.mix_ratio },
    };
    let mut config = PipelineConfig::new(a.seed.unwrap_or(manifest_seed), a.count, mode);
    config.oda.max_occluders = a.max_occluders;
    config.oda.band = (a.band[0], a.band[1]);
    config.pda.scale_range = (a.scale[0], a.scale[1]);
    config.pda.min_coverage = a.min_coverage;
    config.pda.multiplicity = a.pda_count;
    if let Some(r) = a.retry_budget {
        config.oda.retry_budget = r;
        config.pda.retry_budget = r;
    }
    config.write_masks = a.write_masks;
    config.validate()?;
    Ok(config)
}

fn cmd_gen(a: GenArgs) -> CliResult {
    let manifest = load_manifest(&a.manifest)?;
    let config = gen_config(&a, manifest.master_seed)?;
    let workers = match a.workers {
        Some(0) => return Err(CliError::Config("workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let corpus = Corpus::load(&manifest)?;
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    event(
        "start",
        json!({ "seed": config.seed, "count": config.count, "workers": workers, "mode": config.mode }),
    );
    let result = generate_dataset(&corpus, &config, workers, &a.out);

    // records.json is written even when every record failed
    if let Ok(records) = parkaug::pipeline::read_records(&a.out.join(parkaug::pipeline::RECORDS_FILE)) {
        for r in records.iter().filter(|r| !r.succeeded()) {
            event(
                "record_failed",
                json!({ "index": r.index, "generator": r.generator, "reason": r.error }),
            );
        }
    }
    let summary = result?;
    event("summary", serde_json::to_value(&summary).unwrap_or(Value::Null));
    println!("records {}  succeeded {}  failed {}  labels {}", summary.attempted, summary.succeeded, summary.failed, summary.labels);
    for (g, t) in &summary.by_generator {
        println!("  {:<6} succeeded {:>6}  failed {:>6}", g.as_str(), t.succeeded, t.failed);
    }
    Ok(())
}

fn cmd_split(a: SplitArgs) -> CliResult {
    let set = read_label_set(&a.labels)?;
    let ids: BTreeSet<u64> = set.images.iter().map(|i| i.id).chain(set.labels.iter().map(|l| l.image_id)).collect();
    let ids: Vec<u64> = ids.into_iter().collect();
    let s = split(&ids, a.seed);
    write_split(&s, &a.out)?;
    println!("train {}  val {}  test {}", s.train.len(), s.val.len(), s.test.len());
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> CliResult {
    let set = read_label_set(&a.labels)?;
    let assignment = a.split.as_deref().map(read_split).transpose()?;
    let lookup = assignment.as_ref().map(|s| s.lookup());
    let table = stats(&set.labels, lookup.as_ref());
    print!("{}", table.render());
    if let Some(p) = &a.json {
        write_json(p, &table)?;
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> CliResult {
    let dets = read_detections(&a.detections)?;
    let set = read_label_set(&a.labels)?;
    let params = EvalParams {
        iou_threshold: a.iou,
        max_dets: a.max_dets,
    };
    let report = evaluate(&dets, &set.labels, &params)?;
    print!("{}", report.render());
    if let Some(p) = &a.json {
        write_json(p, &report)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::PrepareMasks(a) => cmd_prepare(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Split(a) => cmd_split(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            e.code()
        }
    }
}
