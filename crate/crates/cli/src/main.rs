//! `spurank`: CLI over the spuriosity-ranking pipeline.
//!
//! Every subcommand is a thin wrapper over one library stage; `run` drives
//! them all from a single JSON config. Exit codes: 0 success, 2 config
//! error, 3 stage/operational failure.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use spurank_core::detect::mock::MockDetector;
use spurank_core::detect::process::ProcessDetector;
use spurank_core::detect::{
    batch_score, Aggregation, DetectionBox, DetectorBackend, ScoringOptions,
};
use spurank_core::eval::{
    eval_noise_sweep, eval_ood, eval_stratified, identity_ood_mapping, load_ood_mapping,
    NoiseEvalConfig,
};
use spurank_core::features::mock::{mock_backbone_embed, MockBackbone};
use spurank_core::features::process::ProcessBackbone;
use spurank_core::features::{extract_features, load_matrix_from_cache, BackboneAdapter};
use spurank_core::linear::{load_head, save_head, train_head, TrainConfig};
use spurank_core::manifest::{load_manifest, validate_manifest, Split};
use spurank_core::perturb::Region;
use spurank_core::pipeline::{emit_contact_sheet, run_pipeline, PipelineConfig};
use spurank_core::ranking::{
    build_rankings, load_ranking, load_subset_members, save_ranking, save_subset, select_subset,
    stratified_eval_sets, Strategy,
};
use spurank_core::synthetic::{generate_synthetic, SyntheticConfig};
use spurank_core::tensor::ImageTensor;
use spurank_core::{Result, SpurankError};

#[derive(Parser)]
#[command(name = "spurank", version, about = "Spuriosity ranking and last-layer retraining")]
struct Cli {
    /// Worker threads (overrides SPURANK_THREADS; default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic fixture dataset.
    Synth(SynthArgs),
    /// Check a manifest for structural problems.
    Validate(ValidateArgs),
    /// Score every manifest image with a detector backend.
    Score(ScoreArgs),
    /// Build per-class spuriosity rankings from cached scores.
    Rank(RankArgs),
    /// Resolve a rank-based subset of k images per class.
    Select(SelectArgs),
    /// Extract backbone features into a cache.
    Extract(ExtractArgs),
    /// Train a linear head on cached features.
    Train(TrainArgs),
    /// Accuracy per validation rank slice.
    EvalStrata(EvalStrataArgs),
    /// Accuracy under masked foreground/background noise.
    EvalNoise(EvalNoiseArgs),
    /// Restricted-logit accuracy on the shifted split.
    EvalOod(EvalOodArgs),
    /// Run the full pipeline from a JSON config.
    Run(RunArgs),
    /// Render a most/least-spurious contact sheet for one class.
    ContactSheet(ContactSheetArgs),
    /// Serve the mock detector over the line-delimited wire protocol.
    MockBackend,
    /// Serve the mock backbone over the line-delimited embed protocol.
    MockBackbone,
}

#[derive(Args)]
struct SynthArgs {
    /// Dataset root; images land in ROOT/images plus manifest.jsonl.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    classes: u32,
    #[arg(long, default_value_t = 300)]
    per_class: u32,
    #[arg(long, default_value_t = 150)]
    val_per_class: u32,
    #[arg(long, default_value_t = 50)]
    ood_per_class: u32,
    #[arg(long, default_value_t = 64)]
    image_size: u32,
    #[arg(long, default_value_t = 0.9)]
    p_spur_train: f64,
    #[arg(long, default_value_t = 0.5)]
    p_spur_val: f64,
    #[arg(long, default_value_t = 0.0)]
    p_spur_ood: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Also open every referenced image file.
    #[arg(long)]
    check_files: bool,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Detector subprocess command; omit to use the built-in mock.
    #[arg(long)]
    backend: Option<String>,
    /// Cache identity for --backend (default: fingerprint of the command).
    #[arg(long)]
    backend_id: Option<String>,
    #[arg(long)]
    cache: PathBuf,
    #[arg(long, default_value = "a photo of a {class_name}")]
    template: String,
    #[arg(long, default_value = "max")]
    aggregation: Aggregation,
    #[arg(long, default_value_t = 1)]
    retries: usize,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Score cache written by `spurank score`.
    #[arg(long)]
    cache: PathBuf,
    #[arg(long, default_value = "train")]
    split: Split,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    /// Ranking file written by `spurank rank`.
    #[arg(long)]
    ranking: PathBuf,
    #[arg(long)]
    strategy: Strategy,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Backbone subprocess command; omit to use the built-in mock.
    #[arg(long)]
    backbone: Option<String>,
    /// Feature dimension of --backbone.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    backbone_id: Option<String>,
    #[arg(long)]
    cache: PathBuf,
    /// Restrict to one split (default: every record).
    #[arg(long)]
    split: Option<Split>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Feature cache written by `spurank extract`.
    #[arg(long)]
    features: PathBuf,
    /// Subset file written by `spurank select`.
    #[arg(long)]
    subset: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    init_scale: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalStrataArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    head: PathBuf,
    /// Validation-split ranking file.
    #[arg(long)]
    ranking: PathBuf,
    #[arg(long, default_value_t = 50)]
    imax: usize,
    /// Report destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalNoiseArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    head: PathBuf,
    /// Score cache carrying the detection boxes that define masks.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    backbone: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    backbone_id: Option<String>,
    #[arg(long, default_value = "val")]
    split: Split,
    #[arg(long, value_delimiter = ',', default_value = "10,100,250")]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "fg,bg")]
    regions: Vec<Region>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalOodArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    head: PathBuf,
    /// Class-name mapping file (default: identity over the manifest).
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, required_unless_present = "dump_default")]
    config: Option<PathBuf>,
    /// Print the default config as JSON and exit.
    #[arg(long)]
    dump_default: bool,
}

#[derive(Args)]
struct ContactSheetArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    ranking: PathBuf,
    #[arg(long)]
    class_id: u32,
    /// Tiles from the least spurious (highest score) end.
    #[arg(long, default_value_t = 5)]
    n_low: usize,
    /// Tiles from the most spurious (lowest score) end.
    #[arg(long, default_value_t = 5)]
    n_high: usize,
    #[arg(long, default_value_t = 64)]
    tile: u32,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("SPURANK_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                SpurankError::Config(format!("SPURANK_THREADS must be a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(SpurankError::Config("thread count must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| SpurankError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Synth(args) => cmd_synth(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Score(args) => cmd_score(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Select(args) => cmd_select(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Train(args) => cmd_train(args),
        Command::EvalStrata(args) => cmd_eval_strata(args),
        Command::EvalNoise(args) => cmd_eval_noise(args),
        Command::EvalOod(args) => cmd_eval_ood(args),
        Command::Run(args) => cmd_run(args),
        Command::ContactSheet(args) => cmd_contact_sheet(args),
        Command::MockBackend => serve_mock_detector(),
        Command::MockBackbone => serve_mock_backbone(),
    }
}

fn make_detector(command: Option<&str>, backend_id: Option<String>) -> Result<Box<dyn DetectorBackend>> {
    Ok(match command {
        None => Box::new(MockDetector),
        Some(cmd) => Box::new(ProcessDetector::spawn(cmd, backend_id)?),
    })
}

fn make_backbone(
    command: Option<&str>,
    dim: Option<usize>,
    backbone_id: Option<String>,
) -> Result<Box<dyn BackboneAdapter>> {
    Ok(match command {
        None => Box::new(MockBackbone),
        Some(cmd) => {
            let dim = dim.ok_or_else(|| {
                SpurankError::Config("--dim is required with --backbone".into())
            })?;
            Box::new(ProcessBackbone::spawn(cmd, dim, backbone_id)?)
        }
    })
}

/// Pretty JSON to `--out` when given, stdout otherwise.
fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| SpurankError::Config(format!("serialize report: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| SpurankError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode> {
    let config = SyntheticConfig {
        num_classes: args.classes,
        per_class: args.per_class,
        val_per_class: args.val_per_class,
        ood_per_class: args.ood_per_class,
        image_size: args.image_size,
        p_spur_train: args.p_spur_train,
        p_spur_val: args.p_spur_val,
        p_spur_ood: args.p_spur_ood,
        seed: args.seed,
    };
    let (manifest, _) = generate_synthetic(&config, &args.out)?;
    println!(
        "generated {} images across {} classes under {}",
        manifest.len(),
        manifest.classes().len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    let report = validate_manifest(&manifest, args.check_files);
    for issue in &report.issues {
        println!(
            "{}",
            serde_json::to_string(issue).map_err(|e| SpurankError::Config(e.to_string()))?
        );
    }
    if report.is_valid() {
        println!("ok: {} records, {} classes", manifest.len(), manifest.classes().len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} issue(s) found", report.issues.len());
        Ok(ExitCode::from(3))
    }
}

fn cmd_score(args: ScoreArgs) -> Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    let detector = make_detector(args.backend.as_deref(), args.backend_id)?;
    let opts = ScoringOptions {
        template: args.template,
        aggregation: args.aggregation,
        retries: args.retries,
    };
    let table = batch_score(&manifest, detector.as_ref(), &args.cache, &opts)?;
    println!(
        "scored {} images with {} ({} skipped) -> {}",
        table.records.len(),
        table.backend_id,
        table.skips.len(),
        args.cache.display()
    );
    for skip in &table.skips {
        eprintln!("skip {}: {}", skip.image_id, skip.reason);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_rank(args: RankArgs) -> Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    let table = spurank_core::detect::cache::load_score_table(&args.cache)?;
    let ranking = build_rankings(&table, &manifest, args.split)?;
    save_ranking(&ranking, &args.out)?;
    let n: usize = ranking.per_class.values().map(Vec::len).sum();
    println!(
        "ranked {} {} images in {} classes -> {}",
        n,
        args.split,
        ranking.per_class.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_select(args: SelectArgs) -> Result<ExitCode> {
    let ranking = load_ranking(&args.ranking)?;
    let subset = select_subset(&ranking, args.strategy, args.k, args.seed)?;
    save_subset(&subset, &args.out)?;
    println!(
        "selected {} x k={} for {} classes -> {}",
        subset.strategy,
        subset.k,
        subset.resolved.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_extract(args: ExtractArgs) -> Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    let backbone = make_backbone(args.backbone.as_deref(), args.dim, args.backbone_id)?;
    let ids: Vec<String> = match args.split {
        Some(split) => manifest.by_split(split).map(|r| r.image_id.clone()).collect(),
        None => manifest.records().iter().map(|r| r.image_id.clone()).collect(),
    };
    let features = extract_features(&ids, &manifest, backbone.as_ref(), Some(&args.cache))?;
    println!(
        "extracted {} x d={} features with {} -> {}",
        features.n(),
        features.d,
        features.backbone_id,
        args.cache.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_train(args: TrainArgs) -> Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    let members = load_subset_members(&args.subset)?;
    let ids: Vec<String> = members.values().flatten().cloned().collect();
    let features = load_matrix_from_cache(&args.features, &ids, &manifest)?;
    let config = TrainConfig {
        l2_lambda: args.l2,
        max_iters: args.max_iters,
        tolerance: args.tolerance,
        seed: args.seed,
        init_scale: args.init_scale,
    };
    let trained = train_head(&features, &config)?;
    save_head(&trained.head, &config, &args.out)?;
    println!(
        "trained {} classes on {} rows: objective {:.6}, {} iters, converged={} -> {}",
        trained.head.class_ids.len(),
        features.n(),
        trained.final_objective,
        trained.iterations,
        trained.converged,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval_strata(args: EvalStrataArgs) -> Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    let (head, _) = load_head(&args.head)?;
    let ranking = load_ranking(&args.ranking)?;
    let slices = stratified_eval_sets(&ranking, args.imax)?;
    let ids: Vec<String> = ranking
        .per_class
        .values()
        .flatten()
        .map(|r| r.image_id.clone())
        .collect();
    let features = load_matrix_from_cache(&args.features, &ids, &manifest)?;
    let report = eval_stratified(&head, &features, &slices)?;
    emit_json(&report, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval_noise(args: EvalNoiseArgs) -> Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    let (head, _) = load_head(&args.head)?;
    let scores = spurank_core::detect::cache::load_score_table(&args.scores)?;
    let backbone = make_backbone(args.backbone.as_deref(), args.dim, args.backbone_id)?;
    let ids: Vec<String> = manifest
        .by_split(args.split)
        .map(|r| r.image_id.clone())
        .collect();
    let config = NoiseEvalConfig {
        alphas: args.alphas,
        regions: args.regions,
        seed: args.seed,
    };
    let report = eval_noise_sweep(&head, &manifest, &ids, &scores, backbone.as_ref(), &config)?;
    emit_json(&report, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval_ood(args: EvalOodArgs) -> Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    let (head, _) = load_head(&args.head)?;
    let ids: Vec<String> = manifest
        .by_split(Split::Ood)
        .map(|r| r.image_id.clone())
        .collect();
    if ids.is_empty() {
        return Err(SpurankError::EmptyInput(
            "manifest has no ood-split records".into(),
        ));
    }
    let features = load_matrix_from_cache(&args.features, &ids, &manifest)?;
    let mapping = match &args.mapping {
        Some(path) => load_ood_mapping(path)?,
        None => identity_ood_mapping(&manifest),
    };
    let report = eval_ood(&head, &features, &manifest, &mapping)?;
    emit_json(&report, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    if args.dump_default {
        let text = serde_json::to_string_pretty(&PipelineConfig::default())
            .map_err(|e| SpurankError::Config(e.to_string()))?;
        println!("{text}");
        return Ok(ExitCode::SUCCESS);
    }
    let path = args.config.expect("clap enforces --config");
    let config = PipelineConfig::load(&path)?;
    let artifacts = run_pipeline(&config)?;
    println!("report: {}", artifacts.output_dir.join("summary.json").display());
    for run in &artifacts.report.runs {
        println!(
            "  {:>4}-k{}: val {:.4}, strata mean {:.4}{}",
            run.label,
            run.k,
            run.val_accuracy.accuracy,
            run.stratified.mean_accuracy,
            run.ood
                .as_ref()
                .map(|o| format!(", ood {:.4}", o.restricted_accuracy))
                .unwrap_or_default()
        );
    }
    if !artifacts.report.skipped_images.is_empty() {
        eprintln!("{} image(s) skipped by the detector", artifacts.report.skipped_images.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_contact_sheet(args: ContactSheetArgs) -> Result<ExitCode> {
    let manifest = load_manifest(&args.manifest)?;
    let ranking = load_ranking(&args.ranking)?;
    emit_contact_sheet(
        &ranking,
        &manifest,
        args.class_id,
        args.n_low,
        args.n_high,
        args.tile,
        &args.out,
    )?;
    println!("contact sheet for class {} -> {}", args.class_id, args.out.display());
    Ok(ExitCode::SUCCESS)
}

// --- mock serve loops ---------------------------------------------------
//
// These speak the adapter wire protocols from the outside, with their own
// mirror types: requests that fail are answered with
// {"request_id": ..., "error": ...}, which the adapter rejects as a bad
// response line and converts into its retry/skip path.

#[derive(Deserialize)]
struct WireDetect {
    request_id: String,
    image_path: String,
    #[serde(default)]
    #[allow(dead_code)]
    queries: Vec<String>,
}

#[derive(Serialize)]
struct WireBoxes<'a> {
    request_id: &'a str,
    boxes: &'a [DetectionBox],
}

#[derive(Serialize)]
struct WireFailure<'a> {
    request_id: &'a str,
    error: String,
}

fn write_line<T: Serialize>(out: &mut impl Write, value: &T) -> Result<()> {
    let line = serde_json::to_string(value).expect("wire response json");
    out.write_all(line.as_bytes())
        .and_then(|_| out.write_all(b"\n"))
        .and_then(|_| out.flush())
        .map_err(|e| SpurankError::io(Path::new("<stdout>"), e))
}

fn serve_mock_detector() -> Result<ExitCode> {
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| SpurankError::io(Path::new("<stdin>"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let request: WireDetect = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                write_line(&mut stdout, &WireFailure { request_id: "", error: e.to_string() })?;
                continue;
            }
        };
        match MockDetector.detect(Path::new(&request.image_path), &request.queries) {
            Ok(boxes) => write_line(
                &mut stdout,
                &WireBoxes { request_id: &request.request_id, boxes: &boxes },
            )?,
            Err(e) => write_line(
                &mut stdout,
                &WireFailure { request_id: &request.request_id, error: e.to_string() },
            )?,
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct WireTensor {
    height: usize,
    width: usize,
    data_b64: String,
}

#[derive(Deserialize)]
struct WireEmbed {
    request_id: String,
    image_path: Option<String>,
    tensor: Option<WireTensor>,
}

#[derive(Serialize)]
struct WireEmbedding<'a> {
    request_id: &'a str,
    embedding: Vec<f64>,
}

fn decode_tensor(wire: WireTensor) -> Result<ImageTensor> {
    let bytes = BASE64
        .decode(wire.data_b64.as_bytes())
        .map_err(|e| SpurankError::Config(format!("tensor base64: {e}")))?;
    if bytes.len() != wire.height * wire.width * 3 * 4 {
        return Err(SpurankError::DimensionMismatch {
            expected: wire.height * wire.width * 3 * 4,
            got: bytes.len(),
        });
    }
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(ImageTensor { height: wire.height, width: wire.width, data })
}

fn mock_embed_request(request: WireEmbed) -> Result<Vec<f32>> {
    match (request.image_path, request.tensor) {
        (Some(path), None) => MockBackbone.embed_path(Path::new(&path)),
        (None, Some(tensor)) => mock_backbone_embed(&decode_tensor(tensor)?),
        _ => Err(SpurankError::Config(
            "request needs exactly one of image_path or tensor".into(),
        )),
    }
}

fn serve_mock_backbone() -> Result<ExitCode> {
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| SpurankError::io(Path::new("<stdin>"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let request: WireEmbed = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                write_line(&mut stdout, &WireFailure { request_id: "", error: e.to_string() })?;
                continue;
            }
        };
        let request_id = request.request_id.clone();
        match mock_embed_request(request) {
            Ok(embedding) => write_line(
                &mut stdout,
                &WireEmbedding {
                    request_id: &request_id,
                    embedding: embedding.iter().map(|&v| v as f64).collect(),
                },
            )?,
            Err(e) => write_line(
                &mut stdout,
                &WireFailure { request_id: &request_id, error: e.to_string() },
            )?,
        }
    }
    Ok(ExitCode::SUCCESS)
}
