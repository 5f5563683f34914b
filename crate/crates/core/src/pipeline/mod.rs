//! End-to-end orchestration: dataset -> scores -> ranking -> subsets ->
//! features -> heads -> evaluation -> report. Stages run in a fixed order;
//! the first failure aborts the run wrapped with its stage name, and any
//! artifacts already written stay on disk for inspection.

pub mod config;
pub mod contact_sheet;
pub mod report;
pub mod svg;

pub use config::{BackboneChoice, DataSource, DetectorChoice, EvalOptions, PipelineConfig};
pub use contact_sheet::emit_contact_sheet;
pub use report::{
    emit_report, manifest_digest, strategy_label, EvalReport, Provenance, RunReport,
    TrainSummary, REPORT_FORMAT, REPORT_VERSION,
};

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::detect::{batch_score, DetectorBackend, ScoreTable, ScoringOptions};
use crate::detect::mock::MockDetector;
use crate::detect::process::ProcessDetector;
use crate::error::{Result, SpurankError};
use crate::eval::{
    eval_noise_sweep, eval_ood, eval_stratified, identity_ood_mapping, load_ood_mapping,
    NoiseEvalConfig,
};
use crate::features::mock::MockBackbone;
use crate::features::process::ProcessBackbone;
use crate::features::{extract_features, BackboneAdapter, FeatureMatrix};
use crate::linear::{evaluate_accuracy, save_head, train_head};
use crate::manifest::{load_manifest, DatasetManifest, Split};
use crate::ranking::{
    build_rankings, save_ranking, save_subset, select_subset, stratified_eval_sets,
    SpuriosityRanking, SubsetSpec,
};
use crate::synthetic::generate_synthetic;

/// Exclusive claim on an output directory, released on drop.
pub struct LockGuard {
    path: PathBuf,
}

impl LockGuard {
    pub fn acquire(output_dir: &Path) -> Result<LockGuard> {
        std::fs::create_dir_all(output_dir).map_err(|e| SpurankError::io(output_dir, e))?;
        let path = output_dir.join(".spurank.lock");
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(LockGuard { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(SpurankError::OutputLocked(path))
            }
            Err(e) => Err(SpurankError::io(&path, e)),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[derive(Debug)]
pub struct PipelineArtifacts {
    pub report: EvalReport,
    pub manifest: DatasetManifest,
    pub ranking_train: SpuriosityRanking,
    pub ranking_val: SpuriosityRanking,
    pub output_dir: PathBuf,
}

fn make_detector(choice: &DetectorChoice) -> Result<Box<dyn DetectorBackend>> {
    Ok(match choice {
        DetectorChoice::Mock => Box::new(MockDetector),
        DetectorChoice::Process { command, backend_id } => {
            Box::new(ProcessDetector::spawn(command, backend_id.clone())?)
        }
    })
}

fn make_backbone(choice: &BackboneChoice) -> Result<Box<dyn BackboneAdapter>> {
    Ok(match choice {
        BackboneChoice::Mock => Box::new(MockBackbone),
        BackboneChoice::Process { command, dim, backbone_id } => {
            Box::new(ProcessBackbone::spawn(command, *dim, backbone_id.clone())?)
        }
    })
}

fn split_ids(manifest: &DatasetManifest, split: Split) -> Vec<String> {
    manifest.by_split(split).map(|r| r.image_id.clone()).collect()
}

/// Run every stage for every (strategy, k) combination.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineArtifacts> {
    config.validate()?;
    let out = config.output_dir.clone();
    let _lock = LockGuard::acquire(&out)?;
    let cache_dir = out.join("cache");
    std::fs::create_dir_all(&cache_dir).map_err(|e| SpurankError::io(&cache_dir, e))?;

    // dataset
    let manifest = match &config.source {
        DataSource::Synthetic { config: syn } => {
            let root = out.join("dataset");
            generate_synthetic(syn, &root)
                .map_err(SpurankError::in_stage("dataset"))?
                .0
        }
        DataSource::Manifest { path } => {
            load_manifest(path).map_err(SpurankError::in_stage("dataset"))?
        }
    };
    let train_ids = split_ids(&manifest, Split::Train);
    let val_ids = split_ids(&manifest, Split::Val);
    let ood_ids = split_ids(&manifest, Split::Ood);
    if train_ids.is_empty() || val_ids.is_empty() {
        return Err(SpurankError::in_stage("dataset")(SpurankError::Config(
            "manifest needs at least one train and one val image".into(),
        )));
    }
    let dataset_digest = manifest_digest(&manifest);

    // score
    let detector = make_detector(&config.detector).map_err(SpurankError::in_stage("score"))?;
    let opts = ScoringOptions {
        template: config.template.clone(),
        aggregation: config.aggregation,
        retries: 1,
    };
    let scores: ScoreTable = batch_score(
        &manifest,
        detector.as_ref(),
        &cache_dir.join("scores.jsonl"),
        &opts,
    )
    .map_err(SpurankError::in_stage("score"))?;
    let backend_id = scores.backend_id.clone();
    drop(detector);

    // rank
    let ranking_train = build_rankings(&scores, &manifest, Split::Train)
        .map_err(SpurankError::in_stage("rank"))?;
    let ranking_val = build_rankings(&scores, &manifest, Split::Val)
        .map_err(SpurankError::in_stage("rank"))?;
    save_ranking(&ranking_train, &out.join("ranking-train.jsonl"))
        .map_err(SpurankError::in_stage("rank"))?;
    save_ranking(&ranking_val, &out.join("ranking-val.jsonl"))
        .map_err(SpurankError::in_stage("rank"))?;

    // select
    let subset_dir = out.join("subsets");
    std::fs::create_dir_all(&subset_dir).map_err(|e| SpurankError::io(&subset_dir, e))?;
    let mut runs_spec: Vec<SubsetSpec> = Vec::new();
    for &strategy in &config.strategies {
        for &k in &config.k_values {
            let subset = select_subset(&ranking_train, strategy, k, config.seed)
                .map_err(SpurankError::in_stage("select"))?;
            save_subset(&subset, &subset_dir.join(format!("{strategy}-k{k}.jsonl")))
                .map_err(SpurankError::in_stage("select"))?;
            runs_spec.push(subset);
        }
    }

    // features: one extraction over everything any stage will need
    let backbone = make_backbone(&config.backbone).map_err(SpurankError::in_stage("features"))?;
    let mut wanted: Vec<String> = Vec::new();
    for subset in &runs_spec {
        wanted.extend(subset.all_image_ids());
    }
    wanted.extend(val_ids.iter().cloned());
    wanted.extend(ood_ids.iter().cloned());
    let features = extract_features(
        &wanted,
        &manifest,
        backbone.as_ref(),
        Some(&cache_dir.join("features.bin")),
    )
    .map_err(SpurankError::in_stage("features"))?;
    let backbone_id = features.backbone_id.clone();

    // shared eval inputs
    let slices = stratified_eval_sets(&ranking_val, config.eval.i_max)
        .map_err(SpurankError::in_stage("eval"))?;
    let noise_config = NoiseEvalConfig {
        alphas: config.eval.alphas.clone(),
        regions: config.eval.regions.clone(),
        seed: config.seed,
    };
    let val_features = features
        .select(&val_ids)
        .map_err(SpurankError::in_stage("eval"))?;
    let ood_features: Option<FeatureMatrix> = if ood_ids.is_empty() {
        None
    } else {
        Some(
            features
                .select(&ood_ids)
                .map_err(SpurankError::in_stage("eval"))?,
        )
    };
    let mapping = match &config.eval.ood_mapping {
        Some(path) => Some(load_ood_mapping(path).map_err(SpurankError::in_stage("eval"))?),
        None if ood_features.is_some() => Some(identity_ood_mapping(&manifest)),
        None => None,
    };

    // train + eval per run
    let head_dir = out.join("heads");
    std::fs::create_dir_all(&head_dir).map_err(|e| SpurankError::io(&head_dir, e))?;
    let mut runs = Vec::with_capacity(runs_spec.len());
    for subset in &runs_spec {
        let subset_features = features
            .select(&subset.all_image_ids())
            .map_err(SpurankError::in_stage("train"))?;
        let trained = train_head(&subset_features, &config.train)
            .map_err(SpurankError::in_stage("train"))?;
        save_head(
            &trained.head,
            &config.train,
            &head_dir.join(format!("{}-k{}.head", subset.strategy, subset.k)),
        )
        .map_err(SpurankError::in_stage("train"))?;

        let val_accuracy = evaluate_accuracy(&trained.head, &val_features)
            .map_err(SpurankError::in_stage("eval"))?;
        let stratified = eval_stratified(&trained.head, &features, &slices)
            .map_err(SpurankError::in_stage("eval"))?;
        let noise = eval_noise_sweep(
            &trained.head,
            &manifest,
            &val_ids,
            &scores,
            backbone.as_ref(),
            &noise_config,
        )
        .map_err(SpurankError::in_stage("eval"))?;
        let ood = match (&ood_features, &mapping) {
            (Some(of), Some(m)) => Some(
                eval_ood(&trained.head, of, &manifest, m)
                    .map_err(SpurankError::in_stage("eval"))?,
            ),
            _ => None,
        };

        runs.push(RunReport {
            label: strategy_label(subset.strategy, config.invert_naming).to_string(),
            strategy: subset.strategy,
            k: subset.k,
            train: TrainSummary {
                final_objective: trained.final_objective,
                iterations: trained.iterations,
                grad_norm: trained.grad_norm,
                converged: trained.converged,
            },
            val_accuracy,
            stratified,
            noise,
            ood,
        });
    }

    // report
    let report = EvalReport {
        format: REPORT_FORMAT.to_string(),
        version: REPORT_VERSION,
        provenance: Provenance::new(
            dataset_digest,
            backend_id,
            backbone_id,
            config.seed,
            config.fingerprint(),
        ),
        runs,
        skipped_images: scores.skips.clone(),
    };
    emit_report(&report, &out).map_err(SpurankError::in_stage("report"))?;

    Ok(PipelineArtifacts {
        report,
        manifest,
        ranking_train,
        ranking_val,
        output_dir: out,
    })
}
