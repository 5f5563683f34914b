//! Head evaluation: rank-stratified slices, the noise sweep over
//! (alpha, region) conditions, and restricted-logit accuracy on a
//! distribution-shifted split. All reductions iterate images in sorted
//! image_id order so reports do not depend on scheduling.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::ScoreTable;
use crate::error::{Result, SpurankError};
use crate::features::{BackboneAdapter, FeatureMatrix};
use crate::linear::{predict, predict_rows, LinearHead};
use crate::manifest::DatasetManifest;
use crate::perturb::{build_mask, inject_noise, NoiseConfig, Region};
use crate::ranking::EvalSlice;
use crate::tensor::ImageTensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceAccuracy {
    pub i: usize,
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedReport {
    /// Non-empty slices in ascending i.
    pub slices: Vec<SliceAccuracy>,
    /// Unweighted mean over the reported slices.
    pub mean_accuracy: f64,
    /// Slice indices that had no members at all.
    pub empty_slices: Vec<usize>,
}

/// Accuracy per rank slice. Every member must have a feature row.
pub fn eval_stratified(
    head: &LinearHead,
    features: &FeatureMatrix,
    slices: &[EvalSlice],
) -> Result<StratifiedReport> {
    let mut out = Vec::new();
    let mut empty = Vec::new();
    for slice in slices {
        if slice.members.is_empty() {
            empty.push(slice.i);
            continue;
        }
        let ids: Vec<String> = slice.members.iter().map(|(_, id)| id.clone()).collect();
        let selected = features.select(&ids)?;
        let pred = predict(head, &selected)?;
        let by_id: BTreeMap<&str, u32> = selected
            .image_ids
            .iter()
            .zip(pred.argmax.iter())
            .map(|(id, &p)| (id.as_str(), p))
            .collect();
        let correct = slice
            .members
            .iter()
            .filter(|(class_id, image_id)| by_id[image_id.as_str()] == *class_id)
            .count();
        out.push(SliceAccuracy {
            i: slice.i,
            n: slice.members.len(),
            accuracy: correct as f64 / slice.members.len() as f64,
        });
    }
    if out.is_empty() {
        return Err(SpurankError::EmptyInput("stratified eval slices".into()));
    }
    let mean_accuracy = out.iter().map(|s| s.accuracy).sum::<f64>() / out.len() as f64;
    Ok(StratifiedReport {
        slices: out,
        mean_accuracy,
        empty_slices: empty,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseEvalConfig {
    pub alphas: Vec<f64>,
    pub regions: Vec<Region>,
    pub seed: u64,
}

impl Default for NoiseEvalConfig {
    fn default() -> Self {
        NoiseEvalConfig {
            alphas: vec![10.0, 100.0, 250.0],
            regions: vec![Region::Fg, Region::Bg],
            seed: 0,
        }
    }
}

impl NoiseEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(SpurankError::Config(
                "noise alphas must be finite and > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub alpha: f64,
    /// None marks the clean (alpha = 0) baseline row.
    pub region: Option<Region>,
    /// Images scored in this row.
    pub n: usize,
    /// Images whose requested region was empty, excluded from `n`.
    pub excluded: usize,
    /// None when every image was excluded.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFailure {
    pub image_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepReport {
    /// Clean baseline first, then one row per (alpha, region) in config order.
    pub rows: Vec<NoiseRow>,
    /// Images dropped from every row (unreadable, unembeddable), sorted.
    pub failures: Vec<EvalFailure>,
}

/// Per-image outcome for every condition, in config order.
struct ImageOutcomes {
    clean_correct: bool,
    /// One entry per (alpha, region): None when the region was empty.
    perturbed_correct: Vec<Option<bool>>,
}

fn eval_one_image(
    head: &LinearHead,
    manifest: &DatasetManifest,
    scores: &ScoreTable,
    backbone: &dyn BackboneAdapter,
    config: &NoiseEvalConfig,
    image_id: &str,
) -> Result<ImageOutcomes> {
    let record = manifest
        .record(image_id)
        .ok_or_else(|| SpurankError::UnknownImageId(image_id.to_string()))?;
    let score = scores
        .get(image_id)
        .ok_or_else(|| SpurankError::MissingScore(image_id.to_string()))?;
    let image = ImageTensor::load_png(&manifest.image_path(record))?;
    let mask = build_mask(image_id, &score.boxes, image.width, image.height)?;

    let predict_tensor = |t: &ImageTensor| -> Result<u32> {
        let row = backbone.embed_tensor(t)?;
        let x = Array2::from_shape_vec((1, row.len()), row.iter().map(|&v| v as f64).collect())
            .expect("row-shaped");
        Ok(predict_rows(head, &x)?.argmax[0])
    };

    let clean_correct = predict_tensor(&image)? == record.class_id;
    let mut perturbed_correct = Vec::with_capacity(config.alphas.len() * config.regions.len());
    for &alpha in &config.alphas {
        for &region in &config.regions {
            let noise = NoiseConfig {
                alpha,
                region,
                seed: config.seed,
            };
            let outcome = inject_noise(&image, &mask, &noise)?;
            if outcome.degenerate {
                perturbed_correct.push(None);
            } else {
                perturbed_correct.push(Some(predict_tensor(&outcome.image)? == record.class_id));
            }
        }
    }
    Ok(ImageOutcomes {
        clean_correct,
        perturbed_correct,
    })
}

/// Sweep noise conditions over `image_ids`. Images that fail to load or
/// embed are listed in `failures` and dropped from every row; an image
/// whose requested region is empty is excluded (and counted) only from
/// that row.
pub fn eval_noise_sweep(
    head: &LinearHead,
    manifest: &DatasetManifest,
    image_ids: &[String],
    scores: &ScoreTable,
    backbone: &dyn BackboneAdapter,
    config: &NoiseEvalConfig,
) -> Result<NoiseSweepReport> {
    config.validate()?;
    let mut ids: Vec<&String> = image_ids.iter().collect();
    ids.sort();
    ids.dedup();
    if ids.is_empty() {
        return Err(SpurankError::EmptyInput("noise sweep image ids".into()));
    }

    let outcomes: Vec<(String, Result<ImageOutcomes>)> = ids
        .par_iter()
        .map(|id| {
            (
                id.to_string(),
                eval_one_image(head, manifest, scores, backbone, config, id),
            )
        })
        .collect();

    // ids were sorted going in; par_iter().collect() preserves that order.
    let mut failures = Vec::new();
    let mut ok = Vec::new();
    for (image_id, outcome) in outcomes {
        match outcome {
            Ok(o) => ok.push(o),
            Err(SpurankError::UnknownImageId(id)) => {
                return Err(SpurankError::UnknownImageId(id))
            }
            Err(SpurankError::MissingScore(id)) => return Err(SpurankError::MissingScore(id)),
            Err(e) => failures.push(EvalFailure {
                image_id,
                reason: e.to_string(),
            }),
        }
    }
    if ok.is_empty() {
        return Err(SpurankError::EmptyInput(
            "noise sweep: every image failed".into(),
        ));
    }

    let mut rows = Vec::new();
    let clean_correct = ok.iter().filter(|o| o.clean_correct).count();
    rows.push(NoiseRow {
        alpha: 0.0,
        region: None,
        n: ok.len(),
        excluded: 0,
        accuracy: Some(clean_correct as f64 / ok.len() as f64),
    });
    let mut condition = 0;
    for &alpha in &config.alphas {
        for &region in &config.regions {
            let mut n = 0;
            let mut excluded = 0;
            let mut correct = 0;
            for o in &ok {
                match o.perturbed_correct[condition] {
                    Some(true) => {
                        n += 1;
                        correct += 1;
                    }
                    Some(false) => n += 1,
                    None => excluded += 1,
                }
            }
            rows.push(NoiseRow {
                alpha,
                region: Some(region),
                n,
                excluded,
                accuracy: (n > 0).then(|| correct as f64 / n as f64),
            });
            condition += 1;
        }
    }
    Ok(NoiseSweepReport { rows, failures })
}

/// Shifted-split class name -> base-head class id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodMapping {
    pub by_name: BTreeMap<String, u32>,
}

/// Parse a mapping file: one `name id` pair per line, whitespace separated;
/// `#` starts a comment; blank lines are skipped.
pub fn parse_ood_mapping(text: &str, origin: &Path) -> Result<OodMapping> {
    let mut by_name = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(SpurankError::MalformedLine {
                path: origin.to_path_buf(),
                line: lineno + 1,
                reason: format!("expected 'name id', got {} tokens", tokens.len()),
            });
        }
        let class_id: u32 = tokens[1].parse().map_err(|_| SpurankError::MalformedLine {
            path: origin.to_path_buf(),
            line: lineno + 1,
            reason: format!("'{}' is not a class id", tokens[1]),
        })?;
        if by_name.insert(tokens[0].to_string(), class_id).is_some() {
            return Err(SpurankError::MalformedLine {
                path: origin.to_path_buf(),
                line: lineno + 1,
                reason: format!("duplicate mapping for '{}'", tokens[0]),
            });
        }
    }
    if by_name.is_empty() {
        return Err(SpurankError::EmptyInput("ood mapping".into()));
    }
    Ok(OodMapping { by_name })
}

pub fn load_ood_mapping(path: &Path) -> Result<OodMapping> {
    let text = std::fs::read_to_string(path).map_err(|e| SpurankError::io(path, e))?;
    parse_ood_mapping(&text, path)
}

/// Identity mapping over a manifest's class table, for shifted splits that
/// reuse the base label space.
pub fn identity_ood_mapping(manifest: &DatasetManifest) -> OodMapping {
    OodMapping {
        by_name: manifest
            .classes()
            .iter()
            .map(|(&id, name)| (name.clone(), id))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodReport {
    /// Argmax taken over mapped target classes only.
    pub restricted_accuracy: f64,
    /// Argmax over the full head.
    pub unrestricted_accuracy: f64,
    pub n: usize,
    /// Distinct target classes in the restriction set.
    pub restricted_classes: usize,
}

/// Evaluate a head on shifted-split rows. Row labels are the shifted
/// split's class ids; the mapping (via the manifest's class names) gives
/// each row its base-head target. The restricted argmax only considers the
/// mapping's codomain.
pub fn eval_ood(
    head: &LinearHead,
    features: &FeatureMatrix,
    manifest: &DatasetManifest,
    mapping: &OodMapping,
) -> Result<OodReport> {
    if features.is_empty() {
        return Err(SpurankError::EmptyInput("ood features".into()));
    }
    let mut restriction: Vec<u32> = mapping.by_name.values().copied().collect();
    restriction.sort_unstable();
    restriction.dedup();
    let restricted_cols: Vec<usize> = restriction
        .iter()
        .map(|id| {
            head.class_ids.binary_search(id).map_err(|_| {
                SpurankError::Config(format!("mapped class {id} is not in the trained head"))
            })
        })
        .collect::<Result<_>>()?;

    let targets: Vec<u32> = features
        .labels
        .iter()
        .map(|&ood_class| {
            let name = manifest.class_name(ood_class).ok_or_else(|| {
                SpurankError::UnmappedOodClass(format!("class id {ood_class}"))
            })?;
            mapping
                .by_name
                .get(name)
                .copied()
                .ok_or_else(|| SpurankError::UnmappedOodClass(name.to_string()))
        })
        .collect::<Result<_>>()?;

    let pred = predict(head, features)?;
    let mut restricted_ok = 0;
    let mut unrestricted_ok = 0;
    for (i, &target) in targets.iter().enumerate() {
        let row = pred.probs.row(i);
        let mut best = restricted_cols[0];
        for &col in &restricted_cols[1..] {
            if row[col] > row[best] {
                best = col;
            }
        }
        if head.class_ids[best] == target {
            restricted_ok += 1;
        }
        if pred.argmax[i] == target {
            unrestricted_ok += 1;
        }
    }
    Ok(OodReport {
        restricted_accuracy: restricted_ok as f64 / targets.len() as f64,
        unrestricted_accuracy: unrestricted_ok as f64 / targets.len() as f64,
        n: targets.len(),
        restricted_classes: restriction.len(),
    })
}
