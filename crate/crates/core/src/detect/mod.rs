//! Detection scoring: query an open-vocabulary detector per image, reduce
//! box confidences to one scalar score, and persist a resumable cache.

pub mod cache;
pub mod mock;
pub mod process;

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpurankError};
use crate::manifest::DatasetManifest;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub score: f64,
    pub query_index: usize,
}

impl DetectionBox {
    pub fn validate(&self) -> Result<()> {
        let coords = [self.x_min, self.y_min, self.x_max, self.y_max];
        if coords.iter().any(|c| !c.is_finite()) || !self.score.is_finite() {
            return Err(SpurankError::NonFinite("detection box".into()));
        }
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(SpurankError::InvalidBox(format!(
                "degenerate box ({}, {})-({}, {})",
                self.x_min, self.y_min, self.x_max, self.y_max
            )));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(SpurankError::InvalidBox(format!(
                "score {} outside [0,1]",
                self.score
            )));
        }
        Ok(())
    }
}

/// Order: score descending, then (x_min, y_min) ascending.
pub fn sort_boxes(boxes: &mut [DetectionBox]) {
    boxes.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.x_min.total_cmp(&b.x_min))
            .then(a.y_min.total_cmp(&b.y_min))
    });
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub image_id: String,
    pub class_id: u32,
    pub score: f64,
    pub boxes: Vec<DetectionBox>,
    pub backend_id: String,
}

/// How box confidences for the target query reduce to one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Maximum confidence; the default retrieval reduction.
    #[default]
    Max,
    /// Sum of confidences, clamped to 1.
    Sum,
    /// Mean of the top 3 confidences (fewer if fewer boxes).
    Top3Mean,
}

impl std::fmt::Display for Aggregation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Aggregation::Max => write!(f, "max"),
            Aggregation::Sum => write!(f, "sum"),
            Aggregation::Top3Mean => write!(f, "top3-mean"),
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = SpurankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Aggregation::Max),
            "sum" => Ok(Aggregation::Sum),
            "top3-mean" => Ok(Aggregation::Top3Mean),
            other => Err(SpurankError::Config(format!(
                "unknown aggregation `{other}` (expected max, sum, or top3-mean)"
            ))),
        }
    }
}

/// Reduce boxes matching `target_query` to one score in [0,1]; 0 if none
/// match. Permutation-invariant in the box list.
pub fn aggregate_boxes(boxes: &[DetectionBox], target_query: usize) -> f64 {
    aggregate_boxes_with(boxes, target_query, Aggregation::Max)
}

pub fn aggregate_boxes_with(
    boxes: &[DetectionBox],
    target_query: usize,
    aggregation: Aggregation,
) -> f64 {
    let mut matched: Vec<f64> = boxes
        .iter()
        .filter(|b| b.query_index == target_query)
        .map(|b| b.score)
        .collect();
    if matched.is_empty() {
        return 0.0;
    }
    match aggregation {
        Aggregation::Max => matched.iter().copied().fold(0.0, f64::max),
        Aggregation::Sum => matched.iter().sum::<f64>().min(1.0),
        Aggregation::Top3Mean => {
            matched.sort_by(|a, b| b.total_cmp(a));
            let top = &matched[..matched.len().min(3)];
            top.iter().sum::<f64>() / top.len() as f64
        }
    }
}

/// A detector consumed behind this interface; must be pure in
/// (backend_id, image bytes, queries).
pub trait DetectorBackend: Sync {
    fn backend_id(&self) -> &str;
    fn detect(&self, image_path: &Path, queries: &[String]) -> Result<Vec<DetectionBox>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipEntry {
    pub image_id: String,
    pub reason: String,
}

/// All score records for one manifest, sorted by image_id, plus the images
/// that could not be scored.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub backend_id: String,
    pub records: Vec<ScoreRecord>,
    pub skips: Vec<SkipEntry>,
}

impl ScoreTable {
    pub fn get(&self, image_id: &str) -> Option<&ScoreRecord> {
        self.records
            .binary_search_by(|r| r.image_id.as_str().cmp(image_id))
            .ok()
            .map(|i| &self.records[i])
    }
}

#[derive(Debug, Clone)]
pub struct ScoringOptions {
    /// `{class_name}` is substituted with the record's class name.
    pub template: String,
    pub aggregation: Aggregation,
    /// Extra attempts after a backend failure before recording a skip.
    pub retries: usize,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        ScoringOptions {
            template: "a photo of a {class_name}".to_string(),
            aggregation: Aggregation::Max,
            retries: 1,
        }
    }
}

pub fn render_prompt(template: &str, class_name: &str) -> String {
    template.replace("{class_name}", class_name)
}

///// Score one image: single prompt query, boxes sorted, score aggregated
/// over query 0.
pub fn score_image(
    record: &crate::manifest::ImageRecord,
    image_path: &Path,
    backend: &dyn DetectorBackend,
    opts: &ScoringOptions,
) -> Result<ScoreRecord> {
    let queries = vec![render_prompt(&opts.template, &record.class_name)];
    let mut boxes = backend.detect(image_path, &queries)?;
    for b in &boxes {
        b.validate()?;
    }
    sort_boxes(&mut boxes);
    let score = aggregate_boxes_with(&boxes, 0, opts.aggregation);
    Ok(ScoreRecord {
        image_id: record.image_id.clone(),
        class_id: record.class_id,
        score,
        boxes,
        backend_id: backend.backend_id().to_string(),
    })
}

/// Score every manifest record, reusing cached records and appending new
/// ones. Failures after retries become skip entries, never silent zeros.
pub fn batch_score(
    manifest: &DatasetManifest,
    backend: &dyn DetectorBackend,
    cache_path: &Path,
    opts: &ScoringOptions,
) -> Result<ScoreTable> {
    let backend_id = backend.backend_id().to_string();
    let cached = cache::read_score_cache(cache_path, &backend_id, opts)?;
    let cached_map: HashMap<&str, &ScoreRecord> =
        cached.iter().map(|r| (r.image_id.as_str(), r)).collect();

    let missing: Vec<_> = manifest
        .records()
        .iter()
        .filter(|r| !cached_map.contains_key(r.image_id.as_str()))
        .collect();

    let results: Vec<std::result::Result<ScoreRecord, SkipEntry>> = missing
        .par_iter()
        .map(|record| {
            let path = manifest.image_path(record);
            let mut last_err = None;
            for _ in 0..=opts.retries {
                match score_image(record, &path, backend, opts) {
                    Ok(rec) => return Ok(rec),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(SkipEntry {
                image_id: record.image_id.clone(),
                reason: last_err.expect("at least one attempt").to_string(),
            })
        })
        .collect();

    let mut new_records = Vec::new();
    let mut skips = Vec::new();
    for res in results {
        match res {
            Ok(rec) => new_records.push(rec),
            Err(skip) => skips.push(skip),
        }
    }
    new_records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    skips.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    cache::append_score_cache(cache_path, &backend_id, opts, &new_records)?;

    let mut records: Vec<ScoreRecord> = manifest
        .records()
        .iter()
        .filter_map(|r| {
            cached_map
                .get(r.image_id.as_str())
                .map(|&rec| rec.clone())
                .or_else(|| {
                    new_records
                        .binary_search_by(|n| n.image_id.as_str().cmp(r.image_id.as_str()))
                        .ok()
                        .map(|i| new_records[i].clone())
                })
        })
        .collect();
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    Ok(ScoreTable {
        backend_id,
        records,
        skips,
    })
}
