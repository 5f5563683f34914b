//! Frozen-backbone feature extraction with a binary on-disk cache.

pub mod cache;
pub mod mock;
pub mod process;

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Result, SpurankError};
use crate::manifest::DatasetManifest;
use crate::tensor::ImageTensor;

/// Penultimate-layer features for n images: row-major n x d f32 values with
/// aligned labels and image ids, rows sorted by image_id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub backbone_id: String,
    pub d: usize,
    pub image_ids: Vec<String>,
    pub labels: Vec<u32>,
    pub values: Vec<f32>,
}

impl FeatureMatrix {
    pub fn empty(backbone_id: &str, d: usize) -> Self {
        FeatureMatrix {
            backbone_id: backbone_id.to_string(),
            d,
            image_ids: Vec::new(),
            labels: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build from unordered rows, enforcing all invariants.
    pub fn from_rows(
        backbone_id: &str,
        d: usize,
        mut rows: Vec<(String, u32, Vec<f32>)>,
    ) -> Result<Self> {
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let mut m = FeatureMatrix::empty(backbone_id, d);
        for (image_id, label, row) in rows {
            if row.len() != d {
                return Err(SpurankError::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(SpurankError::NonFinite(format!("feature row `{image_id}`")));
            }
            if m.image_ids.last().is_some_and(|prev| *prev == image_id) {
                return Err(SpurankError::DuplicateImageId(image_id));
            }
            m.image_ids.push(image_id);
            m.labels.push(label);
            m.values.extend_from_slice(&row);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.image_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image_ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn get(&self, image_id: &str) -> Option<&[f32]> {
        self.image_ids
            .binary_search_by(|id| id.as_str().cmp(image_id))
            .ok()
            .map(|i| self.row(i))
    }

    /// Extract the rows for `ids` (any order, deduplicated by sort).
    pub fn select(&self, ids: &[String]) -> Result<FeatureMatrix> {
        let mut wanted: Vec<&String> = ids.iter().collect();
        wanted.sort();
        wanted.dedup();
        let mut rows = Vec::with_capacity(wanted.len());
        for id in wanted {
            let i = self
                .image_ids
                .binary_search_by(|have| have.as_str().cmp(id))
                .map_err(|_| SpurankError::MissingFeature(id.clone()))?;
            rows.push((id.clone(), self.labels[i], self.row(i).to_vec()));
        }
        FeatureMatrix::from_rows(&self.backbone_id, self.d, rows)
    }
}

/// A frozen backbone consumed behind this interface; deterministic given
/// (backbone_id, image bytes).
pub trait BackboneAdapter: Sync {
    fn backbone_id(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed_path(&self, image_path: &Path) -> Result<Vec<f32>>;
    /// Embed an in-memory tensor; the perturbation path feeds noisy images
    /// that exist only in memory.
    fn embed_tensor(&self, image: &ImageTensor) -> Result<Vec<f32>>;
}

/// Embed the requested ids (sorted, deduplicated), reusing cached rows
/// bit-exactly and appending newly computed ones.
pub fn extract_features(
    image_ids: &[String],
    manifest: &DatasetManifest,
    backbone: &dyn BackboneAdapter,
    cache_path: Option<&Path>,
) -> Result<FeatureMatrix> {
    let d = backbone.dim();
    let backbone_id = backbone.backbone_id();

    let mut wanted: Vec<&String> = image_ids.iter().collect();
    wanted.sort();
    wanted.dedup();
    for id in &wanted {
        if manifest.record(id).is_none() {
            return Err(SpurankError::UnknownImageId((*id).clone()));
        }
    }

    let cached = match cache_path {
        Some(path) => cache::read_feature_cache(path, backbone_id, d)?,
        None => cache::CachedFeatures::default(),
    };

    let missing: Vec<&String> = wanted
        .iter()
        .filter(|id| !cached.index.contains_key(id.as_str()))
        .copied()
        .collect();
    let computed: Vec<(String, Vec<f32>)> = missing
        .par_iter()
        .map(|id| {
            let record = manifest.record(id).expect("checked above");
            let row = backbone.embed_path(&manifest.image_path(record))?;
            if row.len() != d {
                return Err(SpurankError::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(SpurankError::NonFinite(format!("embedding of `{id}`")));
            }
            Ok(((*id).clone(), row))
        })
        .collect::<Result<_>>()?;
    let mut computed = computed;
    computed.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(path) = cache_path {
        cache::append_feature_cache(path, backbone_id, d, &computed)?;
    }

    let computed_map: HashMap<&str, &Vec<f32>> =
        computed.iter().map(|(id, row)| (id.as_str(), row)).collect();
    let mut rows = Vec::with_capacity(wanted.len());
    for id in wanted {
        let record = manifest.record(id).expect("checked above");
        let row: Vec<f32> = match cached.index.get(id.as_str()) {
            Some(&row_idx) => cached.row(row_idx, d).to_vec(),
            None => (*computed_map[id.as_str()]).clone(),
        };
        rows.push((id.clone(), record.class_id, row));
    }
    FeatureMatrix::from_rows(backbone_id, d, rows)
}

/// Assemble a matrix for `ids` from an existing cache, trusting the cache's
/// own header. Labels come from the manifest; a row absent from the cache
/// is an error rather than a trigger for recomputation.
pub fn load_matrix_from_cache(
    cache_path: &Path,
    ids: &[String],
    manifest: &DatasetManifest,
) -> Result<FeatureMatrix> {
    let (backbone_id, d) = cache::read_cache_identity(cache_path)?;
    let cached = cache::read_feature_cache(cache_path, &backbone_id, d)?;
    let mut wanted: Vec<&String> = ids.iter().collect();
    wanted.sort();
    wanted.dedup();
    let mut rows = Vec::with_capacity(wanted.len());
    for id in wanted {
        let record = manifest
            .record(id)
            .ok_or_else(|| SpurankError::UnknownImageId(id.clone()))?;
        let row_idx = *cached
            .index
            .get(id.as_str())
            .ok_or_else(|| SpurankError::MissingFeature(id.clone()))?;
        rows.push((id.clone(), record.class_id, cached.row(row_idx, d).to_vec()));
    }
    FeatureMatrix::from_rows(&backbone_id, d, rows)
}
