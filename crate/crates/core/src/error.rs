//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, SpurankError>;

#[derive(Debug, thiserror::Error)]
pub enum SpurankError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed line: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("duplicate image_id `{0}`")]
    DuplicateImageId(String),

    #[error("record `{image_id}` has class_id {class_id} absent from the class map")]
    UnknownClassId { image_id: String, class_id: u32 },

    #[error("unknown image_id `{0}`")]
    UnknownImageId(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid image `{path}`: {reason}")]
    BadImage { path: PathBuf, reason: String },

    #[error("detector backend `{backend_id}` failed on `{image_id}`: {reason}")]
    Backend {
        backend_id: String,
        image_id: String,
        reason: String,
    },

    #[error("cache `{path}` was written by `{found}` but `{expected}` is configured")]
    CacheBackendMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("cache `{path}` holds {found}-dim rows but the adapter produces {expected}")]
    CacheDimensionMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("class {class_id} has {available} images, fewer than k={k}")]
    SubsetTooLarge {
        class_id: u32,
        k: usize,
        available: usize,
    },

    #[error("no score for in-split image `{0}`")]
    MissingScore(String),

    #[error("no feature row for image `{0}`")]
    MissingFeature(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("line search failed to find descent at iteration {iteration}")]
    LineSearchFailed { iteration: usize },

    #[error("class {0} has no training rows")]
    EmptyClass(u32),

    #[error("invalid detection box: {0}")]
    InvalidBox(String),

    #[error("ood class `{0}` has no mapping to a base class")]
    UnmappedOodClass(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<SpurankError>,
    },

    #[error("output dir `{0}` is locked by another pipeline run (remove .lock if stale)")]
    OutputLocked(PathBuf),
}

impl SpurankError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SpurankError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(stage: &'static str) -> impl FnOnce(SpurankError) -> SpurankError {
        move |source| SpurankError::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// True for errors caused by user configuration rather than stage execution.
    pub fn is_config(&self) -> bool {
        matches!(self, SpurankError::Config(_))
    }
}
