//! Dataset manifests.
//!
//! A manifest is a UTF-8 line-delimited file: the first line is a header
//! object carrying `{root, classes}`, every following line is one record
//! object with `{image_id, class_id, class_name, split, path}`. Records are
//! kept sorted by `image_id`; image paths are relative to the manifest root.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpurankError};

pub const MANIFEST_FORMAT: &str = "spurank-manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Ood,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Val => write!(f, "val"),
            Split::Ood => write!(f, "ood"),
        }
    }
}

impl FromStr for Split {
    type Err = SpurankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "ood" => Ok(Split::Ood),
            other => Err(SpurankError::Config(format!(
                "unknown split `{other}` (expected train, val, or ood)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub class_id: u32,
    pub class_name: String,
    pub split: Split,
    /// Storage path relative to the manifest root.
    pub path: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestHeader {
    format: String,
    version: u32,
    root: String,
    classes: BTreeMap<u32, String>,
}

/// An immutable, id-sorted collection of image records plus the class map.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    root: PathBuf,
    classes: BTreeMap<u32, String>,
    records: Vec<ImageRecord>,
    by_id: HashMap<String, usize>,
}

impl DatasetManifest {
    /// Build a manifest from parts. Records are sorted by `image_id`;
    /// duplicate ids and class ids missing from the class map are errors.
    pub fn new(
        root: impl Into<PathBuf>,
        classes: BTreeMap<u32, String>,
        mut records: Vec<ImageRecord>,
    ) -> Result<Self> {
        records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        let mut by_id = HashMap::with_capacity(records.len());
        for (idx, rec) in records.iter().enumerate() {
            if by_id.insert(rec.image_id.clone(), idx).is_some() {
                return Err(SpurankError::DuplicateImageId(rec.image_id.clone()));
            }
            if !classes.contains_key(&rec.class_id) {
                return Err(SpurankError::UnknownClassId {
                    image_id: rec.image_id.clone(),
                    class_id: rec.class_id,
                });
            }
        }
        Ok(DatasetManifest {
            root: root.into(),
            classes,
            records,
            by_id,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn classes(&self) -> &BTreeMap<u32, String> {
        &self.classes
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, image_id: &str) -> Option<&ImageRecord> {
        self.by_id.get(image_id).map(|&i| &self.records[i])
    }

    pub fn by_split(&self, split: Split) -> impl Iterator<Item = &ImageRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    /// Absolute (root-joined) path of a record's image file.
    pub fn image_path(&self, record: &ImageRecord) -> PathBuf {
        self.root.join(&record.path)
    }

    pub fn class_name(&self, class_id: u32) -> Option<&str> {
        self.classes.get(&class_id).map(String::as_str)
    }

    /// Serialize to the line-delimited manifest format. The root is written
    /// relative to the manifest's own directory when it lies below it, so a
    /// saved dataset stays relocatable and byte-stable across locations.
    pub fn save(&self, path: &Path) -> Result<()> {
        let parent = path.parent().unwrap_or(Path::new(""));
        let root = if self.root == parent {
            ".".to_string()
        } else {
            match self.root.strip_prefix(parent) {
                Ok(rel) => rel.to_string_lossy().into_owned(),
                Err(_) => self.root.to_string_lossy().into_owned(),
            }
        };
        let header = ManifestHeader {
            format: MANIFEST_FORMAT.to_string(),
            version: MANIFEST_VERSION,
            root,
            classes: self.classes.clone(),
        };
        let mut out = Vec::new();
        writeln!(out, "{}", serde_json::to_string(&header).expect("header json"))
            .expect("write to vec");
        for rec in &self.records {
            writeln!(out, "{}", serde_json::to_string(rec).expect("record json"))
                .expect("write to vec");
        }
        std::fs::write(path, out).map_err(|e| SpurankError::io(path, e))
    }
}

/// Parse a manifest file. Records come back sorted by `image_id`; a relative
/// root is resolved against the manifest file's directory.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let file = std::fs::File::open(path).map_err(|e| SpurankError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let header: ManifestHeader = match lines.next() {
        None => {
            return Err(SpurankError::MalformedLine {
                path: path.to_path_buf(),
                line: 1,
                reason: "empty file, expected header line".into(),
            })
        }
        Some((_, line)) => {
            let line = line.map_err(|e| SpurankError::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| SpurankError::MalformedLine {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("bad header: {e}"),
            })?
        }
    };
    if header.format != MANIFEST_FORMAT {
        return Err(SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("unexpected format `{}`", header.format),
        });
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| SpurankError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ImageRecord =
            serde_json::from_str(&line).map_err(|e| SpurankError::MalformedLine {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?;
        records.push(rec);
    }

    let root = PathBuf::from(&header.root);
    let root = if root.is_absolute() {
        root
    } else {
        path.parent().unwrap_or(Path::new(".")).join(root)
    };
    DatasetManifest::new(root, header.classes, records)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ValidationIssue {
    DuplicateImageId { image_id: String },
    UnknownClassId { image_id: String, class_id: u32 },
    EmptyClassName { image_id: String },
    PathEscapesRoot { image_id: String, path: String },
    MissingFile { image_id: String, path: String },
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Check every manifest invariant and (optionally) that each image file is
/// readable. All problems are report entries; nothing short-circuits.
pub fn validate_manifest(manifest: &DatasetManifest, check_files: bool) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashMap::new();
    for rec in manifest.records() {
        if seen.insert(rec.image_id.as_str(), ()).is_some() {
            report.issues.push(ValidationIssue::DuplicateImageId {
                image_id: rec.image_id.clone(),
            });
        }
        if !manifest.classes().contains_key(&rec.class_id) {
            report.issues.push(ValidationIssue::UnknownClassId {
                image_id: rec.image_id.clone(),
                class_id: rec.class_id,
            });
        }
        if rec.class_name.is_empty() {
            report.issues.push(ValidationIssue::EmptyClassName {
                image_id: rec.image_id.clone(),
            });
        }
        let p = Path::new(&rec.path);
        if p.is_absolute() || p.components().any(|c| matches!(c, std::path::Component::ParentDir))
        {
            report.issues.push(ValidationIssue::PathEscapesRoot {
                image_id: rec.image_id.clone(),
                path: rec.path.clone(),
            });
        } else if check_files && !manifest.image_path(rec).is_file() {
            report.issues.push(ValidationIssue::MissingFile {
                image_id: rec.image_id.clone(),
                path: rec.path.clone(),
            });
        }
    }
    report
}
