//! Feature cache: a JSON header line followed by raw row-major f32 LE rows,
//! with a sidecar index mapping image_id to row offset (row number within
//! the payload). Payload bytes are appended before index lines, so a torn
//! write leaves unindexed bytes, never a row pointing at garbage; readers
//! drop any trailing partial row or index line.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpurankError};

pub const FEATURE_CACHE_MAGIC: &str = "spurank-features";
pub const FEATURE_CACHE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct FeatureCacheHeader {
    magic: String,
    version: u32,
    backbone_id: String,
    d: usize,
    dtype: String,
    layout: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexLine {
    image_id: String,
    row_offset: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    PathBuf::from(format!("{}.idx", path.display()))
}

#[derive(Debug, Default)]
pub struct CachedFeatures {
    /// Complete rows, row-major.
    pub payload: Vec<f32>,
    /// image_id -> row offset into payload.
    pub index: HashMap<String, usize>,
}

impl CachedFeatures {
    pub fn row(&self, offset: usize, d: usize) -> &[f32] {
        &self.payload[offset * d..(offset + 1) * d]
    }
}

/// Peek a cache's (backbone_id, d) so standalone readers can open it
/// without re-deriving adapter settings.
pub fn read_cache_identity(path: &Path) -> Result<(String, usize)> {
    let bytes = std::fs::read(path).map_err(|e| SpurankError::io(path, e))?;
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: "missing header line".into(),
        })?;
    let header: FeatureCacheHeader =
        serde_json::from_slice(&bytes[..header_end]).map_err(|e| SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("bad cache header: {e}"),
        })?;
    Ok((header.backbone_id, header.d))
}

/// Load every complete indexed row. Missing files mean an empty cache;
/// mismatched backbone or dimension is refused.
pub fn read_feature_cache(path: &Path, backbone_id: &str, d: usize) -> Result<CachedFeatures> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Ok(CachedFeatures::default())
        }
        Err(e) => return Err(SpurankError::io(path, e)),
    };
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: "missing header line".into(),
        })?;
    let header: FeatureCacheHeader =
        serde_json::from_slice(&bytes[..header_end]).map_err(|e| SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("bad cache header: {e}"),
        })?;
    if header.magic != FEATURE_CACHE_MAGIC
        || header.version != FEATURE_CACHE_VERSION
        || header.dtype != "float32"
        || header.layout != "row-major"
    {
        return Err(SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("unsupported cache header {header:?}"),
        });
    }
    if header.backbone_id != backbone_id {
        return Err(SpurankError::CacheBackendMismatch {
            path: path.to_path_buf(),
            expected: backbone_id.to_string(),
            found: header.backbone_id,
        });
    }
    if header.d != d {
        return Err(SpurankError::CacheDimensionMismatch {
            path: path.to_path_buf(),
            expected: d,
            found: header.d,
        });
    }

    let payload_bytes = &bytes[header_end + 1..];
    let row_bytes = d * 4;
    let complete_rows = payload_bytes.len() / row_bytes;
    let mut payload = Vec::with_capacity(complete_rows * d);
    for chunk in payload_bytes[..complete_rows * row_bytes].chunks_exact(4) {
        payload.push(f32::from_le_bytes(chunk.try_into().expect("4-byte chunk")));
    }

    let mut index = HashMap::new();
    let sidecar = sidecar_path(path);
    match std::fs::read_to_string(&sidecar) {
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(SpurankError::io(&sidecar, e)),
        Ok(text) => {
            for (idx, raw) in text.split_inclusive('\n').enumerate() {
                let torn = !raw.ends_with('\n');
                let line = raw.trim_end();
                if line.is_empty() {
                    continue;
                }
                match serde_json::from_str::<IndexLine>(line) {
                    Ok(entry) => {
                        if entry.row_offset < complete_rows {
                            index.entry(entry.image_id).or_insert(entry.row_offset);
                        }
                    }
                    Err(_) if torn => break,
                    Err(e) => {
                        return Err(SpurankError::MalformedLine {
                            path: sidecar.clone(),
                            line: idx + 1,
                            reason: e.to_string(),
                        })
                    }
                }
            }
        }
    }
    Ok(CachedFeatures { payload, index })
}

/// Append rows and their index entries, creating the cache if needed.
pub fn append_feature_cache(
    path: &Path,
    backbone_id: &str,
    d: usize,
    rows: &[(String, Vec<f32>)],
) -> Result<()> {
    if rows.is_empty() {
        return Ok(());
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| SpurankError::io(parent, e))?;
        }
    }

    let header_json = serde_json::to_string(&FeatureCacheHeader {
        magic: FEATURE_CACHE_MAGIC.to_string(),
        version: FEATURE_CACHE_VERSION,
        backbone_id: backbone_id.to_string(),
        d,
        dtype: "float32".to_string(),
        layout: "row-major".to_string(),
    })
    .expect("header json");

    let existing_rows = match std::fs::metadata(path) {
        Ok(meta) => {
            let header_len = header_json.len() as u64 + 1;
            (meta.len().saturating_sub(header_len) / (d as u64 * 4)) as usize
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            std::fs::write(path, format!("{header_json}\n"))
                .map_err(|e| SpurankError::io(path, e))?;
            0
        }
        Err(e) => return Err(SpurankError::io(path, e)),
    };

    let mut payload = Vec::with_capacity(rows.len() * d * 4);
    let mut index_lines = Vec::new();
    for (i, (image_id, row)) in rows.iter().enumerate() {
        debug_assert_eq!(row.len(), d);
        for v in row {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        let entry = IndexLine {
            image_id: image_id.clone(),
            row_offset: existing_rows + i,
        };
        writeln!(index_lines, "{}", serde_json::to_string(&entry).expect("index json"))
            .expect("write to vec");
    }

    let mut file = std::fs::OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| SpurankError::io(path, e))?;
    file.write_all(&payload).map_err(|e| SpurankError::io(path, e))?;
    drop(file);

    let sidecar = sidecar_path(path);
    let mut idx_file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&sidecar)
        .map_err(|e| SpurankError::io(&sidecar, e))?;
    idx_file
        .write_all(&index_lines)
        .map_err(|e| SpurankError::io(&sidecar, e))
}
