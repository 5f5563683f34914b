//! Score cache: line-delimited ScoreRecord JSON under a header line that
//! pins backend_id, prompt template, and aggregation. Appends are whole
//! lines, so a torn trailing line (no final newline) is dropped on read.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpurankError};

use super::{ScoreRecord, ScoringOptions};

pub const SCORE_CACHE_FORMAT: &str = "spurank-scores";
pub const SCORE_CACHE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CacheHeader {
    format: String,
    version: u32,
    backend_id: String,
    template: String,
    aggregation: super::Aggregation,
}

impl CacheHeader {
    fn new(backend_id: &str, opts: &ScoringOptions) -> Self {
        CacheHeader {
            format: SCORE_CACHE_FORMAT.to_string(),
            version: SCORE_CACHE_VERSION,
            backend_id: backend_id.to_string(),
            template: opts.template.clone(),
            aggregation: opts.aggregation,
        }
    }
}

/// Read cached records compatible with (backend_id, options). A missing file
/// is an empty cache; a header mismatch is refused so stale scores can never
/// leak into a run.
pub fn read_score_cache(
    path: &Path,
    backend_id: &str,
    opts: &ScoringOptions,
) -> Result<Vec<ScoreRecord>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(SpurankError::io(path, e)),
    };
    let mut lines = text.split_inclusive('\n').enumerate();

    let header: CacheHeader = match lines.next() {
        None => return Ok(Vec::new()),
        Some((_, line)) => {
            serde_json::from_str(line.trim_end()).map_err(|e| SpurankError::MalformedLine {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("bad cache header: {e}"),
            })?
        }
    };
    if header.format != SCORE_CACHE_FORMAT || header.version != SCORE_CACHE_VERSION {
        return Err(SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("unsupported cache format {}/{}", header.format, header.version),
        });
    }
    if header.backend_id != backend_id {
        return Err(SpurankError::CacheBackendMismatch {
            path: path.to_path_buf(),
            expected: backend_id.to_string(),
            found: header.backend_id,
        });
    }
    if header.template != opts.template || header.aggregation != opts.aggregation {
        return Err(SpurankError::CacheBackendMismatch {
            path: path.to_path_buf(),
            expected: format!("template `{}`, aggregation {}", opts.template, opts.aggregation),
            found: format!(
                "template `{}`, aggregation {}",
                header.template, header.aggregation
            ),
        });
    }

    let mut records = Vec::new();
    for (idx, raw) in lines {
        let torn = !raw.ends_with('\n');
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        match serde_json::from_str::<ScoreRecord>(line) {
            Ok(rec) => records.push(rec),
            Err(_) if torn => break,
            Err(e) => {
                return Err(SpurankError::MalformedLine {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(records)
}

/// Load a cache standalone, trusting its own header. Later stages read
/// caches written by earlier ones without re-deriving scoring options.
pub fn load_score_table(path: &Path) -> Result<super::ScoreTable> {
    let text = std::fs::read_to_string(path).map_err(|e| SpurankError::io(path, e))?;
    let first = text.lines().next().unwrap_or_default();
    let header: CacheHeader =
        serde_json::from_str(first).map_err(|e| SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("bad cache header: {e}"),
        })?;
    let opts = ScoringOptions {
        template: header.template.clone(),
        aggregation: header.aggregation,
        retries: 0,
    };
    let mut records = read_score_cache(path, &header.backend_id, &opts)?;
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    records.dedup_by(|a, b| a.image_id == b.image_id);
    Ok(super::ScoreTable {
        backend_id: header.backend_id,
        records,
        skips: Vec::new(),
    })
}

/// Append records, creating the file with its header first if needed.
pub fn append_score_cache(
    path: &Path,
    backend_id: &str,
    opts: &ScoringOptions,
    records: &[ScoreRecord],
) -> Result<()> {
    if records.is_empty() {
        return Ok(());
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| SpurankError::io(parent, e))?;
        }
    }
    let fresh = !path.exists();
    let mut buf = Vec::new();
    if fresh {
        let header = CacheHeader::new(backend_id, opts);
        writeln!(buf, "{}", serde_json::to_string(&header).expect("header json"))
            .expect("write to vec");
    }
    for rec in records {
        writeln!(buf, "{}", serde_json::to_string(rec).expect("record json"))
            .expect("write to vec");
    }
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| SpurankError::io(path, e))?;
    file.write_all(&buf).map_err(|e| SpurankError::io(path, e))
}
