//! Out-of-process backbone speaking a line-delimited embed protocol that
//! mirrors the detector wire format. File request:
//! {request_id, image_path}; in-memory tensor request:
//! {request_id, tensor: {height, width, data_b64}} where data_b64 is the
//! base64 of row-major RGB f32 little-endian values. Response:
//! {request_id, embedding: [..]} with exactly d numbers. The command runs
//! under `sh -c`; the feature dimension must be declared up front because
//! caches are validated against it before any embed call.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpurankError};
use crate::seeding::sha256_hex;
use crate::tensor::ImageTensor;

use super::BackboneAdapter;

#[derive(Serialize)]
struct TensorPayload {
    height: usize,
    width: usize,
    data_b64: String,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    request_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    image_path: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tensor: Option<TensorPayload>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    request_id: String,
    embedding: Vec<f64>,
}

struct ChildIo {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
}

pub struct ProcessBackbone {
    backbone_id: String,
    dim: usize,
    io: Mutex<ChildIo>,
}

impl ProcessBackbone {
    pub fn spawn(command: &str, dim: usize, backbone_id: Option<String>) -> Result<Self> {
        if dim == 0 {
            return Err(SpurankError::Config("backbone dimension must be >= 1".into()));
        }
        let backbone_id = backbone_id
            .unwrap_or_else(|| format!("proc-{}", &sha256_hex(command.as_bytes())[..12]));
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| SpurankError::Backend {
                backend_id: backbone_id.clone(),
                image_id: String::new(),
                reason: format!("failed to spawn `{command}`: {e}"),
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ProcessBackbone {
            backbone_id,
            dim,
            io: Mutex::new(ChildIo {
                child,
                stdin,
                stdout,
                next_id: 0,
            }),
        })
    }

    fn backend_err(&self, context: &str, reason: String) -> SpurankError {
        SpurankError::Backend {
            backend_id: self.backbone_id.clone(),
            image_id: context.to_string(),
            reason,
        }
    }

    fn round_trip(&self, context: &str, request: EmbedRequest<'_>) -> Result<Vec<f32>> {
        let mut io = self.io.lock().expect("backbone mutex");
        let line = serde_json::to_string(&request).expect("request json");
        io.stdin
            .write_all(line.as_bytes())
            .and_then(|_| io.stdin.write_all(b"\n"))
            .and_then(|_| io.stdin.flush())
            .map_err(|e| self.backend_err(context, format!("write failed: {e}")))?;

        let mut response = String::new();
        let n = io
            .stdout
            .read_line(&mut response)
            .map_err(|e| self.backend_err(context, format!("read failed: {e}")))?;
        if n == 0 {
            return Err(self.backend_err(context, "backbone closed its output stream".into()));
        }
        let parsed: EmbedResponse = serde_json::from_str(response.trim_end())
            .map_err(|e| self.backend_err(context, format!("bad response line: {e}")))?;
        if parsed.request_id != request.request_id {
            return Err(self.backend_err(
                context,
                format!(
                    "response id {} does not match request {}",
                    parsed.request_id, request.request_id
                ),
            ));
        }
        if parsed.embedding.len() != self.dim {
            return Err(SpurankError::DimensionMismatch {
                expected: self.dim,
                got: parsed.embedding.len(),
            });
        }
        Ok(parsed.embedding.into_iter().map(|v| v as f32).collect())
    }

    fn next_request_id(&self) -> String {
        let mut io = self.io.lock().expect("backbone mutex");
        io.next_id += 1;
        format!("e{:08}", io.next_id)
    }
}

impl BackboneAdapter for ProcessBackbone {
    fn backbone_id(&self) -> &str {
        &self.backbone_id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_path(&self, image_path: &Path) -> Result<Vec<f32>> {
        let path_str = image_path.to_string_lossy().into_owned();
        let request_id = self.next_request_id();
        self.round_trip(
            &path_str,
            EmbedRequest {
                request_id,
                image_path: Some(&path_str),
                tensor: None,
            },
        )
    }

    fn embed_tensor(&self, image: &ImageTensor) -> Result<Vec<f32>> {
        let mut bytes = Vec::with_capacity(image.data.len() * 4);
        for v in &image.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let request_id = self.next_request_id();
        self.round_trip(
            "<in-memory tensor>",
            EmbedRequest {
                request_id,
                image_path: None,
                tensor: Some(TensorPayload {
                    height: image.height,
                    width: image.width,
                    data_b64: BASE64.encode(bytes),
                }),
            },
        )
    }
}

impl Drop for ProcessBackbone {
    fn drop(&mut self) {
        if let Ok(io) = self.io.get_mut() {
            let _ = io.child.kill();
            let _ = io.child.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Answers every request with a fixed 4-dim embedding, echoing the id.
    const ECHO_BACKBONE: &str = r#"while read line; do id=$(printf '%s' "$line" | sed -n 's/.*"request_id":"\([^"]*\)".*/\1/p'); printf '{"request_id":"%s","embedding":[0.5,-1.25,2.0,0.0]}\n' "$id"; done"#;

    #[test]
    fn embeds_paths_over_the_wire() {
        let backbone = ProcessBackbone::spawn(ECHO_BACKBONE, 4, Some("echo-bb".into())).unwrap();
        let v = backbone.embed_path(Path::new("/tmp/a.png")).unwrap();
        assert_eq!(v, vec![0.5, -1.25, 2.0, 0.0]);
    }

    #[test]
    fn embeds_tensors_over_the_wire() {
        let backbone = ProcessBackbone::spawn(ECHO_BACKBONE, 4, Some("echo-bb".into())).unwrap();
        let t = ImageTensor::zeros(4, 4);
        let v = backbone.embed_tensor(&t).unwrap();
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn wrong_dimension_is_an_error() {
        let backbone = ProcessBackbone::spawn(ECHO_BACKBONE, 7, Some("echo-bb".into())).unwrap();
        assert!(matches!(
            backbone.embed_path(Path::new("/tmp/a.png")).unwrap_err(),
            SpurankError::DimensionMismatch { expected: 7, got: 4 }
        ));
    }
}
