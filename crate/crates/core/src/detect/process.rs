//! Out-of-process detector speaking the line-delimited wire protocol:
//! request {request_id, image_path, queries} in, response
//! {request_id, boxes: [{x_min,y_min,x_max,y_max,score,query_index},...]}
//! out, one JSON object per line. The command runs under `sh -c`, so quoting
//! works as in a shell. Requests are serialized over a single child; callers
//! may still fan out across images because scoring order never affects
//! results.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpurankError};
use crate::seeding::sha256_hex;

use super::{DetectionBox, DetectorBackend};

#[derive(Serialize)]
struct DetectRequest<'a> {
    request_id: String,
    image_path: &'a str,
    queries: &'a [String],
}

#[derive(Deserialize)]
struct DetectResponse {
    request_id: String,
    boxes: Vec<DetectionBox>,
}

struct ChildIo {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
}

pub struct ProcessDetector {
    backend_id: String,
    io: Mutex<ChildIo>,
}

impl ProcessDetector {
    /// Spawn `command` under `sh -c`. Without an explicit backend_id the
    /// command line itself is fingerprinted, so a changed command never
    /// matches an old cache.
    pub fn spawn(command: &str, backend_id: Option<String>) -> Result<ProcessDetector> {
        let backend_id = backend_id
            .unwrap_or_else(|| format!("proc-{}", &sha256_hex(command.as_bytes())[..12]));
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| SpurankError::Backend {
                backend_id: backend_id.clone(),
                image_id: String::new(),
                reason: format!("failed to spawn `{command}`: {e}"),
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ProcessDetector {
            backend_id,
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
            backend_id: self.backend_id.clone(),
            image_id: context.to_string(),
            reason,
        }
    }
}

impl DetectorBackend for ProcessDetector {
    fn backend_id(&self) -> &str {
        &self.backend_id
    }

    fn detect(&self, image_path: &Path, queries: &[String]) -> Result<Vec<DetectionBox>> {
        let path_str = image_path.to_string_lossy();
        let mut io = self.io.lock().expect("backend mutex");
        io.next_id += 1;
        let request = DetectRequest {
            request_id: format!("r{:08}", io.next_id),
            image_path: &path_str,
            queries,
        };
        let line = serde_json::to_string(&request).expect("request json");
        io.stdin
            .write_all(line.as_bytes())
            .and_then(|_| io.stdin.write_all(b"\n"))
            .and_then(|_| io.stdin.flush())
            .map_err(|e| self.backend_err(&path_str, format!("write failed: {e}")))?;

        let mut response = String::new();
        let n = io
            .stdout
            .read_line(&mut response)
            .map_err(|e| self.backend_err(&path_str, format!("read failed: {e}")))?;
        if n == 0 {
            return Err(self.backend_err(&path_str, "backend closed its output stream".into()));
        }
        let parsed: DetectResponse = serde_json::from_str(response.trim_end())
            .map_err(|e| self.backend_err(&path_str, format!("bad response line: {e}")))?;
        if parsed.request_id != request.request_id {
            return Err(self.backend_err(
                &path_str,
                format!(
                    "response id {} does not match request {}",
                    parsed.request_id, request.request_id
                ),
            ));
        }
        Ok(parsed.boxes)
    }
}

impl Drop for ProcessDetector {
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

    // Echo backend: parses the request id with sed and answers a fixed box.
    const ECHO_BACKEND: &str = r#"while read line; do id=$(printf '%s' "$line" | sed -n 's/.*"request_id":"\([^"]*\)".*/\1/p'); printf '{"request_id":"%s","boxes":[{"x_min":1.0,"y_min":2.0,"x_max":3.0,"y_max":4.0,"score":0.5,"query_index":0}]}\n' "$id"; done"#;

    #[test]
    fn round_trips_requests_over_the_wire() {
        let backend = ProcessDetector::spawn(ECHO_BACKEND, Some("echo-v1".into())).unwrap();
        assert_eq!(backend.backend_id(), "echo-v1");
        for _ in 0..3 {
            let boxes = backend
                .detect(Path::new("/tmp/img.png"), &["a photo".to_string()])
                .unwrap();
            assert_eq!(boxes.len(), 1);
            assert_eq!(boxes[0].score, 0.5);
            assert_eq!(boxes[0].x_max, 3.0);
        }
    }

    #[test]
    fn derived_backend_id_fingerprints_the_command() {
        let a = ProcessDetector::spawn("cat", None).unwrap();
        let b = ProcessDetector::spawn("cat", None).unwrap();
        let c = ProcessDetector::spawn("cat -u", None).unwrap();
        assert_eq!(a.backend_id(), b.backend_id());
        assert_ne!(a.backend_id(), c.backend_id());
        assert!(a.backend_id().starts_with("proc-"));
    }

    #[test]
    fn closed_backend_reports_an_error() {
        let backend = ProcessDetector::spawn("true", Some("dead-v1".into())).unwrap();
        std::thread::sleep(std::time::Duration::from_millis(50));
        let err = backend
            .detect(Path::new("/tmp/img.png"), &[])
            .unwrap_err();
        assert!(matches!(err, SpurankError::Backend { .. }));
    }

    #[test]
    fn mismatched_response_id_is_an_error() {
        let cmd = r#"while read line; do printf '{"request_id":"wrong","boxes":[]}\n'; done"#;
        let backend = ProcessDetector::spawn(cmd, Some("liar-v1".into())).unwrap();
        let err = backend
            .detect(Path::new("/tmp/img.png"), &[])
            .unwrap_err();
        match err {
            SpurankError::Backend { reason, .. } => assert!(reason.contains("does not match")),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
