//! Evaluation report: provenance-stamped results for every
//! (strategy, k) run, emitted as one JSON summary plus flat CSV tables
//! and SVG charts. Emission is deterministic: same inputs, same bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::SkipEntry;
use crate::error::{Result, SpurankError};
use crate::eval::{NoiseSweepReport, OodReport, StratifiedReport};
use crate::linear::AccuracyReport;
use crate::manifest::DatasetManifest;
use crate::perturb::Region;
use crate::ranking::Strategy;
use crate::seeding::sha256_hex;

use super::svg::{line_chart, Series};

pub const REPORT_FORMAT: &str = "spurank-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Content digest of the dataset (classes + records, location-free).
    pub manifest_digest: String,
    pub backend_id: String,
    pub backbone_id: String,
    pub seed: u64,
    /// Fingerprint of the run config with its output path blanked.
    pub config_digest: String,
    /// Digest over all fields above.
    pub report_hash: String,
}

impl Provenance {
    pub fn new(
        manifest_digest: String,
        backend_id: String,
        backbone_id: String,
        seed: u64,
        config_digest: String,
    ) -> Self {
        let report_hash = sha256_hex(
            format!("{manifest_digest}\n{backend_id}\n{backbone_id}\n{seed}\n{config_digest}\n")
                .as_bytes(),
        );
        Provenance {
            manifest_digest,
            backend_id,
            backbone_id,
            seed,
            config_digest,
            report_hash,
        }
    }
}

/// Location-independent digest of a manifest's content.
pub fn manifest_digest(manifest: &DatasetManifest) -> String {
    let mut text = String::from("classes\n");
    for (id, name) in manifest.classes() {
        text.push_str(&format!("{id}\t{name}\n"));
    }
    text.push_str("records\n");
    for r in manifest.records() {
        text.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.image_id,
            r.class_id,
            r.class_name,
            r.split,
            r.path
        ));
    }
    sha256_hex(text.as_bytes())
}

/// Display label for a strategy; inversion swaps the top/bot names used in
/// reports without touching selection.
pub fn strategy_label(strategy: Strategy, invert: bool) -> &'static str {
    match (strategy, invert) {
        (Strategy::Top, false) | (Strategy::Bot, true) => "top",
        (Strategy::Bot, false) | (Strategy::Top, true) => "bot",
        (Strategy::Mid, _) => "mid",
        (Strategy::Rnd, _) => "rnd",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub final_objective: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Display label (inversion applied).
    pub label: String,
    /// The strategy that actually selected the subset.
    pub strategy: Strategy,
    pub k: usize,
    pub train: TrainSummary,
    pub val_accuracy: AccuracyReport,
    pub stratified: StratifiedReport,
    pub noise: NoiseSweepReport,
    /// Absent when the manifest has no shifted split.
    pub ood: Option<OodReport>,
}

impl RunReport {
    pub fn run_tag(&self) -> String {
        format!("{}-k{}", self.label, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format: String,
    pub version: u32,
    pub provenance: Provenance,
    /// Strategy-major, k-minor, in config order.
    pub runs: Vec<RunReport>,
    /// Images the detector could not score.
    pub skipped_images: Vec<SkipEntry>,
}

impl EvalReport {
    pub fn to_summary_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SpurankError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| SpurankError::Config(format!("{}: {e}", path.display())))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| SpurankError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| SpurankError::io(path, e))
}

fn region_name(region: Option<Region>) -> &'static str {
    match region {
        None => "clean",
        Some(Region::Fg) => "fg",
        Some(Region::Bg) => "bg",
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write summary.json, the CSV tables, and the charts under `dir`.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<()> {
    write_file(&dir.join("summary.json"), report.to_summary_json().as_bytes())?;

    let mut val = String::from("label,strategy,k,n,accuracy\n");
    for run in &report.runs {
        val.push_str(&format!(
            "{},{},{},{},{}\n",
            run.label, run.strategy, run.k, run.val_accuracy.n, run.val_accuracy.accuracy
        ));
    }
    write_file(&dir.join("val.csv"), val.as_bytes())?;

    let mut strat = String::from("label,strategy,k,slice_i,n,accuracy\n");
    for run in &report.runs {
        for slice in &run.stratified.slices {
            strat.push_str(&format!(
                "{},{},{},{},{},{}\n",
                run.label, run.strategy, run.k, slice.i, slice.n, slice.accuracy
            ));
        }
    }
    write_file(&dir.join("stratified.csv"), strat.as_bytes())?;

    let mut noise = String::from("label,strategy,k,alpha,region,n,excluded,accuracy\n");
    for run in &report.runs {
        for row in &run.noise.rows {
            noise.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                run.label,
                run.strategy,
                run.k,
                row.alpha,
                region_name(row.region),
                row.n,
                row.excluded,
                fmt_opt(row.accuracy)
            ));
        }
    }
    write_file(&dir.join("noise.csv"), noise.as_bytes())?;

    let mut ood = String::from(
        "label,strategy,k,n,restricted_accuracy,unrestricted_accuracy,restricted_classes\n",
    );
    for run in &report.runs {
        if let Some(r) = &run.ood {
            ood.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                run.label,
                run.strategy,
                run.k,
                r.n,
                r.restricted_accuracy,
                r.unrestricted_accuracy,
                r.restricted_classes
            ));
        }
    }
    write_file(&dir.join("ood.csv"), ood.as_bytes())?;

    let mut ks: Vec<usize> = report.runs.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    for &k in &ks {
        let strat_series: Vec<Series> = report
            .runs
            .iter()
            .filter(|r| r.k == k)
            .map(|r| Series {
                name: r.label.clone(),
                points: r
                    .stratified
                    .slices
                    .iter()
                    .map(|s| (s.i as f64, s.accuracy))
                    .collect(),
            })
            .collect();
        write_file(
            &dir.join(format!("charts/stratified-k{k}.svg")),
            line_chart(
                &format!("Accuracy by validation rank slice (k={k})"),
                "slice",
                "accuracy",
                &strat_series,
            )
            .as_bytes(),
        )?;

        let mut noise_series = Vec::new();
        for run in report.runs.iter().filter(|r| r.k == k) {
            for &region in &[Region::Fg, Region::Bg] {
                let mut points = Vec::new();
                for row in &run.noise.rows {
                    if row.region.is_none() || row.region == Some(region) {
                        if let Some(acc) = row.accuracy {
                            points.push((row.alpha, acc));
                        }
                    }
                }
                if points.len() > 1 {
                    noise_series.push(Series {
                        name: format!("{}/{}", run.label, region),
                        points,
                    });
                }
            }
        }
        if !noise_series.is_empty() {
            write_file(
                &dir.join(format!("charts/noise-k{k}.svg")),
                line_chart(
                    &format!("Accuracy under region noise (k={k})"),
                    "alpha",
                    "accuracy",
                    &noise_series,
                )
                .as_bytes(),
            )?;
        }
    }
    Ok(())
}
