//! The `mock-backend` / `mock-backbone` serve loops must be
//! indistinguishable from the in-process mocks: a pipeline pointed at the
//! subprocess adapters has to reproduce the in-process numbers bit for bit,
//! or process-backed runs are not reproducible.

use std::path::Path;

use spurank_core::detect::mock::MockDetector;
use spurank_core::detect::process::ProcessDetector;
use spurank_core::detect::{batch_score, DetectorBackend, ScoringOptions};
use spurank_core::features::mock::{mock_backbone_embed, MockBackbone, MOCK_DIM};
use spurank_core::features::process::ProcessBackbone;
use spurank_core::features::{extract_features, BackboneAdapter};
use spurank_core::synthetic::{generate_synthetic, SyntheticConfig};
use spurank_core::tensor::ImageTensor;
use spurank_core::DatasetManifest;

fn self_command(subcommand: &str) -> String {
    format!("{} {subcommand}", env!("CARGO_BIN_EXE_spurank"))
}

fn tiny_dataset(dir: &Path) -> DatasetManifest {
    let config = SyntheticConfig {
        num_classes: 3,
        per_class: 4,
        val_per_class: 2,
        ood_per_class: 1,
        image_size: 32,
        seed: 11,
        ..SyntheticConfig::default()
    };
    generate_synthetic(&config, dir).unwrap().0
}

#[test]
fn process_detector_reproduces_in_process_boxes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = tiny_dataset(dir.path());
    let wire = ProcessDetector::spawn(&self_command("mock-backend"), None).unwrap();
    let queries = vec!["a photo of a class_00".to_string()];
    for record in manifest.records() {
        let path = manifest.image_path(record);
        let direct = MockDetector.detect(&path, &queries).unwrap();
        let via_wire = wire.detect(&path, &queries).unwrap();
        assert_eq!(direct, via_wire, "boxes differ for {}", record.image_id);
    }
}

#[test]
fn process_scoring_matches_in_process_scoring() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = tiny_dataset(dir.path());
    let opts = ScoringOptions::default();

    let direct = batch_score(
        &manifest,
        &MockDetector,
        &dir.path().join("direct.jsonl"),
        &opts,
    )
    .unwrap();
    let wire_backend = ProcessDetector::spawn(
        &self_command("mock-backend"),
        Some("wire-mock".into()),
    )
    .unwrap();
    let wired = batch_score(
        &manifest,
        &wire_backend,
        &dir.path().join("wired.jsonl"),
        &opts,
    )
    .unwrap();

    assert!(direct.skips.is_empty());
    assert!(wired.skips.is_empty());
    assert_eq!(direct.records.len(), wired.records.len());
    for (a, b) in direct.records.iter().zip(&wired.records) {
        assert_eq!(a.image_id, b.image_id);
        assert_eq!(a.class_id, b.class_id);
        // f64 scores survive the JSON hop exactly
        assert_eq!(a.score.to_bits(), b.score.to_bits(), "{}", a.image_id);
        assert_eq!(a.boxes, b.boxes);
    }
}

#[test]
fn process_backbone_reproduces_in_process_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = tiny_dataset(dir.path());
    let wire = ProcessBackbone::spawn(&self_command("mock-backbone"), MOCK_DIM, None).unwrap();

    for record in manifest.records().iter().take(4) {
        let path = manifest.image_path(record);
        let direct = MockBackbone.embed_path(&path).unwrap();
        let via_wire = wire.embed_path(&path).unwrap();
        assert_eq!(direct, via_wire, "embedding differs for {}", record.image_id);
    }

    // tensor requests take the base64 branch of the protocol
    let record = &manifest.records()[0];
    let tensor = ImageTensor::load_png(&manifest.image_path(record)).unwrap();
    let direct = mock_backbone_embed(&tensor).unwrap();
    let via_wire = wire.embed_tensor(&tensor).unwrap();
    assert_eq!(direct, via_wire);
}

#[test]
fn process_extraction_matches_in_process_extraction() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = tiny_dataset(dir.path());
    let ids: Vec<String> = manifest
        .records()
        .iter()
        .map(|r| r.image_id.clone())
        .collect();

    let direct = extract_features(&ids, &manifest, &MockBackbone, None).unwrap();
    let wire =
        ProcessBackbone::spawn(&self_command("mock-backbone"), MOCK_DIM, None).unwrap();
    let wired = extract_features(&ids, &manifest, &wire, None).unwrap();

    assert_eq!(direct.image_ids, wired.image_ids);
    assert_eq!(direct.labels, wired.labels);
    assert_eq!(direct.d, wired.d);
    assert_eq!(direct.values, wired.values);
}
