//! End-to-end CLI flow: every stage subcommand chained over one tiny
//! dataset, plus the documented exit-code contract (0 success, 2 config
//! error, 3 stage failure).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spurank_core::eval::{NoiseSweepReport, OodReport, StratifiedReport};
use spurank_core::pipeline::PipelineConfig;

fn spurank(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spurank"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn spurank")
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = spurank(dir, args);
    assert!(
        out.status.success(),
        "spurank {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn stage_subcommands_chain_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    run_ok(
        dir,
        &[
            "synth", "--out", "data", "--classes", "3", "--per-class", "12",
            "--val-per-class", "6", "--ood-per-class", "4", "--image-size", "32",
            "--seed", "1",
        ],
    );
    let manifest = "data/manifest.jsonl";
    assert!(dir.join(manifest).is_file());
    assert!(dir.join("data/images").is_dir());

    run_ok(dir, &["validate", "--manifest", manifest, "--check-files"]);

    run_ok(dir, &["score", "--manifest", manifest, "--cache", "scores.jsonl"]);
    assert!(dir.join("scores.jsonl").is_file());

    run_ok(
        dir,
        &["rank", "--manifest", manifest, "--cache", "scores.jsonl", "--out", "rank-train.jsonl"],
    );
    run_ok(
        dir,
        &[
            "rank", "--manifest", manifest, "--cache", "scores.jsonl", "--split", "val",
            "--out", "rank-val.jsonl",
        ],
    );

    run_ok(
        dir,
        &[
            "select", "--ranking", "rank-train.jsonl", "--strategy", "top", "--k", "5",
            "--out", "subset.jsonl",
        ],
    );

    run_ok(dir, &["extract", "--manifest", manifest, "--cache", "feats.bin"]);
    assert!(dir.join("feats.bin").is_file());

    run_ok(
        dir,
        &[
            "train", "--manifest", manifest, "--features", "feats.bin",
            "--subset", "subset.jsonl", "--out", "head.bin",
        ],
    );
    assert!(dir.join("head.bin").is_file());

    run_ok(
        dir,
        &[
            "eval-strata", "--manifest", manifest, "--features", "feats.bin",
            "--head", "head.bin", "--ranking", "rank-val.jsonl", "--imax", "6",
            "--out", "strata.json",
        ],
    );
    let strata: StratifiedReport =
        serde_json::from_str(&std::fs::read_to_string(dir.join("strata.json")).unwrap()).unwrap();
    assert_eq!(strata.slices.len(), 6);
    assert_eq!(strata.slices.iter().map(|s| s.n).sum::<usize>(), 18);

    run_ok(
        dir,
        &[
            "eval-noise", "--manifest", manifest, "--head", "head.bin",
            "--scores", "scores.jsonl", "--alphas", "10", "--out", "noise.json",
        ],
    );
    let noise: NoiseSweepReport =
        serde_json::from_str(&std::fs::read_to_string(dir.join("noise.json")).unwrap()).unwrap();
    // clean row + one alpha x {fg, bg}
    assert_eq!(noise.rows.len(), 3);
    assert!(noise.failures.is_empty());

    run_ok(
        dir,
        &[
            "eval-ood", "--manifest", manifest, "--features", "feats.bin",
            "--head", "head.bin", "--out", "ood.json",
        ],
    );
    let ood: OodReport =
        serde_json::from_str(&std::fs::read_to_string(dir.join("ood.json")).unwrap()).unwrap();
    assert_eq!(ood.n, 12);
    assert_eq!(ood.restricted_classes, 3);

    run_ok(
        dir,
        &[
            "contact-sheet", "--manifest", manifest, "--ranking", "rank-train.jsonl",
            "--class-id", "0", "--tile", "16", "--out", "sheet.png",
        ],
    );
    let sheet = std::fs::read(dir.join("sheet.png")).unwrap();
    assert_eq!(&sheet[..8], b"\x89PNG\r\n\x1a\n");
}

#[test]
fn dump_default_round_trips_through_run_config() {
    let tmp = tempfile::tempdir().unwrap();
    let text = run_ok(tmp.path(), &["run", "--dump-default"]);
    let config: PipelineConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(config, PipelineConfig::default());
}

#[test]
fn full_run_emits_report_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let config = r#"{
        "source": {"kind": "synthetic", "num_classes": 2, "per_class": 10,
                   "val_per_class": 5, "ood_per_class": 3, "image_size": 32},
        "strategies": ["top"],
        "k_values": [4],
        "eval": {"i_max": 5, "alphas": [10.0]},
        "output_dir": "out"
    }"#;
    std::fs::write(dir.join("cfg.json"), config).unwrap();
    let stdout = run_ok(dir, &["run", "--config", "cfg.json"]);
    assert!(stdout.contains("top-k4"), "stdout: {stdout}");

    for artifact in [
        "out/summary.json",
        "out/val.csv",
        "out/stratified.csv",
        "out/noise.csv",
        "out/ood.csv",
        "out/ranking-train.jsonl",
        "out/ranking-val.jsonl",
        "out/subsets/top-k4.jsonl",
        "out/heads/top-k4.head",
        "out/charts/stratified-k4.svg",
    ] {
        assert!(dir.join(artifact).is_file(), "missing {artifact}");
    }
    assert!(!dir.join("out/.spurank.lock").exists(), "lock not released");
}

#[test]
fn exit_codes_separate_config_and_stage_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // invalid config document -> 2
    std::fs::write(dir.join("bad.json"), r#"{"k_values": []}"#).unwrap();
    let out = spurank(dir, &["run", "--config", "bad.json"]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // structurally valid dataset with a deleted image -> validate exits 3
    run_ok(
        dir,
        &[
            "synth", "--out", "data", "--classes", "2", "--per-class", "3",
            "--val-per-class", "2", "--ood-per-class", "1", "--image-size", "32",
        ],
    );
    let manifest = "data/manifest.jsonl";
    run_ok(dir, &["validate", "--manifest", manifest, "--check-files"]);
    let some_png: PathBuf = std::fs::read_dir(dir.join("data/images"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    std::fs::remove_file(&some_png).unwrap();
    let out = spurank(dir, &["validate", "--manifest", manifest, "--check-files"]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("MissingFile"));

    // unreadable score cache -> stage failure 3
    let out = spurank(
        dir,
        &["rank", "--manifest", manifest, "--cache", "no-such.jsonl", "--out", "r.jsonl"],
    );
    assert_eq!(exit_code(&out), 3);

    // nonsense thread count -> config error 2
    let out = spurank(dir, &["--threads", "0", "validate", "--manifest", manifest]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn thread_env_var_is_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    run_ok(
        dir,
        &[
            "synth", "--out", "data", "--classes", "2", "--per-class", "4",
            "--val-per-class", "2", "--ood-per-class", "1", "--image-size", "32",
        ],
    );
    let out = Command::new(env!("CARGO_BIN_EXE_spurank"))
        .args(["score", "--manifest", "data/manifest.jsonl", "--cache", "s.jsonl"])
        .env("SPURANK_THREADS", "1")
        .current_dir(dir)
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = Command::new(env!("CARGO_BIN_EXE_spurank"))
        .args(["score", "--manifest", "data/manifest.jsonl", "--cache", "s2.jsonl"])
        .env("SPURANK_THREADS", "zero")
        .current_dir(dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
