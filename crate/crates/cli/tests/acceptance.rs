//! Acceptance gate for the toolkit: ten end-to-end checks over ranking
//! fidelity, numerical exactness, trainer stability, the directional
//! replication claims, and byte-level determinism. One test per criterion;
//! each prints a `criterion N: PASS` line (visible with --nocapture), and a
//! failure names the criterion in its panic message.
//!
//! Criteria 6, 7, and 9 share one set of five full pipeline runs over the
//! standard fixture (seeds 0..5), built lazily behind a OnceLock.

use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use spurank_core::detect::mock::MockDetector;
use spurank_core::detect::{batch_score, DetectionBox, ScoringOptions};
use spurank_core::features::FeatureMatrix;
use spurank_core::linear::{
    objective, objective_and_gradient, predict, save_head, train_head, TrainConfig,
};
use spurank_core::perturb::{build_mask, inject_noise, NoiseConfig, Region};
use spurank_core::pipeline::{
    run_pipeline, DataSource, PipelineArtifacts, PipelineConfig, RunReport,
};
use spurank_core::ranking::{build_rankings, rank_class, stratified_eval_sets, Strategy};
use spurank_core::seeding::keyed_rng;
use spurank_core::stats::spearman;
use spurank_core::synthetic::{generate_synthetic, load_ground_truth, SyntheticConfig};
use spurank_core::tensor::ImageTensor;
use spurank_core::Split;

// --- shared fixture runs for criteria 6, 7, 9 ---------------------------

const FIXTURE_SEEDS: u64 = 5;
const FIXTURE_K: usize = 100;

struct SharedRuns {
    artifacts: Vec<PipelineArtifacts>,
    durations: Vec<Duration>,
    _dirs: Vec<tempfile::TempDir>,
}

fn fixture_runs() -> &'static SharedRuns {
    static RUNS: OnceLock<SharedRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut artifacts = Vec::new();
        let mut durations = Vec::new();
        let mut dirs = Vec::new();
        for seed in 0..FIXTURE_SEEDS {
            let dir = tempfile::tempdir().unwrap();
            let config = PipelineConfig {
                source: DataSource::Synthetic {
                    config: SyntheticConfig { seed, ..SyntheticConfig::default() },
                },
                strategies: vec![Strategy::Top, Strategy::Bot],
                k_values: vec![FIXTURE_K],
                seed,
                output_dir: dir.path().join("out"),
                ..PipelineConfig::default()
            };
            let start = Instant::now();
            let run = run_pipeline(&config).expect("fixture pipeline");
            durations.push(start.elapsed());
            artifacts.push(run);
            dirs.push(dir);
        }
        SharedRuns { artifacts, durations, _dirs: dirs }
    })
}

fn run_for<'a>(report: &'a [RunReport], strategy: Strategy) -> &'a RunReport {
    report
        .iter()
        .find(|r| r.strategy == strategy && r.k == FIXTURE_K)
        .expect("strategy present in report")
}

/// Images-weighted accuracy over the slices with i <= cut.
fn low_slice_accuracy(run: &RunReport, cut: usize) -> f64 {
    let (mut correct, mut total) = (0.0, 0usize);
    for s in run.stratified.slices.iter().filter(|s| s.i <= cut) {
        correct += s.accuracy * s.n as f64;
        total += s.n;
    }
    assert!(total > 0, "no slices at i <= {cut}");
    correct / total as f64
}

fn slice_spread(run: &RunReport) -> f64 {
    let accs: Vec<f64> = run.stratified.slices.iter().map(|s| s.accuracy).collect();
    let max = accs.iter().cloned().fold(f64::MIN, f64::max);
    let min = accs.iter().cloned().fold(f64::MAX, f64::min);
    max - min
}

fn noise_accuracy(run: &RunReport, alpha: f64, region: Region) -> f64 {
    run.noise
        .rows
        .iter()
        .find(|r| r.alpha == alpha && r.region == Some(region))
        .and_then(|r| r.accuracy)
        .unwrap_or_else(|| panic!("no accuracy for alpha={alpha} {region:?}"))
}

// --- criterion 1: ranking fidelity ---------------------------------------

#[test]
fn criterion_01_ranking_fidelity() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = SyntheticConfig::default();
    assert_eq!(config.num_classes, 10);
    assert_eq!(config.per_class, 300);
    let (manifest, _) = generate_synthetic(&config, dir.path()).unwrap();
    let truths = load_ground_truth(&dir.path().join("ground_truth.jsonl")).unwrap();
    let o_by_id: std::collections::BTreeMap<&str, f64> =
        truths.iter().map(|t| (t.image_id.as_str(), t.o)).collect();

    let table = batch_score(
        &manifest,
        &MockDetector,
        &dir.path().join("scores.jsonl"),
        &ScoringOptions::default(),
    )
    .unwrap();
    assert!(table.skips.is_empty(), "criterion 1: FAIL — detector skipped images");
    let ranking = build_rankings(&table, &manifest, Split::Train).unwrap();
    let elapsed = start.elapsed();

    assert_eq!(ranking.per_class.len(), 10);
    let mut min_rho = f64::MAX;
    for (class_id, ranked) in &ranking.per_class {
        assert_eq!(ranked.len(), 300);
        let positions: Vec<f64> = (1..=ranked.len()).map(|i| i as f64).collect();
        let occlusions: Vec<f64> = ranked.iter().map(|r| o_by_id[r.image_id.as_str()]).collect();
        let rho = spearman(&positions, &occlusions).expect("defined correlation");
        assert!(
            rho >= 0.99,
            "criterion 1: FAIL — class {class_id} Spearman {rho:.6} < 0.99"
        );
        min_rho = min_rho.min(rho);
    }
    assert!(
        elapsed < Duration::from_secs(30),
        "criterion 1: FAIL — fixture scoring took {elapsed:?} (>= 30 s)"
    );
    println!(
        "criterion 1: PASS — per-class Spearman >= 0.99 (min {min_rho:.6}) in {elapsed:?}"
    );
}

// --- criterion 2: sorting oracle ------------------------------------------

/// Independent of rank_class: stable-sort by id ascending, then stable-sort
/// by score descending; stability makes ties land in id order.
fn two_pass_oracle(scores: &[(String, f64)]) -> Vec<String> {
    let mut rows: Vec<&(String, f64)> = scores.iter().collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    rows.sort_by(|a, b| b.1.total_cmp(&a.1));
    rows.iter().map(|r| r.0.clone()).collect()
}

#[test]
fn criterion_02_sorting_oracle() {
    let mut rng = keyed_rng(2, "acceptance", "sort-oracle");
    for case in 0..1000usize {
        let n = match case {
            0 => 1,
            1 => 500,
            _ => rng.random_range(1..=500),
        };
        let mut scores: Vec<(String, f64)> = (0..n)
            .map(|j| {
                // coarse grid forces plenty of exact ties
                let s = rng.random_range(-20..=20) as f64 * 0.25;
                (format!("img-{j:04}"), s)
            })
            .collect();
        scores.shuffle(&mut rng);
        let ranked = rank_class(&scores).unwrap();
        let expected = two_pass_oracle(&scores);
        assert_eq!(ranked, expected, "criterion 2: FAIL — case {case} (n={n}) diverges");
    }
    println!("criterion 2: PASS — rank_class equals the stable-sort oracle on 1000 tables");
}

// --- criterion 3: noise exactness -----------------------------------------

struct NoiseCase {
    image: ImageTensor,
    boxes: Vec<DetectionBox>,
    alpha: f64,
    region: Region,
    expect_degenerate: bool,
}

fn random_tensor(rng: &mut impl Rng, height: usize, width: usize) -> ImageTensor {
    let mut t = ImageTensor::zeros(height, width);
    for v in t.data.iter_mut() {
        *v = rng.random_range(0.0..1.0);
    }
    t
}

fn noise_cases(rng: &mut impl Rng) -> Vec<NoiseCase> {
    let alphas = [10.0, 100.0, 250.0];
    let mut cases = Vec::new();
    for i in 0..500usize {
        let h = rng.random_range(8..=40);
        let w = rng.random_range(8..=40);
        let image = random_tensor(rng, h, w);
        let alpha = alphas[i % alphas.len()];
        if i % 25 == 0 {
            // no detection: foreground is empty by construction
            cases.push(NoiseCase {
                image,
                boxes: vec![],
                alpha,
                region: Region::Fg,
                expect_degenerate: true,
            });
        } else if i % 25 == 1 {
            // full-cover box: background is empty by construction
            cases.push(NoiseCase {
                image,
                boxes: vec![DetectionBox {
                    x_min: 0.0,
                    y_min: 0.0,
                    x_max: w as f64,
                    y_max: h as f64,
                    score: 0.9,
                    query_index: 0,
                }],
                alpha,
                region: Region::Bg,
                expect_degenerate: true,
            });
        } else {
            let x0 = rng.random_range(0..w as u32) as f64;
            let y0 = rng.random_range(0..h as u32) as f64;
            let x1 = rng.random_range(x0 as u32 + 1..=w as u32) as f64;
            let y1 = rng.random_range(y0 as u32 + 1..=h as u32) as f64;
            cases.push(NoiseCase {
                image,
                boxes: vec![DetectionBox {
                    x_min: x0,
                    y_min: y0,
                    x_max: x1,
                    y_max: y1,
                    score: rng.random_range(0.1..1.0),
                    query_index: 0,
                }],
                alpha,
                region: if i % 2 == 0 { Region::Fg } else { Region::Bg },
                expect_degenerate: false,
            });
        }
    }
    cases
}

#[test]
fn criterion_03_noise_exactness() {
    let mut rng = keyed_rng(3, "acceptance", "noise");
    let cases = noise_cases(&mut rng);
    assert_eq!(cases.len(), 500);
    let (mut checked, mut degenerate) = (0usize, 0usize);
    for (i, case) in cases.iter().enumerate() {
        let mask = build_mask(
            &format!("case-{i:03}"),
            &case.boxes,
            case.image.width,
            case.image.height,
        )
        .unwrap();
        let config = NoiseConfig { alpha: case.alpha, region: case.region, seed: i as u64 };
        let out = inject_noise(&case.image, &mask, &config).unwrap();

        if case.expect_degenerate {
            assert!(out.degenerate, "criterion 3: FAIL — case {i} should be degenerate");
        }
        if out.degenerate {
            assert_eq!(
                out.image.data, case.image.data,
                "criterion 3: FAIL — degenerate case {i} modified the image"
            );
            degenerate += 1;
            continue;
        }

        // norm of the perturbation is alpha to 1e-4 relative
        let norm: f64 = out
            .image
            .data
            .iter()
            .zip(&case.image.data)
            .map(|(&a, &b)| {
                let d = a as f64 - b as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        let ratio = norm / case.alpha;
        assert!(
            (0.9999..=1.0001).contains(&ratio),
            "criterion 3: FAIL — case {i} norm ratio {ratio}"
        );

        // the untouched region is bit-identical
        let want_fg = case.region == Region::Fg;
        for (pixel, &m) in mask.mask.iter().enumerate() {
            if (m == 1) != want_fg {
                for ch in 0..3 {
                    let idx = pixel * 3 + ch;
                    assert_eq!(
                        out.image.data[idx].to_bits(),
                        case.image.data[idx].to_bits(),
                        "criterion 3: FAIL — case {i} touched pixel {pixel} outside {:?}",
                        case.region
                    );
                }
            }
        }
        checked += 1;
    }
    assert!(checked >= 400, "criterion 3: FAIL — only {checked} non-degenerate cases");
    assert!(degenerate >= 40, "criterion 3: FAIL — only {degenerate} degenerate cases");
    println!(
        "criterion 3: PASS — {checked} noisy cases within 1e-4 of alpha, \
         {degenerate} degenerate cases returned intact"
    );
}

// --- criterion 4: gradient correctness ------------------------------------

#[test]
fn criterion_04_gradient_correctness() {
    let mut rng = keyed_rng(4, "acceptance", "finite-differences");
    let lambdas = [0.0, 1e-4, 1e-2];
    let h = 1e-5;
    let mut worst = 0.0f64;
    for problem in 0..20usize {
        let c = rng.random_range(2..=5);
        let d = rng.random_range(1..=10);
        let n = rng.random_range(c..=50);
        let l2 = lambdas[problem % lambdas.len()];
        let x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
        let labels: Vec<usize> = (0..n)
            .map(|i| if i < c { i } else { rng.random_range(0..c) })
            .collect();
        let w = Array2::from_shape_fn((c, d), |_| 0.5 * rng.sample::<f64, _>(StandardNormal));
        let b = Array1::from_shape_fn(c, |_| 0.5 * rng.sample::<f64, _>(StandardNormal));

        let (_, gw, gb) = objective_and_gradient(&x, &labels, &w, &b, l2);
        let mut max_rel = 0.0f64;
        for i in 0..c {
            for j in 0..d {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[(i, j)] += h;
                wm[(i, j)] -= h;
                let fd = (objective(&x, &labels, &wp, &b, l2)
                    - objective(&x, &labels, &wm, &b, l2))
                    / (2.0 * h);
                let denom = gw[(i, j)].abs().max(fd.abs()).max(1e-8);
                max_rel = max_rel.max((gw[(i, j)] - fd).abs() / denom);
            }
            let mut bp = b.clone();
            let mut bm = b.clone();
            bp[i] += h;
            bm[i] -= h;
            let fd = (objective(&x, &labels, &w, &bp, l2)
                - objective(&x, &labels, &w, &bm, l2))
                / (2.0 * h);
            let denom = gb[i].abs().max(fd.abs()).max(1e-8);
            max_rel = max_rel.max((gb[i] - fd).abs() / denom);
        }
        assert!(
            max_rel <= 1e-5,
            "criterion 4: FAIL — problem {problem} (C={c}, d={d}, n={n}): \
             max relative error {max_rel:.3e}"
        );
        worst = worst.max(max_rel);
    }
    println!("criterion 4: PASS — 20 problems, worst relative gradient error {worst:.3e}");
}

// --- criterion 5: convex-trainer stability ---------------------------------

fn blob_centers(classes: u32, d: usize, sep: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = keyed_rng(seed, "acceptance", "blob-centers");
    (0..classes)
        .map(|_| (0..d).map(|_| sep * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

fn blob_features(centers: &[Vec<f64>], per_class: usize, key: &str, seed: u64) -> FeatureMatrix {
    let mut rng = keyed_rng(seed, "acceptance", key);
    let d = centers[0].len();
    let mut rows = Vec::new();
    for (class, center) in centers.iter().enumerate() {
        for i in 0..per_class {
            let v: Vec<f32> = center
                .iter()
                .map(|&c| (c + rng.sample::<f64, _>(StandardNormal)) as f32)
                .collect();
            rows.push((format!("{key}-c{class}-{i:04}"), class as u32, v));
        }
    }
    FeatureMatrix::from_rows("acceptance-bb", d, rows).unwrap()
}

fn max_param_diff(a: &spurank_core::linear::LinearHead, b: &spurank_core::linear::LinearHead) -> f64 {
    let dw = a
        .w
        .iter()
        .zip(b.w.iter())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    let db = a
        .b
        .iter()
        .zip(b.b.iter())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    dw.max(db)
}

#[test]
fn criterion_05_convex_trainer_stability() {
    // Overlapping blobs keep every descent mode curved enough that the
    // trainer reaches the objective's representable floor within budget.
    let centers = blob_centers(4, 8, 1.0, 55);
    let features = blob_features(&centers, 50, "train", 55);
    let eval = blob_features(&centers, 500, "eval", 56);

    // Shipped default: the deterministic zero init ignores the seed entirely,
    // so two seeds must produce byte-identical heads.
    let default_config = |seed| TrainConfig { l2_lambda: 1e-4, seed, ..TrainConfig::default() };
    let a = train_head(&features, &default_config(1)).unwrap();
    let b = train_head(&features, &default_config(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_head(&a.head, &default_config(1), &dir.path().join("a.head")).unwrap();
    save_head(&b.head, &default_config(1), &dir.path().join("b.head")).unwrap();
    let bytes_a = std::fs::read(dir.path().join("a.head")).unwrap();
    let bytes_b = std::fs::read(dir.path().join("b.head")).unwrap();
    assert_eq!(bytes_a, bytes_b, "criterion 5: FAIL — default-init heads differ");

    // Random inits: convexity must pull different starting points to the
    // same optimum.
    let random_config = |seed| TrainConfig {
        l2_lambda: 1e-4,
        tolerance: 1e-9,
        max_iters: 200_000,
        init_scale: 0.5,
        seed,
    };
    let a = train_head(&features, &random_config(1)).unwrap();
    let b = train_head(&features, &random_config(2)).unwrap();
    assert!(a.converged && b.converged, "criterion 5: FAIL — training did not converge");

    let diff = max_param_diff(&a.head, &b.head);
    assert!(diff <= 1e-4, "criterion 5: FAIL — parameters differ by {diff:.3e} > 1e-4");

    let pa = predict(&a.head, &eval).unwrap();
    let pb = predict(&b.head, &eval).unwrap();
    let agree = pa
        .argmax
        .iter()
        .zip(&pb.argmax)
        .filter(|(x, y)| x == y)
        .count();
    let rate = agree as f64 / pa.argmax.len() as f64;
    assert!(
        rate >= 0.999,
        "criterion 5: FAIL — prediction agreement {rate:.4} < 0.999"
    );
    println!(
        "criterion 5: PASS — default init byte-identical; random inits agree on \
         {rate:.4} of {} predictions with max parameter gap {diff:.3e}",
        pa.argmax.len()
    );
}

// --- criteria 6 + 7: directional replication -------------------------------

#[test]
fn criterion_06_directional_replication() {
    let shared = fixture_runs();
    for (seed, elapsed) in shared.durations.iter().enumerate() {
        assert!(
            *elapsed < Duration::from_secs(300),
            "criterion 6: FAIL — seed {seed} pipeline took {elapsed:?} (>= 5 min)"
        );
    }
    let mut hits = 0;
    let mut lines = Vec::new();
    for (seed, run) in shared.artifacts.iter().enumerate() {
        let top = run_for(&run.report.runs, Strategy::Top);
        let bot = run_for(&run.report.runs, Strategy::Bot);
        let top_low = low_slice_accuracy(top, 10);
        let bot_low = low_slice_accuracy(bot, 10);
        let top_spread = slice_spread(top);
        let bot_spread = slice_spread(bot);
        let ok = top_low > bot_low && bot_spread < top_spread;
        hits += ok as usize;
        lines.push(format!(
            "seed {seed}: top_low {top_low:.4} vs bot_low {bot_low:.4}, \
             spread top {top_spread:.4} vs bot {bot_spread:.4} -> {}",
            if ok { "ok" } else { "miss" }
        ));
    }
    assert!(
        hits >= 4,
        "criterion 6: FAIL — directional result holds in only {hits}/5 seeds:\n{}",
        lines.join("\n")
    );
    println!("criterion 6: PASS — top>bot on low slices and bot spread smaller in {hits}/5 seeds");
}

#[test]
fn criterion_07_foreground_noise_hurts_more() {
    let shared = fixture_runs();
    let alpha = 250.0;
    let mut hits = 0;
    let mut lines = Vec::new();
    for (seed, run) in shared.artifacts.iter().enumerate() {
        let top = run_for(&run.report.runs, Strategy::Top);
        let fg = noise_accuracy(top, alpha, Region::Fg);
        let bg = noise_accuracy(top, alpha, Region::Bg);
        let ok = fg < bg;
        hits += ok as usize;
        lines.push(format!(
            "seed {seed}: fg {fg:.4} vs bg {bg:.4} -> {}",
            if ok { "ok" } else { "miss" }
        ));
    }
    assert!(
        hits >= 4,
        "criterion 7: FAIL — fg < bg at alpha={alpha} holds in only {hits}/5 seeds:\n{}",
        lines.join("\n")
    );
    println!("criterion 7: PASS — foreground noise hurts the top-k head more in {hits}/5 seeds");
}

// --- criterion 8: byte-identical reruns ------------------------------------

#[test]
fn criterion_08_deterministic_summary() {
    // Identical config file, two cold processes, different working
    // directories; output_dir is relative so the configs match bytewise.
    let config = r#"{
        "source": {"kind": "synthetic", "num_classes": 4, "per_class": 40,
                   "val_per_class": 20, "ood_per_class": 10, "image_size": 32,
                   "seed": 5},
        "strategies": ["top", "bot", "rnd"],
        "k_values": [10],
        "eval": {"i_max": 10, "alphas": [10.0, 250.0]},
        "seed": 5,
        "output_dir": "out"
    }"#;
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("cfg.json"), config).unwrap();
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_spurank"))
            .args(["run", "--config", "cfg.json"])
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "criterion 8: FAIL — run errored: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push((dir, out));
    }

    let read = |dir: &tempfile::TempDir, name: &str| {
        std::fs::read(dir.path().join("out").join(name))
            .unwrap_or_else(|e| panic!("criterion 8: FAIL — missing {name}: {e}"))
    };
    for name in ["summary.json", "val.csv", "stratified.csv", "noise.csv", "ood.csv"] {
        let a = read(&outputs[0].0, name);
        let b = read(&outputs[1].0, name);
        assert_eq!(a, b, "criterion 8: FAIL — {name} differs between cold runs");
    }
    println!("criterion 8: PASS — two cold runs emitted byte-identical reports");
}

// --- criterion 9: stratified partition -------------------------------------

#[test]
fn criterion_09_stratified_partition() {
    let shared = fixture_runs();
    for (seed, run) in shared.artifacts.iter().enumerate() {
        let ranking = &run.ranking_val;
        let deepest = ranking.per_class.values().map(Vec::len).max().unwrap();
        let slices = stratified_eval_sets(ranking, deepest).unwrap();

        let mut by_class: std::collections::BTreeMap<u32, Vec<String>> = Default::default();
        for slice in &slices {
            for (class_id, image_id) in &slice.members {
                by_class.entry(*class_id).or_default().push(image_id.clone());
            }
        }
        for record in run.manifest.by_split(Split::Val) {
            let got = by_class.get(&record.class_id);
            assert!(
                got.is_some_and(|ids| ids.contains(&record.image_id)),
                "criterion 9: FAIL — seed {seed}: val image {} missing from slices",
                record.image_id
            );
        }
        for (class_id, mut ids) in by_class {
            let n = ids.len();
            ids.sort();
            ids.dedup();
            assert_eq!(
                ids.len(),
                n,
                "criterion 9: FAIL — seed {seed}: class {class_id} has duplicate slice members"
            );
            let val_count = run
                .manifest
                .by_split(Split::Val)
                .filter(|r| r.class_id == class_id)
                .count();
            assert_eq!(
                n, val_count,
                "criterion 9: FAIL — seed {seed}: class {class_id} slices cover {n} of \
                 {val_count} val images"
            );
        }
    }
    println!("criterion 9: PASS — slices partition every class's val set exactly, all 5 seeds");
}

// --- criterion 10: real-adapter recipe is documented ------------------------

#[test]
fn criterion_10_real_adapter_recipe_documented() {
    let readme_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let readme = std::fs::read_to_string(&readme_path)
        .unwrap_or_else(|e| panic!("criterion 10: FAIL — cannot read README.md: {e}"));
    for needle in [
        "Real-adapter smoke test",
        "OWL-ViT",
        "ResNet-50",
        "not run in CI",
    ] {
        assert!(
            readme.contains(needle),
            "criterion 10: FAIL — README.md lacks {needle:?}"
        );
    }
    println!("criterion 10: PASS — real-adapter recipe documented as a manual smoke test");
}
