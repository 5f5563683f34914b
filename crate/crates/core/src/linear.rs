//! Multinomial logistic regression on frozen features: deterministic
//! full-batch gradient descent with Armijo backtracking (factor 0.5,
//! c1 = 1e-4). The objective, mean softmax cross-entropy plus
//! (l2_lambda/2)*||W||_F^2, is convex; W starts at zero by default so the
//! result is a pure function of the data.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpurankError};
use crate::features::FeatureMatrix;
use crate::seeding::keyed_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    /// C x d weights.
    pub w: Array2<f64>,
    /// C biases.
    pub b: Array1<f64>,
    /// Ascending class ids; row i of `w` scores class_ids[i].
    pub class_ids: Vec<u32>,
    pub backbone_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub l2_lambda: f64,
    pub max_iters: usize,
    /// Gradient-norm stop threshold.
    pub tolerance: f64,
    /// Used only when init_scale > 0.
    pub seed: u64,
    /// Scale of the random W init; 0 keeps the deterministic zero init.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_lambda: 1e-4,
            max_iters: 1000,
            tolerance: 1e-6,
            seed: 0,
            init_scale: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l2_lambda < 0.0 || !self.l2_lambda.is_finite() {
            return Err(SpurankError::Config("l2_lambda must be >= 0".into()));
        }
        if self.max_iters < 1 {
            return Err(SpurankError::Config("max_iters must be >= 1".into()));
        }
        if self.tolerance <= 0.0 || !self.tolerance.is_finite() {
            return Err(SpurankError::Config("tolerance must be > 0".into()));
        }
        if self.init_scale < 0.0 || !self.init_scale.is_finite() {
            return Err(SpurankError::Config("init_scale must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub head: LinearHead,
    pub final_objective: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    /// Objective after init and after every accepted step; non-increasing.
    pub objective_trace: Vec<f64>,
}

/// Row-stable softmax probabilities of logits Z (n x C), in place.
fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

fn logits(x: &Array2<f64>, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
    let mut z = x.dot(&w.t());
    z += b;
    z
}

/// Regularized mean cross-entropy. Exposed so tests can difference it
/// directly against the analytic gradient.
pub fn objective(
    x: &Array2<f64>,
    labels: &[usize],
    w: &Array2<f64>,
    b: &Array1<f64>,
    l2_lambda: f64,
) -> f64 {
    let z = logits(x, w, b);
    let n = x.nrows() as f64;
    let mut loss = 0.0;
    for (i, row) in z.rows().into_iter().enumerate() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - row[labels[i]];
    }
    loss / n + 0.5 * l2_lambda * w.iter().map(|v| v * v).sum::<f64>()
}

/// Objective plus its analytic gradient in (W, b).
pub fn objective_and_gradient(
    x: &Array2<f64>,
    labels: &[usize],
    w: &Array2<f64>,
    b: &Array1<f64>,
    l2_lambda: f64,
) -> (f64, Array2<f64>, Array1<f64>) {
    let n = x.nrows();
    let nf = n as f64;
    let mut z = logits(x, w, b);

    let mut loss = 0.0;
    for (i, row) in z.rows().into_iter().enumerate() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - row[labels[i]];
    }
    let obj = loss / nf + 0.5 * l2_lambda * w.iter().map(|v| v * v).sum::<f64>();

    softmax_rows(&mut z);
    for (i, &y) in labels.iter().enumerate() {
        z[(i, y)] -= 1.0;
    }
    z /= nf;
    let grad_w = z.t().dot(x) + &(l2_lambda * w);
    let grad_b = z.sum_axis(Axis(0));
    (obj, grad_w, grad_b)
}

fn grad_norm(gw: &Array2<f64>, gb: &Array1<f64>) -> f64 {
    (gw.iter().map(|v| v * v).sum::<f64>() + gb.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK_FACTOR: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// Train a head on the matrix's rows. Class ids are the sorted distinct
/// labels; every accepted step decreases the objective.
pub fn train_head(features: &FeatureMatrix, config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    if features.is_empty() {
        return Err(SpurankError::EmptyInput("training features".into()));
    }
    let mut class_ids: Vec<u32> = features.labels.clone();
    class_ids.sort_unstable();
    class_ids.dedup();
    if class_ids.len() < 2 {
        return Err(SpurankError::Config(
            "training requires at least 2 distinct classes".into(),
        ));
    }
    let c = class_ids.len();
    let d = features.d;
    let n = features.n();

    let x = Array2::from_shape_vec(
        (n, d),
        features.values.iter().map(|&v| v as f64).collect(),
    )
    .expect("matrix invariant: values is n*d");
    let labels: Vec<usize> = features
        .labels
        .iter()
        .map(|label| class_ids.binary_search(label).expect("label from class set"))
        .collect();

    let mut w = if config.init_scale > 0.0 {
        let mut rng = keyed_rng(config.seed, "head-init", "w");
        Array2::from_shape_fn((c, d), |_| {
            config.init_scale * rng.sample::<f64, _>(StandardNormal)
        })
    } else {
        Array2::zeros((c, d))
    };
    let mut b = Array1::zeros(c);

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let (mut f, mut gw, mut gb) = objective_and_gradient(&x, &labels, &w, &b, config.l2_lambda);
    trace.push(f);
    let mut gnorm = grad_norm(&gw, &gb);

    for iter in 0..config.max_iters {
        if gnorm <= config.tolerance {
            converged = true;
            break;
        }
        let g2 = gnorm * gnorm;
        let mut t = 1.0;
        let mut accepted = false;
        let mut smallest_trial_finite = false;
        for _ in 0..MAX_BACKTRACKS {
            let w_new = &w - &(t * &gw);
            let b_new = &b - &(t * &gb);
            let f_new = objective(&x, &labels, &w_new, &b_new, config.l2_lambda);
            smallest_trial_finite = f_new.is_finite();
            // Strict representable decrease: sufficient-decrease alone would
            // accept f_new == f once c1*t*g2 underflows, looping forever.
            if smallest_trial_finite && f_new < f && f_new <= f - ARMIJO_C1 * t * g2 {
                w = w_new;
                b = b_new;
                f = f_new;
                accepted = true;
                break;
            }
            t *= BACKTRACK_FACTOR;
        }
        if !accepted {
            if smallest_trial_finite {
                // The objective admits no representable descent step: the
                // iterate sits at the f64 floor of a convex function, which
                // is as converged as this arithmetic can express.
                converged = true;
                break;
            }
            return Err(SpurankError::LineSearchFailed { iteration: iter });
        }
        debug_assert!(trace.last().is_none_or(|&prev| f <= prev));
        trace.push(f);
        iterations = iter + 1;
        let (f2, gw2, gb2) = objective_and_gradient(&x, &labels, &w, &b, config.l2_lambda);
        f = f2;
        gw = gw2;
        gb = gb2;
        gnorm = grad_norm(&gw, &gb);
    }
    if gnorm <= config.tolerance {
        converged = true;
    }

    Ok(TrainReport {
        head: LinearHead {
            w,
            b,
            class_ids,
            backbone_id: features.backbone_id.clone(),
        },
        final_objective: f,
        iterations,
        grad_norm: gnorm,
        converged,
        objective_trace: trace,
    })
}

#[derive(Debug, Clone)]
pub struct Prediction {
    /// Predicted class id per row; softmax ties go to the lowest class id.
    pub argmax: Vec<u32>,
    /// n x C probabilities, rows summing to 1.
    pub probs: Array2<f64>,
}

/// Predict raw feature rows (n x d, f64).
pub fn predict_rows(head: &LinearHead, x: &Array2<f64>) -> Result<Prediction> {
    if x.ncols() != head.w.ncols() {
        return Err(SpurankError::DimensionMismatch {
            expected: head.w.ncols(),
            got: x.ncols(),
        });
    }
    let mut z = logits(x, &head.w, &head.b);
    softmax_rows(&mut z);
    let argmax = z
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = j;
                }
            }
            head.class_ids[best]
        })
        .collect();
    Ok(Prediction { argmax, probs: z })
}

pub fn predict(head: &LinearHead, features: &FeatureMatrix) -> Result<Prediction> {
    let x = Array2::from_shape_vec(
        (features.n(), features.d),
        features.values.iter().map(|&v| v as f64).collect(),
    )
    .expect("matrix invariant: values is n*d");
    predict_rows(head, &x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub accuracy: f64,
    pub n: usize,
    /// Classes present in the evaluated rows only.
    pub per_class: BTreeMap<u32, f64>,
}

pub fn evaluate_accuracy(head: &LinearHead, features: &FeatureMatrix) -> Result<AccuracyReport> {
    if features.is_empty() {
        return Err(SpurankError::EmptyInput("evaluation features".into()));
    }
    let prediction = predict(head, features)?;
    let mut correct = 0usize;
    let mut per_class_counts: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for (i, &label) in features.labels.iter().enumerate() {
        let entry = per_class_counts.entry(label).or_insert((0, 0));
        entry.1 += 1;
        if prediction.argmax[i] == label {
            entry.0 += 1;
            correct += 1;
        }
    }
    Ok(AccuracyReport {
        accuracy: correct as f64 / features.n() as f64,
        n: features.n(),
        per_class: per_class_counts
            .into_iter()
            .map(|(class_id, (ok, total))| (class_id, ok as f64 / total as f64))
            .collect(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct HeadHeader {
    format: String,
    version: u32,
    c: usize,
    d: usize,
    class_ids: Vec<u32>,
    backbone_id: String,
    train_config: TrainConfig,
}

pub const HEAD_FORMAT: &str = "spurank-head";
pub const HEAD_VERSION: u32 = 1;

/// Head file: JSON header line, then W row-major and b as f32 LE.
pub fn save_head(head: &LinearHead, config: &TrainConfig, path: &Path) -> Result<()> {
    let header = HeadHeader {
        format: HEAD_FORMAT.to_string(),
        version: HEAD_VERSION,
        c: head.class_ids.len(),
        d: head.w.ncols(),
        class_ids: head.class_ids.clone(),
        backbone_id: head.backbone_id.clone(),
        train_config: config.clone(),
    };
    let mut out = Vec::new();
    writeln!(out, "{}", serde_json::to_string(&header).expect("header json"))
        .expect("write to vec");
    for v in head.w.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    for v in head.b.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    std::fs::write(path, out).map_err(|e| SpurankError::io(path, e))
}

pub fn load_head(path: &Path) -> Result<(LinearHead, TrainConfig)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| SpurankError::io(path, e))?;
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: "missing header line".into(),
        })?;
    let header: HeadHeader =
        serde_json::from_slice(&bytes[..header_end]).map_err(|e| SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("bad head header: {e}"),
        })?;
    if header.format != HEAD_FORMAT || header.version != HEAD_VERSION {
        return Err(SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("unsupported head format {}/{}", header.format, header.version),
        });
    }
    let expected = (header.c * header.d + header.c) * 4;
    let payload = &bytes[header_end + 1..];
    if payload.len() != expected {
        return Err(SpurankError::MalformedLine {
            path: path.to_path_buf(),
            line: 2,
            reason: format!("payload is {} bytes, expected {expected}", payload.len()),
        });
    }
    let w_flat: Vec<f64> = payload[..header.c * header.d * 4]
        .chunks_exact(4)
        .map(|chunk| f32::from_le_bytes(chunk.try_into().expect("4-byte chunk")) as f64)
        .collect();
    let w = Array2::from_shape_vec((header.c, header.d), w_flat).expect("sized above");
    let b_flat: Vec<f64> = payload[header.c * header.d * 4..]
        .chunks_exact(4)
        .map(|chunk| f32::from_le_bytes(chunk.try_into().expect("4-byte chunk")) as f64)
        .collect();
    Ok((
        LinearHead {
            w,
            b: Array1::from_vec(b_flat),
            class_ids: header.class_ids,
            backbone_id: header.backbone_id,
        },
        header.train_config,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n_per: usize, sep: f64, seed: u64) -> FeatureMatrix {
        let mut rng = keyed_rng(seed, "test", "blobs");
        let mut rows = Vec::new();
        for class in 0..2u32 {
            let center = if class == 0 { -sep } else { sep };
            for i in 0..n_per {
                let v: Vec<f32> = (0..2)
                    .map(|_| (center + rng.sample::<f64, _>(StandardNormal)) as f32)
                    .collect();
                rows.push((format!("c{class}-{i:03}"), class, v));
            }
        }
        FeatureMatrix::from_rows("test-bb", 2, rows).unwrap()
    }

    fn random_problem(
        seed: u64,
        n: usize,
        d: usize,
        c: usize,
    ) -> (Array2<f64>, Vec<usize>, Array2<f64>, Array1<f64>) {
        let mut rng = keyed_rng(seed, "test", "fd-problem");
        let x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let w = Array2::from_shape_fn((c, d), |_| 0.5 * rng.sample::<f64, _>(StandardNormal));
        let b = Array1::from_shape_fn(c, |_| 0.5 * rng.sample::<f64, _>(StandardNormal));
        (x, labels, w, b)
    }

    #[test]
    fn separable_blobs_reach_full_training_accuracy() {
        let features = blobs(30, 4.0, 3);
        let report = train_head(&features, &TrainConfig::default()).unwrap();
        let acc = evaluate_accuracy(&report.head, &features).unwrap();
        assert_eq!(acc.accuracy, 1.0);
        assert_eq!(acc.per_class.len(), 2);
    }

    #[test]
    fn huge_regularizer_forces_tiny_weights() {
        let features = blobs(30, 2.0, 4);
        let config = TrainConfig {
            l2_lambda: 1e6,
            ..TrainConfig::default()
        };
        let report = train_head(&features, &config).unwrap();
        let w_norm = report.head.w.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(w_norm <= 1e-3, "||W||_F = {w_norm}");
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..3u64 {
            let (x, labels, w, b) = random_problem(seed, 40, 6, 4);
            let l2 = 1e-3;
            let (_, gw, gb) = objective_and_gradient(&x, &labels, &w, &b, l2);
            let h = 1e-5;
            let mut max_rel = 0.0f64;
            for i in 0..w.nrows() {
                for j in 0..w.ncols() {
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
            }
            for i in 0..b.len() {
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
            assert!(max_rel <= 1e-5, "seed {seed}: max relative error {max_rel}");
        }
    }

    #[test]
    fn objective_trace_is_monotone_non_increasing() {
        let features = blobs(40, 1.0, 9);
        let report = train_head(&features, &TrainConfig::default()).unwrap();
        for pair in report.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0], "objective increased: {pair:?}");
        }
        assert!(report.iterations >= 1);
    }

    #[test]
    fn zero_head_predicts_uniform_lowest_class() {
        let head = LinearHead {
            w: Array2::zeros((4, 3)),
            b: Array1::zeros(4),
            class_ids: vec![2, 5, 7, 9],
            backbone_id: "test".into(),
        };
        let x = Array2::from_shape_vec((2, 3), vec![1.0, -2.0, 0.5, 0.0, 3.0, 1.0]).unwrap();
        let pred = predict_rows(&head, &x).unwrap();
        for row in pred.probs.rows() {
            for &p in row {
                assert!((p - 0.25).abs() < 1e-12);
            }
        }
        assert_eq!(pred.argmax, vec![2, 2]);
    }

    #[test]
    fn probabilities_are_shift_invariant_and_normalized() {
        let (x, _, w, b) = random_problem(5, 12, 4, 3);
        let head = LinearHead {
            w: w.clone(),
            b: b.clone(),
            class_ids: vec![0, 1, 2],
            backbone_id: "test".into(),
        };
        let shifted = LinearHead {
            w,
            b: b + 17.5,
            class_ids: vec![0, 1, 2],
            backbone_id: "test".into(),
        };
        let p1 = predict_rows(&head, &x).unwrap();
        let p2 = predict_rows(&shifted, &x).unwrap();
        for (a, b) in p1.probs.iter().zip(p2.probs.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        for row in p1.probs.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn single_row_matches_batched_prediction() {
        let (x, _, w, b) = random_problem(6, 8, 5, 3);
        let head = LinearHead {
            w,
            b,
            class_ids: vec![0, 1, 2],
            backbone_id: "test".into(),
        };
        let batched = predict_rows(&head, &x).unwrap();
        for i in 0..x.nrows() {
            let row = x.row(i).insert_axis(Axis(0)).to_owned();
            let single = predict_rows(&head, &row).unwrap();
            assert_eq!(single.argmax[0], batched.argmax[i]);
            for j in 0..3 {
                assert_eq!(single.probs[(0, j)], batched.probs[(i, j)]);
            }
        }
    }

    #[test]
    fn positive_rescaling_preserves_argmax() {
        let (x, _, w, b) = random_problem(7, 30, 4, 5);
        let head = LinearHead {
            w: w.clone(),
            b: b.clone(),
            class_ids: (0..5).collect(),
            backbone_id: "test".into(),
        };
        let scaled = LinearHead {
            w: 3.5 * &w,
            b: 3.5 * &b,
            class_ids: (0..5).collect(),
            backbone_id: "test".into(),
        };
        assert_eq!(
            predict_rows(&head, &x).unwrap().argmax,
            predict_rows(&scaled, &x).unwrap().argmax
        );
    }

    #[test]
    fn accuracy_matches_brute_force_count() {
        let features = blobs(100, 0.3, 8);
        let report = train_head(&features, &TrainConfig::default()).unwrap();
        let acc = evaluate_accuracy(&report.head, &features).unwrap();
        let pred = predict(&report.head, &features).unwrap();
        let mut correct = 0;
        for (i, &label) in features.labels.iter().enumerate() {
            if pred.argmax[i] == label {
                correct += 1;
            }
        }
        assert_eq!(acc.accuracy, correct as f64 / features.n() as f64);
        assert_eq!(acc.n, 200);
    }

    #[test]
    fn row_order_is_canonicalized_so_training_is_permutation_invariant() {
        let features = blobs(25, 1.5, 10);
        let mut rows: Vec<(String, u32, Vec<f32>)> = (0..features.n())
            .map(|i| {
                (
                    features.image_ids[i].clone(),
                    features.labels[i],
                    features.row(i).to_vec(),
                )
            })
            .collect();
        rows.reverse();
        let permuted = FeatureMatrix::from_rows("test-bb", 2, rows).unwrap();
        let a = train_head(&features, &TrainConfig::default()).unwrap();
        let b = train_head(&permuted, &TrainConfig::default()).unwrap();
        assert_eq!(a.head.w, b.head.w);
        assert_eq!(a.head.b, b.head.b);
    }

    #[test]
    fn convexity_makes_random_inits_agree() {
        let features = blobs(30, 1.0, 11);
        let tight = TrainConfig {
            l2_lambda: 1e-2,
            tolerance: 1e-9,
            max_iters: 50_000,
            init_scale: 0.5,
            ..TrainConfig::default()
        };
        let a = train_head(&features, &TrainConfig { seed: 1, ..tight.clone() }).unwrap();
        let b = train_head(&features, &TrainConfig { seed: 2, ..tight }).unwrap();
        assert!(a.converged && b.converged);
        let max_dw = a
            .head
            .w
            .iter()
            .zip(b.head.w.iter())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        let max_db = a
            .head
            .b
            .iter()
            .zip(b.head.b.iter())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(max_dw.max(max_db) <= 1e-4, "params differ by {}", max_dw.max(max_db));
        let pa = predict_rows(&a.head, &Array2::zeros((1, 2))).unwrap();
        let pb = predict_rows(&b.head, &Array2::zeros((1, 2))).unwrap();
        assert_eq!(pa.argmax, pb.argmax);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let empty = FeatureMatrix::empty("t", 4);
        assert!(train_head(&empty, &TrainConfig::default()).is_err());
        let one_class =
            FeatureMatrix::from_rows("t", 2, vec![("a".into(), 3, vec![0.0, 1.0])]).unwrap();
        assert!(train_head(&one_class, &TrainConfig::default()).is_err());
        assert!(evaluate_accuracy(
            &LinearHead {
                w: Array2::zeros((2, 2)),
                b: Array1::zeros(2),
                class_ids: vec![0, 1],
                backbone_id: "t".into(),
            },
            &empty
        )
        .is_err());
    }

    #[test]
    fn head_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("head.bin");
        let features = blobs(20, 2.0, 12);
        let config = TrainConfig::default();
        let report = train_head(&features, &config).unwrap();
        save_head(&report.head, &config, &path).unwrap();
        let (loaded, loaded_config) = load_head(&path).unwrap();
        assert_eq!(loaded.class_ids, report.head.class_ids);
        assert_eq!(loaded.backbone_id, report.head.backbone_id);
        assert_eq!(loaded_config, config);
        // storage is f32: loaded parameters match to f32 precision
        for (a, b) in loaded.w.iter().zip(report.head.w.iter()) {
            assert_eq!(*a, *b as f32 as f64);
        }
        let x = Array2::from_shape_vec((3, 2), vec![0.5, -1.0, 2.0, 0.1, -0.3, 0.9]).unwrap();
        let p1 = predict_rows(&report.head, &x).unwrap();
        let p2 = predict_rows(&loaded, &x).unwrap();
        assert_eq!(p1.argmax, p2.argmax);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let head = LinearHead {
            w: Array2::zeros((2, 3)),
            b: Array1::zeros(2),
            class_ids: vec![0, 1],
            backbone_id: "t".into(),
        };
        let x = Array2::zeros((1, 5));
        assert!(matches!(
            predict_rows(&head, &x).unwrap_err(),
            SpurankError::DimensionMismatch { expected: 3, got: 5 }
        ));
    }
}
