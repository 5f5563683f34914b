//! Synthetic spurious-correlation fixture.
//!
//! Every image is a flat background color with one class glyph drawn inside
//! a random box. The background matches the class's own palette entry with
//! probability `p_spur`, otherwise another class's entry, so background is a
//! planted shortcut feature. The glyph (a per-class 8x8 bitmap filled with
//! the class glyph color, framed by a white one-pixel ring) is alpha-blended
//! toward the background with occlusion weight `o ~ Uniform[0,1]`: at o=0
//! the object is fully visible, at o=1 it is invisible. `o` is the recorded
//! ground-truth spuriosity proxy.
//!
//! All per-image randomness is keyed by (seed, image_id), so generation is
//! order-independent and byte-reproducible. Palette order and glyph bitmaps
//! are fixed constants of the class id, independent of the config seed.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpurankError};
use crate::manifest::{DatasetManifest, ImageRecord, Split};
use crate::seeding::keyed_rng;

/// Axis-aligned half-open pixel rectangle: x in [x_min, x_max), y in [y_min, y_max).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl PixelRect {
    pub fn width(&self) -> u32 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> u32 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x_min && x < self.x_max && y >= self.y_min && y < self.y_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub num_classes: u32,
    pub per_class: u32,
    pub val_per_class: u32,
    pub ood_per_class: u32,
    /// Square image side in pixels.
    pub image_size: u32,
    pub p_spur_train: f64,
    pub p_spur_val: f64,
    pub p_spur_ood: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            num_classes: 10,
            per_class: 300,
            val_per_class: 150,
            ood_per_class: 50,
            image_size: 64,
            p_spur_train: 0.9,
            p_spur_val: 0.5,
            p_spur_ood: 0.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(SpurankError::Config("num_classes must be >= 2".into()));
        }
        if self.num_classes > MAX_CLASSES {
            return Err(SpurankError::Config(format!(
                "num_classes must be <= {MAX_CLASSES} (palette capacity)"
            )));
        }
        if self.per_class < 1 {
            return Err(SpurankError::Config("per_class must be >= 1".into()));
        }
        if self.image_size < 32 {
            return Err(SpurankError::Config("image_size must be >= 32".into()));
        }
        for (name, p) in [
            ("p_spur_train", self.p_spur_train),
            ("p_spur_val", self.p_spur_val),
            ("p_spur_ood", self.p_spur_ood),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SpurankError::Config(format!("{name} must lie in [0,1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticGroundTruth {
    pub image_id: String,
    /// Occlusion in [0,1]; the ground-truth spuriosity proxy.
    pub o: f64,
    pub bg_correlated: bool,
    pub fg_box: PixelRect,
}

/// Palette capacity: channel grid {0,85,170,255}^3 minus pure white gives 63
/// colors; each class consumes one background and one glyph color.
pub const MAX_CLASSES: u32 = 31;

const CHANNEL_LEVELS: [u8; 4] = [0, 85, 170, 255];
const BOX_MARGIN: u32 = 4;

fn palette() -> &'static [[u8; 3]] {
    static PALETTE: OnceLock<Vec<[u8; 3]>> = OnceLock::new();
    PALETTE.get_or_init(|| {
        let mut colors = Vec::with_capacity(63);
        for &r in &CHANNEL_LEVELS {
            for &g in &CHANNEL_LEVELS {
                for &b in &CHANNEL_LEVELS {
                    if [r, g, b] != [255, 255, 255] {
                        colors.push([r, g, b]);
                    }
                }
            }
        }
        // Fixed shuffle: class colors are constants, not functions of the
        // user seed, so features stay stable across regenerations.
        let mut rng = keyed_rng(0, "synthetic-palette", "v1");
        colors.shuffle(&mut rng);
        colors
    })
}

/// The flat background color assigned to a class.
pub fn class_bg_color(class_id: u32) -> [u8; 3] {
    palette()[class_id as usize]
}

/// The glyph fill color assigned to a class (disjoint from all bg colors).
pub fn class_glyph_color(class_id: u32, num_classes: u32) -> [u8; 3] {
    palette()[(num_classes + class_id) as usize]
}

/// Per-class 8x8 glyph bitmap as 64 row-major bits, derived from class_id
/// only. Resamples until the on-bit count lands in [20, 44] so no glyph is
/// near-empty or near-solid.
pub fn glyph_bitmap(class_id: u32) -> u64 {
    let mut rng = keyed_rng(0, "synthetic-glyph", &class_id.to_string());
    loop {
        let bits: u64 = rng.random();
        if (20..=44).contains(&bits.count_ones()) {
            return bits;
        }
    }
}

fn blend(fg: u8, bg: u8, o: f64) -> u8 {
    ((1.0 - o) * fg as f64 + o * bg as f64).round() as u8
}

/// Render one fixture image as row-major RGB bytes.
///
/// Inside `fg_box`: the outermost one-pixel frame is a white ring, the
/// interior is the class's 8x8 bitmap (on-bits in the glyph color, off-bits
/// in the background color), everything blended toward `bg` with weight `o`.
/// Outside `fg_box`: flat `bg`, independent of `o`.
pub fn render_image(
    class_id: u32,
    num_classes: u32,
    bg: [u8; 3],
    o: f64,
    fg_box: &PixelRect,
    size: u32,
) -> Vec<u8> {
    let glyph = class_glyph_color(class_id, num_classes);
    let bits = glyph_bitmap(class_id);
    let mut pixels = Vec::with_capacity((size * size * 3) as usize);
    for y in 0..size {
        for x in 0..size {
            let color = if !fg_box.contains(x, y) {
                bg
            } else if x == fg_box.x_min
                || x == fg_box.x_max - 1
                || y == fg_box.y_min
                || y == fg_box.y_max - 1
            {
                [blend(255, bg[0], o), blend(255, bg[1], o), blend(255, bg[2], o)]
            } else {
                let iw = fg_box.width() - 2;
                let ih = fg_box.height() - 2;
                let gc = ((x - fg_box.x_min - 1) * 8 / iw) as usize;
                let gr = ((y - fg_box.y_min - 1) * 8 / ih) as usize;
                if bits >> (gr * 8 + gc) & 1 == 1 {
                    [
                        blend(glyph[0], bg[0], o),
                        blend(glyph[1], bg[1], o),
                        blend(glyph[2], bg[2], o),
                    ]
                } else {
                    bg
                }
            };
            pixels.extend_from_slice(&color);
        }
    }
    pixels
}

struct PlannedImage {
    image_id: String,
    class_id: u32,
    class_name: String,
    split: Split,
    p_spur: f64,
}

/// Draws for one image, in fixed stream order, all from (seed, image_id).
fn draw_image(plan: &PlannedImage, config: &SyntheticConfig) -> (SyntheticGroundTruth, [u8; 3]) {
    let mut rng = keyed_rng(config.seed, "synthetic-image", &plan.image_id);
    let correlated = rng.random_bool(plan.p_spur);
    let other = rng.random_range(0..config.num_classes - 1);
    let o: f64 = rng.random();

    let size = config.image_size;
    let lo = (size as f64 * 0.40).round() as u32;
    let hi = (size as f64 * 0.70).round() as u32;
    let w = rng.random_range(lo..=hi);
    let h = rng.random_range(lo..=hi);
    let x0 = rng.random_range(BOX_MARGIN..=size - BOX_MARGIN - w);
    let y0 = rng.random_range(BOX_MARGIN..=size - BOX_MARGIN - h);

    let bg_class = if correlated {
        plan.class_id
    } else if other >= plan.class_id {
        other + 1
    } else {
        other
    };
    let gt = SyntheticGroundTruth {
        image_id: plan.image_id.clone(),
        o,
        bg_correlated: correlated,
        fg_box: PixelRect {
            x_min: x0,
            y_min: y0,
            x_max: x0 + w,
            y_max: y0 + h,
        },
    };
    (gt, class_bg_color(bg_class))
}

/// Generate the fixture under `root`: PNG images in `root/images/`, plus
/// `manifest.jsonl` and `ground_truth.jsonl`. Returns the manifest and the
/// ground truth sorted by image_id.
pub fn generate_synthetic(
    config: &SyntheticConfig,
    root: &Path,
) -> Result<(DatasetManifest, Vec<SyntheticGroundTruth>)> {
    config.validate()?;
    let image_dir = root.join("images");
    std::fs::create_dir_all(&image_dir).map_err(|e| SpurankError::io(&image_dir, e))?;

    let classes: BTreeMap<u32, String> = (0..config.num_classes)
        .map(|i| (i, format!("class_{i:02}")))
        .collect();

    let mut plans = Vec::new();
    for (&class_id, class_name) in &classes {
        let splits = [
            (Split::Train, config.per_class, config.p_spur_train),
            (Split::Val, config.val_per_class, config.p_spur_val),
            (Split::Ood, config.ood_per_class, config.p_spur_ood),
        ];
        for (split, count, p_spur) in splits {
            for i in 0..count {
                plans.push(PlannedImage {
                    image_id: format!("{class_name}-{split}-{i:04}"),
                    class_id,
                    class_name: class_name.clone(),
                    split,
                    p_spur,
                });
            }
        }
    }

    let mut outputs: Vec<(ImageRecord, SyntheticGroundTruth)> = plans
        .par_iter()
        .map(|plan| {
            let (gt, bg) = draw_image(plan, config);
            let pixels = render_image(
                plan.class_id,
                config.num_classes,
                bg,
                gt.o,
                &gt.fg_box,
                config.image_size,
            );
            let rel_path = format!("images/{}.png", plan.image_id);
            let path = root.join(&rel_path);
            let img = image::RgbImage::from_raw(config.image_size, config.image_size, pixels)
                .expect("buffer sized to image");
            img.save(&path)
                .map_err(|e| SpurankError::BadImage {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
            let record = ImageRecord {
                image_id: plan.image_id.clone(),
                class_id: plan.class_id,
                class_name: plan.class_name.clone(),
                split: plan.split,
                path: rel_path,
            };
            Ok((record, gt))
        })
        .collect::<Result<_>>()?;
    outputs.sort_by(|a, b| a.0.image_id.cmp(&b.0.image_id));

    let (records, ground_truth): (Vec<_>, Vec<_>) = outputs.into_iter().unzip();
    let manifest = DatasetManifest::new(root, classes, records)?;
    manifest.save(&root.join("manifest.jsonl"))?;
    save_ground_truth(&root.join("ground_truth.jsonl"), &ground_truth)?;
    Ok((manifest, ground_truth))
}

pub fn save_ground_truth(path: &Path, truths: &[SyntheticGroundTruth]) -> Result<()> {
    let mut out = Vec::new();
    for gt in truths {
        writeln!(out, "{}", serde_json::to_string(gt).expect("ground truth json"))
            .expect("write to vec");
    }
    std::fs::write(path, out).map_err(|e| SpurankError::io(path, e))
}

pub fn load_ground_truth(path: &Path) -> Result<Vec<SyntheticGroundTruth>> {
    let file = std::fs::File::open(path).map_err(|e| SpurankError::io(path, e))?;
    let mut truths = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| SpurankError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let gt: SyntheticGroundTruth =
            serde_json::from_str(&line).map_err(|e| SpurankError::MalformedLine {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?;
        truths.push(gt);
    }
    Ok(truths)
}
