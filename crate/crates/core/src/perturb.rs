//! Foreground masks from detection boxes, and norm-calibrated noise
//! injection. The noise field for an image is drawn once for the full
//! pixel grid in (row, col, channel) order, keyed by (seed, "noise",
//! image_id), so the fg and bg variants of one image sample disjoint
//! coordinates of the same field. The injected delta is alpha * v/||v||2
//! restricted to the region; untouched coordinates are bit-identical.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::detect::{sort_boxes, DetectionBox};
use crate::error::{Result, SpurankError};
use crate::seeding::keyed_rng;
use crate::tensor::ImageTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundMask {
    /// Row-major, one byte per pixel, values in {0, 1}.
    pub mask: Vec<u8>,
    pub width: usize,
    pub height: usize,
    pub image_id: String,
    /// The box the mask was rasterized from, if any survived selection.
    pub source_box: Option<DetectionBox>,
    /// True when no detection was available; the mask is all zeros.
    pub no_detection: bool,
}

impl ForegroundMask {
    pub fn fg_pixels(&self) -> usize {
        self.mask.iter().filter(|&&v| v == 1).count()
    }

    pub fn is_fg_empty(&self) -> bool {
        self.mask.iter().all(|&v| v == 0)
    }
}

/// Rasterize the best detection box (highest score; ties by (x_min, y_min))
/// onto a width x height grid. Coordinates round to the nearest integer and
/// the rounded box is half-open: [x0, x1) x [y0, y1).
pub fn build_mask(
    image_id: &str,
    boxes: &[DetectionBox],
    width: usize,
    height: usize,
) -> Result<ForegroundMask> {
    let mut mask = vec![0u8; width * height];
    if boxes.is_empty() {
        return Ok(ForegroundMask {
            mask,
            width,
            height,
            image_id: image_id.to_string(),
            source_box: None,
            no_detection: true,
        });
    }
    let mut sorted = boxes.to_vec();
    for b in &sorted {
        b.validate()?;
    }
    sort_boxes(&mut sorted);
    let best = sorted[0].clone();

    let x0 = best.x_min.round();
    let y0 = best.y_min.round();
    let x1 = best.x_max.round();
    let y1 = best.y_max.round();
    if x0 < 0.0 || y0 < 0.0 || x1 > width as f64 || y1 > height as f64 {
        return Err(SpurankError::InvalidBox(format!(
            "box [{x0}, {y0}, {x1}, {y1}] for {image_id} exceeds {width}x{height} image"
        )));
    }
    let (x0, y0, x1, y1) = (x0 as usize, y0 as usize, x1 as usize, y1 as usize);
    for y in y0..y1 {
        for x in x0..x1 {
            mask[y * width + x] = 1;
        }
    }
    Ok(ForegroundMask {
        mask,
        width,
        height,
        image_id: image_id.to_string(),
        source_box: Some(best),
        no_detection: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Fg,
    Bg,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Fg => write!(f, "fg"),
            Region::Bg => write!(f, "bg"),
        }
    }
}

impl FromStr for Region {
    type Err = SpurankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fg" => Ok(Region::Fg),
            "bg" => Ok(Region::Bg),
            other => Err(SpurankError::Config(format!(
                "unknown region '{other}' (expected fg or bg)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub alpha: f64,
    pub region: Region,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(SpurankError::Config("alpha must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NoiseOutcome {
    pub image: ImageTensor,
    /// True when the requested region had no pixels; the image is a clone.
    pub degenerate: bool,
}

/// Add alpha * f(n restricted to region) to the image, where n is the
/// full-image standard-normal field and f is l2 normalization (f(0) = 0).
/// alpha = 0 returns an exact clone. Values are not clamped.
pub fn inject_noise(
    image: &ImageTensor,
    mask: &ForegroundMask,
    config: &NoiseConfig,
) -> Result<NoiseOutcome> {
    config.validate()?;
    if mask.width != image.width {
        return Err(SpurankError::DimensionMismatch {
            expected: mask.width,
            got: image.width,
        });
    }
    if mask.height != image.height {
        return Err(SpurankError::DimensionMismatch {
            expected: mask.height,
            got: image.height,
        });
    }
    if config.alpha == 0.0 {
        return Ok(NoiseOutcome {
            image: image.clone(),
            degenerate: false,
        });
    }

    // Full-field draw in (row, col, channel) order; region selection must
    // not change which variate lands on which coordinate.
    let mut rng = keyed_rng(config.seed, "noise", &mask.image_id);
    let total = image.height * image.width * 3;
    let mut field = Vec::with_capacity(total);
    for _ in 0..total {
        field.push(rng.sample::<f64, _>(StandardNormal));
    }

    let want_fg = config.region == Region::Fg;
    let mut indices = Vec::new();
    for (pixel, &m) in mask.mask.iter().enumerate() {
        if (m == 1) == want_fg {
            let base = pixel * 3;
            indices.extend([base, base + 1, base + 2]);
        }
    }
    if indices.is_empty() {
        return Ok(NoiseOutcome {
            image: image.clone(),
            degenerate: true,
        });
    }

    let norm = indices
        .iter()
        .map(|&i| field[i] * field[i])
        .sum::<f64>()
        .sqrt();
    let mut out = image.clone();
    if norm > 0.0 {
        let scale = config.alpha / norm;
        for &i in &indices {
            out.data[i] = (out.data[i] as f64 + scale * field[i]) as f32;
        }
    }
    Ok(NoiseOutcome {
        image: out,
        degenerate: false,
    })
}
