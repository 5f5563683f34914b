//! Mock detector for the synthetic fixture.
//!
//! Pure in image bytes: it reads the background color from the top-left
//! corner pixel, takes the bounding rectangle of all pixels that differ from
//! it as the detection box, and recovers the glyph's occlusion from the
//! box's white border ring, whose pixels are (1-o)*255 + o*bg per channel.
//! Confidence is 1 - o, so a clearly visible object scores near 1 and a
//! fully occluded one near 0 or goes undetected.

use std::path::Path;

use crate::error::{Result, SpurankError};

use super::{DetectionBox, DetectorBackend};

pub const MOCK_DETECTOR_ID: &str = "mock-detector-v1";

/// Channel delta below which a pixel counts as background.
const DIFF_THRESHOLD: u8 = 3;

pub struct MockDetector;

impl DetectorBackend for MockDetector {
    fn backend_id(&self) -> &str {
        MOCK_DETECTOR_ID
    }

    fn detect(&self, image_path: &Path, _queries: &[String]) -> Result<Vec<DetectionBox>> {
        let img = image::open(image_path)
            .map_err(|e| SpurankError::BadImage {
                path: image_path.to_path_buf(),
                reason: e.to_string(),
            })?
            .to_rgb8();
        Ok(detect_in_pixels(&img))
    }
}

fn detect_in_pixels(img: &image::RgbImage) -> Vec<DetectionBox> {
    let (width, height) = img.dimensions();
    if width == 0 || height == 0 {
        return Vec::new();
    }
    let bg = img.get_pixel(0, 0).0;

    let mut bounds: Option<(u32, u32, u32, u32)> = None;
    for (x, y, px) in img.enumerate_pixels() {
        let differs = px.0.iter().zip(bg).any(|(&c, b)| c.abs_diff(b) >= DIFF_THRESHOLD);
        if differs {
            bounds = Some(match bounds {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
    }
    let Some((x0, y0, x1, y1)) = bounds else {
        return Vec::new();
    };

    // Ring pixels blend white toward bg, so o is readable from any channel
    // with enough headroom above the background level.
    let corner = img.get_pixel(x0, y0).0;
    let mut acc = 0.0;
    let mut n = 0usize;
    for ch in 0..3 {
        let headroom = 255 - bg[ch] as i32;
        if headroom >= 85 {
            acc += (255 - corner[ch] as i32) as f64 / headroom as f64;
            n += 1;
        }
    }
    let o = if n == 0 { 1.0 } else { (acc / n as f64).clamp(0.0, 1.0) };

    vec![DetectionBox {
        x_min: x0 as f64,
        y_min: y0 as f64,
        x_max: (x1 + 1) as f64,
        y_max: (y1 + 1) as f64,
        score: (1.0 - o).clamp(0.0, 1.0),
        query_index: 0,
    }]
}
