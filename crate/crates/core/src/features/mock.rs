//! Mock backbone: 16x16x3 block-mean downsample, a fixed seeded Gaussian
//! projection to d=64, then per-vector standardization. Pure f64 arithmetic
//! in a fixed order, so outputs are exactly reproducible.

use std::path::Path;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SpurankError};
use crate::seeding::keyed_rng;
use crate::tensor::ImageTensor;

use super::BackboneAdapter;

pub const MOCK_BACKBONE_ID: &str = "mock-backbone-v1";
pub const MOCK_DIM: usize = 64;

const POOL: usize = 16;
const FLAT: usize = POOL * POOL * 3;

fn projection() -> &'static [f64] {
    static PROJ: OnceLock<Vec<f64>> = OnceLock::new();
    PROJ.get_or_init(|| {
        let mut rng = keyed_rng(0, "mock-backbone", "projection-v1");
        (0..MOCK_DIM * FLAT)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect()
    })
}

/// Block-mean pool to 16x16x3: bin (by,bx) covers rows
/// [by*H/16, (by+1)*H/16) and the matching column range.
fn pool(image: &ImageTensor) -> Result<Vec<f64>> {
    let (h, w) = (image.height, image.width);
    if h < POOL || w < POOL {
        return Err(SpurankError::DimensionMismatch {
            expected: POOL,
            got: h.min(w),
        });
    }
    let mut sums = vec![0.0f64; FLAT];
    let mut counts = vec![0u32; POOL * POOL];
    for r in 0..h {
        let by = r * POOL / h;
        for c in 0..w {
            let bx = c * POOL / w;
            let bin = by * POOL + bx;
            counts[bin] += 1;
            for ch in 0..3 {
                sums[bin * 3 + ch] += image.data[(r * w + c) * 3 + ch] as f64;
            }
        }
    }
    for bin in 0..POOL * POOL {
        let n = counts[bin] as f64;
        for ch in 0..3 {
            sums[bin * 3 + ch] /= n;
        }
    }
    Ok(sums)
}

/// The full mock embedding on an in-memory tensor.
pub fn mock_backbone_embed(image: &ImageTensor) -> Result<Vec<f32>> {
    let v = pool(image)?;
    let proj = projection();
    let mut y = vec![0.0f64; MOCK_DIM];
    for (j, out) in y.iter_mut().enumerate() {
        let row = &proj[j * FLAT..(j + 1) * FLAT];
        let mut acc = 0.0;
        for i in 0..FLAT {
            acc += row[i] * v[i];
        }
        *out = acc;
    }
    let mean = y.iter().sum::<f64>() / MOCK_DIM as f64;
    let var = y.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / MOCK_DIM as f64;
    let scale = 1.0 / (var + 1e-8).sqrt();
    Ok(y.iter().map(|a| ((a - mean) * scale) as f32).collect())
}

pub struct MockBackbone;

impl BackboneAdapter for MockBackbone {
    fn backbone_id(&self) -> &str {
        MOCK_BACKBONE_ID
    }

    fn dim(&self) -> usize {
        MOCK_DIM
    }

    fn embed_path(&self, image_path: &Path) -> Result<Vec<f32>> {
        let tensor = ImageTensor::load_png(image_path)?;
        mock_backbone_embed(&tensor)
    }

    fn embed_tensor(&self, image: &ImageTensor) -> Result<Vec<f32>> {
        mock_backbone_embed(image)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{class_bg_color, render_image, PixelRect};

    fn tensor_from(pixels: Vec<u8>, size: u32) -> ImageTensor {
        let img = image::RgbImage::from_raw(size, size, pixels).unwrap();
        ImageTensor::from_rgb8(&img)
    }

    #[test]
    fn identical_images_embed_identically() {
        let fg_box = PixelRect {
            x_min: 8,
            y_min: 8,
            x_max: 40,
            y_max: 40,
        };
        let pixels = render_image(0, 4, class_bg_color(0), 0.3, &fg_box, 64);
        let a = mock_backbone_embed(&tensor_from(pixels.clone(), 64)).unwrap();
        let b = mock_backbone_embed(&tensor_from(pixels, 64)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), MOCK_DIM);
    }

    #[test]
    fn background_color_changes_the_embedding() {
        let fg_box = PixelRect {
            x_min: 8,
            y_min: 8,
            x_max: 40,
            y_max: 40,
        };
        let a = render_image(0, 4, class_bg_color(0), 0.3, &fg_box, 64);
        let b = render_image(0, 4, class_bg_color(1), 0.3, &fg_box, 64);
        let ea = mock_backbone_embed(&tensor_from(a, 64)).unwrap();
        let eb = mock_backbone_embed(&tensor_from(b, 64)).unwrap();
        let dist: f32 = ea
            .iter()
            .zip(&eb)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f32>()
            .sqrt();
        assert!(dist > 0.1, "distance {dist} too small");
    }

    #[test]
    fn zero_image_embeds_to_zero() {
        let tensor = ImageTensor::zeros(32, 32);
        let e = mock_backbone_embed(&tensor).unwrap();
        assert!(e.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardization_holds() {
        let fg_box = PixelRect {
            x_min: 4,
            y_min: 4,
            x_max: 30,
            y_max: 30,
        };
        let pixels = render_image(2, 4, class_bg_color(3), 0.1, &fg_box, 64);
        let e = mock_backbone_embed(&tensor_from(pixels, 64)).unwrap();
        let mean: f64 = e.iter().map(|&v| v as f64).sum::<f64>() / e.len() as f64;
        let var: f64 =
            e.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / e.len() as f64;
        assert!(mean.abs() < 1e-6);
        assert!((var - 1.0).abs() < 1e-3);
    }

    #[test]
    fn tiny_images_are_rejected() {
        let tensor = ImageTensor::zeros(8, 8);
        assert!(mock_backbone_embed(&tensor).is_err());
    }

    #[test]
    fn uneven_sizes_pool_deterministically() {
        let mut t = ImageTensor::zeros(33, 47);
        for (i, v) in t.data.iter_mut().enumerate() {
            *v = (i % 255) as f32 / 255.0;
        }
        let a = mock_backbone_embed(&t).unwrap();
        let b = mock_backbone_embed(&t).unwrap();
        assert_eq!(a, b);
    }
}
