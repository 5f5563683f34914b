//! Float image tensors.
//!
//! `ImageTensor` is the model-input representation: H×W×3, f32, nominally in
//! [0,1] (noise injection may push values outside that range; nothing clamps).

use std::path::Path;

use image::RgbImage;

use crate::error::{Result, SpurankError};

#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    pub height: usize,
    pub width: usize,
    /// Row-major (row, col, channel), length `height * width * 3`.
    pub data: Vec<f32>,
}

impl ImageTensor {
    pub fn zeros(height: usize, width: usize) -> Self {
        ImageTensor {
            height,
            width,
            data: vec![0.0; height * width * 3],
        }
    }

    pub fn from_rgb8(img: &RgbImage) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut data = Vec::with_capacity(h * w * 3);
        for px in img.pixels() {
            data.push(px.0[0] as f32 / 255.0);
            data.push(px.0[1] as f32 / 255.0);
            data.push(px.0[2] as f32 / 255.0);
        }
        ImageTensor {
            height: h,
            width: w,
            data,
        }
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| SpurankError::BadImage {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Ok(Self::from_rgb8(&img.to_rgb8()))
    }

    /// Convert back to 8-bit RGB, clamping to [0,1].
    pub fn to_rgb8(&self) -> RgbImage {
        let mut img = RgbImage::new(self.width as u32, self.height as u32);
        for r in 0..self.height {
            for c in 0..self.width {
                let base = (r * self.width + c) * 3;
                let px = [
                    (self.data[base].clamp(0.0, 1.0) * 255.0).round() as u8,
                    (self.data[base + 1].clamp(0.0, 1.0) * 255.0).round() as u8,
                    (self.data[base + 2].clamp(0.0, 1.0) * 255.0).round() as u8,
                ];
                img.put_pixel(c as u32, r as u32, image::Rgb(px));
            }
        }
        img
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, channel: usize) -> usize {
        (row * self.width + col) * 3 + channel
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.data[self.index(row, col, channel)]
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rgb8_round_trip() {
        let mut img = RgbImage::new(3, 2);
        for (i, px) in img.pixels_mut().enumerate() {
            px.0 = [i as u8 * 40, 255 - i as u8 * 30, 7];
        }
        let t = ImageTensor::from_rgb8(&img);
        assert_eq!(t.height, 2);
        assert_eq!(t.width, 3);
        assert_eq!(t.to_rgb8(), img);
    }

    #[test]
    fn indexing_is_row_major() {
        let mut t = ImageTensor::zeros(2, 2);
        let idx = t.index(1, 0, 2);
        t.data[idx] = 0.5;
        assert_eq!(t.get(1, 0, 2), 0.5);
        assert_eq!(t.index(0, 1, 0), 3);
        assert_eq!(t.index(1, 0, 0), 6);
    }
}
