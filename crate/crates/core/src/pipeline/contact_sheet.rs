//! Contact sheets: one class's images laid out by spuriosity, most
//! spurious (lowest detector score) leftmost, clearest rightmost, each
//! tile annotated with its score.

use std::path::Path;

use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};

use crate::error::{Result, SpurankError};
use crate::manifest::DatasetManifest;
use crate::ranking::{RankedImage, SpuriosityRanking};
use crate::tensor::ImageTensor;

const GUTTER: u32 = 2;
const DIVIDER: u32 = 6;
const STRIP: u32 = 10;

/// 3x5 glyphs for score annotation; one byte per row, low 3 bits used.
fn glyph(c: char) -> Option<[u8; 5]> {
    Some(match c {
        '0' => [0b111, 0b101, 0b101, 0b101, 0b111],
        '1' => [0b010, 0b110, 0b010, 0b010, 0b111],
        '2' => [0b111, 0b001, 0b111, 0b100, 0b111],
        '3' => [0b111, 0b001, 0b111, 0b001, 0b111],
        '4' => [0b101, 0b101, 0b111, 0b001, 0b001],
        '5' => [0b111, 0b100, 0b111, 0b001, 0b111],
        '6' => [0b111, 0b100, 0b111, 0b101, 0b111],
        '7' => [0b111, 0b001, 0b010, 0b010, 0b010],
        '8' => [0b111, 0b101, 0b111, 0b101, 0b111],
        '9' => [0b111, 0b101, 0b111, 0b001, 0b111],
        '.' => [0b000, 0b000, 0b000, 0b000, 0b010],
        '-' => [0b000, 0b000, 0b111, 0b000, 0b000],
        _ => return None,
    })
}

fn draw_text(canvas: &mut RgbImage, x0: u32, y0: u32, text: &str, color: Rgb<u8>) {
    let mut x = x0;
    for c in text.chars() {
        if let Some(rows) = glyph(c) {
            for (dy, row) in rows.iter().enumerate() {
                for dx in 0..3 {
                    if row & (0b100 >> dx) != 0 {
                        let (px, py) = (x + dx, y0 + dy as u32);
                        if px < canvas.width() && py < canvas.height() {
                            canvas.put_pixel(px, py, color);
                        }
                    }
                }
            }
        }
        x += 4;
    }
}

/// Render `n_high_spur` lowest-score images (leftmost, ascending score)
/// and `n_low_spur` highest-score images (rightmost, ascending score) for
/// one class into a single annotated PNG row.
pub fn emit_contact_sheet(
    ranking: &SpuriosityRanking,
    manifest: &DatasetManifest,
    class_id: u32,
    n_low_spur: usize,
    n_high_spur: usize,
    tile: u32,
    out_path: &Path,
) -> Result<()> {
    if tile < 8 {
        return Err(SpurankError::Config("tile size must be >= 8".into()));
    }
    if n_low_spur + n_high_spur == 0 {
        return Err(SpurankError::Config(
            "contact sheet needs at least one tile".into(),
        ));
    }
    let ranked = ranking
        .class(class_id)
        .filter(|r| !r.is_empty())
        .ok_or(SpurankError::EmptyClass(class_id))?;
    if n_low_spur + n_high_spur > ranked.len() {
        return Err(SpurankError::Config(format!(
            "requested {} tiles but class {class_id} has {} ranked images",
            n_low_spur + n_high_spur,
            ranked.len()
        )));
    }

    // ranked is descending score; ascending-score display order is reversed
    let high_spur: Vec<&RankedImage> = ranked.iter().rev().take(n_high_spur).collect();
    let low_spur: Vec<&RankedImage> = ranked
        .iter()
        .take(n_low_spur)
        .rev()
        .collect();

    let total = n_high_spur + n_low_spur;
    let both = !(high_spur.is_empty() || low_spur.is_empty());
    let width = total as u32 * (tile + GUTTER) - GUTTER + if both { DIVIDER + GUTTER } else { 0 };
    let height = tile + STRIP;
    let mut canvas = RgbImage::from_pixel(width, height, Rgb([0, 0, 0]));

    let mut x: u32 = 0;
    let blit = |canvas: &mut RgbImage, x: u32, item: &RankedImage| -> Result<()> {
        let record = manifest
            .record(&item.image_id)
            .ok_or_else(|| SpurankError::UnknownImageId(item.image_id.clone()))?;
        let tensor = ImageTensor::load_png(&manifest.image_path(record))?;
        let rgb = tensor.to_rgb8();
        let scaled = imageops::resize(&rgb, tile, tile, FilterType::Nearest);
        imageops::replace(canvas, &scaled, x as i64, 0);
        draw_text(
            canvas,
            x + 2,
            tile + 2,
            &format!("{:.3}", item.score),
            Rgb([255, 255, 255]),
        );
        Ok(())
    };

    for item in &high_spur {
        blit(&mut canvas, x, item)?;
        x += tile + GUTTER;
    }
    if both {
        for dy in 0..height {
            for dx in 0..DIVIDER {
                canvas.put_pixel(x + dx, dy, Rgb([48, 48, 48]));
            }
        }
        x += DIVIDER + GUTTER;
    }
    for item in &low_spur {
        blit(&mut canvas, x, item)?;
        x += tile + GUTTER;
    }

    if let Some(parent) = out_path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| SpurankError::io(parent, e))?;
    }
    canvas
        .save(out_path)
        .map_err(|e| SpurankError::BadImage {
            path: out_path.to_path_buf(),
            reason: e.to_string(),
        })
}
