//! Minimal PNG output for reports: a confusion-matrix heat map and a
//! per-class metric bar chart. Deliberately dependency-light — cells and
//! bars only, no text rendering.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::Result;
use crate::evaluate::MetricReport;

const CELL: u32 = 40;
const MARGIN: u32 = 10;

fn heat_color(t: f64) -> Rgb<u8> {
    // white -> blue ramp
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 - 205.0 * t) as u8;
    let g = (255.0 - 155.0 * t) as u8;
    let b = 255;
    Rgb([r, g, b])
}

/// Render the confusion matrix as a heat map, one cell per (truth,
/// prediction) pair, row-normalized.
pub fn confusion_png(report: &MetricReport, path: &Path) -> Result<()> {
    let k = report.confusion.matrix.len() as u32;
    let size = k * CELL + 2 * MARGIN;
    let mut img = RgbImage::from_pixel(size, size, Rgb([255, 255, 255]));
    for (i, row) in report.confusion.matrix.iter().enumerate() {
        let total: usize = row.iter().sum();
        for (j, &v) in row.iter().enumerate() {
            let frac = if total > 0 { v as f64 / total as f64 } else { 0.0 };
            let color = heat_color(frac);
            for dy in 1..CELL - 1 {
                for dx in 1..CELL - 1 {
                    img.put_pixel(
                        MARGIN + j as u32 * CELL + dx,
                        MARGIN + i as u32 * CELL + dy,
                        color,
                    );
                }
            }
        }
    }
    img.save(path).map_err(|e| {
        std::io::Error::new(std::io::ErrorKind::Other, e.to_string()).into()
    })
}

/// Render per-class F1 as a bar chart (one bar per class, canonical order,
/// full height = 100%).
pub fn per_class_f1_png(report: &MetricReport, path: &Path) -> Result<()> {
    let k = report.per_class.len() as u32;
    let height = 200u32;
    let width = k * CELL + 2 * MARGIN;
    let mut img = RgbImage::from_pixel(width, height + 2 * MARGIN, Rgb([255, 255, 255]));
    for (i, m) in report.per_class.iter().enumerate() {
        let bar = ((m.f1 / 100.0) * height as f64) as u32;
        for dy in 0..bar {
            for dx in 4..CELL - 4 {
                img.put_pixel(
                    MARGIN + i as u32 * CELL + dx,
                    MARGIN + height - 1 - dy,
                    Rgb([60, 120, 200]),
                );
            }
        }
    }
    img.save(path).map_err(|e| {
        std::io::Error::new(std::io::ErrorKind::Other, e.to_string()).into()
    })
}
