//! Grayscale image representation, loading, and preprocessing.
//!
//! The preprocessing chain mirrors the acquisition-side cleanup the rest of
//! the pipeline assumes: overlay-artifact removal inside a per-video ROI,
//! size normalization to 500x400, and top/bottom half splits.

use std::path::Path;

use crate::error::{Error, Result};

/// A grayscale image with row-major `f64` intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Builds an image from row-major pixels, validating the invariants:
    /// non-degenerate dimensions, `pixels.len() == height * width`, and all
    /// intensities within `[0, 1]`.
    pub fn from_pixels(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Geometry(format!(
                "image dimensions must be >= 1x1, got {height}x{width}"
            )));
        }
        if pixels.len() != height * width {
            return Err(Error::Geometry(format!(
                "pixel buffer length {} does not match {height}x{width}",
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Geometry(format!(
                "pixel intensity {p} outside [0, 1]"
            )));
        }
        Ok(GrayImage {
            height,
            width,
            pixels,
        })
    }

    /// Constant-valued image.
    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::from_pixels(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.height && col < self.width);
        self.pixels[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }
}

/// Inclusive rectangular region of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoiRect {
    pub top: usize,
    pub left: usize,
    pub bottom: usize,
    pub right: usize,
}

impl RoiRect {
    pub fn new(top: usize, left: usize, bottom: usize, right: usize) -> Result<Self> {
        if top > bottom || left > right {
            return Err(Error::InvalidRoi(format!(
                "degenerate roi top={top} left={left} bottom={bottom} right={right}"
            )));
        }
        Ok(RoiRect {
            top,
            left,
            bottom,
            right,
        })
    }

    fn validate_within(&self, img: &GrayImage) -> Result<()> {
        if self.bottom >= img.height() || self.right >= img.width() {
            return Err(Error::InvalidRoi(format!(
                "roi ({},{})..({},{}) exceeds image {}x{}",
                self.top,
                self.left,
                self.bottom,
                self.right,
                img.height(),
                img.width()
            )));
        }
        Ok(())
    }
}

/// Loads an 8-bit grayscale PNG or binary PGM (P5), mapping intensities to
/// `[0, 1]` by division by 255. Color and 16-bit inputs are rejected.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| Error::ImageDecode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let luma = match decoded {
        image::DynamicImage::ImageLuma8(img) => img,
        other => {
            return Err(Error::UnsupportedImage {
                path: path.to_path_buf(),
                reason: format!(
                    "expected 8-bit grayscale, got {:?}",
                    other.color()
                ),
            })
        }
    };
    let (width, height) = (luma.width() as usize, luma.height() as usize);
    let pixels = luma.into_raw().iter().map(|&b| b as f64 / 255.0).collect();
    GrayImage::from_pixels(height, width, pixels)
}

/// Writes an image as a binary PGM (P5) with 8-bit quantization.
pub fn write_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let mut data = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    data.extend(
        img.pixels()
            .iter()
            .map(|&p| (p * 255.0).round().clamp(0.0, 255.0) as u8),
    );
    std::fs::write(path, data).map_err(|e| Error::io(path, e))
}

/// Replaces bright overlay artifacts inside `roi` with the ROI's median
/// intensity.
///
/// A pixel is selected when its intensity is strictly greater than half the
/// ROI maximum; the 8-connected neighbors of selected pixels are selected as
/// well, clipped to the ROI. Every selected pixel is replaced by the median
/// of the original ROI values. Pixels outside the ROI are untouched; an
/// all-zero ROI selects nothing.
pub fn remove_artifacts(img: &GrayImage, roi: RoiRect) -> Result<GrayImage> {
    roi.validate_within(img)?;

    let mut roi_values = Vec::with_capacity((roi.bottom - roi.top + 1) * (roi.right - roi.left + 1));
    let mut max = f64::NEG_INFINITY;
    for r in roi.top..=roi.bottom {
        for c in roi.left..=roi.right {
            let v = img.get(r, c);
            roi_values.push(v);
            max = max.max(v);
        }
    }
    let threshold = 0.5 * max;

    let roi_h = roi.bottom - roi.top + 1;
    let roi_w = roi.right - roi.left + 1;
    let mut selected = vec![false; roi_h * roi_w];
    for r in roi.top..=roi.bottom {
        for c in roi.left..=roi.right {
            if img.get(r, c) > threshold {
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let nr = r as i64 + dr;
                        let nc = c as i64 + dc;
                        if nr >= roi.top as i64
                            && nr <= roi.bottom as i64
                            && nc >= roi.left as i64
                            && nc <= roi.right as i64
                        {
                            let idx =
                                (nr as usize - roi.top) * roi_w + (nc as usize - roi.left);
                            selected[idx] = true;
                        }
                    }
                }
            }
        }
    }

    if !selected.iter().any(|&s| s) {
        return Ok(img.clone());
    }

    let median = median_of(&mut roi_values);
    let mut out = img.clone();
    for r in roi.top..=roi.bottom {
        for c in roi.left..=roi.right {
            if selected[(r - roi.top) * roi_w + (c - roi.left)] {
                out.set(r, c, median);
            }
        }
    }
    Ok(out)
}

/// Median; for an even-sized sample, the mean of the two middle values.
fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Normalized target: resize to 520x420, then strip a 10-pixel border from
/// every side, yielding a 500x400 image.
pub fn normalize_size(img: &GrayImage) -> Result<GrayImage> {
    if img.height() < 2 || img.width() < 2 {
        return Err(Error::Geometry(format!(
            "normalize_size needs at least 2x2 input, got {}x{}",
            img.height(),
            img.width()
        )));
    }
    let resized = resize_bilinear(img, 520, 420);
    let mut pixels = Vec::with_capacity(500 * 400);
    for r in 10..510 {
        pixels.extend_from_slice(&resized.row(r)[10..410]);
    }
    GrayImage::from_pixels(500, 400, pixels)
}

/// Bilinear resize with half-pixel center alignment (identity when the size
/// is unchanged).
fn resize_bilinear(img: &GrayImage, out_h: usize, out_w: usize) -> GrayImage {
    let scale_r = img.height() as f64 / out_h as f64;
    let scale_c = img.width() as f64 / out_w as f64;
    let mut pixels = Vec::with_capacity(out_h * out_w);
    for r in 0..out_h {
        let src_r = ((r as f64 + 0.5) * scale_r - 0.5).clamp(0.0, (img.height() - 1) as f64);
        let r0 = src_r.floor() as usize;
        let r1 = (r0 + 1).min(img.height() - 1);
        let fr = src_r - r0 as f64;
        for c in 0..out_w {
            let src_c = ((c as f64 + 0.5) * scale_c - 0.5).clamp(0.0, (img.width() - 1) as f64);
            let c0 = src_c.floor() as usize;
            let c1 = (c0 + 1).min(img.width() - 1);
            let fc = src_c - c0 as f64;
            let v = img.get(r0, c0) * (1.0 - fr) * (1.0 - fc)
                + img.get(r0, c1) * (1.0 - fr) * fc
                + img.get(r1, c0) * fr * (1.0 - fc)
                + img.get(r1, c1) * fr * fc;
            // Interpolation of in-range values stays in range; clamp guards
            // against rounding at the boundaries.
            pixels.push(v.clamp(0.0, 1.0));
        }
    }
    GrayImage::from_pixels(out_h, out_w, pixels).expect("bilinear output is valid by construction")
}

/// Splits into a top half of `floor(h/2)` rows and a bottom half with the
/// remaining rows. The two halves partition the input exactly.
pub fn split_halves(img: &GrayImage) -> Result<(GrayImage, GrayImage)> {
    if img.height() < 2 {
        return Err(Error::Geometry(
            "split_halves needs at least 2 rows".into(),
        ));
    }
    let mid = img.height() / 2;
    let top = GrayImage::from_pixels(
        mid,
        img.width(),
        img.pixels()[..mid * img.width()].to_vec(),
    )?;
    let bottom = GrayImage::from_pixels(
        img.height() - mid,
        img.width(),
        img.pixels()[mid * img.width()..].to_vec(),
    )?;
    Ok((top, bottom))
}
