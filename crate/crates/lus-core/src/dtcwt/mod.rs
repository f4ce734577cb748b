//! 2-D dual-tree complex wavelet transform.
//!
//! The forward transform produces, per decomposition level, six complex
//! directional subbands oriented at +15°, +45°, +75°, −75°, −45° and −15°,
//! plus a real lowpass residual that carries both trees. Level 1 uses the
//! biorthogonal pair without decimation (the quad-sampling into complex
//! coefficients provides the two trees); deeper levels use the decimating
//! q-shift kernels. Subband labels follow the spectral direction: ±15°
//! subbands respond to near-vertical image lines, ±75° to near-horizontal
//! ones.
//!
//! A plain separable DWT baseline lives in [`dwt`].

pub mod dwt;
pub mod filters;
pub(crate) mod kernels;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use filters::FilterBank;
use kernels::{colfilter, coldfilt, colifilt, rowdfilt, rowfilter, rowifilt, Mat};

/// The six subband orientations, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Plus15,
    Plus45,
    Plus75,
    Minus75,
    Minus45,
    Minus15,
}

impl Orientation {
    pub const ALL: [Orientation; 6] = [
        Orientation::Plus15,
        Orientation::Plus45,
        Orientation::Plus75,
        Orientation::Minus75,
        Orientation::Minus45,
        Orientation::Minus15,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&o| o == self).unwrap()
    }

    pub fn label(self) -> &'static str {
        match self {
            Orientation::Plus15 => "+15",
            Orientation::Plus45 => "+45",
            Orientation::Plus75 => "+75",
            Orientation::Minus75 => "-75",
            Orientation::Minus45 => "-45",
            Orientation::Minus15 => "-15",
        }
    }
}

/// A complex-valued subband image.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexImage {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexImage {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    /// Sum of coefficient magnitudes.
    pub fn total_magnitude(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum()
    }
}

/// Result of the forward transform.
#[derive(Debug, Clone)]
pub struct DtcwtPyramid {
    levels: usize,
    orig_height: usize,
    orig_width: usize,
    /// Interleaved two-tree lowpass kept for reconstruction.
    residual: Mat,
    /// Per level, the six complex subbands in `Orientation::ALL` order.
    subbands: Vec<[ComplexImage; 6]>,
    /// Per level, the tree-averaged scaling image (same dims as that level's
    /// subbands).
    scaling: Vec<Mat>,
    /// Lowpass dims before the multiple-of-4 extension, per level >= 2.
    crops: Vec<(usize, usize)>,
}

impl DtcwtPyramid {
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Subband at a 1-based level.
    pub fn subband(&self, level: usize, orientation: Orientation) -> Result<&ComplexImage> {
        self.check_level(level)?;
        Ok(&self.subbands[level - 1][orientation.index()])
    }

    pub fn subbands_at(&self, level: usize) -> Result<&[ComplexImage; 6]> {
        self.check_level(level)?;
        Ok(&self.subbands[level - 1])
    }

    /// Replaces a subband; the replacement must match the original dims.
    pub fn set_subband(
        &mut self,
        level: usize,
        orientation: Orientation,
        band: ComplexImage,
    ) -> Result<()> {
        self.check_level(level)?;
        let cur = &self.subbands[level - 1][orientation.index()];
        if (band.rows, band.cols) != (cur.rows, cur.cols) {
            return Err(Error::Geometry(format!(
                "malformed pyramid: subband dims {}x{} do not match {}x{}",
                band.rows, band.cols, cur.rows, cur.cols
            )));
        }
        self.subbands[level - 1][orientation.index()] = band;
        Ok(())
    }

    /// The raw interleaved lowpass residual `(rows, cols, data)`.
    pub fn residual_lowpass(&self) -> (usize, usize, &[f64]) {
        (self.residual.rows, self.residual.cols, &self.residual.data)
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level == 0 || level > self.levels {
            return Err(Error::Geometry(format!(
                "level {level} out of range 1..={}",
                self.levels
            )));
        }
        Ok(())
    }
}

fn mat_from_image(img: &GrayImage) -> Mat {
    Mat::from_vec(img.height(), img.width(), img.pixels().to_vec())
}

/// Splits the four quad phases of a real array into the two complex
/// subbands of an orientation pair.
fn q2c(y: &Mat) -> (ComplexImage, ComplexImage) {
    debug_assert!(y.rows % 2 == 0 && y.cols % 2 == 0);
    let (r2, c2) = (y.rows / 2, y.cols / 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut z1 = ComplexImage::zeros(r2, c2);
    let mut z2 = ComplexImage::zeros(r2, c2);
    for i in 0..r2 {
        for j in 0..c2 {
            let a = y.at(2 * i, 2 * j);
            let b = y.at(2 * i, 2 * j + 1);
            let c = y.at(2 * i + 1, 2 * j);
            let d = y.at(2 * i + 1, 2 * j + 1);
            let p = Complex64::new(a * s, b * s);
            let q = Complex64::new(d * s, -c * s);
            z1.data[i * c2 + j] = p - q;
            z2.data[i * c2 + j] = p + q;
        }
    }
    (z1, z2)
}

/// Inverse of [`q2c`].
fn c2q(z1: &ComplexImage, z2: &ComplexImage) -> Mat {
    debug_assert_eq!((z1.rows, z1.cols), (z2.rows, z2.cols));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut y = Mat::zeros(2 * z1.rows, 2 * z1.cols);
    for i in 0..z1.rows {
        for j in 0..z1.cols {
            let p = (z1.at(i, j) + z2.at(i, j)) * s;
            let q = (z1.at(i, j) - z2.at(i, j)) * s;
            let cols = y.cols;
            y.data[2 * i * cols + 2 * j] = p.re;
            y.data[2 * i * cols + 2 * j + 1] = p.im;
            y.data[(2 * i + 1) * cols + 2 * j] = q.im;
            y.data[(2 * i + 1) * cols + 2 * j + 1] = -q.re;
        }
    }
    y
}

/// Average of the four quad phases; the per-level scaling image.
fn phase_average(lolo: &Mat) -> Mat {
    let (r2, c2) = (lolo.rows / 2, lolo.cols / 2);
    let mut out = Mat::zeros(r2, c2);
    for i in 0..r2 {
        for j in 0..c2 {
            out.data[i * c2 + j] = 0.25
                * (lolo.at(2 * i, 2 * j)
                    + lolo.at(2 * i, 2 * j + 1)
                    + lolo.at(2 * i + 1, 2 * j)
                    + lolo.at(2 * i + 1, 2 * j + 1));
        }
    }
    out
}

/// Orientation-pair assembly: `(lo-rows ⊗ hi-cols)` pairs make ±15°,
/// `(hi-rows ⊗ lo-cols)` ±75°, `(hi ⊗ hi)` ±45°.
fn push_level(
    subbands: &mut Vec<[ComplexImage; 6]>,
    b15: (ComplexImage, ComplexImage),
    b45: (ComplexImage, ComplexImage),
    b75: (ComplexImage, ComplexImage),
) {
    subbands.push([b15.0, b45.0, b75.0, b75.1, b45.1, b15.1]);
}

/// Forward dual-tree complex wavelet transform.
pub fn dtcwt_forward(img: &GrayImage, levels: usize) -> Result<DtcwtPyramid> {
    if levels == 0 {
        return Err(Error::Geometry("levels must be >= 1".into()));
    }
    let min_dim = img.height().min(img.width());
    if min_dim < (1usize << levels) {
        return Err(Error::Geometry(format!(
            "image {}x{} too small for {} level(s)",
            img.height(),
            img.width(),
            levels
        )));
    }

    let fb = FilterBank::reference();
    let mut x = mat_from_image(img);
    if x.rows % 2 == 1 {
        x = x.extend_bottom();
    }
    if x.cols % 2 == 1 {
        x = x.extend_right();
    }

    let mut subbands = Vec::with_capacity(levels);
    let mut scaling = Vec::with_capacity(levels);
    let mut crops = Vec::new();

    let lo = colfilter(&x, &fb.level1_lowpass_a);
    let hi = colfilter(&x, &fb.level1_highpass_a);
    let mut lolo = rowfilter(&lo, &fb.level1_lowpass_a);
    push_level(
        &mut subbands,
        q2c(&rowfilter(&lo, &fb.level1_highpass_a)),
        q2c(&rowfilter(&hi, &fb.level1_highpass_a)),
        q2c(&rowfilter(&hi, &fb.level1_lowpass_a)),
    );
    scaling.push(phase_average(&lolo));

    for _ in 1..levels {
        let pre = (lolo.rows, lolo.cols);
        if lolo.rows % 4 != 0 {
            lolo = lolo.extend_both();
        }
        if lolo.cols % 4 != 0 {
            lolo = lolo.extend_cols_both();
        }
        crops.push(pre);

        let lo = coldfilt(&lolo, &fb.qshift_lowpass_b, &fb.qshift_lowpass_a);
        let hi = coldfilt(&lolo, &fb.qshift_highpass_b, &fb.qshift_highpass_a);
        lolo = rowdfilt(&lo, &fb.qshift_lowpass_b, &fb.qshift_lowpass_a);
        push_level(
            &mut subbands,
            q2c(&rowdfilt(&lo, &fb.qshift_highpass_b, &fb.qshift_highpass_a)),
            q2c(&rowdfilt(&hi, &fb.qshift_highpass_b, &fb.qshift_highpass_a)),
            q2c(&rowdfilt(&hi, &fb.qshift_lowpass_b, &fb.qshift_lowpass_a)),
        );
        scaling.push(phase_average(&lolo));
    }

    Ok(DtcwtPyramid {
        levels,
        orig_height: img.height(),
        orig_width: img.width(),
        residual: lolo,
        subbands,
        scaling,
        crops,
    })
}

/// Inverse transform; reconstructs the original image.
pub fn dtcwt_inverse(pyr: &DtcwtPyramid) -> Result<GrayImage> {
    if pyr.subbands.len() != pyr.levels || pyr.scaling.len() != pyr.levels {
        return Err(Error::Geometry(
            "malformed pyramid: level count mismatch".into(),
        ));
    }
    let fb = FilterBank::reference();
    let mut lolo = pyr.residual.clone();

    for lev in (1..pyr.levels).rev() {
        let bands = &pyr.subbands[lev];
        check_band_dims(bands, lolo.rows / 2, lolo.cols / 2)?;
        let lh = c2q(&bands[0], &bands[5]);
        let hh = c2q(&bands[1], &bands[4]);
        let hl = c2q(&bands[2], &bands[3]);
        let lo = mat_add(
            &rowifilt(&lolo, &fb.qshift_synth_lowpass_b, &fb.qshift_synth_lowpass_a),
            &rowifilt(&lh, &fb.qshift_synth_highpass_b, &fb.qshift_synth_highpass_a),
        );
        let hi = mat_add(
            &rowifilt(&hl, &fb.qshift_synth_lowpass_b, &fb.qshift_synth_lowpass_a),
            &rowifilt(&hh, &fb.qshift_synth_highpass_b, &fb.qshift_synth_highpass_a),
        );
        lolo = mat_add(
            &colifilt(&lo, &fb.qshift_synth_lowpass_b, &fb.qshift_synth_lowpass_a),
            &colifilt(&hi, &fb.qshift_synth_highpass_b, &fb.qshift_synth_highpass_a),
        );
        let pre = pyr.crops[lev - 1];
        if lolo.rows != pre.0 {
            lolo = lolo.trim_both();
        }
        if lolo.cols != pre.1 {
            lolo = lolo.trim_cols_both();
        }
    }

    let bands = &pyr.subbands[0];
    check_band_dims(bands, lolo.rows / 2, lolo.cols / 2)?;
    let lh = c2q(&bands[0], &bands[5]);
    let hh = c2q(&bands[1], &bands[4]);
    let hl = c2q(&bands[2], &bands[3]);
    let lo = mat_add(
        &rowfilter(&lolo, &fb.level1_synth_lowpass),
        &rowfilter(&lh, &fb.level1_synth_highpass),
    );
    let hi = mat_add(
        &rowfilter(&hl, &fb.level1_synth_lowpass),
        &rowfilter(&hh, &fb.level1_synth_highpass),
    );
    let x = mat_add(
        &colfilter(&lo, &fb.level1_synth_lowpass),
        &colfilter(&hi, &fb.level1_synth_highpass),
    );

    let mut pixels = Vec::with_capacity(pyr.orig_height * pyr.orig_width);
    for r in 0..pyr.orig_height {
        for c in 0..pyr.orig_width {
            pixels.push(x.at(r, c).clamp(0.0, 1.0));
        }
    }
    GrayImage::from_pixels(pyr.orig_height, pyr.orig_width, pixels)
}

fn check_band_dims(bands: &[ComplexImage; 6], rows: usize, cols: usize) -> Result<()> {
    for (i, b) in bands.iter().enumerate() {
        if (b.rows, b.cols) != (rows, cols) {
            return Err(Error::Geometry(format!(
                "malformed pyramid: subband {i} is {}x{}, expected {rows}x{cols}",
                b.rows, b.cols
            )));
        }
    }
    Ok(())
}

fn mat_add(a: &Mat, b: &Mat) -> Mat {
    debug_assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    let data = a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect();
    Mat::from_vec(a.rows, a.cols, data)
}

/// The seven per-level display/feature images: the scaling (lowpass) image
/// followed by the six subband magnitudes, each rescaled affinely to `[0,1]`
/// by its own min/max. A constant image maps to all zeros.
pub fn magnitude_subimages(pyr: &DtcwtPyramid, level: usize) -> Result<Vec<GrayImage>> {
    pyr.check_level(level)?;
    let mut out = Vec::with_capacity(7);
    let sc = &pyr.scaling[level - 1];
    out.push(rescale_unit(sc.rows, sc.cols, sc.data.clone())?);
    for band in &pyr.subbands[level - 1] {
        let mags: Vec<f64> = band.data.iter().map(|z| z.norm()).collect();
        out.push(rescale_unit(band.rows, band.cols, mags)?);
    }
    Ok(out)
}

fn rescale_unit(rows: usize, cols: usize, mut values: Vec<f64>) -> Result<GrayImage> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if span <= f64::EPSILON * max.abs().max(1.0) {
        values.iter_mut().for_each(|v| *v = 0.0);
    } else {
        values
            .iter_mut()
            .for_each(|v| *v = ((*v - min) / span).clamp(0.0, 1.0));
    }
    GrayImage::from_pixels(rows, cols, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::GrayImage;

    fn deterministic_image(h: usize, w: usize, seed: u64) -> GrayImage {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xDA3E);
        let mut pixels = Vec::with_capacity(h * w);
        for _ in 0..h * w {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            pixels.push((state >> 11) as f64 / (1u64 << 53) as f64);
        }
        GrayImage::from_pixels(h, w, pixels).unwrap()
    }

    #[test]
    fn constant_image_has_silent_subbands() {
        let img = GrayImage::constant(32, 32, 0.5).unwrap();
        let pyr = dtcwt_forward(&img, 2).unwrap();
        for level in 1..=2 {
            for o in Orientation::ALL {
                let band = pyr.subband(level, o).unwrap();
                let max = band.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(max < 1e-10, "level {level} {} max {max}", o.label());
            }
        }
        let rec = dtcwt_inverse(&pyr).unwrap();
        for &p in rec.pixels() {
            assert!((p - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn horizontal_line_dominates_pm75() {
        let mut px = vec![0.0; 64 * 64];
        px[32 * 64..33 * 64].iter_mut().for_each(|p| *p = 1.0);
        let img = GrayImage::from_pixels(64, 64, px).unwrap();
        let pyr = dtcwt_forward(&img, 1).unwrap();
        let totals: Vec<f64> = Orientation::ALL
            .iter()
            .map(|&o| pyr.subband(1, o).unwrap().total_magnitude())
            .collect();
        let p75 = totals[Orientation::Plus75.index()];
        let m75 = totals[Orientation::Minus75.index()];
        for (i, &t) in totals.iter().enumerate() {
            if i != Orientation::Plus75.index() && i != Orientation::Minus75.index() {
                assert!(t < p75 && t < m75, "band {i} total {t} not dominated");
            }
        }
    }

    #[test]
    fn transpose_symmetry_swaps_15_and_75() {
        let mut px = vec![0.0; 64 * 64];
        px[32 * 64..33 * 64].iter_mut().for_each(|p| *p = 1.0);
        let horiz = GrayImage::from_pixels(64, 64, px).unwrap();
        let mut px_t = vec![0.0; 64 * 64];
        for r in 0..64 {
            for c in 0..64 {
                px_t[c * 64 + r] = horiz.get(r, c);
            }
        }
        let vert = GrayImage::from_pixels(64, 64, px_t).unwrap();

        let ph = dtcwt_forward(&horiz, 1).unwrap();
        let pv = dtcwt_forward(&vert, 1).unwrap();
        let th: Vec<f64> = Orientation::ALL
            .iter()
            .map(|&o| ph.subband(1, o).unwrap().total_magnitude())
            .collect();
        let tv: Vec<f64> = Orientation::ALL
            .iter()
            .map(|&o| pv.subband(1, o).unwrap().total_magnitude())
            .collect();
        // vertical line -> ±15 dominate, with the same totals the horizontal
        // line put into ±75
        let i15 = Orientation::Plus15.index();
        let i75 = Orientation::Plus75.index();
        let im15 = Orientation::Minus15.index();
        let im75 = Orientation::Minus75.index();
        assert!((tv[i15] + tv[im15] - (th[i75] + th[im75])).abs() < 1e-8);
        for (i, &t) in tv.iter().enumerate() {
            if i != i15 && i != im15 {
                assert!(t < tv[i15] && t < tv[im15]);
            }
        }
    }

    #[test]
    fn round_trip_even_and_odd_sizes() {
        for (h, w, levels) in [(64, 64, 3), (65, 63, 3), (50, 46, 2), (500, 400, 1)] {
            let img = deterministic_image(h, w, (h * w) as u64);
            let pyr = dtcwt_forward(&img, levels).unwrap();
            let rec = dtcwt_inverse(&pyr).unwrap();
            let err = img
                .pixels()
                .iter()
                .zip(rec.pixels())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "{h}x{w} x{levels}: err {err}");
        }
    }

    #[test]
    fn subband_dims_halve_per_level() {
        let img = deterministic_image(64, 48, 5);
        let pyr = dtcwt_forward(&img, 3).unwrap();
        for (level, want) in [(1, (32, 24)), (2, (16, 12)), (3, (8, 6))] {
            let b = pyr.subband(level, Orientation::Plus45).unwrap();
            assert_eq!((b.rows(), b.cols()), want);
        }
    }

    #[test]
    fn too_small_or_zero_levels_rejected() {
        let img = GrayImage::constant(4, 4, 0.1).unwrap();
        assert!(dtcwt_forward(&img, 3).is_err());
        assert!(dtcwt_forward(&img, 0).is_err());
    }

    #[test]
    fn magnitude_subimages_contract() {
        let img = deterministic_image(64, 64, 11);
        let pyr = dtcwt_forward(&img, 2).unwrap();
        for level in 1..=2 {
            let subs = magnitude_subimages(&pyr, level).unwrap();
            assert_eq!(subs.len(), 7);
            for s in &subs {
                assert!(s.pixels().iter().all(|&p| (0.0..=1.0).contains(&p)));
            }
        }
        assert!(magnitude_subimages(&pyr, 0).is_err());
        assert!(magnitude_subimages(&pyr, 3).is_err());

        let flat = GrayImage::constant(32, 32, 0.7).unwrap();
        let pyr = dtcwt_forward(&flat, 1).unwrap();
        let subs = magnitude_subimages(&pyr, 1).unwrap();
        for s in &subs[1..] {
            assert!(s.pixels().iter().all(|&p| p == 0.0));
        }
    }

    #[test]
    fn zeroed_subbands_lose_energy() {
        let img = deterministic_image(64, 64, 23);
        let mut pyr = dtcwt_forward(&img, 2).unwrap();
        for level in 1..=2 {
            for o in Orientation::ALL {
                let b = pyr.subband(level, o).unwrap();
                let z = ComplexImage::zeros(b.rows(), b.cols());
                pyr.set_subband(level, o, z).unwrap();
            }
        }
        let smoothed = dtcwt_inverse(&pyr).unwrap();
        let energy = |g: &GrayImage| g.pixels().iter().map(|p| p * p).sum::<f64>();
        assert!(energy(&smoothed) <= energy(&img));
    }

    #[test]
    fn set_subband_rejects_wrong_dims() {
        let img = deterministic_image(32, 32, 3);
        let mut pyr = dtcwt_forward(&img, 1).unwrap();
        let bad = ComplexImage::zeros(3, 3);
        assert!(pyr
            .set_subband(1, Orientation::Plus15, bad)
            .is_err());
    }

    #[test]
    fn linearity() {
        let a = deterministic_image(32, 32, 1);
        let b = deterministic_image(32, 32, 2);
        let combo_px: Vec<f64> = a
            .pixels()
            .iter()
            .zip(b.pixels())
            .map(|(x, y)| 0.4 * x + 0.6 * y)
            .collect();
        let combo = GrayImage::from_pixels(32, 32, combo_px).unwrap();
        let pa = dtcwt_forward(&a, 2).unwrap();
        let pb = dtcwt_forward(&b, 2).unwrap();
        let pc = dtcwt_forward(&combo, 2).unwrap();
        for level in 1..=2 {
            for o in Orientation::ALL {
                let za = pa.subband(level, o).unwrap();
                let zb = pb.subband(level, o).unwrap();
                let zc = pc.subband(level, o).unwrap();
                for i in 0..za.data().len() {
                    let want = 0.4 * za.data()[i] + 0.6 * zb.data()[i];
                    let got = zc.data()[i];
                    assert!((want - got).norm() < 1e-10);
                }
            }
        }
    }
}
