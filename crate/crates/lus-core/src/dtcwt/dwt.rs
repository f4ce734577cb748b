//! Plain separable 2-D discrete wavelet transform.
//!
//! This is the shift-variant baseline the dual-tree transform is compared
//! against. Two filter choices: the orthonormal Haar pair (exact energy
//! preservation) and the symmetric biorthogonal 9/7 pair with whole-point
//! symmetric extension. Odd dimensions are extended by one sample before
//! decimation so every subimage is `ceil(parent/2)`; the inverse crops back.

use crate::dtcwt::filters;
use crate::dtcwt::kernels::{wreflect, Mat};
use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Filter family for the baseline DWT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwtFilter {
    /// Orthonormal 2-tap pair; energy-preserving.
    Haar,
    /// Biorthogonal symmetric 9/7 pair.
    Antonini97,
}

/// Detail subimage selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetailKind {
    /// Horizontal highpass, vertical lowpass (responds to vertical lines).
    Horizontal,
    /// Vertical highpass, horizontal lowpass (responds to horizontal lines).
    Vertical,
    /// Highpass along both axes.
    Diagonal,
}

/// A real-valued subimage (coefficients are signed, unlike [`GrayImage`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealImage {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    fn from_mat(m: &Mat) -> Self {
        RealImage {
            rows: m.rows,
            cols: m.cols,
            data: m.data.clone(),
        }
    }
}

struct DetailSet {
    dh: Mat,
    dv: Mat,
    dd: Mat,
}

/// Multi-level separable DWT decomposition.
pub struct DwtPyramid {
    levels: usize,
    filter: DwtFilter,
    orig: (usize, usize),
    approx: Mat,
    details: Vec<DetailSet>,
    /// Input dims at each level before the extend-to-even step.
    crops: Vec<(usize, usize)>,
}

impl DwtPyramid {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn filter(&self) -> DwtFilter {
        self.filter
    }

    pub fn approx(&self) -> RealImage {
        RealImage::from_mat(&self.approx)
    }

    /// Detail subimage at a 1-based level.
    pub fn detail(&self, level: usize, kind: DetailKind) -> Result<RealImage> {
        if level == 0 || level > self.levels {
            return Err(Error::Geometry(format!(
                "level {level} out of range 1..={}",
                self.levels
            )));
        }
        let set = &self.details[level - 1];
        Ok(RealImage::from_mat(match kind {
            DetailKind::Horizontal => &set.dh,
            DetailKind::Vertical => &set.dv,
            DetailKind::Diagonal => &set.dd,
        }))
    }

    /// `[horizontal, vertical, diagonal]` detail energies at a level.
    pub fn detail_energies(&self, level: usize) -> Result<[f64; 3]> {
        Ok([
            self.detail(level, DetailKind::Horizontal)?.energy(),
            self.detail(level, DetailKind::Vertical)?.energy(),
            self.detail(level, DetailKind::Diagonal)?.energy(),
        ])
    }

    /// Total coefficient energy (approx plus every detail).
    pub fn total_energy(&self) -> f64 {
        let mut e: f64 = self.approx.data.iter().map(|v| v * v).sum();
        for set in &self.details {
            e += set.dh.data.iter().map(|v| v * v).sum::<f64>();
            e += set.dv.data.iter().map(|v| v * v).sum::<f64>();
            e += set.dd.data.iter().map(|v| v * v).sum::<f64>();
        }
        e
    }
}

struct Bank {
    h0: Vec<f64>,
    h1: Vec<f64>,
    g0: Vec<f64>,
    g1: Vec<f64>,
}

fn bank(filter: DwtFilter) -> Bank {
    match filter {
        DwtFilter::Haar => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            Bank {
                h0: vec![s, s],
                h1: vec![s, -s],
                g0: vec![s, s],
                g1: vec![s, -s],
            }
        }
        DwtFilter::Antonini97 => {
            let h0 = filters::LEVEL1_ANALYSIS_LOWPASS.to_vec();
            let g0 = filters::LEVEL1_SYNTHESIS_LOWPASS.to_vec();
            let modulate = |f: &[f64]| -> Vec<f64> {
                let c = f.len() as i64 / 2;
                f.iter()
                    .enumerate()
                    .map(|(n, &v)| {
                        if (n as i64 - c).rem_euclid(2) == 0 {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            };
            Bank {
                h1: modulate(&g0),
                g1: modulate(&h0),
                h0,
                g0,
            }
        }
    }
}

/// One 1-D analysis step on an even-length signal: lowpass at even phase,
/// highpass at odd phase, whole-point symmetric extension.
fn dwt1(x: &[f64], b: &Bank, haar: bool) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    debug_assert!(n % 2 == 0);
    let half = n / 2;
    if haar {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut lo = Vec::with_capacity(half);
        let mut hi = Vec::with_capacity(half);
        for i in 0..half {
            lo.push((x[2 * i] + x[2 * i + 1]) * s);
            hi.push((x[2 * i] - x[2 * i + 1]) * s);
        }
        return (lo, hi);
    }
    let c0 = (b.h0.len() / 2) as i64;
    let c1 = (b.h1.len() / 2) as i64;
    let mut lo = Vec::with_capacity(half);
    let mut hi = Vec::with_capacity(half);
    for i in 0..half as i64 {
        let mut acc = 0.0;
        for (k, &h) in b.h0.iter().enumerate() {
            acc += h * x[wreflect(2 * i + c0 - k as i64, n)];
        }
        lo.push(acc);
        let mut acc = 0.0;
        for (k, &h) in b.h1.iter().enumerate() {
            acc += h * x[wreflect(2 * i + 1 + c1 - k as i64, n)];
        }
        hi.push(acc);
    }
    (lo, hi)
}

/// Inverse of [`dwt1`].
fn idwt1(lo: &[f64], hi: &[f64], b: &Bank, haar: bool) -> Vec<f64> {
    let n = lo.len() + hi.len();
    if haar {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut x = Vec::with_capacity(n);
        for i in 0..lo.len() {
            x.push((lo[i] + hi[i]) * s);
            x.push((lo[i] - hi[i]) * s);
        }
        return x;
    }
    let c0 = (b.g0.len() / 2) as i64;
    let c1 = (b.g1.len() / 2) as i64;
    let mut x = vec![0.0; n];
    for (t, slot) in x.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &g) in b.g0.iter().enumerate() {
            let p = wreflect(t as i64 + c0 - k as i64, n);
            if p % 2 == 0 {
                acc += g * lo[p / 2];
            }
        }
        for (k, &g) in b.g1.iter().enumerate() {
            let p = wreflect(t as i64 + c1 - k as i64, n);
            if p % 2 == 1 {
                acc += g * hi[(p - 1) / 2];
            }
        }
        *slot = acc;
    }
    x
}

fn analyze_level(x: &Mat, b: &Bank, haar: bool) -> (Mat, DetailSet) {
    // rows first (horizontal axis), then columns
    let half_w = x.cols / 2;
    let mut loc = Mat::zeros(x.rows, half_w);
    let mut hic = Mat::zeros(x.rows, half_w);
    for r in 0..x.rows {
        let (lo, hi) = dwt1(x.row(r), b, haar);
        loc.row_mut(r).copy_from_slice(&lo);
        hic.row_mut(r).copy_from_slice(&hi);
    }
    let half_h = x.rows / 2;
    let mut ll = Mat::zeros(half_h, half_w);
    let mut dv = Mat::zeros(half_h, half_w);
    let mut dh = Mat::zeros(half_h, half_w);
    let mut dd = Mat::zeros(half_h, half_w);
    let mut col = vec![0.0; x.rows];
    for c in 0..half_w {
        for r in 0..x.rows {
            col[r] = loc.at(r, c);
        }
        let (lo, hi) = dwt1(&col, b, haar);
        for r in 0..half_h {
            ll.data[r * half_w + c] = lo[r];
            dv.data[r * half_w + c] = hi[r];
        }
        for r in 0..x.rows {
            col[r] = hic.at(r, c);
        }
        let (lo, hi) = dwt1(&col, b, haar);
        for r in 0..half_h {
            dh.data[r * half_w + c] = lo[r];
            dd.data[r * half_w + c] = hi[r];
        }
    }
    (ll, DetailSet { dh, dv, dd })
}

fn synthesize_level(ll: &Mat, set: &DetailSet, b: &Bank, haar: bool) -> Mat {
    let rows = ll.rows * 2;
    let cols = ll.cols;
    let mut loc = Mat::zeros(rows, cols);
    let mut hic = Mat::zeros(rows, cols);
    let mut lo = vec![0.0; ll.rows];
    let mut hi = vec![0.0; ll.rows];
    for c in 0..cols {
        for r in 0..ll.rows {
            lo[r] = ll.at(r, c);
            hi[r] = set.dv.at(r, c);
        }
        let x = idwt1(&lo, &hi, b, haar);
        for r in 0..rows {
            loc.data[r * cols + c] = x[r];
        }
        for r in 0..ll.rows {
            lo[r] = set.dh.at(r, c);
            hi[r] = set.dd.at(r, c);
        }
        let x = idwt1(&lo, &hi, b, haar);
        for r in 0..rows {
            hic.data[r * cols + c] = x[r];
        }
    }
    let out_cols = cols * 2;
    let mut out = Mat::zeros(rows, out_cols);
    for r in 0..rows {
        let x = idwt1(loc.row(r), hic.row(r), b, haar);
        out.row_mut(r).copy_from_slice(&x);
    }
    out
}

/// Forward multi-level DWT.
pub fn dwt2_forward(img: &GrayImage, levels: usize, filter: DwtFilter) -> Result<DwtPyramid> {
    if levels == 0 {
        return Err(Error::Geometry("levels must be >= 1".into()));
    }
    if img.height().min(img.width()) < (1usize << levels) {
        return Err(Error::Geometry(format!(
            "image {}x{} too small for {} level(s)",
            img.height(),
            img.width(),
            levels
        )));
    }
    let b = bank(filter);
    let haar = filter == DwtFilter::Haar;
    let mut ll = Mat::from_vec(img.height(), img.width(), img.pixels().to_vec());
    let mut details = Vec::with_capacity(levels);
    let mut crops = Vec::with_capacity(levels);
    for _ in 0..levels {
        crops.push((ll.rows, ll.cols));
        if ll.rows % 2 == 1 {
            ll = ll.extend_bottom();
        }
        if ll.cols % 2 == 1 {
            ll = ll.extend_right();
        }
        let (next, set) = analyze_level(&ll, &b, haar);
        details.push(set);
        ll = next;
    }
    Ok(DwtPyramid {
        levels,
        filter,
        orig: (img.height(), img.width()),
        approx: ll,
        details,
        crops,
    })
}

/// Inverse multi-level DWT.
pub fn dwt2_inverse(pyr: &DwtPyramid) -> Result<GrayImage> {
    let b = bank(pyr.filter);
    let haar = pyr.filter == DwtFilter::Haar;
    let mut ll = pyr.approx.clone();
    for level in (0..pyr.levels).rev() {
        let set = &pyr.details[level];
        if (set.dh.rows, set.dh.cols) != (ll.rows, ll.cols) {
            return Err(Error::Geometry(format!(
                "malformed pyramid: detail dims {}x{} vs approx {}x{}",
                set.dh.rows, set.dh.cols, ll.rows, ll.cols
            )));
        }
        let mut rec = synthesize_level(&ll, set, &b, haar);
        let (want_r, want_c) = pyr.crops[level];
        if rec.rows != want_r || rec.cols != want_c {
            let mut data = Vec::with_capacity(want_r * want_c);
            for r in 0..want_r {
                data.extend_from_slice(&rec.row(r)[..want_c]);
            }
            rec = Mat::from_vec(want_r, want_c, data);
        }
        ll = rec;
    }
    let pixels = ll.data.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    GrayImage::from_pixels(pyr.orig.0, pyr.orig.1, pixels)
}
