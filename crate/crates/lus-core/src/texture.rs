//! The four texture/statistical feature families computed on one image
//! region: global statistics, gray-level co-occurrence (GLCM), gray-level
//! run-length (GLRLM), and rotation-invariant uniform local binary patterns.

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Order of the values returned by [`stat_features`].
pub const STAT_FEATURE_NAMES: [&str; 5] = ["mean", "sd", "skew", "kurt", "entropy"];

/// How the statistical entropy term is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyMode {
    /// Shannon entropy of the 256-bin intensity histogram probabilities.
    #[default]
    Histogram256,
    /// The literal pixel-wise sum `-Σ I·log2(I)` with `0·log2(0) = 0`.
    PixelwiseLiteral,
}

/// Mean, population SD, skewness, kurtosis (excess, 0 when SD = 0) and
/// entropy of all pixel intensities.
pub fn stat_features(img: &GrayImage) -> [f64; 5] {
    stat_features_mode(img, EntropyMode::default())
}

pub fn stat_features_mode(img: &GrayImage, entropy: EntropyMode) -> [f64; 5] {
    let n = img.pixels().len() as f64;
    let mean = img.pixels().iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &p in img.pixels() {
        let d = p - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = (m2 / n).sqrt();
    let (skew, kurt) = if sd == 0.0 {
        (0.0, 0.0)
    } else {
        (m3 / (n * sd.powi(3)), m4 / (n * sd.powi(4)) - 3.0)
    };
    let ent = match entropy {
        EntropyMode::Histogram256 => {
            let mut hist = [0u64; 256];
            for &p in img.pixels() {
                hist[((p * 256.0).floor() as usize).min(255)] += 1;
            }
            -hist
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let q = c as f64 / n;
                    q * q.log2()
                })
                .sum::<f64>()
        }
        EntropyMode::PixelwiseLiteral => -img
            .pixels()
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>(),
    };
    // -0.0 from an empty sum normalizes to 0.0
    [mean, sd, skew, kurt, ent + 0.0]
}

/// An image quantized to the 8 gray levels used by the co-occurrence and
/// run-length analyses.
#[derive(Debug, Clone)]
pub struct QuantizedImage {
    height: usize,
    width: usize,
    levels: Vec<u8>,
}

impl QuantizedImage {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Levels are 1..=8.
    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> u8 {
        self.levels[r * self.width + c]
    }

    #[cfg(test)]
    pub(crate) fn from_levels(height: usize, width: usize, levels: Vec<u8>) -> Self {
        assert_eq!(levels.len(), height * width);
        assert!(levels.iter().all(|&l| (1..=8).contains(&l)));
        QuantizedImage {
            height,
            width,
            levels,
        }
    }
}

/// Uniform 8-level quantization of `[0,1]`: `level = min(floor(p*8)+1, 8)`.
pub fn quantize8(img: &GrayImage) -> QuantizedImage {
    QuantizedImage {
        height: img.height(),
        width: img.width(),
        levels: img
            .pixels()
            .iter()
            .map(|&p| ((p * 8.0).floor() as u8 + 1).min(8))
            .collect(),
    }
}

/// The six co-occurrence offsets `(row-delta, col-delta)`.
pub const GLCM_OFFSETS: [(usize, usize); 6] = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 1), (2, 2)];

/// Short stable tag for an offset, used in feature names.
pub fn glcm_offset_tag(offset: (usize, usize)) -> String {
    format!("r{}c{}", offset.0, offset.1)
}

/// Gray-level co-occurrence matrix for one directed offset.
#[derive(Debug, Clone)]
pub struct Glcm {
    /// Pair counts indexed by `[level_i - 1][level_j - 1]`.
    pub matrix: [[f64; 8]; 8],
    pub offset: (usize, usize),
    /// Mean quantized level of the source region.
    pub region_mean: f64,
    /// Population variance of the quantized levels of the source region.
    pub region_var: f64,
}

/// Counts pixel pairs `(p at (r,c), p at (r+dr, c+dc))` in a single
/// direction (non-symmetric).
pub fn glcm_compute(q: &QuantizedImage, offset: (usize, usize)) -> Result<Glcm> {
    let (dr, dc) = offset;
    if dr == 0 && dc == 0 {
        return Err(Error::Feature("glcm offset cannot be (0, 0)".into()));
    }
    if q.height() <= dr || q.width() <= dc {
        return Err(Error::Feature(format!(
            "image {}x{} smaller than glcm offset span ({dr}, {dc})",
            q.height(),
            q.width()
        )));
    }
    let mut matrix = [[0.0; 8]; 8];
    for r in 0..q.height() - dr {
        for c in 0..q.width() - dc {
            let i = q.at(r, c) as usize - 1;
            let j = q.at(r + dr, c + dc) as usize - 1;
            matrix[i][j] += 1.0;
        }
    }
    let n = (q.height() * q.width()) as f64;
    let mean = q.levels().iter().map(|&l| l as f64).sum::<f64>() / n;
    let var = q
        .levels()
        .iter()
        .map(|&l| {
            let d = l as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    Ok(Glcm {
        matrix,
        offset,
        region_mean: mean,
        region_var: var,
    })
}

/// Order of the values returned by [`glcm_features`].
pub const GLCM_FEATURE_NAMES: [&str; 5] =
    ["contrast", "correlation", "energy", "homogeneity", "entropy"];

/// Contrast, correlation, energy, homogeneity and entropy of the
/// count-normalized matrix. Correlation uses the region's quantized mean
/// and variance and is 0 when the variance is 0.
pub fn glcm_features(g: &Glcm) -> Result<[f64; 5]> {
    let total: f64 = g.matrix.iter().flatten().sum();
    if total <= 0.0 {
        return Err(Error::Feature("glcm has no pairs".into()));
    }
    let mut contrast = 0.0;
    let mut correlation = 0.0;
    let mut energy = 0.0;
    let mut homogeneity = 0.0;
    let mut entropy = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            let p = g.matrix[i][j] / total;
            if p == 0.0 {
                continue;
            }
            let li = (i + 1) as f64;
            let lj = (j + 1) as f64;
            let diff = li - lj;
            contrast += diff * diff * p;
            if g.region_var > 0.0 {
                correlation += (li - g.region_mean) * (lj - g.region_mean) * p / g.region_var;
            }
            energy += p * p;
            homogeneity += p / (1.0 + diff * diff);
            entropy -= p * p.log2();
        }
    }
    Ok([contrast, correlation, energy, homogeneity, entropy + 0.0])
}

/// Run directions for the run-length matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlrlmDirection {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl GlrlmDirection {
    pub const ALL: [GlrlmDirection; 4] = [
        GlrlmDirection::Deg0,
        GlrlmDirection::Deg45,
        GlrlmDirection::Deg90,
        GlrlmDirection::Deg135,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GlrlmDirection::Deg0 => "d0",
            GlrlmDirection::Deg45 => "d45",
            GlrlmDirection::Deg90 => "d90",
            GlrlmDirection::Deg135 => "d135",
        }
    }
}

/// Gray-level run-length matrix for one direction.
#[derive(Debug, Clone)]
pub struct Glrlm {
    /// `counts[level - 1][run_length - 1]`, trimmed to the longest observed
    /// run.
    pub counts: Vec<[f64; 8]>,
    pub direction: GlrlmDirection,
    /// Total pixels in the source image (the `N` of the run percentage).
    pub n_pixels: usize,
}

impl Glrlm {
    pub fn max_run(&self) -> usize {
        self.counts.len()
    }

    /// Count of runs of `level` (1..=8) with length `run` (1-based).
    pub fn count(&self, level: usize, run: usize) -> f64 {
        if run == 0 || run > self.counts.len() {
            return 0.0;
        }
        self.counts[run - 1][level - 1]
    }

    pub fn total_runs(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }
}

/// Counts maximal same-level runs along every traversal line of the
/// direction.
pub fn glrlm_compute(q: &QuantizedImage, direction: GlrlmDirection) -> Glrlm {
    let (h, w) = (q.height() as i64, q.width() as i64);
    // start points and step per traversal line
    let mut lines: Vec<((i64, i64), (i64, i64))> = Vec::new();
    match direction {
        GlrlmDirection::Deg0 => {
            for r in 0..h {
                lines.push(((r, 0), (0, 1)));
            }
        }
        GlrlmDirection::Deg90 => {
            for c in 0..w {
                lines.push(((0, c), (1, 0)));
            }
        }
        GlrlmDirection::Deg45 => {
            // up-right runs; traverse each anti-diagonal from its bottom-left end
            for r in 0..h {
                lines.push(((r, 0), (-1, 1)));
            }
            for c in 1..w {
                lines.push(((h - 1, c), (-1, 1)));
            }
        }
        GlrlmDirection::Deg135 => {
            // down-right runs; traverse each main diagonal from its top-left end
            for r in 0..h {
                lines.push(((r, 0), (1, 1)));
            }
            for c in 1..w {
                lines.push(((0, c), (1, 1)));
            }
        }
    }

    let mut by_run: Vec<[f64; 8]> = Vec::new();
    let mut record = |level: u8, run: usize| {
        while by_run.len() < run {
            by_run.push([0.0; 8]);
        }
        by_run[run - 1][level as usize - 1] += 1.0;
    };
    for ((mut r, mut c), (dr, dc)) in lines {
        let mut current: Option<(u8, usize)> = None;
        while r >= 0 && r < h && c >= 0 && c < w {
            let level = q.at(r as usize, c as usize);
            current = match current {
                Some((l, run)) if l == level => Some((l, run + 1)),
                Some((l, run)) => {
                    record(l, run);
                    Some((level, 1))
                }
                None => Some((level, 1)),
            };
            r += dr;
            c += dc;
        }
        if let Some((l, run)) = current {
            record(l, run);
        }
    }
    Glrlm {
        counts: by_run,
        direction,
        n_pixels: q.height() * q.width(),
    }
}

/// Order of the values returned by [`glrlm_features`].
pub const GLRLM_FEATURE_NAMES: [&str; 11] = [
    "lre", "sre", "gln", "rln", "rp", "lgre", "hgre", "srlge", "srhge", "lrlge", "lrhge",
];

/// The eleven run-length ratios, computed on raw counts.
pub fn glrlm_features(r: &Glrlm) -> Result<[f64; 11]> {
    let total = r.total_runs();
    if total <= 0.0 {
        return Err(Error::Feature("glrlm has no runs".into()));
    }
    let mut lre = 0.0; // long run emphasis: j^2 weight
    let mut sre = 0.0; // short run emphasis: 1/j^2
    let mut lgre = 0.0;
    let mut hgre = 0.0;
    let mut srlge = 0.0;
    let mut srhge = 0.0;
    let mut lrlge = 0.0;
    let mut lrhge = 0.0;
    let mut by_level = [0.0f64; 8];
    let mut by_run = vec![0.0f64; r.max_run()];
    for (run_idx, row) in r.counts.iter().enumerate() {
        let j2 = ((run_idx + 1) * (run_idx + 1)) as f64;
        for (level_idx, &count) in row.iter().enumerate() {
            if count == 0.0 {
                continue;
            }
            let i2 = ((level_idx + 1) * (level_idx + 1)) as f64;
            lre += j2 * count;
            sre += count / j2;
            lgre += count / i2;
            hgre += i2 * count;
            srlge += count / (i2 * j2);
            srhge += i2 * count / j2;
            lrlge += j2 * count / i2;
            lrhge += i2 * j2 * count;
            by_level[level_idx] += count;
            by_run[run_idx] += count;
        }
    }
    let gln = by_level.iter().map(|&v| v * v).sum::<f64>() / total;
    let rln = by_run.iter().map(|&v| v * v).sum::<f64>() / total;
    let rp = total / r.n_pixels as f64;
    Ok([
        lre / total,
        sre / total,
        gln,
        rln,
        rp,
        lgre / total,
        hgre / total,
        srlge / total,
        srhge / total,
        lrlge / total,
        lrhge / total,
    ])
}

/// Ten-bin rotation-invariant uniform LBP histogram: bins 0..=8 count
/// uniform patterns by their number of ones, bin 9 collects all
/// non-uniform patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbpHistogram {
    pub bins: [u64; 10],
}

impl LbpHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// Neighbor offsets in fixed circular order: east, then counter-clockwise.
const LBP_NEIGHBORS: [(i64, i64); 8] = [
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Computes the riu2 LBP histogram over all interior pixels. Ties
/// (`neighbor == center`) threshold to 1.
pub fn lbp_riu2_histogram(img: &GrayImage) -> Result<LbpHistogram> {
    if img.height() < 3 || img.width() < 3 {
        return Err(Error::Feature(format!(
            "lbp needs at least 3x3, got {}x{}",
            img.height(),
            img.width()
        )));
    }
    let mut bins = [0u64; 10];
    for r in 1..img.height() - 1 {
        for c in 1..img.width() - 1 {
            let center = img.get(r, c);
            let mut pattern = 0u8;
            for (bit, (dr, dc)) in LBP_NEIGHBORS.iter().enumerate() {
                let v = img.get((r as i64 + dr) as usize, (c as i64 + dc) as usize);
                if v >= center {
                    pattern |= 1 << bit;
                }
            }
            bins[riu2_bin(pattern)] += 1;
        }
    }
    Ok(LbpHistogram { bins })
}

/// Maps an 8-bit pattern to its riu2 bin.
fn riu2_bin(pattern: u8) -> usize {
    let transitions = (pattern ^ pattern.rotate_left(1)).count_ones();
    if transitions <= 2 {
        pattern.count_ones() as usize
    } else {
        9
    }
}
