//! Per-image feature vectors and dataset assembly.
//!
//! A feature vector concatenates, for every decomposition level and every
//! magnitude subimage (lowpass plus six orientations), the four texture
//! families computed on the top and bottom half of the subimage. Clinical
//! fields ride along separately: they are never candidates for feature
//! ranking and are appended to the classifier design after selection.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dtcwt::{dtcwt_forward, magnitude_subimages};
use crate::error::{Error, Result};
use crate::imaging::{load_image, normalize_size, remove_artifacts, split_halves, GrayImage, RoiRect};
use crate::texture::{
    glcm_compute, glcm_features, glcm_offset_tag, glrlm_compute, glrlm_features,
    lbp_riu2_histogram, quantize8, stat_features_mode, EntropyMode, GlrlmDirection,
    GLCM_FEATURE_NAMES, GLCM_OFFSETS, GLRLM_FEATURE_NAMES, STAT_FEATURE_NAMES,
};

/// The six lung conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Normal,
    Cld,
    Con,
    Ptx,
    Rds,
    Ttn,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 6] = [
        ClassLabel::Normal,
        ClassLabel::Cld,
        ClassLabel::Con,
        ClassLabel::Ptx,
        ClassLabel::Rds,
        ClassLabel::Ttn,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClassLabel::Normal => "Normal",
            ClassLabel::Cld => "CLD",
            ClassLabel::Con => "CON",
            ClassLabel::Ptx => "PTX",
            ClassLabel::Rds => "RDS",
            ClassLabel::Ttn => "TTN",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassLabel::ALL
            .iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::Manifest(format!("unknown label {s:?}")))
    }
}

/// Gestational age, corrected gestational age at scan, and days of life.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClinicalFeatures {
    pub ga_weeks: f64,
    pub cgats_weeks: f64,
    pub dol_days: f64,
}

pub const CLINICAL_FEATURE_NAMES: [&str; 3] = ["ga_weeks", "cgats_weeks", "dol_days"];

impl ClinicalFeatures {
    pub fn new(ga_weeks: f64, cgats_weeks: f64, dol_days: f64) -> Result<Self> {
        for (name, v) in [
            ("ga_weeks", ga_weeks),
            ("cgats_weeks", cgats_weeks),
            ("dol_days", dol_days),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Manifest(format!(
                    "clinical field {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(ClinicalFeatures {
            ga_weeks,
            cgats_weeks,
            dol_days,
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.ga_weeks, self.cgats_weeks, self.dol_days]
    }
}

/// Named, ordered real-valued features for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// Extraction configuration: decomposition depth plus family toggles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    pub levels: usize,
    pub include_lowpass: bool,
    pub stat: bool,
    pub glcm: bool,
    pub glrlm: bool,
    pub lbp: bool,
    pub entropy_mode: EntropyMode,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            levels: 1,
            include_lowpass: true,
            stat: true,
            glcm: true,
            glrlm: true,
            lbp: true,
            entropy_mode: EntropyMode::Histogram256,
        }
    }
}

const BAND_TAGS: [&str; 7] = ["lp", "p15", "p45", "p75", "m75", "m45", "m15"];
const HALF_TAGS: [&str; 2] = ["top", "bot"];

impl ExtractConfig {
    fn family_width(&self) -> usize {
        let mut w = 0;
        if self.stat {
            w += STAT_FEATURE_NAMES.len();
        }
        if self.glcm {
            w += GLCM_OFFSETS.len() * GLCM_FEATURE_NAMES.len();
        }
        if self.glrlm {
            w += GlrlmDirection::ALL.len() * GLRLM_FEATURE_NAMES.len();
        }
        if self.lbp {
            w += 10;
        }
        w
    }

    fn bands(&self) -> impl Iterator<Item = (usize, &'static str)> {
        let skip = usize::from(!self.include_lowpass);
        BAND_TAGS.iter().enumerate().skip(skip).map(|(i, &t)| (i, t))
    }

    /// Number of image features produced (clinical fields excluded).
    pub fn feature_count(&self) -> usize {
        let bands = if self.include_lowpass { 7 } else { 6 };
        self.levels * bands * 2 * self.family_width()
    }

    /// The deterministic feature naming: `L{level}_{band}_{half}_{family}_{feature}`.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.feature_count());
        for level in 1..=self.levels {
            for (_, band) in self.bands() {
                for half in HALF_TAGS {
                    let prefix = format!("L{level}_{band}_{half}");
                    if self.stat {
                        for f in STAT_FEATURE_NAMES {
                            names.push(format!("{prefix}_stat_{f}"));
                        }
                    }
                    if self.glcm {
                        for off in GLCM_OFFSETS {
                            for f in GLCM_FEATURE_NAMES {
                                names.push(format!("{prefix}_glcm_{}_{f}", glcm_offset_tag(off)));
                            }
                        }
                    }
                    if self.glrlm {
                        for dir in GlrlmDirection::ALL {
                            for f in GLRLM_FEATURE_NAMES {
                                names.push(format!("{prefix}_glrlm_{}_{f}", dir.label()));
                            }
                        }
                    }
                    if self.lbp {
                        for b in 0..10 {
                            names.push(format!("{prefix}_lbp_b{b}"));
                        }
                    }
                }
            }
        }
        names
    }
}

/// Extracts the full per-image feature vector.
pub fn extract_features(img: &GrayImage, config: &ExtractConfig) -> Result<FeatureVector> {
    let pyr = dtcwt_forward(img, config.levels)?;
    let mut values = Vec::with_capacity(config.feature_count());
    for level in 1..=config.levels {
        let subimages = magnitude_subimages(&pyr, level)?;
        for (band_idx, _) in config.bands() {
            let (top, bot) = split_halves(&subimages[band_idx])?;
            for half in [&top, &bot] {
                push_half_features(half, config, &mut values)?;
            }
        }
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Feature(format!(
            "non-finite feature value {bad} produced"
        )));
    }
    Ok(FeatureVector {
        names: config.feature_names(),
        values,
    })
}

fn push_half_features(half: &GrayImage, config: &ExtractConfig, out: &mut Vec<f64>) -> Result<()> {
    if config.stat {
        out.extend(stat_features_mode(half, config.entropy_mode));
    }
    let quantized = (config.glcm || config.glrlm).then(|| quantize8(half));
    if config.glcm {
        let q = quantized.as_ref().unwrap();
        for off in GLCM_OFFSETS {
            let g = glcm_compute(q, off)?;
            out.extend(glcm_features(&g)?);
        }
    }
    if config.glrlm {
        let q = quantized.as_ref().unwrap();
        for dir in GlrlmDirection::ALL {
            let r = glrlm_compute(q, dir);
            out.extend(glrlm_features(&r)?);
        }
    }
    if config.lbp {
        let h = lbp_riu2_histogram(half)?;
        out.extend(h.bins.iter().map(|&b| b as f64));
    }
    Ok(())
}

/// One dataset row: image features plus clinical fields and identity.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub values: Vec<f64>,
    pub clinical: ClinicalFeatures,
    pub label: ClassLabel,
    pub subject_id: String,
    pub video_id: String,
}

/// The assembled dataset: shared feature naming plus records.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    feature_names: Vec<String>,
    records: Vec<SampleRecord>,
}

impl FeatureTable {
    pub fn new(feature_names: Vec<String>, records: Vec<SampleRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Manifest("no records".into()));
        }
        for (i, r) in records.iter().enumerate() {
            if r.values.len() != feature_names.len() {
                return Err(Error::Manifest(format!(
                    "record {i} has {} features, expected {}",
                    r.values.len(),
                    feature_names.len()
                )));
            }
            if r.subject_id.is_empty() {
                return Err(Error::Manifest(format!("record {i} has empty subject_id")));
            }
        }
        Ok(FeatureTable {
            feature_names,
            records,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct labels present, in canonical class order.
    pub fn classes_present(&self) -> Vec<ClassLabel> {
        ClassLabel::ALL
            .iter()
            .filter(|&&c| self.records.iter().any(|r| r.label == c))
            .copied()
            .collect()
    }

    /// Row subset preserving order; indices must be valid.
    pub fn subset(&self, indices: &[usize]) -> FeatureTable {
        FeatureTable {
            feature_names: self.feature_names.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }
}

/// One parsed manifest row.
#[derive(Debug, Clone)]
pub struct ManifestRow {
    pub image_path: PathBuf,
    pub subject_id: String,
    pub video_id: String,
    pub label: ClassLabel,
    pub clinical: ClinicalFeatures,
    pub roi: Option<RoiRect>,
}

pub const MANIFEST_HEADER: [&str; 7] = [
    "image_path",
    "subject_id",
    "video_id",
    "label",
    "ga_weeks",
    "cgats_weeks",
    "dol_days",
];
pub const MANIFEST_ROI_HEADER: [&str; 4] = ["roi_top", "roi_left", "roi_bottom", "roi_right"];

/// Parses the dataset manifest. Relative image paths resolve against the
/// manifest's directory. All malformed rows are reported together.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?
        .clone();
    let base: Vec<&str> = headers.iter().take(7).collect();
    if base != MANIFEST_HEADER {
        return Err(Error::Manifest(format!(
            "{}: expected header starting with {:?}",
            path.display(),
            MANIFEST_HEADER.join(",")
        )));
    }
    let has_roi_columns = headers.len() >= 11
        && headers.iter().skip(7).take(4).collect::<Vec<_>>() == MANIFEST_ROI_HEADER;
    if headers.len() != 7 && !has_roi_columns {
        return Err(Error::Manifest(format!(
            "{}: trailing columns must be {:?}",
            path.display(),
            MANIFEST_ROI_HEADER.join(",")
        )));
    }

    let dir = path.parent().unwrap_or(Path::new("."));
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let rownum = idx + 1;
        match record {
            Err(e) => failures.push(format!("row {rownum}: {e}")),
            Ok(rec) => match parse_row(&rec, has_roi_columns, dir) {
                Ok(row) => rows.push(row),
                Err(e) => failures.push(format!("row {rownum}: {e}")),
            },
        }
    }
    if !failures.is_empty() {
        return Err(Error::ManifestRows(failures.len(), failures.join("\n")));
    }
    if rows.is_empty() {
        return Err(Error::Manifest("no records".into()));
    }
    Ok(rows)
}

fn parse_row(rec: &csv::StringRecord, has_roi: bool, dir: &Path) -> Result<ManifestRow> {
    let field = |i: usize, name: &str| -> Result<&str> {
        rec.get(i)
            .ok_or_else(|| Error::Manifest(format!("missing field {name}")))
    };
    let numeric = |i: usize, name: &str| -> Result<f64> {
        let s = field(i, name)?;
        s.parse::<f64>()
            .map_err(|_| Error::Manifest(format!("field {name} is not a number: {s:?}")))
    };
    let image_path = {
        let raw = field(0, "image_path")?;
        if raw.is_empty() {
            return Err(Error::Manifest("empty image_path".into()));
        }
        let p = PathBuf::from(raw);
        if p.is_relative() {
            dir.join(p)
        } else {
            p
        }
    };
    let subject_id = field(1, "subject_id")?.to_string();
    if subject_id.is_empty() {
        return Err(Error::Manifest("empty subject_id".into()));
    }
    let video_id = field(2, "video_id")?.to_string();
    let label: ClassLabel = field(3, "label")?.parse()?;
    let clinical = ClinicalFeatures::new(
        numeric(4, "ga_weeks")?,
        numeric(5, "cgats_weeks")?,
        numeric(6, "dol_days")?,
    )?;
    let roi = if has_roi {
        let cells: Vec<&str> = (7..11).map(|i| rec.get(i).unwrap_or("")).collect();
        if cells.iter().all(|c| c.is_empty()) {
            None
        } else if cells.iter().any(|c| c.is_empty()) {
            return Err(Error::Manifest(
                "roi columns must be all set or all empty".into(),
            ));
        } else {
            let parse = |s: &str, name: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| Error::Manifest(format!("roi field {name} invalid: {s:?}")))
            };
            Some(RoiRect::new(
                parse(cells[0], "roi_top")?,
                parse(cells[1], "roi_left")?,
                parse(cells[2], "roi_bottom")?,
                parse(cells[3], "roi_right")?,
            )?)
        }
    } else {
        None
    };
    Ok(ManifestRow {
        image_path,
        subject_id,
        video_id,
        label,
        clinical,
        roi,
    })
}

/// Full preprocessing for one image: optional artifact removal inside the
/// ROI, then size normalization to 500x400.
pub fn preprocess(img: &GrayImage, roi: Option<RoiRect>) -> Result<GrayImage> {
    let cleaned = match roi {
        Some(r) => remove_artifacts(img, r)?,
        None => img.clone(),
    };
    normalize_size(&cleaned)
}

/// Loads every manifest row, preprocesses, extracts features and joins the
/// clinical fields. Row order is preserved; any failing row aborts the run
/// with a per-row diagnostic listing all failures.
pub fn build_dataset(manifest: &Path, config: &ExtractConfig) -> Result<FeatureTable> {
    let rows = read_manifest(manifest)?;
    let names = config.feature_names();
    let mut records = Vec::with_capacity(rows.len());
    let mut failures = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        match build_record(row, config) {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push(format!("row {}: {e}", idx + 1)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::ManifestRows(failures.len(), failures.join("\n")));
    }
    FeatureTable::new(names, records)
}

fn build_record(row: &ManifestRow, config: &ExtractConfig) -> Result<SampleRecord> {
    let img = load_image(&row.image_path)?;
    let prepared = preprocess(&img, row.roi)?;
    let features = extract_features(&prepared, config)?;
    Ok(SampleRecord {
        values: features.values,
        clinical: row.clinical,
        label: row.label,
        subject_id: row.subject_id.clone(),
        video_id: row.video_id.clone(),
    })
}

/// Writes the feature table as CSV: feature names, clinical fields, label,
/// subject_id. Floats use the shortest round-trip formatting.
pub fn write_feature_csv(table: &FeatureTable, path: &Path) -> Result<()> {
    let mut out = String::new();
    for name in table.feature_names() {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("ga_weeks,cgats_weeks,dol_days,label,subject_id\n");
    for rec in table.records() {
        for v in &rec.values {
            out.push_str(&format!("{v:?},"));
        }
        out.push_str(&format!(
            "{:?},{:?},{:?},{},{}\n",
            rec.clinical.ga_weeks,
            rec.clinical.cgats_weeks,
            rec.clinical.dol_days,
            rec.label,
            rec.subject_id
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a feature CSV produced by [`write_feature_csv`].
pub fn read_feature_csv(path: &Path) -> Result<FeatureTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?
        .clone();
    let n = headers.len();
    if n < 6 {
        return Err(Error::Manifest(format!(
            "{}: too few columns for a feature csv",
            path.display()
        )));
    }
    let tail: Vec<&str> = headers.iter().skip(n - 5).collect();
    if tail != ["ga_weeks", "cgats_weeks", "dol_days", "label", "subject_id"] {
        return Err(Error::Manifest(format!(
            "{}: expected trailing columns ga_weeks,cgats_weeks,dol_days,label,subject_id",
            path.display()
        )));
    }
    let feature_names: Vec<String> = headers.iter().take(n - 5).map(String::from).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let rownum = idx + 1;
        let parse = |rec: &csv::StringRecord| -> Result<SampleRecord> {
            if rec.len() != n {
                return Err(Error::Manifest(format!(
                    "expected {n} fields, got {}",
                    rec.len()
                )));
            }
            let mut values = Vec::with_capacity(n - 5);
            for i in 0..n - 5 {
                let s = rec.get(i).unwrap();
                values.push(s.parse::<f64>().map_err(|_| {
                    Error::Manifest(format!("feature column {i} is not a number: {s:?}"))
                })?);
            }
            let num = |i: usize| -> Result<f64> {
                let s = rec.get(i).unwrap();
                s.parse::<f64>()
                    .map_err(|_| Error::Manifest(format!("bad numeric field {s:?}")))
            };
            Ok(SampleRecord {
                values,
                clinical: ClinicalFeatures::new(num(n - 5)?, num(n - 4)?, num(n - 3)?)?,
                label: rec.get(n - 2).unwrap().parse()?,
                subject_id: rec.get(n - 1).unwrap().to_string(),
                video_id: String::new(),
            })
        };
        match record {
            Err(e) => failures.push(format!("row {rownum}: {e}")),
            Ok(rec) => match parse(&rec) {
                Ok(r) => records.push(r),
                Err(e) => failures.push(format!("row {rownum}: {e}")),
            },
        }
    }
    if !failures.is_empty() {
        return Err(Error::ManifestRows(failures.len(), failures.join("\n")));
    }
    FeatureTable::new(feature_names, records)
}
