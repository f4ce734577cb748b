//! Command implementations behind the `lus` binary: feature extraction to
//! CSV, cross-validation runs with confusion reports, feature-count sweeps,
//! and synthetic dataset generation.

pub mod synth;

use std::collections::HashMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use lus_core::dtcwt::{dtcwt_forward, magnitude_subimages};
use lus_core::error::{Error, Result};
use lus_core::eval::{loo_cv, loso_cv, report, sweep_feature_count, CvMode};
use lus_core::imaging::write_pgm;
use lus_core::learn::PriorMode;
use lus_core::pipeline::{
    build_dataset, preprocess, read_feature_csv, read_manifest, write_feature_csv, ExtractConfig,
    FeatureTable,
};
use lus_core::texture::EntropyMode;

/// `key=value` configuration file; flags override file values, file values
/// override defaults. Lines starting with `#` are comments.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Manifest(format!(
                    "{}: line {} is not key=value: {line:?}",
                    path.display(),
                    i + 1
                ))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Manifest(format!("config key {key} has invalid value {raw:?}"))
            }),
        }
    }
}

/// Resolves the extraction configuration from optional flag values and the
/// config file.
#[allow(clippy::too_many_arguments)]
pub fn resolve_extract_config(
    file: &FileConfig,
    levels: Option<usize>,
    no_lowpass: bool,
    no_stat: bool,
    no_glcm: bool,
    no_glrlm: bool,
    no_lbp: bool,
    entropy: Option<String>,
) -> Result<ExtractConfig> {
    let mut config = ExtractConfig::default();
    if let Some(v) = file.parse::<usize>("levels")? {
        config.levels = v;
    }
    if let Some(v) = file.parse::<bool>("lowpass")? {
        config.include_lowpass = v;
    }
    if let Some(v) = file.parse::<bool>("stat")? {
        config.stat = v;
    }
    if let Some(v) = file.parse::<bool>("glcm")? {
        config.glcm = v;
    }
    if let Some(v) = file.parse::<bool>("glrlm")? {
        config.glrlm = v;
    }
    if let Some(v) = file.parse::<bool>("lbp")? {
        config.lbp = v;
    }
    if let Some(raw) = file.get("entropy") {
        config.entropy_mode = parse_entropy(raw)?;
    }
    if let Some(v) = levels {
        config.levels = v;
    }
    if no_lowpass {
        config.include_lowpass = false;
    }
    if no_stat {
        config.stat = false;
    }
    if no_glcm {
        config.glcm = false;
    }
    if no_glrlm {
        config.glrlm = false;
    }
    if no_lbp {
        config.lbp = false;
    }
    if let Some(raw) = entropy {
        config.entropy_mode = parse_entropy(&raw)?;
    }
    if config.levels == 0 {
        return Err(Error::Manifest("levels must be >= 1".into()));
    }
    Ok(config)
}

fn parse_entropy(raw: &str) -> Result<EntropyMode> {
    match raw {
        "histogram" => Ok(EntropyMode::Histogram256),
        "pixelwise" => Ok(EntropyMode::PixelwiseLiteral),
        other => Err(Error::Manifest(format!(
            "entropy must be 'histogram' or 'pixelwise', got {other:?}"
        ))),
    }
}

/// Extracts features for every manifest row and writes the feature CSV.
/// With `dump_dir` set, also writes every magnitude subimage as PGM for
/// visual inspection.
pub fn cmd_extract(
    manifest: &Path,
    out_csv: &Path,
    config: &ExtractConfig,
    dump_dir: Option<&Path>,
) -> Result<String> {
    let table = build_dataset(manifest, config)?;
    write_feature_csv(&table, out_csv)?;
    if let Some(dir) = dump_dir {
        dump_subimages(manifest, config, dir)?;
    }
    Ok(format!(
        "extracted {} rows x {} features -> {}",
        table.len(),
        table.feature_names().len(),
        out_csv.display()
    ))
}

fn dump_subimages(manifest: &Path, config: &ExtractConfig, dir: &Path) -> Result<()> {
    const BAND_TAGS: [&str; 7] = ["lp", "p15", "p45", "p75", "m75", "m45", "m15"];
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for row in read_manifest(manifest)? {
        let img = lus_core::imaging::load_image(&row.image_path)?;
        let prepared = preprocess(&img, row.roi)?;
        let pyr = dtcwt_forward(&prepared, config.levels)?;
        let stem = row
            .image_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".into());
        for level in 1..=config.levels {
            for (band, img) in BAND_TAGS.iter().zip(magnitude_subimages(&pyr, level)?) {
                let path = dir.join(format!("{stem}_L{level}_{band}.pgm"));
                write_pgm(&img, &path)?;
            }
        }
    }
    Ok(())
}

/// Loads either a manifest (building the dataset) or a previously exported
/// feature CSV, keyed on the header.
pub fn load_table_auto(input: &Path, config: &ExtractConfig) -> Result<FeatureTable> {
    let file = std::fs::File::open(input).map_err(|e| Error::io(input, e))?;
    let mut first_line = String::new();
    std::io::BufReader::new(file)
        .read_line(&mut first_line)
        .map_err(|e| Error::io(input, e))?;
    if first_line.trim_end().starts_with("image_path,") {
        build_dataset(input, config)
    } else {
        read_feature_csv(input)
    }
}

/// Outcome of a cross-validation run.
pub struct RunOutcome {
    pub accuracy: f64,
    pub report_text: String,
    pub csv_path: PathBuf,
    pub txt_path: PathBuf,
}

/// Runs one cross-validation experiment and writes the confusion reports
/// to `<out_base>.csv` and `<out_base>.txt`.
pub fn cmd_run(
    input: &Path,
    cv: CvMode,
    k: usize,
    priors: PriorMode,
    config: &ExtractConfig,
    out_base: &Path,
) -> Result<RunOutcome> {
    let table = load_table_auto(input, config)?;
    let (confusion, accuracy) = match cv {
        CvMode::Loo => loo_cv(&table, k, priors)?,
        CvMode::Loso => loso_cv(&table, k, priors)?,
    };
    let report_text = report(&confusion, out_base)?;
    Ok(RunOutcome {
        accuracy,
        report_text,
        csv_path: sibling(out_base, "csv"),
        txt_path: sibling(out_base, "txt"),
    })
}

fn sibling(base: &Path, ext: &str) -> PathBuf {
    let mut p = base.to_path_buf();
    let new_ext = match p.extension() {
        Some(cur) => format!("{}.{ext}", cur.to_string_lossy()),
        None => ext.to_string(),
    };
    p.set_extension(new_ext);
    p
}

/// Outcome of a feature-count sweep.
pub struct SweepOutcome {
    pub best_k: usize,
    pub best_accuracy_percent: f64,
    pub curve_path: PathBuf,
}

/// Sweeps `k = 1..=k_max`, writes the two-column curve CSV and reports the
/// best point.
pub fn cmd_sweep(
    input: &Path,
    k_max: usize,
    cv: CvMode,
    priors: PriorMode,
    config: &ExtractConfig,
    out_csv: &Path,
) -> Result<SweepOutcome> {
    let table = load_table_auto(input, config)?;
    let curve = sweep_feature_count(&table, k_max, cv, priors)?;
    let mut text = String::from("k,accuracy_percent\n");
    for (k, acc) in &curve.points {
        text.push_str(&format!("{k},{acc:.4}\n"));
    }
    std::fs::write(out_csv, text).map_err(|e| Error::io(out_csv, e))?;
    let (best_k, best_accuracy_percent) = curve.best();
    Ok(SweepOutcome {
        best_k,
        best_accuracy_percent,
        curve_path: out_csv.to_path_buf(),
    })
}

/// Generates the synthetic dataset; returns the manifest path.
pub fn cmd_synth(spec: &synth::SynthSpec, out_dir: &Path) -> Result<PathBuf> {
    synth::generate(spec, out_dir)
}
