//! Feature ranking and the linear discriminant classifier.

pub mod gamma;

use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::{ClassLabel, FeatureTable};

/// Prior probability mode for the LDA classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriorMode {
    /// Equal prior probability for every class present.
    #[default]
    Equal,
    /// Priors proportional to class sizes in the training table.
    Proportional,
}

impl PriorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PriorMode::Equal => "equal",
            PriorMode::Proportional => "proportional",
        }
    }
}

impl std::str::FromStr for PriorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(PriorMode::Equal),
            "proportional" => Ok(PriorMode::Proportional),
            other => Err(Error::Manifest(format!(
                "priors must be 'equal' or 'proportional', got {other:?}"
            ))),
        }
    }
}

/// Chi-square ranking outcome over a candidate feature set.
#[derive(Debug, Clone)]
pub struct FeatureRanking {
    /// Candidate feature indices sorted by ascending p-value (ties broken
    /// by descending statistic, then ascending index).
    pub order: Vec<usize>,
    /// p-value per candidate, aligned with `candidates`.
    pub p_values: Vec<f64>,
    /// Chi-square statistic per candidate.
    pub statistics: Vec<f64>,
    /// The candidate indices as supplied.
    pub candidates: Vec<usize>,
}

const CHI2_BINS: usize = 10;

/// Ranks candidate features by an individual chi-square test of the
/// 10-equal-width-bin discretized feature against the class labels.
/// Constant features receive a p-value of 1 and sink to the bottom.
pub fn chi2_rank(table: &FeatureTable, candidates: &[usize]) -> Result<FeatureRanking> {
    let classes = table.classes_present();
    if classes.len() < 2 {
        return Err(Error::Evaluation(
            "chi-square ranking needs at least 2 classes".into(),
        ));
    }
    let class_of: Vec<usize> = table
        .records()
        .iter()
        .map(|r| classes.iter().position(|&c| c == r.label).unwrap())
        .collect();
    let n = table.len();

    let mut p_values = Vec::with_capacity(candidates.len());
    let mut statistics = Vec::with_capacity(candidates.len());
    for &f in candidates {
        if f >= table.feature_names().len() {
            return Err(Error::Evaluation(format!(
                "candidate feature index {f} out of range"
            )));
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for rec in table.records() {
            let v = rec.values[f];
            min = min.min(v);
            max = max.max(v);
        }
        if !(max > min) {
            statistics.push(0.0);
            p_values.push(1.0);
            continue;
        }
        let span = max - min;
        let mut counts = [[0u32; 16]; CHI2_BINS]; // class count capped below
        let c_len = classes.len().min(16);
        let mut row_totals = [0u32; CHI2_BINS];
        let mut col_totals = [0u32; 16];
        for (rec, &cls) in table.records().iter().zip(&class_of) {
            let v = rec.values[f];
            let bin = (((v - min) / span * CHI2_BINS as f64) as usize).min(CHI2_BINS - 1);
            counts[bin][cls.min(c_len - 1)] += 1;
            row_totals[bin] += 1;
            col_totals[cls] += 1;
        }
        let nonempty = row_totals.iter().filter(|&&t| t > 0).count();
        let mut stat = 0.0;
        for b in 0..CHI2_BINS {
            if row_totals[b] == 0 {
                continue;
            }
            for c in 0..classes.len() {
                let expected = row_totals[b] as f64 * col_totals[c] as f64 / n as f64;
                let observed = counts[b][c] as f64;
                stat += (observed - expected) * (observed - expected) / expected;
            }
        }
        let dof = ((nonempty - 1) * (classes.len() - 1)) as f64;
        let p = if dof > 0.0 {
            gamma::chi2_survival(dof, stat)
        } else {
            1.0
        };
        statistics.push(stat);
        p_values.push(p);
    }

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        p_values[a]
            .partial_cmp(&p_values[b])
            .unwrap()
            .then(statistics[b].partial_cmp(&statistics[a]).unwrap())
            .then(candidates[a].cmp(&candidates[b]))
    });
    Ok(FeatureRanking {
        order: order.iter().map(|&i| candidates[i]).collect(),
        p_values,
        statistics,
        candidates: candidates.to_vec(),
    })
}

/// Which columns feed the classifier design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSubset {
    /// Indices into the table's image features.
    pub feature_indices: Vec<usize>,
    /// Whether the three clinical fields are appended after the features.
    pub include_clinical: bool,
}

impl FeatureSubset {
    pub fn dim(&self) -> usize {
        self.feature_indices.len() + if self.include_clinical { 3 } else { 0 }
    }

    pub(crate) fn design_row(&self, rec: &crate::pipeline::SampleRecord) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for &i in &self.feature_indices {
            x.push(rec.values[i]);
        }
        if self.include_clinical {
            x.extend(rec.clinical.as_array());
        }
        x
    }
}

/// Trained linear discriminant model with shared (pooled) covariance.
#[derive(Debug, Clone)]
pub struct LdaModel {
    pub class_labels: Vec<ClassLabel>,
    /// Per-class feature means, one row per class.
    pub class_means: Vec<Vec<f64>>,
    /// Ridge-stabilized pooled covariance inverse, row-major `dim x dim`.
    pub pooled_cov_inverse: Vec<Vec<f64>>,
    pub log_priors: Vec<f64>,
    pub dim: usize,
}

const RIDGE_LAMBDA: f64 = 1e-6;

/// Trains the LDA classifier on the design selected by `subset`.
pub fn lda_train(
    table: &FeatureTable,
    subset: &FeatureSubset,
    priors: PriorMode,
) -> Result<LdaModel> {
    if subset.feature_indices.is_empty() && !subset.include_clinical {
        return Err(Error::Training("empty feature subset".into()));
    }
    for &i in &subset.feature_indices {
        if i >= table.feature_names().len() {
            return Err(Error::Training(format!("feature index {i} out of range")));
        }
    }
    let classes = table.classes_present();
    if classes.len() < 2 {
        return Err(Error::Training("training needs at least 2 classes".into()));
    }
    let d = subset.dim();
    let n = table.len();

    let mut counts = vec![0usize; classes.len()];
    let mut means = vec![vec![0.0; d]; classes.len()];
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(n);
    for rec in table.records() {
        let c = classes.iter().position(|&l| l == rec.label).unwrap();
        let x = subset.design_row(rec);
        counts[c] += 1;
        for (m, &v) in means[c].iter_mut().zip(&x) {
            *m += v;
        }
        rows.push((c, x));
    }
    for (c, label) in classes.iter().enumerate() {
        if counts[c] < 2 {
            return Err(Error::Training(format!(
                "class {label} has {} sample(s); at least 2 required",
                counts[c]
            )));
        }
        for m in means[c].iter_mut() {
            *m /= counts[c] as f64;
        }
    }

    // pooled within-class covariance with n - C normalization
    let mut cov = vec![vec![0.0; d]; d];
    let mut centered = vec![0.0; d];
    for (c, x) in &rows {
        for i in 0..d {
            centered[i] = x[i] - means[*c][i];
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..d {
                cov[i][j] += ci * centered[j];
            }
        }
    }
    let denom = (n - classes.len()) as f64;
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= denom;
            cov[j][i] = cov[i][j];
        }
    }
    let trace: f64 = (0..d).map(|i| cov[i][i]).sum();
    if trace <= 0.0 {
        return Err(Error::Training(
            "pooled covariance has zero trace (all rows identical)".into(),
        ));
    }
    let ridge = RIDGE_LAMBDA * trace / d as f64;
    for (i, row) in cov.iter_mut().enumerate() {
        row[i] += ridge;
    }
    let pooled_cov_inverse = spd_inverse(&cov)
        .ok_or_else(|| Error::Training("pooled covariance is not positive definite".into()))?;

    let log_priors = match priors {
        PriorMode::Equal => vec![-(classes.len() as f64).ln(); classes.len()],
        PriorMode::Proportional => counts
            .iter()
            .map(|&c| (c as f64 / n as f64).ln())
            .collect(),
    };

    Ok(LdaModel {
        class_labels: classes,
        class_means: means,
        pooled_cov_inverse,
        log_priors,
        dim: d,
    })
}

/// Predicts the class of one design row, returning the label and the
/// per-class discriminant scores. Ties break toward the earlier class.
pub fn lda_predict(model: &LdaModel, x: &[f64]) -> Result<(ClassLabel, Vec<f64>)> {
    if x.len() != model.dim {
        return Err(Error::Evaluation(format!(
            "feature vector has length {}, model expects {}",
            x.len(),
            model.dim
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation("non-finite feature value".into()));
    }
    let d = model.dim;
    let mut scores = Vec::with_capacity(model.class_labels.len());
    let mut sigma_mu = vec![0.0; d];
    for (c, mean) in model.class_means.iter().enumerate() {
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += model.pooled_cov_inverse[i][j] * mean[j];
            }
            sigma_mu[i] = acc;
        }
        let x_term: f64 = x.iter().zip(&sigma_mu).map(|(a, b)| a * b).sum();
        let mu_term: f64 = mean.iter().zip(&sigma_mu).map(|(a, b)| a * b).sum();
        scores.push(x_term - 0.5 * mu_term + model.log_priors[c]);
    }
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    Ok((model.class_labels[best], scores))
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
fn spd_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let d = a.len();
    // lower-triangular factor
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    // solve L L^T X = I column by column
    let mut inv = vec![vec![0.0; d]; d];
    let mut y = vec![0.0; d];
    for col in 0..d {
        for i in 0..d {
            let mut sum = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                sum -= l[i][k] * y[k];
            }
            y[i] = sum / l[i][i];
        }
        for i in (0..d).rev() {
            let mut sum = y[i];
            for k in i + 1..d {
                sum -= l[k][i] * inv[k][col];
            }
            inv[i][col] = sum / l[i][i];
        }
    }
    Some(inv)
}

const MODEL_MAGIC: &str = "lus-lda v1";

/// Serializes a model as versioned plain text with round-trip floats.
pub fn save_model(model: &LdaModel, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(MODEL_MAGIC);
    out.push('\n');
    out.push_str(&format!("dim {}\n", model.dim));
    out.push_str(&format!("classes {}\n", model.class_labels.len()));
    for (c, label) in model.class_labels.iter().enumerate() {
        out.push_str(&format!("class {label} {:?}\n", model.log_priors[c]));
    }
    for (c, label) in model.class_labels.iter().enumerate() {
        out.push_str(&format!("mean {label}"));
        for v in &model.class_means[c] {
            out.push_str(&format!(" {v:?}"));
        }
        out.push('\n');
    }
    for row in &model.pooled_cov_inverse {
        out.push_str("covinv");
        for v in row {
            out.push_str(&format!(" {v:?}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads a model written by [`save_model`].
pub fn load_model(path: &Path) -> Result<LdaModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let bad = |msg: &str| Error::ModelFormat(format!("{}: {msg}", path.display()));
    if lines.next() != Some(MODEL_MAGIC) {
        return Err(bad("missing or unsupported version line"));
    }
    let parse_kv = |line: Option<&str>, key: &str| -> Result<usize> {
        let line = line.ok_or_else(|| bad("truncated"))?;
        let rest = line
            .strip_prefix(key)
            .ok_or_else(|| bad(&format!("expected {key}")))?;
        rest.trim()
            .parse()
            .map_err(|_| bad(&format!("bad {key} value")))
    };
    let dim = parse_kv(lines.next(), "dim")?;
    let n_classes = parse_kv(lines.next(), "classes")?;
    let mut class_labels = Vec::with_capacity(n_classes);
    let mut log_priors = Vec::with_capacity(n_classes);
    for _ in 0..n_classes {
        let line = lines.next().ok_or_else(|| bad("truncated classes"))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("class") {
            return Err(bad("expected class line"));
        }
        let label: ClassLabel = parts
            .next()
            .ok_or_else(|| bad("class line missing label"))?
            .parse()?;
        let prior: f64 = parts
            .next()
            .ok_or_else(|| bad("class line missing prior"))?
            .parse()
            .map_err(|_| bad("bad prior"))?;
        class_labels.push(label);
        log_priors.push(prior);
    }
    let parse_floats = |parts: std::str::SplitWhitespace| -> Result<Vec<f64>> {
        parts
            .map(|s| s.parse::<f64>().map_err(|_| bad("bad float")))
            .collect()
    };
    let mut class_means = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let line = lines.next().ok_or_else(|| bad("truncated means"))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("mean") {
            return Err(bad("expected mean line"));
        }
        let label: ClassLabel = parts.next().ok_or_else(|| bad("mean missing label"))?.parse()?;
        if label != class_labels[c] {
            return Err(bad("mean label order mismatch"));
        }
        let values = parse_floats(parts)?;
        if values.len() != dim {
            return Err(bad("mean dimension mismatch"));
        }
        class_means.push(values);
    }
    let mut pooled_cov_inverse = Vec::with_capacity(dim);
    for _ in 0..dim {
        let line = lines.next().ok_or_else(|| bad("truncated covariance"))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("covinv") {
            return Err(bad("expected covinv line"));
        }
        let values = parse_floats(parts)?;
        if values.len() != dim {
            return Err(bad("covariance dimension mismatch"));
        }
        pooled_cov_inverse.push(values);
    }
    Ok(LdaModel {
        class_labels,
        class_means,
        pooled_cov_inverse,
        log_priors,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{ClinicalFeatures, FeatureTable, SampleRecord};

    fn record(values: Vec<f64>, label: ClassLabel, subject: &str) -> SampleRecord {
        SampleRecord {
            values,
            clinical: ClinicalFeatures::new(0.0, 0.0, 0.0).unwrap(),
            label,
            subject_id: subject.to_string(),
            video_id: String::new(),
        }
    }

    fn table(rows: Vec<SampleRecord>, width: usize) -> FeatureTable {
        let names = (0..width).map(|i| format!("f{i}")).collect();
        FeatureTable::new(names, rows).unwrap()
    }

    fn subset(indices: &[usize]) -> FeatureSubset {
        FeatureSubset {
            feature_indices: indices.to_vec(),
            include_clinical: false,
        }
    }

    #[test]
    fn perfect_indicator_ranks_first_constant_last() {
        let mut rows = Vec::new();
        for i in 0..100 {
            let cls = if i % 2 == 0 {
                ClassLabel::Normal
            } else {
                ClassLabel::Ttn
            };
            let indicator = if i % 2 == 0 { 0.0 } else { 1.0 };
            let wiggle = (i as f64 * 0.37).sin() * 0.5 + 0.5;
            rows.push(record(vec![wiggle, indicator, 3.25], cls, "s"));
        }
        let t = table(rows, 3);
        let ranking = chi2_rank(&t, &[0, 1, 2]).unwrap();
        assert_eq!(ranking.order[0], 1, "indicator must rank first");
        assert_eq!(ranking.order[2], 2, "constant must rank last");
        assert!(ranking.p_values[1] < 1e-20, "p = {}", ranking.p_values[1]);
        assert_eq!(ranking.p_values[2], 1.0);
        assert_eq!(ranking.statistics[2], 0.0);
        // perfect 2x2 association: statistic equals the sample count
        assert!((ranking.statistics[1] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn ranking_invariant_under_affine_rescale() {
        let mut rows = Vec::new();
        for i in 0..60 {
            let cls = match i % 3 {
                0 => ClassLabel::Normal,
                1 => ClassLabel::Rds,
                _ => ClassLabel::Con,
            };
            let a = (i as f64 * 0.731).sin() + 0.3 * (i % 3) as f64;
            let b = (i as f64 * 1.13).cos();
            rows.push(record(vec![a, b], cls, "s"));
        }
        let base = table(rows.clone(), 2);
        let scaled_rows: Vec<SampleRecord> = rows
            .iter()
            .map(|r| {
                let mut r2 = r.clone();
                r2.values = vec![r.values[0] * 37.0 - 11.0, r.values[1] * 0.01 + 5.0];
                r2
            })
            .collect();
        let scaled = table(scaled_rows, 2);
        let r1 = chi2_rank(&base, &[0, 1]).unwrap();
        let r2 = chi2_rank(&scaled, &[0, 1]).unwrap();
        assert_eq!(r1.order, r2.order);
        for (a, b) in r1.p_values.iter().zip(&r2.p_values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn p_values_decrease_with_association_strength() {
        // sweep separation of two class-conditional value clusters; both
        // classes draw the same jitter sequence so separation alone drives
        // the association
        let mut last_p = 1.1;
        for sep in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let mut rows = Vec::new();
            for i in 0..80 {
                let cls = if i < 40 {
                    ClassLabel::Normal
                } else {
                    ClassLabel::Ttn
                };
                let jitter = ((i % 40) * 2654435761_usize % 97) as f64 / 97.0;
                let v = if i < 40 { jitter } else { jitter + sep };
                rows.push(record(vec![v], cls, "s"));
            }
            let t = table(rows, 1);
            let r = chi2_rank(&t, &[0]).unwrap();
            assert!((0.0..=1.0).contains(&r.p_values[0]));
            assert!(
                r.p_values[0] <= last_p + 1e-12,
                "sep {sep}: p {} > previous {last_p}",
                r.p_values[0]
            );
            last_p = r.p_values[0];
        }
    }

    #[test]
    fn single_class_table_rejected() {
        let rows = (0..4)
            .map(|i| record(vec![i as f64], ClassLabel::Cld, "s"))
            .collect();
        let t = table(rows, 1);
        assert!(chi2_rank(&t, &[0]).is_err());
        assert!(lda_train(&t, &subset(&[0]), PriorMode::Equal).is_err());
    }

    fn symmetric_1d_table(spread: &[f64]) -> FeatureTable {
        let mut rows = Vec::new();
        for &d in spread {
            rows.push(record(vec![-1.0 + d], ClassLabel::Normal, "a"));
            rows.push(record(vec![1.0 + d], ClassLabel::Ttn, "b"));
        }
        table(rows, 1)
    }

    #[test]
    fn symmetric_case_boundary_at_zero() {
        let t = symmetric_1d_table(&[-0.2, -0.1, 0.1, 0.2]);
        let model = lda_train(&t, &subset(&[0]), PriorMode::Equal).unwrap();
        let (_, scores) = lda_predict(&model, &[0.0]).unwrap();
        assert!((scores[0] - scores[1]).abs() < 1e-10, "boundary off zero");
        assert_eq!(lda_predict(&model, &[-0.4]).unwrap().0, ClassLabel::Normal);
        assert_eq!(lda_predict(&model, &[0.4]).unwrap().0, ClassLabel::Ttn);
    }

    #[test]
    fn prior_shift_matches_closed_form() {
        // 1-D equal-variance classes at -1 and +1 with prior ratio 9:1 move
        // the boundary by sigma^2 ln(9) / 2 toward the rare class
        let spread = [-0.2, -0.1, 0.1, 0.2];
        let mut rows = Vec::new();
        // class Normal at -1 with 36 samples, Ttn at +1 with 4
        for i in 0..36 {
            rows.push(record(
                vec![-1.0 + spread[i % 4]],
                ClassLabel::Normal,
                "a",
            ));
        }
        for i in 0..4 {
            rows.push(record(vec![1.0 + spread[i % 4]], ClassLabel::Ttn, "b"));
        }
        let t = table(rows, 1);
        let model = lda_train(&t, &subset(&[0]), PriorMode::Proportional).unwrap();
        let sigma2 = 1.0 / model.pooled_cov_inverse[0][0];
        // score difference zero at x*: solve analytically from the model
        let expected_boundary = sigma2 * (9.0f64).ln() / 2.0;
        let diff = |x: f64| {
            let (_, s) = lda_predict(&model, &[x]).unwrap();
            s[0] - s[1]
        };
        assert!(
            diff(expected_boundary).abs() < 1e-10,
            "boundary not at sigma^2 ln9/2: d = {}",
            diff(expected_boundary)
        );
        // shifts toward the rare (positive-mean) class
        assert!(expected_boundary > 0.0);
    }

    #[test]
    fn well_separated_clouds_train_to_full_accuracy() {
        // two 2-D clusters 10 sigma apart, deterministic pseudo-noise
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut noise = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2.0
        };
        let mut rows = Vec::new();
        for i in 0..200 {
            let (center, label) = if i % 2 == 0 {
                (0.0, ClassLabel::Normal)
            } else {
                (10.0, ClassLabel::Ttn)
            };
            rows.push(record(
                vec![center + noise(), center + noise()],
                label,
                "s",
            ));
        }
        let t = table(rows, 2);
        let model = lda_train(&t, &subset(&[0, 1]), PriorMode::Equal).unwrap();
        let correct = t
            .records()
            .iter()
            .filter(|r| lda_predict(&model, &r.values).unwrap().0 == r.label)
            .count();
        assert_eq!(correct, t.len());
    }

    #[test]
    fn predict_at_class_mean_returns_class() {
        let mut rows = Vec::new();
        for (c, label) in [(0.0, ClassLabel::Normal), (3.0, ClassLabel::Rds), (7.0, ClassLabel::Ttn)] {
            for d in [-0.3, -0.1, 0.1, 0.3] {
                rows.push(record(vec![c + d, c - d], label, "s"));
            }
        }
        let t = table(rows, 2);
        let model = lda_train(&t, &subset(&[0, 1]), PriorMode::Equal).unwrap();
        for (c, mean) in model.class_means.iter().enumerate() {
            let (label, scores) = lda_predict(&model, mean).unwrap();
            assert_eq!(label, model.class_labels[c]);
            let argmax = scores
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(model.class_labels[argmax], label);
        }
    }

    #[test]
    fn midpoint_goes_to_high_prior_class() {
        let mut rows = Vec::new();
        for i in 0..36 {
            let d = [-0.2, -0.1, 0.1, 0.2][i % 4];
            rows.push(record(vec![-1.0 + d], ClassLabel::Normal, "a"));
        }
        for i in 0..4 {
            let d = [-0.2, -0.1, 0.1, 0.2][i % 4];
            rows.push(record(vec![1.0 + d], ClassLabel::Ttn, "b"));
        }
        let t = table(rows, 1);
        let model = lda_train(&t, &subset(&[0]), PriorMode::Proportional).unwrap();
        // midpoint of the two means
        let (label, _) = lda_predict(&model, &[0.0]).unwrap();
        assert_eq!(label, ClassLabel::Normal);
    }

    #[test]
    fn score_shift_invariance_of_argmax() {
        let mut rows = Vec::new();
        for (c, label) in [(0.0, ClassLabel::Normal), (2.0, ClassLabel::Cld), (5.0, ClassLabel::Ptx)] {
            for d in [-0.4, -0.2, 0.2, 0.4] {
                rows.push(record(vec![c + d], label, "s"));
            }
        }
        let t = table(rows, 1);
        // equal vs proportional with balanced counts: identical priors,
        // predictions must agree everywhere
        let m1 = lda_train(&t, &subset(&[0]), PriorMode::Equal).unwrap();
        let m2 = lda_train(&t, &subset(&[0]), PriorMode::Proportional).unwrap();
        for x in [-1.0, 0.5, 1.9, 3.3, 6.0] {
            assert_eq!(
                lda_predict(&m1, &[x]).unwrap().0,
                lda_predict(&m2, &[x]).unwrap().0
            );
        }
    }

    #[test]
    fn nearest_mean_with_equal_priors_isotropic_cov() {
        // symmetric clusters give (near) isotropic pooled covariance; the
        // discriminant then reduces to nearest class mean
        let mut rows = Vec::new();
        for (cx, cy, label) in [
            (0.0, 0.0, ClassLabel::Normal),
            (4.0, 0.0, ClassLabel::Cld),
            (0.0, 4.0, ClassLabel::Ttn),
        ] {
            for (dx, dy) in [(0.3, 0.0), (-0.3, 0.0), (0.0, 0.3), (0.0, -0.3)] {
                rows.push(record(vec![cx + dx, cy + dy], label, "s"));
            }
        }
        let t = table(rows, 2);
        let model = lda_train(&t, &subset(&[0, 1]), PriorMode::Equal).unwrap();
        let mut state = 99u64;
        let mut noise = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 6.0 - 1.0
        };
        for _ in 0..50 {
            let x = [noise(), noise()];
            let (label, scores) = lda_predict(&model, &x).unwrap();
            let nearest = model
                .class_means
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    let da: f64 = a.iter().zip(&x).map(|(m, v)| (m - v) * (m - v)).sum();
                    let db: f64 = b.iter().zip(&x).map(|(m, v)| (m - v) * (m - v)).sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap()
                .0;
            assert_eq!(label, model.class_labels[nearest], "scores {scores:?}");
        }
    }

    #[test]
    fn degenerate_training_rejected() {
        // class with fewer than 2 samples
        let rows = vec![
            record(vec![0.0], ClassLabel::Normal, "a"),
            record(vec![1.0], ClassLabel::Normal, "a"),
            record(vec![2.0], ClassLabel::Ttn, "b"),
        ];
        let t = table(rows, 1);
        let err = lda_train(&t, &subset(&[0]), PriorMode::Equal).unwrap_err();
        assert!(err.to_string().contains("TTN"));

        // all-identical rows: zero-trace covariance
        let rows = vec![
            record(vec![1.0], ClassLabel::Normal, "a"),
            record(vec![1.0], ClassLabel::Normal, "a"),
            record(vec![1.0], ClassLabel::Ttn, "b"),
            record(vec![1.0], ClassLabel::Ttn, "b"),
        ];
        let t = table(rows, 1);
        assert!(lda_train(&t, &subset(&[0]), PriorMode::Equal).is_err());

        // empty subset
        let rows = vec![
            record(vec![0.0], ClassLabel::Normal, "a"),
            record(vec![0.5], ClassLabel::Normal, "a"),
            record(vec![1.0], ClassLabel::Ttn, "b"),
            record(vec![1.5], ClassLabel::Ttn, "b"),
        ];
        let t = table(rows, 1);
        assert!(lda_train(&t, &subset(&[]), PriorMode::Equal).is_err());
    }

    #[test]
    fn predict_dimension_mismatch() {
        let t = symmetric_1d_table(&[-0.2, 0.2]);
        let model = lda_train(&t, &subset(&[0]), PriorMode::Equal).unwrap();
        assert!(lda_predict(&model, &[0.0, 1.0]).is_err());
        assert!(lda_predict(&model, &[f64::NAN]).is_err());
    }

    #[test]
    fn priors_sum_to_one() {
        let t = symmetric_1d_table(&[-0.2, -0.1, 0.1, 0.2]);
        for mode in [PriorMode::Equal, PriorMode::Proportional] {
            let model = lda_train(&t, &subset(&[0]), mode).unwrap();
            let total: f64 = model.log_priors.iter().map(|lp| lp.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn model_serialization_round_trip() {
        let t = symmetric_1d_table(&[-0.25, -0.1, 0.1, 0.25]);
        let model = lda_train(&t, &subset(&[0]), PriorMode::Proportional).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back.class_labels, model.class_labels);
        assert_eq!(back.dim, model.dim);
        assert_eq!(back.class_means, model.class_means);
        assert_eq!(back.pooled_cov_inverse, model.pooled_cov_inverse);
        assert_eq!(back.log_priors, model.log_priors);

        std::fs::write(&path, "not a model\n").unwrap();
        assert!(matches!(load_model(&path), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn spd_inverse_identity() {
        let a = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ];
        let inv = spd_inverse(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += a[i][k] * inv[k][j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc - want).abs() < 1e-12);
            }
        }
    }
}
