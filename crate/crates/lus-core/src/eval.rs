//! Cross-validation harnesses with in-fold feature selection.
//!
//! Both harnesses rank features by chi-square on the training rows of each
//! fold only, take the top `k` image features, append the three clinical
//! fields, train LDA on the fold's training rows and predict the held-out
//! rows. Accuracy is counted per held-out image in both modes.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::learn::{chi2_rank, lda_predict, lda_train, FeatureSubset, PriorMode};
use crate::pipeline::{ClassLabel, FeatureTable};

/// Cross-validation flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvMode {
    /// Leave one image out.
    Loo,
    /// Leave one subject out.
    Loso,
}

impl CvMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CvMode::Loo => "loo",
            CvMode::Loso => "loso",
        }
    }
}

impl std::str::FromStr for CvMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loo" => Ok(CvMode::Loo),
            "loso" => Ok(CvMode::Loso),
            other => Err(Error::Manifest(format!(
                "cv must be 'loo' or 'loso', got {other:?}"
            ))),
        }
    }
}

/// Confusion matrix with true classes as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    classes: Vec<ClassLabel>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<ClassLabel>) -> Self {
        let n = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn classes(&self) -> &[ClassLabel] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn record(&mut self, true_label: ClassLabel, predicted: ClassLabel) {
        let t = self.class_index(true_label);
        let p = self.class_index(predicted);
        self.counts[t][p] += 1;
    }

    fn class_index(&self, label: ClassLabel) -> usize {
        self.classes
            .iter()
            .position(|&c| c == label)
            .expect("label not covered by the matrix")
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.correct() as f64 / total as f64
        }
    }

    /// Row percentages; every row must have at least one sample.
    pub fn row_percentages(&self) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(self.classes.len());
        for (i, row) in self.counts.iter().enumerate() {
            let total: u64 = row.iter().sum();
            if total == 0 {
                return Err(Error::Evaluation(format!(
                    "class {} has no evaluated samples",
                    self.classes[i]
                )));
            }
            out.push(
                row.iter()
                    .map(|&c| c as f64 / total as f64 * 100.0)
                    .collect(),
            );
        }
        Ok(out)
    }
}

/// What a fold exposed to the observer: the rows ranked on and the rows
/// held out. Used to prove there is no selection leakage.
#[derive(Debug)]
pub struct FoldObservation<'a> {
    pub fold_index: usize,
    pub test_rows: &'a [usize],
    pub ranking_rows: &'a [usize],
}

/// Leave-one-out cross-validation.
pub fn loo_cv(
    table: &FeatureTable,
    k: usize,
    priors: PriorMode,
) -> Result<(ConfusionMatrix, f64)> {
    loo_cv_observed(table, k, priors, |_| {})
}

/// Leave-one-out with a per-fold observer.
pub fn loo_cv_observed(
    table: &FeatureTable,
    k: usize,
    priors: PriorMode,
    observer: impl FnMut(&FoldObservation),
) -> Result<(ConfusionMatrix, f64)> {
    let folds: Vec<Vec<usize>> = (0..table.len()).map(|i| vec![i]).collect();
    run_folds(table, &folds, k, priors, observer)
}

/// Leave-one-subject-out cross-validation: one fold per distinct subject.
pub fn loso_cv(
    table: &FeatureTable,
    k: usize,
    priors: PriorMode,
) -> Result<(ConfusionMatrix, f64)> {
    loso_cv_observed(table, k, priors, |_| {})
}

/// Leave-one-subject-out with a per-fold observer.
pub fn loso_cv_observed(
    table: &FeatureTable,
    k: usize,
    priors: PriorMode,
    observer: impl FnMut(&FoldObservation),
) -> Result<(ConfusionMatrix, f64)> {
    // subjects in first-appearance order for deterministic fold numbering
    let mut subjects: Vec<&str> = Vec::new();
    for rec in table.records() {
        if !subjects.contains(&rec.subject_id.as_str()) {
            subjects.push(&rec.subject_id);
        }
    }
    // every class must be covered by at least 2 subjects, otherwise its
    // fold would drop the class from training
    for class in table.classes_present() {
        let mut holders: Vec<&str> = Vec::new();
        for rec in table.records() {
            if rec.label == class && !holders.contains(&rec.subject_id.as_str()) {
                holders.push(&rec.subject_id);
            }
        }
        if holders.len() < 2 {
            return Err(Error::Evaluation(format!(
                "class {class} is represented by a single subject ({}); leave-one-subject-out cannot keep it in training",
                holders.first().copied().unwrap_or("none")
            )));
        }
    }
    let folds: Vec<Vec<usize>> = subjects
        .iter()
        .map(|s| {
            table
                .records()
                .iter()
                .enumerate()
                .filter(|(_, r)| r.subject_id == *s)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    run_folds(table, &folds, k, priors, observer)
}

fn run_folds(
    table: &FeatureTable,
    folds: &[Vec<usize>],
    k: usize,
    priors: PriorMode,
    mut observer: impl FnMut(&FoldObservation),
) -> Result<(ConfusionMatrix, f64)> {
    if k == 0 {
        return Err(Error::Evaluation("k must be >= 1".into()));
    }
    let classes = table.classes_present();
    if classes.len() < 2 {
        return Err(Error::Evaluation(
            "cross-validation needs at least 2 classes".into(),
        ));
    }
    let candidates: Vec<usize> = (0..table.feature_names().len()).collect();
    let mut confusion = ConfusionMatrix::new(classes.clone());

    for (fold_index, test_rows) in folds.iter().enumerate() {
        let in_test = {
            let mut mask = vec![false; table.len()];
            for &t in test_rows {
                mask[t] = true;
            }
            mask
        };
        let train_rows: Vec<usize> = (0..table.len()).filter(|&i| !in_test[i]).collect();
        // a training fold must retain every class
        for &class in &classes {
            if !train_rows
                .iter()
                .any(|&i| table.records()[i].label == class)
            {
                return Err(Error::Evaluation(format!(
                    "fold {fold_index} drops class {class} from training entirely"
                )));
            }
        }
        observer(&FoldObservation {
            fold_index,
            test_rows,
            ranking_rows: &train_rows,
        });

        let train_table = table.subset(&train_rows);
        let ranking = chi2_rank(&train_table, &candidates)?;
        let k_eff = k.min(ranking.order.len());
        let subset = FeatureSubset {
            feature_indices: ranking.order[..k_eff].to_vec(),
            include_clinical: true,
        };
        let model = lda_train(&train_table, &subset, priors)?;
        for &t in test_rows {
            let rec = &table.records()[t];
            let x = subset.design_row(rec);
            let (pred, _) = lda_predict(&model, &x)?;
            confusion.record(rec.label, pred);
        }
    }
    let accuracy = confusion.accuracy();
    Ok((confusion, accuracy))
}

/// Accuracy as a function of the number of selected image features.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    /// `(k, accuracy percent)`, k strictly increasing.
    pub points: Vec<(usize, f64)>,
}

impl SweepCurve {
    /// The smallest k achieving the maximum accuracy.
    pub fn best(&self) -> (usize, f64) {
        let mut best = self.points[0];
        for &(k, acc) in &self.points[1..] {
            if acc > best.1 {
                best = (k, acc);
            }
        }
        best
    }
}

/// Runs the chosen cross-validation for every k in `1..=k_max`.
pub fn sweep_feature_count(
    table: &FeatureTable,
    k_max: usize,
    cv: CvMode,
    priors: PriorMode,
) -> Result<SweepCurve> {
    if k_max == 0 {
        return Err(Error::Evaluation("k_max must be >= 1".into()));
    }
    let mut points = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let (_, accuracy) = match cv {
            CvMode::Loo => loo_cv(table, k, priors)?,
            CvMode::Loso => loso_cv(table, k, priors)?,
        };
        points.push((k, accuracy * 100.0));
    }
    Ok(SweepCurve { points })
}

/// Writes `<base>.csv` (counts and row percentages) and `<base>.txt` (the
/// plain-text table) and returns the rendered text.
pub fn report(matrix: &ConfusionMatrix, base: &Path) -> Result<String> {
    let percentages = matrix.row_percentages()?;
    let mut csv = String::from("section,true_class");
    for c in matrix.classes() {
        csv.push_str(&format!(",{c}"));
    }
    csv.push('\n');
    for (i, row) in matrix.counts().iter().enumerate() {
        csv.push_str(&format!("counts,{}", matrix.classes()[i]));
        for v in row {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    for (i, row) in percentages.iter().enumerate() {
        csv.push_str(&format!("percent,{}", matrix.classes()[i]));
        for v in row {
            csv.push_str(&format!(",{v:.2}"));
        }
        csv.push('\n');
    }

    let mut text = String::new();
    text.push_str(&format!("{:<10}", "True\\Pred"));
    for c in matrix.classes() {
        text.push_str(&format!("{:>9}", c.to_string()));
    }
    text.push('\n');
    for (i, row) in percentages.iter().enumerate() {
        text.push_str(&format!("{:<10}", matrix.classes()[i].to_string()));
        for v in row {
            text.push_str(&format!("{:>8.2}%", v));
        }
        text.push('\n');
    }
    text.push_str(&format!(
        "overall accuracy: {:.2}% ({}/{} correct)\n",
        matrix.accuracy() * 100.0,
        matrix.correct(),
        matrix.total()
    ));

    let csv_path = with_extension(base, "csv");
    let txt_path = with_extension(base, "txt");
    std::fs::write(&csv_path, &csv).map_err(|e| Error::io(&csv_path, e))?;
    std::fs::write(&txt_path, &text).map_err(|e| Error::io(&txt_path, e))?;
    Ok(text)
}

fn with_extension(base: &Path, ext: &str) -> PathBuf {
    let mut p = base.to_path_buf();
    let new_ext = match p.extension() {
        Some(cur) => format!("{}.{ext}", cur.to_string_lossy()),
        None => ext.to_string(),
    };
    p.set_extension(new_ext);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{ClinicalFeatures, SampleRecord};

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

    /// Two separable classes, several subjects each, slight within-class
    /// jitter so covariance stays positive.
    fn separable_table() -> FeatureTable {
        let mut rows = Vec::new();
        let jit = [-0.02, 0.01, -0.01, 0.02];
        for s in 0..3 {
            for i in 0..4 {
                rows.push(record(
                    vec![0.0 + jit[i], 1.0 + jit[(i + s) % 4]],
                    ClassLabel::Normal,
                    &format!("n{s}"),
                ));
                rows.push(record(
                    vec![5.0 + jit[(i + 1) % 4], -3.0 + jit[i]],
                    ClassLabel::Rds,
                    &format!("r{s}"),
                ));
            }
        }
        table(rows, 2)
    }

    #[test]
    fn loo_runs_one_fold_per_sample() {
        let t = separable_table();
        let mut folds = 0usize;
        let (confusion, accuracy) =
            loo_cv_observed(&t, 1, PriorMode::Equal, |_| folds += 1).unwrap();
        assert_eq!(folds, t.len());
        assert_eq!(confusion.total() as usize, t.len());
        assert_eq!(accuracy, 1.0);
    }

    #[test]
    fn near_duplicate_rows_keep_bookkeeping_exact() {
        // one base sample per class, repeated with tiny jitter
        let mut rows = Vec::new();
        for (v, label) in [(0.0, ClassLabel::Normal), (4.0, ClassLabel::Ttn)] {
            for j in [-1e-4, 0.0, 1e-4] {
                rows.push(record(vec![v + j], label, "s"));
            }
        }
        let t = table(rows, 1);
        let (confusion, _) = loo_cv(&t, 1, PriorMode::Equal).unwrap();
        assert_eq!(confusion.total() as usize, t.len());
    }

    #[test]
    fn loso_one_fold_per_subject_and_harder_than_loo() {
        let t = separable_table();
        let mut folds = 0usize;
        let (confusion, _) = loso_cv_observed(&t, 2, PriorMode::Equal, |_| folds += 1).unwrap();
        assert_eq!(folds, 6); // 3 subjects per class, 2 classes
        assert_eq!(confusion.total() as usize, t.len());
    }

    #[test]
    fn loso_memorization_sanity() {
        // one subject's rows copy another same-class subject's rows: the
        // held-out subject must classify perfectly
        let mut rows = Vec::new();
        let jit = [-0.03, 0.02, 0.05];
        for (i, &j) in jit.iter().enumerate() {
            rows.push(record(vec![0.0 + j], ClassLabel::Normal, "na"));
            rows.push(record(vec![0.0 + jit[(i + 1) % 3]], ClassLabel::Normal, "nb"));
            rows.push(record(vec![6.0 + j], ClassLabel::Con, "ca"));
            rows.push(record(vec![6.0 + jit[(i + 1) % 3]], ClassLabel::Con, "cb"));
        }
        let t = table(rows, 1);
        let (confusion, accuracy) = loso_cv(&t, 1, PriorMode::Equal).unwrap();
        assert_eq!(accuracy, 1.0, "{confusion:?}");
    }

    #[test]
    fn loso_rejects_single_subject_class() {
        let mut rows = Vec::new();
        for j in [-0.1, 0.0, 0.1] {
            rows.push(record(vec![0.0 + j], ClassLabel::Normal, "n1"));
            rows.push(record(vec![0.1 + j], ClassLabel::Normal, "n2"));
            rows.push(record(vec![5.0 + j], ClassLabel::Ptx, "only"));
        }
        let t = table(rows, 1);
        let err = loso_cv(&t, 1, PriorMode::Equal).unwrap_err();
        assert!(err.to_string().contains("PTX"), "{err}");
        assert!(err.to_string().contains("only"), "{err}");
    }

    #[test]
    fn loo_rejects_singleton_class() {
        let mut rows = vec![record(vec![9.0], ClassLabel::Ptx, "p")];
        for j in [-0.1, 0.0, 0.1] {
            rows.push(record(vec![j], ClassLabel::Normal, "n"));
            rows.push(record(vec![3.0 + j], ClassLabel::Ttn, "t"));
        }
        let t = table(rows, 1);
        let err = loo_cv(&t, 1, PriorMode::Equal).unwrap_err();
        assert!(err.to_string().contains("PTX"), "{err}");
    }

    #[test]
    fn no_leakage_and_folds_partition() {
        let t = separable_table();
        for mode in [CvMode::Loo, CvMode::Loso] {
            let mut seen = vec![0usize; t.len()];
            let check = |obs: &FoldObservation| {
                for &tr in obs.test_rows {
                    assert!(
                        !obs.ranking_rows.contains(&tr),
                        "fold {}: held-out row {tr} entered the ranking input",
                        obs.fold_index
                    );
                }
                assert_eq!(obs.ranking_rows.len() + obs.test_rows.len(), 24);
            };
            match mode {
                CvMode::Loo => {
                    loo_cv_observed(&t, 1, PriorMode::Equal, |obs| {
                        check(obs);
                        for &tr in obs.test_rows {
                            seen[tr] += 1;
                        }
                    })
                    .unwrap();
                }
                CvMode::Loso => {
                    loso_cv_observed(&t, 1, PriorMode::Equal, |obs| {
                        check(obs);
                        for &tr in obs.test_rows {
                            seen[tr] += 1;
                        }
                    })
                    .unwrap();
                }
            }
            assert!(seen.iter().all(|&c| c == 1), "{mode:?}: folds not a partition");
        }
    }

    #[test]
    fn sweep_matches_single_runs() {
        let t = separable_table();
        let curve = sweep_feature_count(&t, 2, CvMode::Loo, PriorMode::Equal).unwrap();
        assert_eq!(curve.points.len(), 2);
        for &(k, acc) in &curve.points {
            let (_, single) = loo_cv(&t, k, PriorMode::Equal).unwrap();
            assert_eq!(acc, single * 100.0, "k = {k}");
        }
        let single = sweep_feature_count(&t, 1, CvMode::Loso, PriorMode::Equal).unwrap();
        assert_eq!(single.points.len(), 1);
        let best = curve.best();
        assert!(curve.points.iter().all(|&(_, a)| a <= best.1));
    }

    #[test]
    fn k_zero_rejected() {
        let t = separable_table();
        assert!(loo_cv(&t, 0, PriorMode::Equal).is_err());
        assert!(sweep_feature_count(&t, 0, CvMode::Loo, PriorMode::Equal).is_err());
    }

    #[test]
    fn report_identity_predictions() {
        let mut m = ConfusionMatrix::new(vec![ClassLabel::Normal, ClassLabel::Cld]);
        for _ in 0..4 {
            m.record(ClassLabel::Normal, ClassLabel::Normal);
        }
        for _ in 0..6 {
            m.record(ClassLabel::Cld, ClassLabel::Cld);
        }
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("confusion");
        let text = report(&m, &base).unwrap();
        assert!(text.contains("100.00%"));
        assert!(dir.path().join("confusion.csv").exists());
        assert!(dir.path().join("confusion.txt").exists());
        let pct = m.row_percentages().unwrap();
        for (i, row) in pct.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert!((sum - 100.0).abs() < 0.01);
            // percentages recompute from counts
            let total: u64 = m.counts()[i].iter().sum();
            for (j, &p) in row.iter().enumerate() {
                assert!((p - m.counts()[i][j] as f64 / total as f64 * 100.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn report_rejects_empty_row() {
        let mut m = ConfusionMatrix::new(vec![ClassLabel::Normal, ClassLabel::Cld]);
        m.record(ClassLabel::Normal, ClassLabel::Normal);
        let dir = tempfile::tempdir().unwrap();
        assert!(report(&m, &dir.path().join("x")).is_err());
    }

    #[test]
    fn determinism_across_reruns() {
        let t = separable_table();
        let (c1, a1) = loso_cv(&t, 2, PriorMode::Proportional).unwrap();
        let (c2, a2) = loso_cv(&t, 2, PriorMode::Proportional).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(a1, a2);
    }
}
