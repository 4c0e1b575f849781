//! Confusion counts, the seven summary metrics, the cross-validation driver
//! and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::classifiers::{Classifier, ClassifierSpec, Matrix, Variant};
use crate::descriptors::display_name;
use crate::error::{Error, Result};
use crate::ingestion::{FoldPlan, Label};
use crate::rng::derive_seed;

pub const REPORT_CSV_HEADER: &str = "classifier,descriptor,a,p,r,s,f1,mcc,bacc,seed";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Same predictions scored with the other class as positive.
    pub fn swapped(&self) -> Self {
        Self::new(self.tn, self.fn_, self.fp, self.tp)
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn)
    }
}

pub fn confusion(y_true: &[Label], y_pred: &[Label], positive: Label) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Shape("no predictions to score".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub a: f64,
    pub p: f64,
    pub r: f64,
    pub s: f64,
    pub f1: f64,
    pub mcc: f64,
    pub bacc: f64,
}

impl MetricsReport {
    pub fn values(&self) -> [f64; 7] {
        [self.a, self.p, self.r, self.s, self.f1, self.mcc, self.bacc]
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Every ratio with a zero denominator is reported as 0.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    if cm.total() == 0 {
        return Err(Error::Shape("empty confusion matrix".into()));
    }
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let a = (tp + tn) / (tp + fp + fn_ + tn);
    let p = ratio(tp, tp + fp);
    let r = ratio(tp, tp + fn_);
    let s = ratio(tn, tn + fp);
    let f1 = ratio(2.0 * p * r, p + r);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    let mcc = if den == 0.0 {
        0.0
    } else {
        ((tp * tn - fp * fn_) / den.sqrt()).clamp(-1.0, 1.0)
    };
    Ok(MetricsReport {
        a,
        p,
        r,
        s,
        f1,
        mcc,
        bacc: (r + s) / 2.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub descriptor: String,
    pub classifier: Variant,
    pub seed: u64,
    pub positive: Label,
    pub folds: Vec<ConfusionMatrix>,
    pub pooled: ConfusionMatrix,
    pub metrics: MetricsReport,
    /// Out-of-fold prediction for every sample, by position.
    pub predictions: Vec<Label>,
    /// Folds whose SVM stopped at the iteration cap.
    pub nonconverged_folds: Vec<usize>,
}

impl CvResult {
    pub fn row(&self) -> ReportRow {
        ReportRow {
            classifier: self.classifier.name().to_string(),
            descriptor: self.descriptor.clone(),
            metrics: self.metrics,
            seed: self.seed,
        }
    }
}

/// Runs `plan.k` train/test rounds and pools the confusion counts.
///
/// Scaling, when the classifier needs it, is fitted on each training split
/// only. Fold `i` trains with seed `derive_seed(spec.seed, i)`.
pub fn cross_validate(
    descriptor: &str,
    x: &Matrix,
    labels: &[Label],
    spec: &ClassifierSpec,
    plan: &FoldPlan,
    positive: Label,
) -> Result<CvResult> {
    if x.rows() != labels.len() || plan.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows, {} labels, {} planned samples",
            x.rows(),
            labels.len(),
            plan.len()
        )));
    }
    spec.validate()?;
    let per_fold: Vec<(Vec<usize>, Vec<Label>, bool)> = (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let train = plan.train_indices(fold);
            let test = plan.test_indices(fold);
            let train_y: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
            if !train_y.contains(&Label::Normal) || !train_y.contains(&Label::Abnormal) {
                return Err(Error::Training(format!(
                    "training split for fold {fold} holds a single class"
                )));
            }
            let fold_spec = spec.clone().with_seed(derive_seed(spec.seed, fold as u64));
            let clf = Classifier::fit(&fold_spec, &x.select_rows(&train), &train_y)?;
            let pred = clf.predict(&x.select_rows(&test))?;
            Ok((test, pred, clf.converged()))
        })
        .collect::<Result<_>>()?;

    let mut predictions = vec![Label::Normal; labels.len()];
    let mut folds = Vec::with_capacity(plan.k);
    let mut nonconverged_folds = Vec::new();
    for (fold, (test, pred, converged)) in per_fold.into_iter().enumerate() {
        let truth: Vec<Label> = test.iter().map(|&i| labels[i]).collect();
        folds.push(if test.is_empty() {
            ConfusionMatrix::default()
        } else {
            confusion(&truth, &pred, positive)?
        });
        for (&i, &p) in test.iter().zip(&pred) {
            predictions[i] = p;
        }
        if !converged {
            nonconverged_folds.push(fold);
        }
    }
    let pooled = folds.iter().fold(ConfusionMatrix::default(), |acc, &c| acc + c);
    Ok(CvResult {
        descriptor: descriptor.to_string(),
        classifier: spec.variant,
        seed: spec.seed,
        positive,
        metrics: compute_metrics(&pooled)?,
        folds,
        pooled,
        predictions,
        nonconverged_folds,
    })
}

/// One line of `report.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub classifier: String,
    pub descriptor: String,
    pub metrics: MetricsReport,
    pub seed: u64,
}

/// Percentage with two decimals; never prints `-0.00`.
pub fn format_percent(v: f64) -> String {
    let s = format!("{:.2}", v * 100.0);
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// One markdown table per classifier, rows sorted by descriptor identifier.
pub fn render_table(rows: &[ReportRow]) -> String {
    let mut groups: BTreeMap<(usize, String), Vec<&ReportRow>> = BTreeMap::new();
    for row in rows {
        let rank = Variant::ALL
            .iter()
            .position(|v| v.name() == row.classifier)
            .unwrap_or(Variant::ALL.len());
        groups.entry((rank, row.classifier.clone())).or_default().push(row);
    }
    let mut out = String::from(
        "# Cross-validation results\n\n\
         Metrics in percent, computed from confusion counts pooled over all folds.\n",
    );
    for ((_, clf), mut members) in groups {
        members.sort_by(|a, b| a.descriptor.cmp(&b.descriptor));
        let title = clf
            .parse::<Variant>()
            .map(|v| v.display_name().to_string())
            .unwrap_or(clf);
        let _ = write!(
            out,
            "\n## {title}\n\n| Desc | A | P | R | S | F1 | MCC | BACC |\n\
             |---|---:|---:|---:|---:|---:|---:|---:|\n"
        );
        for row in members {
            let _ = write!(out, "| {} |", display_name(&row.descriptor));
            for v in row.metrics.values() {
                let _ = write!(out, " {} |", format_percent(v));
            }
            out.push('\n');
        }
    }
    out
}

/// Raw fractions in shortest round-trip form.
pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{},{}", row.classifier, row.descriptor);
        for v in row.metrics.values() {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", row.seed);
    }
    out
}

/// Inverse of [`render_csv`].
pub fn parse_report_csv(text: &str, path: &std::path::Path) -> Result<Vec<ReportRow>> {
    let format_err = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == REPORT_CSV_HEADER => {}
        _ => return Err(format_err(1, format!("expected header `{REPORT_CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(format_err(n, format!("expected 10 fields, found {}", fields.len())));
        }
        let mut v = [0.0; 7];
        for (slot, f) in v.iter_mut().zip(&fields[2..9]) {
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format_err(n, format!("bad metric value `{f}`")))?;
        }
        let seed = fields[9]
            .parse()
            .map_err(|_| format_err(n, format!("bad seed `{}`", fields[9])))?;
        rows.push(ReportRow {
            classifier: fields[0].to_string(),
            descriptor: fields[1].to_string(),
            metrics: MetricsReport {
                a: v[0],
                p: v[1],
                r: v[2],
                s: v[3],
                f1: v[4],
                mcc: v[5],
                bacc: v[6],
            },
            seed,
        });
    }
    Ok(rows)
}
