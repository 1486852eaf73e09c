//! Evaluation artifacts: confusion matrix, per-class precision/recall/F1,
//! one-vs-rest ROC with trapezoidal AUC, and precision-recall curves with
//! step-summed average precision.

use crate::error::{Error, Result};
use crate::imgdata::CLASS_NAMES;
use crate::tensor::Tensor;

/// Count grid with true classes on rows and predicted classes on columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn from_labels(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::Input(format!(
                "{} true labels but {} predictions",
                y_true.len(),
                y_pred.len()
            )));
        }
        if n_classes == 0 {
            return Err(Error::Input("need at least one class".into()));
        }
        let mut counts = vec![0usize; n_classes * n_classes];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            if t >= n_classes || p >= n_classes {
                return Err(Error::Input(format!(
                    "label pair ({t},{p}) out of range 0..{n_classes}"
                )));
            }
            counts[t * n_classes + p] += 1;
        }
        Ok(Self { n_classes, counts })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, true_class: usize, pred_class: usize) -> usize {
        self.counts[true_class * self.n_classes + pred_class]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.n_classes).map(|i| self.get(i, i)).sum()
    }

    /// Number of samples whose true class is `class`.
    pub fn support(&self, class: usize) -> usize {
        (0..self.n_classes).map(|p| self.get(class, p)).sum()
    }

    /// Number of samples predicted as `class`.
    pub fn predicted(&self, class: usize) -> usize {
        (0..self.n_classes).map(|t| self.get(t, class)).sum()
    }

    /// CSV rendering with a header of predicted-class names (4-class only).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for p in 0..self.n_classes {
            let name = CLASS_NAMES.get(p).copied().unwrap_or("?");
            out.push_str(&format!(",{name}"));
        }
        out.push('\n');
        for t in 0..self.n_classes {
            out.push_str(CLASS_NAMES.get(t).copied().unwrap_or("?"));
            for p in 0..self.n_classes {
                out.push_str(&format!(",{}", self.get(t, p)));
            }
            out.push('\n');
        }
        out
    }
}

/// Four-class confusion matrix from label vectors.
pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize]) -> Result<ConfusionMatrix> {
    ConfusionMatrix::from_labels(y_true, y_pred, CLASS_NAMES.len())
}

/// Overall accuracy: trace over total.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Input("confusion matrix holds no samples".into()));
    }
    Ok(cm.trace() as f64 / total as f64)
}

/// Precision/recall/F1 for one class. `degenerate` marks a zero-denominator
/// rate that was reported as 0 instead of NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrfRow {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub degenerate: bool,
}

/// Per-class precision = TP/(TP+FP), recall = TP/(TP+FN),
/// F1 = 2PR/(P+R); zero denominators yield 0 with the degenerate flag set.
pub fn class_precision_recall_f1(cm: &ConfusionMatrix) -> Vec<PrfRow> {
    (0..cm.n_classes())
        .map(|c| {
            let tp = cm.get(c, c) as f64;
            let predicted = cm.predicted(c) as f64;
            let support = cm.support(c);
            let mut degenerate = false;

            let precision = if predicted > 0.0 {
                tp / predicted
            } else {
                degenerate = true;
                0.0
            };
            let recall = if support > 0 {
                tp / support as f64
            } else {
                degenerate = true;
                0.0
            };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                degenerate = true;
                0.0
            };
            PrfRow { precision, recall, f1, support, degenerate }
        })
        .collect()
}

/// Ordered curve points: (FPR, TPR) for ROC, (recall, precision) for PR,
/// with the score threshold that produced each point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoints {
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
}

impl CurvePoints {
    /// CSV rendering with the given axis names.
    pub fn to_csv(&self, x_name: &str, y_name: &str) -> String {
        let mut out = format!("{x_name},{y_name},threshold\n");
        for ((x, y), t) in self.points.iter().zip(&self.thresholds) {
            out.push_str(&format!("{x},{y},{t}\n"));
        }
        out
    }
}

fn class_scores(scores: &Tensor, y_true: &[usize], class_id: usize) -> Result<Vec<(f64, bool)>> {
    if scores.ndim() != 2 || scores.shape()[1] != CLASS_NAMES.len() {
        return Err(Error::Input(format!(
            "scores must be [n,4], got {:?}",
            scores.shape()
        )));
    }
    let n = scores.shape()[0];
    if y_true.len() != n {
        return Err(Error::Input(format!(
            "{n} score rows but {} labels",
            y_true.len()
        )));
    }
    if class_id >= CLASS_NAMES.len() {
        return Err(Error::Input(format!("class id {class_id} out of range 0..4")));
    }
    if let Some(&bad) = y_true.iter().find(|&&l| l >= CLASS_NAMES.len()) {
        return Err(Error::Input(format!("label {bad} out of range 0..4")));
    }
    Ok((0..n)
        .map(|i| (scores.get2(i, class_id) as f64, y_true[i] == class_id))
        .collect())
}

/// Sorted descending by score; groups equal scores together and yields the
/// cumulative (positives, negatives) after each group.
fn threshold_sweep(samples: &mut Vec<(f64, bool)>) -> Vec<(f64, usize, usize)> {
    samples.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("scores are finite"));
    let mut sweep = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < samples.len() {
        let score = samples[i].0;
        while i < samples.len() && samples[i].0 == score {
            if samples[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        sweep.push((score, tp, fp));
    }
    sweep
}

/// One-vs-rest ROC curve for `class_id` using its softmax column. Points
/// run from the (0,0) anchor to (1,1) with thresholds descending.
pub fn roc_curve_ovr(scores: &Tensor, y_true: &[usize], class_id: usize) -> Result<CurvePoints> {
    let mut samples = class_scores(scores, y_true, class_id)?;
    let positives = samples.iter().filter(|s| s.1).count();
    let negatives = samples.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Degenerate(format!(
            "ROC for class {class_id} needs both positives and negatives, got {positives}/{negatives}"
        )));
    }

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    for (score, tp, fp) in threshold_sweep(&mut samples) {
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
        thresholds.push(score);
    }
    Ok(CurvePoints { points, thresholds })
}

/// Trapezoidal area under a curve with non-decreasing x. For ROC points
/// this equals the pairwise win probability with ties counted half.
pub fn auc_trapezoid(curve: &CurvePoints) -> Result<f64> {
    if curve.points.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::Input("curve x values must be non-decreasing".into()));
    }
    let mut area = 0.0;
    for w in curve.points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        area += (x1 - x0) * (y1 + y0) / 2.0;
    }
    Ok(area)
}

/// One-vs-rest precision/recall pairs at each descending score threshold.
pub fn pr_curve_ovr(scores: &Tensor, y_true: &[usize], class_id: usize) -> Result<CurvePoints> {
    let mut samples = class_scores(scores, y_true, class_id)?;
    let positives = samples.iter().filter(|s| s.1).count();
    if positives == 0 {
        return Err(Error::Degenerate(format!(
            "PR curve for class {class_id} needs at least one positive"
        )));
    }

    let mut points = Vec::new();
    let mut thresholds = Vec::new();
    for (score, tp, fp) in threshold_sweep(&mut samples) {
        let recall = tp as f64 / positives as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        points.push((recall, precision));
        thresholds.push(score);
    }
    Ok(CurvePoints { points, thresholds })
}

/// Step-summed average precision: `sum (R_i - R_{i-1}) * P_i` over the
/// threshold sweep, starting from recall 0.
pub fn average_precision(curve: &CurvePoints) -> f64 {
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for &(recall, precision) in &curve.points {
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    ap
}

/// One row of the evaluation report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub average_precision: f64,
    pub support: usize,
    /// Set when any constituent metric was degenerate (zero denominator or
    /// a single-class ROC) and reported as 0.
    pub degenerate: bool,
}

/// Per-class metrics plus overall accuracy and a macro-averaged summary
/// row (the macro row and support column extend the classic four-column
/// per-class table).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: ClassMetrics,
}

/// Builds the full report from softmax scores: predictions are row argmax,
/// ROC/PR run one-vs-rest per class. Degenerate classes are flagged and
/// zero-filled so the report stays total.
pub fn class_report(scores: &Tensor, y_true: &[usize]) -> Result<ClassReport> {
    let preds = scores.argmax_last_axis()?;
    let cm = confusion_matrix(y_true, &preds)?;
    let prf = class_precision_recall_f1(&cm);

    let mut classes = Vec::with_capacity(CLASS_NAMES.len());
    for (c, row) in prf.iter().enumerate() {
        let (auc, ap, score_degenerate) = match roc_curve_ovr(scores, y_true, c) {
            Ok(curve) => {
                let auc = auc_trapezoid(&curve)?;
                let ap = average_precision(&pr_curve_ovr(scores, y_true, c)?);
                (auc, ap, false)
            }
            Err(Error::Degenerate(_)) => (0.0, 0.0, true),
            Err(e) => return Err(e),
        };
        classes.push(ClassMetrics {
            precision: row.precision,
            recall: row.recall,
            f1: row.f1,
            auc,
            average_precision: ap,
            support: row.support,
            degenerate: row.degenerate || score_degenerate,
        });
    }

    let k = classes.len() as f64;
    let macro_avg = ClassMetrics {
        precision: classes.iter().map(|c| c.precision).sum::<f64>() / k,
        recall: classes.iter().map(|c| c.recall).sum::<f64>() / k,
        f1: classes.iter().map(|c| c.f1).sum::<f64>() / k,
        auc: classes.iter().map(|c| c.auc).sum::<f64>() / k,
        average_precision: classes.iter().map(|c| c.average_precision).sum::<f64>() / k,
        support: classes.iter().map(|c| c.support).sum(),
        degenerate: classes.iter().any(|c| c.degenerate),
    };

    Ok(ClassReport { classes, accuracy: accuracy(&cm)?, macro_avg })
}

impl ClassReport {
    /// CSV rows: one per class, a macro_avg row, then an accuracy row
    /// (value in the second column, total support in the last).
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("class,precision,recall,f1_score,auc,average_precision,support,degenerate\n");
        let mut push_row = |name: &str, m: &ClassMetrics| {
            out.push_str(&format!(
                "{name},{},{},{},{},{},{},{}\n",
                m.precision, m.recall, m.f1, m.auc, m.average_precision, m.support, m.degenerate
            ));
        };
        for (c, m) in self.classes.iter().enumerate() {
            push_row(CLASS_NAMES[c], m);
        }
        push_row("macro_avg", &self.macro_avg);
        out.push_str(&format!(
            "accuracy,{},,,,,{},\n",
            self.accuracy, self.macro_avg.support
        ));
        out
    }

    /// Fixed-width text table with the classic columns (precision, recall,
    /// F1, AUC) plus AP and support.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<10} {:>9} {:>9} {:>9} {:>9} {:>9} {:>8}\n",
            "Class", "Precision", "Recall", "F1-Score", "AUC", "AP", "Support"
        );
        for (c, m) in self.classes.iter().enumerate() {
            out.push_str(&format!(
                "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>8}{}\n",
                CLASS_NAMES[c],
                m.precision,
                m.recall,
                m.f1,
                m.auc,
                m.average_precision,
                m.support,
                if m.degenerate { "  (degenerate)" } else { "" }
            ));
        }
        let m = &self.macro_avg;
        out.push_str(&format!(
            "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>8}\n",
            "macro avg", m.precision, m.recall, m.f1, m.auc, m.average_precision, m.support
        ));
        out.push_str(&format!(
            "accuracy   {:.4} over {} samples\n",
            self.accuracy, m.support
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score_tensor(rows: &[[f32; 4]]) -> Tensor {
        Tensor::from_vec(&[rows.len(), 4], rows.iter().flatten().copied().collect()).unwrap()
    }

    /// Column of one-vs-rest scores packed into a [n,4] tensor at class 0.
    fn ovr_scores(scores: &[f32]) -> Tensor {
        let rows: Vec<[f32; 4]> = scores.iter().map(|&s| [s, 1.0 - s, 0.0, 0.0]).collect();
        score_tensor(&rows)
    }

    #[test]
    fn perfect_predictions_are_diagonal() {
        let cm = confusion_matrix(&[1, 1, 2, 3], &[1, 1, 2, 3]).unwrap();
        for t in 0..4 {
            for p in 0..4 {
                let expect = if t == p { [0, 2, 1, 1][t] } else { 0 };
                assert_eq!(cm.get(t, p), expect);
            }
        }
        assert_eq!(cm.trace(), 4);
        assert_eq!(cm.total(), 4);
    }

    #[test]
    fn two_class_hand_count() {
        let cm = ConfusionMatrix::from_labels(&[0, 0, 1, 1], &[0, 1, 1, 1], 2).unwrap();
        assert_eq!(
            [cm.get(0, 0), cm.get(0, 1), cm.get(1, 0), cm.get(1, 1)],
            [1, 1, 0, 2]
        );
        assert_eq!(cm.trace(), 3);
    }

    #[test]
    fn invalid_confusion_inputs_rejected() {
        assert!(matches!(confusion_matrix(&[0, 1], &[0]), Err(Error::Input(_))));
        assert!(matches!(confusion_matrix(&[0, 4], &[0, 0]), Err(Error::Input(_))));
    }

    #[test]
    fn prf_hand_computation() {
        // cm [[2,0],[1,1]]: class0 P=2/3 R=1 F1=0.8; class1 P=1 R=0.5 F1=2/3.
        let cm = ConfusionMatrix::from_labels(&[0, 0, 1, 1], &[0, 0, 0, 1], 2).unwrap();
        let rows = class_precision_recall_f1(&cm);
        assert!((rows[0].precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(rows[0].recall, 1.0);
        assert!((rows[0].f1 - 0.8).abs() < 1e-12);
        assert_eq!(rows[1].precision, 1.0);
        assert_eq!(rows[1].recall, 0.5);
        assert!((rows[1].f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!(!rows[0].degenerate && !rows[1].degenerate);

        assert!((accuracy(&cm).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn perfect_diagonal_scores_all_ones() {
        let cm = confusion_matrix(&[0, 1, 2, 3, 2], &[0, 1, 2, 3, 2]).unwrap();
        for row in class_precision_recall_f1(&cm) {
            assert_eq!((row.precision, row.recall, row.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(accuracy(&cm).unwrap(), 1.0);
    }

    #[test]
    fn empty_predicted_class_flags_degenerate() {
        let cm = confusion_matrix(&[0, 0, 1], &[0, 0, 0]).unwrap();
        let rows = class_precision_recall_f1(&cm);
        assert_eq!(rows[1].precision, 0.0);
        assert!(rows[1].degenerate);
        // Classes with no support at all are also flagged, not NaN.
        assert_eq!(rows[2].recall, 0.0);
        assert!(rows[2].degenerate);
    }

    #[test]
    fn all_wrong_two_sample_accuracy_is_zero() {
        let cm = confusion_matrix(&[0, 1], &[1, 0]).unwrap();
        assert_eq!(accuracy(&cm).unwrap(), 0.0);
    }

    #[test]
    fn roc_perfect_separation() {
        let scores = ovr_scores(&[0.9, 0.8, 0.3, 0.2]);
        let labels = [0, 0, 1, 1];
        let curve = roc_curve_ovr(&scores, &labels, 0).unwrap();
        assert_eq!(curve.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(curve.points.last(), Some(&(1.0, 1.0)));
        assert!(curve.points.contains(&(0.0, 1.0)));
        assert_eq!(auc_trapezoid(&curve).unwrap(), 1.0);
    }

    #[test]
    fn roc_interleaved_auc_three_quarters() {
        // Pairwise wins: 3 of 4 -> AUC 0.75.
        let scores = ovr_scores(&[0.9, 0.6, 0.4, 0.2]);
        let labels = [0, 1, 0, 1];
        let curve = roc_curve_ovr(&scores, &labels, 0).unwrap();
        assert!((auc_trapezoid(&curve).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn roc_monotone_axes_and_degenerate_error() {
        let scores = ovr_scores(&[0.7, 0.6, 0.5, 0.4, 0.4, 0.1]);
        let labels = [0, 1, 0, 1, 0, 1];
        let curve = roc_curve_ovr(&scores, &labels, 0).unwrap();
        for w in curve.points.windows(2) {
            assert!(w[1].0 >= w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
        assert!(matches!(
            roc_curve_ovr(&scores, &[0; 6], 0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn diagonal_curve_has_half_area() {
        let curve = CurvePoints {
            points: vec![(0.0, 0.0), (1.0, 1.0)],
            thresholds: vec![f64::INFINITY, 0.0],
        };
        assert_eq!(auc_trapezoid(&curve).unwrap(), 0.5);

        let bad = CurvePoints {
            points: vec![(0.5, 0.0), (0.2, 1.0)],
            thresholds: vec![1.0, 0.0],
        };
        assert!(matches!(auc_trapezoid(&bad), Err(Error::Input(_))));
    }

    /// O(n^2) pairwise Mann-Whitney oracle with ties counted half.
    fn pairwise_auc(scores: &[f64], positive: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &p) in positive.iter().enumerate() {
            if !p {
                continue;
            }
            for (j, &q) in positive.iter().enumerate() {
                if q {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn trapezoid_equals_mann_whitney_with_ties() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for _ in 0..50 {
            let n = rng.gen_range(4..60);
            // Quantized scores force ties.
            let raw: Vec<f32> = (0..n).map(|_| rng.gen_range(0..7) as f32 / 6.0).collect();
            let mut labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            labels[0] = 0;
            labels[1] = 1;
            let curve = roc_curve_ovr(&ovr_scores(&raw), &labels, 0).unwrap();
            let auc = auc_trapezoid(&curve).unwrap();
            let positive: Vec<bool> = labels.iter().map(|&l| l == 0).collect();
            let oracle = pairwise_auc(&raw.iter().map(|&v| v as f64).collect::<Vec<_>>(), &positive);
            assert!((auc - oracle).abs() < 1e-9, "auc {auc} vs oracle {oracle}");
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let raw: Vec<f32> = (0..40).map(|_| rng.gen_range(0.0..1.0)).collect();
        let labels: Vec<usize> = (0..40).map(|i| (i % 2) as usize).collect();
        let auc = auc_trapezoid(&roc_curve_ovr(&ovr_scores(&raw), &labels, 0).unwrap()).unwrap();
        let warped: Vec<f32> = raw.iter().map(|&v| (3.0 * v).exp() / 30.0).collect();
        let auc2 = auc_trapezoid(&roc_curve_ovr(&ovr_scores(&warped), &labels, 0).unwrap()).unwrap();
        assert_eq!(auc, auc2);
    }

    #[test]
    fn shuffled_labels_give_chance_auc() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let raw: Vec<f32> = (0..1000).map(|_| rng.gen_range(0.0..1.0)).collect();
        let labels: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..2)).collect();
        let auc = auc_trapezoid(&roc_curve_ovr(&ovr_scores(&raw), &labels, 0).unwrap()).unwrap();
        assert!((auc - 0.5).abs() < 0.1, "null AUC drifted to {auc}");
    }

    #[test]
    fn ap_perfect_ranking_is_one() {
        let scores = ovr_scores(&[0.9, 0.8, 0.3, 0.2]);
        let curve = pr_curve_ovr(&scores, &[0, 0, 1, 1], 0).unwrap();
        assert_eq!(average_precision(&curve), 1.0);
    }

    #[test]
    fn ap_step_summation_hand_value() {
        // Sweep: P=1 at R=0.5, then P=2/3 at R=1 -> AP = 0.5 + 0.5*(2/3) = 5/6.
        let scores = ovr_scores(&[0.9, 0.6, 0.4, 0.2]);
        let curve = pr_curve_ovr(&scores, &[0, 1, 0, 1], 0).unwrap();
        let ap = average_precision(&curve);
        assert!((ap - (0.5 + 0.5 * (2.0 / 3.0))).abs() < 1e-15);
        assert!((ap - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn ap_single_positive_ranked_last() {
        let scores = ovr_scores(&[0.9, 0.6, 0.4, 0.2]);
        let curve = pr_curve_ovr(&scores, &[1, 1, 1, 0], 0).unwrap();
        assert_eq!(average_precision(&curve), 0.25);
    }

    #[test]
    fn pr_zero_positives_is_degenerate() {
        let scores = ovr_scores(&[0.9, 0.6]);
        assert!(matches!(
            pr_curve_ovr(&scores, &[1, 1], 0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn f1_is_between_zero_and_max_rate() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.gen_range(4..40);
            let y_true: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let y_pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let cm = confusion_matrix(&y_true, &y_pred).unwrap();
            for row in class_precision_recall_f1(&cm) {
                assert!(row.f1 >= 0.0 && row.f1 <= row.precision.max(row.recall) + 1e-12);
                if (row.f1 - 1.0).abs() < 1e-12 {
                    assert_eq!((row.precision, row.recall), (1.0, 1.0));
                }
            }
        }
    }

    #[test]
    fn report_assembles_and_renders() {
        let scores = score_tensor(&[
            [0.7, 0.1, 0.1, 0.1],
            [0.1, 0.6, 0.2, 0.1],
            [0.2, 0.1, 0.5, 0.2],
            [0.1, 0.1, 0.1, 0.7],
            [0.6, 0.2, 0.1, 0.1],
        ]);
        let y_true = [0, 1, 2, 3, 0];
        let report = class_report(&scores, &y_true).unwrap();
        assert_eq!(report.accuracy, 1.0);
        for m in &report.classes {
            assert_eq!((m.precision, m.recall, m.f1, m.auc), (1.0, 1.0, 1.0, 1.0));
            assert_eq!(m.average_precision, 1.0);
            assert!(!m.degenerate);
        }
        let text = report.to_text();
        assert!(text.contains("Cyst") && text.contains("AUC"));
        let csv = report.to_csv();
        assert!(csv.lines().count() == 1 + 4 + 1 + 1);
    }

    #[test]
    fn report_flags_missing_class_instead_of_failing() {
        let scores = score_tensor(&[
            [0.7, 0.1, 0.1, 0.1],
            [0.1, 0.6, 0.2, 0.1],
            [0.2, 0.1, 0.5, 0.2],
            [0.6, 0.2, 0.1, 0.1],
        ]);
        // No class-3 samples at all.
        let report = class_report(&scores, &[0, 1, 2, 0]).unwrap();
        assert!(report.classes[3].degenerate);
        assert_eq!(report.classes[3].auc, 0.0);
    }
}
