use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Sweeps every distinct score as a threshold, highest first. Samples that
/// share a score move together, so ties produce a diagonal segment.
pub fn roc_curve(y_true: &[u8], scores: &[f64]) -> Result<Vec<RocPoint>> {
    if y_true.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter("non-finite score".into()));
    }
    let [n_neg, n_pos] = crate::data::class_counts(y_true);
    if n_neg == 0 || n_pos == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if y_true[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
        });
    }
    let end = RocPoint { fpr: 1.0, tpr: 1.0 };
    if points.last() != Some(&end) {
        points.push(end);
    }
    Ok(points)
}

/// Trapezoidal area under a curve sorted by ascending false positive rate.
pub fn auc(points: &[RocPoint]) -> Result<f64> {
    if points.windows(2).any(|w| w[1].fpr < w[0].fpr) {
        return Err(Error::UnsortedCurve);
    }
    Ok(points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<RocPoint> {
        v.iter().map(|&(fpr, tpr)| RocPoint { fpr, tpr }).collect()
    }

    #[test]
    fn hand_sweep() {
        let curve = roc_curve(&[0, 1, 1, 0], &[0.1, 0.9, 0.8, 0.4]).unwrap();
        assert_eq!(
            curve,
            pts(&[(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)])
        );
        // Both positives outscore both negatives.
        assert_eq!(auc(&curve).unwrap(), 1.0);
    }

    #[test]
    fn tied_scores_collapse() {
        let curve = roc_curve(&[0, 1, 0, 1], &[0.3; 4]).unwrap();
        assert_eq!(curve, pts(&[(0.0, 0.0), (1.0, 1.0)]));
        assert_eq!(auc(&curve).unwrap(), 0.5);
    }

    #[test]
    fn separating_scores_pass_through_corner() {
        let curve = roc_curve(&[0, 0, 1, 1], &[0.1, 0.2, 0.7, 0.8]).unwrap();
        assert!(curve.contains(&RocPoint { fpr: 0.0, tpr: 1.0 }));
        assert_eq!(auc(&curve).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(roc_curve(&[1, 1], &[0.1, 0.2]), Err(Error::SingleClass)));
        assert!(matches!(
            auc(&pts(&[(0.0, 0.0), (0.6, 0.5), (0.4, 1.0)])),
            Err(Error::UnsortedCurve)
        ));
        assert_eq!(auc(&pts(&[(0.0, 0.0), (1.0, 1.0)])).unwrap(), 0.5);
    }
}
