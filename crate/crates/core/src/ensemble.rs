//! Weighted soft voting over DT, RF, KNN and MLP, and exhaustive grid
//! search over the weight vector.

use serde::{Deserialize, Serialize};

use crate::classifiers::{predict_labels, TrainedModel};
use crate::error::{Error, Result};
use crate::evaluate::metrics::{confusion, metrics_from_confusion};
use crate::matrix::Matrix;
use crate::par;

/// Non-negative weights in the order DT, RF, KNN, MLP; not all zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct EnsembleWeights([f64; 4]);

impl EnsembleWeights {
    pub const EQUAL: EnsembleWeights = EnsembleWeights([0.25; 4]);

    pub fn new(weights: [f64; 4]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weights must be finite and non-negative, got {weights:?}"
            )));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::ZeroWeights);
        }
        Ok(EnsembleWeights(weights))
    }

    pub fn values(&self) -> [f64; 4] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl TryFrom<[f64; 4]> for EnsembleWeights {
    type Error = Error;

    fn try_from(w: [f64; 4]) -> Result<Self> {
        EnsembleWeights::new(w)
    }
}

impl From<EnsembleWeights> for [f64; 4] {
    fn from(w: EnsembleWeights) -> Self {
        w.0
    }
}

pub fn normalize_weights(weights: [f64; 4]) -> Result<[f64; 4]> {
    let w = EnsembleWeights::new(weights)?;
    let s = w.sum();
    Ok(w.0.map(|v| v / s))
}

/// `Σ wᵢ pᵢ(x) / Σ wᵢ` over precomputed base probabilities.
pub fn combine(base: &[Vec<f64>], weights: &EnsembleWeights) -> Result<Vec<f64>> {
    if base.len() != 4 {
        return Err(Error::LengthMismatch {
            left: base.len(),
            right: 4,
        });
    }
    let n = base[0].len();
    if let Some(p) = base.iter().find(|p| p.len() != n) {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: n,
        });
    }
    let total = weights.sum();
    Ok((0..n)
        .map(|i| base.iter().zip(weights.0).map(|(p, w)| w * p[i]).sum::<f64>() / total)
        .collect())
}

pub fn base_probabilities(models: &[TrainedModel], x: &Matrix) -> Result<Vec<Vec<f64>>> {
    models.iter().map(|m| m.predict_proba(x)).collect()
}

pub fn ensemble_predict_proba(models: &[TrainedModel], weights: &EnsembleWeights, x: &Matrix) -> Result<Vec<f64>> {
    combine(&base_probabilities(models, x)?, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    Accuracy,
    #[default]
    MacroF1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightGrid {
    /// Candidate values for DT, RF, KNN, MLP.
    pub candidates: [Vec<f64>; 4],
    pub metric: SelectionMetric,
}

impl Default for WeightGrid {
    fn default() -> Self {
        WeightGrid::uniform(vec![0.0, 0.25, 0.5, 0.75, 1.0], SelectionMetric::MacroF1)
    }
}

impl WeightGrid {
    pub fn uniform(values: Vec<f64>, metric: SelectionMetric) -> Self {
        WeightGrid {
            candidates: [values.clone(), values.clone(), values.clone(), values],
            metric,
        }
    }

    /// Every combination except the all-zero one, in lexicographic order
    /// of candidate positions.
    pub fn combinations(&self) -> Result<Vec<EnsembleWeights>> {
        for c in &self.candidates {
            if c.is_empty() {
                return Err(Error::InvalidParameter("empty weight candidate list".into()));
            }
            if c.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter(format!("invalid weight candidates {c:?}")));
            }
        }
        let [a, b, c, d] = &self.candidates;
        let mut out = Vec::with_capacity(a.len() * b.len() * c.len() * d.len());
        for &w0 in a {
            for &w1 in b {
                for &w2 in c {
                    for &w3 in d {
                        if let Ok(w) = EnsembleWeights::new([w0, w1, w2, w3]) {
                            out.push(w);
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::ZeroWeights);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub weights: EnsembleWeights,
    /// value of the selection metric
    pub metric: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: EnsembleWeights,
    pub score: f64,
    pub accuracy: f64,
    pub table: Vec<GridRow>,
}

impl GridSearchResult {
    pub fn score_of(&self, weights: &EnsembleWeights) -> Option<f64> {
        self.table.iter().find(|r| r.weights == *weights).map(|r| r.metric)
    }
}

fn lexicographic_lt(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a.iter().zip(b).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

/// Scores every grid point at threshold 0.5 on precomputed validation
/// probabilities. Winner: highest metric, then highest accuracy, then the
/// lexicographically smallest weight vector.
pub fn grid_search_on_probabilities(base: &[Vec<f64>], y_val: &[u8], grid: &WeightGrid) -> Result<GridSearchResult> {
    if y_val.is_empty() {
        return Err(Error::EmptyInput);
    }
    let combos = grid.combinations()?;
    let rows = par::try_map_indexed(combos.len(), |i| -> Result<GridRow> {
        let w = combos[i];
        let pred = predict_labels(&combine(base, &w)?, 0.5);
        let m = metrics_from_confusion(&confusion(y_val, &pred)?);
        let metric = match grid.metric {
            SelectionMetric::Accuracy => m.accuracy,
            SelectionMetric::MacroF1 => m.macro_f1,
        };
        Ok(GridRow {
            weights: w,
            metric,
            accuracy: m.accuracy,
        })
    })?;
    let mut best = rows[0];
    for r in &rows[1..] {
        let better = r.metric > best.metric
            || (r.metric == best.metric
                && (r.accuracy > best.accuracy
                    || (r.accuracy == best.accuracy && lexicographic_lt(&r.weights.0, &best.weights.0))));
        if better {
            best = *r;
        }
    }
    Ok(GridSearchResult {
        best: best.weights,
        score: best.metric,
        accuracy: best.accuracy,
        table: rows,
    })
}

pub fn grid_search_weights(
    models: &[TrainedModel],
    x_val: &Matrix,
    y_val: &[u8],
    grid: &WeightGrid,
) -> Result<GridSearchResult> {
    if x_val.is_empty() {
        return Err(Error::EmptyInput);
    }
    let base = base_probabilities(models, x_val)?;
    grid_search_on_probabilities(&base, y_val, grid)
}

/// CSV with columns `w_dt,w_rf,w_knn,w_mlp,metric`.
pub fn write_grid_table<W: std::io::Write>(table: &[GridRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "w_dt,w_rf,w_knn,w_mlp,metric")?;
    for r in table {
        let [a, b, c, d] = r.weights.0;
        writeln!(out, "{a},{b},{c},{d},{}", r.metric)?;
    }
    Ok(())
}

/// Reads a grid table back as `(weights, metric)` pairs.
pub fn read_grid_table<R: std::io::Read>(input: R) -> Result<Vec<([f64; 4], f64)>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("bad grid row: {e}")))?;
        if v.len() != 5 {
            return Err(Error::InvalidParameter(format!("grid row has {} cells", v.len())));
        }
        out.push(([v[0], v[1], v[2], v[3]], v[4]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn w(v: [f64; 4]) -> EnsembleWeights {
        EnsembleWeights::new(v).unwrap()
    }

    #[test]
    fn reference_weights_example() {
        let base = vec![vec![0.9], vec![0.8], vec![0.6], vec![0.7]];
        let p = combine(&base, &w([0.25, 0.5, 0.5, 0.25])).unwrap();
        assert_abs_diff_eq!(p[0], 1.1 / 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p[0], 0.733333, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_weights() {
        let base = vec![vec![0.1, 0.7], vec![0.3, 0.2], vec![0.9, 0.4], vec![0.5, 0.5]];
        assert_eq!(combine(&base, &w([1.0, 0.0, 0.0, 0.0])).unwrap(), vec![0.1, 0.7]);
        let same = vec![vec![0.42]; 4];
        assert_abs_diff_eq!(
            combine(&same, &EnsembleWeights::EQUAL).unwrap()[0],
            0.42,
            epsilon = 1e-15
        );
        assert!(matches!(EnsembleWeights::new([0.0; 4]), Err(Error::ZeroWeights)));
        assert!(EnsembleWeights::new([-1.0, 1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn normalization() {
        let n = normalize_weights([0.25, 0.5, 0.5, 0.25]).unwrap();
        for (a, b) in n.iter().zip([1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(normalize_weights([1.0, 0.0, 0.0, 0.0]).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(normalize_weights([2.0; 4]).unwrap(), [0.25; 4]);
        assert!(normalize_weights([0.0; 4]).is_err());
    }

    #[test]
    fn default_grid_has_624_points() {
        assert_eq!(WeightGrid::default().combinations().unwrap().len(), 624);
    }

    #[test]
    fn identical_models_pick_smallest_vector() {
        let p = vec![0.2, 0.8, 0.6, 0.3];
        let base = vec![p.clone(), p.clone(), p.clone(), p];
        let r = grid_search_on_probabilities(&base, &[0, 1, 1, 0], &WeightGrid::default()).unwrap();
        assert_eq!(r.best.values(), [0.0, 0.0, 0.0, 0.25]);
        assert_eq!(r.table.len(), 624);
    }

    #[test]
    fn perfect_model_wins() {
        use rand::Rng;
        let mut rng = crate::seed::rng(12);
        let y: Vec<u8> = (0..60).map(|i| (i % 2) as u8).collect();
        let perfect: Vec<f64> = y.iter().map(|&l| if l == 1 { 0.9 } else { 0.1 }).collect();
        let noise = |rng: &mut crate::seed::Rng| (0..60).map(|_| rng.random::<f64>()).collect::<Vec<f64>>();
        let base = vec![noise(&mut rng), noise(&mut rng), perfect, noise(&mut rng)];
        let r = grid_search_on_probabilities(&base, &y, &WeightGrid::default()).unwrap();
        assert!(r.best.values()[2] > 0.0);
        assert_eq!(r.score, 1.0);
        // Exhaustive search dominates every single-model and equal-weight point.
        assert!(r.score >= r.score_of(&EnsembleWeights::EQUAL).unwrap());
        for k in 0..4 {
            let mut v = [0.0; 4];
            v[k] = 1.0;
            assert!(r.score >= r.score_of(&w(v)).unwrap());
        }
    }

    #[test]
    fn empty_validation_set() {
        let base = vec![vec![]; 4];
        assert!(matches!(
            grid_search_on_probabilities(&base, &[], &WeightGrid::default()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn grid_table_csv() {
        let table = vec![GridRow {
            weights: w([0.25, 0.5, 0.5, 0.25]),
            metric: 0.9875,
            accuracy: 0.99,
        }];
        let mut buf = Vec::new();
        write_grid_table(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("w_dt,w_rf,w_knn,w_mlp,metric\n0.25,0.5,0.5,0.25,0.9875"));
        assert_eq!(
            read_grid_table(buf.as_slice()).unwrap(),
            vec![([0.25, 0.5, 0.5, 0.25], 0.9875)]
        );
    }

    #[test]
    fn weights_serde_validates() {
        assert!(serde_json::from_str::<EnsembleWeights>("[0,0,0,0]").is_err());
        let ok: EnsembleWeights = serde_json::from_str("[0.25,0.5,0.5,0.25]").unwrap();
        assert_eq!(ok.values(), [0.25, 0.5, 0.5, 0.25]);
    }

    proptest! {
        #[test]
        fn scale_invariance_and_envelope(
            probs in prop::collection::vec(prop::array::uniform4(0.0f64..=1.0), 1..30),
            raw in prop::array::uniform4(0.0f64..5.0),
            alpha in 0.01f64..100.0,
        ) {
            prop_assume!(raw.iter().any(|&v| v > 1e-6));
            let base: Vec<Vec<f64>> = (0..4).map(|m| probs.iter().map(|p| p[m]).collect()).collect();
            let wt = w(raw);
            let scaled = w(raw.map(|v| v * alpha));
            let a = combine(&base, &wt).unwrap();
            let b = combine(&base, &scaled).unwrap();
            for (i, (u, v)) in a.iter().zip(&b).enumerate() {
                prop_assert!((u - v).abs() <= 1e-12);
                let lo = probs[i].iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = probs[i].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(*u >= lo - 1e-12 && *u <= hi + 1e-12);
            }
        }
    }
}
