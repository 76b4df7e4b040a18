//! CART decision tree with Gini impurity.
//!
//! Training sorts each candidate feature at every node, so building a tree
//! costs O(d · n log n) per level; prediction is O(depth) per row.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DtParams {
    /// `None` grows until purity.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for DtParams {
    fn default() -> Self {
        DtParams {
            max_depth: None,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

impl DtParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::InvalidParameter(format!(
                "min_samples_split must be at least 2, got {}",
                self.min_samples_split
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// samples of class 0 and class 1 that reached this leaf
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn proba(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { counts } => return counts[1] as f64 / (counts[0] + counts[1]) as f64,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub root: Node,
}

impl DecisionTree {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.n_features)?;
        Ok(x.rows().map(|r| self.root.proba(r)).collect())
    }
}

pub fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

/// Candidate features examined at each node.
pub(crate) enum FeatureSampling<'a> {
    All,
    /// draw this many features per split without replacement
    Subset {
        size: usize,
        rng: &'a mut Rng,
    },
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    params: DtParams,
    sampling: FeatureSampling<'a>,
}

struct BestSplit {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; 2] {
        let ones = idx.iter().filter(|&&i| self.y[i] == 1).count();
        [idx.len() - ones, ones]
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.x.n_cols();
        match &mut self.sampling {
            FeatureSampling::All => (0..d).collect(),
            FeatureSampling::Subset { size, rng } => {
                let mut f = sample(*rng, d, (*size).min(d)).into_vec();
                f.sort_unstable();
                f
            }
        }
    }

    /// Lowest weighted Gini over the candidate features; earlier features
    /// and lower thresholds win ties.
    fn best_split(&mut self, idx: &[usize], total: [usize; 2]) -> Option<BestSplit> {
        let n = idx.len() as f64;
        let mut best: Option<BestSplit> = None;
        let mut order = idx.to_vec();
        for feature in self.candidate_features() {
            order.sort_by(|&a, &b| self.x.get(a, feature).total_cmp(&self.x.get(b, feature)));
            let mut left = [0usize; 2];
            for k in 0..order.len() - 1 {
                left[self.y[order[k]] as usize] += 1;
                let v = self.x.get(order[k], feature);
                let next = self.x.get(order[k + 1], feature);
                if v == next {
                    continue;
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let nl = (k + 1) as f64;
                let impurity = (nl * gini(left) + (n - nl) * gini(right)) / n;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    best = Some(BestSplit {
                        impurity,
                        feature,
                        threshold: v + (next - v) / 2.0,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> Node {
        let counts = self.counts(&idx);
        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_reached = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_reached || idx.len() < self.params.min_samples_split {
            return Node::Leaf { counts };
        }
        let Some(split) = self.best_split(&idx, counts) else {
            return Node::Leaf { counts };
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.x.get(i, split.feature) <= split.threshold);
        Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }
}

pub(crate) fn build_tree(
    x: &Matrix,
    y: &[u8],
    rows: Vec<usize>,
    params: DtParams,
    sampling: FeatureSampling<'_>,
) -> Result<DecisionTree> {
    params.validate()?;
    if rows.is_empty() || x.n_cols() == 0 {
        return Err(Error::EmptyInput);
    }
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let mut builder = Builder { x, y, params, sampling };
    let root = builder.grow(rows, 0);
    Ok(DecisionTree {
        n_features: x.n_cols(),
        root,
    })
}

pub fn fit(x: &Matrix, y: &[u8], params: &DtParams) -> Result<DecisionTree> {
    build_tree(x, y, (0..x.n_rows()).collect(), *params, FeatureSampling::All)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn xor() -> (Matrix, Vec<u8>) {
        (
            Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap(),
            vec![0, 1, 1, 0],
        )
    }

    #[test]
    fn gini_values() {
        assert_abs_diff_eq!(gini([5, 5]), 0.5);
        assert_eq!(gini([4, 0]), 0.0);
        assert_eq!(gini([0, 3]), 0.0);
    }

    #[test]
    fn xor_needs_depth_two() {
        let (x, y) = xor();
        let deep = fit(
            &x,
            &y,
            &DtParams {
                max_depth: Some(2),
                ..DtParams::default()
            },
        )
        .unwrap();
        assert_eq!(deep.predict_proba(&x).unwrap(), vec![0.0, 1.0, 1.0, 0.0]);
        // First split ties on every candidate: feature 0, threshold 0.5.
        match &deep.root {
            Node::Split { feature, threshold, .. } => assert_eq!((*feature, *threshold), (0, 0.5)),
            _ => panic!("expected a split"),
        }
        let stump = fit(
            &x,
            &y,
            &DtParams {
                max_depth: Some(1),
                ..DtParams::default()
            },
        )
        .unwrap();
        assert_eq!(stump.predict_proba(&x).unwrap(), vec![0.5; 4]);
    }

    #[test]
    fn leaf_fraction() {
        // Identical rows cannot be split, leaving one mixed leaf.
        let x = Matrix::new(4, 1, vec![1.0; 4]).unwrap();
        let t = fit(&x, &[0, 0, 0, 1], &DtParams::default()).unwrap();
        assert_eq!(t.root, Node::Leaf { counts: [3, 1] });
        assert_eq!(t.predict_proba(&x).unwrap()[0], 0.25);
    }

    #[test]
    fn min_samples_split_stops_growth() {
        let (x, y) = xor();
        let t = fit(
            &x,
            &y,
            &DtParams {
                min_samples_split: 5,
                ..DtParams::default()
            },
        )
        .unwrap();
        assert_eq!(t.root.n_leaves(), 1);
        assert!(fit(
            &x,
            &y,
            &DtParams {
                min_samples_split: 1,
                ..DtParams::default()
            }
        )
        .is_err());
    }

    #[test]
    fn empty_and_mismatch() {
        assert!(matches!(
            fit(&Matrix::zeros(0, 2), &[], &DtParams::default()),
            Err(Error::EmptyInput)
        ));
        let (x, y) = xor();
        let t = fit(&x, &y, &DtParams::default()).unwrap();
        assert!(t.predict_proba(&Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn unlimited_depth_fits_training_data() {
        use rand::Rng;
        let mut rng = crate::seed::rng(3);
        let rows: Vec<[f64; 3]> = (0..60).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        let y: Vec<u8> = (0..60).map(|_| rng.random_range(0..2)).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let t = fit(&x, &y, &DtParams::default()).unwrap();
        let pred: Vec<u8> = t.predict_proba(&x).unwrap().iter().map(|&p| (p >= 0.5) as u8).collect();
        assert_eq!(pred, y);
    }
}
