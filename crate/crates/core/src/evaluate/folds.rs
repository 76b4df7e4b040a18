use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Class groups in order of first appearance, so the plan depends only on
/// how samples are grouped and not on which group is called 0 or 1.
fn groups_by_first_appearance(y: &[u8]) -> Vec<(u8, Vec<usize>)> {
    let mut groups: Vec<(u8, Vec<usize>)> = Vec::new();
    for (i, &label) in y.iter().enumerate() {
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, g)) => g.push(i),
            None => groups.push((label, vec![i])),
        }
    }
    groups
}

/// Shuffles each class with the seeded generator, then deals all classes
/// round-robin onto the folds, continuing the deal from one class to the
/// next. Each fold receives ⌊n_c/k⌋ or ⌈n_c/k⌉ samples of every class.
pub fn stratified_kfold(y: &[u8], k: usize, seed_value: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let counts = crate::data::class_counts(y);
    for (class, &count) in counts.iter().enumerate() {
        if count < k {
            return Err(Error::FoldConstruction {
                k,
                class: class as u8,
                count,
            });
        }
    }
    let mut rng = seed::rng_for(seed_value, "stratified_kfold", 0);
    let mut assignments = vec![0; y.len()];
    let mut next = 0;
    for (_, mut group) in groups_by_first_appearance(y) {
        group.shuffle(&mut rng);
        for i in group {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed: seed_value,
    })
}

/// Stratified train/validation split. Each class contributes
/// `round(fraction * n_c)` samples (at least one, never all) to validation.
/// Both index lists come back sorted.
pub fn stratified_holdout(y: &[u8], fraction: f64, seed_value: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "validation fraction must be in (0,1), got {fraction}"
        )));
    }
    let mut rng = seed::rng_for(seed_value, "stratified_holdout", 0);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (label, mut group) in groups_by_first_appearance(y) {
        if group.len() < 2 {
            return Err(Error::FoldConstruction {
                k: 2,
                class: label,
                count: group.len(),
            });
        }
        group.shuffle(&mut rng);
        let n_val = ((fraction * group.len() as f64).round() as usize).clamp(1, group.len() - 1);
        val.extend_from_slice(&group[..n_val]);
        train.extend_from_slice(&group[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}
