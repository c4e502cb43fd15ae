use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require_both_classes, ForestParams, LearnError};
use crate::corpus::GenderLabel;
use crate::features::{FeatureMatrix, SparseVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    Leaf { label: GenderLabel },
    /// Rows with `x[feature] >= threshold` go to `at_or_above`.
    Split { feature: usize, threshold: f64, below: usize, at_or_above: usize },
}

/// Binary tree stored as a node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub dim: usize,
    pub nodes: Vec<Node>,
}

fn majority(counts: [usize; 2]) -> GenderLabel {
    if counts[0] >= counts[1] {
        GenderLabel::Male
    } else {
        GenderLabel::Female
    }
}

/// n·gini = n − (m² + f²)/n; summing over both sides gives the weighted
/// impurity scaled by the node size.
fn weighted_gini(counts: [usize; 2]) -> f64 {
    let n = counts[0] + counts[1];
    if n == 0 {
        return 0.0;
    }
    let (m, f) = (counts[0] as f64, counts[1] as f64);
    n as f64 - (m * m + f * f) / n as f64
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Best threshold on one feature, or `None` when the feature is constant
/// across `values` (the non-zero entries) plus the implicit zeros.
fn best_threshold(values: &mut [(f64, GenderLabel)], node_counts: [usize; 2]) -> Option<(f64, f64)> {
    let mut zeros = node_counts;
    for (_, label) in values.iter() {
        zeros[label.index()] -= 1;
    }
    let mut groups: Vec<(f64, [usize; 2])> = Vec::new();
    if zeros[0] + zeros[1] > 0 {
        groups.push((0.0, zeros));
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut last: Option<f64> = None;
    for &(v, label) in values.iter() {
        if last != Some(v) {
            groups.push((v, [0, 0]));
            last = Some(v);
        }
        groups.last_mut().expect("group just pushed").1[label.index()] += 1;
    }
    if groups.len() < 2 {
        return None;
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut below = [0usize, 0];
    let mut best: Option<(f64, f64)> = None;
    for w in 0..groups.len() - 1 {
        below[0] += groups[w].1[0];
        below[1] += groups[w].1[1];
        let above = [node_counts[0] - below[0], node_counts[1] - below[1]];
        let impurity = weighted_gini(below) + weighted_gini(above);
        if best.is_none_or(|(_, b)| impurity < b) {
            best = Some((groups[w + 1].0, impurity));
        }
    }
    best
}

struct Builder<'a> {
    m: &'a FeatureMatrix,
    max_depth: Option<usize>,
    mtry: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn grow(&mut self, rows: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let mut counts = [0usize, 0];
        for &r in rows {
            counts[self.m.labels[r].index()] += 1;
        }
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { label: majority(counts) });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || self.max_depth.is_some_and(|d| depth >= d) {
            return at;
        }

        let mut columns: HashMap<usize, Vec<(f64, GenderLabel)>> = HashMap::new();
        for &r in rows {
            for (j, v) in self.m.rows[r].iter() {
                columns.entry(j).or_default().push((v, self.m.labels[r]));
            }
        }
        let mut candidates: Vec<usize> = columns.keys().copied().collect();
        candidates.sort_unstable();
        candidates.shuffle(rng);

        let mut best: Option<Split> = None;
        let mut tried = 0;
        for feature in candidates {
            if tried >= self.mtry {
                break;
            }
            let values = columns.get_mut(&feature).expect("candidate has a column");
            let Some((threshold, impurity)) = best_threshold(values, counts) else {
                continue;
            };
            tried += 1;
            let better = match &best {
                None => true,
                Some(b) => impurity < b.impurity || (impurity == b.impurity && feature < b.feature),
            };
            if better {
                best = Some(Split { feature, threshold, impurity });
            }
        }
        let Some(split) = best else {
            return at;
        };

        let (hi, lo): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.m.rows[r].get(split.feature) >= split.threshold);
        let below = self.grow(&lo, depth + 1, rng);
        let at_or_above = self.grow(&hi, depth + 1, rng);
        self.nodes[at] = Node::Split { feature: split.feature, threshold: split.threshold, below, at_or_above };
        at
    }
}

impl DecisionTree {
    /// Grows a tree on `rows` of `m` (repeats allowed), examining up to
    /// `mtry` non-constant features per node in an order drawn from `rng`.
    /// Impurity ties go to the lower feature index.
    pub fn fit(
        m: &FeatureMatrix,
        rows: &[usize],
        max_depth: Option<usize>,
        mtry: usize,
        rng: &mut ChaCha8Rng,
    ) -> DecisionTree {
        let mut builder = Builder { m, max_depth, mtry: mtry.max(1), nodes: Vec::new() };
        builder.grow(rows, 0, rng);
        DecisionTree { dim: m.dim(), nodes: builder.nodes }
    }

    pub fn predict(&self, x: &SparseVector) -> GenderLabel {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { label } => return label,
                Node::Split { feature, threshold, below, at_or_above } => {
                    at = if x.get(feature) >= threshold { at_or_above } else { below };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { below, at_or_above, .. } => 1 + walk(nodes, below).max(walk(nodes, at_or_above)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub dim: usize,
    pub params: ForestParams,
    pub trees: Vec<DecisionTree>,
}

pub fn train_random_forest(m: &FeatureMatrix, params: &ForestParams) -> Result<ForestModel, LearnError> {
    require_both_classes(m)?;
    let mtry = params.mtry.resolve(m.dim());
    if mtry > m.dim().max(1) {
        return Err(LearnError::InvalidHyperparameter(format!("mtry {mtry} exceeds dimension {}", m.dim())));
    }
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let seeds: Vec<u64> = (0..params.trees).map(|_| master.random()).collect();
    let n = m.len();
    let trees = seeds
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<usize> =
                if params.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
            DecisionTree::fit(m, &rows, params.max_depth, mtry, &mut rng)
        })
        .collect();
    Ok(ForestModel { dim: m.dim(), params: *params, trees })
}

impl ForestModel {
    /// Majority vote; ties go to male.
    pub fn predict(&self, x: &SparseVector) -> Result<GenderLabel, LearnError> {
        if x.dim() != self.dim {
            return Err(LearnError::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        let mut votes = [0usize, 0];
        for tree in &self.trees {
            votes[tree.predict(x).index()] += 1;
        }
        Ok(majority(votes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::Mtry;
    use GenderLabel::{Female, Male};

    fn matrix(rows: &[Vec<f64>], labels: &[GenderLabel]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows[0].len(), rows.iter().map(|r| SparseVector::from_dense(r)).collect(), labels.to_vec())
            .unwrap()
    }

    fn params(trees: usize) -> ForestParams {
        ForestParams { trees, max_depth: None, mtry: Mtry::All, bootstrap: false, seed: 1 }
    }

    #[test]
    fn gini_by_hand() {
        // 4 male / 4 female split into {3m,1f} and {1m,3f}: 2·(4 − 10/4) = 3
        assert_eq!(weighted_gini([3, 1]) + weighted_gini([1, 3]), 3.0);
        assert_eq!(weighted_gini([5, 0]), 0.0);
    }

    #[test]
    fn separating_feature_is_the_root() {
        let labels = [Male, Male, Male, Female, Female, Female];
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![(i % 2) as f64, if labels[i] == Male { 1.0 } else { 0.0 }, ((i * 5) % 3) as f64])
            .collect();
        let m = matrix(&rows, &labels);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = DecisionTree::fit(&m, &(0..6).collect::<Vec<_>>(), Some(1), 3, &mut rng);
        assert!(matches!(tree.nodes[0], Node::Split { feature: 1, threshold: 1.0, .. }));
        assert_eq!(tree.depth(), 1);
        for (x, y) in m.rows.iter().zip(&labels) {
            assert_eq!(tree.predict(x), *y);
        }
    }

    #[test]
    fn identical_rows_give_single_leaves() {
        let rows = vec![vec![1.0, 2.0]; 5];
        let m = matrix(&rows, &[Female, Male, Female, Female, Male]);
        let forest = train_random_forest(&m, &ForestParams { trees: 9, bootstrap: true, ..params(9) }).unwrap();
        let majority_share: usize = forest
            .trees
            .iter()
            .map(|t| {
                assert_eq!(t.nodes.len(), 1);
                usize::from(matches!(t.nodes[0], Node::Leaf { label: Female }))
            })
            .sum();
        assert!(majority_share > 0);
        let unsampled = train_random_forest(&m, &params(3)).unwrap();
        assert!(unsampled.trees.iter().all(|t| t.nodes == vec![Node::Leaf { label: Female }]));
    }

    #[test]
    fn xor_needs_a_zero_gain_split() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let m = matrix(&rows, &[Male, Male, Female, Female]);
        let forest = train_random_forest(&m, &params(1)).unwrap();
        for (x, y) in m.rows.iter().zip(&m.labels) {
            assert_eq!(forest.predict(x).unwrap(), *y);
        }
    }

    #[test]
    fn single_unsampled_tree_equals_direct_build() {
        let rows: Vec<Vec<f64>> =
            (0..40).map(|i| vec![(i % 3) as f64, ((i * 7) % 5) as f64, ((i * 11) % 4) as f64, (i % 2) as f64]).collect();
        let labels: Vec<GenderLabel> = (0..40).map(|i| if (i * 7) % 5 + i % 2 > 2 { Male } else { Female }).collect();
        let m = matrix(&rows, &labels);
        for seed in 0..4 {
            let forest = train_random_forest(&m, &ForestParams { seed, ..params(1) }).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31));
            let direct = DecisionTree::fit(&m, &(0..40).collect::<Vec<_>>(), None, 4, &mut rng);
            assert_eq!(forest.trees[0], direct);
        }
    }

    #[test]
    fn depth_limit_is_respected() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| (0..6).map(|b| ((i >> b) & 1) as f64).collect()).collect();
        let labels: Vec<GenderLabel> = (0..64).map(|i: u32| if i.count_ones().is_multiple_of(2) { Male } else { Female }).collect();
        let m = matrix(&rows, &labels);
        for d in 1..4 {
            let f = train_random_forest(&m, &ForestParams { max_depth: Some(d), ..params(2) }).unwrap();
            assert!(f.trees.iter().all(|t| t.depth() <= d));
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 4) as f64, ((i * 3) % 7) as f64, (i % 5) as f64]).collect();
        let labels: Vec<GenderLabel> = (0..30).map(|i| if i % 4 < 2 { Male } else { Female }).collect();
        let m = matrix(&rows, &labels);
        let p = ForestParams { trees: 15, mtry: Mtry::Sqrt, bootstrap: true, seed: 99, max_depth: None };
        let a = train_random_forest(&m, &p).unwrap();
        let b = train_random_forest(&m, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = train_random_forest(&m, &ForestParams { seed: 100, ..p }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn mtry_above_dimension_rejected() {
        let m = matrix(&[vec![1.0], vec![0.0]], &[Male, Female]);
        let p = ForestParams { mtry: Mtry::Fixed(2), ..params(1) };
        assert!(matches!(train_random_forest(&m, &p), Err(LearnError::InvalidHyperparameter(_))));
    }
}
