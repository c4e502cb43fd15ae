use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMatrix, SparseVector};
use crate::corpus::GenderLabel;

/// Columns kept by chi-square selection, in increasing original index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMask {
    /// Column count of the matrix the mask was fit on.
    pub dim: usize,
    pub indices: Vec<usize>,
    /// Score of every original column.
    pub scores: Vec<f64>,
    /// Ids of the rows the scores were computed from.
    #[serde(skip)]
    pub fitted_on: Vec<String>,
}

impl SelectionMask {
    pub fn identity(dim: usize) -> Self {
        SelectionMask { dim, indices: (0..dim).collect(), scores: vec![0.0; dim], fitted_on: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Presence/class contingency counts for one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contingency {
    /// present ∧ male
    pub a: u64,
    /// present ∧ female
    pub b: u64,
    /// absent ∧ male
    pub c: u64,
    /// absent ∧ female
    pub d: u64,
}

impl Contingency {
    /// Zero marginals make the statistic undefined.
    pub fn is_supported(&self) -> bool {
        self.a + self.b > 0 && self.c + self.d > 0 && self.a + self.c > 0 && self.b + self.d > 0
    }

    /// N·(AD−BC)² / ((A+B)(C+D)(A+C)(B+D)), or 0 with a zero marginal.
    /// Numerator and denominator are formed exactly in integers so that equal
    /// rational scores produce equal floats.
    pub fn chi_square(&self) -> f64 {
        if !self.is_supported() {
            return 0.0;
        }
        let (a, b, c, d) = (self.a as u128, self.b as u128, self.c as u128, self.d as u128);
        let n = a + b + c + d;
        let cross = (a * d).abs_diff(b * c);
        let num = n * cross * cross;
        let den = (a + b) * (c + d) * (a + c) * (b + d);
        num as f64 / den as f64
    }
}

pub fn contingency_tables(m: &FeatureMatrix) -> Vec<Contingency> {
    let (male, female) = m.class_counts();
    let mut present = vec![[0u64; 2]; m.dim()];
    for (row, label) in m.rows.iter().zip(&m.labels) {
        for (j, v) in row.iter() {
            if v > 0.0 {
                present[j][label.index()] += 1;
            }
        }
    }
    present
        .into_iter()
        .map(|[a, b]| Contingency { a, b, c: male as u64 - a, d: female as u64 - b })
        .collect()
}

pub fn chi_square_scores(m: &FeatureMatrix) -> Vec<f64> {
    contingency_tables(m).iter().map(Contingency::chi_square).collect()
}

/// Keeps the `k` highest-scoring columns among those with a defined score;
/// equal scores prefer the lower index.
pub fn chi_square_select(m: &FeatureMatrix, k: usize) -> Result<SelectionMask, FeatureError> {
    if k == 0 {
        return Err(FeatureError::InvalidK);
    }
    if m.is_empty() {
        return Err(FeatureError::EmptyMatrix);
    }
    let (male, female) = m.class_counts();
    if male == 0 || female == 0 {
        return Err(FeatureError::SingleClass(if male == 0 { GenderLabel::Female } else { GenderLabel::Male }));
    }
    let tables = contingency_tables(m);
    let scores: Vec<f64> = tables.iter().map(Contingency::chi_square).collect();
    let mut ranked: Vec<usize> = (0..m.dim()).filter(|&j| tables[j].is_supported()).collect();
    ranked.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y)));
    ranked.truncate(k);
    ranked.sort_unstable();
    Ok(SelectionMask { dim: m.dim(), indices: ranked, scores, fitted_on: m.ids.clone() })
}

/// Projects `x` onto the mask's columns.
pub fn apply_mask(x: &SparseVector, mask: &SelectionMask) -> Result<SparseVector, FeatureError> {
    if x.dim() != mask.dim {
        return Err(FeatureError::DimensionMismatch { expected: mask.dim, found: x.dim() });
    }
    let pairs = x.iter().filter_map(|(i, v)| mask.indices.binary_search(&i).ok().map(|pos| (pos, v))).collect();
    SparseVector::from_pairs(mask.len(), pairs)
}

impl FeatureMatrix {
    pub fn select(&self, mask: &SelectionMask) -> Result<FeatureMatrix, FeatureError> {
        let rows = self.rows.iter().map(|r| apply_mask(r, mask)).collect::<Result<Vec<_>, _>>()?;
        FeatureMatrix::new(mask.len(), rows, self.labels.clone(), self.authors.clone(), self.ids.clone())
    }
}
