use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::corpus::GenderLabel;

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector { dim, indices: Vec::new(), values: Vec::new() }
    }

    /// Builds from unordered pairs; duplicate indices are summed, zeros dropped.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self, FeatureError> {
        if let Some(&(i, _)) = pairs.iter().find(|(i, _)| *i >= dim) {
            return Err(FeatureError::IndexOutOfRange { index: i, dim });
        }
        pairs.sort_unstable_by_key(|(i, _)| *i);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().expect("parallel vectors") += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector { dim, indices, values };
        out.drop_zeros();
        Ok(out)
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let dim = values.len();
        let (indices, values) = values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).unzip();
        SparseVector { dim, indices, values }
    }

    fn drop_zeros(&mut self) {
        if self.values.contains(&0.0) {
            let (indices, values) =
                self.indices.iter().zip(&self.values).filter(|(_, v)| **v != 0.0).map(|(i, v)| (*i, *v)).unzip();
            self.indices = indices;
            self.values = values;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b, mut acc) = (0, 0, 0.0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    /// ‖self − other‖², computed entry by entry over the index union.
    pub fn squared_distance(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b, mut acc) = (0, 0, 0.0);
        while a < self.indices.len() || b < other.indices.len() {
            let ia = self.indices.get(a).copied().unwrap_or(usize::MAX);
            let ib = other.indices.get(b).copied().unwrap_or(usize::MAX);
            let d = match ia.cmp(&ib) {
                std::cmp::Ordering::Less => {
                    a += 1;
                    self.values[a - 1]
                }
                std::cmp::Ordering::Greater => {
                    b += 1;
                    -other.values[b - 1]
                }
                std::cmp::Ordering::Equal => {
                    a += 1;
                    b += 1;
                    self.values[a - 1] - other.values[b - 1]
                }
            };
            acc += d * d;
        }
        acc
    }

    /// `self` followed by `other`, with `other`'s indices shifted by `self.dim()`.
    pub fn concat(&self, other: &SparseVector) -> SparseVector {
        let mut indices = self.indices.clone();
        indices.extend(other.indices.iter().map(|i| i + self.dim));
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        SparseVector { dim: self.dim + other.dim, indices, values }
    }
}

/// Rows aligned with their labels, authors and tweet ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    dim: usize,
    pub rows: Vec<SparseVector>,
    pub labels: Vec<GenderLabel>,
    pub authors: Vec<String>,
    pub ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        dim: usize,
        rows: Vec<SparseVector>,
        labels: Vec<GenderLabel>,
        authors: Vec<String>,
        ids: Vec<String>,
    ) -> Result<Self, FeatureError> {
        if rows.len() != labels.len() || rows.len() != authors.len() || rows.len() != ids.len() {
            return Err(FeatureError::Misaligned);
        }
        if let Some(r) = rows.iter().find(|r| r.dim() != dim) {
            return Err(FeatureError::DimensionMismatch { expected: dim, found: r.dim() });
        }
        Ok(FeatureMatrix { dim, rows, labels, authors, ids })
    }

    /// Rows with synthetic ids and one author per row; for tests and toy problems.
    pub fn from_rows(dim: usize, rows: Vec<SparseVector>, labels: Vec<GenderLabel>) -> Result<Self, FeatureError> {
        let ids: Vec<String> = (0..rows.len()).map(|i| i.to_string()).collect();
        FeatureMatrix::new(dim, rows, labels, ids.clone(), ids)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (male, female) row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let male = self.labels.iter().filter(|l| **l == GenderLabel::Male).count();
        (male, self.labels.len() - male)
    }

    pub fn subset(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            dim: self.dim,
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            authors: rows.iter().map(|&i| self.authors[i].clone()).collect(),
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_pairs_merges_and_drops_zeros() {
        let v = SparseVector::from_pairs(5, vec![(3, 1.0), (1, 2.0), (3, 1.0), (4, 0.0)]).unwrap();
        assert_eq!(v.indices(), &[1, 3]);
        assert_eq!(v.values(), &[2.0, 2.0]);
        assert!(SparseVector::from_pairs(2, vec![(2, 1.0)]).is_err());
    }

    #[test]
    fn dense_round_trip_and_distance() {
        let a = SparseVector::from_dense(&[0.0, 1.0, 0.0, 3.0]);
        let b = SparseVector::from_dense(&[2.0, 1.0, 0.0, 0.0]);
        assert_eq!(a.dim(), 4);
        assert_eq!(a.to_dense(), vec![0.0, 1.0, 0.0, 3.0]);
        assert_eq!(a.squared_distance(&b), 4.0 + 9.0);
        assert_eq!(a.dot(&b), 1.0);
        let c = a.concat(&b);
        assert_eq!(c.dim(), 8);
        assert_eq!(c.get(4), 2.0);
        assert_eq!(c.get(3), 3.0);
    }
}
