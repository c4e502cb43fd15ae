use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use super::LearnError;
use crate::features::SparseVector;

/// exp(−γ‖x−y‖²)
pub fn rbf_kernel(x: &SparseVector, y: &SparseVector, gamma: f64) -> Result<f64, LearnError> {
    if x.dim() != y.dim() {
        return Err(LearnError::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    Ok((-gamma * x.squared_distance(y)).exp())
}

/// Symmetric pairwise squared distances, stored as a packed lower triangle.
/// Independent of γ, so one matrix serves every grid candidate and every
/// fold carved out of the same rows.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    packed: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: &[SparseVector]) -> Self {
        let n = rows.len();
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                packed.push(if i == j { 0.0 } else { rows[i].squared_distance(&rows[j]) });
            }
        }
        DistanceMatrix { n, packed }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.packed[hi * (hi + 1) / 2 + lo]
    }
}

/// Full Gram matrices are kept up to this many rows; beyond it rows are
/// computed on demand and held in an LRU cache.
pub const FULL_GRAM_LIMIT: usize = 5000;
const LRU_ROWS: usize = 1024;

enum Source<'a> {
    Vectors(&'a [SparseVector]),
    Distances { matrix: &'a DistanceMatrix, rows: &'a [usize] },
}

impl Source<'_> {
    fn len(&self) -> usize {
        match self {
            Source::Vectors(v) => v.len(),
            Source::Distances { rows, .. } => rows.len(),
        }
    }

    fn sq_dist(&self, i: usize, j: usize) -> f64 {
        match self {
            Source::Vectors(v) => v[i].squared_distance(&v[j]),
            Source::Distances { matrix, rows } => matrix.get(rows[i], rows[j]),
        }
    }
}

/// RBF kernel rows for the SMO solver.
pub struct KernelCache<'a> {
    source: Source<'a>,
    gamma: f64,
    full: Option<Vec<Arc<Vec<f64>>>>,
    lru: HashMap<usize, Arc<Vec<f64>>>,
    order: VecDeque<usize>,
}

impl<'a> KernelCache<'a> {
    pub fn from_vectors(rows: &'a [SparseVector], gamma: f64) -> Self {
        KernelCache::build(Source::Vectors(rows), gamma, FULL_GRAM_LIMIT)
    }

    /// Kernel over `rows` (indices into `matrix`).
    pub fn from_distances(matrix: &'a DistanceMatrix, rows: &'a [usize], gamma: f64) -> Self {
        KernelCache::build(Source::Distances { matrix, rows }, gamma, FULL_GRAM_LIMIT)
    }

    fn build(source: Source<'a>, gamma: f64, full_limit: usize) -> Self {
        let mut cache = KernelCache { source, gamma, full: None, lru: HashMap::new(), order: VecDeque::new() };
        let n = cache.source.len();
        if n <= full_limit {
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                rows[i][i] = 1.0;
                for j in 0..i {
                    let k = (-gamma * cache.source.sq_dist(i, j)).exp();
                    rows[i][j] = k;
                    rows[j][i] = k;
                }
            }
            cache.full = Some(rows.into_iter().map(Arc::new).collect());
        }
        cache
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&mut self, i: usize) -> Arc<Vec<f64>> {
        if let Some(full) = &self.full {
            return Arc::clone(&full[i]);
        }
        if let Some(row) = self.lru.get(&i) {
            let row = Arc::clone(row);
            self.order.retain(|&r| r != i);
            self.order.push_back(i);
            return row;
        }
        let n = self.len();
        let row: Arc<Vec<f64>> = Arc::new((0..n).map(|j| (-self.gamma * self.source.sq_dist(i, j)).exp()).collect());
        if self.lru.len() >= LRU_ROWS {
            if let Some(old) = self.order.pop_front() {
                self.lru.remove(&old);
            }
        }
        self.lru.insert(i, Arc::clone(&row));
        self.order.push_back(i);
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vectors_give_one() {
        let x = SparseVector::from_dense(&[1.0, 0.0, 2.0]);
        assert_eq!(rbf_kernel(&x, &x, 0.7).unwrap(), 1.0);
    }

    #[test]
    fn unit_distance() {
        let x = SparseVector::from_dense(&[1.0, 0.0]);
        let y = SparseVector::from_dense(&[0.0, 0.0]);
        let k = rbf_kernel(&x, &y, 1.0).unwrap();
        assert!((k - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn mismatched_dimensions() {
        let x = SparseVector::zeros(2);
        let y = SparseVector::zeros(3);
        assert!(matches!(rbf_kernel(&x, &y, 1.0), Err(LearnError::DimensionMismatch { .. })));
    }

    #[test]
    fn cache_sources_agree() {
        let rows: Vec<SparseVector> =
            (0..6).map(|i| SparseVector::from_dense(&[i as f64, (i % 2) as f64, 0.5])).collect();
        let d = DistanceMatrix::new(&rows);
        let picked = [4usize, 1, 5];
        let sub: Vec<SparseVector> = picked.iter().map(|&i| rows[i].clone()).collect();
        let mut a = KernelCache::from_vectors(&sub, 0.3);
        let mut b = KernelCache::from_distances(&d, &picked, 0.3);
        for i in 0..3 {
            assert_eq!(a.row(i), b.row(i));
        }
        let mut lazy = KernelCache::build(Source::Vectors(&sub), 0.3, 0);
        assert!(lazy.full.is_none());
        for i in [2, 0, 2, 1] {
            assert_eq!(lazy.row(i), a.row(i));
        }
    }
}
