//! Pivot table for pruning the two candidate queries of the classifier.
//!
//! For any pivot `p`, `|d(v, p) - d(p, w)| <= d(v, w)`, so the largest such
//! gap over the pivots lower-bounds a center distance without computing it.
//! Adding the radii gives a lower bound on `maxdist`; subtracting them gives
//! one on `mindist`.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Result, UnnError};
use crate::object::Dataset;
use crate::point::{euclidean, Point};
use crate::search::{CandidateSearch, KBest, KthMaxdist, PruneStats};
use crate::support::{maxdist_unchecked, mindist_unchecked, SupportBall};

pub const DEFAULT_PIVOTS: usize = 16;

/// Shrink factor applied to pivot bounds so rounding never prunes a true candidate.
const BOUND_SHRINK: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone)]
pub struct PivotTable {
    pivots: Vec<Point>,
    /// `dists[i][j] = d(c(x_i), pivot_j)`.
    dists: Vec<Vec<f64>>,
}

impl PivotTable {
    /// Picks `m` distinct training-object centers as pivots.
    pub fn build<R: Rng + ?Sized>(dataset: &Dataset, m: usize, rng: &mut R) -> Result<Self> {
        if m > dataset.len() {
            return Err(UnnError::InvalidParams(format!(
                "{m} pivots requested from {} objects",
                dataset.len()
            )));
        }
        let pivots: Vec<Point> = sample(rng, dataset.len(), m)
            .into_iter()
            .map(|i| dataset.object(i).support().center.clone())
            .collect();
        Ok(Self::with_pivots(dataset, pivots))
    }

    pub fn with_pivots(dataset: &Dataset, pivots: Vec<Point>) -> Self {
        let dists = dataset
            .objects()
            .iter()
            .map(|o| Self::row(o.support().center.coords(), &pivots))
            .collect();
        PivotTable { pivots, dists }
    }

    fn row(center: &[f64], pivots: &[Point]) -> Vec<f64> {
        pivots.iter().map(|p| euclidean(center, p.coords())).collect()
    }

    pub fn pivots(&self) -> &[Point] {
        &self.pivots
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.dists[i]
    }

    /// Pivot lower bound on the center distance between the query and object `i`.
    pub fn center_lower_bound(&self, query_to_pivots: &[f64], i: usize) -> f64 {
        query_to_pivots
            .iter()
            .zip(&self.dists[i])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn query_row(&self, q: &SupportBall) -> Vec<f64> {
        Self::row(q.center.coords(), &self.pivots)
    }

    /// k-th smallest maxdist over `members` with pivot pruning.
    pub fn knn_maxdist_query(
        &self,
        dataset: &Dataset,
        q: &SupportBall,
        members: &[usize],
        k: usize,
    ) -> Option<KthMaxdist> {
        let qrow = self.query_row(q);
        let mut best = KBest::new(k);
        let mut stats = PruneStats::default();
        for &i in members {
            let x = dataset.object(i).support();
            let bound = self.center_lower_bound(&qrow, i) * BOUND_SHRINK + (q.radius + x.radius);
            if bound > best.threshold() {
                stats.pruned += 1;
                continue;
            }
            stats.evaluated += 1;
            best.offer(maxdist_unchecked(q, x), i);
        }
        best.finish(stats)
    }

    /// Members with `mindist(q, x) <= r_max`, with pivot pruning.
    pub fn range_mindist_query(
        &self,
        dataset: &Dataset,
        q: &SupportBall,
        members: &[usize],
        r_max: f64,
    ) -> (Vec<usize>, PruneStats) {
        let qrow = self.query_row(q);
        let mut stats = PruneStats::default();
        let mut found = Vec::new();
        for &i in members {
            let x = dataset.object(i).support();
            let bound = self.center_lower_bound(&qrow, i) * BOUND_SHRINK - (q.radius + x.radius);
            if bound > r_max {
                stats.pruned += 1;
                continue;
            }
            stats.evaluated += 1;
            if mindist_unchecked(q, x) <= r_max {
                found.push(i);
            }
        }
        (found, stats)
    }
}

impl CandidateSearch for PivotTable {
    fn kth_maxdist(
        &self,
        dataset: &Dataset,
        q: &SupportBall,
        members: &[usize],
        k: usize,
    ) -> Option<KthMaxdist> {
        self.knn_maxdist_query(dataset, q, members, k)
    }

    fn within_mindist(
        &self,
        dataset: &Dataset,
        q: &SupportBall,
        members: &[usize],
        r_max: f64,
    ) -> (Vec<usize>, PruneStats) {
        self.range_mindist_query(dataset, q, members, r_max)
    }
}
