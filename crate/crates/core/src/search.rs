//! Candidate retrieval for one query: the k-th smallest maxdist of a class
//! and the set of objects whose mindist falls within a radius.

use crate::object::Dataset;
use crate::support::{maxdist_unchecked, mindist_unchecked, SupportBall};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruneStats {
    /// Objects whose exact bound was computed.
    pub evaluated: usize,
    /// Objects skipped on a pivot lower bound alone.
    pub pruned: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KthMaxdist {
    pub radius: f64,
    /// The `k` members attaining the smallest maxdist values, nearest first.
    pub witnesses: Vec<usize>,
    pub stats: PruneStats,
}

pub trait CandidateSearch: Sync {
    /// k-th smallest `maxdist(q, x)` over `members`, or `None` when there are
    /// fewer than `k` members.
    fn kth_maxdist(
        &self,
        dataset: &Dataset,
        q: &SupportBall,
        members: &[usize],
        k: usize,
    ) -> Option<KthMaxdist>;

    /// Members with `mindist(q, x) <= r_max`, in `members` order.
    fn within_mindist(
        &self,
        dataset: &Dataset,
        q: &SupportBall,
        members: &[usize],
        r_max: f64,
    ) -> (Vec<usize>, PruneStats);
}

/// Bounded list of the `k` smallest `(value, index)` pairs, ties by index.
#[derive(Debug)]
pub(crate) struct KBest {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl KBest {
    pub(crate) fn new(k: usize) -> Self {
        KBest { k, items: Vec::with_capacity(k + 1) }
    }

    /// Current k-th value, infinite until `k` items are held.
    pub(crate) fn threshold(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].0
        }
    }

    pub(crate) fn offer(&mut self, value: f64, index: usize) {
        if self.items.len() == self.k && value >= self.threshold() {
            return;
        }
        let pos = self.items.partition_point(|&(v, i)| (v, i) < (value, index));
        self.items.insert(pos, (value, index));
        self.items.truncate(self.k);
    }

    pub(crate) fn finish(self, stats: PruneStats) -> Option<KthMaxdist> {
        if self.k == 0 || self.items.len() < self.k {
            return None;
        }
        Some(KthMaxdist {
            radius: self.items[self.k - 1].0,
            witnesses: self.items.into_iter().map(|(_, i)| i).collect(),
            stats,
        })
    }
}

/// Exhaustive scan; the reference every index must agree with.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearScan;

impl CandidateSearch for LinearScan {
    fn kth_maxdist(
        &self,
        dataset: &Dataset,
        q: &SupportBall,
        members: &[usize],
        k: usize,
    ) -> Option<KthMaxdist> {
        let mut best = KBest::new(k);
        for &i in members {
            best.offer(maxdist_unchecked(q, dataset.object(i).support()), i);
        }
        best.finish(PruneStats { evaluated: members.len(), pruned: 0 })
    }

    fn within_mindist(
        &self,
        dataset: &Dataset,
        q: &SupportBall,
        members: &[usize],
        r_max: f64,
    ) -> (Vec<usize>, PruneStats) {
        let found = members
            .iter()
            .copied()
            .filter(|&i| mindist_unchecked(q, dataset.object(i).support()) <= r_max)
            .collect();
        (found, PruneStats { evaluated: members.len(), pruned: 0 })
    }
}
