//! The uncertain nearest neighbor (UNN) decision procedure.
//!
//! For a certain query `q` and two sides `A`, `B` of the training set the
//! classifier computes `Pr(D(q, A) < D(q, B))`, where `D(q, S)` is the
//! distance from `q` to its k-th nearest object of `S`. The computation runs
//! in five stages:
//!
//! 1. `R_max` is the smaller of the two sides' k-th smallest `maxdist`.
//! 2. Only objects with `mindist <= R_max` can influence the result.
//! 3. A side with fewer than `k` such candidates loses outright.
//! 4. Each candidate's distance distribution is tabulated on `h` slots over
//!    `[R_min, R_max]`, and per-slot class distributions `F_A`, `F_B` follow
//!    from the dynamic program in [`crate::class_cdf`].
//! 5. The integral of `dF_A * (1 - F_B)` is summed slot by slot.
//!
//! When every candidate is discrete, the distributions are step functions.
//! They are tabulated exactly at their jump radii and the sum is exact.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;

use crate::cdf::{atom_distances, exact_object_cdf_on_grid, DistanceCdf, RadiusGrid, SampledDistances};
use crate::class_cdf::DpScratch;
use crate::error::{Result, UnnError};
use crate::object::{Dataset, UncertainObject};
use crate::point::{check_dims, Point};
use crate::search::{CandidateSearch, LinearScan, PruneStats};
use crate::seed::{derive_seed, derived_rng};
use crate::support::{maxdist_unchecked, mindist_unchecked, SupportBall};

/// Cap on the dimension used for the default sample count `100 * 2^d`.
const MAX_DEFAULT_SAMPLE_DIM: usize = 16;

/// How per-object distance distributions are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CdfMode {
    /// Exact when every candidate is discrete, Monte Carlo otherwise.
    #[default]
    Auto,
    MonteCarlo,
    /// Exact only; fails on continuous candidates.
    Exact,
}

/// How a slot in which both k-th distances land is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlotRule {
    /// `sum (F_A(l) - F_A(l-1)) * (1 - (F_B(l) + F_B(l-1)) / 2)`: shared slot
    /// mass is split evenly between the sides, and the two directions sum to 1.
    #[default]
    TieSplit,
    /// `sum (F_A(l) - F_A(l-1)) * (1 - F_B(l))`: shared slot mass counts
    /// against `A`.
    RightEndpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnnParams {
    pub k: usize,
    /// Histogram slots.
    pub h: usize,
    /// Monte Carlo samples per object; `None` means `100 * 2^d`.
    pub n_samples: Option<usize>,
    /// Samples drawn from an uncertain query; `None` means the per-object count.
    pub query_samples: Option<usize>,
    pub seed: u64,
    pub cdf_mode: CdfMode,
    pub slot_rule: SlotRule,
}

impl Default for UnnParams {
    fn default() -> Self {
        UnnParams {
            k: 1,
            h: 100,
            n_samples: None,
            query_samples: None,
            seed: 0,
            cdf_mode: CdfMode::Auto,
            slot_rule: SlotRule::TieSplit,
        }
    }
}

impl UnnParams {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_h(mut self, h: usize) -> Self {
        self.h = h;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = Some(n);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cdf_mode(mut self, mode: CdfMode) -> Self {
        self.cdf_mode = mode;
        self
    }

    pub fn with_slot_rule(mut self, rule: SlotRule) -> Self {
        self.slot_rule = rule;
        self
    }

    /// `100 * 2^d`, with `d` capped at 16.
    pub fn default_samples(dim: usize) -> usize {
        100usize << dim.min(MAX_DEFAULT_SAMPLE_DIM)
    }

    pub fn samples_for(&self, dim: usize) -> usize {
        self.n_samples.unwrap_or_else(|| Self::default_samples(dim))
    }

    pub fn query_samples_for(&self, dim: usize) -> usize {
        self.query_samples.unwrap_or_else(|| self.samples_for(dim))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(UnnError::InvalidParams("k must be at least 1".into()));
        }
        if self.h < 2 {
            return Err(UnnError::InvalidParams("h must be at least 2".into()));
        }
        if self.n_samples == Some(0) || self.query_samples == Some(0) {
            return Err(UnnError::InvalidParams("sample counts must be positive".into()));
        }
        Ok(())
    }
}

/// k-th smallest `maxdist(q, x)` over `objects`; infinite when there are fewer than `k`.
pub fn radius_for_class<'a>(
    q: &SupportBall,
    objects: impl IntoIterator<Item = &'a UncertainObject>,
    k: usize,
) -> f64 {
    let mut values: Vec<f64> =
        objects.into_iter().map(|x| maxdist_unchecked(q, x.support())).collect();
    if k == 0 || values.len() < k {
        return f64::INFINITY;
    }
    values.sort_by(f64::total_cmp);
    values[k - 1]
}

/// Integration bounds and the training objects that can affect the result.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub r_min: f64,
    pub r_max: f64,
    /// k-th smallest maxdist of each side (infinite for a side smaller than k).
    pub radius_a: f64,
    pub radius_b: f64,
    /// Candidates of each side, in dataset order.
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
    pub stats: PruneStats,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.side_a.contains(&i) || self.side_b.contains(&i)
    }
}

/// Computes `R_max`, the candidate set `T^q`, and `R_min` for sides `a` and `b`.
pub fn build_candidate_set(
    q: &SupportBall,
    dataset: &Dataset,
    a: &[usize],
    b: &[usize],
    k: usize,
    search: &dyn CandidateSearch,
) -> Result<CandidateSet> {
    check_dims(dataset.dim(), q.dim())?;
    let mut stats = PruneStats::default();
    let mut side_radius = |members: &[usize]| match search.kth_maxdist(dataset, q, members, k) {
        Some(found) => {
            stats.evaluated += found.stats.evaluated;
            stats.pruned += found.stats.pruned;
            found.radius
        }
        None => f64::INFINITY,
    };
    let radius_a = side_radius(a);
    let radius_b = side_radius(b);
    let r_max = radius_a.min(radius_b);
    if !r_max.is_finite() {
        return Err(UnnError::DeficientClasses { k });
    }
    let mut collect = |members: &[usize]| {
        let (found, s) = search.within_mindist(dataset, q, members, r_max);
        stats.evaluated += s.evaluated;
        stats.pruned += s.pruned;
        found
    };
    let side_a = collect(a);
    let side_b = collect(b);
    let r_min = side_a
        .iter()
        .chain(&side_b)
        .map(|&i| mindist_unchecked(q, dataset.object(i).support()))
        .fold(f64::INFINITY, f64::min)
        .min(r_max);
    Ok(CandidateSet { r_min, r_max, radius_a, radius_b, side_a, side_b, stats })
}

/// Outcome of one two-sided comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PairProbability {
    /// `Pr(D(q, A) < D(q, B))`.
    pub prob: f64,
    /// `Pr(D(q, B) < D(q, A))` from the same tabulation.
    pub reverse: f64,
    pub candidates: CandidateSet,
    /// True when one side had fewer than `k` candidates and lost without integration.
    pub decided_early: bool,
    pub exact: bool,
}

/// Sum of `dF_a * (1 - F_b)` over the slots, with `F(0) = 0`.
pub fn nn_sum(fa: &[f64], fb: &[f64], rule: SlotRule) -> f64 {
    debug_assert_eq!(fa.len(), fb.len());
    let mut total = 0.0;
    let (mut prev_a, mut prev_b) = (0.0, 0.0);
    for (&a, &b) in fa.iter().zip(fb) {
        let survive = match rule {
            SlotRule::TieSplit => 1.0 - 0.5 * (b + prev_b),
            SlotRule::RightEndpoint => 1.0 - b,
        };
        total += (a - prev_a) * survive;
        prev_a = a;
        prev_b = b;
    }
    total.clamp(0.0, 1.0)
}

/// Per-slot `Pr(D(q, side) <= R_l)` from tabulated object distributions.
pub fn class_series(cdfs: &[&DistanceCdf], k: usize, h: usize) -> Result<Vec<f64>> {
    let mut scratch = DpScratch::default();
    let mut p = vec![0.0; cdfs.len()];
    let mut series = Vec::with_capacity(h);
    let mut prev = 0.0f64;
    for l in 1..=h {
        for (slot, cdf) in p.iter_mut().zip(cdfs) {
            *slot = cdf.at(l);
        }
        // monotone in each p_j, so rounding is the only source of decrease
        let v = scratch.eval(&p, k)?.max(prev);
        series.push(v);
        prev = v;
    }
    Ok(series)
}

/// State for evaluating one certain query point; caches each object's
/// sampled distances so that repeated comparisons reuse them.
struct QueryEval<'a> {
    q: &'a [f64],
    ball: SupportBall,
    dataset: &'a Dataset,
    params: &'a UnnParams,
    search: &'a dyn CandidateSearch,
    seed: u64,
    n: usize,
    samples: HashMap<usize, SampledDistances>,
    examined: HashSet<usize>,
}

impl<'a> QueryEval<'a> {
    fn new(
        q: &'a Point,
        dataset: &'a Dataset,
        params: &'a UnnParams,
        search: &'a dyn CandidateSearch,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        check_dims(dataset.dim(), q.dim())?;
        Ok(QueryEval {
            q: q.coords(),
            ball: SupportBall::point(q.clone()),
            dataset,
            params,
            search,
            seed,
            n: params.samples_for(dataset.dim()),
            samples: HashMap::new(),
            examined: HashSet::new(),
        })
    }

    fn tabulate(&mut self, i: usize, grid: &RadiusGrid, exact: bool) -> Result<DistanceCdf> {
        let x = self.dataset.object(i);
        self.examined.insert(i);
        if exact {
            return exact_object_cdf_on_grid(self.q, x, grid);
        }
        let (q, n, seed) = (self.q, self.n, self.seed);
        let sampled = self.samples.entry(i).or_insert_with(|| {
            let mut rng = derived_rng(seed, &[i as u64]);
            SampledDistances::draw(q, x, n, &mut rng)
        });
        Ok(sampled.tabulate(grid))
    }

    fn use_exact(&self, candidates: &CandidateSet) -> Result<bool> {
        let discrete = candidates
            .side_a
            .iter()
            .chain(&candidates.side_b)
            .all(|&i| self.dataset.object(i).pdf().is_discrete());
        match self.params.cdf_mode {
            CdfMode::Auto => Ok(discrete),
            CdfMode::MonteCarlo => Ok(false),
            CdfMode::Exact if discrete => Ok(true),
            CdfMode::Exact => Err(UnnError::NotDiscrete),
        }
    }

    fn grid(&self, r_min: f64, r_max: f64, objects: &[usize], exact: bool) -> Result<RadiusGrid> {
        if !exact {
            return RadiusGrid::uniform(r_min, r_max, self.params.h);
        }
        let mut radii = vec![r_max];
        for &i in objects {
            let d = atom_distances(self.q, self.dataset.object(i)).ok_or(UnnError::NotDiscrete)?;
            radii.extend(d.into_iter().filter(|r| *r <= r_max));
        }
        RadiusGrid::breakpoints(r_min, radii)
    }

    /// Integrates over `grid` using the given object lists for each side.
    fn integrate(
        &mut self,
        a: &[usize],
        b: &[usize],
        grid: &RadiusGrid,
        exact: bool,
    ) -> Result<(f64, f64)> {
        let cdf_a = a.iter().map(|&i| self.tabulate(i, grid, exact)).collect::<Result<Vec<_>>>()?;
        let cdf_b = b.iter().map(|&i| self.tabulate(i, grid, exact)).collect::<Result<Vec<_>>>()?;
        let k = self.params.k;
        let fa = class_series(&cdf_a.iter().collect::<Vec<_>>(), k, grid.h())?;
        let fb = class_series(&cdf_b.iter().collect::<Vec<_>>(), k, grid.h())?;
        let rule = self.params.slot_rule;
        Ok((nn_sum(&fa, &fb, rule), nn_sum(&fb, &fa, rule)))
    }

    fn pair(&mut self, a: &[usize], b: &[usize]) -> Result<PairProbability> {
        let k = self.params.k;
        let candidates = build_candidate_set(&self.ball, self.dataset, a, b, k, self.search)?;
        if candidates.side_a.len() < k || candidates.side_b.len() < k {
            let a_wins = candidates.side_b.len() < k;
            return Ok(PairProbability {
                prob: if a_wins { 1.0 } else { 0.0 },
                reverse: if a_wins { 0.0 } else { 1.0 },
                candidates,
                decided_early: true,
                exact: true,
            });
        }
        let exact = self.use_exact(&candidates)?;
        let all: Vec<usize> = candidates.side_a.iter().chain(&candidates.side_b).copied().collect();
        let grid = self.grid(candidates.r_min, candidates.r_max, &all, exact)?;
        let (prob, reverse) =
            self.integrate(&candidates.side_a, &candidates.side_b, &grid, exact)?;
        Ok(PairProbability { prob, reverse, candidates, decided_early: false, exact })
    }

    /// Same quantity without pruning: every object of both sides, integrated over `[0, r_big]`.
    fn pair_unpruned(&mut self, a: &[usize], b: &[usize], r_big: f64) -> Result<(f64, f64)> {
        let all: Vec<usize> = a.iter().chain(b).copied().collect();
        let discrete = all.iter().all(|&i| self.dataset.object(i).pdf().is_discrete());
        let exact = match self.params.cdf_mode {
            CdfMode::Auto => discrete,
            CdfMode::MonteCarlo => false,
            CdfMode::Exact if discrete => true,
            CdfMode::Exact => return Err(UnnError::NotDiscrete),
        };
        let grid = self.grid(0.0, r_big, &all, exact)?;
        self.integrate(a, b, &grid, exact)
    }
}

fn other_members(dataset: &Dataset, c: usize) -> Vec<usize> {
    (0..dataset.len()).filter(|&i| dataset.class_of(i) != c).collect()
}

/// Winning label and per-class probabilities for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub label: String,
    /// Binary: normalized nearest neighbor class probabilities summing to 1.
    /// Multiclass: one-against-all probabilities `Pr(D(q, c) < D(q, rest))`.
    pub class_probs: BTreeMap<String, f64>,
    /// Distinct training objects whose distance distributions were computed.
    pub candidates_examined: usize,
    /// The winning probability was shared with another class.
    pub tie: bool,
}

impl ClassificationResult {
    pub fn prob(&self, label: &str) -> f64 {
        self.class_probs.get(label).copied().unwrap_or(0.0)
    }

    fn from_probs(labels: &[String], probs: Vec<f64>, candidates_examined: usize) -> Self {
        let mut best = 0;
        for (j, p) in probs.iter().enumerate() {
            if *p > probs[best] {
                best = j;
            }
        }
        let tie = probs.iter().enumerate().any(|(j, p)| j != best && *p == probs[best]);
        ClassificationResult {
            label: labels[best].clone(),
            class_probs: labels.iter().cloned().zip(probs).collect(),
            candidates_examined,
            tie,
        }
    }
}

/// UNN classifier over a training set, optionally backed by an index.
#[derive(Clone, Copy)]
pub struct Classifier<'a> {
    dataset: &'a Dataset,
    params: &'a UnnParams,
    search: &'a dyn CandidateSearch,
}

impl<'a> Classifier<'a> {
    pub fn new(dataset: &'a Dataset, params: &'a UnnParams) -> Self {
        Classifier { dataset, params, search: &LinearScan }
    }

    pub fn with_search(mut self, search: &'a dyn CandidateSearch) -> Self {
        self.search = search;
        self
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    pub fn params(&self) -> &UnnParams {
        self.params
    }

    fn query_seed(&self, query_index: u64) -> u64 {
        derive_seed(self.params.seed, &[query_index])
    }

    /// `Pr(D(q, c) < D(q, c'))` with its candidate set, restricted to classes `c` and `c'`.
    pub fn pair_probability(&self, q: &Point, c: &str, c_prime: &str) -> Result<PairProbability> {
        let a = self.dataset.members(self.dataset.class_index(c)?);
        let b = self.dataset.members(self.dataset.class_index(c_prime)?);
        QueryEval::new(q, self.dataset, self.params, self.search, self.query_seed(0))?.pair(a, b)
    }

    pub fn nn_class_probability(&self, q: &Point, c: &str, c_prime: &str) -> Result<f64> {
        Ok(self.pair_probability(q, c, c_prime)?.prob)
    }

    /// The same probability computed over all objects of both classes on
    /// `[0, r_big]`, with no pruning. Returns `(Pr(c first), Pr(c' first))`.
    pub fn nn_class_probability_unpruned(
        &self,
        q: &Point,
        c: &str,
        c_prime: &str,
        r_big: f64,
    ) -> Result<(f64, f64)> {
        let a = self.dataset.members(self.dataset.class_index(c)?);
        let b = self.dataset.members(self.dataset.class_index(c_prime)?);
        QueryEval::new(q, self.dataset, self.params, self.search, self.query_seed(0))?
            .pair_unpruned(a, b, r_big)
    }

    pub fn classify(&self, q: &Point) -> Result<ClassificationResult> {
        self.classify_seeded(q, self.query_seed(0))
    }

    fn classify_seeded(&self, q: &Point, seed: u64) -> Result<ClassificationResult> {
        let mut eval = QueryEval::new(q, self.dataset, self.params, self.search, seed)?;
        let labels = self.dataset.labels();
        let probs = if labels.len() == 2 {
            let pair = eval.pair(self.dataset.members(0), self.dataset.members(1))?;
            let total = pair.prob + pair.reverse;
            if total > 0.0 {
                vec![pair.prob / total, pair.reverse / total]
            } else {
                vec![0.5, 0.5]
            }
        } else {
            (0..labels.len())
                .map(|c| {
                    let rest = other_members(self.dataset, c);
                    Ok(eval.pair(self.dataset.members(c), &rest)?.prob)
                })
                .collect::<Result<Vec<_>>>()?
        };
        Ok(ClassificationResult::from_probs(labels, probs, eval.examined.len()))
    }

    /// Classifies an uncertain query by averaging the certain-query
    /// probabilities of samples drawn from its pdf. Point masses reduce to
    /// [`Classifier::classify`].
    pub fn classify_uncertain(&self, u: &UncertainObject) -> Result<ClassificationResult> {
        self.classify_uncertain_seeded(u, self.query_seed(0))
    }

    fn classify_uncertain_seeded(&self, u: &UncertainObject, seed: u64) -> Result<ClassificationResult> {
        check_dims(self.dataset.dim(), u.dim())?;
        if let crate::pdf::Pdf::PointMass { at } = u.pdf() {
            return self.classify_seeded(at, seed);
        }
        let n = self.params.query_samples_for(u.dim());
        let mut rng = derived_rng(seed, &[u64::MAX]);
        let labels = self.dataset.labels();
        let mut sums = vec![0.0; labels.len()];
        let mut examined = 0;
        for s in 0..n {
            let q = u.pdf().sample(&mut rng);
            let r = self.classify_seeded(&q, derive_seed(seed, &[s as u64]))?;
            for (acc, p) in sums.iter_mut().zip(r.class_probs.values()) {
                *acc += p;
            }
            examined = examined.max(r.candidates_examined);
        }
        let probs = sums.into_iter().map(|s| s / n as f64).collect();
        Ok(ClassificationResult::from_probs(labels, probs, examined))
    }

    /// Classifies queries in parallel. Query `i` uses a seed derived from
    /// `(seed, i)`, so results do not depend on scheduling.
    pub fn classify_batch(&self, queries: &[UncertainObject]) -> Vec<Result<ClassificationResult>> {
        queries
            .par_iter()
            .enumerate()
            .map(|(i, u)| self.classify_uncertain_seeded(u, self.query_seed(i as u64)))
            .collect()
    }
}

/// `Pr(D(q, c) < D(q, c'))` using a linear scan for candidates.
pub fn nn_class_probability(
    q: &Point,
    dataset: &Dataset,
    c: &str,
    c_prime: &str,
    params: &UnnParams,
) -> Result<f64> {
    Classifier::new(dataset, params).nn_class_probability(q, c, c_prime)
}

pub fn classify(q: &Point, dataset: &Dataset, params: &UnnParams) -> Result<ClassificationResult> {
    Classifier::new(dataset, params).classify(q)
}

pub fn classify_uncertain(
    u: &UncertainObject,
    dataset: &Dataset,
    params: &UnnParams,
) -> Result<ClassificationResult> {
    Classifier::new(dataset, params).classify_uncertain(u)
}
