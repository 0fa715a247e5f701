//! Reference classifiers: certain k-NN, the nearest-distance rule, the Monte
//! Carlo most-probable-class oracle, eKNN, and naive nearest neighbor under
//! an uncertain distance.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Result, UnnError};
use crate::object::Dataset;
use crate::pdf::Pdf;
use crate::point::{check_dims, euclidean};
use crate::seed::derived_rng;
use crate::support::{maxdist_unchecked, mindist_unchecked, support_ball};

/// Indices of `points` sorted by distance to `q`, ties by index.
fn by_distance(q: &[f64], points: &[Vec<f64>]) -> Vec<(f64, usize)> {
    let mut order: Vec<(f64, usize)> =
        points.iter().enumerate().map(|(i, p)| (euclidean(q, p), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order
}

/// Majority class among the `k` nearest points. Distance ties go to the lower
/// index; vote ties go to the tied class whose member ranks nearest.
pub fn certain_knn(q: &[f64], points: &[Vec<f64>], labels: &[usize], k: usize) -> Result<usize> {
    if points.is_empty() {
        return Err(UnnError::EmptyTrainingSet);
    }
    if k == 0 || k > points.len() {
        return Err(UnnError::InvalidParams(format!(
            "k = {k} must be in 1..={}",
            points.len()
        )));
    }
    let order = by_distance(q, points);
    let mut votes: Vec<(usize, usize, usize)> = Vec::new(); // (label, count, first rank)
    for (rank, &(_, i)) in order.iter().take(k).enumerate() {
        match votes.iter_mut().find(|v| v.0 == labels[i]) {
            Some(v) => v.1 += 1,
            None => votes.push((labels[i], 1, rank)),
        }
    }
    let best = votes
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
        .expect("k >= 1");
    Ok(best.0)
}

/// Class `c` if its k-th nearest point is strictly closer than the k-th
/// nearest of class `c_prime`, otherwise `c_prime`.
pub fn nearest_distance_rule(
    q: &[f64],
    points: &[Vec<f64>],
    labels: &[usize],
    c: usize,
    c_prime: usize,
    k: usize,
) -> Result<usize> {
    if k == 0 {
        return Err(UnnError::InvalidParams("k must be at least 1".into()));
    }
    let kth = |class: usize| {
        let mut d: Vec<f64> = points
            .iter()
            .zip(labels)
            .filter(|(_, l)| **l == class)
            .map(|(p, _)| euclidean(q, p))
            .collect();
        if d.len() < k {
            return Err(UnnError::DeficientClasses { k });
        }
        d.sort_by(f64::total_cmp);
        Ok(d[k - 1])
    };
    Ok(if kth(c)? < kth(c_prime)? { c } else { c_prime })
}

/// One joint realization of every training object.
pub fn sample_outcome<R: Rng + ?Sized>(dataset: &Dataset, rng: &mut R) -> Vec<Vec<f64>> {
    dataset.objects().iter().map(|o| o.pdf().sample(rng).into_inner()).collect()
}

/// Class frequencies of the certain `(2k - 1)`-NN vote across sampled outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeVote {
    pub label: String,
    pub frequencies: BTreeMap<String, f64>,
    pub outcomes: usize,
}

impl OutcomeVote {
    pub fn frequency(&self, label: &str) -> f64 {
        self.frequencies.get(label).copied().unwrap_or(0.0)
    }

    /// Fraction of outcomes whose vote equals `reference`.
    pub fn accuracy_against(&self, reference: &str) -> f64 {
        self.frequency(reference)
    }
}

fn outcome_vote(q: &Pdf, dataset: &Dataset, k: usize, m: usize, seed: u64) -> Result<OutcomeVote> {
    if k == 0 || m == 0 {
        return Err(UnnError::InvalidParams("k and M must be positive".into()));
    }
    check_dims(dataset.dim(), q.dim())?;
    let voters = 2 * k - 1;
    if voters > dataset.len() {
        return Err(UnnError::InvalidParams(format!(
            "{voters} voters requested from {} objects",
            dataset.len()
        )));
    }
    // Objects that can never rank among the `voters` nearest are not sampled.
    let q_ball = support_ball(q);
    let mut far: Vec<f64> =
        dataset.objects().iter().map(|o| maxdist_unchecked(&q_ball, o.support())).collect();
    far.sort_by(f64::total_cmp);
    let reach = far[voters - 1];
    let relevant: Vec<usize> = (0..dataset.len())
        .filter(|&i| mindist_unchecked(&q_ball, dataset.object(i).support()) <= reach)
        .collect();
    let labels: Vec<usize> = relevant.iter().map(|&i| dataset.class_of(i)).collect();

    let mut rng = derived_rng(seed, &[0]);
    let mut counts = vec![0usize; dataset.labels().len()];
    let mut points: Vec<Vec<f64>> =
        relevant.iter().map(|_| vec![0.0; dataset.dim()]).collect();
    let mut qbuf = vec![0.0; dataset.dim()];
    for _ in 0..m {
        q.sample_into(&mut rng, &mut qbuf);
        for (buf, &i) in points.iter_mut().zip(&relevant) {
            dataset.object(i).pdf().sample_into(&mut rng, buf);
        }
        counts[certain_knn(&qbuf, &points, &labels, voters)?] += 1;
    }
    let names = dataset.labels();
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    Ok(OutcomeVote {
        label: names[best].clone(),
        frequencies: names
            .iter()
            .cloned()
            .zip(counts.iter().map(|&n| n as f64 / m as f64))
            .collect(),
        outcomes: m,
    })
}

/// Estimates `Pr(NN(q) = c)` for every class from `m` sampled outcomes of
/// the training set (and of `q`, when uncertain); the argmax is the most
/// probable class.
pub fn most_probable_class_oracle(
    q: &Pdf,
    dataset: &Dataset,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<OutcomeVote> {
    outcome_vote(q, dataset, k, m, seed)
}

/// Expected k-NN: the certain `(2k - 1)`-NN rule applied to `m` sampled
/// outcomes. `accuracy_against` gives the mean per-outcome accuracy.
pub fn eknn(q: &[f64], dataset: &Dataset, k: usize, m: usize, seed: u64) -> Result<OutcomeVote> {
    let point = crate::point::Point::new(q.to_vec())?;
    outcome_vote(&Pdf::point(point), dataset, k, m, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveMetric {
    /// Distance between the means.
    MeanDistance,
    /// Mean distance over `n` paired samples.
    ExpectedDistance { n: usize },
}

/// Monte Carlo expected distance from `n` independent sample pairs.
pub fn expected_distance<R: Rng + ?Sized>(a: &Pdf, b: &Pdf, n: usize, rng: &mut R) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    if n == 0 {
        return Err(UnnError::InvalidParams("need at least one sample".into()));
    }
    let mut x = vec![0.0; a.dim()];
    let mut y = vec![0.0; b.dim()];
    let mut total = 0.0;
    for _ in 0..n {
        a.sample_into(rng, &mut x);
        b.sample_into(rng, &mut y);
        total += euclidean(&x, &y);
    }
    Ok(total / n as f64)
}

/// Label of the single training object nearest to `q` under `metric`.
pub fn naive_uncertain_nn(
    q: &Pdf,
    dataset: &Dataset,
    metric: NaiveMetric,
    seed: u64,
) -> Result<String> {
    check_dims(dataset.dim(), q.dim())?;
    let q_mean = q.mean();
    let mut best = (f64::INFINITY, 0);
    for (i, o) in dataset.objects().iter().enumerate() {
        let d = match metric {
            NaiveMetric::MeanDistance => euclidean(q_mean.coords(), o.pdf().mean().coords()),
            NaiveMetric::ExpectedDistance { n } => {
                let mut rng = derived_rng(seed, &[i as u64]);
                expected_distance(q, o.pdf(), n, &mut rng)?
            }
        };
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(dataset.object(best.1).label().unwrap().to_string())
}
