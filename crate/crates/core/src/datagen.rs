//! Uncertainty injection, query generators and ten-fold cross-validation.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::baselines::most_probable_class_oracle;
use crate::classifier::{Classifier, UnnParams};
use crate::error::{Result, UnnError};
use crate::io::CertainDataset;
use crate::object::{Dataset, UncertainObject};
use crate::pdf::{Factor, Pdf, DEFAULT_TRUNCATION};
use crate::point::{euclidean, Point};
use crate::seed::{derive_seed, derived_rng, rng_from};

pub const DEFAULT_BORDER_ATTEMPTS: usize = 1_000_000;
pub const BORDER_RATIO: f64 = 0.1;
pub const FOLDS: usize = 10;

/// Spread `s` and the per-dimension standard deviations it scales.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadConfig {
    pub s: f64,
    pub sigmas: Vec<f64>,
    pub seed: u64,
}

impl SpreadConfig {
    pub fn new(s: f64, sigmas: Vec<f64>, seed: u64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(UnnError::InvalidParams(format!("spread must be >= 0, got {s}")));
        }
        if sigmas.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(UnnError::InvalidParams("standard deviations must be >= 0".into()));
        }
        Ok(SpreadConfig { s, sigmas, seed })
    }

    /// Uses the population standard deviation of each column of `data`.
    pub fn for_dataset(data: &CertainDataset, s: f64, seed: u64) -> Result<Self> {
        SpreadConfig::new(s, data.column_std(), seed)
    }
}

fn labeled_objects(data: &CertainDataset, pdfs: Vec<Pdf>) -> Result<Dataset> {
    let objects = pdfs
        .into_iter()
        .zip(&data.labels)
        .map(|(pdf, label)| UncertainObject::labeled(pdf, label.clone()))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(objects)
}

/// Replaces each point by a per-dimension product density. For dimension `j`
/// a half-width `4r` is drawn with `r` uniform on `[0.01 s σ_j, s σ_j]`, and a
/// fair coin picks a normal (σ = r, truncated at 4σ) or a uniform on
/// `[x - 4r, x + 4r]`. The random stream does not depend on `s`, so
/// supports grow monotonically with `s` under a fixed seed. `s = 0` yields
/// point masses.
pub fn inject_uncertainty(data: &CertainDataset, cfg: &SpreadConfig) -> Result<Dataset> {
    crate::point::check_dims(data.dim(), cfg.sigmas.len())?;
    let mut rng = rng_from(cfg.seed);
    let mut pdfs = Vec::with_capacity(data.len());
    for p in &data.points {
        let mut factors = Vec::with_capacity(p.dim());
        for (&x, &sigma) in p.coords().iter().zip(&cfg.sigmas) {
            let u: f64 = rng.random_range(0.01..=1.0);
            let normal: bool = rng.random();
            let r = cfg.s * sigma * u;
            factors.push(if normal {
                Factor::Normal { mu: x, sigma: r, truncation: DEFAULT_TRUNCATION }
            } else {
                Factor::Uniform { a: x - 4.0 * r, b: x + 4.0 * r }
            });
        }
        pdfs.push(if cfg.s == 0.0 { Pdf::point(p.clone()) } else { Pdf::product(factors)? });
    }
    labeled_objects(data, pdfs)
}

/// Per-dimension normals with standard deviation uniform on `[0, 2 s σ_j)`,
/// truncated at 4 standard deviations. `s = 0` yields point masses.
pub fn inject_gaussian_uncertainty(data: &CertainDataset, cfg: &SpreadConfig) -> Result<Dataset> {
    crate::point::check_dims(data.dim(), cfg.sigmas.len())?;
    let mut rng = rng_from(cfg.seed);
    let mut pdfs = Vec::with_capacity(data.len());
    for p in &data.points {
        let factors: Vec<Factor> = p
            .coords()
            .iter()
            .zip(&cfg.sigmas)
            .map(|(&x, &sigma)| Factor::Normal {
                mu: x,
                sigma: 2.0 * cfg.s * sigma * rng.random::<f64>(),
                truncation: DEFAULT_TRUNCATION,
            })
            .collect();
        pdfs.push(if cfg.s == 0.0 { Pdf::point(p.clone()) } else { Pdf::product(factors)? });
    }
    labeled_objects(data, pdfs)
}

fn random_midpoint<R: Rng + ?Sized>(points: &[Point], rng: &mut R) -> Point {
    let i = rng.random_range(0..points.len());
    let mut j = rng.random_range(0..points.len() - 1);
    if j >= i {
        j += 1;
    }
    points[i].midpoint(&points[j]).expect("dataset points share a dimension")
}

/// Midpoints of `count` random pairs of distinct points.
pub fn midpoint_queries(data: &CertainDataset, count: usize, seed: u64) -> Result<Vec<Point>> {
    if data.len() < 2 {
        return Err(UnnError::InvalidDataset("need at least two points".into()));
    }
    let mut rng = rng_from(seed);
    Ok((0..count).map(|_| random_midpoint(&data.points, &mut rng)).collect())
}

/// Mean distance from `q` to its `k` nearest points of each class, in
/// ascending order of that mean. Classes with fewer than `k` points are left
/// out.
pub fn class_neighbor_distances(q: &Point, data: &CertainDataset, k: usize) -> Vec<(String, f64)> {
    let mut by_class: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
    for (p, label) in data.points.iter().zip(&data.labels) {
        by_class.entry(label).or_default().push(euclidean(q.coords(), p.coords()));
    }
    let mut out: Vec<(String, f64)> = by_class
        .into_iter()
        .filter(|(_, d)| d.len() >= k)
        .map(|(label, mut d)| {
            d.sort_by(f64::total_cmp);
            (label.to_string(), d[..k].iter().sum::<f64>() / k as f64)
        })
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}

/// `|d_c - d_c'| / max(d_c, d_c')` for the two classes nearest to `q`.
pub fn border_ratio(q: &Point, data: &CertainDataset, k: usize) -> Option<f64> {
    let d = class_neighbor_distances(q, data, k);
    if d.len() < 2 {
        return None;
    }
    let (a, b) = (d[0].1, d[1].1);
    let top = a.max(b);
    Some(if top == 0.0 { 0.0 } else { (a - b).abs() / top })
}

/// Midpoint queries lying near the border between their two nearest classes:
/// the mean k-NN distances to those classes differ by at most 10%.
pub fn border_queries(
    data: &CertainDataset,
    k: usize,
    count: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<Vec<Point>> {
    if data.len() < 2 {
        return Err(UnnError::InvalidDataset("need at least two points".into()));
    }
    if k == 0 {
        return Err(UnnError::InvalidParams("k must be at least 1".into()));
    }
    let mut rng = rng_from(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == max_attempts {
            return Err(UnnError::GaveUp {
                attempts,
                reason: format!("found {} of {count} border queries", out.len()),
            });
        }
        attempts += 1;
        let q = random_midpoint(&data.points, &mut rng);
        match border_ratio(&q, data, k) {
            Some(r) if r <= BORDER_RATIO => out.push(q),
            Some(_) => {}
            None => return Err(UnnError::DeficientClasses { k }),
        }
    }
    Ok(out)
}

/// A classifier that can be retrained on each fold.
pub trait FoldClassifier: Sync {
    fn predict(&self, train: &Dataset, query: &UncertainObject, seed: u64) -> Result<String>;
}

/// The UNN rule; `params.seed` is replaced by the per-query seed.
#[derive(Debug, Clone)]
pub struct UnnHandle(pub UnnParams);

impl FoldClassifier for UnnHandle {
    fn predict(&self, train: &Dataset, query: &UncertainObject, seed: u64) -> Result<String> {
        let params = self.0.clone().with_seed(seed);
        Ok(Classifier::new(train, &params).classify_uncertain(query)?.label)
    }
}

/// eKNN over `m` sampled outcomes (the query is sampled too when uncertain).
#[derive(Debug, Clone, Copy)]
pub struct EknnHandle {
    pub k: usize,
    pub m: usize,
}

impl FoldClassifier for EknnHandle {
    fn predict(&self, train: &Dataset, query: &UncertainObject, seed: u64) -> Result<String> {
        Ok(most_probable_class_oracle(query.pdf(), train, self.k, self.m, seed)?.label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub fold_sizes: Vec<usize>,
    pub mean: f64,
    pub std: f64,
    pub stratified: bool,
}

/// Assigns every object to one of ten folds. Stratified when each class has
/// at least ten members; sizes differ by at most one either way.
pub fn fold_assignment(dataset: &Dataset, seed: u64) -> (Vec<usize>, bool) {
    let mut rng = rng_from(seed);
    let stratified = (0..dataset.labels().len()).all(|c| dataset.members(c).len() >= FOLDS);
    if !stratified {
        log::warn!("a class has fewer than {FOLDS} objects; using unstratified folds");
    }
    let groups: Vec<Vec<usize>> = if stratified {
        (0..dataset.labels().len()).map(|c| dataset.members(c).to_vec()).collect()
    } else {
        vec![(0..dataset.len()).collect()]
    };
    let mut fold = vec![0; dataset.len()];
    let mut next = 0;
    for mut g in groups {
        g.shuffle(&mut rng);
        for i in g {
            fold[i] = next;
            next = (next + 1) % FOLDS;
        }
    }
    (fold, stratified)
}

/// Ten-fold cross-validation of `classifier`. Folds run in parallel; each
/// test object gets a seed derived from `seed`, its fold and its index.
pub fn ten_fold_cv(
    dataset: &Dataset,
    classifier: &dyn FoldClassifier,
    seed: u64,
) -> Result<CvReport> {
    if dataset.len() < FOLDS {
        return Err(UnnError::InvalidDataset(format!(
            "cross-validation needs at least {FOLDS} objects, got {}",
            dataset.len()
        )));
    }
    let (fold, stratified) = fold_assignment(dataset, seed);
    let per_fold: Vec<(f64, usize)> = (0..FOLDS)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..dataset.len()).partition(|&i| fold[i] == f);
            let train_set = dataset.subset(&train)?;
            let mut correct = 0;
            for &i in &test {
                let obj = dataset.object(i);
                let s = derive_seed(seed, &[f as u64, i as u64]);
                if classifier.predict(&train_set, obj, s)? == obj.label().unwrap() {
                    correct += 1;
                }
            }
            Ok((correct as f64 / test.len() as f64, test.len()))
        })
        .collect::<Result<_>>()?;
    let fold_accuracies: Vec<f64> = per_fold.iter().map(|x| x.0).collect();
    let mean = fold_accuracies.iter().sum::<f64>() / FOLDS as f64;
    let std = (fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / FOLDS as f64)
        .sqrt();
    Ok(CvReport {
        fold_accuracies,
        fold_sizes: per_fold.iter().map(|x| x.1).collect(),
        mean,
        std,
        stratified,
    })
}

/// Random labeled points: `per_class` points per class around class centers
/// drawn uniformly in `[-1, 1]^dim`, with per-coordinate Gaussian noise `noise`.
pub fn gaussian_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    noise: f64,
    seed: u64,
) -> Result<CertainDataset> {
    use rand_distr::{Distribution, Normal};
    if classes == 0 || dim == 0 {
        return Err(UnnError::InvalidParams("need at least one class and dimension".into()));
    }
    let normal = Normal::new(0.0, noise)
        .map_err(|e| UnnError::InvalidParams(format!("noise: {e}")))?;
    let mut rng = derived_rng(seed, &[]);
    let mut points = Vec::with_capacity(classes * per_class);
    let mut labels = Vec::with_capacity(classes * per_class);
    for c in 0..classes {
        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        for _ in 0..per_class {
            let p = center.iter().map(|x| x + normal.sample(&mut rng)).collect();
            points.push(Point::new(p)?);
            labels.push(format!("c{c}"));
        }
    }
    CertainDataset::new(points, labels)
}
