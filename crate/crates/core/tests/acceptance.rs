//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run everything with `cargo test -p unn-core --test acceptance`, or a
//! subset with `cargo test -p unn-core --test acceptance -- 1 5 9`.

mod common;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use common::{bimodal_reds, pt, random_mixture_dataset, random_point, two_gaussian_pairs};
use unn_core::baselines::{certain_knn, most_probable_class_oracle, naive_uncertain_nn, NaiveMetric};
use unn_core::datagen::gaussian_blobs;
use unn_core::search::CandidateSearch;
use unn_core::seed::{derive_seed, rng_from};
use unn_core::{
    brute_force_class_cdf, class_cdf_at_radius, inject_uncertainty, midpoint_queries,
    nearest_distance_rule, run_manet_experiment, support_ball, CdfMode, CertainDataset, Classifier,
    Dataset, LinearScan, ManetParams, ManetScenario, Pdf, PivotTable, Point, SpreadConfig,
    SupportBall, UncertainObject, UnnParams,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn example_gaussians() -> Outcome {
    let ds = two_gaussian_pairs();
    let params = UnnParams::default()
        .with_h(100)
        .with_samples(100_000)
        .with_cdf_mode(CdfMode::MonteCarlo)
        .with_seed(1);
    let start = Instant::now();
    let p = Classifier::new(&ds, &params).nn_class_probability(&pt(&[0.0]), "blue", "red").unwrap();
    let took = start.elapsed();
    outcome(
        (p - 0.569).abs() <= 0.015 && took < Duration::from_secs(5),
        format!("Pr(blue first) = {p:.4} (0.569 ± 0.015), {}", secs(took)),
    )
}

fn example_bimodal() -> Outcome {
    let q = pt(&[0.0, 0.0]);
    let exact = UnnParams::default().with_cdf_mode(CdfMode::Exact);
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let ds = bimodal_reds(n, false);
        let p = Classifier::new(&ds, &exact).nn_class_probability(&q, "red", "blue").unwrap();
        worst = worst.max((p - (1.0 - 0.5f64.powi(n as i32))).abs());
    }
    let ds = bimodal_reds(3, false);
    let p_exact = Classifier::new(&ds, &exact).nn_class_probability(&q, "red", "blue").unwrap();

    let mc_ds = bimodal_reds(3, true);
    let mc = UnnParams::default().with_samples(10_000).with_cdf_mode(CdfMode::MonteCarlo).with_seed(3);
    let p_mc = Classifier::new(&mc_ds, &mc).nn_class_probability(&q, "red", "blue").unwrap();

    let q_pdf = Pdf::point(q.clone());
    let naive_exact = naive_uncertain_nn(&q_pdf, &ds, NaiveMetric::MeanDistance, 0).unwrap();
    let naive_mc = naive_uncertain_nn(&q_pdf, &mc_ds, NaiveMetric::MeanDistance, 0).unwrap();
    let pass = (p_exact - 0.875).abs() <= 1e-9
        && worst <= 1e-9
        && (p_mc - 0.875).abs() <= 0.02
        && naive_exact == "blue"
        && naive_mc == "blue";
    outcome(
        pass,
        format!(
            "exact {p_exact:.12}, max |err| over n=1..6 {worst:.1e}, monte carlo {p_mc:.4}, naive {naive_exact}/{naive_mc}"
        ),
    )
}

fn dp_equivalence() -> Outcome {
    let mut rng = rng_from(3);
    let cases: Vec<(Vec<f64>, usize)> = (0..500)
        .map(|_| {
            let len = rng.random_range(1..=12);
            let p = (0..len).map(|_| rng.random::<f64>()).collect();
            (p, rng.random_range(1..=3))
        })
        .collect();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (p, k) in &cases {
        let dp = class_cdf_at_radius(p, *k).unwrap();
        let bf = brute_force_class_cdf(p, *k).unwrap();
        worst = worst.max((dp - bf).abs());
    }
    let took = start.elapsed();
    outcome(
        worst <= 1e-12 && took < Duration::from_secs(1),
        format!("max |dp - brute force| = {worst:.1e} over 500 vectors, {}", secs(took)),
    )
}

/// Tie-free when the k-th and (k+1)-th overall distances differ and the
/// per-class k-th distances differ.
fn tie_free(q: &[f64], points: &[Vec<f64>], labels: &[usize], k_vote: usize) -> bool {
    let dist = |p: &Vec<f64>| unn_core::point::euclidean(q, p);
    let mut all: Vec<f64> = points.iter().map(dist).collect();
    all.sort_by(f64::total_cmp);
    if k_vote < all.len() && all[k_vote - 1] == all[k_vote] {
        return false;
    }
    let kk = k_vote.div_ceil(2);
    let kth = |c: usize| {
        let mut d: Vec<f64> =
            points.iter().zip(labels).filter(|(_, l)| **l == c).map(|(p, _)| dist(p)).collect();
        d.sort_by(f64::total_cmp);
        d.get(kk - 1).copied()
    };
    match (kth(0), kth(1)) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    }
}

fn majority_equivalence() -> Outcome {
    let mut rng = rng_from(4);
    let (mut checked, mut agree, mut unn_agree) = (0, 0, 0);
    let exact = UnnParams::default().with_cdf_mode(CdfMode::Exact);
    for _ in 0..1000 {
        let n = rng.random_range(20..=100);
        let dim = [1, 2, 4][rng.random_range(0..3)];
        let k_vote = [1, 3, 5, 7][rng.random_range(0..4)];
        let mut labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        labels.shuffle(&mut rng);
        let points: Vec<Vec<f64>> = (0..n).map(|_| random_point(&mut rng, dim, 1.0).into_inner()).collect();
        let q = random_point(&mut rng, dim, 1.0);
        if !tie_free(q.coords(), &points, &labels, k_vote) {
            continue;
        }
        checked += 1;
        let vote = certain_knn(q.coords(), &points, &labels, k_vote).unwrap();
        let rule = nearest_distance_rule(q.coords(), &points, &labels, 0, 1, k_vote.div_ceil(2)).unwrap();
        agree += (vote == rule) as usize;

        let names = ["a", "b"];
        let objects = points
            .iter()
            .zip(&labels)
            .map(|(p, &l)| UncertainObject::certain(Point::new(p.clone()).unwrap(), Some(names[l].into())))
            .collect();
        let ds = Dataset::new(objects).unwrap();
        let params = exact.clone().with_k(k_vote.div_ceil(2));
        let unn = Classifier::new(&ds, &params).classify(&q).unwrap();
        unn_agree += (unn.label == names[vote]) as usize;
    }
    outcome(
        checked > 900 && agree == checked && unn_agree == checked,
        format!(
            "{agree}/{checked} vote = nearest-distance rule, {unn_agree}/{checked} vote = UNN on point masses"
        ),
    )
}

fn r_big(ds: &Dataset, q: &Point) -> f64 {
    let ball = SupportBall::point(q.clone());
    ds.objects().iter().map(|o| unn_core::maxdist(&ball, o.support()).unwrap()).fold(0.0, f64::max) + 1.0
}

fn pruning_soundness() -> Outcome {
    let results: Vec<(f64, bool)> = (0..100u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(derive_seed(5, &[t]));
            let n = rng.random_range(10..=60);
            let dim = rng.random_range(1..=3);
            let ds = random_mixture_dataset(derive_seed(6, &[t]), n, dim);
            let k = rng.random_range(1..=3);
            let params = UnnParams::default().with_k(k).with_cdf_mode(CdfMode::Exact);
            let pivots = PivotTable::build(&ds, 8.min(ds.len()), &mut rng).unwrap();
            let linear = Classifier::new(&ds, &params);
            let pivoted = Classifier::new(&ds, &params).with_search(&pivots);
            let (mut worst, mut same) = (0.0f64, true);
            for _ in 0..5 {
                let q = random_point(&mut rng, dim, 6.0);
                let pruned = linear.pair_probability(&q, "a", "b").unwrap();
                let (full, full_rev) = linear.nn_class_probability_unpruned(&q, "a", "b", r_big(&ds, &q)).unwrap();
                worst = worst.max((pruned.prob - full).abs()).max((pruned.reverse - full_rev).abs());

                let via_pivots = pivoted.pair_probability(&q, "a", "b").unwrap();
                same &= via_pivots.prob == pruned.prob
                    && via_pivots.reverse == pruned.reverse
                    && via_pivots.candidates.side_a == pruned.candidates.side_a
                    && via_pivots.candidates.side_b == pruned.candidates.side_b
                    && via_pivots.candidates.r_min == pruned.candidates.r_min
                    && via_pivots.candidates.r_max == pruned.candidates.r_max;
                let ball = SupportBall::point(q.clone());
                for c in 0..2 {
                    let members = ds.members(c);
                    let a = LinearScan.kth_maxdist(&ds, &ball, members, k);
                    let b = pivots.kth_maxdist(&ds, &ball, members, k);
                    same &= a.as_ref().map(|x| (x.radius, &x.witnesses))
                        == b.as_ref().map(|x| (x.radius, &x.witnesses));
                    let r = pruned.candidates.r_max;
                    same &= LinearScan.within_mindist(&ds, &ball, members, r).0
                        == pivots.within_mindist(&ds, &ball, members, r).0;
                }
            }
            (worst, same)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let identical = results.iter().filter(|r| r.1).count();
    outcome(
        worst <= 1e-9 && identical == 100,
        format!("max |pruned - unpruned| = {worst:.1e}; pivots identical to linear scan on {identical}/100 datasets"),
    )
}

fn spread_zero() -> Outcome {
    let per: Vec<(usize, usize)> = (0..50u64)
        .into_par_iter()
        .map(|t| {
            let data = gaussian_blobs(2 + (t as usize % 3), 15, 1 + (t as usize % 4), 0.5, derive_seed(7, &[t])).unwrap();
            let cfg = SpreadConfig::for_dataset(&data, 0.0, t).unwrap();
            let ds = inject_uncertainty(&data, &cfg).unwrap();
            let labels: Vec<usize> = data.labels.iter().map(|l| ds.class_index(l).unwrap()).collect();
            let points: Vec<Vec<f64>> = data.points.iter().map(|p| p.coords().to_vec()).collect();
            let params = UnnParams::default();
            let clf = Classifier::new(&ds, &params);
            let mut rng = rng_from(derive_seed(8, &[t]));
            let mut agree = 0;
            for _ in 0..20 {
                let q = random_point(&mut rng, data.dim(), 2.0);
                let nn = certain_knn(q.coords(), &points, &labels, 1).unwrap();
                agree += (clf.classify(&q).unwrap().label == ds.labels()[nn]) as usize;
            }
            (agree, 20)
        })
        .collect();
    let agree: usize = per.iter().map(|x| x.0).sum();
    let total: usize = per.iter().map(|x| x.1).sum();
    outcome(agree == total, format!("{agree}/{total} queries match certain 1-NN"))
}

fn oracle_agreement() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let start = Instant::now();
    for (si, &s) in [0.05, 0.1, 0.2].iter().enumerate() {
        for k in 1..=3usize {
            let seed = derive_seed(9, &[si as u64, k as u64]);
            let data: CertainDataset = gaussian_blobs(2, 50, 2, 0.5, seed).unwrap();
            let ds = inject_uncertainty(&data, &SpreadConfig::for_dataset(&data, s, seed).unwrap()).unwrap();
            let queries = midpoint_queries(&data, 200, seed).unwrap();
            let params = UnnParams::default().with_k(k).with_seed(seed);
            let clf = Classifier::new(&ds, &params);
            let agree: usize = queries
                .par_iter()
                .enumerate()
                .map(|(i, q)| {
                    let unn = clf.classify(q).unwrap().label;
                    let oracle =
                        most_probable_class_oracle(&Pdf::point(q.clone()), &ds, k, 10_000, derive_seed(seed, &[i as u64]))
                            .unwrap();
                    (unn == oracle.label) as usize
                })
                .sum();
            let rate = agree as f64 / queries.len() as f64;
            pass &= rate >= 0.95;
            lines.push(format!("s={s} k={k}: {:.1}%", 100.0 * rate));
        }
    }
    outcome(pass, format!("{} ({})", lines.join(", "), secs(start.elapsed())))
}

fn manet() -> Outcome {
    let scenario = ManetScenario::generate(2024, 2.0).unwrap();
    let params = ManetParams { power_samples: 1000, grid_resolution: 0, seed: 11, ..ManetParams::default() };
    let start = Instant::now();
    let report = run_manet_experiment(&scenario, &params).unwrap();
    let took = start.elapsed();
    outcome(
        report.unn_accuracy >= report.eknn_accuracy
            && report.eknn_accuracy >= 0.85
            && took < Duration::from_secs(300),
        format!(
            "UNN {:.4}, eKNN {:.4} on {} points, {}",
            report.unn_accuracy,
            report.eknn_accuracy,
            report.points.len(),
            secs(took)
        ),
    )
}

fn time_queries(ds: &Dataset, params: &UnnParams, queries: &[Point]) -> Duration {
    let clf = Classifier::new(ds, params);
    let start = Instant::now();
    for q in queries {
        std::hint::black_box(clf.classify(q).unwrap());
    }
    start.elapsed()
}

fn cost_scaling() -> Outcome {
    let data = gaussian_blobs(2, 100, 2, 0.5, 12).unwrap();
    let ds = inject_uncertainty(&data, &SpreadConfig::for_dataset(&data, 0.2, 12).unwrap()).unwrap();
    let queries = midpoint_queries(&data, 20, 12).unwrap();
    let base = UnnParams::default().with_samples(4000);
    let doubled = base.clone().with_samples(8000);

    // Far-away copies change |T| but not the candidate sets.
    let mut objects = ds.objects().to_vec();
    for o in ds.objects().iter().cycle().take(1000) {
        let shifted = match o.pdf() {
            Pdf::Product { factors } => Pdf::product(
                factors
                    .iter()
                    .map(|f| match *f {
                        unn_core::Factor::Normal { mu, sigma, truncation } => {
                            unn_core::Factor::Normal { mu: mu + 1000.0, sigma, truncation }
                        }
                        unn_core::Factor::Uniform { a, b } => unn_core::Factor::Uniform { a: a + 1000.0, b: b + 1000.0 },
                    })
                    .collect(),
            )
            .unwrap(),
            other => panic!("unexpected pdf {other:?}"),
        };
        objects.push(UncertainObject::new(shifted, o.label().map(String::from)).unwrap());
    }
    let padded = Dataset::new(objects).unwrap();
    let far = support_ball(padded.object(padded.len() - 1).pdf());
    assert!(far.center.coords()[0] > 900.0);
    // Interleaved trials so that load drift affects all three alike.
    let (mut t1, mut t2, mut t_pad) = (Duration::MAX, Duration::MAX, Duration::MAX);
    for _ in 0..3 {
        t1 = t1.min(time_queries(&ds, &base, &queries));
        t2 = t2.min(time_queries(&ds, &doubled, &queries));
        t_pad = t_pad.min(time_queries(&padded, &base, &queries));
    }
    let ratio = t2.as_secs_f64() / t1.as_secs_f64();
    let growth = t_pad.as_secs_f64() / t1.as_secs_f64() - 1.0;
    outcome(
        (1.6..=2.6).contains(&ratio) && growth < 0.15,
        format!(
            "time(2N)/time(N) = {ratio:.2}; +1000 far objects changes time by {:+.1}%",
            100.0 * growth
        ),
    )
}

type Criterion = (usize, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "two-gaussian-pairs nn probability", example_gaussians),
        (2, "bimodal reds vs blue", example_bimodal),
        (3, "dp vs subset enumeration", dp_equivalence),
        (4, "majority vote vs nearest-distance rule", majority_equivalence),
        (5, "pruning soundness", pruning_soundness),
        (6, "spread-zero degeneracy", spread_zero),
        (7, "agreement with most-probable-class oracle", oracle_agreement),
        (8, "manet demo", manet),
        (9, "cost scaling", cost_scaling),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let result = run();
        println!("[{}] {id}. {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
        failed += (!result.pass) as usize;
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
