#![allow(dead_code)]

use rand::Rng;
use unn_core::seed::rng_from;
use unn_core::{Dataset, Pdf, Point, UncertainObject};

pub fn pt(v: &[f64]) -> Point {
    Point::new(v.to_vec()).unwrap()
}

/// Four one-dimensional truncated Gaussians; the first two are blue.
pub fn two_gaussian_pairs() -> Dataset {
    let mu = [-2.0, -2.0, 1.9, 2.5];
    let sigma = [0.125, 0.55, 0.125, 0.15];
    let objects = mu
        .iter()
        .zip(&sigma)
        .enumerate()
        .map(|(i, (&m, &s))| {
            let label = if i < 2 { "blue" } else { "red" };
            UncertainObject::labeled(Pdf::gauss(pt(&[m]), vec![s], 4.0).unwrap(), label).unwrap()
        })
        .collect();
    Dataset::new(objects).unwrap()
}

/// `n` red two-atom objects, each with half its mass at distance 2 from the
/// origin and half at distance 10, and one blue object at distance 4 (a
/// point mass, or a Gaussian with σ = 0.2).
pub fn bimodal_reds(n: usize, gaussian_blue: bool) -> Dataset {
    let mut objects = Vec::new();
    for i in 0..n {
        let theta = -std::f64::consts::PI * (i as f64 + 1.0) / (n as f64 + 1.0);
        let (s, c) = theta.sin_cos();
        let mix = Pdf::mixture(vec![(pt(&[2.0 * c, 2.0 * s]), 0.5), (pt(&[10.0 * c, 10.0 * s]), 0.5)])
            .unwrap();
        objects.push(UncertainObject::labeled(mix, "red").unwrap());
    }
    let blue = if gaussian_blue {
        Pdf::gauss(pt(&[0.0, 4.0]), vec![0.2, 0.2], 4.0).unwrap()
    } else {
        Pdf::point(pt(&[0.0, 4.0]))
    };
    objects.push(UncertainObject::labeled(blue, "blue").unwrap());
    Dataset::new(objects).unwrap()
}

/// Random two-class dataset of finite mixtures in `dim` dimensions.
pub fn random_mixture_dataset(seed: u64, n: usize, dim: usize) -> Dataset {
    let mut rng = rng_from(seed);
    let mut objects = Vec::with_capacity(n);
    for i in 0..n {
        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
        let spread = rng.random_range(0.05..1.5);
        let atoms = rng.random_range(1..=4);
        let mix = (0..atoms)
            .map(|_| {
                let at: Vec<f64> = center.iter().map(|c| c + rng.random_range(-spread..spread)).collect();
                (Point::new(at).unwrap(), rng.random_range(0.1..1.0))
            })
            .collect();
        let label = if i % 2 == 0 { "a" } else { "b" };
        objects.push(UncertainObject::labeled(Pdf::mixture_normalized(mix).unwrap(), label).unwrap());
    }
    Dataset::new(objects).unwrap()
}

pub fn random_point<R: Rng + ?Sized>(rng: &mut R, dim: usize, half: f64) -> Point {
    Point::new((0..dim).map(|_| rng.random_range(-half..half)).collect()).unwrap()
}
