//! Mobile ad-hoc network demo: nodes whose positions follow the
//! random-waypoint density, ground truth from the minimum transmit power,
//! and a UNN versus eKNN comparison.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::certain_knn;
use crate::classifier::{Classifier, UnnParams};
use crate::error::{Result, UnnError};
use crate::object::{Dataset, UncertainObject};
use crate::pdf::{Pdf, WaypointPdf};
use crate::point::{euclidean, Point};
use crate::seed::{derive_seed, derived_rng, rng_from};

pub const RED: &str = "red";
pub const BLUE: &str = "blue";
/// The simulation area is `[-HALF_AREA, HALF_AREA]^2`.
pub const HALF_AREA: f64 = 0.5;

pub fn waypoint_density(p: &[f64], w: &WaypointPdf) -> f64 {
    w.density(p)
}

pub fn waypoint_sample<R: Rng + ?Sized>(w: &WaypointPdf, rng: &mut R) -> Point {
    w.sample(rng)
}

/// Mean over `n` joint outcomes of `d(v, nearest node)^alpha`.
pub fn network_power<R: Rng + ?Sized>(
    v: &[f64],
    network: &[Pdf],
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    if network.is_empty() || n == 0 {
        return Err(UnnError::InvalidParams("need a node and at least one sample".into()));
    }
    for node in network {
        crate::point::check_dims(v.len(), node.dim())?;
    }
    let mut pos = vec![0.0; v.len()];
    let mut total = 0.0;
    for _ in 0..n {
        let mut nearest = f64::INFINITY;
        for node in network {
            node.sample_into(rng, &mut pos);
            nearest = nearest.min(euclidean(v, &pos));
        }
        total += nearest.powf(alpha);
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManetScenario {
    pub red: Vec<WaypointPdf>,
    pub blue: Vec<WaypointPdf>,
    pub alpha: f64,
}

fn place<R: Rng + ?Sized>(
    rng: &mut R,
    side: f64,
    x: (f64, f64),
    y: (f64, f64),
) -> Result<WaypointPdf> {
    // Centers are drawn where the whole square stays inside the region.
    let h = side / 2.0;
    let cx = rng.random_range(x.0 + h..=x.1 - h);
    let cy = rng.random_range(y.0 + h..=y.1 - h);
    WaypointPdf::new(Point::new(vec![cx, cy])?, side)
}

impl ManetScenario {
    pub const RED_NODES: usize = 10;
    pub const RED_SIDE: f64 = 0.2;
    pub const BLUE_NODES: usize = 5;
    pub const BLUE_SIDE: f64 = 0.05;

    /// Ten red nodes anywhere in the area and five blue nodes in its
    /// lower-right quadrant.
    pub fn generate(seed: u64, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(UnnError::InvalidParams(format!("alpha must be >= 0, got {alpha}")));
        }
        let mut rng = rng_from(seed);
        let full = (-HALF_AREA, HALF_AREA);
        let red = (0..Self::RED_NODES)
            .map(|_| place(&mut rng, Self::RED_SIDE, full, full))
            .collect::<Result<_>>()?;
        let blue = (0..Self::BLUE_NODES)
            .map(|_| place(&mut rng, Self::BLUE_SIDE, (0.0, HALF_AREA), (-HALF_AREA, 0.0)))
            .collect::<Result<_>>()?;
        Ok(ManetScenario { red, blue, alpha })
    }

    pub fn network(&self, label: &str) -> Vec<Pdf> {
        let nodes = if label == RED { &self.red } else { &self.blue };
        nodes.iter().cloned().map(Pdf::Waypoint).collect()
    }

    pub fn dataset(&self) -> Result<Dataset> {
        let mut objects = Vec::with_capacity(self.red.len() + self.blue.len());
        for (label, nodes) in [(RED, &self.red), (BLUE, &self.blue)] {
            for w in nodes {
                objects.push(UncertainObject::labeled(Pdf::Waypoint(w.clone()), label)?);
            }
        }
        Dataset::new(objects)
    }

    /// The network needing less power to reach `v`; ties go to red.
    pub fn power_label<R: Rng + ?Sized>(&self, v: &[f64], n: usize, rng: &mut R) -> Result<&'static str> {
        let red = network_power(v, &self.network(RED), self.alpha, n, rng)?;
        let blue = network_power(v, &self.network(BLUE), self.alpha, n, rng)?;
        Ok(if blue < red { BLUE } else { RED })
    }
}

#[derive(Debug, Clone)]
pub struct ManetParams {
    pub test_points: usize,
    /// Samples per network when estimating the power label.
    pub power_samples: usize,
    /// eKNN outcomes shared by all test points.
    pub eknn_outcomes: usize,
    /// Cells per side of the probability raster; 0 skips it.
    pub grid_resolution: usize,
    pub unn: UnnParams,
    pub seed: u64,
}

impl Default for ManetParams {
    fn default() -> Self {
        ManetParams {
            test_points: 2500,
            power_samples: 10_000,
            eknn_outcomes: 1000,
            grid_resolution: 50,
            unn: UnnParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestPoint {
    pub x: f64,
    pub y: f64,
    pub truth: String,
    pub unn: String,
    pub prob_red: f64,
    /// Fraction of eKNN outcomes labeling the point correctly.
    pub eknn_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub x: f64,
    pub y: f64,
    pub prob_red: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManetReport {
    pub unn_accuracy: f64,
    pub eknn_accuracy: f64,
    pub points: Vec<TestPoint>,
    pub grid: Vec<GridCell>,
}

const TEST_STREAM: u64 = 1;
const OUTCOME_STREAM: u64 = 2;
const POWER_STREAM: u64 = 3;
const GRID_STREAM: u64 = 4;

fn uniform_area_point<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    vec![
        rng.random_range(-HALF_AREA..HALF_AREA),
        rng.random_range(-HALF_AREA..HALF_AREA),
    ]
}

/// Labels uniform test points by minimum power and scores UNN (`params.unn`)
/// and eKNN against those labels. Bit-for-bit reproducible under a seed.
pub fn run_manet_experiment(scenario: &ManetScenario, params: &ManetParams) -> Result<ManetReport> {
    if params.test_points == 0 || params.power_samples == 0 || params.eknn_outcomes == 0 {
        return Err(UnnError::InvalidParams("counts must be positive".into()));
    }
    let dataset = scenario.dataset()?;
    let mut rng = derived_rng(params.seed, &[TEST_STREAM]);
    let coords: Vec<Vec<f64>> = (0..params.test_points).map(|_| uniform_area_point(&mut rng)).collect();

    let truth: Vec<&str> = coords
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let mut rng = derived_rng(params.seed, &[POWER_STREAM, i as u64]);
            scenario.power_label(v, params.power_samples, &mut rng)
        })
        .collect::<Result<_>>()?;

    let queries: Vec<UncertainObject> = coords
        .iter()
        .map(|v| Ok(UncertainObject::certain(Point::new(v.clone())?, None)))
        .collect::<Result<_>>()?;
    let unn_params = params.unn.clone().with_seed(derive_seed(params.seed, &[TEST_STREAM]));
    let unn = Classifier::new(&dataset, &unn_params).classify_batch(&queries);

    let mut rng = derived_rng(params.seed, &[OUTCOME_STREAM]);
    let outcomes: Vec<Vec<Vec<f64>>> = (0..params.eknn_outcomes)
        .map(|_| crate::baselines::sample_outcome(&dataset, &mut rng))
        .collect();
    let classes: Vec<usize> = (0..dataset.len()).map(|i| dataset.class_of(i)).collect();
    let voters = 2 * unn_params.k - 1;

    let mut points = Vec::with_capacity(coords.len());
    for ((v, t), u) in coords.iter().zip(&truth).zip(unn) {
        let u = u?;
        let t_class = dataset.class_index(t)?;
        let mut hits = 0;
        for o in &outcomes {
            if certain_knn(v, o, &classes, voters)? == t_class {
                hits += 1;
            }
        }
        points.push(TestPoint {
            x: v[0],
            y: v[1],
            truth: t.to_string(),
            prob_red: u.prob(RED),
            unn: u.label,
            eknn_accuracy: hits as f64 / outcomes.len() as f64,
        });
    }
    let n = points.len() as f64;
    let unn_accuracy = points.iter().filter(|p| p.unn == p.truth).count() as f64 / n;
    let eknn_accuracy = points.iter().map(|p| p.eknn_accuracy).sum::<f64>() / n;

    let grid = probability_grid(&dataset, &params.unn, params.grid_resolution, params.seed)?;
    Ok(ManetReport { unn_accuracy, eknn_accuracy, points, grid })
}

/// UNN probability of red at the centers of a `resolution x resolution` grid
/// over the area.
pub fn probability_grid(
    dataset: &Dataset,
    unn: &UnnParams,
    resolution: usize,
    seed: u64,
) -> Result<Vec<GridCell>> {
    let cell = 2.0 * HALF_AREA / resolution.max(1) as f64;
    let centers: Vec<(f64, f64)> = (0..resolution)
        .flat_map(|iy| {
            (0..resolution).map(move |ix| {
                (-HALF_AREA + (ix as f64 + 0.5) * cell, -HALF_AREA + (iy as f64 + 0.5) * cell)
            })
        })
        .collect();
    let queries: Vec<UncertainObject> = centers
        .iter()
        .map(|&(x, y)| Ok(UncertainObject::certain(Point::new(vec![x, y])?, None)))
        .collect::<Result<_>>()?;
    let params = unn.clone().with_seed(derive_seed(seed, &[GRID_STREAM]));
    let results = Classifier::new(dataset, &params).classify_batch(&queries);
    centers
        .into_iter()
        .zip(results)
        .map(|((x, y), r)| Ok(GridCell { x, y, prob_red: r?.prob(RED) }))
        .collect()
}

pub fn write_grid_csv<W: Write>(writer: W, grid: &[GridCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for cell in grid {
        w.serialize(cell)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per method: `method,accuracy,test_points`.
pub fn write_results_csv<W: Write>(writer: W, report: &ManetReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["method", "accuracy", "test_points"])?;
    let n = report.points.len().to_string();
    w.write_record(["unn", &report.unn_accuracy.to_string(), &n])?;
    w.write_record(["eknn", &report.eknn_accuracy.to_string(), &n])?;
    w.flush()?;
    Ok(())
}
