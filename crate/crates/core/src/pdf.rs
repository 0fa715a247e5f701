//! Probability density models for uncertain objects.
//!
//! Every model has a bounded support: Gaussian factors are truncated at a
//! fixed multiple of their standard deviation and sampled by rejection, so
//! the tail beyond the truncation point carries no mass.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UnnError};
use crate::point::{check_dims, Point};

pub const DEFAULT_TRUNCATION: f64 = 4.0;

const WEIGHT_TOLERANCE: f64 = 1e-9;

/// One-dimensional factor of a per-dimension product density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Factor {
    /// Normal truncated at `mu ± truncation * sigma`. `sigma = 0` is a point.
    Normal {
        mu: f64,
        sigma: f64,
        #[serde(default = "default_truncation")]
        truncation: f64,
    },
    /// Uniform on `[a, b]`. `a = b` is a point.
    Uniform { a: f64, b: f64 },
}

fn default_truncation() -> f64 {
    DEFAULT_TRUNCATION
}

impl Factor {
    fn validate(&self) -> Result<()> {
        match *self {
            Factor::Normal { mu, sigma, truncation } => {
                if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
                    return Err(UnnError::InvalidPdf(format!(
                        "normal factor needs finite mu and sigma >= 0, got ({mu}, {sigma})"
                    )));
                }
                check_truncation(truncation)
            }
            Factor::Uniform { a, b } => {
                if !a.is_finite() || !b.is_finite() || a > b {
                    return Err(UnnError::InvalidPdf(format!(
                        "uniform factor needs finite a <= b, got [{a}, {b}]"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Interval carrying all of the factor's mass.
    pub fn interval(&self) -> (f64, f64) {
        match *self {
            Factor::Normal { mu, sigma, truncation } => {
                (mu - truncation * sigma, mu + truncation * sigma)
            }
            Factor::Uniform { a, b } => (a, b),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Factor::Normal { mu, .. } => mu,
            Factor::Uniform { a, b } => 0.5 * (a + b),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Factor::Normal { mu, sigma, truncation } => {
                mu + sigma * truncated_standard_normal(rng, truncation)
            }
            Factor::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
        }
    }
}

fn check_truncation(t: f64) -> Result<()> {
    if !t.is_finite() || t <= 0.0 {
        return Err(UnnError::InvalidPdf(format!("truncation must be positive, got {t}")));
    }
    Ok(())
}

fn truncated_standard_normal<R: Rng + ?Sized>(rng: &mut R, truncation: f64) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z.abs() <= truncation {
            return z;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: Point,
    pub weight: f64,
}

/// Stationary node density of the random waypoint mobility model on a
/// square of side `side` centered at `center`:
/// `36/a^6 * ((x-x0)^2 - a^2/4) * ((y-y0)^2 - a^2/4)` inside, zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointPdf {
    pub center: Point,
    pub side: f64,
}

impl WaypointPdf {
    pub fn new(center: Point, side: f64) -> Result<Self> {
        let w = WaypointPdf { center, side };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        check_dims(2, self.center.dim())?;
        if !self.side.is_finite() || self.side <= 0.0 {
            return Err(UnnError::InvalidPdf(format!(
                "waypoint square side must be positive, got {}",
                self.side
            )));
        }
        Ok(())
    }

    pub fn density(&self, p: &[f64]) -> f64 {
        let a = self.side;
        let half = 0.5 * a;
        let dx = p[0] - self.center.coords()[0];
        let dy = p[1] - self.center.coords()[1];
        if dx.abs() >= half || dy.abs() >= half {
            return 0.0;
        }
        let q = a * a / 4.0;
        36.0 / a.powi(6) * (dx * dx - q) * (dy * dy - q)
    }

    /// Density value at the center, the maximum of the model.
    pub fn peak(&self) -> f64 {
        9.0 / (4.0 * self.side * self.side)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut out = [0.0; 2];
        self.sample_into(rng, &mut out);
        Point::new(out.to_vec()).expect("finite sample")
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let c = self.center.coords();
        let peak = self.peak();
        loop {
            let x = c[0] + self.side * (rng.random::<f64>() - 0.5);
            let y = c[1] + self.side * (rng.random::<f64>() - 0.5);
            if rng.random::<f64>() * peak <= self.density(&[x, y]) {
                out[0] = x;
                out[1] = y;
                return;
            }
        }
    }
}

/// A probability density over d-dimensional Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Pdf {
    /// Dirac delta: a certain object.
    #[serde(rename = "point")]
    PointMass { at: Point },
    /// Finitely many atoms with positive weights summing to one.
    Mixture { atoms: Vec<Atom> },
    /// Axis-aligned Gaussian, each dimension truncated at `truncation` sigmas.
    Gauss {
        mean: Point,
        sigmas: Vec<f64>,
        #[serde(default = "default_truncation")]
        truncation: f64,
    },
    #[serde(rename = "box")]
    UniformBox { low: Point, high: Point },
    /// Independent per-dimension factors.
    Product { factors: Vec<Factor> },
    Waypoint(WaypointPdf),
}

impl Pdf {
    pub fn point(at: Point) -> Pdf {
        Pdf::PointMass { at }
    }

    pub fn mixture(atoms: Vec<(Point, f64)>) -> Result<Pdf> {
        let pdf = Pdf::Mixture {
            atoms: atoms.into_iter().map(|(at, weight)| Atom { at, weight }).collect(),
        };
        pdf.validate()?;
        Ok(pdf)
    }

    /// Like [`Pdf::mixture`] but rescales positive weights to sum to one.
    pub fn mixture_normalized(atoms: Vec<(Point, f64)>) -> Result<Pdf> {
        let total: f64 = atoms.iter().map(|(_, w)| *w).sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(UnnError::InvalidPdf("mixture weights must be positive".into()));
        }
        Pdf::mixture(atoms.into_iter().map(|(p, w)| (p, w / total)).collect())
    }

    pub fn gauss(mean: Point, sigmas: Vec<f64>, truncation: f64) -> Result<Pdf> {
        let pdf = Pdf::Gauss { mean, sigmas, truncation };
        pdf.validate()?;
        Ok(pdf)
    }

    pub fn uniform_box(low: Point, high: Point) -> Result<Pdf> {
        let pdf = Pdf::UniformBox { low, high };
        pdf.validate()?;
        Ok(pdf)
    }

    pub fn product(factors: Vec<Factor>) -> Result<Pdf> {
        let pdf = Pdf::Product { factors };
        pdf.validate()?;
        Ok(pdf)
    }

    pub fn waypoint(center: Point, side: f64) -> Result<Pdf> {
        Ok(Pdf::Waypoint(WaypointPdf::new(center, side)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Pdf::PointMass { .. } => Ok(()),
            Pdf::Mixture { atoms } => {
                let first = atoms
                    .first()
                    .ok_or_else(|| UnnError::InvalidPdf("mixture without atoms".into()))?;
                let mut total = 0.0;
                for atom in atoms {
                    check_dims(first.at.dim(), atom.at.dim())?;
                    if !atom.weight.is_finite() || atom.weight <= 0.0 {
                        return Err(UnnError::InvalidPdf(format!(
                            "mixture weight must be positive, got {}",
                            atom.weight
                        )));
                    }
                    total += atom.weight;
                }
                if (total - 1.0).abs() > WEIGHT_TOLERANCE {
                    return Err(UnnError::InvalidPdf(format!(
                        "mixture weights sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
            Pdf::Gauss { mean, sigmas, truncation } => {
                check_dims(mean.dim(), sigmas.len())?;
                if let Some(s) = sigmas.iter().find(|s| !s.is_finite() || **s <= 0.0) {
                    return Err(UnnError::InvalidPdf(format!("sigma must be positive, got {s}")));
                }
                check_truncation(*truncation)
            }
            Pdf::UniformBox { low, high } => {
                check_dims(low.dim(), high.dim())?;
                if low.coords().iter().zip(high.coords()).any(|(l, h)| !l.is_finite() || !h.is_finite() || l >= h) {
                    return Err(UnnError::InvalidPdf("box needs low < high componentwise".into()));
                }
                Ok(())
            }
            Pdf::Product { factors } => {
                if factors.is_empty() {
                    return Err(UnnError::InvalidPdf("product without factors".into()));
                }
                factors.iter().try_for_each(Factor::validate)
            }
            Pdf::Waypoint(w) => w.validate(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Pdf::PointMass { at } => at.dim(),
            Pdf::Mixture { atoms } => atoms[0].at.dim(),
            Pdf::Gauss { mean, .. } => mean.dim(),
            Pdf::UniformBox { low, .. } => low.dim(),
            Pdf::Product { factors } => factors.len(),
            Pdf::Waypoint(_) => 2,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Pdf::PointMass { .. } | Pdf::Mixture { .. })
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self, Pdf::PointMass { .. })
    }

    /// Atoms and weights of a discrete pdf.
    pub fn atoms(&self) -> Option<Vec<(&[f64], f64)>> {
        match self {
            Pdf::PointMass { at } => Some(vec![(at.coords(), 1.0)]),
            Pdf::Mixture { atoms } => {
                Some(atoms.iter().map(|a| (a.at.coords(), a.weight)).collect())
            }
            _ => None,
        }
    }

    /// Axis-aligned box containing the support, for the continuous models.
    pub fn support_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Pdf::Gauss { mean, sigmas, truncation } => Some(
                mean.coords()
                    .iter()
                    .zip(sigmas)
                    .map(|(m, s)| (m - truncation * s, m + truncation * s))
                    .unzip(),
            ),
            Pdf::UniformBox { low, high } => {
                Some((low.coords().to_vec(), high.coords().to_vec()))
            }
            Pdf::Product { factors } => Some(factors.iter().map(Factor::interval).unzip()),
            Pdf::Waypoint(w) => {
                let h = 0.5 * w.side;
                let c = w.center.coords();
                Some((vec![c[0] - h, c[1] - h], vec![c[0] + h, c[1] + h]))
            }
            Pdf::PointMass { .. } | Pdf::Mixture { .. } => None,
        }
    }

    pub fn mean(&self) -> Point {
        let coords = match self {
            Pdf::PointMass { at } => return at.clone(),
            Pdf::Mixture { atoms } => {
                let mut m = vec![0.0; self.dim()];
                for atom in atoms {
                    for (acc, x) in m.iter_mut().zip(atom.at.coords()) {
                        *acc += atom.weight * x;
                    }
                }
                m
            }
            Pdf::Gauss { mean, .. } => return mean.clone(),
            Pdf::UniformBox { low, high } => low
                .coords()
                .iter()
                .zip(high.coords())
                .map(|(l, h)| 0.5 * (l + h))
                .collect(),
            Pdf::Product { factors } => factors.iter().map(Factor::mean).collect(),
            Pdf::Waypoint(w) => return w.center.clone(),
        };
        Point::new(coords).expect("mean of a valid pdf is finite")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        Point::new(out).expect("samples of a valid pdf are finite")
    }

    /// Draws one point into `out`, which must have length `dim()`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Pdf::PointMass { at } => out.copy_from_slice(at.coords()),
            Pdf::Mixture { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = &atoms[atoms.len() - 1];
                for atom in atoms {
                    acc += atom.weight;
                    if u < acc {
                        chosen = atom;
                        break;
                    }
                }
                out.copy_from_slice(chosen.at.coords());
            }
            Pdf::Gauss { mean, sigmas, truncation } => {
                for ((o, m), s) in out.iter_mut().zip(mean.coords()).zip(sigmas) {
                    *o = m + s * truncated_standard_normal(rng, *truncation);
                }
            }
            Pdf::UniformBox { low, high } => {
                for ((o, l), h) in out.iter_mut().zip(low.coords()).zip(high.coords()) {
                    *o = l + (h - l) * rng.random::<f64>();
                }
            }
            Pdf::Product { factors } => {
                for (o, f) in out.iter_mut().zip(factors) {
                    *o = f.sample(rng);
                }
            }
            Pdf::Waypoint(w) => w.sample_into(rng, out),
        }
    }
}
