//! Support balls and the mindist/maxdist bounds between uncertain objects.

use serde::{Deserialize, Serialize};

use crate::error::{Result, UnnError};
use crate::pdf::Pdf;
use crate::point::{check_dims, euclidean, Point};

/// Relative widening applied to computed radii so that rounding in the
/// radius never places a sample outside its ball.
const RADIUS_SLACK: f64 = 1e-12;

/// Ball enclosing all of an object's probability mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportBall {
    pub center: Point,
    pub radius: f64,
}

impl SupportBall {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(UnnError::InvalidPdf(format!("radius must be >= 0, got {radius}")));
        }
        Ok(SupportBall { center, radius })
    }

    /// Zero-radius ball of a certain object.
    pub fn point(center: Point) -> Self {
        SupportBall { center, radius: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn of(pdf: &Pdf) -> Self {
        support_ball(pdf)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        euclidean(self.center.coords(), p) <= self.radius
    }

    pub fn mindist(&self, other: &SupportBall) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(mindist_unchecked(self, other))
    }

    pub fn maxdist(&self, other: &SupportBall) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(maxdist_unchecked(self, other))
    }
}

fn widen(radius: f64, center: &[f64]) -> f64 {
    if radius == 0.0 {
        return 0.0;
    }
    let scale = center.iter().fold(radius, |m, c| m.max(c.abs()));
    radius + RADIUS_SLACK * scale
}

/// Ball enclosing the (truncated) support of `pdf`.
///
/// Point masses get radius zero. Mixtures are centered at the unweighted
/// atom centroid. Box-shaped supports get their circumscribed ball.
pub fn support_ball(pdf: &Pdf) -> SupportBall {
    match pdf {
        Pdf::PointMass { at } => SupportBall::point(at.clone()),
        Pdf::Mixture { atoms } => {
            let d = pdf.dim();
            let mut centroid = vec![0.0; d];
            for atom in atoms {
                for (c, x) in centroid.iter_mut().zip(atom.at.coords()) {
                    *c += x;
                }
            }
            let n = atoms.len() as f64;
            centroid.iter_mut().for_each(|c| *c /= n);
            let radius = atoms
                .iter()
                .map(|a| euclidean(&centroid, a.at.coords()))
                .fold(0.0, f64::max);
            let radius = widen(radius, &centroid);
            SupportBall {
                center: Point::new(centroid).expect("finite centroid"),
                radius,
            }
        }
        _ => {
            let (low, high) = pdf.support_box().expect("continuous pdfs have a support box");
            let center: Vec<f64> = low.iter().zip(&high).map(|(l, h)| 0.5 * (l + h)).collect();
            let radius = 0.5 * euclidean(&low, &high);
            let radius = widen(radius, &center);
            SupportBall {
                center: Point::new(center).expect("finite box center"),
                radius,
            }
        }
    }
}

/// `max{0, d(c(x), c(y)) - r(x) - r(y)}`.
pub fn mindist(x: &SupportBall, y: &SupportBall) -> Result<f64> {
    x.mindist(y)
}

/// `d(c(x), c(y)) + r(x) + r(y)`.
pub fn maxdist(x: &SupportBall, y: &SupportBall) -> Result<f64> {
    x.maxdist(y)
}

#[inline]
pub(crate) fn mindist_unchecked(x: &SupportBall, y: &SupportBall) -> f64 {
    (euclidean(x.center.coords(), y.center.coords()) - (x.radius + y.radius)).max(0.0)
}

#[inline]
pub(crate) fn maxdist_unchecked(x: &SupportBall, y: &SupportBall) -> f64 {
    euclidean(x.center.coords(), y.center.coords()) + (x.radius + y.radius)
}
