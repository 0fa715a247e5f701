use serde::{Deserialize, Serialize};

use crate::error::{Result, UnnError};

/// A certain object: a finite vector in d-dimensional Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(UnnError::InvalidPoint("zero-dimensional point".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(UnnError::InvalidPoint(format!("non-finite coordinate {bad}")));
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Euclidean distance, checking dimensions.
    pub fn distance(&self, other: &Point) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(euclidean(&self.0, &other.0))
    }

    /// Componentwise mean of two points.
    pub fn midpoint(&self, other: &Point) -> Result<Point> {
        check_dims(self.dim(), other.dim())?;
        Ok(Point(
            self.0.iter().zip(&other.0).map(|(a, b)| 0.5 * (a + b)).collect(),
        ))
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = UnnError;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(UnnError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Euclidean distance between equal-length slices. Callers check dimensions.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
