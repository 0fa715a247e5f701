//! Per-object cumulative distance distributions `p_i(R) = Pr(d(q, x_i) <= R)`
//! tabulated on a radius grid.

use rand::Rng;

use crate::error::{Result, UnnError};
use crate::object::UncertainObject;
use crate::point::{check_dims, euclidean};

/// Increasing radii `R_1 < ... < R_h` at which distribution functions are tabulated.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusGrid {
    r_min: f64,
    radii: Vec<f64>,
}

impl RadiusGrid {
    /// `h` equal slots over `[r_min, r_max]`: `R_l = r_min + l * (r_max - r_min) / h`,
    /// with `R_h = r_max` exactly.
    pub fn uniform(r_min: f64, r_max: f64, h: usize) -> Result<Self> {
        if h == 0 {
            return Err(UnnError::InvalidParams("histogram needs h >= 1 slots".into()));
        }
        if !r_min.is_finite() || !r_max.is_finite() || r_min > r_max {
            return Err(UnnError::InvalidParams(format!(
                "bad radius interval [{r_min}, {r_max}]"
            )));
        }
        let step = (r_max - r_min) / h as f64;
        let mut radii: Vec<f64> = (1..=h).map(|l| r_min + l as f64 * step).collect();
        radii[h - 1] = r_max;
        Ok(RadiusGrid { r_min, radii })
    }

    /// Grid whose slots sit exactly on the given radii (sorted and deduplicated).
    /// Step functions tabulated here lose nothing.
    pub fn breakpoints(r_min: f64, mut radii: Vec<f64>) -> Result<Self> {
        radii.retain(|r| *r >= r_min);
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        if radii.is_empty() || radii.iter().any(|r| !r.is_finite()) {
            return Err(UnnError::InvalidParams("breakpoint grid needs finite radii".into()));
        }
        Ok(RadiusGrid { r_min, radii })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn h(&self) -> usize {
        self.radii.len()
    }

    /// `R_l` for `l` in `1..=h`.
    pub fn radius(&self, l: usize) -> f64 {
        self.radii[l - 1]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// A distribution function tabulated on a [`RadiusGrid`]: `slots[l - 1]` holds
/// the value at `R_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceCdf {
    pub slots: Vec<f64>,
}

impl DistanceCdf {
    pub fn h(&self) -> usize {
        self.slots.len()
    }

    /// Value at slot `l`, with slot 0 defined as 0.
    pub fn at(&self, l: usize) -> f64 {
        if l == 0 {
            0.0
        } else {
            self.slots[l - 1]
        }
    }

    pub fn last(&self) -> f64 {
        *self.slots.last().unwrap_or(&0.0)
    }
}

/// Sorted distances from a query to `n` samples of one object's pdf.
///
/// All slots of any grid are filled from one set of samples.
#[derive(Debug, Clone)]
pub struct SampledDistances {
    sorted: Vec<f64>,
}

impl SampledDistances {
    pub fn draw<R: Rng + ?Sized>(q: &[f64], x: &UncertainObject, n: usize, rng: &mut R) -> Self {
        let pdf = x.pdf();
        let mut buf = vec![0.0; pdf.dim()];
        let mut sorted: Vec<f64> = (0..n)
            .map(|_| {
                pdf.sample_into(rng, &mut buf);
                euclidean(q, &buf)
            })
            .collect();
        sorted.sort_unstable_by(f64::total_cmp);
        SampledDistances { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples within distance `r` (closed ball).
    pub fn fraction_within(&self, r: f64) -> f64 {
        self.sorted.partition_point(|d| *d <= r) as f64 / self.sorted.len() as f64
    }

    pub fn tabulate(&self, grid: &RadiusGrid) -> DistanceCdf {
        let n = self.sorted.len() as f64;
        let mut idx = 0;
        let slots = grid
            .radii()
            .iter()
            .map(|&r| {
                while idx < self.sorted.len() && self.sorted[idx] <= r {
                    idx += 1;
                }
                idx as f64 / n
            })
            .collect();
        DistanceCdf { slots }
    }
}

/// Monte Carlo estimate of `p(R_l)` for every slot from `n` samples of `x`.
pub fn estimate_object_cdf<R: Rng + ?Sized>(
    q: &[f64],
    x: &UncertainObject,
    grid: &RadiusGrid,
    n: usize,
    rng: &mut R,
) -> Result<DistanceCdf> {
    if n == 0 {
        return Err(UnnError::InvalidParams("need at least one sample".into()));
    }
    check_dims(x.dim(), q.len())?;
    Ok(SampledDistances::draw(q, x, n, rng).tabulate(grid))
}

/// Exact `Pr(d(q, x) <= r)` for a discrete pdf: total weight of atoms within `r`.
pub fn exact_object_cdf(q: &[f64], x: &UncertainObject, r: f64) -> Result<f64> {
    check_dims(x.dim(), q.len())?;
    let atoms = x.pdf().atoms().ok_or(UnnError::NotDiscrete)?;
    Ok(atoms
        .iter()
        .filter(|(a, _)| euclidean(q, a) <= r)
        .map(|(_, w)| *w)
        .sum::<f64>()
        .min(1.0))
}

/// Exact tabulation of a discrete object's distance distribution.
pub fn exact_object_cdf_on_grid(
    q: &[f64],
    x: &UncertainObject,
    grid: &RadiusGrid,
) -> Result<DistanceCdf> {
    check_dims(x.dim(), q.len())?;
    let atoms = x.pdf().atoms().ok_or(UnnError::NotDiscrete)?;
    let mut by_distance: Vec<(f64, f64)> =
        atoms.iter().map(|(a, w)| (euclidean(q, a), *w)).collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut idx = 0;
    let mut acc = 0.0;
    let slots = grid
        .radii()
        .iter()
        .map(|&r| {
            while idx < by_distance.len() && by_distance[idx].0 <= r {
                acc += by_distance[idx].1;
                idx += 1;
            }
            acc.min(1.0)
        })
        .collect();
    Ok(DistanceCdf { slots })
}

/// Distances from `q` to every atom of a discrete pdf.
pub(crate) fn atom_distances(q: &[f64], x: &UncertainObject) -> Option<Vec<f64>> {
    x.pdf()
        .atoms()
        .map(|atoms| atoms.iter().map(|(a, _)| euclidean(q, a)).collect())
}
