//! Probability that at least `k` objects of a class lie within a radius,
//! given each object's independent probability `p_j` of doing so.

use crate::error::{Result, UnnError};

const BRUTE_FORCE_LIMIT: usize = 20;

/// `Pr(at least k of the objects lie within R)`.
///
/// Sums, over each object `j`, the probability that `j` is within `R` and
/// exactly `k - 1` of the objects before it are, using the recurrence
/// `P(i, j) = p_j P(i-1, j-1) + (1 - p_j) P(i, j-1)` with `P(0, 0) = 1` and
/// `P(i, j) = 0` for `i > j`. Rows are rolled over two buffers of length
/// `|p| + 1`, so the cost is `O(k |p|)` time and `O(|p|)` space.
///
/// Returns 0 when `k > |p|`.
pub fn class_cdf_at_radius(p: &[f64], k: usize) -> Result<f64> {
    let mut scratch = DpScratch::default();
    scratch.eval(p, k)
}

/// Reusable buffers for evaluating [`class_cdf_at_radius`] many times.
#[derive(Debug, Default, Clone)]
pub struct DpScratch {
    prev: Vec<f64>,
    cur: Vec<f64>,
}

impl DpScratch {
    pub fn eval(&mut self, p: &[f64], k: usize) -> Result<f64> {
        if k == 0 {
            return Err(UnnError::InvalidParams("k must be at least 1".into()));
        }
        let n = p.len();
        if k > n {
            return Ok(0.0);
        }
        self.prev.clear();
        self.prev.resize(n + 1, 0.0);
        self.cur.clear();
        self.cur.resize(n + 1, 0.0);

        // Row 0: P(0, j) = prod_{h <= j} (1 - p_h).
        self.prev[0] = 1.0;
        for j in 1..=n {
            self.prev[j] = self.prev[j - 1] * (1.0 - p[j - 1]);
        }
        if k == 1 {
            // sum_j p_j P(0, j-1) telescopes to 1 - P(0, n)
            return Ok((1.0 - self.prev[n]).clamp(0.0, 1.0));
        }
        for i in 1..k {
            // P(i, j) = 0 for j < i.
            self.cur[..i].iter_mut().for_each(|v| *v = 0.0);
            for j in i..=n {
                let pj = p[j - 1];
                self.cur[j] = pj * self.prev[j - 1] + (1.0 - pj) * self.cur[j - 1];
            }
            std::mem::swap(&mut self.prev, &mut self.cur);
        }
        // prev now holds row k - 1.
        let total: f64 = (1..=n).map(|j| p[j - 1] * self.prev[j - 1]).sum();
        Ok(total.clamp(0.0, 1.0))
    }
}

/// Subset enumeration: `1 - sum_{|S| < k} prod_{S} p_j prod_{not S} (1 - p_j)`.
/// Exponential; limited to 20 entries.
pub fn brute_force_class_cdf(p: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(UnnError::InvalidParams("k must be at least 1".into()));
    }
    if p.len() > BRUTE_FORCE_LIMIT {
        return Err(UnnError::TooLarge { size: p.len(), limit: BRUTE_FORCE_LIMIT });
    }
    let mut below_k = 0.0;
    for mask in 0u32..(1u32 << p.len()) {
        if (mask.count_ones() as usize) >= k {
            continue;
        }
        let term: f64 = p
            .iter()
            .enumerate()
            .map(|(j, &pj)| if mask & (1 << j) != 0 { pj } else { 1.0 - pj })
            .product();
        below_k += term;
    }
    Ok((1.0 - below_k).max(0.0))
}
