//! Exact dynamic program for the univariate L2 Potts problem
//! `delta * ||diff u||_0 + ||u - f||_2^2`.
//!
//! The optimum for the prefix `f[..r]` is the best of the `r` candidates
//! obtained by appending one constant segment `f[l..r]` (set to its mean) to
//! the optimum of `f[..l]`. With prefix moments each candidate costs O(1), so
//! the full solve is O(n^2) time and O(n) space.

use crate::error::{Error, Result};
use crate::linops::Signal;

/// Relative tolerance under which two candidate energies count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Prefix sums of `f` and `f^2`, with `sum[0] = 0`.
///
/// The data is shifted by its mean before accumulation; interval statistics
/// undo the shift, which reduces cancellation in the moment formula.
#[derive(Debug, Clone)]
pub struct PrefixMoments {
    shift: f64,
    cum_sum: Vec<f64>,
    cum_sum_sq: Vec<f64>,
}

impl PrefixMoments {
    pub fn new(f: &[f64]) -> Self {
        let shift = if f.is_empty() {
            0.0
        } else {
            f.iter().sum::<f64>() / f.len() as f64
        };
        let mut cum_sum = Vec::with_capacity(f.len() + 1);
        let mut cum_sum_sq = Vec::with_capacity(f.len() + 1);
        let (mut s, mut q) = (0.0, 0.0);
        cum_sum.push(0.0);
        cum_sum_sq.push(0.0);
        for &v in f {
            let c = v - shift;
            s += c;
            q += c * c;
            cum_sum.push(s);
            cum_sum_sq.push(q);
        }
        Self {
            shift,
            cum_sum,
            cum_sum_sq,
        }
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.cum_sum.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean and squared error of the best constant fit on the 1-based
    /// inclusive interval `[l, r]`.
    pub fn interval_stats(&self, l: usize, r: usize) -> Result<(f64, f64)> {
        if l == 0 || l > r || r > self.len() {
            return Err(Error::InvalidArgument(format!(
                "interval [{l}, {r}] outside 1..={}",
                self.len()
            )));
        }
        Ok(self.stats_unchecked(l - 1, r))
    }

    /// Statistics of the 0-based half-open range `start..end`.
    #[inline]
    fn stats_unchecked(&self, start: usize, end: usize) -> (f64, f64) {
        let (mean, sq) = self.centered_stats(start, end);
        (mean + self.shift, sq)
    }

    #[inline]
    fn centered_stats(&self, start: usize, end: usize) -> (f64, f64) {
        let len = (end - start) as f64;
        let s = self.cum_sum[end] - self.cum_sum[start];
        let q = self.cum_sum_sq[end] - self.cum_sum_sq[start];
        (s / len, (q - s * s / len).max(0.0))
    }
}

/// Minimizer of the classical Potts problem together with its jump set.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSignal {
    values: Signal,
    jumps: Vec<usize>,
}

impl PiecewiseSignal {
    /// Builds from values, deriving the jump set `{i : x[i] != x[i + 1]}`.
    pub fn from_values(values: Signal) -> Self {
        let jumps = values
            .windows(2)
            .enumerate()
            .filter_map(|(i, w)| (w[0] != w[1]).then_some(i))
            .collect();
        Self { values, jumps }
    }

    pub fn values(&self) -> &Signal {
        &self.values
    }

    pub fn into_values(self) -> Signal {
        self.values
    }

    /// Indices `i` with `x[i] != x[i + 1]`.
    pub fn jumps(&self) -> &[usize] {
        &self.jumps
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }
}

/// Options for [`solve_potts_1d_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PottsOptions {
    /// Skip candidates whose last segment alone already exceeds the best
    /// energy. Gives bit-identical results to the full scan.
    pub prune: bool,
}

/// `delta * ||diff u||_0 + ||u - f||^2`.
pub fn potts_1d_energy(u: &[f64], f: &[f64], delta: f64) -> f64 {
    let jumps = u.windows(2).filter(|w| w[0] != w[1]).count();
    delta * jumps as f64 + u.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// Global minimizer of `delta * ||diff u||_0 + ||u - f||_2^2`.
///
/// Among minimizers whose energies agree within a relative `1e-12`, the
/// one with fewer jumps is returned, then the one whose last segment starts
/// leftmost.
pub fn solve_potts_1d(f: &[f64], delta: f64) -> Result<PiecewiseSignal> {
    solve_potts_1d_with(f, delta, PottsOptions::default())
}

pub fn solve_potts_1d_with(f: &[f64], delta: f64, options: PottsOptions) -> Result<PiecewiseSignal> {
    if f.is_empty() {
        return Err(Error::InvalidArgument("Potts data must be non-empty".into()));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be finite and >= 0, got {delta}")));
    }
    let n = f.len();
    let moments = PrefixMoments::new(f);

    // best[r]: optimal energy of f[..r]; best[0] = -delta so the first
    // segment carries no jump penalty.
    let mut best = vec![0.0; n + 1];
    let mut jumps = vec![0usize; n + 1];
    let mut start = vec![0usize; n + 1];
    let mut costs = vec![0.0; n];
    best[0] = -delta;

    for r in 1..=n {
        let mut first = 0;
        if options.prune {
            // Candidate energy >= its segment error, and segment error only
            // grows as the segment extends left. The slack covers rounding
            // in the moment formula.
            let upper = best[r - 1] + delta;
            let cutoff = upper
                + 4.0 * TIE_TOLERANCE * upper.abs()
                + 64.0 * f64::EPSILON * moments.cum_sum_sq[n];
            first = r - 1;
            while first > 0 && moments.centered_stats(first - 1, r).1 <= cutoff {
                first -= 1;
            }
        }

        let mut min_cost = f64::INFINITY;
        for l in first..r {
            let c = best[l] + delta + moments.centered_stats(l, r).1;
            costs[l] = c;
            min_cost = min_cost.min(c);
        }
        let threshold = min_cost + TIE_TOLERANCE * min_cost.abs();
        let mut chosen = usize::MAX;
        for l in first..r {
            if costs[l] <= threshold {
                let better = chosen == usize::MAX
                    || jumps_after(&jumps, l) < jumps_after(&jumps, chosen);
                if better {
                    chosen = l;
                }
            }
        }
        best[r] = costs[chosen];
        jumps[r] = jumps_after(&jumps, chosen);
        start[r] = chosen;
    }

    let mut values = vec![0.0; n];
    let mut r = n;
    while r > 0 {
        let l = start[r];
        let (mean, _) = moments.stats_unchecked(l, r);
        values[l..r].iter_mut().for_each(|v| *v = mean);
        r = l;
    }
    Ok(PiecewiseSignal::from_values(values.into()))
}

/// Jump count of the candidate whose last segment starts at `l`.
#[inline]
fn jumps_after(jumps: &[usize], l: usize) -> usize {
    if l == 0 {
        0
    } else {
        jumps[l] + 1
    }
}
