use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::Signal;

/// Ground-truth family of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    /// Piecewise constant with exactly `jumps` jumps.
    JumpSparse {
        n: usize,
        jumps: usize,
        min_plateau: usize,
        range: [f64; 2],
    },
    /// Exactly `support` non-zero entries.
    Sparse {
        n: usize,
        support: usize,
        amplitude: [f64; 2],
    },
}

impl SignalSpec {
    pub fn len(&self) -> usize {
        match *self {
            Self::JumpSparse { n, .. } | Self::Sparse { n, .. } => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Self::Sparse { .. })
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Signal> {
        match *self {
            Self::JumpSparse {
                n,
                jumps,
                min_plateau,
                range,
            } => gen_jump_sparse(n, jumps, min_plateau, range, rng),
            Self::Sparse { n, support, amplitude } => gen_sparse(n, support, amplitude, rng),
        }
    }
}

fn check_range(range: [f64; 2]) -> Result<f64> {
    let width = range[1] - range[0];
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Infeasible(format!("empty value range {range:?}")));
    }
    Ok(width)
}

/// Piecewise-constant signal with exactly `k_jumps` jumps.
///
/// Plateau lengths are at least `min_plateau` and otherwise uniform over all
/// admissible splits; values are uniform in `range` with neighbouring
/// plateaus at least a tenth of the range width apart.
pub fn gen_jump_sparse<R: Rng + ?Sized>(
    n: usize,
    k_jumps: usize,
    min_plateau: usize,
    range: [f64; 2],
    rng: &mut R,
) -> Result<Signal> {
    let width = check_range(range)?;
    let plateaus = k_jumps + 1;
    let need = plateaus * min_plateau.max(1);
    if n == 0 || need > n {
        return Err(Error::Infeasible(format!(
            "{plateaus} plateaus of length >= {} do not fit in n = {n}",
            min_plateau.max(1)
        )));
    }
    // stars and bars: slack distributed uniformly over the plateaus
    let slack = n - need;
    let mut bars: Vec<usize> = sample(rng, slack + k_jumps, k_jumps).into_vec();
    bars.sort_unstable();
    let mut lengths = Vec::with_capacity(plateaus);
    let mut prev = 0;
    for (i, &bar) in bars.iter().enumerate() {
        let extra = bar - i - prev;
        lengths.push(min_plateau.max(1) + extra);
        prev = bar - i;
    }
    lengths.push(min_plateau.max(1) + slack - prev);
    let mut values = Vec::with_capacity(n);
    let mut last: Option<f64> = None;
    for len in lengths {
        let value = loop {
            let v = rng.gen_range(range[0]..=range[1]);
            if last.map_or(true, |p: f64| (v - p).abs() >= 0.1 * width) {
                break v;
            }
        };
        values.extend(std::iter::repeat(value).take(len));
        last = Some(value);
    }
    Ok(values.into())
}

/// Signal with exactly `k_support` non-zeros at uniformly random positions.
/// Amplitudes are uniform in `amp_range` minus `(-rho, rho)` with `rho` a
/// twentieth of the range width.
pub fn gen_sparse<R: Rng + ?Sized>(n: usize, k_support: usize, amp_range: [f64; 2], rng: &mut R) -> Result<Signal> {
    let width = check_range(amp_range)?;
    if n == 0 || k_support > n {
        return Err(Error::Infeasible(format!("support {k_support} does not fit in n = {n}")));
    }
    let rho = 0.05 * width;
    let mut x = vec![0.0; n];
    for i in sample(rng, n, k_support) {
        x[i] = loop {
            let v = rng.gen_range(amp_range[0]..=amp_range[1]);
            if v.abs() >= rho {
                break v;
            }
        };
    }
    Ok(x.into())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn jump_sparse_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let flat = gen_jump_sparse(10, 0, 3, [0.0, 1.0], &mut rng).unwrap();
        assert_eq!(flat.jump_count(), 0);
        let x = gen_jump_sparse(256, 6, 10, [0.0, 1.0], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(x.jump_count(), 6);
        let y = gen_jump_sparse(256, 6, 10, [0.0, 1.0], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(x, y);
        assert!(gen_jump_sparse(10, 4, 3, [0.0, 1.0], &mut rng).is_err());
        assert!(gen_jump_sparse(10, 1, 3, [1.0, 1.0], &mut rng).is_err());
    }

    #[test]
    fn sparse_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(gen_sparse(8, 0, [-1.0, 1.0], &mut rng).unwrap().support_size(), 0);
        let x = gen_sparse(100, 7, [-1.0, 1.0], &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(x.support_size(), 7);
        assert!(x.iter().all(|v| *v == 0.0 || v.abs() >= 0.1));
        assert_eq!(x, gen_sparse(100, 7, [-1.0, 1.0], &mut ChaCha8Rng::seed_from_u64(3)).unwrap());
        assert!(gen_sparse(4, 5, [-1.0, 1.0], &mut rng).is_err());
        assert!(gen_sparse(4, 1, [0.5, 0.5], &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn jump_sparse_structure(seed in 0u64..1000, k in 0usize..8, min_plateau in 1usize..6) {
            let n = 64;
            prop_assume!((k + 1) * min_plateau <= n);
            let x = gen_jump_sparse(n, k, min_plateau, [-1.0, 2.0], &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(x.len(), n);
            prop_assert_eq!(x.jump_count(), k);
            let mut start = 0;
            for i in 1..=n {
                if i == n || x[i] != x[i - 1] {
                    prop_assert!(i - start >= min_plateau);
                    if i < n {
                        prop_assert!((x[i] - x[i - 1]).abs() >= 0.3 - 1e-12);
                    }
                    start = i;
                }
            }
            prop_assert!(x.iter().all(|v| (-1.0..=2.0).contains(v)));
        }
    }
}
