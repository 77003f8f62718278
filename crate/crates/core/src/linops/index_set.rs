use rand::Rng;

use crate::error::{Error, Result};

/// Sorted, duplicate-free set of sample indices into `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    indices: Vec<usize>,
    universe: usize,
}

impl IndexSet {
    /// Builds an index set, sorting the input. Duplicates and indices outside
    /// `0..universe` are rejected.
    pub fn new(mut indices: Vec<usize>, universe: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate sample index {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= universe {
                return Err(Error::InvalidArgument(format!(
                    "sample index {last} out of range 0..{universe}"
                )));
            }
        }
        if indices.is_empty() {
            return Err(Error::InvalidArgument("sample index set is empty".into()));
        }
        Ok(Self { indices, universe })
    }

    pub fn full(universe: usize) -> Self {
        Self {
            indices: (0..universe).collect(),
            universe,
        }
    }

    /// `offset, offset + step, offset + 2 step, ...` below `universe`.
    pub fn every_kth(universe: usize, step: usize, offset: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::InvalidArgument("step must be positive".into()));
        }
        Self::new((offset..universe).step_by(step).collect(), universe)
    }

    /// `count` indices drawn uniformly without replacement.
    pub fn random<R: Rng + ?Sized>(universe: usize, count: usize, rng: &mut R) -> Result<Self> {
        if count > universe {
            return Err(Error::InvalidArgument(format!(
                "cannot draw {count} distinct samples from {universe}"
            )));
        }
        Self::new(rand::seq::index::sample(rng, universe, count).into_vec(), universe)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.universe
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}
