//! Symmetric banded matrices and their Cholesky factorization.

use crate::error::{Error, Result};
use crate::linops::BandRow;

/// Lower band of a symmetric `n x n` matrix with half-bandwidth `bw`.
/// Entry `(i, k)`, `0 <= i - k <= bw`, is stored at `i * (bw + 1) + (i - k)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    /// `sum_rows row^T row`, i.e. `A^T A` for a banded `A`.
    pub fn gram_of_rows(rows: &[BandRow], n: usize) -> Self {
        let bw = rows
            .iter()
            .map(|r| r.values.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
            .min(n.saturating_sub(1));
        let mut band = Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        };
        for row in rows {
            for (a, &va) in row.values.iter().enumerate() {
                let i = row.start + a;
                if i >= n {
                    break;
                }
                for (c, &vc) in row.values[..=a].iter().enumerate() {
                    let k = row.start + c;
                    band.data[i * (bw + 1) + (i - k)] += va * vc;
                }
            }
        }
        band
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[cfg(test)]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        let (i, k) = if i >= k { (i, k) } else { (k, i) };
        if i - k > self.bw {
            0.0
        } else {
            self.data[i * (self.bw + 1) + (i - k)]
        }
    }

    /// Cholesky factor of `self + shift * I`.
    pub fn cholesky_shifted(&self, shift: f64) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut l = self.data.clone();
        for i in 0..n {
            l[i * w] += shift;
        }
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut d = l[j * w];
            for k in lo..j {
                let v = l[j * w + (j - k)];
                d -= v * v;
            }
            if !(d > 0.0) {
                return Err(Error::Factorization(format!(
                    "banded matrix not positive definite at pivot {j}"
                )));
            }
            let d = d.sqrt();
            l[j * w] = d;
            for i in j + 1..=(j + bw).min(n - 1) {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = l[i * w + (i - j)];
                for k in lo_i..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                l[i * w + (i - j)] = s / d;
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..=(i + bw).min(n - 1) {
                s -= self.l[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn factorization_solves_against_dense_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 30;
        let rows: Vec<BandRow> = (0..20)
            .map(|_| {
                let start = rng.gen_range(0..n - 3);
                let len = rng.gen_range(1..=4).min(n - start);
                BandRow {
                    start,
                    values: (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                }
            })
            .collect();
        let band = SymBand::gram_of_rows(&rows, n);
        assert!(band.bandwidth() <= 3);

        let mut dense = DMatrix::<f64>::zeros(n, n);
        for row in &rows {
            for (a, va) in row.values.iter().enumerate() {
                for (c, vc) in row.values.iter().enumerate() {
                    dense[(row.start + a, row.start + c)] += va * vc;
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                assert!((band.get(i, k) - dense[(i, k)]).abs() < 1e-14);
            }
        }

        let shift = 0.3;
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = band.cholesky_shifted(shift).unwrap().solve(&rhs);
        let m = dense + DMatrix::identity(n, n) * shift;
        let res = &m * DVector::from_vec(x) - DVector::from_vec(rhs);
        assert!(res.amax() < 1e-12);
    }

    #[test]
    fn indefinite_is_rejected() {
        let band = SymBand::gram_of_rows(&[], 3);
        assert!(band.cholesky_shifted(0.0).is_err());
        assert!(band.cholesky_shifted(1.0).is_ok());
    }
}
