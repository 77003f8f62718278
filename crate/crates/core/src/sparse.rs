//! Sparsity problems `gamma ||x||_0 + ||A x - b||_p^p`.
//!
//! Writing `x = diff y` turns a sparsity problem into an inverse Potts problem
//! for `y` with operator `A diff`, which [`solve_sparse_via_potts`] hands to
//! the ADMM. [`PottsToSparseTransform`] goes the other way for `p = 2`: an
//! inverse Potts problem becomes a sparsity problem for `u = diff x` with
//! operator `A' diff^+`, and [`recover_potts_solution`] maps back.
//! [`solve_sparse_direct_admm`] runs the ADMM on the sparsity problem itself
//! with hard thresholding as the first subproblem.

use nalgebra::{DMatrix, DVector};

use crate::admm::{self, AdmmConfig, AdmmOutcome, Penalty};
use crate::error::{check_len, Error, Result};
use crate::linops::{diff, diff_pinv, support_size, MeasurementData, MeasurementOperator, Signal};
use crate::{data_misfit, Fidelity};

/// `gamma ||x||_0 + ||A x - b||_p^p` for a fixed `(A, b)`.
#[derive(Debug, Clone, Copy)]
pub struct SparseProblem<'a> {
    pub op: &'a MeasurementOperator,
    pub b: &'a MeasurementData,
    pub gamma: f64,
    pub fidelity: Fidelity,
}

impl SparseProblem<'_> {
    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        sparsity_energy(self.op, self.b, self.gamma, self.fidelity, x)
    }

    /// `schedule` with `gamma` and `p` taken from the problem.
    fn config(&self, schedule: &AdmmConfig) -> AdmmConfig {
        AdmmConfig {
            gamma: self.gamma,
            fidelity: self.fidelity,
            ..*schedule
        }
    }
}

/// `gamma ||x||_0 + ||A x - b||_p^p`.
pub fn sparsity_energy(
    op: &MeasurementOperator,
    b: &MeasurementData,
    gamma: f64,
    fidelity: Fidelity,
    x: &[f64],
) -> Result<f64> {
    Ok(gamma * support_size(x) as f64 + data_misfit(op, b, fidelity, x)?)
}

/// Componentwise minimizer of `delta ||u||_0 + ||u - w||^2`: keeps `w_i` when
/// `w_i^2 > delta`. The tie `w_i^2 = delta` goes to zero.
pub fn hard_threshold(w: &[f64], delta: f64) -> Vec<f64> {
    w.iter().map(|&x| if x * x > delta { x } else { 0.0 }).collect()
}

/// Sparse solution together with the ADMM run that produced it.
#[derive(Debug, Clone)]
pub struct SparseOutcome {
    pub solution: Signal,
    /// The inner run. For [`solve_sparse_via_potts`] it lives on signals of
    /// length `n + 1`.
    pub admm: AdmmOutcome,
}

/// Solves the sparsity problem through the inverse Potts problem with
/// operator `A diff` on length `n + 1` signals, returning the differences of
/// its solution. `gamma` and `p` come from `prob`; the rest of `schedule`
/// is used as is.
pub fn solve_sparse_via_potts(prob: &SparseProblem<'_>, schedule: &AdmmConfig) -> Result<SparseOutcome> {
    let lifted = MeasurementOperator::diff_compose(prob.op.clone());
    let cfg = prob.config(schedule);
    let admm = admm::run_ipotts_admm(&lifted, prob.b, &cfg, None)?;
    let solution = diff(&admm.solution)?;
    Ok(SparseOutcome { solution, admm })
}

/// The same ADMM loop applied to the sparsity problem directly.
pub fn solve_sparse_direct_admm(prob: &SparseProblem<'_>, schedule: &AdmmConfig) -> Result<SparseOutcome> {
    let cfg = prob.config(schedule);
    let admm = admm::run(prob.op, prob.b, &cfg, None, Penalty::Support)?;
    Ok(SparseOutcome {
        solution: admm.solution.clone(),
        admm,
    })
}

/// Reduction of a `p = 2` inverse Potts problem on length `n` signals to a
/// sparsity problem on length `n - 1`.
///
/// With `a = A e` the row sums and `s = ||a||^2`, the best constant offset for
/// a signal `x0` is `mu(x0) = d - e_row . x0`, where `d = a^T b / s` and
/// `e_row = a^T A / s`. Then `A' = A - a e_row` and `b' = b - d a`.
/// Complex operators are handled through their stacked real view, so all
/// vectors here have the stacked length.
#[derive(Debug, Clone, PartialEq)]
pub struct PottsToSparseTransform {
    pub a_prime: DMatrix<f64>,
    pub b_prime: Vec<f64>,
    pub row_sums: Vec<f64>,
    pub d: f64,
    pub e_row: Vec<f64>,
}

pub fn build_potts_to_sparse(
    op: &MeasurementOperator,
    b: &MeasurementData,
    fidelity: Fidelity,
) -> Result<PottsToSparseTransform> {
    if fidelity != Fidelity::L2 {
        return Err(Error::UnsupportedExponent(fidelity.exponent()));
    }
    check_len("Potts-to-sparse data", op.output_len(), b.len())?;
    if b.is_complex() != op.is_complex() {
        return Err(Error::InvalidArgument("data and operator disagree on complexity".into()));
    }
    let a = op.stacked_matrix();
    let bs = DVector::from_vec(b.stacked());
    let row_sums: DVector<f64> = a.column_sum();
    let s = row_sums.norm_squared();
    let scale = a.iter().map(|x| x * x).sum::<f64>();
    if !(s > 1e-28 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::TransformUndefined);
    }
    let d = row_sums.dot(&bs) / s;
    let e_row: DVector<f64> = a.tr_mul(&row_sums) / s;
    let a_prime = &a - &row_sums * e_row.transpose();
    let b_prime = &bs - &row_sums * d;
    Ok(PottsToSparseTransform {
        a_prime,
        b_prime: b_prime.as_slice().to_vec(),
        row_sums: row_sums.as_slice().to_vec(),
        d,
        e_row: e_row.as_slice().to_vec(),
    })
}

impl PottsToSparseTransform {
    /// Signal length `n` of the Potts side.
    pub fn signal_len(&self) -> usize {
        self.a_prime.ncols()
    }

    /// `mu(x0) = d - e_row . x0`.
    pub fn offset(&self, x0: &[f64]) -> f64 {
        self.d - self.e_row.iter().zip(x0).map(|(e, x)| e * x).sum::<f64>()
    }

    /// `B = A' diff^+`, an `m x (n - 1)` matrix.
    pub fn sparse_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.signal_len();
        if n < 2 {
            return Err(Error::InvalidArgument("sparse side is empty for n = 1".into()));
        }
        let mut pinv = DMatrix::zeros(n, n - 1);
        for j in 0..n - 1 {
            let mut unit = vec![0.0; n - 1];
            unit[j] = 1.0;
            pinv.set_column(j, &DVector::from_vec(diff_pinv(&unit).into_inner()));
        }
        Ok(&self.a_prime * pinv)
    }

    /// The sparsity problem's operator and data, as a real dense operator.
    pub fn sparse_problem(&self) -> Result<(MeasurementOperator, MeasurementData)> {
        Ok((
            MeasurementOperator::dense(self.sparse_matrix()?),
            MeasurementData::Real(self.b_prime.clone()),
        ))
    }
}

/// `x* = diff^+ u* + mu(diff^+ u*) e`.
pub fn recover_potts_solution(t: &PottsToSparseTransform, u_star: &[f64]) -> Result<Signal> {
    check_len("Potts recovery", t.signal_len().saturating_sub(1), u_star.len())?;
    let x0 = diff_pinv(u_star).into_inner();
    let offset = t.offset(&x0);
    Ok(x0.into_iter().map(|x| x + offset).collect::<Vec<_>>().into())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::admm::potts_energy;
    use crate::linops::{gaussian_kernel, Boundary, IndexSet, Vector};

    fn rand_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    /// Least-squares value of `||M c - b||^2` over `c`.
    fn ls_misfit(m: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
        if m.ncols() == 0 {
            return b.norm_squared();
        }
        let c = m.clone().svd(true, true).solve(b, 1e-12).unwrap();
        (m * c - b).norm_squared()
    }

    fn exhaustive_sparse_min(a: &DMatrix<f64>, b: &DVector<f64>, gamma: f64) -> f64 {
        let n = a.ncols();
        (0u32..1 << n)
            .map(|mask| {
                let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
                gamma * cols.len() as f64 + ls_misfit(&a.select_columns(&cols), b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn plateau_matrix(n: usize, mask: u32) -> DMatrix<f64> {
        let mut cols: Vec<Vec<f64>> = vec![vec![0.0; n]];
        for i in 0..n {
            if i > 0 && mask >> (i - 1) & 1 == 1 {
                cols.push(vec![0.0; n]);
            }
            cols.last_mut().unwrap()[i] = 1.0;
        }
        DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
    }

    fn exhaustive_potts_min(a: &DMatrix<f64>, b: &DVector<f64>, gamma: f64) -> (f64, Vec<f64>) {
        let n = a.ncols();
        let mut best = (f64::INFINITY, vec![]);
        for mask in 0u32..1 << (n - 1) {
            let p = plateau_matrix(n, mask);
            let ap = a * &p;
            let c = ap.clone().svd(true, true).solve(b, 1e-12).unwrap();
            let x = &p * c;
            let e = gamma * mask.count_ones() as f64 + (a * &x - b).norm_squared();
            if e < best.0 {
                best = (e, x.as_slice().to_vec());
            }
        }
        best
    }

    #[test]
    fn hard_threshold_examples() {
        assert_eq!(hard_threshold(&[3.0, 0.1], 1.0), vec![3.0, 0.0]);
        assert_eq!(hard_threshold(&[3.0, -0.1], 0.0), vec![3.0, -0.1]);
        assert_eq!(hard_threshold(&[2.0, -2.0], 4.0), vec![0.0, 0.0]);
        let once = hard_threshold(&[1.5, -0.2, 0.7], 0.4);
        assert_eq!(hard_threshold(&once, 0.4), once);
    }

    #[test]
    fn scalar_sparse_problem() {
        let op = MeasurementOperator::dense(DMatrix::from_element(1, 1, 1.0));
        let b = Vector::Real(vec![2.0]);
        let prob = SparseProblem { op: &op, b: &b, gamma: 1.0, fidelity: Fidelity::L2 };
        let out = solve_sparse_via_potts(&prob, &AdmmConfig::new(1.0, Fidelity::L2)).unwrap();
        assert!((out.solution[0] - 2.0).abs() < 1e-3, "{:?}", out.solution);
        assert!((prob.energy(&out.solution).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(prob.energy(&[0.0]).unwrap(), 4.0);
    }

    #[test]
    fn zero_data_gives_zero_for_both_methods() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let op = MeasurementOperator::dense(rand_matrix(&mut rng, 4, 7));
        let b = Vector::Real(vec![0.0; 4]);
        let prob = SparseProblem { op: &op, b: &b, gamma: 0.2, fidelity: Fidelity::L2 };
        let cfg = AdmmConfig::new(0.2, Fidelity::L2);
        for out in [solve_sparse_via_potts(&prob, &cfg).unwrap(), solve_sparse_direct_admm(&prob, &cfg).unwrap()] {
            assert!(out.solution.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn direct_admm_recovers_spikes_under_identity() {
        let mut x = vec![0.0; 12];
        x[3] = 1.0;
        x[8] = -0.7;
        let op = MeasurementOperator::identity(12);
        let b = Vector::Real(x.clone());
        let prob = SparseProblem { op: &op, b: &b, gamma: 0.1, fidelity: Fidelity::L2 };
        let out = solve_sparse_direct_admm(&prob, &AdmmConfig::new(0.1, Fidelity::L2)).unwrap();
        assert!(out.admm.converged);
        assert_eq!(out.solution.support(), vec![3, 8]);
        for (u, e) in out.solution.iter().zip(&x) {
            assert!((u - e).abs() < 1e-3);
        }
    }

    #[test]
    fn lifted_solution_is_offset_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let samples = IndexSet::random(40, 20, &mut rng).unwrap();
        let inner = MeasurementOperator::partial_convolution(gaussian_kernel(1.5, 4).unwrap(), samples, Boundary::Truncate)
            .unwrap();
        let mut x = vec![0.0; 40];
        x[10] = 1.0;
        x[25] = -0.8;
        let b = inner.apply(&x).unwrap();
        let lifted = MeasurementOperator::diff_compose(inner);
        let cfg = AdmmConfig::new(0.05, Fidelity::L2);
        let v0 = Signal::from(lifted.adjoint_stacked(&b.stacked()));
        let shifted = Signal::from(v0.iter().map(|v| v + 3.25).collect::<Vec<_>>());
        let plain = admm::run_ipotts_admm(&lifted, &b, &cfg, Some(&v0)).unwrap();
        let moved = admm::run_ipotts_admm(&lifted, &b, &cfg, Some(&shifted)).unwrap();
        let dp = diff(&plain.solution).unwrap();
        let dm = diff(&moved.solution).unwrap();
        for (a, e) in dp.iter().zip(dm.iter()) {
            assert!((a - e).abs() < 1e-8);
        }
        assert_eq!(dp.support_size(), plain.solution.jump_count());
    }

    #[test]
    fn scalar_transform() {
        let op = MeasurementOperator::dense(DMatrix::from_element(1, 1, 1.0));
        let b = Vector::Real(vec![3.0]);
        let t = build_potts_to_sparse(&op, &b, Fidelity::L2).unwrap();
        assert_eq!(t.row_sums, vec![1.0]);
        assert_eq!(t.a_prime[(0, 0)], 0.0);
        assert_eq!(t.b_prime, vec![0.0]);
        assert_eq!(t.offset(&[0.0]), 3.0);
        assert_eq!(t.offset(&[1.0]), 2.0);
        assert_eq!(recover_potts_solution(&t, &[]).unwrap().as_slice(), &[3.0]);
    }

    #[test]
    fn transform_rejects_zero_row_sums_and_l1() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let op = MeasurementOperator::dense(DMatrix::from_row_slice(1, 2, &[h, -h]));
        let b = Vector::Real(vec![1.0]);
        assert!(matches!(build_potts_to_sparse(&op, &b, Fidelity::L2), Err(Error::TransformUndefined)));
        let op = MeasurementOperator::identity(2);
        let b = Vector::Real(vec![1.0, 0.0]);
        assert!(matches!(build_potts_to_sparse(&op, &b, Fidelity::L1), Err(Error::UnsupportedExponent(1))));
    }

    #[test]
    fn residualized_operator_is_orthogonal_to_row_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = rand_matrix(&mut rng, 4, 5);
        let op = MeasurementOperator::dense(a);
        let b = Vector::Real((0..4).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let t = build_potts_to_sparse(&op, &b, Fidelity::L2).unwrap();
        for j in 0..5 {
            let s: f64 = (0..4).map(|k| t.row_sums[k] * t.a_prime[(k, j)]).sum();
            assert!(s.abs() < 1e-12);
        }
        let s: f64 = t.row_sums.iter().zip(&t.b_prime).map(|(a, b)| a * b).sum();
        assert!(s.abs() < 1e-12);
        let zero = recover_potts_solution(&t, &[0.0; 4]).unwrap();
        assert!(zero.iter().all(|x| (x - t.d).abs() < 1e-15));
    }

    #[test]
    fn reductions_agree_with_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let m = rng.gen_range(1..=4);
            let n = rng.gen_range(2..=5);
            let a = rand_matrix(&mut rng, m, n);
            let b = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
            let gamma = [0.01, 0.1, 0.5][rng.gen_range(0..3)];
            // sparsity problem vs inverse Potts with A diff on n + 1 samples
            let mut d = DMatrix::zeros(n, n + 1);
            for i in 0..n {
                d[(i, i)] = -1.0;
                d[(i, i + 1)] = 1.0;
            }
            let sparse_min = exhaustive_sparse_min(&a, &b, gamma);
            let (potts_min, _) = exhaustive_potts_min(&(&a * &d), &b, gamma);
            assert!((sparse_min - potts_min).abs() < 1e-10);
            // inverse Potts vs the transformed sparsity problem, then back
            let op = MeasurementOperator::dense(a.clone());
            let data = Vector::Real(b.as_slice().to_vec());
            let t = build_potts_to_sparse(&op, &data, Fidelity::L2).unwrap();
            let bm = t.sparse_matrix().unwrap();
            let bp = DVector::from_vec(t.b_prime.clone());
            let (potts_min, _) = exhaustive_potts_min(&a, &b, gamma);
            assert!((exhaustive_sparse_min(&bm, &bp, gamma) - potts_min).abs() < 1e-10);
            let mut best = (f64::INFINITY, vec![]);
            for mask in 0u32..1 << (n - 1) {
                let cols: Vec<usize> = (0..n - 1).filter(|j| mask >> j & 1 == 1).collect();
                let sub = bm.select_columns(&cols);
                let mut u = vec![0.0; n - 1];
                if !cols.is_empty() {
                    let c = sub.clone().svd(true, true).solve(&bp, 1e-12).unwrap();
                    for (k, &j) in cols.iter().enumerate() {
                        u[j] = c[k];
                    }
                }
                let e = gamma * cols.len() as f64 + (&bm * DVector::from_column_slice(&u) - &bp).norm_squared();
                if e < best.0 {
                    best = (e, u);
                }
            }
            let x = recover_potts_solution(&t, &best.1).unwrap();
            let e = potts_energy(&op, &data, gamma, Fidelity::L2, &x).unwrap();
            assert!((e - potts_min).abs() < 1e-10, "{e} vs {potts_min}");
        }
    }
}
