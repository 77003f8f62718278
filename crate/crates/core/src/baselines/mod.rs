//! Comparison methods: TV and BPDN through a shared primal-dual engine,
//! orthogonal matching pursuit, and iterative hard thresholding.

mod greedy;
mod primal_dual;

pub use greedy::{solve_iht, solve_omp, IhtMode, IhtOutcome, OmpOutcome};
pub use primal_dual::{PrimalDualConfig, PrimalDualOutcome};

use primal_dual::Regularizer;

use crate::error::Result;
use crate::linops::{MeasurementData, MeasurementOperator};
use crate::Fidelity;

/// Primal-dual solve of `gamma ||diff u||_1 + ||A u - b||_p^p`.
pub fn solve_tv(
    op: &MeasurementOperator,
    b: &MeasurementData,
    gamma: f64,
    fidelity: Fidelity,
    cfg: &PrimalDualConfig,
) -> Result<PrimalDualOutcome> {
    primal_dual::solve(op, b, gamma, fidelity, Regularizer::Gradient, cfg)
}

/// Primal-dual solve of `gamma ||x||_1 + ||A x - b||_p^p`.
pub fn solve_bpdn(
    op: &MeasurementOperator,
    b: &MeasurementData,
    gamma: f64,
    fidelity: Fidelity,
    cfg: &PrimalDualConfig,
) -> Result<PrimalDualOutcome> {
    primal_dual::solve(op, b, gamma, fidelity, Regularizer::Identity, cfg)
}

/// `gamma ||diff u||_1 + ||A u - b||_p^p`.
pub fn tv_objective(
    op: &MeasurementOperator,
    b: &MeasurementData,
    gamma: f64,
    fidelity: Fidelity,
    u: &[f64],
) -> Result<f64> {
    primal_dual::objective(op, b, gamma, fidelity, Regularizer::Gradient, u)
}

/// `gamma ||x||_1 + ||A x - b||_p^p`.
pub fn bpdn_objective(
    op: &MeasurementOperator,
    b: &MeasurementData,
    gamma: f64,
    fidelity: Fidelity,
    x: &[f64],
) -> Result<f64> {
    primal_dual::objective(op, b, gamma, fidelity, Regularizer::Identity, x)
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::linops::{gaussian_kernel, Boundary, IndexSet, Vector};

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
        use rand_distr::{Distribution, StandardNormal};
        DMatrix::from_fn(m, n, |_, _| {
            let z: f64 = StandardNormal.sample(rng);
            z / (m as f64).sqrt()
        })
    }

    #[test]
    fn tv_without_penalty_returns_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = rand_vec(&mut rng, 16);
        let op = MeasurementOperator::identity(16);
        let b = Vector::Real(data.clone());
        let out = solve_tv(&op, &b, 0.0, Fidelity::L2, &PrimalDualConfig::default()).unwrap();
        for (u, e) in out.solution.iter().zip(&data) {
            assert!((u - e).abs() < 1e-6);
        }
        assert!(out.gap < 1e-8);
    }

    #[test]
    fn tv_with_huge_penalty_returns_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = rand_vec(&mut rng, 16);
        let mean = data.iter().sum::<f64>() / 16.0;
        let op = MeasurementOperator::identity(16);
        let b = Vector::Real(data);
        let out = solve_tv(&op, &b, 1e3, Fidelity::L2, &PrimalDualConfig::default()).unwrap();
        for u in out.solution.iter() {
            assert!((u - mean).abs() < 1e-6, "{u} vs {mean}");
        }
    }

    fn blurred(seed: u64, fidelity_noise: bool) -> (MeasurementOperator, Vector) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = IndexSet::random(48, 30, &mut rng).unwrap();
        let op = MeasurementOperator::partial_convolution(gaussian_kernel(2.0, 6).unwrap(), samples, Boundary::Truncate)
            .unwrap();
        let x: Vec<f64> = (0..48).map(|i| if (12..30).contains(&i) { 1.0 } else { 0.2 }).collect();
        let mut b = op.apply(&x).unwrap().stacked();
        if fidelity_noise {
            b.iter_mut().for_each(|v| *v += rng.gen_range(-0.05..0.05));
        }
        (op, Vector::Real(b))
    }

    #[test]
    fn tv_checkpoints_decrease_and_gap_closes() {
        for fidelity in [Fidelity::L2, Fidelity::L1] {
            let (op, b) = blurred(3, true);
            let out = solve_tv(&op, &b, 0.05, fidelity, &PrimalDualConfig::default()).unwrap();
            assert_eq!(out.checkpoints.len(), 100);
            for pair in out.checkpoints.windows(2) {
                assert!(pair[1].1 <= pair[0].1 + 1e-10, "{fidelity:?}: {pair:?}");
            }
            let value = out.checkpoints.last().unwrap().1;
            // the L1 data term converges noticeably slower
            let slack = if fidelity == Fidelity::L2 { 1e-3 } else { 1e-2 };
            assert!(out.gap <= slack * (1.0 + value), "{fidelity:?}: gap {}", out.gap);
        }
    }

    #[test]
    fn bpdn_without_penalty_returns_data() {
        let op = MeasurementOperator::identity(5);
        let b = Vector::Real(vec![0.3, -1.0, 0.0, 2.0, 0.25]);
        let out = solve_bpdn(&op, &b, 0.0, Fidelity::L2, &PrimalDualConfig::default()).unwrap();
        for (u, e) in out.solution.iter().zip(b.real_part()) {
            assert!((u - e).abs() < 1e-6);
        }
    }

    #[test]
    fn bpdn_large_penalty_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let op = MeasurementOperator::dense(gaussian_matrix(&mut rng, 10, 20));
        let b = Vector::Real(rand_vec(&mut rng, 10));
        let atb = op.adjoint_stacked(&b.stacked());
        let gamma = 2.0 * atb.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let out = solve_bpdn(&op, &b, gamma, Fidelity::L2, &PrimalDualConfig::default()).unwrap();
        assert!(out.solution.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn bpdn_optimality_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let op = MeasurementOperator::dense(gaussian_matrix(&mut rng, 20, 12));
        let b = Vector::Real(rand_vec(&mut rng, 20));
        let gamma = 0.3;
        let out = solve_bpdn(&op, &b, gamma, Fidelity::L2, &PrimalDualConfig::default()).unwrap();
        let x = out.solution.as_slice();
        let r: Vec<f64> = op.apply_stacked(x).iter().zip(b.stacked()).map(|(a, b)| 2.0 * (a - b)).collect();
        let g = op.adjoint_stacked(&r);
        for (gi, xi) in g.iter().zip(x) {
            let res = if *xi != 0.0 {
                (gi + gamma * xi.signum()).abs()
            } else {
                (gi.abs() - gamma).max(0.0)
            };
            assert!(res <= 1e-4, "{res}");
        }
    }

    #[test]
    fn omp_examples() {
        let op = MeasurementOperator::identity(3);
        let b = Vector::Real(vec![0.0, 5.0, 0.0]);
        let out = solve_omp(&op, &b, 1).unwrap();
        assert_eq!(out.atoms, vec![1]);
        for (a, e) in out.solution.iter().zip([0.0, 5.0, 0.0]) {
            assert!((a - e).abs() < 1e-14);
        }
        let zero = Vector::Real(vec![0.0; 3]);
        let out = solve_omp(&op, &zero, 2).unwrap();
        assert!(out.atoms.is_empty());
        assert!(out.solution.iter().all(|v| *v == 0.0));
        assert!(solve_omp(&op, &zero, 4).is_err());
    }

    #[test]
    fn omp_recovers_two_sparse_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let op = MeasurementOperator::dense(gaussian_matrix(&mut rng, 8, 16));
        let mut x = vec![0.0; 16];
        x[3] = 1.0;
        x[11] = -0.8;
        let b = op.apply(&x).unwrap();
        let out = solve_omp(&op, &b, 2).unwrap();
        let mut atoms = out.atoms.clone();
        atoms.sort();
        assert_eq!(atoms, vec![3, 11]);
        for (a, e) in out.solution.iter().zip(&x) {
            assert!((a - e).abs() < 1e-10);
        }
        for pair in out.residual_norms.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }

    #[test]
    fn omp_iterate_matches_capped_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let op = MeasurementOperator::dense(gaussian_matrix(&mut rng, 10, 14));
        let b = Vector::Real(rand_vec(&mut rng, 10));
        let full = solve_omp(&op, &b, 6).unwrap();
        for k in 0..=6 {
            let capped = solve_omp(&op, &b, k).unwrap();
            let it = full.iterate(&op, &b, k).unwrap();
            for (a, e) in it.iter().zip(capped.solution.iter()) {
                assert!((a - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn iht_examples_and_descent() {
        let op = MeasurementOperator::identity(4);
        let b = Vector::Real(vec![1.0, -2.0, 0.5, 3.0]);
        let out = solve_iht(&op, &b, IhtMode::MTerm { k: 4 }, 1.0, 1).unwrap();
        assert_eq!(out.solution.as_slice(), &[1.0, -2.0, 0.5, 3.0]);
        let zero = Vector::Real(vec![0.0; 4]);
        let out = solve_iht(&op, &zero, IhtMode::Regularized { gamma: 0.1 }, 1.0, 20).unwrap();
        assert!(out.solution.iter().all(|v| *v == 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let op = MeasurementOperator::dense(gaussian_matrix(&mut rng, 12, 20));
        let b = Vector::Real(rand_vec(&mut rng, 12));
        let norm = crate::linops::operator_norm(&op, 1e-10).unwrap();
        let step = 1.0 / (norm * norm);
        for mode in [IhtMode::MTerm { k: 3 }, IhtMode::Regularized { gamma: 0.05 }] {
            let out = solve_iht(&op, &b, mode, step, 200).unwrap();
            for pair in out.objective.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12, "{mode:?}");
            }
        }
    }
}
