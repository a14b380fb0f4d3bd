//! Low-rank matrix factorization: `L = 0.5·‖W₁W₂ − Y‖_F²` against a seeded
//! rank-k target plus small noise.

use super::{init_stream, Evaluation, Problem};
use crate::matrix::DenseMatrix;
use crate::params::{ParamKind, ParamSpec};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::{CoreError, Result};

const NOISE_LEVEL: f64 = 0.01;

pub struct MatfacProblem<T> {
    target: DenseMatrix<T>, // Y, p x q
    rank: usize,
    manifest: Vec<ParamSpec>,
}

/// Factorization problem with parameters `W₁` (p x k) and `W₂` (k x q);
/// `Y = LR/√k + 0.01·N` for seeded Gaussian `L`, `R`, `N`.
pub fn matfac_problem<T: Scalar>(
    rows: usize,
    cols: usize,
    rank: usize,
    seed: u64,
) -> Result<MatfacProblem<T>> {
    if rank == 0 || rank > rows.min(cols) {
        return Err(CoreError::Config(format!(
            "matfac rank must satisfy 1 <= k <= min({rows}, {cols}), got {rank}"
        )));
    }
    let mut gen = SplitMix64::new(seed);
    let l = gen.gaussian_matrix::<T>(rows, rank);
    let r = gen.gaussian_matrix::<T>(rank, cols);
    let noise = gen.gaussian_matrix::<T>(rows, cols);
    let inv_sqrt_k = T::one() / T::from_dim(rank).sqrt();
    let target = l
        .matmul(&r)
        .scale(inv_sqrt_k)
        .zip_map(&noise, |y, n| y + T::from_f64_const(NOISE_LEVEL) * n);
    Ok(MatfacProblem {
        target,
        rank,
        manifest: vec![
            ParamSpec::new("w1", rows, rank, ParamKind::MatrixHidden),
            ParamSpec::new("w2", rank, cols, ParamKind::MatrixHidden),
        ],
    })
}

impl<T: Scalar> MatfacProblem<T> {
    pub fn target(&self) -> &DenseMatrix<T> {
        &self.target
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

impl<T: Scalar> Problem<T> for MatfacProblem<T> {
    fn name(&self) -> &str {
        "matfac"
    }

    fn manifest(&self) -> &[ParamSpec] {
        &self.manifest
    }

    fn init_params(&self, seed: u64) -> Vec<DenseMatrix<T>> {
        let scale = T::from_f64_const(0.3);
        self.manifest
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                init_stream(seed, i)
                    .gaussian_matrix::<T>(spec.rows, spec.cols)
                    .scale(scale)
            })
            .collect()
    }

    fn eval(&self, params: &[DenseMatrix<T>], _batch: u64) -> Evaluation<T> {
        let (w1, w2) = (&params[0], &params[1]);
        let residual = w1.matmul(w2).sub(&self.target);
        let half = T::from_f64_const(0.5);
        let loss = half * residual.dot(&residual);
        let g1 = residual.matmul_tr(w2);
        let g2 = w1.tr_matmul(&residual);
        Evaluation {
            loss,
            grads: vec![g1, g2],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{finite_diff_grad, max_relative_gradient_error};
    use crate::Mat64;

    #[test]
    fn exact_factorization_has_zero_loss() {
        // Noise-free target built by hand from a known factorization.
        let w1: Mat64 = SplitMix64::new(1).gaussian_matrix(5, 2);
        let w2: Mat64 = SplitMix64::new(2).gaussian_matrix(2, 4);
        let p = MatfacProblem {
            target: w1.matmul(&w2),
            rank: 2,
            manifest: vec![
                ParamSpec::new("w1", 5, 2, ParamKind::MatrixHidden),
                ParamSpec::new("w2", 2, 4, ParamKind::MatrixHidden),
            ],
        };
        let ev = p.eval(&[w1, w2], 0);
        assert!(ev.loss < 1e-26);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = matfac_problem::<f64>(6, 5, 2, 11).unwrap();
        let point: Vec<Mat64> = vec![
            SplitMix64::new(70).gaussian_matrix(6, 2),
            SplitMix64::new(71).gaussian_matrix(2, 5),
        ];
        let analytic = p.eval(&point, 0).grads;
        let fd = finite_diff_grad(&p, &point, 1e-5, 0);
        let err = max_relative_gradient_error(&fd, &analytic);
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn scaling_gauge_leaves_loss_unchanged() {
        let p = matfac_problem::<f64>(6, 5, 2, 12).unwrap();
        let point = p.init_params(5);
        let c = 3.7;
        let scaled = vec![point[0].scale(c), point[1].scale(1.0 / c)];
        let a = p.eval(&point, 0).loss;
        let b = p.eval(&scaled, 0).loss;
        assert!((a - b).abs() < 1e-10 * a.max(1.0));
    }

    #[test]
    fn invalid_rank_is_rejected() {
        assert!(matfac_problem::<f64>(4, 6, 5, 0).is_err());
        assert!(matfac_problem::<f64>(4, 6, 0, 0).is_err());
    }
}
