//! Deterministic differentiable test objectives with matrix-shaped
//! parameters and analytic gradients — the desk-scale stand-in for model
//! pretraining. Every problem is pure: `(parameters, seed, batch index)`
//! fully determine the loss and gradients.

mod matfac;
mod mlp;
mod quadratic;

pub use matfac::{matfac_problem, MatfacProblem};
pub use mlp::{mlp_problem, MlpProblem};
pub use quadratic::{quadratic_problem, QuadraticProblem};

use crate::matrix::DenseMatrix;
use crate::params::ParamSpec;
use crate::rng::{mix_seed, SplitMix64};
use crate::scalar::Scalar;

/// Loss and per-parameter gradients at one evaluation point.
#[derive(Debug, Clone)]
pub struct Evaluation<T> {
    pub loss: T,
    pub grads: Vec<DenseMatrix<T>>,
}

/// A differentiable objective over a named set of matrix parameters.
pub trait Problem<T: Scalar> {
    fn name(&self) -> &str;

    /// Parameter names, shapes, and routing kinds, in storage order.
    fn manifest(&self) -> &[ParamSpec];

    /// Deterministic seeded initial parameter values.
    fn init_params(&self, seed: u64) -> Vec<DenseMatrix<T>>;

    /// Loss and gradients on the batch with index `batch` (ignored by
    /// deterministic full-batch problems).
    fn eval(&self, params: &[DenseMatrix<T>], batch: u64) -> Evaluation<T>;
}

/// Independent per-parameter Gaussian init streams derived from `seed`.
pub(crate) fn init_stream(seed: u64, param_index: usize) -> SplitMix64 {
    SplitMix64::new(mix_seed(seed ^ ((param_index as u64 + 1) << 32)))
}

/// Central-difference gradient `(L(θ+h·e) − L(θ−h·e)) / 2h` per coordinate,
/// on the same fixed batch as the analytic call. Test oracle: exact on
/// losses quadratic in each coordinate, O(h²) truncation otherwise.
pub fn finite_diff_grad<T: Scalar>(
    problem: &dyn Problem<T>,
    params: &[DenseMatrix<T>],
    h: T,
    batch: u64,
) -> Vec<DenseMatrix<T>> {
    assert!(h > T::zero(), "finite_diff_grad needs h > 0");
    let two_h = h + h;
    let mut work: Vec<DenseMatrix<T>> = params.to_vec();
    let mut grads = Vec::with_capacity(params.len());
    for p in 0..params.len() {
        let (rows, cols) = params[p].shape();
        let mut grad = DenseMatrix::zeros(rows, cols);
        for idx in 0..rows * cols {
            let original = params[p].data()[idx];
            work[p].data_mut()[idx] = original + h;
            let plus = problem.eval(&work, batch).loss;
            work[p].data_mut()[idx] = original - h;
            let minus = problem.eval(&work, batch).loss;
            work[p].data_mut()[idx] = original;
            grad.data_mut()[idx] = (plus - minus) / two_h;
        }
        grads.push(grad);
    }
    grads
}

/// Per-parameter relative Frobenius error between two gradient lists:
/// `‖a_p − b_p‖_F / max(‖b_p‖_F, floor)`, reported as the worst parameter.
pub fn max_relative_gradient_error<T: Scalar>(
    approx: &[DenseMatrix<T>],
    exact: &[DenseMatrix<T>],
) -> T {
    assert_eq!(approx.len(), exact.len());
    let floor = T::from_f64_const(1e-12);
    let mut worst = T::zero();
    for (a, b) in approx.iter().zip(exact.iter()) {
        let diff = crate::linalg::frobenius_norm(&a.sub(b));
        let scale = crate::linalg::frobenius_norm(b).max(floor);
        worst = worst.max(diff / scale);
    }
    worst
}
