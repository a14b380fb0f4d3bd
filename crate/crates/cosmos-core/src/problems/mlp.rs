//! Two-layer tanh network with softmax cross-entropy on a seeded
//! Gaussian-mixture classification set. The one non-convex, batched,
//! mixed-parameter-kind problem: a hidden weight matrix, an output head
//! routed like an embedding, and two bias vectors.

use super::{init_stream, Evaluation, Problem};
use crate::matrix::DenseMatrix;
use crate::params::{ParamKind, ParamSpec};
use crate::rng::{mix_seed, SplitMix64};
use crate::scalar::Scalar;
use crate::{CoreError, Result};

/// Class means are drawn at this multiple of the unit Gaussian, which keeps
/// the mixture separable but not trivially so.
const MEAN_SPREAD: f64 = 2.0;

pub struct MlpProblem<T> {
    features: DenseMatrix<T>, // n_samples x d_in
    labels: Vec<usize>,
    d_out: usize,
    batch_size: usize,
    seed: u64,
    manifest: Vec<ParamSpec>,
}

/// Gaussian-mixture classifier: sample i carries label `i mod d_out` and
/// features `mean[label] + N(0, I)`. Batches walk a seeded Fisher-Yates
/// epoch permutation, `floor(n_samples / batch)` batches per epoch.
pub fn mlp_problem<T: Scalar>(
    d_in: usize,
    d_hidden: usize,
    d_out: usize,
    n_samples: usize,
    batch: usize,
    seed: u64,
) -> Result<MlpProblem<T>> {
    if d_in == 0 || d_hidden == 0 || d_out == 0 {
        return Err(CoreError::Config("mlp dimensions must be positive".into()));
    }
    if batch == 0 || batch > n_samples {
        return Err(CoreError::Config(format!(
            "mlp needs 1 <= batch <= n_samples, got batch={batch}, n_samples={n_samples}"
        )));
    }
    let mut gen = SplitMix64::new(seed);
    let means = gen
        .gaussian_matrix::<T>(d_out, d_in)
        .scale(T::from_f64_const(MEAN_SPREAD));
    let labels: Vec<usize> = (0..n_samples).map(|i| i % d_out).collect();
    let features = DenseMatrix::from_fn(n_samples, d_in, |i, j| {
        means[(labels[i], j)] + T::from_f64_const(gen.next_gaussian())
    });
    Ok(MlpProblem {
        features,
        labels,
        d_out,
        batch_size: batch,
        seed,
        manifest: vec![
            ParamSpec::new("w1", d_in, d_hidden, ParamKind::MatrixHidden),
            ParamSpec::new("b1", 1, d_hidden, ParamKind::Vector),
            ParamSpec::new("w2", d_hidden, d_out, ParamKind::EmbeddingLike),
            ParamSpec::new("b2", 1, d_out, ParamKind::Vector),
        ],
    })
}

impl<T: Scalar> MlpProblem<T> {
    fn batches_per_epoch(&self) -> u64 {
        (self.labels.len() / self.batch_size) as u64
    }

    /// Row indices of batch `batch`: slot `batch % B` of the epoch
    /// permutation seeded by `mix_seed(seed ^ (epoch + 1))`.
    fn batch_indices(&self, batch: u64) -> Vec<usize> {
        let per_epoch = self.batches_per_epoch();
        let epoch = batch / per_epoch;
        let slot = (batch % per_epoch) as usize;
        let mut gen = SplitMix64::new(mix_seed(self.seed ^ (epoch + 1)));
        let order = gen.shuffled_indices(self.labels.len());
        order[slot * self.batch_size..(slot + 1) * self.batch_size].to_vec()
    }
}

impl<T: Scalar> Problem<T> for MlpProblem<T> {
    fn name(&self) -> &str {
        "mlp"
    }

    fn manifest(&self) -> &[ParamSpec] {
        &self.manifest
    }

    fn init_params(&self, seed: u64) -> Vec<DenseMatrix<T>> {
        self.manifest
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                if spec.kind == ParamKind::Vector {
                    DenseMatrix::zeros(spec.rows, spec.cols)
                } else {
                    // fan-in scaled Gaussian
                    let scale = T::one() / T::from_dim(spec.rows).sqrt();
                    init_stream(seed, i)
                        .gaussian_matrix::<T>(spec.rows, spec.cols)
                        .scale(scale)
                }
            })
            .collect()
    }

    fn eval(&self, params: &[DenseMatrix<T>], batch: u64) -> Evaluation<T> {
        let (w1, b1, w2, b2) = (&params[0], &params[1], &params[2], &params[3]);
        let idx = self.batch_indices(batch);
        let b = idx.len();
        let d_in = self.features.cols();

        let x = DenseMatrix::from_fn(b, d_in, |i, j| self.features[(idx[i], j)]);
        // Forward: Z1 = XW1 + b1, A = tanh(Z1), Z2 = AW2 + b2, softmax rows.
        let z1 = x.matmul(w1);
        let z1 = DenseMatrix::from_fn(z1.rows(), z1.cols(), |i, j| z1[(i, j)] + b1[(0, j)]);
        let act = z1.map(|z| z.tanh());
        let z2 = act.matmul(w2);
        let z2 = DenseMatrix::from_fn(z2.rows(), z2.cols(), |i, j| z2[(i, j)] + b2[(0, j)]);

        let inv_b = T::one() / T::from_dim(b);
        let mut loss = T::zero();
        let mut dz2 = DenseMatrix::zeros(b, self.d_out);
        for i in 0..b {
            let mut row_max = z2[(i, 0)];
            for j in 1..self.d_out {
                row_max = row_max.max(z2[(i, j)]);
            }
            let mut denom = T::zero();
            for j in 0..self.d_out {
                denom += (z2[(i, j)] - row_max).exp();
            }
            let label = self.labels[idx[i]];
            loss -= (z2[(i, label)] - row_max - denom.ln()) * inv_b;
            for j in 0..self.d_out {
                let p = (z2[(i, j)] - row_max).exp() / denom;
                let target = if j == label { T::one() } else { T::zero() };
                dz2[(i, j)] = (p - target) * inv_b;
            }
        }

        // Backward pass.
        let g_w2 = act.tr_matmul(&dz2);
        let g_b2 = column_sums(&dz2);
        let da = dz2.matmul_tr(w2);
        let dz1 = da.zip_map(&act, |d, a| d * (T::one() - a * a));
        let g_w1 = x.tr_matmul(&dz1);
        let g_b1 = column_sums(&dz1);

        Evaluation {
            loss,
            grads: vec![g_w1, g_b1, g_w2, g_b2],
        }
    }
}

fn column_sums<T: Scalar>(m: &DenseMatrix<T>) -> DenseMatrix<T> {
    DenseMatrix::from_fn(1, m.cols(), |_, j| {
        let mut acc = T::zero();
        for i in 0..m.rows() {
            acc += m[(i, j)];
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{finite_diff_grad, max_relative_gradient_error};
    use crate::Mat64;

    fn tiny() -> MlpProblem<f64> {
        mlp_problem(4, 6, 3, 20, 5, 42).unwrap()
    }

    #[test]
    fn zero_weights_give_uniform_softmax_loss() {
        let p = tiny();
        let zeros: Vec<Mat64> = p
            .manifest()
            .iter()
            .map(|s| Mat64::zeros(s.rows, s.cols))
            .collect();
        let ev = p.eval(&zeros, 0);
        assert!((ev.loss - 3.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences_on_a_fixed_batch() {
        let p = tiny();
        let point = p.init_params(9);
        let analytic = p.eval(&point, 3).grads;
        let fd = finite_diff_grad(&p, &point, 1e-5, 3);
        let err = max_relative_gradient_error(&fd, &analytic);
        assert!(err < 1e-5, "relative error {err}");
    }

    #[test]
    fn same_batch_index_is_deterministic() {
        let p = tiny();
        let point = p.init_params(1);
        let a = p.eval(&point, 7);
        let b = p.eval(&point, 7);
        assert_eq!(a.loss, b.loss);
        for (x, y) in a.grads.iter().zip(b.grads.iter()) {
            assert_eq!(x.data(), y.data());
        }
    }

    #[test]
    fn batches_cover_the_epoch_without_replacement() {
        let p = tiny();
        let per_epoch = p.batches_per_epoch() as usize;
        let mut seen = vec![false; 20];
        for b in 0..per_epoch {
            for i in p.batch_indices(b as u64) {
                assert!(!seen[i], "index {i} repeated within an epoch");
                seen[i] = true;
            }
        }
        assert_eq!(seen.iter().filter(|&&s| s).count(), 20);
    }

    #[test]
    fn invalid_batch_size_is_rejected() {
        assert!(mlp_problem::<f64>(4, 6, 3, 10, 11, 0).is_err());
        assert!(mlp_problem::<f64>(4, 6, 3, 10, 0, 0).is_err());
    }
}
