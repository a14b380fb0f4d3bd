//! Elementwise Adam, the coordinate-wise baseline and scalar-path optimizer.

use super::{check_same_shape, OptimizerConfig};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::{CoreError, Result};

/// Adam moments: first moment `M`, elementwise second moment `V`, and the
/// completed-step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    m: DenseMatrix<T>,
    v: DenseMatrix<T>,
    t: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            m: DenseMatrix::zeros(rows, cols),
            v: DenseMatrix::zeros(rows, cols),
            t: 0,
        }
    }

    /// Assemble a state from existing buffers (tests, checkpoints).
    pub fn from_parts(m: DenseMatrix<T>, v: DenseMatrix<T>, t: u64) -> Result<Self> {
        if !m.same_shape(&v) {
            return Err(CoreError::Shape("Adam moments must share a shape".into()));
        }
        Ok(Self { m, v, t })
    }

    pub fn first_moment(&self) -> &DenseMatrix<T> {
        &self.m
    }

    pub fn second_moment(&self) -> &DenseMatrix<T> {
        &self.v
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn stored_elems(&self) -> usize {
        self.m.len() + self.v.len()
    }
}

/// One Adam step:
///
/// ```text
/// M' = β₁M + (1−β₁)G        V' = β₂V + (1−β₂)G⊙G
/// W' = W − lr · (M'/(1−β₁^{t+1})) / sqrt((V'+ε)/(1−β₂^{t+1}))
/// ```
pub fn adam_step<T: Scalar>(
    w: &DenseMatrix<T>,
    g: &DenseMatrix<T>,
    state: &AdamState<T>,
    cfg: &OptimizerConfig<T>,
    lr: T,
) -> Result<(DenseMatrix<T>, AdamState<T>)> {
    check_same_shape("adam_step", w, g)?;
    if !w.same_shape(&state.m) {
        return Err(CoreError::Shape(format!(
            "adam_step: state is {}x{} but weight is {}x{}",
            state.m.rows(),
            state.m.cols(),
            w.rows(),
            w.cols()
        )));
    }
    let (b1, b2, eps) = (cfg.beta1, cfg.beta2, cfg.eps);
    let m = state.m.lincomb(b1, g, T::one() - b1);
    let v = state.v.zip_map(g, |v, g| b2 * v + (T::one() - b2) * g * g);

    let exp = (state.t + 1) as i32;
    let bc1 = T::one() - b1.powi(exp);
    let bc2 = T::one() - b2.powi(exp);
    let update = m.zip_map(&v, |m, v| (m / bc1) / ((v + eps) / bc2).sqrt());
    let w_next = w.zip_map(&update, |w, u| w - lr * u);

    Ok((w_next, AdamState { m, v, t: state.t + 1 }))
}
