//! One-sided SOAP: Adam in the slowly-rotating eigenbasis of the column
//! Gram matrix, with the full n x n basis kept in state.

use super::{check_same_shape, orient, OptimizerConfig};
use crate::linalg::gram_schmidt_qr;
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::{CoreError, Result};

/// One-sided SOAP state (post-orientation, m >= n): momentum `M` (m x n),
/// second-moment Gram EMA `L` (n x n), its tracked eigenbasis `U` (n x n),
/// and the rotated second moment `V` (m x n).
#[derive(Debug, Clone, PartialEq)]
pub struct Soap1State<T> {
    m: DenseMatrix<T>,
    l: DenseMatrix<T>,
    u: DenseMatrix<T>,
    v: DenseMatrix<T>,
    t: u64,
}

impl<T: Scalar> Soap1State<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        let (m, n) = super::oriented_shape(rows, cols);
        Self {
            m: DenseMatrix::zeros(m, n),
            l: DenseMatrix::zeros(n, n),
            u: DenseMatrix::identity(n),
            v: DenseMatrix::zeros(m, n),
            t: 0,
        }
    }

    pub fn from_parts(
        m: DenseMatrix<T>,
        l: DenseMatrix<T>,
        u: DenseMatrix<T>,
        v: DenseMatrix<T>,
        t: u64,
    ) -> Result<Self> {
        let n = m.cols();
        if m.rows() < n || l.shape() != (n, n) || u.shape() != (n, n) || !v.same_shape(&m) {
            return Err(CoreError::Shape("inconsistent SOAP state shapes".into()));
        }
        Ok(Self { m, l, u, v, t })
    }

    pub fn momentum(&self) -> &DenseMatrix<T> {
        &self.m
    }

    pub fn gram_ema(&self) -> &DenseMatrix<T> {
        &self.l
    }

    pub fn basis(&self) -> &DenseMatrix<T> {
        &self.u
    }

    pub fn rotated_second_moment(&self) -> &DenseMatrix<T> {
        &self.v
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn stored_elems(&self) -> usize {
        self.m.len() + self.l.len() + self.u.len() + self.v.len()
    }
}

/// One one-sided SOAP step:
///
/// ```text
/// M' = β₁M + (1−β₁)G         L' = β₂L + (1−β₂)GᵀG
/// U' = QR(L'U)               G' = M'U'
/// V' = β₂V + (1−β₂)G'⊙G'
/// A  = [(G'/(1−β₁^{t+1})) / sqrt((V'+ε)/(1−β₂^{t+1}))]·U'ᵀ
/// W' = W − lr·A
/// ```
///
/// `L` is an EMA; setting `cfg.soap_l_literal` reproduces the degenerate
/// non-EMA variant `L' = β₂GᵀG + (1−β₂)GᵀG` for comparison.
pub fn soap1_step<T: Scalar>(
    w: &DenseMatrix<T>,
    g: &DenseMatrix<T>,
    state: &Soap1State<T>,
    cfg: &OptimizerConfig<T>,
    lr: T,
) -> Result<(DenseMatrix<T>, Soap1State<T>)> {
    check_same_shape("soap1_step", w, g)?;
    let (wo, go, transposed) = orient(w, g);
    if !wo.same_shape(&state.m) {
        return Err(CoreError::Shape(format!(
            "soap1_step: state is {}x{} but oriented weight is {}x{}",
            state.m.rows(),
            state.m.cols(),
            wo.rows(),
            wo.cols()
        )));
    }
    let (b1, b2, eps) = (cfg.beta1, cfg.beta2, cfg.eps);

    let m = state.m.lincomb(b1, &go, T::one() - b1);
    let gtg = go.tr_matmul(&go);
    let l = if cfg.soap_l_literal {
        gtg.lincomb(b2, &gtg, T::one() - b2)
    } else {
        state.l.lincomb(b2, &gtg, T::one() - b2)
    };
    let u = gram_schmidt_qr(&l.matmul(&state.u))?;
    let rotated = m.matmul(&u);
    let v = state
        .v
        .zip_map(&rotated, |v, r| b2 * v + (T::one() - b2) * r * r);

    let exp = (state.t + 1) as i32;
    let bc1 = T::one() - b1.powi(exp);
    let bc2 = T::one() - b2.powi(exp);
    let quotient = rotated.zip_map(&v, |r, v| (r / bc1) / ((v + eps) / bc2).sqrt());
    let a = quotient.matmul_tr(&u);

    let w_next = wo.zip_map(&a, |w, a| w - lr * a);
    let w_next = if transposed { w_next.transpose() } else { w_next };
    Ok((
        w_next,
        Soap1State {
            m,
            l,
            u,
            v,
            t: state.t + 1,
        },
    ))
}
