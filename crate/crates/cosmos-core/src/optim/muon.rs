//! MUON: Nesterov-style momentum orthogonalized by the NS5 iteration.

use super::{check_same_shape, orient, OptimizerConfig};
use crate::linalg::{frobenius_norm, ns5, ZERO_TOL};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::{CoreError, Result};

/// MUON momentum buffer, stored post-orientation (rows >= cols).
#[derive(Debug, Clone, PartialEq)]
pub struct MuonState<T> {
    m: DenseMatrix<T>,
    t: u64,
}

impl<T: Scalar> MuonState<T> {
    /// `rows x cols` is the parameter's own shape; the buffer is stored in
    /// rows >= cols orientation.
    pub fn new(rows: usize, cols: usize) -> Self {
        let (m, n) = super::oriented_shape(rows, cols);
        Self {
            m: DenseMatrix::zeros(m, n),
            t: 0,
        }
    }

    pub fn from_parts(m: DenseMatrix<T>, t: u64) -> Result<Self> {
        if m.rows() < m.cols() {
            return Err(CoreError::Shape(
                "MUON buffer must be stored rows >= cols".into(),
            ));
        }
        Ok(Self { m, t })
    }

    pub fn momentum(&self) -> &DenseMatrix<T> {
        &self.m
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn stored_elems(&self) -> usize {
        self.m.len()
    }
}

/// One MUON step:
///
/// ```text
/// M' = μM + G        N = μM' + G
/// B  = NS5(N/‖N‖_F)          (B = 0 when ‖N‖_F saturates)
/// W' = W − lr·√m · B
/// ```
///
/// No bias correction is applied. `√m` is the post-orientation row count.
pub fn muon_step<T: Scalar>(
    w: &DenseMatrix<T>,
    g: &DenseMatrix<T>,
    state: &MuonState<T>,
    cfg: &OptimizerConfig<T>,
    lr: T,
) -> Result<(DenseMatrix<T>, MuonState<T>)> {
    check_same_shape("muon_step", w, g)?;
    let (wo, go, transposed) = orient(w, g);
    if !wo.same_shape(&state.m) {
        return Err(CoreError::Shape(format!(
            "muon_step: state is {}x{} but oriented weight is {}x{}",
            state.m.rows(),
            state.m.cols(),
            wo.rows(),
            wo.cols()
        )));
    }

    let m = state.m.scale(cfg.mu).add(&go);
    let nesterov = m.scale(cfg.mu).add(&go);
    let norm = frobenius_norm(&nesterov);
    let b = if norm <= T::from_f64_const(ZERO_TOL) {
        DenseMatrix::zeros(wo.rows(), wo.cols())
    } else {
        ns5(&nesterov.scale(T::one() / norm))?
    };

    let sqrt_m = T::from_dim(wo.rows()).sqrt();
    let w_next = wo.zip_map(&b, |w, b| w - lr * sqrt_m * b);
    let w_next = if transposed { w_next.transpose() } else { w_next };
    Ok((w_next, MuonState { m, t: state.t + 1 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gram_schmidt_qr, ns5_scalar};
    use crate::optim::Algorithm;
    use crate::rng::SplitMix64;
    use crate::Mat64;

    fn cfg(mu: f64) -> OptimizerConfig<f64> {
        let mut cfg = OptimizerConfig::new(Algorithm::Muon, 1e-3, 2e-3, 1, 10);
        cfg.mu = mu;
        cfg
    }

    #[test]
    fn zero_gradient_zero_momentum_is_fixed() {
        let w: Mat64 = SplitMix64::new(1).gaussian_matrix(3, 2);
        let g = Mat64::zeros(3, 2);
        let state = MuonState::new(3, 2);
        let (w2, _) = muon_step(&w, &g, &state, &cfg(0.9), 1e-3).unwrap();
        assert_eq!(w2.data(), w.data());
    }

    #[test]
    fn orthogonal_gradient_updates_along_scaled_gradient_direction() {
        // μ = 0, G = c·Q: NS5 sees Q/√n, so B ≈ σ*(1/√n)·Q and the update is
        // a pure multiple of -Q.
        let n = 4;
        let q = gram_schmidt_qr(&SplitMix64::new(8).gaussian_matrix(n, n)).unwrap();
        let g = q.scale(3.0);
        let w = Mat64::zeros(n, n);
        let state = MuonState::new(n, n);
        let lr = 1e-2;
        let (w2, _) = muon_step(&w, &g, &state, &cfg(0.0), lr).unwrap();
        let sigma = ns5_scalar(1.0 / (n as f64).sqrt());
        let expect = q.scale(-lr * (n as f64).sqrt() * sigma);
        assert!(frobenius_norm(&w2.sub(&expect)) < 1e-12);
    }

    #[test]
    fn wide_parameters_are_oriented_and_transposed_back() {
        let w: Mat64 = SplitMix64::new(2).gaussian_matrix(3, 5);
        let g: Mat64 = SplitMix64::new(3).gaussian_matrix(3, 5);
        let state = MuonState::new(3, 5);
        assert_eq!(state.momentum().shape(), (5, 3));
        let (w2, s2) = muon_step(&w, &g, &state, &cfg(0.9), 1e-3).unwrap();
        assert_eq!(w2.shape(), (3, 5));

        // Same numbers as stepping the transposed parameter directly.
        let (w2t, _) = muon_step(
            &w.transpose(),
            &g.transpose(),
            &MuonState::new(5, 3),
            &cfg(0.9),
            1e-3,
        )
        .unwrap();
        assert_eq!(w2.transpose().data(), w2t.data());
        assert_eq!(s2.momentum().shape(), (5, 3));
    }
}
