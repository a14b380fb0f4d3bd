//! Rank-r tracking of the gradient second-moment EMA.
//!
//! Instead of the dense n x n moment `H_t = β₂H_{t-1} + (1−β₂)GᵀG`, we keep
//! an orthonormal basis `U` for its leading eigenspace and the projected
//! moment `S ≈ UᵀHU`. One step substitutes the rank-r surrogate `U S Uᵀ`
//! for `H_{t-1}` and runs a one-step power iteration:
//!
//! ```text
//! U' = QR(β₂·U·S + (1−β₂)·GᵀG·U)
//! S' = U'ᵀ(β₂·U·S·Uᵀ + (1−β₂)·GᵀG)·U'
//! ```
//!
//! Every product is staged as an (m x r)/(n x r)/(r x r) chain; no n x n
//! intermediate is ever materialized. Cost is O(mnr + nr²) per step.

use crate::linalg::gram_schmidt_qr;
use crate::matrix::DenseMatrix;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::{CoreError, Result};

/// Tracked leading eigenspace: orthonormal basis `U` (n x r) and projected
/// second moment `S` (r x r, symmetric PSD up to floating-point noise).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState<T> {
    basis: DenseMatrix<T>,
    moment: DenseMatrix<T>,
}

impl<T: Scalar> TrackerState<T> {
    /// Basis `U` with orthonormal columns.
    pub fn basis(&self) -> &DenseMatrix<T> {
        &self.basis
    }

    /// Projected moment `S`.
    pub fn moment(&self) -> &DenseMatrix<T> {
        &self.moment
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    /// Stored element count (structural memory accounting): nr + r².
    pub fn stored_elems(&self) -> usize {
        self.basis.len() + self.moment.len()
    }
}

/// Fresh tracker: `U` from the QR of a seeded n x r Gaussian draw, `S = 0`.
///
/// With `S = 0` the first step degenerates to a pure power iteration on
/// `G₀ᵀG₀`, which matches the surrogate derivation with an empty history.
pub fn tracker_init<T: Scalar>(n: usize, r: usize, seed: u64) -> Result<TrackerState<T>> {
    if r == 0 || r > n {
        return Err(CoreError::Config(format!(
            "tracker rank must satisfy 1 <= r <= n, got r={r}, n={n}"
        )));
    }
    let draw = SplitMix64::new(seed).gaussian_matrix(n, r);
    Ok(TrackerState {
        basis: gram_schmidt_qr(&draw)?,
        moment: DenseMatrix::zeros(r, r),
    })
}

/// One tracking step against gradient `G` (m x n) with EMA weight `beta2`.
///
/// Pure function: state in, state out. `S'` is re-symmetrized after the
/// update; the drift it removes is pure floating-point noise.
pub fn tracker_step<T: Scalar>(
    state: &TrackerState<T>,
    grad: &DenseMatrix<T>,
    beta2: T,
) -> Result<TrackerState<T>> {
    let n = state.dim();
    if grad.cols() != n {
        return Err(CoreError::Shape(format!(
            "tracker expects gradients with {n} columns, got {}",
            grad.cols()
        )));
    }
    let one_minus = T::one() - beta2;

    // U' = QR(β₂·U·S + (1−β₂)·Gᵀ(G·U)), staged tall-skinny.
    let gu = grad.matmul(&state.basis); // m x r
    let gtgu = grad.tr_matmul(&gu); // n x r
    let us = state.basis.matmul(&state.moment); // n x r
    let basis = gram_schmidt_qr(&us.lincomb(beta2, &gtgu, one_minus))?;

    // S' = β₂·(U'ᵀU)·S·(U'ᵀU)ᵀ + (1−β₂)·(GU')ᵀ(GU'), all r x r.
    let overlap = basis.tr_matmul(&state.basis); // r x r
    let carried = overlap.matmul(&state.moment).matmul_tr(&overlap);
    let gu_new = grad.matmul(&basis); // m x r
    let fresh = gu_new.tr_matmul(&gu_new);
    let moment = carried.lincomb(beta2, &fresh, one_minus);

    let half = T::from_f64_const(0.5);
    let moment = DenseMatrix::from_fn(moment.rows(), moment.cols(), |i, j| {
        (moment[(i, j)] + moment[(j, i)]) * half
    });

    Ok(TrackerState { basis, moment })
}

/// Dense surrogate `U·S·Uᵀ` (n x n). Test oracle only: this is exactly the
/// matrix the tracker avoids materializing.
pub fn surrogate<T: Scalar>(state: &TrackerState<T>) -> DenseMatrix<T> {
    state.basis.matmul(&state.moment).matmul_tr(&state.basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, principal_angle};
    use crate::Mat64;

    #[test]
    fn init_full_rank_is_orthogonal_with_zero_moment() {
        let st: TrackerState<f64> = tracker_init(4, 4, 0).unwrap();
        assert!(st.basis().tr_matmul(st.basis()).identity_defect() < 1e-12);
        assert_eq!(frobenius_norm(st.moment()), 0.0);
    }

    #[test]
    fn init_is_orthonormal_and_deterministic() {
        let a: TrackerState<f64> = tracker_init(8, 2, 123).unwrap();
        assert!(a.basis().tr_matmul(a.basis()).identity_defect() < 1e-12);
        let b: TrackerState<f64> = tracker_init(8, 2, 123).unwrap();
        assert_eq!(a.basis().data(), b.basis().data());
        assert_eq!(a.moment().data(), b.moment().data());
    }

    #[test]
    fn init_rejects_rank_above_dimension() {
        assert!(tracker_init::<f64>(3, 4, 0).is_err());
        assert!(tracker_init::<f64>(3, 0, 0).is_err());
    }

    #[test]
    fn step_rejects_mismatched_gradient() {
        let st: TrackerState<f64> = tracker_init(4, 2, 0).unwrap();
        let g = Mat64::zeros(5, 3);
        assert!(tracker_step(&st, &g, 0.98).is_err());
    }

    #[test]
    fn power_iteration_converges_on_diagonal_gram() {
        // GᵀG = diag(9, 1, 0.01); start the basis on the *second* axis and
        // watch it migrate to the dominant one.
        let g = Mat64::from_vec(
            3,
            3,
            vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.1],
        )
        .unwrap();
        let e2 = Mat64::from_vec(3, 1, vec![0.0, 1.0, 0.0]).unwrap();
        let mut st = TrackerState {
            basis: e2,
            moment: Mat64::zeros(1, 1),
        };
        for _ in 0..50 {
            st = tracker_step(&st, &g, 0.98).unwrap();
        }
        let e1 = Mat64::from_vec(3, 1, vec![1.0, 0.0, 0.0]).unwrap();
        let angle = principal_angle(st.basis(), &e1).unwrap();
        assert!(angle < 1e-6, "angle {angle}");
        assert!((st.moment()[(0, 0)] - 9.0).abs() < 9.0 * 0.65, "S11 -> 9 (EMA warmup)");
    }

    #[test]
    fn zero_gradient_gives_refill_basis_and_zero_moment() {
        let st: TrackerState<f64> = tracker_init(5, 2, 3).unwrap();
        let st = TrackerState {
            basis: st.basis.clone(),
            moment: Mat64::zeros(2, 2),
        };
        let g = Mat64::zeros(4, 5);
        let next = tracker_step(&st, &g, 0.98).unwrap();
        // QR(0) refills deterministically: valid basis, zero moment.
        assert!(next.basis().tr_matmul(next.basis()).identity_defect() < 1e-12);
        assert_eq!(frobenius_norm(next.moment()), 0.0);
        let again = tracker_step(&st, &g, 0.98).unwrap();
        assert_eq!(next.basis().data(), again.basis().data());
    }

    #[test]
    fn beta2_zero_collapses_to_current_batch() {
        let st: TrackerState<f64> = tracker_init(4, 2, 9).unwrap();
        let g: Mat64 = SplitMix64::new(31).gaussian_matrix(6, 4);
        let next = tracker_step(&st, &g, 0.0).unwrap();
        let gtg = g.tr_matmul(&g);
        let expect_basis = gram_schmidt_qr(&gtg.matmul(st.basis())).unwrap();
        assert!(frobenius_norm(&next.basis().sub(&expect_basis)) < 1e-12);
        let expect_moment = expect_basis.tr_matmul(&gtg.matmul(&expect_basis));
        assert!(frobenius_norm(&next.moment().sub(&expect_moment)) < 1e-10);
    }

    #[test]
    fn surrogate_zero_moment_and_rank() {
        let st: TrackerState<f64> = tracker_init(6, 2, 1).unwrap();
        assert_eq!(frobenius_norm(&surrogate(&st)), 0.0);

        let g: Mat64 = SplitMix64::new(4).gaussian_matrix(8, 6);
        let st = tracker_step(&st, &g, 0.98).unwrap();
        let sur = surrogate(&st);
        // Numerical rank of U S Uᵀ cannot exceed r = 2.
        let svs = crate::linalg::oracle::singular_values(&sur).unwrap();
        assert!(svs[2] < 1e-12 * svs[0].max(1.0));
    }

    #[test]
    fn full_rank_surrogate_reproduces_moment_exactly() {
        // r = n and β₂ = 0: one step must give surrogate == GᵀG.
        let st: TrackerState<f64> = tracker_init(4, 4, 5).unwrap();
        let g: Mat64 = SplitMix64::new(6).gaussian_matrix(7, 4);
        let next = tracker_step(&st, &g, 0.0).unwrap();
        let h = g.tr_matmul(&g);
        assert!(frobenius_norm(&surrogate(&next).sub(&h)) < 1e-10);
    }

    use crate::rng::SplitMix64;
}
