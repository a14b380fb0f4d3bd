//! Two-sided COSMOS: independent left and right eigensubspace trackers,
//! with the adaptive update compressed to an r x r core.

use super::{check_same_shape, orient, OptimizerConfig};
use crate::linalg::{frobenius_norm, norm_op, ns5, ZERO_TOL};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::subspace::{tracker_init, tracker_step, TrackerState};
use crate::{CoreError, Result};

/// Two-sided COSMOS state (post-orientation, m >= n >= r): momentum `M`
/// (m x n), right tracker (`U` n x r, `S` r x r) fed by GᵀG, left tracker
/// (`O` m x r, `R` r x r) fed by GGᵀ, and the core second moment `V` (r x r).
#[derive(Debug, Clone, PartialEq)]
pub struct Cosmos2State<T> {
    m: DenseMatrix<T>,
    right: TrackerState<T>,
    left: TrackerState<T>,
    v: DenseMatrix<T>,
    t: u64,
}

impl<T: Scalar> Cosmos2State<T> {
    /// Fresh state; the right tracker seeds from `seed`, the left from
    /// `seed + 1`.
    pub fn new(rows: usize, cols: usize, rank: usize, seed: u64) -> Result<Self> {
        let (m, n) = super::oriented_shape(rows, cols);
        if rank > n {
            return Err(CoreError::Config(format!(
                "cosmos2 rank {rank} exceeds the oriented minimum dimension {n}"
            )));
        }
        Ok(Self {
            m: DenseMatrix::zeros(m, n),
            right: tracker_init(n, rank, seed)?,
            left: tracker_init(m, rank, seed.wrapping_add(1))?,
            v: DenseMatrix::zeros(rank, rank),
            t: 0,
        })
    }

    pub fn momentum(&self) -> &DenseMatrix<T> {
        &self.m
    }

    pub fn right_tracker(&self) -> &TrackerState<T> {
        &self.right
    }

    pub fn left_tracker(&self) -> &TrackerState<T> {
        &self.left
    }

    pub fn core_second_moment(&self) -> &DenseMatrix<T> {
        &self.v
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn rank(&self) -> usize {
        self.right.rank()
    }

    pub fn stored_elems(&self) -> usize {
        self.m.len() + self.right.stored_elems() + self.left.stored_elems() + self.v.len()
    }
}

/// One two-sided COSMOS step:
///
/// ```text
/// M'       = β₁M + (1−β₁)G
/// (U', S') = tracker_step(right, G,  β₂)      // Gram GᵀG
/// (O', R') = tracker_step(left,  Gᵀ, β₂)      // Gram GGᵀ
/// V'       = β₂V + (1−β₂)(O'ᵀGU')⊙(O'ᵀGU')
/// A        = O'·[(O'ᵀM'U'/(1−β₁^{t+1})) / sqrt((V'+ε)/(1−β₂^{t+1}))]·U'ᵀ
/// D        = M' − O'O'ᵀM'U'U'ᵀ               (exactly 0 when r = m = n)
/// B        = NORM(NS5(D/‖D‖_F))
/// G̃        = A + γ·√m·B
/// W'       = W − lr·NORM(G̃)                  (√m only with cfg.cosmos2_sqrt_m)
/// ```
pub fn cosmos2_step<T: Scalar>(
    w: &DenseMatrix<T>,
    g: &DenseMatrix<T>,
    state: &Cosmos2State<T>,
    cfg: &OptimizerConfig<T>,
    lr: T,
) -> Result<(DenseMatrix<T>, Cosmos2State<T>)> {
    check_same_shape("cosmos2_step", w, g)?;
    let (wo, go, transposed) = orient(w, g);
    if !wo.same_shape(&state.m) {
        return Err(CoreError::Shape(format!(
            "cosmos2_step: state is {}x{} but oriented weight is {}x{}",
            state.m.rows(),
            state.m.cols(),
            wo.rows(),
            wo.cols()
        )));
    }
    let (b1, b2, eps) = (cfg.beta1, cfg.beta2, cfg.eps);
    let (rows, cols) = wo.shape();
    let rank = state.rank();

    let m = state.m.lincomb(b1, &go, T::one() - b1);
    let right = tracker_step(&state.right, &go, b2)?;
    let left = tracker_step(&state.left, &go.transpose(), b2)?;
    let u_basis = right.basis(); // n x r
    let o_basis = left.basis(); // m x r

    let core_grad = o_basis.tr_matmul(&go).matmul(u_basis); // r x r
    let v = state
        .v
        .zip_map(&core_grad, |v, p| b2 * v + (T::one() - b2) * p * p);

    let exp = (state.t + 1) as i32;
    let bc1 = T::one() - b1.powi(exp);
    let bc2 = T::one() - b2.powi(exp);
    let core_momentum = o_basis.tr_matmul(&m).matmul(u_basis); // r x r
    let quotient = core_momentum.zip_map(&v, |p, v| (p / bc1) / ((v + eps) / bc2).sqrt());
    let subspace_update = o_basis.matmul(&quotient).matmul_tr(u_basis); // A, m x n

    // Residual against both projectors; identically zero when both bases
    // are complete.
    let residual = if rank == rows && rank == cols {
        DenseMatrix::zeros(rows, cols)
    } else {
        let projected = o_basis
            .matmul(&o_basis.tr_matmul(&m).matmul(u_basis))
            .matmul_tr(u_basis);
        m.sub(&projected)
    };
    let res_norm = frobenius_norm(&residual);
    let residual_update = if res_norm <= T::from_f64_const(ZERO_TOL) {
        DenseMatrix::zeros(rows, cols)
    } else {
        norm_op(&ns5(&residual.scale(T::one() / res_norm))?)
    };

    let sqrt_m = T::from_dim(rows).sqrt();
    let gamma = cfg.effective_gamma();
    let combined = subspace_update.zip_map(&residual_update, |a, b| a + gamma * sqrt_m * b);
    let direction = norm_op(&combined);
    let step_scale = if cfg.cosmos2_sqrt_m { lr * sqrt_m } else { lr };
    let w_next = wo.zip_map(&direction, |w, d| w - step_scale * d);
    let w_next = if transposed { w_next.transpose() } else { w_next };

    Ok((
        w_next,
        Cosmos2State {
            m,
            right,
            left,
            v,
            t: state.t + 1,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::Algorithm;
    use crate::rng::SplitMix64;
    use crate::Mat64;

    fn cfg() -> OptimizerConfig<f64> {
        OptimizerConfig::new(Algorithm::Cosmos2, 5e-4, 2e-3, 2, 10)
    }

    #[test]
    fn zero_gradient_zero_state_is_fixed() {
        let w: Mat64 = SplitMix64::new(1).gaussian_matrix(5, 5);
        let g = Mat64::zeros(5, 5);
        let state = Cosmos2State::new(5, 5, 2, 0).unwrap();
        let (w2, _) = cosmos2_step(&w, &g, &state, &cfg(), 1e-3).unwrap();
        assert_eq!(w2.data(), w.data());
    }

    #[test]
    fn update_norm_is_lr_times_sqrt_n_without_the_extra_factor() {
        // NORM fixes ‖direction‖_F = √n; the printed update omits √m.
        let w: Mat64 = SplitMix64::new(4).gaussian_matrix(6, 6);
        let g: Mat64 = SplitMix64::new(5).gaussian_matrix(6, 6);
        let state = Cosmos2State::new(6, 6, 2, 0).unwrap();
        let lr = 1e-3;
        let (w2, _) = cosmos2_step(&w, &g, &state, &cfg(), lr).unwrap();
        let delta = frobenius_norm(&w2.sub(&w));
        assert!((delta - lr * 6.0f64.sqrt()).abs() < 1e-12);

        let mut scaled = cfg();
        scaled.cosmos2_sqrt_m = true;
        let (w3, _) = cosmos2_step(&w, &g, &state, &scaled, lr).unwrap();
        let delta = frobenius_norm(&w3.sub(&w));
        assert!((delta - lr * 6.0f64.sqrt() * 6.0f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn state_counts_six_matrices() {
        let state = Cosmos2State::<f64>::new(8, 6, 2, 0).unwrap();
        // mn + nr + r² + mr + r² + r²
        assert_eq!(state.stored_elems(), 48 + 12 + 4 + 16 + 4 + 4);
    }
}
