//! COSMOS: SOAP-style adaptive preconditioning on the tracked leading
//! eigensubspace, MUON-style NS5 orthogonalization on the residual.

use super::{check_same_shape, orient, OptimizerConfig};
use crate::linalg::{frobenius_norm, norm_op, ns5, ZERO_TOL};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::subspace::{tracker_init, tracker_step, TrackerState};
use crate::{CoreError, Result};

/// COSMOS per-layer state (post-orientation, m >= n >= r): momentum `M`
/// (m x n), the subspace tracker (`U` n x r, `S` r x r), and the projected
/// second moment `V` (m x r).
#[derive(Debug, Clone, PartialEq)]
pub struct CosmosState<T> {
    m: DenseMatrix<T>,
    tracker: TrackerState<T>,
    v: DenseMatrix<T>,
    t: u64,
}

impl<T: Scalar> CosmosState<T> {
    /// Fresh state for a `rows x cols` parameter; `seed` drives the tracker
    /// basis initialization.
    pub fn new(rows: usize, cols: usize, rank: usize, seed: u64) -> Result<Self> {
        let (m, n) = super::oriented_shape(rows, cols);
        if rank > n {
            return Err(CoreError::Config(format!(
                "cosmos rank {rank} exceeds the oriented column count {n}"
            )));
        }
        Ok(Self {
            m: DenseMatrix::zeros(m, n),
            tracker: tracker_init(n, rank, seed)?,
            v: DenseMatrix::zeros(m, rank),
            t: 0,
        })
    }

    pub fn from_parts(
        m: DenseMatrix<T>,
        tracker: TrackerState<T>,
        v: DenseMatrix<T>,
        t: u64,
    ) -> Result<Self> {
        if m.rows() < m.cols()
            || tracker.dim() != m.cols()
            || v.shape() != (m.rows(), tracker.rank())
        {
            return Err(CoreError::Shape("inconsistent COSMOS state shapes".into()));
        }
        Ok(Self { m, tracker, v, t })
    }

    pub fn momentum(&self) -> &DenseMatrix<T> {
        &self.m
    }

    pub fn tracker(&self) -> &TrackerState<T> {
        &self.tracker
    }

    pub fn projected_second_moment(&self) -> &DenseMatrix<T> {
        &self.v
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn rank(&self) -> usize {
        self.tracker.rank()
    }

    pub fn stored_elems(&self) -> usize {
        self.m.len() + self.tracker.stored_elems() + self.v.len()
    }
}

/// One COSMOS step:
///
/// ```text
/// M'       = β₁M + (1−β₁)G
/// (U', S') = tracker_step(U, S, G, β₂)
/// V'       = β₂V + (1−β₂)(GU')⊙(GU')
/// A        = [(M'U'/(1−β₁^{t+1})) / sqrt((V'+ε)/(1−β₂^{t+1}))]·U'ᵀ
/// D        = M' − M'U'U'ᵀ               (exactly 0 when r = n)
/// B        = NORM(NS5(D/‖D‖_F))         (0 when ‖D‖_F saturates)
/// G̃        = A + γ·√m·B
/// W'       = W − lr·√m·NORM(G̃)
/// ```
pub fn cosmos_step<T: Scalar>(
    w: &DenseMatrix<T>,
    g: &DenseMatrix<T>,
    state: &CosmosState<T>,
    cfg: &OptimizerConfig<T>,
    lr: T,
) -> Result<(DenseMatrix<T>, CosmosState<T>)> {
    check_same_shape("cosmos_step", w, g)?;
    let (wo, go, transposed) = orient(w, g);
    if !wo.same_shape(&state.m) {
        return Err(CoreError::Shape(format!(
            "cosmos_step: state is {}x{} but oriented weight is {}x{}",
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
    let tracker = tracker_step(&state.tracker, &go, b2)?;
    let basis = tracker.basis();

    let gu = go.matmul(basis); // m x r
    let v = state.v.zip_map(&gu, |v, p| b2 * v + (T::one() - b2) * p * p);

    let exp = (state.t + 1) as i32;
    let bc1 = T::one() - b1.powi(exp);
    let bc2 = T::one() - b2.powi(exp);
    let mu = m.matmul(basis); // m x r
    let quotient = mu.zip_map(&v, |p, v| (p / bc1) / ((v + eps) / bc2).sqrt());
    let subspace_update = quotient.matmul_tr(basis); // A, m x n

    // Residual momentum: identically zero at full rank, where U'U'ᵀ = I.
    let residual = if rank == cols {
        DenseMatrix::zeros(rows, cols)
    } else {
        m.sub(&mu.matmul_tr(basis))
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
    let w_next = wo.zip_map(&direction, |w, d| w - lr * sqrt_m * d);
    let w_next = if transposed { w_next.transpose() } else { w_next };

    Ok((
        w_next,
        CosmosState {
            m,
            tracker,
            v,
            t: state.t + 1,
        },
    ))
}
