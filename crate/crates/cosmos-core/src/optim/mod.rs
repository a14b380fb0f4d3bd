//! The optimizer family: Adam, MUON, one-sided SOAP, COSMOS, and two-sided
//! COSMOS, all as pure step functions over `(weights, gradient, state)`.
//!
//! Shared conventions:
//! - Orientation: matrix preconditioning assumes rows >= cols. Parameters
//!   with rows < cols are processed as their transpose and the update is
//!   transposed back; state buffers are always stored post-orientation, and
//!   the `√m` / `NORM` dimension factors refer to post-orientation shapes.
//! - Bias correction uses exponent `t+1` with `t` counting completed steps,
//!   so the first step divides by `1 − β` rather than zero.
//! - `ε` is added to the second moment before its bias-correction division,
//!   inside the square root.
//! - Any Frobenius-norm division saturates to zero at [`crate::linalg::ZERO_TOL`].

mod adam;
mod cosmos;
mod cosmos2;
mod muon;
mod schedule;
mod soap;

pub use adam::{adam_step, AdamState};
pub use cosmos::{cosmos_step, CosmosState};
pub use cosmos2::{cosmos2_step, Cosmos2State};
pub use muon::{muon_step, MuonState};
pub use schedule::{lr_at, ScheduleConfig};
pub use soap::{soap1_step, Soap1State};

use crate::matrix::DenseMatrix;
use crate::params::{ParamKind, ParamSpec};
use crate::scalar::Scalar;
use crate::{CoreError, Result};

/// Optimizer selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Adam,
    Muon,
    Soap1,
    Cosmos,
    Cosmos2,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Adam => "adam",
            Algorithm::Muon => "muon",
            Algorithm::Soap1 => "soap",
            Algorithm::Cosmos => "cosmos",
            Algorithm::Cosmos2 => "cosmos2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "adam" => Some(Algorithm::Adam),
            "muon" => Some(Algorithm::Muon),
            "soap" | "soap1" => Some(Algorithm::Soap1),
            "cosmos" => Some(Algorithm::Cosmos),
            "cosmos2" => Some(Algorithm::Cosmos2),
            _ => None,
        }
    }
}

/// Discount factor combining the residual branch with the subspace branch.
/// `Auto` resolves to `lr / adam_lr` (the ratio of base rates, independent
/// of the schedule position).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma<T> {
    Auto,
    Fixed(T),
}

/// Hyperparameters shared by every step function.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    pub algorithm: Algorithm,
    /// η: learning rate of the matrix-preconditioned (hidden) parameters.
    pub lr: T,
    /// η₀: learning rate of the scalar-path Adam parameters.
    pub adam_lr: T,
    pub gamma: Gamma<T>,
    /// Projection rank of the tracked eigensubspace.
    pub rank: usize,
    pub beta1: T,
    pub beta2: T,
    /// MUON momentum.
    pub mu: T,
    pub eps: T,
    /// Reproduce the literal (non-EMA) second-moment line of one-sided SOAP.
    pub soap_l_literal: bool,
    /// Apply the extra `√m` factor to the two-sided COSMOS weight update.
    pub cosmos2_sqrt_m: bool,
    pub total_steps: u64,
    pub warmup_fraction: f64,
}

impl<T: Scalar> OptimizerConfig<T> {
    /// Config with the standard defaults: β₁ = 0.9, β₂ = 0.98, ε = 1e-8,
    /// μ = 0.9, 10% warmup, γ auto.
    pub fn new(algorithm: Algorithm, lr: T, adam_lr: T, rank: usize, total_steps: u64) -> Self {
        Self {
            algorithm,
            lr,
            adam_lr,
            gamma: Gamma::Auto,
            rank,
            beta1: T::from_f64_const(0.9),
            beta2: T::from_f64_const(0.98),
            mu: T::from_f64_const(0.9),
            eps: T::from_f64_const(1e-8),
            soap_l_literal: false,
            cosmos2_sqrt_m: false,
            total_steps,
            warmup_fraction: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: T| -> Result<()> {
            if v < T::zero() || v >= T::one() {
                return Err(CoreError::Config(format!("{name} must be in [0, 1), got {v}")));
            }
            Ok(())
        };
        if self.lr <= T::zero() {
            return Err(CoreError::Config(format!("lr must be > 0, got {}", self.lr)));
        }
        if self.adam_lr <= T::zero() {
            return Err(CoreError::Config(format!(
                "adam_lr must be > 0, got {}",
                self.adam_lr
            )));
        }
        if let Gamma::Fixed(g) = self.gamma {
            if g < T::zero() {
                return Err(CoreError::Config(format!("gamma must be >= 0, got {g}")));
            }
        }
        if self.rank == 0 {
            return Err(CoreError::Config("rank must be >= 1".into()));
        }
        unit("beta1", self.beta1)?;
        unit("beta2", self.beta2)?;
        unit("mu", self.mu)?;
        if self.eps <= T::zero() {
            return Err(CoreError::Config(format!("eps must be > 0, got {}", self.eps)));
        }
        self.matrix_schedule().validate()
    }

    /// Effective discount factor: `Auto` means `lr / adam_lr` on base rates.
    pub fn effective_gamma(&self) -> T {
        match self.gamma {
            Gamma::Auto => self.lr / self.adam_lr,
            Gamma::Fixed(g) => g,
        }
    }

    /// Schedule of the matrix-preconditioned path (base rate η).
    pub fn matrix_schedule(&self) -> ScheduleConfig<T> {
        ScheduleConfig {
            base_lr: self.lr,
            total_steps: self.total_steps,
            warmup_fraction: self.warmup_fraction,
        }
    }

    /// Schedule of the scalar Adam path (base rate η₀).
    pub fn scalar_schedule(&self) -> ScheduleConfig<T> {
        ScheduleConfig {
            base_lr: self.adam_lr,
            total_steps: self.total_steps,
            warmup_fraction: self.warmup_fraction,
        }
    }
}

/// Which optimizer a routed parameter is stepped with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// The configured matrix optimizer at rate η.
    Matrix(Algorithm),
    /// Adam at the scalar-path rate η₀.
    ScalarAdam,
}

/// Assign an optimizer to each manifest entry: matrix-hidden parameters go
/// to the configured matrix optimizer, embedding-like and vector parameters
/// to Adam at η₀.
pub fn route_params(manifest: &[ParamSpec], algorithm: Algorithm) -> Vec<Route> {
    manifest
        .iter()
        .map(|p| match p.kind {
            ParamKind::MatrixHidden => Route::Matrix(algorithm),
            ParamKind::EmbeddingLike | ParamKind::Vector => Route::ScalarAdam,
        })
        .collect()
}

/// Per-parameter optimizer state, dispatched over the routed algorithm.
#[derive(Debug, Clone)]
pub enum ParamState<T> {
    Adam(AdamState<T>),
    Muon(MuonState<T>),
    Soap1(Soap1State<T>),
    Cosmos(CosmosState<T>),
    Cosmos2(Cosmos2State<T>),
}

impl<T: Scalar> ParamState<T> {
    /// Fresh state for a parameter of the given shape under `route`.
    /// `seed` feeds the subspace tracker initialization (COSMOS variants).
    pub fn init(route: Route, rows: usize, cols: usize, rank: usize, seed: u64) -> Result<Self> {
        let algorithm = match route {
            Route::ScalarAdam => Algorithm::Adam,
            Route::Matrix(a) => a,
        };
        Ok(match algorithm {
            Algorithm::Adam => ParamState::Adam(AdamState::new(rows, cols)),
            Algorithm::Muon => ParamState::Muon(MuonState::new(rows, cols)),
            Algorithm::Soap1 => ParamState::Soap1(Soap1State::new(rows, cols)),
            Algorithm::Cosmos => ParamState::Cosmos(CosmosState::new(rows, cols, rank, seed)?),
            Algorithm::Cosmos2 => ParamState::Cosmos2(Cosmos2State::new(rows, cols, rank, seed)?),
        })
    }

    /// One optimizer step at scheduled rate `lr`; pure (state in, state out).
    pub fn step(
        self,
        w: &DenseMatrix<T>,
        g: &DenseMatrix<T>,
        cfg: &OptimizerConfig<T>,
        lr: T,
    ) -> Result<(DenseMatrix<T>, Self)> {
        Ok(match self {
            ParamState::Adam(s) => {
                let (w2, s2) = adam_step(w, g, &s, cfg, lr)?;
                (w2, ParamState::Adam(s2))
            }
            ParamState::Muon(s) => {
                let (w2, s2) = muon_step(w, g, &s, cfg, lr)?;
                (w2, ParamState::Muon(s2))
            }
            ParamState::Soap1(s) => {
                let (w2, s2) = soap1_step(w, g, &s, cfg, lr)?;
                (w2, ParamState::Soap1(s2))
            }
            ParamState::Cosmos(s) => {
                let (w2, s2) = cosmos_step(w, g, &s, cfg, lr)?;
                (w2, ParamState::Cosmos(s2))
            }
            ParamState::Cosmos2(s) => {
                let (w2, s2) = cosmos2_step(w, g, &s, cfg, lr)?;
                (w2, ParamState::Cosmos2(s2))
            }
        })
    }

    /// Number of stored optimizer-state reals (structural memory contract).
    pub fn stored_elems(&self) -> usize {
        match self {
            ParamState::Adam(s) => s.stored_elems(),
            ParamState::Muon(s) => s.stored_elems(),
            ParamState::Soap1(s) => s.stored_elems(),
            ParamState::Cosmos(s) => s.stored_elems(),
            ParamState::Cosmos2(s) => s.stored_elems(),
        }
    }
}

/// Transpose `(W, G)` into rows >= cols orientation; the flag records
/// whether the update must be transposed back.
pub(crate) fn orient<T: Scalar>(
    w: &DenseMatrix<T>,
    g: &DenseMatrix<T>,
) -> (DenseMatrix<T>, DenseMatrix<T>, bool) {
    if w.rows() < w.cols() {
        (w.transpose(), g.transpose(), true)
    } else {
        (w.clone(), g.clone(), false)
    }
}

/// Post-orientation shape of a parameter.
pub fn oriented_shape(rows: usize, cols: usize) -> (usize, usize) {
    if rows < cols {
        (cols, rows)
    } else {
        (rows, cols)
    }
}

pub(crate) fn check_same_shape<T: Scalar>(
    op: &str,
    w: &DenseMatrix<T>,
    g: &DenseMatrix<T>,
) -> Result<()> {
    if !w.same_shape(g) {
        return Err(CoreError::Shape(format!(
            "{op}: weight is {}x{} but gradient is {}x{}",
            w.rows(),
            w.cols(),
            g.rows(),
            g.cols()
        )));
    }
    Ok(())
}
