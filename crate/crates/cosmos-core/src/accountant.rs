//! Memory accounting of optimizer states, in exact element counts and exact
//! rational d² coefficients for the canonical transformer block.
//!
//! The canonical block holds four d x d attention matrices plus the d x 4d
//! and 4d x d MLP matrices. Coefficients are computed in `Ratio<i64>` with
//! the rank carried symbolically as a rational multiple of d, so the
//! headline numbers (24d² Adam, 12d² MUON, 66d² SOAP, 12.915d² COSMOS at
//! r = 0.05d) come out with zero rounding.

use crate::{CoreError, Result};
use num_rational::Ratio;

/// Exact rational coefficient type.
pub type Coeff = Ratio<i64>;

/// State layout to count. `SoapTable1` is the reporting convention that
/// counts `M + V + L (n x n) + R (m x m)` with no stored eigenbases; the
/// artifact's actual one-sided SOAP state is `Soap1` (2mn + 2n²).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLayout {
    Adam,
    Muon,
    Soap1,
    SoapTable1,
    Cosmos,
    Cosmos2,
}

impl StateLayout {
    pub fn name(self) -> &'static str {
        match self {
            StateLayout::Adam => "adam",
            StateLayout::Muon => "muon",
            StateLayout::Soap1 => "soap",
            StateLayout::SoapTable1 => "soap-table1",
            StateLayout::Cosmos => "cosmos",
            StateLayout::Cosmos2 => "cosmos2",
        }
    }

    /// Whether the layout has a rank parameter.
    pub fn uses_rank(self) -> bool {
        matches!(self, StateLayout::Cosmos | StateLayout::Cosmos2)
    }

    /// All reported layouts, in table order.
    pub fn all() -> [StateLayout; 6] {
        [
            StateLayout::Adam,
            StateLayout::Muon,
            StateLayout::Soap1,
            StateLayout::SoapTable1,
            StateLayout::Cosmos,
            StateLayout::Cosmos2,
        ]
    }
}

/// Stored real values per layer, post-orientation (`m = max(rows, cols)`,
/// `n = min`):
///
/// ```text
/// adam         2mn            muon    mn
/// soap         2mn + 2n²      soap-table1  2mn + n² + m²
/// cosmos       mn + nr + r² + mr
/// cosmos2      mn + nr + mr + 3r²
/// ```
pub fn state_elems(layout: StateLayout, rows: usize, cols: usize, rank: usize) -> Result<u64> {
    if rows == 0 || cols == 0 {
        return Err(CoreError::Config("layer dimensions must be positive".into()));
    }
    let m = rows.max(cols) as u64;
    let n = rows.min(cols) as u64;
    let r = rank as u64;
    if layout.uses_rank() && (rank == 0 || r > n) {
        return Err(CoreError::Config(format!(
            "rank must satisfy 1 <= r <= min dimension {n}, got {rank}"
        )));
    }
    Ok(match layout {
        StateLayout::Adam => 2 * m * n,
        StateLayout::Muon => m * n,
        StateLayout::Soap1 => 2 * m * n + 2 * n * n,
        StateLayout::SoapTable1 => 2 * m * n + n * n + m * m,
        StateLayout::Cosmos => m * n + n * r + r * r + m * r,
        StateLayout::Cosmos2 => m * n + n * r + m * r + 3 * r * r,
    })
}

/// Canonical transformer block shapes as multiples of d.
const BLOCK_LAYERS: [(&str, i64, i64); 6] = [
    ("w_q", 1, 1),
    ("w_k", 1, 1),
    ("w_v", 1, 1),
    ("w_o", 1, 1),
    ("w_mlp_up", 1, 4),
    ("w_mlp_down", 4, 1),
];

fn layer_coefficient(layout: StateLayout, rows_d: i64, cols_d: i64, rank_ratio: Coeff) -> Coeff {
    let m = Coeff::from_integer(rows_d.max(cols_d));
    let n = Coeff::from_integer(rows_d.min(cols_d));
    let r = rank_ratio;
    let two = Coeff::from_integer(2);
    let three = Coeff::from_integer(3);
    match layout {
        StateLayout::Adam => two * m * n,
        StateLayout::Muon => m * n,
        StateLayout::Soap1 => two * m * n + two * n * n,
        StateLayout::SoapTable1 => two * m * n + n * n + m * m,
        StateLayout::Cosmos => m * n + n * r + r * r + m * r,
        StateLayout::Cosmos2 => m * n + n * r + m * r + three * r * r,
    }
}

/// Exact d² coefficient of the optimizer-state memory for the canonical
/// block, with the projection rank carried symbolically as
/// `rank_ratio · d`. With `rank_ratio = 1/20` (the r = 0.05d assumption)
/// this yields 24 (Adam), 12 (MUON), 66 (SOAP Table-1 convention), 36
/// (one-sided SOAP as stored), and 2583/200 = 12.915 (COSMOS).
pub fn block_coefficient(layout: StateLayout, rank_ratio: Coeff) -> Coeff {
    BLOCK_LAYERS
        .iter()
        .map(|&(_, a, b)| layer_coefficient(layout, a, b, rank_ratio))
        .sum()
}

/// The r = 0.05d assumption as an exact rational.
pub fn canonical_rank_ratio() -> Coeff {
    Coeff::new(1, 20)
}

/// Concrete per-layer element counts for the canonical block at width `d`.
#[derive(Debug, Clone)]
pub struct StateBudget {
    pub layout: StateLayout,
    pub d: usize,
    pub rank: usize,
    /// `(layer name, element count)` per canonical layer.
    pub per_layer: Vec<(String, u64)>,
    pub total_elems: u64,
    /// Exact `total / d²`.
    pub elems_per_d2: Coeff,
    /// Symbolic coefficient under the r = 0.05d assumption.
    pub table_coefficient: Coeff,
}

impl StateBudget {
    /// Nearest-integer headline figure (13 for COSMOS's 12.915).
    pub fn table_coefficient_rounded(&self) -> i64 {
        self.table_coefficient.round().to_integer()
    }
}

/// Budget for the canonical transformer block at width `d`; `rank` defaults
/// to `round(0.05·d)` when `None`.
pub fn transformer_budget(
    layout: StateLayout,
    d: usize,
    rank: Option<usize>,
) -> Result<StateBudget> {
    if d == 0 {
        return Err(CoreError::Config("width d must be positive".into()));
    }
    let rank = match rank {
        Some(r) => r,
        None => ((0.05 * d as f64).round() as usize).max(1),
    };
    let mut per_layer = Vec::new();
    let mut total = 0u64;
    for &(name, a, b) in &BLOCK_LAYERS {
        let elems = state_elems(layout, a as usize * d, b as usize * d, rank)?;
        total += elems;
        per_layer.push((name.to_string(), elems));
    }
    Ok(StateBudget {
        layout,
        d,
        rank,
        per_layer,
        total_elems: total,
        elems_per_d2: Coeff::new(total as i64, (d * d) as i64),
        table_coefficient: block_coefficient(layout, canonical_rank_ratio()),
    })
}
