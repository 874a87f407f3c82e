//! Expansive similarity dilations on `Z^d` (`d ≤ 3`).
//!
//! A matrix `A` whose eigenvalues share one modulus `|λ| > 1` is replaced by
//! `B = (A^T)^p` with `|λ|^p > 1 + √d`; then the digits `Z^d ∩ B((−½, ½]^d)`
//! give every lattice vector a finite base-`B` expansion, the attractor
//! `T = {Σ_{j≥1} B^{-j} r_{i_j}}` tiles `R^d` by `Z^d`, and the filter
//! `M̃(ξ) = ∏_{j<p} M((A^T)^j ξ)` defines product measures on `Z^d`.
//!
//! All lattice arithmetic is exact; only filter values and tile coordinates
//! are floating point.

pub mod digits;
pub mod filter;
pub mod matrix;
pub mod measure;
pub mod tile;

/// Cap on digit strings, grid points or enumerated candidates.
pub const EXHAUSTIVE_BUDGET: u128 = 10_000_000;

pub use digits::{build_digit_system, coset_representatives, digit_system_with_power, DigitSystem, LatticeExpansion};
pub use filter::{cube_grid, m_tilde, multidim_qmf_check, DigitAverageFilter, LatticeFilter, MTilde, MdValidation, SeparableFilter};
pub use matrix::{analyze_matrix, choose_power, IntMatrix, LatticeMatrix};
pub use measure::{
    multidim_condition_c, multidim_p_table, multidim_tightness, retained_on_level, MdConditionC, MdTable,
    MdTightnessConfig, MdTightnessReport,
};
pub use tile::{
    sample_tile, tile_measure_by_membership, tile_measure_estimate, translate_overlaps, TileMeasure, TileMode,
    TileSample, TranslateOverlap,
};
