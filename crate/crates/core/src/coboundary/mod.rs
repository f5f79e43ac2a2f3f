//! The linear coboundary equation `φ_{β,γ} = ψ − ψ∘T_α` on the Fourier side.
//!
//! With `φ̂(n) = (1 − e^{−2πinβ})(1 − e^{2πinγ}) / (2πin)`, a solution has
//! coefficients `h_n = φ̂(n) / (1 − e^{2πinα})`; the solver truncates at `|n| <= N` and
//! measures the residual on an offset grid. The series modules report partial sums of
//! the square-summability criterion and of the majorant series used to bound it.

mod lemmas;
mod norms;
mod series;
mod transfer;

pub use lemmas::{
    lemma14_check, lemma_sum_checks, InequalityCheck, Lemma14Report, LemmaSumReport, UniquenessRow, DIRECT_LIMIT,
    INVERSE_SQUARE_CONSTANT, SPLIT_WINDOW, TAIL_CUT_CAP,
};
pub use norms::{norm_alpha_less_than, point_norm, NormOracle};
pub use series::{
    appendix_series, classify, criterion_series, criterion_series_with, gaps_decreasing, h4_series, h4_series_with,
    standard_cutoffs, AppendixReport, BlockInfo, CauchyGap, ClassCounts, KClass, SeriesReport,
};
pub use transfer::{
    fold_to_grid, fourier_phi_beta_gamma, grid_point, parseval_check, solve_transfer, step_on_grid, FourierCoefficient,
    ParsevalReport, TransferSolution, GRID_OFFSET,
};

#[doc(hidden)]
pub mod testing {
    //! Alternative implementations kept for cross-checks.
    pub use super::lemmas::{brute_hits, candidate_hits, split_sum, uniqueness_rows};
}
