//! Data envelopment analysis core.
//!
//! Radial (output-oriented CCR) and slacks-based (SBM with undesirable
//! outputs) efficiency models for decision-making units, solved through a
//! dense two-phase simplex, plus the descriptive statistics, correlation,
//! ranking and comparison utilities that sit around them.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the
//! command-line frontend live in the `dea` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > tol)` guards are meant to reject NaN too; dense kernels index by row and column.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod dataset;
pub mod linprog;
pub mod models;

mod dense;

pub use analysis::{
    compare_models, correlation_matrix, efficiency_bands, mean_row, rank_scores, rank_scores_with, AnalysisError,
    BandBasis, Bands, Comparison, ComparisonRecord, CorrelationMatrix, CorrelationMethod, MeanRow,
};
pub use dataset::{
    check_discrimination, descriptive_stats, synthesize_matching, Dataset, DatasetError, Discrimination, Indicator,
    Role, StatsRow, Violation,
};
pub use linprog::{solve, solve_with, verify_optimality, LpError, LpSolution, LpStatus, SolverConfig, StandardFormLp};
pub use models::{
    build_instance, evaluate, evaluate_all, evaluate_all_with, evaluate_ccr_output, evaluate_sbm_undesirable,
    evaluate_with, improvement_targets, linearize_ccr, linearize_sbm, EfficiencyResult, ModelError, ModelInstance,
    ModelKind, ModelSpec, Projection, RateReport, ReturnsToScale,
};
