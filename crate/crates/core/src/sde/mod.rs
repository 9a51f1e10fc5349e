//! Feynman-Kac path sampling for the heat kernel of `-½ 𝒟²`.
//!
//! Paths solve `dX = σ ∘ dw + μ dt`, `de = e C_i ∘ dX^i`,
//! `dM = -½ M e C e⁻¹ dt` with `σσᵀ = g⁻¹` and `μ` the Stratonovich form of
//! the drift `½ b`. Every path draws its noise from its own ChaCha stream
//! `(seed, path)`, so ensembles do not depend on the worker count.

mod coefficients;
mod estimators;
mod ladder;
mod orders;
mod paths;
mod report;

pub use coefficients::{LocalCoefficients, SdeSpec, DEFAULT_COND_CAP};
pub use estimators::{
    brownian, heat_diag_mc, heat_diag_mc_extrapolated, kernel_from_ensemble, levy_areas, levy_moments, KernelEstimate,
    LevyMoments,
};
pub use ladder::{ladder_check_mc, LadderInput, LadderLevel, LadderMcReport};
pub use orders::{drift_moment, epsilon_order_study, strong_order_study, DriftMoment, EpsilonStudy, StrongOrderReport};
pub use paths::{
    advance, column_estimates, heun_step, levy_from_increments, path_increments, simulate, PathEnsemble, PathRecord,
    PathState, SimOptions, MIN_BATCHES,
};
pub use report::{config_header, EstimatorRow, ESTIMATOR_HEADER, STUDY_HEADER};
