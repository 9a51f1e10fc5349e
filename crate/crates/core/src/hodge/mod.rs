//! Discrete de Rham-Dirac operator on periodic grids and its heat semigroup.

mod grid;
mod heat;
mod krylov;
mod operator;
mod weitzenbock;

pub use grid::{Differentiation, Grid};
pub use heat::{
    evolve, heat_diag, heat_diag_series, mckean_singer, mckean_singer_series, mckean_singer_spectral, richardson, str_density,
    supertrace_profile, SupertraceProfile,
};
pub use krylov::{expmv, KrylovOptions, KrylovStats};
pub use operator::{assemble_dirac, dense_matrix, GeneratorTable, HeatOperator, NodeCoefficients, DEFAULT_MEMORY_CAP};
pub use weitzenbock::{
    weitzenbock_check, weitzenbock_constant, weitzenbock_residual, TestSection, WeitzenbockLevel, WeitzenbockReport,
};
