//! Chart geometry for metric-compatible connections.
//!
//! Frames are orthonormal and come from the Cholesky factor of the metric,
//! `g = L Lᵀ`, with coframe `f = Lᵀ`. Contorsion is given in that frame.

mod curvature;
mod decompose;
mod euler;
mod field;
mod normal;
mod point;
mod presets;

pub use curvature::{coordinate_curvature, curvature, frame_curvature, scalar_curvature, ConnectionKind, CurvatureData};
pub use decompose::{dirac_decompose, TorsionDecomposition};
pub use euler::{euler_characteristic, euler_density, euler_form};
pub use field::{
    contorsion_skew_residual, BlockConformalMetric, ChartDomain, ChartKind, ContorsionField, FnContorsion, FnMetric,
    GeometrySpec, MetricField, ScalarJet, ZeroContorsion,
};
pub use normal::{normal_coordinate_check, NormalCoordinateReport};
pub use point::{christoffel, metric_compatibility_residual, PointGeometry};
pub use presets::{antisymmetric_contorsion, preset, preset_with, trace_contorsion, PresetOptions, PRESET_NAMES};
