use std::sync::Arc;

use super::field::{
    BlockConformalMetric, ChartDomain, ContorsionField, FnContorsion, GeometrySpec, ScalarJet, ZeroContorsion,
};
use crate::{Error, Result};

/// Tunable preset parameters; `None` picks the default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PresetOptions {
    /// Conformal amplitude `A` (default 0.3).
    pub amplitude: Option<f64>,
    /// Contorsion strength: `β` for the torsion torus (default 1.2), `λ` for
    /// the 4-torus (default 0.3; 0 disables it).
    pub torsion: Option<f64>,
}

pub const PRESET_NAMES: [&str; 5] = [
    "flat-torus",
    "conformal-torus",
    "stereographic-sphere",
    "torsion-torus",
    "conformal-4torus",
];

pub fn preset(name: &str) -> Result<GeometrySpec> {
    preset_with(name, PresetOptions::default())
}

/// `φ = A sin x^i cos x^j`.
fn sin_cos(a: f64, i: usize, j: usize) -> ScalarJet {
    Arc::new(move |x: &[f64]| {
        let (si, ci) = x[i].sin_cos();
        let (sj, cj) = x[j].sin_cos();
        let mut grad = vec![0.0; x.len()];
        grad[i] = a * ci * cj;
        grad[j] = -a * si * sj;
        (a * si * cj, grad)
    })
}

/// `ψ = A cos x^i sin x^j`.
fn cos_sin(a: f64, i: usize, j: usize) -> ScalarJet {
    Arc::new(move |x: &[f64]| {
        let (si, ci) = x[i].sin_cos();
        let (sj, cj) = x[j].sin_cos();
        let mut grad = vec![0.0; x.len()];
        grad[i] = -a * si * sj;
        grad[j] = a * ci * cj;
        (a * ci * sj, grad)
    })
}

pub fn preset_with(name: &str, opts: PresetOptions) -> Result<GeometrySpec> {
    let amp = opts.amplitude.unwrap_or(0.3);
    match name {
        "flat-torus" => GeometrySpec::new(
            name,
            ChartDomain::torus(2),
            Arc::new(BlockConformalMetric::flat(2)),
            Arc::new(ZeroContorsion(2)),
        ),
        "conformal-torus" => GeometrySpec::new(
            name,
            ChartDomain::torus(2),
            Arc::new(BlockConformalMetric::new(2, vec![(0..2, sin_cos(amp, 0, 1))])?),
            Arc::new(ZeroContorsion(2)),
        ),
        "stereographic-sphere" => {
            let phi: ScalarJet = Arc::new(|x: &[f64]| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let grad = x.iter().map(|v| -2.0 * v / (1.0 + r2)).collect();
                (std::f64::consts::LN_2 - (1.0 + r2).ln(), grad)
            });
            GeometrySpec::new(
                name,
                ChartDomain::full_space(2, f64::INFINITY),
                Arc::new(BlockConformalMetric::new(2, vec![(0..2, phi)])?),
                Arc::new(ZeroContorsion(2)),
            )
        }
        "torsion-torus" => {
            let beta = opts.torsion.unwrap_or(1.2);
            GeometrySpec::new(
                name,
                ChartDomain::torus(2),
                Arc::new(BlockConformalMetric::flat(2)),
                Arc::new(trace_contorsion(beta)),
            )
        }
        "conformal-4torus" => {
            let lambda = opts.torsion.unwrap_or(0.3);
            let metric = BlockConformalMetric::new(4, vec![(0..2, sin_cos(amp, 0, 1)), (2..4, cos_sin(amp, 2, 3))])?;
            let contorsion: Arc<dyn ContorsionField> = if lambda == 0.0 {
                Arc::new(ZeroContorsion(4))
            } else {
                Arc::new(antisymmetric_contorsion(lambda))
            };
            GeometrySpec::new(name, ChartDomain::torus(4), Arc::new(metric), contorsion)
        }
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}

/// `K_{cab} = α_c ε_{ab}` with `α = (0, β sin x^1 cos x^2)`, so that
/// `dα = β cos x^1 cos x^2 dx^1∧dx^2`.
pub fn trace_contorsion(beta: f64) -> FnContorsion {
    FnContorsion::new(
        2,
        Arc::new(move |x: &[f64]| {
            let alpha = [0.0, beta * x[0].sin() * x[1].cos()];
            let mut k = vec![0.0; 8];
            for c in 0..2 {
                k[(c * 2) * 2 + 1] = alpha[c];
                k[(c * 2 + 1) * 2] = -alpha[c];
            }
            k
        }),
    )
}

/// `K_{cab} = λ (1 + ½ sin x^1) ε_{cab}` on frame indices `{1, 2, 3}` of a
/// 4-dimensional frame.
pub fn antisymmetric_contorsion(lambda: f64) -> FnContorsion {
    FnContorsion::new(
        4,
        Arc::new(move |x: &[f64]| {
            let s = lambda * (1.0 + 0.5 * x[0].sin());
            let mut k = vec![0.0; 64];
            for (c, a, b, sign) in [
                (0, 1, 2, 1.0),
                (1, 2, 0, 1.0),
                (2, 0, 1, 1.0),
                (0, 2, 1, -1.0),
                (2, 1, 0, -1.0),
                (1, 0, 2, -1.0),
            ] {
                k[(c * 4 + a) * 4 + b] = sign * s;
            }
            k
        }),
    )
}
