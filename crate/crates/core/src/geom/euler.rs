use super::curvature::CurvatureData;
use super::field::GeometrySpec;
use super::point::PointGeometry;
use crate::{Error, Result};

/// `Pf(-R(x)) / (2π)^l · √det g(x)`, a density against `dx^1…dx^d`.
pub fn euler_form(curv: &CurvatureData, sqrt_det: f64) -> Result<f64> {
    let l = curv.full.dim() / 2;
    Ok(curv.full.pfaffian_neg()? * sqrt_det / (2.0 * std::f64::consts::PI).powi(l as i32))
}

/// Euler density of `spec` at `x`.
pub fn euler_density(spec: &GeometrySpec, x: &[f64]) -> Result<f64> {
    let curv = super::curvature(spec, x)?;
    euler_form(&curv, PointGeometry::new(spec, x)?.sqrt_det)
}

/// Periodic trapezoidal quadrature of the Euler density over the box with
/// `n` points per axis.
pub fn euler_characteristic(spec: &GeometrySpec, n: usize) -> Result<f64> {
    let sides = spec.chart.sides().ok_or(Error::NotPeriodic)?;
    let d = spec.dim();
    let cell: f64 = sides.iter().map(|s| s / n as f64).product();
    let total = n.pow(d as u32);
    let mut sum = 0.0;
    for mut k in 0..total {
        let x: Vec<f64> = (0..d)
            .map(|i| {
                let j = k % n;
                k /= n;
                sides[i] * j as f64 / n as f64
            })
            .collect();
        sum += euler_density(spec, &x)?;
    }
    Ok(sum * cell)
}
