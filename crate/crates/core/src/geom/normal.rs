use nalgebra::DMatrix;

use super::curvature::{frame_curvature, ConnectionKind};
use super::field::GeometrySpec;
use super::point::PointGeometry;
use crate::linalg::log_log_slope;
use crate::{Error, Result};

/// Residuals of the radial-gauge expansion `A_i(y) = -½ Ω_{ij}(x0) y^j + O(|y|²)`
/// on spheres of decreasing radius.
#[derive(Debug, Clone)]
pub struct NormalCoordinateReport {
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Log-log slope; `None` when every residual is at rounding level.
    pub slope: Option<f64>,
}

impl NormalCoordinateReport {
    /// Residual below `1e-12` everywhere counts as exact.
    pub fn exact(&self) -> bool {
        self.residuals.iter().all(|r| *r < 1e-12)
    }

    pub fn passes(&self, min_slope: f64) -> bool {
        self.exact() || self.slope.is_some_and(|s| s >= min_slope)
    }
}

/// State along a radial geodesic: position, velocity and the transport
/// matrix of the chosen connection.
struct Ray {
    x: Vec<f64>,
    v: Vec<f64>,
    p: DMatrix<f64>,
}

fn ray_rhs(spec: &GeometrySpec, kind: ConnectionKind, s: &Ray) -> Result<Ray> {
    let d = spec.dim();
    let pt = PointGeometry::new(spec, &s.x)?;
    let mut acc = vec![0.0; d];
    for (k, a) in acc.iter_mut().enumerate() {
        for i in 0..d {
            for j in 0..d {
                *a -= pt.christoffel[(k * d + i) * d + j] * s.v[i] * s.v[j];
            }
        }
    }
    let w = pt.connection(kind)?;
    let mut wv = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        wv += &w[i] * s.v[i];
    }
    Ok(Ray {
        x: s.v.clone(),
        v: acc,
        p: -(wv * &s.p),
    })
}

fn axpy(s: &Ray, k: &Ray, h: f64) -> Ray {
    Ray {
        x: s.x.iter().zip(&k.x).map(|(a, b)| a + h * b).collect(),
        v: s.v.iter().zip(&k.v).map(|(a, b)| a + h * b).collect(),
        p: &s.p + &k.p * h,
    }
}

/// Shoots the Levi-Civita geodesic `s ↦ exp_{x0}(s Σ y^a E_a)` to `s = 1` by
/// RK4 and transports the frame along it.
fn shoot(spec: &GeometrySpec, kind: ConnectionKind, x0: &[f64], e0: &DMatrix<f64>, y: &[f64], steps: usize) -> Result<Ray> {
    let d = spec.dim();
    let v0: Vec<f64> = (0..d).map(|i| (0..d).map(|a| e0[(i, a)] * y[a]).sum()).collect();
    let mut s = Ray {
        x: x0.to_vec(),
        v: v0,
        p: DMatrix::identity(d, d),
    };
    let h = 1.0 / steps as f64;
    for _ in 0..steps {
        let k1 = ray_rhs(spec, kind, &s)?;
        let k2 = ray_rhs(spec, kind, &axpy(&s, &k1, 0.5 * h))?;
        let k3 = ray_rhs(spec, kind, &axpy(&s, &k2, 0.5 * h))?;
        let k4 = ray_rhs(spec, kind, &axpy(&s, &k3, h))?;
        for i in 0..d {
            s.x[i] += h / 6.0 * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
            s.v[i] += h / 6.0 * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
        }
        s.p += (&k1.p + &k2.p * 2.0 + &k3.p * 2.0 + &k4.p) * (h / 6.0);
        if s.x.iter().chain(&s.v).any(|v| !v.is_finite()) {
            return Err(Error::Geodesic(format!("non-finite state shooting along {y:?}")));
        }
    }
    Ok(s)
}

/// Unit directions used on each sphere: coordinate axes, both signs, plus
/// fixed oblique directions.
fn directions(d: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[i] = s;
            out.push(v);
        }
    }
    for k in 0..d {
        let v: Vec<f64> = (0..d).map(|i| ((i * 7 + k * 3 + 1) as f64 * 0.913).sin()).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        out.push(v.iter().map(|a| a / n).collect());
    }
    out
}

/// Builds normal coordinates at `x0` by geodesic shooting and compares the
/// radial-gauge connection of `kind` with its curvature expansion.
pub fn normal_coordinate_check(
    spec: &GeometrySpec,
    kind: ConnectionKind,
    x0: &[f64],
    radii: &[f64],
) -> Result<NormalCoordinateReport> {
    let d = spec.dim();
    let steps = 48;
    let delta = 1e-3;
    let origin = PointGeometry::new(spec, x0)?;
    let e0 = origin.frame.clone();
    let r0 = frame_curvature(spec, x0, kind)?;
    // Ω^a_b(E_i, E_j)(x0)
    let omega0 = |i: usize, j: usize| DMatrix::from_fn(d, d, |a, b| r0.get(i, j, b, a));

    let mut residuals = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut worst = 0.0f64;
        for dir in directions(d) {
            let y: Vec<f64> = dir.iter().map(|v| v * r).collect();
            let centre = shoot(spec, kind, x0, &e0, &y, steps)?;
            let pinv = centre
                .p
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Geodesic("singular transport".into()))?;
            let w = PointGeometry::new(spec, &centre.x)?.connection(kind)?;
            for i in 0..d {
                let mut samples = Vec::with_capacity(4);
                for s in [2.0, 1.0, -1.0, -2.0] {
                    let mut ys = y.clone();
                    ys[i] += s * delta;
                    samples.push(shoot(spec, kind, x0, &e0, &ys, steps)?);
                }
                let fd = |f: &dyn Fn(&Ray) -> f64| {
                    (-f(&samples[0]) + 8.0 * f(&samples[1]) - 8.0 * f(&samples[2]) + f(&samples[3])) / (12.0 * delta)
                };
                let dx: Vec<f64> = (0..d).map(|k| fd(&|s: &Ray| s.x[k])).collect();
                let dp = DMatrix::from_fn(d, d, |a, b| fd(&|s: &Ray| s.p[(a, b)]));
                let mut wdx = DMatrix::<f64>::zeros(d, d);
                for k in 0..d {
                    wdx += &w[k] * dx[k];
                }
                let a_i = &pinv * (wdx * &centre.p + dp);
                let mut expect = DMatrix::<f64>::zeros(d, d);
                for j in 0..d {
                    expect -= omega0(i, j) * (0.5 * y[j]);
                }
                worst = worst.max((a_i - expect).amax());
            }
        }
        residuals.push(worst);
    }
    let slope = if residuals.iter().all(|v| *v < 1e-12) {
        None
    } else {
        log_log_slope(radii, &residuals)
    };
    Ok(NormalCoordinateReport {
        radii: radii.to_vec(),
        residuals,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::preset;

    const RADII: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

    #[test]
    fn flat_is_exact() {
        let rep = normal_coordinate_check(&preset("flat-torus").unwrap(), ConnectionKind::LeviCivita, &[1.0, 1.0], &RADII).unwrap();
        assert!(rep.exact());
    }

    #[test]
    fn sphere_is_second_order() {
        let spec = preset("stereographic-sphere").unwrap();
        let rep = normal_coordinate_check(&spec, ConnectionKind::LeviCivita, &[0.3, -0.2], &RADII).unwrap();
        assert!(rep.slope.unwrap() >= 1.9, "{rep:?}");
    }
}
