use nalgebra::DMatrix;

use super::decompose::dirac_decompose;
use super::field::GeometrySpec;
use super::point::PointGeometry;
use crate::cliff::CurvatureArray;
use crate::Result;

/// Which connection on the frame bundle to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    LeviCivita,
    /// `D = D̂ + K`.
    Full,
    /// `ω̂_{ab}(E_c) - 2 B_{cab}`, the connection whose spin lift carries the
    /// 3-form part of the torsion.
    ThreeB,
}

impl PointGeometry {
    /// Coordinate connection matrices `ω^a_b(∂_i)` of the chosen connection.
    pub fn connection(&self, kind: ConnectionKind) -> Result<Vec<DMatrix<f64>>> {
        match kind {
            ConnectionKind::LeviCivita => Ok(self.omega_lc.clone()),
            ConnectionKind::Full => Ok(self.omega.clone()),
            ConnectionKind::ThreeB => {
                let d = self.dim;
                let dec = dirac_decompose(&self.contorsion, d)?;
                Ok((0..d)
                    .map(|i| {
                        let mut w = self.omega_lc[i].clone();
                        for c in 0..d {
                            let f = self.coframe[(c, i)];
                            if f == 0.0 {
                                continue;
                            }
                            for a in 0..d {
                                for b in 0..d {
                                    w[(a, b)] -= 2.0 * f * dec.b_component(c, a, b);
                                }
                            }
                        }
                        w
                    })
                    .collect())
            }
        }
    }
}

/// Curvature and torsion of a geometry at a point.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    /// Full connection curvature, frame indices throughout.
    pub full: CurvatureArray,
    pub levi_civita: CurvatureArray,
    /// `T^a(E_p, E_q)` at `[(a * d + p) * d + q]`.
    pub torsion: Vec<f64>,
    /// Levi-Civita scalar curvature.
    pub scalar: f64,
}

/// Coordinate curvature `Ω^a_b(∂_m, ∂_k)` at `[m * d + k]`, from
/// `dω + ω∧ω` with 4th-order central differences of the connection matrices.
pub fn coordinate_curvature(spec: &GeometrySpec, x: &[f64], kind: ConnectionKind) -> Result<Vec<DMatrix<f64>>> {
    let d = spec.dim();
    let h = spec.metric.fd_step();
    let at = |p: &[f64]| -> Result<Vec<DMatrix<f64>>> { PointGeometry::new(spec, p)?.connection(kind) };
    let w0 = at(x)?;
    // dw[m][k] = ∂_m ω(∂_k)
    let mut dw = vec![vec![DMatrix::<f64>::zeros(d, d); d]; d];
    let mut p = x.to_vec();
    for m in 0..d {
        let mut samples = Vec::with_capacity(4);
        for s in [2.0, 1.0, -1.0, -2.0] {
            p[m] = x[m] + s * h;
            samples.push(at(&p)?);
        }
        p[m] = x[m];
        for k in 0..d {
            dw[m][k] = (-&samples[0][k] + &samples[1][k] * 8.0 - &samples[2][k] * 8.0 + &samples[3][k]) / (12.0 * h);
        }
    }
    let mut out = Vec::with_capacity(d * d);
    for m in 0..d {
        for k in 0..d {
            out.push(&dw[m][k] - &dw[k][m] + &w0[m] * &w0[k] - &w0[k] * &w0[m]);
        }
    }
    Ok(out)
}

/// Frame curvature array `R[p][q][a][b] = Ω^b_a(E_p, E_q)`.
pub fn frame_curvature(spec: &GeometrySpec, x: &[f64], kind: ConnectionKind) -> Result<CurvatureArray> {
    let d = spec.dim();
    let pt = PointGeometry::new(spec, x)?;
    let om = coordinate_curvature(spec, x, kind)?;
    let mut r = CurvatureArray::zeros(d);
    for p in 0..d {
        for q in 0..d {
            let mut block = DMatrix::<f64>::zeros(d, d);
            for m in 0..d {
                for k in 0..d {
                    let w = pt.frame[(m, p)] * pt.frame[(k, q)];
                    if w != 0.0 {
                        block += &om[m * d + k] * w;
                    }
                }
            }
            for a in 0..d {
                for b in 0..d {
                    r.set(p, q, a, b, 0.5 * (block[(b, a)] - block[(a, b)]));
                }
            }
        }
    }
    Ok(r)
}

/// `s = Σ_{a,b} Ω̂^a_b(E_a, E_b)`.
pub fn scalar_curvature(r_lc: &CurvatureArray) -> f64 {
    let d = r_lc.dim();
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += r_lc.get(a, b, b, a);
        }
    }
    s
}

pub fn curvature(spec: &GeometrySpec, x: &[f64]) -> Result<CurvatureData> {
    let levi_civita = frame_curvature(spec, x, ConnectionKind::LeviCivita)?;
    let full = if spec.contorsion.is_zero() {
        levi_civita.clone()
    } else {
        frame_curvature(spec, x, ConnectionKind::Full)?
    };
    let torsion = PointGeometry::new(spec, x)?.torsion();
    let scalar = scalar_curvature(&levi_civita);
    Ok(CurvatureData {
        full,
        levi_civita,
        torsion,
        scalar,
    })
}
