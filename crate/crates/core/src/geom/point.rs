use nalgebra::DMatrix;

use super::field::GeometrySpec;
use crate::{Error, Result};

/// Pointwise geometric data: metric, Cholesky frame, Christoffel symbols and
/// the frame connection matrices of both connections.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub dim: usize,
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub sqrt_det: f64,
    /// Coframe `θ^a = f[(a, i)] dx^i`.
    pub coframe: DMatrix<f64>,
    /// Frame `E_a = frame[(i, a)] ∂_i`.
    pub frame: DMatrix<f64>,
    /// `∂_k f[(a, i)]`.
    pub coframe_derivative: Vec<DMatrix<f64>>,
    /// `Γ̂^k_{ij}` at `christoffel[(k * d + i) * d + j]`.
    pub christoffel: Vec<f64>,
    /// `ω̂^a_b(∂_i)` as `omega_lc[i][(a, b)]`.
    pub omega_lc: Vec<DMatrix<f64>>,
    /// Connection matrices of the full connection, `ω^a_b(∂_i)`.
    pub omega: Vec<DMatrix<f64>>,
    /// Frame contorsion `K_{cab}`.
    pub contorsion: Vec<f64>,
}

/// Christoffel symbols `Γ̂^k_{ij}` of the Levi-Civita connection at `x`.
pub fn christoffel(spec: &GeometrySpec, x: &[f64]) -> Result<Vec<f64>> {
    let (g, dg) = spec.metric.metric_jet(x);
    let g_inv = g.clone().try_inverse().ok_or_else(|| Error::NotPositiveDefinite(x.to_vec()))?;
    Ok(christoffel_from_jet(&g_inv, &dg))
}

fn christoffel_from_jet(g_inv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Vec<f64> {
    let d = g_inv.nrows();
    let mut gamma = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            // lowered Γ_{l ij}
            let low: Vec<f64> = (0..d)
                .map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                .collect();
            for k in 0..d {
                gamma[(k * d + i) * d + j] = (0..d).map(|l| g_inv[(k, l)] * low[l]).sum();
            }
        }
    }
    gamma
}

impl PointGeometry {
    pub fn new(spec: &GeometrySpec, x: &[f64]) -> Result<Self> {
        let d = spec.dim();
        if x.len() != d {
            return Err(Error::DimMismatch(x.len(), d));
        }
        let (g, dg) = spec.metric.metric_jet(x);
        let chol = g.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite(x.to_vec()))?;
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NotPositiveDefinite(x.to_vec()))?;
        let g_inv = &l_inv.transpose() * &l_inv;
        let sqrt_det = l.diagonal().product();
        let coframe = l.transpose();
        let frame = l_inv.transpose();

        // ∂L = L Φ(L⁻¹ ∂g L⁻ᵀ), Φ = strict lower part plus half the diagonal
        let coframe_derivative: Vec<DMatrix<f64>> = dg
            .iter()
            .map(|dgk| {
                let s = &l_inv * dgk * l_inv.transpose();
                let phi = DMatrix::from_fn(d, d, |i, j| match i.cmp(&j) {
                    std::cmp::Ordering::Greater => s[(i, j)],
                    std::cmp::Ordering::Equal => 0.5 * s[(i, j)],
                    std::cmp::Ordering::Less => 0.0,
                });
                (&l * phi).transpose()
            })
            .collect();

        let christoffel = christoffel_from_jet(&g_inv, &dg);

        // ω̂^a_b(∂_i) = f^a_j (∂_i e^j_b + Γ̂^j_{ik} e^k_b), ∂e = -e ∂f e
        let omega_lc: Vec<DMatrix<f64>> = (0..d)
            .map(|i| {
                let de = -(&frame * &coframe_derivative[i] * &frame);
                let gamma_i = DMatrix::from_fn(d, d, |j, k| christoffel[(j * d + i) * d + k]);
                let w = &coframe * (de + gamma_i * &frame);
                // exact skew part; the symmetric part is rounding noise
                (&w - w.transpose()) * 0.5
            })
            .collect();

        let contorsion = spec.contorsion.contorsion(x);
        if contorsion.len() != d.pow(3) {
            return Err(Error::DimMismatch(contorsion.len(), d.pow(3)));
        }
        let omega = (0..d)
            .map(|i| {
                let mut w = omega_lc[i].clone();
                for c in 0..d {
                    let f = coframe[(c, i)];
                    if f == 0.0 {
                        continue;
                    }
                    for a in 0..d {
                        for b in 0..d {
                            w[(a, b)] += f * contorsion[(c * d + a) * d + b];
                        }
                    }
                }
                w
            })
            .collect();

        Ok(PointGeometry {
            dim: d,
            x: x.to_vec(),
            g,
            g_inv,
            sqrt_det,
            coframe,
            frame,
            coframe_derivative,
            christoffel,
            omega_lc,
            omega,
            contorsion,
        })
    }

    /// `ω(E_c)` for frame vector `E_c`, from coordinate matrices `w`.
    pub fn on_frame(&self, w: &[DMatrix<f64>], c: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            out += &w[i] * self.frame[(i, c)];
        }
        out
    }

    /// Divergence of frame vector `E_c`: `Σ_a ω̂^a_c(E_a)`.
    pub fn frame_divergence(&self) -> Vec<f64> {
        let d = self.dim;
        let on: Vec<DMatrix<f64>> = (0..d).map(|a| self.on_frame(&self.omega_lc, a)).collect();
        (0..d).map(|c| (0..d).map(|a| on[a][(a, c)]).sum()).collect()
    }

    /// Coordinate connection coefficients `Γ^j_{ik}` of the full connection,
    /// `D_{∂_i} ∂_k = Γ^j_{ik} ∂_j`, stored at `[(j * d + i) * d + k]`.
    pub fn coordinate_connection(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d * d];
        for i in 0..d {
            let m = &self.coframe_derivative[i] + &self.omega[i] * &self.coframe;
            let full = &self.frame * m;
            for j in 0..d {
                for k in 0..d {
                    out[(j * d + i) * d + k] = full[(j, k)];
                }
            }
        }
        out
    }

    /// Frame torsion `T^a(E_p, E_q)` at `[(a * d + p) * d + q]`, from the first
    /// structure equation `T = dθ + ω∧θ`.
    pub fn torsion(&self) -> Vec<f64> {
        let d = self.dim;
        // coordinate components T^a_{mk}
        let mut tc = vec![0.0; d * d * d];
        for a in 0..d {
            for m in 0..d {
                for k in 0..d {
                    let mut v = self.coframe_derivative[m][(a, k)] - self.coframe_derivative[k][(a, m)];
                    for b in 0..d {
                        v += self.omega[m][(a, b)] * self.coframe[(b, k)] - self.omega[k][(a, b)] * self.coframe[(b, m)];
                    }
                    tc[(a * d + m) * d + k] = v;
                }
            }
        }
        let mut out = vec![0.0; d * d * d];
        for a in 0..d {
            for p in 0..d {
                for q in 0..d {
                    let mut v = 0.0;
                    for m in 0..d {
                        for k in 0..d {
                            v += tc[(a * d + m) * d + k] * self.frame[(m, p)] * self.frame[(k, q)];
                        }
                    }
                    out[(a * d + p) * d + q] = v;
                }
            }
        }
        out
    }

    /// Largest `|f g⁻¹ fᵀ - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let d = self.dim;
        (&self.coframe * &self.g_inv * self.coframe.transpose() - DMatrix::<f64>::identity(d, d)).amax()
    }
}

/// `max |∂_i g_jk - Γ^l_{ij} g_lk - Γ^l_{ik} g_jl|` with `∂g` from
/// independent central differences of the metric.
pub fn metric_compatibility_residual(spec: &GeometrySpec, x: &[f64]) -> Result<f64> {
    let p = PointGeometry::new(spec, x)?;
    let d = p.dim;
    let gamma = p.coordinate_connection();
    let flat = |y: &[f64]| spec.metric.metric(y).as_slice().to_vec();
    let mut worst = 0.0f64;
    for i in 0..d {
        let dg = DMatrix::from_vec(d, d, crate::linalg::central_diff(flat, x, i, spec.metric.fd_step()));
        for j in 0..d {
            for k in 0..d {
                let mut v = dg[(j, k)];
                for l in 0..d {
                    v -= gamma[(l * d + i) * d + j] * p.g[(l, k)] + gamma[(l * d + i) * d + k] * p.g[(j, l)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::preset;

    #[test]
    fn flat_is_trivial() {
        let spec = preset("flat-torus").unwrap();
        let p = PointGeometry::new(&spec, &[0.3, 1.1]).unwrap();
        assert!(p.christoffel.iter().all(|v| *v == 0.0));
        assert!(p.omega.iter().all(|w| w.amax() == 0.0));
        assert_eq!(p.sqrt_det, 1.0);
    }

    #[test]
    fn conformal_christoffel_pattern() {
        let spec = preset("conformal-torus").unwrap();
        let x = [0.7f64, -0.4];
        let a = 0.3;
        let d1 = a * x[0].cos() * x[1].cos();
        let d2 = -a * x[0].sin() * x[1].sin();
        let p = PointGeometry::new(&spec, &x).unwrap();
        let g = |k: usize, i: usize, j: usize| p.christoffel[(k * 2 + i) * 2 + j];
        assert!((g(0, 0, 0) - d1).abs() < 1e-14);
        assert!((g(0, 0, 1) - d2).abs() < 1e-14);
        assert!((g(0, 1, 1) + d1).abs() < 1e-14);
        assert!((g(1, 1, 1) - d2).abs() < 1e-14);
        assert!((g(1, 0, 0) + d2).abs() < 1e-14);
        assert!(p.orthonormality_residual() < 1e-12);
    }

    #[test]
    fn levi_civita_is_torsion_free_and_compatible() {
        for name in ["conformal-torus", "stereographic-sphere", "conformal-4torus"] {
            let spec = preset(name).unwrap().levi_civita();
            for x in spec.chart.sample_points(2) {
                let p = PointGeometry::new(&spec, &x).unwrap();
                assert!(p.torsion().iter().all(|t| t.abs() < 1e-12), "{name}");
                assert!(metric_compatibility_residual(&spec, &x).unwrap() < 1e-8, "{name}");
            }
        }
    }

    #[test]
    fn torsion_is_antisymmetrized_contorsion() {
        let spec = preset("torsion-torus").unwrap();
        let x = [0.4, 2.0];
        let p = PointGeometry::new(&spec, &x).unwrap();
        let t = p.torsion();
        let k = &p.contorsion;
        for a in 0..2 {
            for c in 0..2 {
                for e in 0..2 {
                    let expect = k[(c * 2 + a) * 2 + e] - k[(e * 2 + a) * 2 + c];
                    assert!((t[(a * 2 + c) * 2 + e] - expect).abs() < 1e-13);
                }
            }
        }
        assert!(t.iter().any(|v| v.abs() > 0.1));
        assert!(metric_compatibility_residual(&spec, &x).unwrap() < 1e-12);
    }
}
