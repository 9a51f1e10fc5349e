use nalgebra::DMatrix;

use crate::bundle::{connection_endomorphisms, weitzenbock_potential, BundleConnection};
use crate::cliff::DoubleCliffordRep;
use crate::geom::{dirac_decompose, GeometrySpec, PointGeometry};
use crate::{Error, Result};

/// Default cap on the condition number of `e(t)` before a path is excluded.
pub const DEFAULT_COND_CAP: f64 = 1e8;

/// Coefficients of the Feynman-Kac system for `∂_t f = -½ 𝒟² f`.
#[derive(Clone)]
pub struct SdeSpec {
    pub geometry: GeometrySpec,
    rep: DoubleCliffordRep,
    /// Sign in front of `½ b dt`; `+1` matches the heat equation.
    pub drift_sign: f64,
    pub cond_cap: f64,
}

impl std::fmt::Debug for SdeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeSpec")
            .field("geometry", &self.geometry.name)
            .field("drift_sign", &self.drift_sign)
            .field("cond_cap", &self.cond_cap)
            .finish()
    }
}

/// Path coefficients at one point.
#[derive(Debug, Clone)]
pub struct LocalCoefficients {
    /// Symmetric square root of `g⁻¹`; column `k` drives `dw^k`.
    pub sigma: DMatrix<f64>,
    /// Stratonovich drift `±½ b - ½ Σ_k (σ_k·∂) σ_k`.
    pub drift: Vec<f64>,
    /// Connection endomorphisms `C_i`.
    pub connection: Vec<DMatrix<f64>>,
}

impl SdeSpec {
    pub fn new(geometry: GeometrySpec) -> Result<Self> {
        let rep = DoubleCliffordRep::new(geometry.dim())?;
        Ok(SdeSpec {
            geometry,
            rep,
            drift_sign: 1.0,
            cond_cap: DEFAULT_COND_CAP,
        })
    }

    pub fn with_drift_sign(mut self, sign: f64) -> Self {
        self.drift_sign = sign;
        self
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn rep(&self) -> &DoubleCliffordRep {
        &self.rep
    }

    /// `σ` and its coordinate derivatives `∂_j σ`.
    fn sigma_jet(&self, x: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
        let d = self.dim();
        let (g, dg) = self.geometry.metric.metric_jet(x);
        let g_inv = g.try_inverse().ok_or_else(|| Error::NotPositiveDefinite(x.to_vec()))?;
        let eig = g_inv.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| *v <= 0.0) {
            return Err(Error::NotPositiveDefinite(x.to_vec()));
        }
        let q = &eig.eigenvectors;
        let s = eig.eigenvalues.map(f64::sqrt);
        let sigma = q * DMatrix::from_diagonal(&s) * q.transpose();
        // σ dσ + dσ σ = d(g⁻¹), solved in the eigenbasis
        let dsigma = dg
            .iter()
            .map(|dgj| {
                let dgi = -(&g_inv * dgj * &g_inv);
                let rot = q.transpose() * dgi * q;
                let sol = DMatrix::from_fn(d, d, |a, b| rot[(a, b)] / (s[a] + s[b]));
                q * sol * q.transpose()
            })
            .collect();
        Ok((sigma, dsigma))
    }

    pub fn sigma(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.sigma_jet(x)?.0)
    }

    /// `b^k = -g^{ij} Γ̂^k_{ij} + 2 a^k`.
    pub fn drift_b(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pt = PointGeometry::new(&self.geometry, x)?;
        self.drift_b_at(&pt)
    }

    fn drift_b_at(&self, pt: &PointGeometry) -> Result<Vec<f64>> {
        let d = pt.dim;
        let a = dirac_decompose(&pt.contorsion, d)?.a_vec();
        Ok((0..d)
            .map(|k| {
                let mut v = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        v -= pt.g_inv[(i, j)] * pt.christoffel[(k * d + i) * d + j];
                    }
                }
                v + 2.0 * (0..d).map(|c| pt.frame[(k, c)] * a[c]).sum::<f64>()
            })
            .collect())
    }

    pub fn coefficients(&self, x: &[f64]) -> Result<LocalCoefficients> {
        let d = self.dim();
        let pt = PointGeometry::new(&self.geometry, x)?;
        let (sigma, dsigma) = self.sigma_jet(x)?;
        let b = self.drift_b_at(&pt)?;
        let drift = (0..d)
            .map(|i| {
                let mut corr = 0.0;
                for (j, ds) in dsigma.iter().enumerate() {
                    for k in 0..d {
                        corr += sigma[(j, k)] * ds[(i, k)];
                    }
                }
                0.5 * self.drift_sign * b[i] - 0.5 * corr
            })
            .collect();
        let connection = connection_endomorphisms(&self.rep, &pt, BundleConnection::Twisted)?;
        Ok(LocalCoefficients { sigma, drift, connection })
    }

    /// Potential `C` of the Weitzenböck identity.
    pub fn potential(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(weitzenbock_potential(&self.rep, &self.geometry, x)?.total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::preset;
    use crate::linalg::central_diff;

    #[test]
    fn sigma_squares_to_inverse_metric() {
        let spec = SdeSpec::new(preset("conformal-4torus").unwrap()).unwrap();
        let x = [0.3, 1.1, -0.4, 2.0];
        let s = spec.sigma(&x).unwrap();
        let g_inv = spec.geometry.metric.metric(&x).try_inverse().unwrap();
        assert!((&s * s.transpose() - g_inv).amax() < 1e-12);
    }

    #[test]
    fn sigma_derivative_matches_differences() {
        let spec = SdeSpec::new(preset("conformal-torus").unwrap()).unwrap();
        let x = [0.7, -0.2];
        let (_, ds) = spec.sigma_jet(&x).unwrap();
        for (j, dsj) in ds.iter().enumerate() {
            let fd = central_diff(|p: &[f64]| spec.sigma(p).unwrap().as_slice().to_vec(), &x, j, 1e-3);
            for (a, b) in dsj.as_slice().iter().zip(&fd) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn flat_coefficients_vanish() {
        let spec = SdeSpec::new(preset("flat-torus").unwrap()).unwrap();
        let c = spec.coefficients(&[0.4, 0.9]).unwrap();
        assert!(c.drift.iter().all(|v| *v == 0.0));
        assert!(c.connection.iter().all(|m| m.amax() == 0.0));
        assert_eq!(spec.potential(&[0.4, 0.9]).unwrap().amax(), 0.0);
    }
}
