use nalgebra::DMatrix;

use super::{check_dim, pfaffian_forms, DoubleCliffordRep, Multivector};
use crate::{Error, Result, C64};

/// Four-index curvature data `R[i][j][n][m]`: 2-form indices `(i, j)`, frame
/// indices `(n, m)`, antisymmetric in each pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureArray {
    dim: usize,
    data: Vec<f64>,
}

impl CurvatureArray {
    pub fn zeros(dim: usize) -> Self {
        CurvatureArray {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    /// Validates pair antisymmetry to `1e-10` relative.
    pub fn from_vec(dim: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim.pow(4) {
            return Err(Error::DimMismatch(data.len(), dim.pow(4)));
        }
        let r = CurvatureArray { dim, data };
        let scale = 1.0 + r.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut residual = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                for n in 0..dim {
                    for m in 0..dim {
                        residual = residual.max((r.get(i, j, n, m) + r.get(j, i, n, m)).abs());
                        residual = residual.max((r.get(i, j, n, m) + r.get(i, j, m, n)).abs());
                    }
                }
            }
        }
        if residual > 1e-10 * scale {
            return Err(Error::NotSkew(residual));
        }
        Ok(r)
    }

    /// Single-block data `R_{12 12} = κ` (and its antisymmetric images).
    pub fn constant_block(dim: usize, kappa: f64) -> Result<Self> {
        let mut r = Self::zeros(dim);
        for (i, j, s1) in [(0, 1, 1.0), (1, 0, -1.0)] {
            for (n, m, s2) in [(0, 1, 1.0), (1, 0, -1.0)] {
                r.set(i, j, n, m, s1 * s2 * kappa);
            }
        }
        Self::from_vec(dim, r.data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entries uniform in `[-1, 1)` for `i < j`, `n < m`, extended by pair
    /// antisymmetry.
    pub fn random(rng: &mut impl rand::Rng, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mut r = Self::zeros(dim);
        for i in 0..dim {
            for j in i + 1..dim {
                for n in 0..dim {
                    for m in n + 1..dim {
                        let v = rng.random_range(-1.0..1.0);
                        r.set(i, j, n, m, v);
                        r.set(j, i, n, m, -v);
                        r.set(i, j, m, n, -v);
                        r.set(j, i, m, n, v);
                    }
                }
            }
        }
        Ok(r)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, n: usize, m: usize) -> f64 {
        let d = self.dim;
        self.data[((i * d + j) * d + n) * d + m]
    }

    pub fn set(&mut self, i: usize, j: usize, n: usize, m: usize, v: f64) {
        let d = self.dim;
        self.data[((i * d + j) * d + n) * d + m] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Frame-index matrix of 2-forms `Ω_{nm} = ½ Σ_{ij} R_{ijnm} e^i ∧ e^j`.
    pub fn form_matrix(&self) -> Result<Vec<Vec<Multivector>>> {
        let d = self.dim;
        let mut out = Vec::with_capacity(d);
        for n in 0..d {
            let mut row = Vec::with_capacity(d);
            for m in 0..d {
                let mut w = Multivector::zero(d)?;
                for i in 0..d {
                    for j in i + 1..d {
                        w.set_coeff((1 << i) | (1 << j), C64::new(self.get(i, j, n, m), 0.0));
                    }
                }
                row.push(w);
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Berezin coefficient of `Pf(-R)` over the frame indices.
    pub fn pfaffian_neg(&self) -> Result<f64> {
        let forms = self.form_matrix()?;
        let neg: Vec<Vec<Multivector>> = forms.into_iter().map(|row| row.into_iter().map(|w| -w).collect()).collect();
        Ok(pfaffian_forms(&neg)?.berezin().re)
    }

    /// `-½ c(F) = -1/16 Σ R_{ijnm} c_i c_j c*_m c*_n` on `Λ*`.
    pub fn half_curvature_operator(&self, rep: &DoubleCliffordRep) -> DMatrix<f64> {
        let d = self.dim;
        let size = rep.size();
        let mut left = vec![DMatrix::zeros(size, size); d * d];
        let mut right = vec![DMatrix::zeros(size, size); d * d];
        for i in 0..d {
            for j in 0..d {
                left[i * d + j] = rep.c(i) * rep.c(j);
                right[i * d + j] = rep.c_star(i) * rep.c_star(j);
            }
        }
        let mut out = DMatrix::zeros(size, size);
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let mut inner = DMatrix::zeros(size, size);
                for n in 0..d {
                    for m in 0..d {
                        let r = self.get(i, j, n, m);
                        if r != 0.0 && n != m {
                            inner += &right[m * d + n] * r;
                        }
                    }
                }
                out += &left[i * d + j] * inner;
            }
        }
        out * (-1.0 / 16.0)
    }
}

/// Supertraces of the powers of `-½ c(F)` next to the Pfaffian they should
/// reproduce.
#[derive(Debug, Clone)]
pub struct LadderReport {
    /// `Str((-½ c(F))^m / m!)` for `m = 1..=l`.
    pub powers: Vec<f64>,
    /// `Pf(-R)`.
    pub pfaffian: f64,
}

impl LadderReport {
    /// Largest `|Str|` among powers below `l`.
    pub fn lower_residual(&self) -> f64 {
        let l = self.powers.len();
        self.powers[..l - 1].iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn top(&self) -> f64 {
        *self.powers.last().expect("l >= 1")
    }
}

pub fn ladder_supertrace(r: &CurvatureArray) -> Result<LadderReport> {
    let d = r.dim();
    let rep = DoubleCliffordRep::new(d)?;
    let gen = r.half_curvature_operator(&rep);
    let mut powers = Vec::with_capacity(d / 2);
    let mut acc = DMatrix::<f64>::identity(rep.size(), rep.size());
    for m in 1..=d / 2 {
        acc = acc * &gen / m as f64;
        powers.push(rep.supertrace(&acc));
    }
    Ok(LadderReport {
        powers,
        pfaffian: r.pfaffian_neg()?,
    })
}
