use nalgebra::DMatrix;

use super::{check_dim, Multivector};
use crate::{Error, Result, C64};

/// Real antisymmetric matrix; only the strict upper triangle is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl SkewMatrix {
    /// Upper entries uniform in `[-1, 1)`.
    pub fn random(rng: &mut impl rand::Rng, dim: usize) -> Self {
        Self::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
    }

    pub fn zeros(dim: usize) -> Self {
        SkewMatrix {
            dim,
            upper: vec![0.0; dim * dim.saturating_sub(1) / 2],
        }
    }

    /// Builds from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i + 1..dim {
                let k = m.index(i, j);
                m.upper[k] = f(i, j);
            }
        }
        m
    }

    /// Rejects matrices whose antisymmetry residual exceeds `1e-12` relative.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimMismatch(a.nrows(), a.ncols()));
        }
        let residual = (a + a.transpose()).amax();
        if residual > 1e-12 * (1.0 + a.amax()) {
            return Err(Error::NotSkew(residual));
        }
        Ok(Self::from_fn(a.nrows(), |i, j| 0.5 * (a[(i, j)] - a[(j, i)])))
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        i * (2 * self.dim - i - 1) / 2 + (j - i - 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[self.index(i, j)],
            std::cmp::Ordering::Greater => -self.upper[self.index(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// `ω_A = ½ Σ A_ij e^i ∧ e^j = Σ_{i<j} A_ij e^{ij}`.
    pub fn two_form(&self) -> Result<Multivector> {
        let mut w = Multivector::zero(self.dim)?;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                w.set_coeff((1 << i) | (1 << j), C64::new(self.get(i, j), 0.0));
            }
        }
        Ok(w)
    }

    pub fn scaled(&self, s: f64) -> Self {
        SkewMatrix {
            dim: self.dim,
            upper: self.upper.iter().map(|x| x * s).collect(),
        }
    }
}

/// Pfaffian by skew Gaussian elimination with partial pivoting (Parlett-Reid).
pub fn pfaffian(a: &SkewMatrix) -> Result<f64> {
    let n = a.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let mut m = a.to_dense();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let mut piv = k + 1;
        for i in k + 2..n {
            if m[(i, k)].abs() > m[(piv, k)].abs() {
                piv = i;
            }
        }
        if piv != k + 1 {
            m.swap_rows(k + 1, piv);
            m.swap_columns(k + 1, piv);
            pf = -pf;
        }
        if m[(k + 1, k)] == 0.0 {
            return Ok(0.0);
        }
        let head = m[(k, k + 1)];
        pf *= head;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| m[(k, j)] / head).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}

/// Signed sum over perfect matchings, `(d-1)!!` terms.
pub fn pfaffian_matchings(a: &SkewMatrix) -> Result<f64> {
    fn expand(a: &SkewMatrix, rest: &[usize]) -> f64 {
        if rest.is_empty() {
            return 1.0;
        }
        let first = rest[0];
        let mut sum = 0.0;
        for k in 1..rest.len() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let others: Vec<usize> = rest[1..].iter().enumerate().filter(|(i, _)| i + 1 != k).map(|(_, v)| *v).collect();
            sum += sign * a.get(first, rest[k]) * expand(a, &others);
        }
        sum
    }
    let n = a.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    Ok(expand(a, &(0..n).collect::<Vec<_>>()))
}

/// `Pf(A) = T(exp(ω_A))`, the Berezin route.
pub fn pfaffian_berezin(a: &SkewMatrix) -> Result<f64> {
    check_dim(a.dim())?;
    Ok(a.two_form()?.exp_wedge()?.berezin().re)
}

/// Pfaffian of a skew matrix whose entries are even forms (which commute),
/// by expansion along the first row. `entries[i][j]` must equal
/// `-entries[j][i]`; only `i < j` is read.
pub fn pfaffian_forms(entries: &[Vec<Multivector>]) -> Result<Multivector> {
    let n = entries.len();
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let dim = entries[0][0].dim();
    let idx: Vec<usize> = (0..n).collect();
    expand(entries, &idx, dim)
}

fn expand(entries: &[Vec<Multivector>], idx: &[usize], dim: usize) -> Result<Multivector> {
    if idx.is_empty() {
        return Multivector::scalar(dim, C64::new(1.0, 0.0));
    }
    let first = idx[0];
    let mut acc = Multivector::zero(dim)?;
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let rest: Vec<usize> = idx.iter().copied().filter(|&k| k != first && k != j).collect();
        let minor = expand(entries, &rest, dim)?;
        let term = entries[first][j].wedge(&minor)?;
        // sign (-1)^{pos+1} with pos counted from 0 for `first`
        if pos % 2 == 1 {
            acc += &term;
        } else {
            acc = acc - term;
        }
    }
    Ok(acc)
}
