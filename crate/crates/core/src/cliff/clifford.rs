use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use super::multivector::{display_clifford, linear_ops};
use super::{check_dim, clifford_sign, i_pow, Multivector};
use crate::{Error, Result, C64};

/// Element of the complexified Clifford algebra `Cl(R^d)`, expanded in the
/// ordered monomials `c(e^{i1})…c(e^{ik})`, `i1 < … < ik`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordElement {
    pub(super) dim: usize,
    pub(super) coeffs: Vec<C64>,
}

linear_ops!(CliffordElement);

impl CliffordElement {
    /// Coefficients with real and imaginary parts uniform in `[-1, 1)`.
    pub fn random(rng: &mut impl rand::Rng, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let coeffs = (0..1usize << dim)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Ok(CliffordElement { dim, coeffs })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(CliffordElement {
            dim,
            coeffs: vec![C64::new(0.0, 0.0); 1 << dim],
        })
    }

    pub fn scalar(dim: usize, value: C64) -> Result<Self> {
        let mut a = Self::zero(dim)?;
        a.coeffs[0] = value;
        Ok(a)
    }

    pub fn one(dim: usize) -> Result<Self> {
        Self::scalar(dim, C64::new(1.0, 0.0))
    }

    pub fn basis(dim: usize, mask: usize) -> Result<Self> {
        let mut a = Self::zero(dim)?;
        if mask >= a.coeffs.len() {
            return Err(Error::InvalidArgument(format!("mask {mask:#b} out of range for d={dim}")));
        }
        a.coeffs[mask] = C64::new(1.0, 0.0);
        Ok(a)
    }

    /// Generator `c(e^i)`, 1-based.
    pub fn generator(dim: usize, i: usize) -> Result<Self> {
        if i == 0 || i > dim {
            return Err(Error::InvalidArgument(format!("index {i} out of range 1..={dim}")));
        }
        Self::basis(dim, 1 << (i - 1))
    }

    /// Product `c(e^{i1}) c(e^{i2}) …` of generators in the given order.
    pub fn word(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut acc = Self::one(dim)?;
        for &i in indices {
            acc = acc.clifford_mul(&Self::generator(dim, i)?)?;
        }
        Ok(acc)
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if coeffs.len() != 1 << dim {
            return Err(Error::DimMismatch(coeffs.len(), 1 << dim));
        }
        Ok(CliffordElement { dim, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> C64 {
        self.coeffs[mask]
    }

    /// Clifford product.
    pub fn clifford_mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        let zero = C64::new(0.0, 0.0);
        let mut out = vec![zero; self.coeffs.len()];
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == zero {
                continue;
            }
            for (b, &y) in other.coeffs.iter().enumerate() {
                if y != zero {
                    out[a ^ b] += x * y * clifford_sign(a, b);
                }
            }
        }
        Ok(CliffordElement { dim: self.dim, coeffs: out })
    }

    /// Symbol map `σ: Cl → Λ*`.
    pub fn symbol(&self) -> Multivector {
        Multivector::from_coeffs(self.dim, self.coeffs.clone()).expect("valid layout")
    }

    /// Quantization map `c: Λ* → Cl`.
    pub fn quantize(v: &Multivector) -> Self {
        CliffordElement {
            dim: v.dim(),
            coeffs: v.coeffs().to_vec(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl fmt::Display for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display_clifford(f, self.dim, &self.coeffs)
    }
}

/// `Γ = i^l c(e^1)…c(e^d)`.
pub fn chirality(dim: usize) -> Result<CliffordElement> {
    check_dim(dim)?;
    let mut g = CliffordElement::zero(dim)?;
    g.coeffs[(1 << dim) - 1] = i_pow((dim / 2) as i64);
    Ok(g)
}

/// `(-2i)^l T(σ(a))`.
pub fn supertrace_berezin(a: &CliffordElement) -> C64 {
    let l = (a.dim / 2) as i32;
    C64::new(0.0, -2.0).powi(l) * a.symbol().berezin()
}

/// Supertrace on the dual spinor factor, `(2i)^l T(σ(b))`, for `b` written in
/// the dual generators `c*(e^i)` with `c*(e^i)^2 = -1`.
pub fn supertrace_dual(b: &CliffordElement) -> C64 {
    let l = (b.dim / 2) as i32;
    C64::new(0.0, 2.0).powi(l) * b.symbol().berezin()
}

/// `Str(a ⊗ b) = tr(Γ a) tr(Γ* b)`.
pub fn supertrace_product(a: &CliffordElement, b: &CliffordElement) -> Result<C64> {
    if a.dim != b.dim {
        return Err(Error::DimMismatch(a.dim, b.dim));
    }
    Ok(supertrace_berezin(a) * supertrace_dual(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(d: usize, idx: &[usize]) -> CliffordElement {
        CliffordElement::word(d, idx).unwrap()
    }

    #[test]
    fn product_examples() {
        let minus_one = CliffordElement::scalar(2, C64::new(-1.0, 0.0)).unwrap();
        assert_eq!(c(2, &[1, 1]), minus_one);
        assert_eq!(c(2, &[1]).clifford_mul(&c(2, &[2])).unwrap(), CliffordElement::basis(2, 0b11).unwrap());
        // c2 · c1c2 = c1 by the relations
        assert_eq!(c(2, &[2]).clifford_mul(&c(2, &[1, 2])).unwrap(), c(2, &[1]));
        assert!(c(2, &[1]).clifford_mul(&c(4, &[1])).is_err());
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(c(2, &[1, 2]).symbol(), Multivector::monomial(2, &[1, 2]).unwrap());
        let q = CliffordElement::quantize(&Multivector::monomial(4, &[1, 2, 3]).unwrap());
        assert_eq!(q, c(4, &[1, 2, 3]));
        assert_eq!(c(2, &[1, 1]).symbol(), Multivector::scalar(2, C64::new(-1.0, 0.0)).unwrap());
    }

    #[test]
    fn chirality_squares_to_one() {
        let g2 = chirality(2).unwrap();
        assert_eq!(g2, c(2, &[1, 2]) * C64::new(0.0, 1.0));
        for d in [2, 4, 6, 8] {
            let g = chirality(d).unwrap();
            assert_eq!(g.clifford_mul(&g).unwrap(), CliffordElement::one(d).unwrap(), "d={d}");
        }
        assert!(chirality(3).is_err());
    }

    #[test]
    fn berezin_supertrace_examples() {
        assert_eq!(supertrace_berezin(&c(2, &[1, 2])), C64::new(0.0, -2.0));
        assert_eq!(supertrace_berezin(&CliffordElement::one(2).unwrap()), C64::new(0.0, 0.0));
        assert_eq!(supertrace_dual(&c(2, &[1, 2])), C64::new(0.0, 2.0));
        let p = supertrace_product(&c(2, &[1, 2]), &c(2, &[1, 2])).unwrap();
        assert!((p - C64::new(4.0, 0.0)).norm() < 1e-15);
        let one = CliffordElement::one(2).unwrap();
        assert_eq!(supertrace_product(&one, &one).unwrap(), C64::new(0.0, 0.0));
        for d in [2, 4] {
            let g = chirality(d).unwrap();
            let s = supertrace_berezin(&g);
            assert!((s - C64::new((1 << (d / 2)) as f64, 0.0)).norm() < 1e-14);
            let p = supertrace_product(&g, &CliffordElement::one(d).unwrap()).unwrap();
            assert_eq!(p, C64::new(0.0, 0.0));
        }
    }
}
