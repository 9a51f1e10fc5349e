use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use super::{check_dim, grade, interior_sign, wedge_sign};
use crate::{Error, Result, C64};

/// Element of the exterior algebra `Λ*(R^d) ⊗ C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector {
    dim: usize,
    coeffs: Vec<C64>,
}

impl Multivector {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Multivector {
            dim,
            coeffs: vec![C64::new(0.0, 0.0); 1 << dim],
        })
    }

    pub fn scalar(dim: usize, value: C64) -> Result<Self> {
        let mut m = Self::zero(dim)?;
        m.coeffs[0] = value;
        Ok(m)
    }

    /// Basis monomial by bitmask.
    pub fn basis(dim: usize, mask: usize) -> Result<Self> {
        let mut m = Self::zero(dim)?;
        if mask >= m.coeffs.len() {
            return Err(Error::InvalidArgument(format!("mask {mask:#b} out of range for d={dim}")));
        }
        m.coeffs[mask] = C64::new(1.0, 0.0);
        Ok(m)
    }

    /// `e^{i1} ∧ … ∧ e^{ik}` from 1-based indices in any order (with sign).
    pub fn monomial(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut acc = Self::scalar(dim, C64::new(1.0, 0.0))?;
        for &i in indices {
            if i == 0 || i > dim {
                return Err(Error::InvalidArgument(format!("index {i} out of range 1..={dim}")));
            }
            acc = acc.wedge(&Self::basis(dim, 1 << (i - 1))?)?;
        }
        Ok(acc)
    }

    /// Covector `Σ v_i e^i`.
    pub fn covector(v: &[f64]) -> Result<Self> {
        let mut m = Self::zero(v.len())?;
        for (i, &x) in v.iter().enumerate() {
            m.coeffs[1 << i] = C64::new(x, 0.0);
        }
        Ok(m)
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if coeffs.len() != 1 << dim {
            return Err(Error::DimMismatch(coeffs.len(), 1 << dim));
        }
        Ok(Multivector { dim, coeffs })
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

    pub fn set_coeff(&mut self, mask: usize, value: C64) {
        self.coeffs[mask] = value;
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let n = self.coeffs.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for (b, &y) in other.coeffs.iter().enumerate() {
                let s = wedge_sign(a, b);
                if s != 0.0 && y != C64::new(0.0, 0.0) {
                    out[a | b] += x * y * s;
                }
            }
        }
        Ok(Multivector { dim: self.dim, coeffs: out })
    }

    /// Interior product with a pure grade-1 element.
    pub fn interior(covector: &Self, v: &Self) -> Result<Self> {
        covector.check_same(v)?;
        if covector.coeffs.iter().enumerate().any(|(m, c)| grade(m) != 1 && c.norm() > 0.0) {
            return Err(Error::WrongGrade { expected: 1 });
        }
        let mut out = Self::zero(v.dim)?;
        for i in 0..v.dim {
            let w = covector.coeffs[1 << i];
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            for (a, &x) in v.coeffs.iter().enumerate() {
                let s = interior_sign(i, a);
                if s != 0.0 {
                    out.coeffs[a ^ (1 << i)] += w * x * s;
                }
            }
        }
        Ok(out)
    }

    /// Projection onto grade `k`.
    pub fn grade_part(&self, k: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| if grade(m) == k { c } else { C64::new(0.0, 0.0) })
            .collect();
        Multivector { dim: self.dim, coeffs }
    }

    /// Berezin integral: coefficient of the top monomial.
    pub fn berezin(&self) -> C64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// `exp` in the exterior algebra, exact since the even part is nilpotent
    /// after `d/2` steps and the scalar part factors out.
    pub fn exp_wedge(&self) -> Result<Self> {
        let scalar = self.coeffs[0];
        let mut nil = self.clone();
        nil.coeffs[0] = C64::new(0.0, 0.0);
        let mut term = Self::scalar(self.dim, C64::new(1.0, 0.0))?;
        let mut sum = term.clone();
        for k in 1..=self.dim {
            term = term.wedge(&nil)? * C64::new(1.0 / k as f64, 0.0);
            sum = sum + term.clone();
        }
        Ok(sum * scalar.exp())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest coefficient modulus outside the listed grades.
    pub fn residual_outside(&self, grades: &[usize]) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(m, _)| !grades.contains(&grade(*m)))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, coeff: C64, mask: usize, dim: usize, sym: &str, join: &str) -> fmt::Result {
    write!(f, "({:+.12e}{:+.12e}i)·", coeff.re, coeff.im)?;
    if mask == 0 {
        return write!(f, "1");
    }
    let parts: Vec<String> = (0..dim).filter(|i| mask & (1 << i) != 0).map(|i| format!("{sym}{}", i + 1)).collect();
    write!(f, "{}", parts.join(join))
}

/// One nonzero term per line, `coeff·e^{i1}∧…`.
impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (m, &c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            write_term(f, c, m, self.dim, "e^", "∧")?;
            writeln!(f)?;
            any = true;
        }
        if !any {
            writeln!(f, "0")?;
        }
        Ok(())
    }
}

pub(super) fn display_clifford(f: &mut fmt::Formatter<'_>, dim: usize, coeffs: &[C64]) -> fmt::Result {
    let mut any = false;
    for (m, &c) in coeffs.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        write_term(f, c, m, dim, "c^", "")?;
        writeln!(f)?;
        any = true;
    }
    if !any {
        writeln!(f, "0")?;
    }
    Ok(())
}

macro_rules! linear_ops {
    ($ty:ident) => {
        impl Add for $ty {
            type Output = $ty;
            fn add(mut self, rhs: $ty) -> $ty {
                assert_eq!(self.dim, rhs.dim, "dimension mismatch");
                for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
                    *a += b;
                }
                self
            }
        }
        impl AddAssign<&$ty> for $ty {
            fn add_assign(&mut self, rhs: &$ty) {
                assert_eq!(self.dim, rhs.dim, "dimension mismatch");
                for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                    *a += *b;
                }
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(mut self, rhs: $ty) -> $ty {
                assert_eq!(self.dim, rhs.dim, "dimension mismatch");
                for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
                    *a -= b;
                }
                self
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(mut self) -> $ty {
                for a in self.coeffs.iter_mut() {
                    *a = -*a;
                }
                self
            }
        }
        impl Mul<C64> for $ty {
            type Output = $ty;
            fn mul(mut self, rhs: C64) -> $ty {
                for a in self.coeffs.iter_mut() {
                    *a *= rhs;
                }
                self
            }
        }
        impl Mul<f64> for $ty {
            type Output = $ty;
            fn mul(self, rhs: f64) -> $ty {
                self * C64::new(rhs, 0.0)
            }
        }
    };
}
pub(super) use linear_ops;
linear_ops!(Multivector);
