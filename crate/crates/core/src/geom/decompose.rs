use crate::cliff::{grade, CliffordElement, Multivector};
use crate::{Error, Result, C64};

/// Grade-1 and grade-3 parts through which contorsion enters the Dirac
/// operator: `Σ_c c(e^c)(-¼ K_{cab} c(e^a)c(e^b)) = c(a) + c(B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionDecomposition {
    pub a: Multivector,
    pub b: Multivector,
}

impl TorsionDecomposition {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Components `a_c`.
    pub fn a_vec(&self) -> Vec<f64> {
        (0..self.dim()).map(|c| self.a.coeff(1 << c).re).collect()
    }

    /// Fully antisymmetric `B_{cab}`.
    pub fn b_component(&self, c: usize, a: usize, b: usize) -> f64 {
        if c == a || a == b || c == b {
            return 0.0;
        }
        let mask = (1 << c) | (1 << a) | (1 << b);
        // sign of sorting (c, a, b)
        let mut idx = [c, a, b];
        let mut sign = 1.0;
        for i in 0..3 {
            for j in 0..2 - i {
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        sign * self.b.coeff(mask).re
    }

    /// `|a|^2 = Σ a_c^2`.
    pub fn a_norm_sqr(&self) -> f64 {
        self.a_vec().iter().map(|v| v * v).sum()
    }

    /// `|B|^2 = Σ_{a<b<c} B_{abc}^2`.
    pub fn b_norm_sqr(&self) -> f64 {
        self.b.coeffs().iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Splits the Clifford image of a frame contorsion `K_{cab}` into grades 1
/// and 3.
pub fn dirac_decompose(k: &[f64], dim: usize) -> Result<TorsionDecomposition> {
    if k.len() != dim.pow(3) {
        return Err(Error::DimMismatch(k.len(), dim.pow(3)));
    }
    let mut total = CliffordElement::zero(dim)?;
    for c in 0..dim {
        let mut inner = CliffordElement::zero(dim)?;
        for a in 0..dim {
            for b in 0..dim {
                let v = k[(c * dim + a) * dim + b];
                if v != 0.0 && a != b {
                    inner += &(CliffordElement::word(dim, &[a + 1, b + 1])? * (-0.25 * v));
                }
            }
        }
        total += &CliffordElement::generator(dim, c + 1)?.clifford_mul(&inner)?;
    }
    let sym = total.symbol();
    let scale = 1.0 + k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = sym.residual_outside(&[1, 3]);
    if residual > 1e-12 * scale {
        return Err(Error::DecompositionResidual(residual));
    }
    let pick = |g: usize| {
        let coeffs = sym
            .coeffs()
            .iter()
            .enumerate()
            .map(|(m, v)| if grade(m) == g { C64::new(v.re, 0.0) } else { C64::new(0.0, 0.0) })
            .collect();
        Multivector::from_coeffs(dim, coeffs)
    };
    Ok(TorsionDecomposition { a: pick(1)?, b: pick(3)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps3(a: usize, b: usize, c: usize) -> f64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    }

    #[test]
    fn zero_contorsion() {
        let dec = dirac_decompose(&vec![0.0; 64], 4).unwrap();
        assert_eq!(dec.a_norm_sqr(), 0.0);
        assert_eq!(dec.b_norm_sqr(), 0.0);
    }

    #[test]
    fn trace_part_in_two_dimensions() {
        let alpha = [0.7, -1.3];
        let mut k = vec![0.0; 8];
        for c in 0..2 {
            k[(c * 2) * 2 + 1] = alpha[c];
            k[(c * 2 + 1) * 2] = -alpha[c];
        }
        let dec = dirac_decompose(&k, 2).unwrap();
        let a = dec.a_vec();
        assert!((a[0] + 0.5 * alpha[1]).abs() < 1e-15);
        assert!((a[1] - 0.5 * alpha[0]).abs() < 1e-15);
        assert_eq!(dec.b_norm_sqr(), 0.0);
    }

    #[test]
    fn totally_antisymmetric_is_pure_three_form() {
        let lambda = 0.8;
        let d = 4;
        let mut k = vec![0.0; 64];
        for c in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    k[(c * d + a) * d + b] = lambda * eps3(c, a, b);
                }
            }
        }
        let dec = dirac_decompose(&k, d).unwrap();
        assert!(dec.a_norm_sqr() < 1e-30);
        // -¼ Σ_{c,a,b} λ ε_{cab} c_c c_a c_b = -¼ · 6λ c_1c_2c_3
        assert!((dec.b.coeff(0b0111).re + 1.5 * lambda).abs() < 1e-14);
        assert!((dec.b_component(2, 0, 1) + 1.5 * lambda).abs() < 1e-14);
        assert!((dec.b_component(1, 0, 2) - 1.5 * lambda).abs() < 1e-14);
    }
}
