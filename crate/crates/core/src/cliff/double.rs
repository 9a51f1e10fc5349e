use nalgebra::DMatrix;

use super::{check_dim, grade, interior_sign, wedge_sign, CliffordElement};
use crate::{Result, C64};

/// Left and right Clifford actions on `Λ*(R^d)`, realizing `Λ* ≅ S ⊗ S*`.
///
/// Matrices act on coefficient vectors in the bitmask basis. Everything is
/// real: `ε`, `ι`, `c = ε - ι`, `c* = ε + ι` and the grading `(-1)^deg`.
#[derive(Debug, Clone)]
pub struct DoubleCliffordRep {
    dim: usize,
    eps: Vec<DMatrix<f64>>,
    iota: Vec<DMatrix<f64>>,
    left: Vec<DMatrix<f64>>,
    right: Vec<DMatrix<f64>>,
    grading: Vec<f64>,
}

impl DoubleCliffordRep {
    pub fn new(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let n = 1 << dim;
        let mut eps = Vec::with_capacity(dim);
        let mut iota = Vec::with_capacity(dim);
        for i in 0..dim {
            let bit = 1 << i;
            let mut e = DMatrix::zeros(n, n);
            let mut io = DMatrix::zeros(n, n);
            for a in 0..n {
                let s = wedge_sign(bit, a);
                if s != 0.0 {
                    e[(a | bit, a)] = s;
                }
                let s = interior_sign(i, a);
                if s != 0.0 {
                    io[(a ^ bit, a)] = s;
                }
            }
            eps.push(e);
            iota.push(io);
        }
        let left = eps.iter().zip(&iota).map(|(e, i)| e - i).collect();
        let right = eps.iter().zip(&iota).map(|(e, i)| e + i).collect();
        let grading = (0..n).map(|a| if grade(a).is_multiple_of(2) { 1.0 } else { -1.0 }).collect();
        Ok(DoubleCliffordRep {
            dim,
            eps,
            iota,
            left,
            right,
            grading,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fiber dimension `2^d`.
    pub fn size(&self) -> usize {
        1 << self.dim
    }

    /// `ε(e^{i+1})`, 0-based.
    pub fn eps(&self, i: usize) -> &DMatrix<f64> {
        &self.eps[i]
    }

    pub fn iota(&self, i: usize) -> &DMatrix<f64> {
        &self.iota[i]
    }

    /// Left generator `c(e^{i+1}) = ε - ι`.
    pub fn c(&self, i: usize) -> &DMatrix<f64> {
        &self.left[i]
    }

    /// Right generator `c*(e^{i+1}) = ε + ι`.
    pub fn c_star(&self, i: usize) -> &DMatrix<f64> {
        &self.right[i]
    }

    /// Diagonal of `(-1)^deg`.
    pub fn grading(&self) -> &[f64] {
        &self.grading
    }

    pub fn grading_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.grading.clone()))
    }

    /// `Str M = Σ_A (-1)^{|A|} M_AA`.
    pub fn supertrace(&self, m: &DMatrix<f64>) -> f64 {
        self.grading.iter().enumerate().map(|(a, s)| s * m[(a, a)]).sum()
    }

    pub fn supertrace_complex(&self, m: &DMatrix<C64>) -> C64 {
        self.grading.iter().enumerate().map(|(a, s)| m[(a, a)] * *s).sum()
    }

    fn words(&self, gens: &[DMatrix<f64>], a: &CliffordElement, factor: C64) -> DMatrix<C64> {
        let n = self.size();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for (mask, &coeff) in a.coeffs().iter().enumerate() {
            if coeff.norm() == 0.0 {
                continue;
            }
            let mut m = DMatrix::<f64>::identity(n, n);
            let mut k = 0;
            for (i, g) in gens.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    m *= g;
                    k += 1;
                }
            }
            let scale = coeff * factor.powi(k);
            out += m.map(|x| scale * x);
        }
        out
    }

    /// Left action `ρ_L(a)`: Clifford multiplication from the left under the
    /// symbol identification.
    pub fn left_action(&self, a: &CliffordElement) -> DMatrix<C64> {
        self.words(&self.left, a, C64::new(1.0, 0.0))
    }

    /// Action of a dual-factor element written in generators `c*(e)` with
    /// `c*(e)^2 = -1`; each generator acts as `i (ε + ι)`.
    pub fn dual_action(&self, b: &CliffordElement) -> DMatrix<C64> {
        self.words(&self.right, b, C64::new(0.0, 1.0))
    }

    /// Grading-weighted trace of `ρ_L(a) ρ*(b)`.
    pub fn product_supertrace(&self, a: &CliffordElement, b: &CliffordElement) -> C64 {
        self.supertrace_complex(&(self.left_action(a) * self.dual_action(b)))
    }

    /// Real left action of a form `Σ η_A e^A` with real coefficients.
    pub fn left_form(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let n = self.size();
        let mut out = DMatrix::zeros(n, n);
        for (mask, &coeff) in coeffs.iter().enumerate() {
            if coeff == 0.0 {
                continue;
            }
            // column b of c_A is ± e_{A^b}
            for b in 0..n {
                out[(mask ^ b, b)] += coeff * super::clifford_sign(mask, b);
            }
        }
        out
    }

    /// Derivation of `Λ*` induced by the skew matrix `ω` acting on
    /// covectors as `θ^a ↦ Σ_b ω_{ba} θ^b`, written through the two Clifford
    /// actions: `-¼ ω_{ab} c_a c_b + ¼ ω_{ab} c*_a c*_b`.
    pub fn derivation(&self, omega: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let n = self.size();
        let mut out = DMatrix::zeros(n, n);
        for a in 0..d {
            for b in 0..d {
                let w = omega[a * d + b];
                if w == 0.0 || a == b {
                    continue;
                }
                out += (&self.left[a] * &self.left[b]) * (-0.25 * w);
                out += (&self.right[a] * &self.right[b]) * (0.25 * w);
            }
        }
        out
    }

    /// Left-factor part of [`derivation`](Self::derivation), `-¼ ω_{ab} c_a c_b`.
    pub fn spin_derivation_left(&self, omega: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let n = self.size();
        let mut out = DMatrix::zeros(n, n);
        for a in 0..d {
            for b in 0..d {
                let w = omega[a * d + b];
                if w != 0.0 && a != b {
                    out += (&self.left[a] * &self.left[b]) * (-0.25 * w);
                }
            }
        }
        out
    }

    /// Right-factor part, `¼ ω_{ab} c*_a c*_b`.
    pub fn spin_derivation_right(&self, omega: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let n = self.size();
        let mut out = DMatrix::zeros(n, n);
        for a in 0..d {
            for b in 0..d {
                let w = omega[a * d + b];
                if w != 0.0 && a != b {
                    out += (&self.right[a] * &self.right[b]) * (0.25 * w);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliff::{supertrace_product, Multivector};

    #[test]
    fn generators_match_wedge_and_interior() {
        for d in [2, 4] {
            let rep = DoubleCliffordRep::new(d).unwrap();
            let n = rep.size();
            for i in 0..d {
                let cov = Multivector::basis(d, 1 << i).unwrap();
                for a in 0..n {
                    let v = Multivector::basis(d, a).unwrap();
                    let w = cov.wedge(&v).unwrap();
                    let io = Multivector::interior(&cov, &v).unwrap();
                    for b in 0..n {
                        assert_eq!(rep.eps(i)[(b, a)], w.coeff(b).re);
                        assert_eq!(rep.iota(i)[(b, a)], io.coeff(b).re);
                    }
                }
            }
        }
    }

    #[test]
    fn actions_supercommute() {
        let rep = DoubleCliffordRep::new(4).unwrap();
        let n = rep.size();
        let id = DMatrix::<f64>::identity(n, n);
        for i in 0..4 {
            for j in 0..4 {
                let mixed = rep.c(i) * rep.c_star(j) + rep.c_star(j) * rep.c(i);
                assert_eq!(mixed.norm(), 0.0);
                let ll = rep.c(i) * rep.c(j) + rep.c(j) * rep.c(i);
                let rr = rep.c_star(i) * rep.c_star(j) + rep.c_star(j) * rep.c_star(i);
                let delta = if i == j { 2.0 } else { 0.0 };
                assert_eq!((ll + &id * delta).norm(), 0.0);
                assert_eq!((rr - &id * delta).norm(), 0.0);
            }
        }
    }

    #[test]
    fn left_action_is_clifford_multiplication() {
        let d = 4;
        let rep = DoubleCliffordRep::new(d).unwrap();
        let a = CliffordElement::word(d, &[1, 3]).unwrap() + CliffordElement::word(d, &[2]).unwrap() * 0.5;
        let m = rep.left_action(&a);
        for b in 0..rep.size() {
            let prod = a.clifford_mul(&CliffordElement::basis(d, b).unwrap()).unwrap();
            for r in 0..rep.size() {
                assert!((m[(r, b)] - prod.coeff(r)).norm() < 1e-15);
            }
        }
        let coeffs: Vec<f64> = a.coeffs().iter().map(|c| c.re).collect();
        assert!((rep.left_form(&coeffs).map(|x| C64::new(x, 0.0)) - m).norm() < 1e-15);
    }

    #[test]
    fn product_supertrace_brute_force_d2() {
        let rep = DoubleCliffordRep::new(2).unwrap();
        let c12 = CliffordElement::word(2, &[1, 2]).unwrap();
        let brute = rep.product_supertrace(&c12, &c12);
        assert!((brute - C64::new(4.0, 0.0)).norm() < 1e-14);
        assert!((brute - supertrace_product(&c12, &c12).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn derivation_matches_covector_rotation() {
        let d = 4;
        let rep = DoubleCliffordRep::new(d).unwrap();
        let mut omega = vec![0.0; d * d];
        let vals = [0.3, -1.2, 0.7, 0.4, 2.0, -0.5];
        let mut k = 0;
        for a in 0..d {
            for b in a + 1..d {
                omega[a * d + b] = vals[k];
                omega[b * d + a] = -vals[k];
                k += 1;
            }
        }
        // Σ_{a,b} ω_{ba} ε_b ι_a
        let n = rep.size();
        let mut expect = DMatrix::<f64>::zeros(n, n);
        for a in 0..d {
            for b in 0..d {
                expect += rep.eps(b) * rep.iota(a) * omega[b * d + a];
            }
        }
        assert!((rep.derivation(&omega) - expect).norm() < 1e-13);
    }
}
