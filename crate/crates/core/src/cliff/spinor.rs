use nalgebra::DMatrix;

use super::{check_dim, i_pow, CliffordElement};
use crate::{Result, C64};

/// Spinor representation of `Cl(R^d) ⊗ C` on `C^{2^l}`.
///
/// Built by the tensor-product recursion from the Pauli matrices: Hermitian
/// generators `G_k ⊗ σ3` for the old directions and `1 ⊗ σ1`, `1 ⊗ σ2` for the
/// two new ones, then `γ_k = i G_k` so that `γ_k^2 = -1`.
#[derive(Debug, Clone)]
pub struct SpinorRep {
    dim: usize,
    gammas: Vec<DMatrix<C64>>,
    chirality: DMatrix<C64>,
}

fn pauli() -> [DMatrix<C64>; 3] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

impl SpinorRep {
    pub fn new(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let [s1, s2, s3] = pauli();
        let mut herm = vec![s1.clone(), s2.clone()];
        while herm.len() < dim {
            let size = herm[0].nrows();
            let id = DMatrix::<C64>::identity(size, size);
            let mut next: Vec<_> = herm.iter().map(|g| g.kronecker(&s3)).collect();
            next.push(id.kronecker(&s1));
            next.push(id.kronecker(&s2));
            herm = next;
        }
        let i = C64::new(0.0, 1.0);
        let gammas: Vec<_> = herm.into_iter().map(|g| g * i).collect();
        let size = gammas[0].nrows();
        let mut top = DMatrix::<C64>::identity(size, size);
        for g in &gammas {
            top *= g;
        }
        let chirality = top * i_pow((dim / 2) as i64);
        Ok(SpinorRep { dim, gammas, chirality })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gammas(&self) -> &[DMatrix<C64>] {
        &self.gammas
    }

    pub fn chirality(&self) -> &DMatrix<C64> {
        &self.chirality
    }

    /// Image of a Clifford element.
    pub fn represent(&self, a: &CliffordElement) -> DMatrix<C64> {
        let size = self.gammas[0].nrows();
        let mut out = DMatrix::<C64>::zeros(size, size);
        for (mask, &coeff) in a.coeffs().iter().enumerate() {
            if coeff.norm() == 0.0 {
                continue;
            }
            let mut m = DMatrix::<C64>::identity(size, size);
            for (k, g) in self.gammas.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    m *= g;
                }
            }
            out += m * coeff;
        }
        out
    }
}

/// `tr(Γ ρ(a))` in the spinor representation.
pub fn supertrace_gamma(rep: &SpinorRep, a: &CliffordElement) -> C64 {
    (rep.chirality() * rep.represent(a)).trace()
}
