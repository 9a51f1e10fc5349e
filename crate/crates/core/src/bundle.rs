//! Fiber endomorphisms of `Λ* ≅ S ⊗ S*` built from pointwise geometry.
//!
//! Forms are expanded in the orthonormal coframe, `Σ f_A θ^A`, so a
//! connection acts on coefficient vectors through
//! [`DoubleCliffordRep::derivation`].

use nalgebra::DMatrix;

use crate::cliff::{CurvatureArray, DoubleCliffordRep};
use crate::geom::{curvature, dirac_decompose, ConnectionKind, GeometrySpec, PointGeometry, TorsionDecomposition};
use crate::linalg::{central_diff, row_major};
use crate::Result;

/// Connection on `Λ*` used for covariant derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleConnection {
    /// Full connection acting on forms, the one defining the Dirac operator.
    Full,
    /// 3B spin connection on `S`, full connection on `S*`.
    Twisted,
}

/// Coordinate connection endomorphisms `C_i = A(∂_i)`.
pub fn connection_endomorphisms(
    rep: &DoubleCliffordRep,
    pt: &PointGeometry,
    kind: BundleConnection,
) -> Result<Vec<DMatrix<f64>>> {
    let d = pt.dim;
    match kind {
        BundleConnection::Full => Ok((0..d).map(|i| rep.derivation(&row_major(&pt.omega[i]))).collect()),
        BundleConnection::Twisted => {
            let three_b = pt.connection(ConnectionKind::ThreeB)?;
            Ok((0..d)
                .map(|i| rep.spin_derivation_left(&row_major(&three_b[i])) + rep.spin_derivation_right(&row_major(&pt.omega[i])))
                .collect())
        }
    }
}

/// `c(F) = ⅛ Σ Ω^a_b(E_i, E_j) c_i c_j c*_a c*_b` for the dual-factor
/// curvature.
pub fn twist_curvature_operator(rep: &DoubleCliffordRep, r: &CurvatureArray) -> DMatrix<f64> {
    r.half_curvature_operator(rep) * -2.0
}

/// Clifford action `c(v)` of a frame form given by its coefficient vector.
pub fn form_action(rep: &DoubleCliffordRep, coeffs: &[f64]) -> DMatrix<f64> {
    rep.left_form(coeffs)
}

/// Zeroth-order part of the Dirac operator in the frame, `Σ_c c_c Der(ω(E_c))`.
pub fn dirac_connection_term(rep: &DoubleCliffordRep, pt: &PointGeometry) -> DMatrix<f64> {
    let d = pt.dim;
    let n = rep.size();
    let mut out = DMatrix::zeros(n, n);
    for c in 0..d {
        let w = pt.on_frame(&pt.omega, c);
        out += rep.c(c) * rep.derivation(&row_major(&w));
    }
    out
}

/// Pieces of the Weitzenböck potential at a point.
#[derive(Debug, Clone)]
pub struct WeitzenbockPotential {
    /// `C = s/4 + c(F) + c(dB) - 2|B|² + c(D̂a) - |a|²`.
    pub total: DMatrix<f64>,
    pub scalar_curvature: f64,
    pub twist: DMatrix<f64>,
    pub d_b: DMatrix<f64>,
    pub d_a: DMatrix<f64>,
    pub decomposition: TorsionDecomposition,
    /// Coordinate components `a^k = e^k_c a_c`.
    pub a_coordinate: Vec<f64>,
}

fn decomposition_coeffs(spec: &GeometrySpec, x: &[f64]) -> Vec<f64> {
    let d = spec.dim();
    let k = spec.contorsion.contorsion(x);
    let dec = dirac_decompose(&k, d).expect("contorsion validated");
    dec.a
        .coeffs()
        .iter()
        .zip(dec.b.coeffs())
        .map(|(a, b)| a.re + b.re)
        .collect()
}

pub fn weitzenbock_potential(rep: &DoubleCliffordRep, spec: &GeometrySpec, x: &[f64]) -> Result<WeitzenbockPotential> {
    let d = spec.dim();
    let n = rep.size();
    let pt = PointGeometry::new(spec, x)?;
    let curv = curvature(spec, x)?;
    let dec = dirac_decompose(&pt.contorsion, d)?;
    let ab: Vec<f64> = dec.a.coeffs().iter().zip(dec.b.coeffs()).map(|(a, b)| a.re + b.re).collect();

    // ∂_k of the frame components of a + B
    let partials: Vec<Vec<f64>> = if spec.contorsion.is_zero() {
        vec![vec![0.0; n]; d]
    } else {
        (0..d)
            .map(|k| central_diff(|p: &[f64]| decomposition_coeffs(spec, p), x, k, spec.metric.fd_step()))
            .collect()
    };

    let mut d_b = DMatrix::<f64>::zeros(n, n);
    let mut d_a = DMatrix::<f64>::zeros(n, n);
    let mut db_coeffs = nalgebra::DVector::<f64>::zeros(n);
    for i in 0..d {
        // ∇̂_{E_i}(a + B) = E_i(coeffs) + Der(ω̂(E_i)) coeffs
        let mut cov = nalgebra::DVector::from_fn(n, |m, _| (0..d).map(|k| pt.frame[(k, i)] * partials[k][m]).sum());
        let der = rep.derivation(&row_major(&pt.on_frame(&pt.omega_lc, i)));
        cov += der * nalgebra::DVector::from_column_slice(&ab);
        let b_part = nalgebra::DVector::from_fn(n, |m, _| if m.count_ones() == 3 { cov[m] } else { 0.0 });
        let a_part: Vec<f64> = (0..n).map(|m| if m.count_ones() == 1 { cov[m] } else { 0.0 }).collect();
        db_coeffs += rep.eps(i) * b_part;
        d_a += rep.c(i) * rep.left_form(&a_part);
    }
    d_b += rep.left_form(db_coeffs.as_slice());

    let twist = twist_curvature_operator(rep, &curv.full);
    let scalar = curv.scalar;
    let shift = 0.25 * scalar - 2.0 * dec.b_norm_sqr() - dec.a_norm_sqr();
    let total = &twist + &d_b + &d_a + DMatrix::<f64>::identity(n, n) * shift;
    let a_frame = dec.a_vec();
    let a_coordinate = (0..d).map(|k| (0..d).map(|c| pt.frame[(k, c)] * a_frame[c]).sum()).collect();
    Ok(WeitzenbockPotential {
        total,
        scalar_curvature: scalar,
        twist,
        d_b,
        d_a,
        decomposition: dec,
        a_coordinate,
    })
}
