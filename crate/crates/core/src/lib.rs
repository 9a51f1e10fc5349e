//! Numerical machinery for checking the local Gauss-Bonnet-Chern formula for
//! metric-compatible connections with torsion.
//!
//! The crate is split along the objects the check needs:
//!
//! * [`cliff`] - exterior and Clifford algebra of `R^d`, chirality, Berezin
//!   integral, supertraces, Pfaffians and the double Clifford action on
//!   `Λ*(R^d) ≅ S ⊗ S*`.
//! * [`geom`] - chart geometry: metrics, contorsion, frames, curvature,
//!   the `(a, B)` torsion decomposition, Euler densities, normal coordinates.
//! * [`bundle`] - fiber endomorphisms on `Λ*` built from the geometry
//!   (connection matrices, Weitzenböck potential).
//! * [`hodge`] - discrete de Rham-Dirac operator on periodic grids and its
//!   heat semigroup.
//! * [`sde`] - Feynman-Kac path sampling for the same heat kernel.
//!
//! # Conventions
//!
//! All sign choices live here so every numeric claim can be read against one
//! ledger.
//!
//! * Clifford relation: `c(v)^2 = -|v|^2`. On forms, left action
//!   `c(e^i) = ε(e^i) - ι(e^i)`, right action `c*(e^i) = ε(e^i) + ι(e^i)`.
//!   The right generators square to `+1`; the dual Clifford algebra in which
//!   `c*(e)^2 = -1` is represented on forms by `i (ε + ι)`.
//! * Chirality `Γ = i^l c(e^1)…c(e^d)`, `l = d/2`.
//! * Berezin integral: coefficient of `e^1∧…∧e^d`.
//! * Supertraces: `tr(Γ a) = (-2i)^l T(σ(a))` on `S`, `(2i)^l T(σ(b))` on the
//!   dual factor, and on forms `Str = tr((-1)^deg ·)`.
//! * Connections: `D E_b = ω^a_b E_a` in an orthonormal frame, curvature
//!   `Ω = dω + ω∧ω`. Curvature arrays are stored as
//!   `R[m][k][a][b] = <R(E_m, E_k) E_a, E_b> = Ω^b_a(E_m, E_k)`, so a round
//!   sphere has `R_1212 = -1` and `Pf(-R) = +K`.
//! * Pfaffian: `Pf([[0, a], [-a, 0]]) = a`; for 2-form valued matrices the
//!   entries are wedged and the Berezin coefficient is taken.
//! * Heat equation: `∂_t f = -½ 𝒟² f`, flat diagonal `(2πt)^{-d/2}`.
//! * Euler density: `Pf(-R) / (2π)^l · √det g` against `dx^1…dx^d`.

pub mod bundle;
pub mod cliff;
pub mod error;
pub mod geom;
pub mod hodge;
pub mod linalg;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
