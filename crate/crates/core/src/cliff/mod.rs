//! Exterior and Clifford algebra over `R^d`, `d` even.
//!
//! Basis monomials are addressed by bitmask: bit `i` set means `e^{i+1}` is a
//! factor, always in increasing index order. Both [`Multivector`] and
//! [`CliffordElement`] use this dense `2^d` layout, so the symbol and
//! quantization maps are coefficientwise identities.

mod clifford;
mod double;
mod ladder;
mod multivector;
mod pfaffian;
mod spinor;

pub use clifford::{chirality, supertrace_berezin, supertrace_dual, supertrace_product, CliffordElement};
pub use double::DoubleCliffordRep;
pub use ladder::{ladder_supertrace, CurvatureArray, LadderReport};
pub use multivector::Multivector;
pub use pfaffian::{pfaffian, pfaffian_berezin, pfaffian_forms, pfaffian_matchings, SkewMatrix};
pub use spinor::{supertrace_gamma, SpinorRep};

/// Largest supported dimension for dense storage.
pub const MAX_DIM: usize = 8;

pub fn check_dim(d: usize) -> crate::Result<()> {
    if !d.is_multiple_of(2) {
        return Err(crate::Error::OddDimension(d));
    }
    if d == 0 || d > MAX_DIM {
        return Err(crate::Error::UnsupportedDimension(d));
    }
    Ok(())
}

/// Grade of a basis monomial.
#[inline]
pub fn grade(mask: usize) -> usize {
    mask.count_ones() as usize
}

/// Number of transpositions needed to sort `e_a e_b` into increasing order,
/// counting only pairs `(x in a, y in b)` with `x > y`.
#[inline]
fn reorder_parity(a: usize, b: usize) -> u32 {
    let mut count = 0;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        count += (a >> (y + 1)).count_ones();
        rest &= rest - 1;
    }
    count
}

/// Sign of `e_a ∧ e_b` relative to `e_{a|b}`, or 0 if the monomials overlap.
#[inline]
pub fn wedge_sign(a: usize, b: usize) -> f64 {
    if a & b != 0 {
        0.0
    } else if reorder_parity(a, b).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign of `c_a c_b` relative to `c_{a^b}` under `c(e^i)^2 = -1`.
#[inline]
pub fn clifford_sign(a: usize, b: usize) -> f64 {
    let parity = reorder_parity(a, b) + (a & b).count_ones();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign of `ι(e^{i+1}) e_a` relative to `e_{a without i}`, or 0.
#[inline]
pub fn interior_sign(i: usize, a: usize) -> f64 {
    if a & (1 << i) == 0 {
        0.0
    } else if (a & ((1 << i) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `i^k` as a complex number.
pub fn i_pow(k: i64) -> crate::C64 {
    match k.rem_euclid(4) {
        0 => crate::C64::new(1.0, 0.0),
        1 => crate::C64::new(0.0, 1.0),
        2 => crate::C64::new(-1.0, 0.0),
        _ => crate::C64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_tables() {
        // e1 ∧ e2 = e12, e2 ∧ e1 = -e12
        assert_eq!(wedge_sign(0b01, 0b10), 1.0);
        assert_eq!(wedge_sign(0b10, 0b01), -1.0);
        assert_eq!(wedge_sign(0b01, 0b01), 0.0);
        // c1 c1 = -1
        assert_eq!(clifford_sign(0b01, 0b01), -1.0);
        // c2 (c1 c2) = -c1 c2 c2 = c1
        assert_eq!(clifford_sign(0b10, 0b11), 1.0);
        // ι(e2) e12 = -e1
        assert_eq!(interior_sign(1, 0b11), -1.0);
        assert_eq!(interior_sign(0, 0b11), 1.0);
    }
}
