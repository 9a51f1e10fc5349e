//! Clifford, Berezin and Pfaffian invariants against oracles built here.

use gbc_core::cliff::{
    chirality, ladder_supertrace, pfaffian, pfaffian_matchings, supertrace_berezin, CliffordElement, CurvatureArray,
    DoubleCliffordRep, Multivector, SkewMatrix,
};
use gbc_core::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Jordan-Wigner generators with `γ_i² = -1`, independent of the crate's
/// spinor module.
fn jordan_wigner(d: usize) -> Vec<DMatrix<C64>> {
    let i = C64::new(0.0, 1.0);
    let one = DMatrix::<C64>::identity(2, 2);
    let z = DMatrix::from_row_slice(2, 2, &[C64::from(1.0), C64::from(0.0), C64::from(0.0), C64::from(-1.0)]);
    let x = DMatrix::from_row_slice(2, 2, &[C64::from(0.0), C64::from(1.0), C64::from(1.0), C64::from(0.0)]);
    let y = DMatrix::from_row_slice(2, 2, &[C64::from(0.0), -i, i, C64::from(0.0)]);
    let l = d / 2;
    let mut out = Vec::new();
    for k in 0..l {
        for p in [&x, &y] {
            let mut m = DMatrix::<C64>::identity(1, 1);
            for j in 0..l {
                let f = if j < k {
                    &z
                } else if j == k {
                    p
                } else {
                    &one
                };
                m = m.kronecker(f);
            }
            out.push(m * i);
        }
    }
    out
}

/// `tr(Γ ρ(a))` with `Γ = i^l γ_1…γ_d`.
fn oracle_supertrace(a: &CliffordElement) -> C64 {
    let d = a.dim();
    let g = jordan_wigner(d);
    let size = 1 << (d / 2);
    let word = |mask: usize| {
        let mut m = DMatrix::<C64>::identity(size, size);
        for (k, gk) in g.iter().enumerate() {
            if mask >> k & 1 == 1 {
                m *= gk;
            }
        }
        m
    };
    let gamma = word((1 << d) - 1) * C64::new(0.0, 1.0).powi((d / 2) as i32);
    let mut rho = DMatrix::<C64>::zeros(size, size);
    for (mask, c) in a.coeffs().iter().enumerate() {
        rho += word(mask) * *c;
    }
    (gamma * rho).trace()
}

fn element(d: usize) -> impl Strategy<Value = CliffordElement> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << d)
        .prop_map(move |v| CliffordElement::from_coeffs(d, v.into_iter().map(|(r, i)| C64::new(r, i)).collect()).unwrap())
}

fn skew(d: usize) -> impl Strategy<Value = SkewMatrix> {
    any::<u64>().prop_map(move |s| SkewMatrix::random(&mut ChaCha8Rng::seed_from_u64(s), d))
}

fn dims() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4), Just(6)]
}

fn max_diff(a: &CliffordElement, b: &CliffordElement) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn berezin_supertrace_matches_matrix_trace(a in dims().prop_flat_map(element)) {
        let want = oracle_supertrace(&a);
        let got = supertrace_berezin(&a);
        prop_assert!((got - want).norm() < 1e-10 * (1.0 + a.norm()), "{got} vs {want}");
    }

    #[test]
    fn clifford_product_is_associative((a, b, c) in dims().prop_flat_map(|d| (element(d), element(d), element(d)))) {
        let left = a.clifford_mul(&b).unwrap().clifford_mul(&c).unwrap();
        let right = a.clifford_mul(&b.clifford_mul(&c).unwrap()).unwrap();
        prop_assert!(max_diff(&left, &right) < 1e-12 * (1.0 + a.norm() * b.norm() * c.norm()));
    }

    #[test]
    fn quantize_inverts_symbol(a in dims().prop_flat_map(element)) {
        let back = CliffordElement::quantize(&a.symbol());
        prop_assert!(max_diff(&a, &back) < 1e-12);
    }

    #[test]
    fn pfaffian_squares_to_determinant(a in dims().prop_flat_map(skew)) {
        let pf = pfaffian(&a).unwrap();
        let det = a.to_dense().determinant();
        prop_assert!((pf * pf - det).abs() <= 1e-8 * det.abs().max(1e-300));
        prop_assert!((pf - pfaffian_matchings(&a).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn pfaffian_congruence(
        (a, m) in dims().prop_flat_map(|d| (skew(d), prop::collection::vec(-1.0f64..1.0, d * d)))
    ) {
        let d = a.dim();
        let m = DMatrix::from_vec(d, d, m);
        let b = SkewMatrix::from_dense(&(m.transpose() * a.to_dense() * &m)).unwrap();
        let want = m.determinant() * pfaffian(&a).unwrap();
        prop_assert!((pfaffian(&b).unwrap() - want).abs() < 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn ladder_closes_to_explicit_pfaffian(seed in any::<u64>(), d in prop_oneof![Just(2usize), Just(4)]) {
        let r = CurvatureArray::random(&mut ChaCha8Rng::seed_from_u64(seed), d).unwrap();
        let want = explicit_pf_neg(&r);
        let rep = ladder_supertrace(&r).unwrap();
        prop_assert!(rep.lower_residual() < 1e-10);
        prop_assert!((rep.top() - want).abs() <= 1e-8 * want.abs().max(1e-12), "{} vs {want}", rep.top());
        prop_assert!((r.pfaffian_neg().unwrap() - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }
}

/// `Pf(-R)` Berezin coefficient written out for d = 2 and d = 4.
fn explicit_pf_neg(r: &CurvatureArray) -> f64 {
    if r.dim() == 2 {
        return -r.get(0, 1, 0, 1);
    }
    // coefficient of e1234 in α∧β for 2-forms with components α_mk
    let wedge = |a: (usize, usize), b: (usize, usize)| {
        let f = |p: (usize, usize), m: usize, k: usize| r.get(m, k, p.0, p.1);
        f(a, 0, 1) * f(b, 2, 3) - f(a, 0, 2) * f(b, 1, 3) + f(a, 0, 3) * f(b, 1, 2) + f(a, 2, 3) * f(b, 0, 1)
            - f(a, 1, 3) * f(b, 0, 2)
            + f(a, 1, 2) * f(b, 0, 3)
    };
    wedge((0, 1), (2, 3)) - wedge((0, 2), (1, 3)) + wedge((0, 3), (1, 2))
}

#[test]
fn chirality_anticommutes_with_generators() {
    for d in [2, 4, 6] {
        let g = chirality(d).unwrap();
        let one = CliffordElement::one(d).unwrap();
        assert!(max_diff(&g.clifford_mul(&g).unwrap(), &one) < 1e-14);
        for i in 0..d {
            let e = CliffordElement::generator(d, i + 1).unwrap();
            let ge = g.clifford_mul(&e).unwrap();
            let eg = e.clifford_mul(&g).unwrap();
            let sum: f64 = ge.coeffs().iter().zip(eg.coeffs()).map(|(a, b)| (a + b).norm()).fold(0.0, f64::max);
            assert!(sum < 1e-14, "d={d} i={i}");
        }
    }
}

#[test]
fn double_action_generators_are_exact() {
    for d in [2, 4, 6] {
        let rep = DoubleCliffordRep::new(d).unwrap();
        let n = rep.size();
        let g = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(rep.grading()));
        for i in 0..d {
            assert_eq!(rep.c(i), &(rep.eps(i) - rep.iota(i)));
            assert_eq!(rep.c_star(i), &(rep.eps(i) + rep.iota(i)));
            // ε(e^i) on basis forms: e^i ∧ e^S with the sign of the sorted wedge
            for s in 0..n {
                let col = rep.eps(i).column(s);
                if s >> i & 1 == 1 {
                    assert!(col.iter().all(|v| *v == 0.0));
                } else {
                    let sign = if (s & ((1 << i) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    assert_eq!(col[s | 1 << i], sign);
                }
            }
            for j in 0..d {
                // odd operators from the two actions anticommute
                let ac = rep.c(i) * rep.c_star(j) + rep.c_star(j) * rep.c(i);
                assert_eq!(ac.amax(), 0.0, "d={d} i={i} j={j}");
            }
            assert_eq!((&g * rep.c(i) + rep.c(i) * &g).amax(), 0.0);
        }
    }
}

#[test]
fn berezin_picks_top_coefficient() {
    let v = Multivector::monomial(4, &[1, 2, 3, 4]).unwrap();
    assert_eq!(v.berezin(), C64::from(1.0));
    let w = Multivector::monomial(4, &[2, 1, 3, 4]).unwrap();
    assert_eq!(w.berezin(), C64::from(-1.0));
}
