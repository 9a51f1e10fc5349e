//! Path sampling invariants and flat-space oracles.

use gbc_core::geom::{preset, PointGeometry};
use gbc_core::linalg::log_log_slope;
use gbc_core::sde::{brownian, heat_diag_mc, simulate, SdeSpec, SimOptions};
use proptest::prelude::*;
use std::f64::consts::PI;

fn single_worker<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

#[test]
fn ensembles_are_bit_identical_for_a_fixed_seed() {
    let spec = SdeSpec::new(preset("torsion-torus").unwrap()).unwrap();
    let opts = SimOptions { steps: 8, ..Default::default() };
    let run = || single_worker(|| simulate(&spec, &[0.4, 1.3], 0.2, 256, 17, opts).unwrap());
    let (a, b) = (run(), run());
    for (p, q) in a.paths.iter().zip(&b.paths) {
        assert!(p.x.iter().zip(&q.x).all(|(u, v)| u.to_bits() == v.to_bits()));
        assert!(p.e.iter().zip(q.e.iter()).all(|(u, v)| u.to_bits() == v.to_bits()));
        let (mp, mq) = (p.m.as_ref().unwrap(), q.m.as_ref().unwrap());
        assert!(mp.iter().zip(mq.iter()).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
    // the thread count does not change the streams
    let many = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = many.install(|| simulate(&spec, &[0.4, 1.3], 0.2, 256, 17, opts).unwrap());
    assert!(a.paths.iter().zip(&c.paths).all(|(p, q)| p.x == q.x));
}

#[test]
fn flat_paths_are_exact() {
    let spec = SdeSpec::new(preset("flat-torus").unwrap()).unwrap();
    let opts = SimOptions { steps: 16, ..Default::default() };
    let x0 = [1.0, 2.0];
    let ens = simulate(&spec, &x0, 0.5, 200, 5, opts).unwrap();
    let fib = spec.rep().size();
    let one = nalgebra::DMatrix::<f64>::identity(fib, fib);
    for p in &ens.paths {
        assert_eq!(p.e, one);
        assert_eq!(p.m.as_ref().unwrap(), &one);
        for i in 0..2 {
            assert!((p.x[i] - x0[i] - p.w[i]).abs() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sigma_squares_to_inverse_metric(
        name in prop_oneof![Just("conformal-torus"), Just("stereographic-sphere"), Just("torsion-torus"), Just("conformal-4torus")],
        coords in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let geom = preset(name).unwrap();
        let x = &coords[..geom.dim()];
        let g_inv = PointGeometry::new(&geom, x).unwrap().g_inv;
        let spec = SdeSpec::new(geom).unwrap();
        let s = spec.sigma(x).unwrap();
        prop_assert!((&s * s.transpose() - &g_inv).amax() < 1e-10 * (1.0 + g_inv.amax()));
    }
}

#[test]
fn standard_errors_shrink_like_inverse_root_n() {
    let opts = SimOptions { steps: 4, ..Default::default() };
    let ns = [1_000usize, 10_000, 100_000];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| brownian(&[0.0, 0.0], 1.0, n, 3, opts).unwrap().estimate(|p| vec![p.w[0]]).unwrap()[0].stderr)
        .collect();
    let slope = log_log_slope(&ns.map(|n| n as f64), &errs).unwrap();
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
}

#[test]
fn flat_heat_diagonal_matches_mollified_gaussian() {
    let spec = SdeSpec::new(preset("flat-torus").unwrap()).unwrap();
    let opts = SimOptions { steps: 2, ..Default::default() };
    for (k, (t, b)) in [(0.1, 0.1), (0.25, 0.05), (0.5, 0.2)].into_iter().enumerate() {
        let est = heat_diag_mc(&spec, t, &[2.0, 3.0], b, 40_000, 10 + k as u64, opts).unwrap();
        let exact = 1.0 / (2.0 * PI * (t + b * b));
        assert!((est.scalar.mean - exact).abs() < 3.0 * est.scalar.stderr, "t={t} b={b}: {:?} vs {exact}", est.scalar);
    }
}
