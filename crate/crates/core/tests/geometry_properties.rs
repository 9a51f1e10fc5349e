//! Pointwise geometry invariants over every preset.

use gbc_core::geom::{
    curvature, dirac_decompose, euler_characteristic, euler_density, metric_compatibility_residual,
    normal_coordinate_check, preset, ConnectionKind, PointGeometry, PRESET_NAMES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-2.5..2.5)).collect()
}

#[test]
fn every_preset_is_metric_compatible() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for name in PRESET_NAMES {
        let spec = preset(name).unwrap();
        for _ in 0..100 {
            let x = random_point(&mut rng, spec.dim());
            let r = metric_compatibility_residual(&spec, &x).unwrap();
            assert!(r < 1e-7, "{name} at {x:?}: {r}");
            assert!(PointGeometry::new(&spec, &x).unwrap().orthonormality_residual() < 1e-12);
        }
    }
}

#[test]
fn torsion_is_antisymmetrized_contorsion_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for name in PRESET_NAMES {
        let spec = preset(name).unwrap();
        let d = spec.dim();
        for _ in 0..20 {
            let x = random_point(&mut rng, d);
            let lc = PointGeometry::new(&spec.levi_civita(), &x).unwrap();
            assert!(lc.torsion().iter().all(|t| t.abs() < 1e-8), "{name}");
            let p = PointGeometry::new(&spec, &x).unwrap();
            let (t, k) = (p.torsion(), &p.contorsion);
            for a in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let want = k[(c * d + a) * d + e] - k[(e * d + a) * d + c];
                        assert!((t[(a * d + c) * d + e] - want).abs() < 1e-10, "{name}");
                    }
                }
            }
        }
    }
}

#[test]
fn curvature_symmetries() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in PRESET_NAMES {
        let spec = preset(name).unwrap();
        let d = spec.dim();
        let x = random_point(&mut rng, d);
        let c = curvature(&spec, &x).unwrap();
        for r in [&c.full, &c.levi_civita] {
            for m in 0..d {
                for k in 0..d {
                    for a in 0..d {
                        for b in 0..d {
                            assert!((r.get(m, k, a, b) + r.get(k, m, a, b)).abs() < 1e-9, "{name}");
                            assert!((r.get(m, k, a, b) + r.get(m, k, b, a)).abs() < 1e-9, "{name}");
                        }
                    }
                }
            }
        }
        let r = &c.levi_civita;
        for m in 0..d {
            for k in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        let bianchi = r.get(m, k, a, b) + r.get(k, a, m, b) + r.get(a, m, k, b);
                        assert!(bianchi.abs() < 1e-7, "{name} bianchi {bianchi}");
                    }
                }
            }
        }
    }
}

#[test]
fn decomposition_grades() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for name in PRESET_NAMES {
        let spec = preset(name).unwrap();
        let d = spec.dim();
        let x = random_point(&mut rng, d);
        let dec = dirac_decompose(&spec.contorsion.contorsion(&x), d).unwrap();
        assert_eq!(dec.a.residual_outside(&[1]), 0.0, "{name}");
        assert_eq!(dec.b.residual_outside(&[3]), 0.0, "{name}");
        if d == 2 {
            assert_eq!(dec.b.norm(), 0.0);
        }
    }
}

#[test]
fn two_dimensional_euler_form_is_gauss_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let conformal = preset("conformal-torus").unwrap();
    let sphere = preset("stereographic-sphere").unwrap();
    for _ in 0..50 {
        let x = random_point(&mut rng, 2);
        // φ = 0.3 sin x1 cos x2, K = -e^{-2φ} Δφ = 2φ e^{-2φ}, √g = e^{2φ}
        let phi = 0.3 * x[0].sin() * x[1].cos();
        let got = euler_density(&conformal, &x).unwrap();
        assert!((got - phi / PI).abs() < 1e-6, "{got} vs {}", phi / PI);
        let sqrt_g = 4.0 / (1.0 + x[0] * x[0] + x[1] * x[1]).powi(2);
        let got = euler_density(&sphere, &x).unwrap();
        assert!((got - sqrt_g / (2.0 * PI)).abs() < 1e-6);
    }
}

#[test]
fn torus_euler_characteristic_vanishes_with_and_without_contorsion() {
    for (name, n) in [("flat-torus", 16), ("conformal-torus", 64), ("torsion-torus", 64), ("conformal-4torus", 12)] {
        let spec = preset(name).unwrap();
        let with = euler_characteristic(&spec, n).unwrap();
        let without = euler_characteristic(&spec.levi_civita(), n).unwrap();
        assert!(with.abs() < 1e-5, "{name}: {with}");
        assert!((with - without).abs() < 1e-5, "{name}: {with} vs {without}");
    }
}

#[test]
fn normal_coordinates_converge_on_smooth_presets() {
    let radii = [0.2, 0.1, 0.05, 0.025];
    for (name, x0) in [
        ("conformal-torus", vec![0.7, -0.4]),
        ("stereographic-sphere", vec![0.3, -0.2]),
        ("torsion-torus", vec![1.0, 0.5]),
        ("conformal-4torus", vec![0.7, -0.4, 0.2, 1.1]),
    ] {
        let spec = preset(name).unwrap();
        for kind in [ConnectionKind::LeviCivita, ConnectionKind::ThreeB] {
            let r = normal_coordinate_check(&spec, kind, &x0, &radii).unwrap();
            assert!(r.passes(1.9), "{name} {kind:?}: {r:?}");
        }
    }
}
