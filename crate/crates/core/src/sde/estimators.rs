use nalgebra::DMatrix;
use rayon::prelude::*;

use super::coefficients::SdeSpec;
use super::paths::{column_estimates, levy_from_increments, path_increments, simulate, PathEnsemble, PathRecord, SimOptions};
use crate::geom::PointGeometry;
use crate::stats::BatchEstimate;
use crate::{Error, Result};

/// Monte Carlo estimate of the heat-kernel diagonal `h(t, x, x)`.
#[derive(Debug, Clone)]
pub struct KernelEstimate {
    pub target: Vec<f64>,
    pub t: f64,
    /// Mollifier bandwidths; two entries mean the estimate is the
    /// bandwidth-extrapolated combination.
    pub bandwidths: Vec<f64>,
    pub n: usize,
    pub excluded: usize,
    pub batches: usize,
    /// Fiber endomorphism `h(t, x, x)` against the Riemannian volume.
    pub value: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    /// `tr h / 2^d`, the scalar part.
    pub scalar: BatchEstimate,
    /// `Str(h) √det g`, the local supertrace against `dx`.
    pub supertrace: BatchEstimate,
}

/// Gaussian mollifier of `X - x`, using the nearest periodic image.
fn mollifier(spec: &SdeSpec, x: &[f64], y: &[f64], b: f64) -> f64 {
    let sides = spec.geometry.chart.sides();
    let r2: f64 = x
        .iter()
        .zip(y)
        .enumerate()
        .map(|(i, (a, c))| {
            let mut v = a - c;
            if let Some(s) = sides {
                v = (v + 0.5 * s[i]).rem_euclid(s[i]) - 0.5 * s[i];
            }
            v * v
        })
        .sum();
    let var = b * b;
    (-r2 / (2.0 * var)).exp() * (2.0 * std::f64::consts::PI * var).powf(-0.5 * x.len() as f64)
}

/// Per-path row: `M e φ_b(X - x)` entries followed by its supertrace, for
/// each bandwidth in turn.
fn kernel_row(spec: &SdeSpec, p: &PathRecord, x: &[f64], bandwidths: &[f64]) -> Vec<f64> {
    let q = match &p.m {
        Some(m) => m * &p.e,
        None => p.e.clone(),
    };
    let str_q = spec.rep().supertrace(&q);
    let mut row = Vec::with_capacity(bandwidths.len() * (q.len() + 1));
    for &b in bandwidths {
        let phi = mollifier(spec, &p.x, x, b);
        row.extend(q.iter().map(|v| v * phi));
        row.push(str_q * phi);
    }
    row
}

fn finish(
    spec: &SdeSpec,
    ens: &PathEnsemble,
    x: &[f64],
    rows: Vec<Vec<f64>>,
    bandwidths: Vec<f64>,
) -> Result<KernelEstimate> {
    let fib = spec.rep().size();
    let sqrt_det = PointGeometry::new(&spec.geometry, x)?.sqrt_det;
    let est = column_estimates(&rows);
    let value = DMatrix::from_fn(fib, fib, |r, c| est[c * fib + r].mean / sqrt_det);
    let stderr = DMatrix::from_fn(fib, fib, |r, c| est[c * fib + r].stderr / sqrt_det);
    let trace_rows: Vec<f64> = rows
        .iter()
        .map(|r| (0..fib).map(|a| r[a * fib + a]).sum::<f64>() / (fib as f64 * sqrt_det))
        .collect();
    Ok(KernelEstimate {
        target: x.to_vec(),
        t: ens.t,
        bandwidths,
        n: ens.len(),
        excluded: ens.excluded,
        batches: rows.len(),
        value,
        stderr,
        scalar: crate::stats::batch_estimate(&trace_rows),
        supertrace: est[fib * fib],
    })
}

fn check_bandwidth(b: f64) -> Result<()> {
    if !(b > 0.0) {
        return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {b}")));
    }
    Ok(())
}

/// Kernel diagonal from an existing ensemble started at `x`.
pub fn kernel_from_ensemble(spec: &SdeSpec, ens: &PathEnsemble, bandwidth: f64) -> Result<KernelEstimate> {
    check_bandwidth(bandwidth)?;
    let x = ens.x0.clone();
    let rows = ens.batch_table(|p| kernel_row(spec, p, &x, &[bandwidth]))?;
    finish(spec, ens, &x, rows, vec![bandwidth])
}

/// `h(t, x, x) ≈ E[M(t) e(t) φ_b(X(t) - x)] / √det g(x)`.
pub fn heat_diag_mc(spec: &SdeSpec, t: f64, x: &[f64], bandwidth: f64, n: usize, seed: u64, opts: SimOptions) -> Result<KernelEstimate> {
    check_bandwidth(bandwidth)?;
    let opts = SimOptions { with_functional: true, ..opts };
    let ens = simulate(spec, x, t, n, seed, opts)?;
    kernel_from_ensemble(spec, &ens, bandwidth)
}

/// Two-bandwidth extrapolation `(b₁² v₂ - b₂² v₁)/(b₁² - b₂²)` of the
/// mollified estimate, combined batch by batch on shared paths.
pub fn heat_diag_mc_extrapolated(
    spec: &SdeSpec,
    t: f64,
    x: &[f64],
    bandwidths: (f64, f64),
    n: usize,
    seed: u64,
    opts: SimOptions,
) -> Result<KernelEstimate> {
    let (b1, b2) = bandwidths;
    check_bandwidth(b1)?;
    check_bandwidth(b2)?;
    if b1 == b2 {
        return Err(Error::InvalidArgument("bandwidths must differ".into()));
    }
    let opts = SimOptions { with_functional: true, ..opts };
    let ens = simulate(spec, x, t, n, seed, opts)?;
    let rows = ens.batch_table(|p| kernel_row(spec, p, x, &[b1, b2]))?;
    let half = rows[0].len() / 2;
    let (w1, w2) = (b1 * b1, b2 * b2);
    let combined = rows
        .iter()
        .map(|r| (0..half).map(|k| (w1 * r[half + k] - w2 * r[k]) / (w1 - w2)).collect())
        .collect();
    finish(spec, &ens, x, combined, vec![b1, b2])
}

/// Brownian ensemble `X = x0 + w`, `e = M = 1`, for statistics of the
/// driving noise alone.
pub fn brownian(x0: &[f64], t: f64, n: usize, seed: u64, opts: SimOptions) -> Result<PathEnsemble> {
    opts.validate()?;
    let d = x0.len();
    let h = t / opts.steps as f64;
    let paths = (0..n)
        .into_par_iter()
        .map(|k| {
            let dw = path_increments(seed, k as u64, opts.steps, d, h);
            let (w, levy) = levy_from_increments(&dw, d);
            PathRecord {
                x: x0.iter().zip(&w).map(|(a, b)| a + b).collect(),
                e: DMatrix::identity(1, 1),
                m: None,
                w,
                levy,
                cond: 1.0,
                excluded: false,
            }
        })
        .collect();
    Ok(PathEnsemble {
        geometry: "brownian".into(),
        x0: x0.to_vec(),
        t,
        seed,
        options: opts,
        paths,
        excluded: 0,
    })
}

/// Per-path iterated integrals `L_{km} = ∫₀ᵗ w^k ∘ dw^m`.
pub fn levy_areas(ens: &PathEnsemble) -> Vec<DMatrix<f64>> {
    ens.paths.iter().map(|p| p.levy.clone()).collect()
}

/// Moments of `L_{12}` and `L_{11}`.
#[derive(Debug, Clone, Copy)]
pub struct LevyMoments {
    pub mean_off_diagonal: BatchEstimate,
    /// Second moment of `L_{12}`, its variance since the mean is zero.
    pub var_off_diagonal: BatchEstimate,
    pub mean_diagonal: BatchEstimate,
}

pub fn levy_moments(ens: &PathEnsemble) -> Result<LevyMoments> {
    if ens.x0.len() < 2 {
        return Err(Error::InvalidArgument("needs at least two noise components".into()));
    }
    let est = ens.estimate(|p| vec![p.levy[(0, 1)], p.levy[(0, 1)].powi(2), p.levy[(0, 0)]])?;
    Ok(LevyMoments {
        mean_off_diagonal: est[0],
        var_off_diagonal: est[1],
        mean_diagonal: est[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::preset;

    #[test]
    fn mollifier_integrates_to_one() {
        let spec = SdeSpec::new(preset("flat-torus").unwrap()).unwrap();
        let b = 0.2;
        let h = 0.02;
        let mut s = 0.0;
        for i in -100..100 {
            for j in -100..100 {
                s += mollifier(&spec, &[i as f64 * h, j as f64 * h], &[0.0, 0.0], b) * h * h;
            }
        }
        assert!((s - 1.0).abs() < 1e-9);
        // the nearest periodic image is used
        let a = mollifier(&spec, &[2.0 * std::f64::consts::PI - 0.01, 0.0], &[0.0, 0.0], b);
        assert!((a - mollifier(&spec, &[-0.01, 0.0], &[0.0, 0.0], b)).abs() < 1e-12);
    }

    #[test]
    fn flat_kernel_is_gaussian() {
        let spec = SdeSpec::new(preset("flat-torus").unwrap()).unwrap();
        let opts = SimOptions { steps: 2, ..Default::default() };
        let k = heat_diag_mc(&spec, 0.25, &[1.0, 1.0], 0.1, 20_000, 4, opts).unwrap();
        let exact = 1.0 / (2.0 * std::f64::consts::PI * (0.25 + 0.01));
        assert!((k.scalar.mean - exact).abs() < 4.0 * k.scalar.stderr, "{:?}", k.scalar);
        assert_eq!(k.supertrace.mean, 0.0);
        assert_eq!(k.batches, 32);
    }
}
