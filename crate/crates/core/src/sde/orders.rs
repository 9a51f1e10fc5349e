//! Empirical convergence orders with coupled driving noise.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::coefficients::SdeSpec;
use super::paths::{advance, column_estimates, path_increments, simulate, PathState, SimOptions, MIN_BATCHES};
use crate::linalg::log_log_slope;
use crate::stats::{batch_ranges, BatchEstimate};
use crate::{Error, Result};

/// Small-noise orders of the rescaled system at time 1.
#[derive(Debug, Clone)]
pub struct EpsilonStudy {
    pub geometry: String,
    pub eps: Vec<f64>,
    /// `E|X^ε(1) - x0 - ε σ(x0) w(1)|`.
    pub x_residual: Vec<BatchEstimate>,
    pub x_slope: Option<f64>,
    /// `E‖e^ε(1) g(X^ε(1)) - 1‖` in the gauge `g(X) = 1 - C_j(x0)(X - x0)^j`
    /// that removes the connection at `x0`.
    pub e_residual: Vec<BatchEstimate>,
    pub e_slope: Option<f64>,
    /// `E‖e^ε(1) - 1‖` in the Cholesky frame itself.
    pub e_raw: Vec<BatchEstimate>,
    pub e_raw_slope: Option<f64>,
    pub n: usize,
    pub excluded: usize,
}

fn slope_of(eps: &[f64], est: &[BatchEstimate]) -> Option<f64> {
    log_log_slope(eps, &est.iter().map(|e| e.mean).collect::<Vec<_>>())
}

/// Runs the `ε`-rescaled system for every `ε` on the same Brownian paths.
pub fn epsilon_order_study(spec: &SdeSpec, x0: &[f64], eps: &[f64], n: usize, seed: u64, opts: SimOptions) -> Result<EpsilonStudy> {
    if eps.len() < 4 {
        return Err(Error::InvalidArgument("need at least four ε values".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|e| *e <= 0.0) {
        return Err(Error::InvalidArgument("ε values must be positive and strictly decreasing".into()));
    }
    let d = spec.dim();
    let c0 = spec.coefficients(x0)?;
    let fib = spec.rep().size();
    let ident = DMatrix::<f64>::identity(fib, fib);
    let (mut xr, mut er, mut raw) = (Vec::new(), Vec::new(), Vec::new());
    let mut excluded = 0;
    for &e in eps {
        let o = SimOptions {
            scale: e,
            with_functional: false,
            ..opts
        };
        let ens = simulate(spec, x0, 1.0, n, seed, o)?;
        excluded += ens.excluded;
        let est = ens.estimate(|p| {
            let dx: Vec<f64> = (0..d).map(|i| p.x[i] - x0[i]).collect();
            let lin: f64 = (0..d)
                .map(|i| {
                    let v = dx[i] - e * (0..d).map(|k| c0.sigma[(i, k)] * p.w[k]).sum::<f64>();
                    v * v
                })
                .sum::<f64>()
                .sqrt();
            let mut gauge = ident.clone();
            for (c, v) in c0.connection.iter().zip(&dx) {
                gauge -= c * *v;
            }
            let ge = (&p.e * gauge - &ident).norm();
            vec![lin, ge, (&p.e - &ident).norm()]
        })?;
        xr.push(est[0]);
        er.push(est[1]);
        raw.push(est[2]);
    }
    Ok(EpsilonStudy {
        geometry: spec.geometry.name.clone(),
        eps: eps.to_vec(),
        x_slope: slope_of(eps, &xr),
        e_slope: slope_of(eps, &er),
        e_raw_slope: slope_of(eps, &raw),
        x_residual: xr,
        e_residual: er,
        e_raw: raw,
        n,
        excluded,
    })
}

/// Strong error of `X(t)` under step refinement on fixed noise.
#[derive(Debug, Clone)]
pub struct StrongOrderReport {
    pub steps: Vec<usize>,
    pub reference_steps: usize,
    pub errors: Vec<BatchEstimate>,
    /// Slope of error against step size.
    pub slope: Option<f64>,
}

/// `E|X_h(t) - X_ref(t)|` for each step count, the coarse increments being
/// sums of the reference increments.
pub fn strong_order_study(
    spec: &SdeSpec,
    x0: &[f64],
    t: f64,
    steps: &[usize],
    reference_steps: usize,
    n: usize,
    seed: u64,
    batches: usize,
) -> Result<StrongOrderReport> {
    if steps.iter().any(|s| *s == 0 || !reference_steps.is_multiple_of(*s)) {
        return Err(Error::InvalidArgument("step counts must divide the reference count".into()));
    }
    if batches < MIN_BATCHES {
        return Err(Error::TooFewBatches(batches));
    }
    let d = spec.dim();
    let fib = spec.rep().size();
    let h_ref = t / reference_steps as f64;
    let rows = (0..n)
        .into_par_iter()
        .map(|k| {
            let fine = path_increments(seed, k as u64, reference_steps, d, h_ref);
            let mut reference = PathState::start(x0, fib, false);
            advance(spec, &mut reference, &fine, h_ref, 1.0)?;
            steps
                .iter()
                .map(|&s| {
                    let r = reference_steps / s;
                    let mut coarse = vec![0.0; s * d];
                    for (j, inc) in fine.chunks(d).enumerate() {
                        for i in 0..d {
                            coarse[(j / r) * d + i] += inc[i];
                        }
                    }
                    let mut state = PathState::start(x0, fib, false);
                    advance(spec, &mut state, &coarse, t / s as f64, 1.0)?;
                    Ok(state
                        .x
                        .iter()
                        .zip(&reference.x)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let table: Vec<Vec<f64>> = batch_ranges(n, batches)
        .into_iter()
        .filter(|r| !r.is_empty())
        .map(|r| {
            let len = r.len() as f64;
            (0..steps.len())
                .map(|c| rows[r.clone()].iter().map(|row| row[c]).sum::<f64>() / len)
                .collect()
        })
        .collect();
    if table.len() < MIN_BATCHES {
        return Err(Error::TooFewBatches(table.len()));
    }
    let errors = column_estimates(&table);
    let hs: Vec<f64> = steps.iter().map(|s| t / *s as f64).collect();
    Ok(StrongOrderReport {
        steps: steps.to_vec(),
        reference_steps,
        slope: log_log_slope(&hs, &errors.iter().map(|e| e.mean).collect::<Vec<_>>()),
        errors,
    })
}

/// Mean displacement rate against the first-order prediction `±½ b(x0)`.
#[derive(Debug, Clone)]
pub struct DriftMoment {
    /// `E[X(t) - x0 - σ(x0) w(t)] / t`; the subtracted term has mean zero.
    pub rate: Vec<BatchEstimate>,
    pub expected: Vec<f64>,
}

pub fn drift_moment(spec: &SdeSpec, x0: &[f64], t: f64, n: usize, seed: u64, opts: SimOptions) -> Result<DriftMoment> {
    let d = spec.dim();
    let sigma = spec.sigma(x0)?;
    let o = SimOptions {
        with_functional: false,
        ..opts
    };
    let ens = simulate(spec, x0, t, n, seed, o)?;
    let rate = ens.estimate(|p| {
        (0..d)
            .map(|i| (p.x[i] - x0[i] - (0..d).map(|k| sigma[(i, k)] * p.w[k]).sum::<f64>()) / t)
            .collect()
    })?;
    let b = spec.drift_b(x0)?;
    Ok(DriftMoment {
        rate,
        expected: b.iter().map(|v| 0.5 * spec.drift_sign * v).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::preset;

    #[test]
    fn flat_residuals_vanish() {
        let spec = SdeSpec::new(preset("flat-torus").unwrap()).unwrap();
        let opts = SimOptions { steps: 4, ..Default::default() };
        let s = epsilon_order_study(&spec, &[0.1, 0.2], &[0.4, 0.2, 0.1, 0.05], 64, 1, opts).unwrap();
        assert!(s.x_residual.iter().all(|e| e.mean < 1e-15));
        assert!(s.e_raw.iter().all(|e| e.mean == 0.0));
    }

    #[test]
    fn rejects_bad_eps_lists() {
        let spec = SdeSpec::new(preset("flat-torus").unwrap()).unwrap();
        let o = SimOptions::default();
        assert!(epsilon_order_study(&spec, &[0.0, 0.0], &[0.4, 0.2, 0.1], 16, 1, o).is_err());
        assert!(epsilon_order_study(&spec, &[0.0, 0.0], &[0.4, 0.2, 0.3, 0.1], 16, 1, o).is_err());
    }

    #[test]
    fn conformal_drift_matches_first_order() {
        let spec = SdeSpec::new(preset("conformal-torus").unwrap()).unwrap();
        let x0 = [0.9, 0.4];
        let opts = SimOptions { steps: 8, ..Default::default() };
        let m = drift_moment(&spec, &x0, 0.01, 4000, 3, opts).unwrap();
        for (r, e) in m.rate.iter().zip(&m.expected) {
            assert!((r.mean - e).abs() < 3.0 * r.stderr + 0.05 * e.abs().max(0.1), "{r:?} vs {e}");
        }
    }
}
