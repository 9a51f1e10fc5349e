use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::coefficients::SdeSpec;
use crate::stats::{batch_estimate, batch_ranges, BatchEstimate};
use crate::{Error, Result};

/// Minimum number of surviving batches behind any standard error.
pub const MIN_BATCHES: usize = 16;

/// Integration settings shared by all path functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub steps: usize,
    /// Noise scale `ε`: `σ → εσ`, drift and potential `→ ε²·`.
    pub scale: f64,
    /// Integrate the multiplicative functional `M`.
    pub with_functional: bool,
    pub batches: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            steps: 32,
            scale: 1.0,
            with_functional: true,
            batches: 32,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be positive".into()));
        }
        if self.batches < MIN_BATCHES {
            return Err(Error::TooFewBatches(self.batches));
        }
        if !(self.scale > 0.0) {
            return Err(Error::InvalidArgument("noise scale must be positive".into()));
        }
        Ok(())
    }
}

/// `(X, e, M)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub x: Vec<f64>,
    pub e: DMatrix<f64>,
    pub m: Option<DMatrix<f64>>,
}

impl PathState {
    pub fn start(x0: &[f64], fiber: usize, with_functional: bool) -> Self {
        PathState {
            x: x0.to_vec(),
            e: DMatrix::identity(fiber, fiber),
            m: with_functional.then(|| DMatrix::identity(fiber, fiber)),
        }
    }
}

fn contract(conn: &[DMatrix<f64>], v: &[f64]) -> DMatrix<f64> {
    let n = conn[0].nrows();
    let mut out = DMatrix::zeros(n, n);
    for (c, vi) in conn.iter().zip(v) {
        if *vi != 0.0 {
            out += c * *vi;
        }
    }
    out
}

/// One joint Heun step for `(X, e)` with noise increment `dw`, followed by
/// an exponential-midpoint step for `M`. Returns `false` if the midpoint
/// transport is singular.
pub fn heun_step(spec: &SdeSpec, state: &mut PathState, dw: &[f64], h: f64, scale: f64) -> Result<bool> {
    let d = spec.dim();
    let increment = |c: &super::coefficients::LocalCoefficients| -> Vec<f64> {
        (0..d)
            .map(|i| {
                let noise: f64 = (0..d).map(|k| c.sigma[(i, k)] * dw[k]).sum();
                scale * noise + scale * scale * c.drift[i] * h
            })
            .collect()
    };
    let c0 = spec.coefficients(&state.x)?;
    let dx0 = increment(&c0);
    let x_pred: Vec<f64> = state.x.iter().zip(&dx0).map(|(a, b)| a + b).collect();
    let de0 = &state.e * contract(&c0.connection, &dx0);
    let e_pred = &state.e + &de0;

    let c1 = spec.coefficients(&x_pred)?;
    let dx1 = increment(&c1);
    let de1 = &e_pred * contract(&c1.connection, &dx1);
    let x_new: Vec<f64> = (0..d).map(|i| state.x[i] + 0.5 * (dx0[i] + dx1[i])).collect();
    let e_new = &state.e + (de0 + de1) * 0.5;

    if let Some(m) = state.m.as_mut() {
        let x_mid: Vec<f64> = state.x.iter().zip(&x_new).map(|(a, b)| 0.5 * (a + b)).collect();
        let e_mid = (&state.e + &e_new) * 0.5;
        let Some(e_mid_inv) = e_mid.clone().try_inverse() else {
            return Ok(false);
        };
        let pot = spec.potential(&x_mid)?;
        let gen = &e_mid * pot * e_mid_inv * (-0.5 * scale * scale * h);
        *m = &*m * gen.exp();
    }
    state.x = x_new;
    state.e = e_new;
    Ok(true)
}

/// Advances `state` through the consecutive increments `dw` (flat,
/// `steps × d`) with step `h`.
pub fn advance(spec: &SdeSpec, state: &mut PathState, dw: &[f64], h: f64, scale: f64) -> Result<bool> {
    let d = spec.dim();
    for inc in dw.chunks(d) {
        if !heun_step(spec, state, inc, h, scale)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Brownian increments of path `path`: `steps × dim` normals scaled by `√h`,
/// from the ChaCha stream `(seed, path)`.
pub fn path_increments(seed: u64, path: u64, steps: usize, dim: usize, h: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    let s = h.sqrt();
    (0..steps * dim).map(|_| rng.sample::<f64, _>(StandardNormal) * s).collect()
}

/// `w(t)` and the midpoint iterated integrals `L_{km} = ∫ w^k ∘ dw^m`.
pub fn levy_from_increments(dw: &[f64], dim: usize) -> (Vec<f64>, DMatrix<f64>) {
    let mut w = vec![0.0; dim];
    let mut l = DMatrix::zeros(dim, dim);
    for inc in dw.chunks(dim) {
        for k in 0..dim {
            let mid = w[k] + 0.5 * inc[k];
            for m in 0..dim {
                l[(k, m)] += mid * inc[m];
            }
        }
        for k in 0..dim {
            w[k] += inc[k];
        }
    }
    (w, l)
}

/// Terminal data of one sampled path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub x: Vec<f64>,
    pub e: DMatrix<f64>,
    pub m: Option<DMatrix<f64>>,
    /// `w(t)`.
    pub w: Vec<f64>,
    pub levy: DMatrix<f64>,
    /// Condition number of `e(t)`.
    pub cond: f64,
    pub excluded: bool,
}

/// Sampled paths with the data needed to replay their driving noise.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub geometry: String,
    pub x0: Vec<f64>,
    pub t: f64,
    pub seed: u64,
    pub options: SimOptions,
    pub paths: Vec<PathRecord>,
    pub excluded: usize,
}

fn condition_number(e: &DMatrix<f64>) -> f64 {
    let sv = e.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

impl PathEnsemble {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.t / self.options.steps as f64
    }

    /// Driving increments of path `k`, regenerated bit-exactly.
    pub fn increments(&self, k: usize) -> Vec<f64> {
        path_increments(self.seed, k as u64, self.options.steps, self.x0.len(), self.step())
    }

    pub fn exclusion_rate(&self) -> f64 {
        self.excluded as f64 / self.paths.len().max(1) as f64
    }

    /// Batch means of a vector statistic over surviving paths, one row per
    /// batch that kept at least one path.
    pub fn batch_table<F>(&self, f: F) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(&PathRecord) -> Vec<f64>,
    {
        let mut rows = Vec::new();
        for range in batch_ranges(self.paths.len(), self.options.batches) {
            let mut sum: Option<Vec<f64>> = None;
            let mut count = 0usize;
            for p in self.paths[range].iter().filter(|p| !p.excluded) {
                let v = f(p);
                match sum.as_mut() {
                    Some(s) => s.iter_mut().zip(&v).for_each(|(a, b)| *a += b),
                    None => sum = Some(v),
                }
                count += 1;
            }
            if let Some(s) = sum {
                rows.push(s.into_iter().map(|v| v / count as f64).collect());
            }
        }
        if rows.len() < MIN_BATCHES {
            return Err(Error::TooFewBatches(rows.len()));
        }
        Ok(rows)
    }

    /// Componentwise mean and batch standard error of a vector statistic.
    pub fn estimate<F>(&self, f: F) -> Result<Vec<BatchEstimate>>
    where
        F: Fn(&PathRecord) -> Vec<f64>,
    {
        Ok(column_estimates(&self.batch_table(f)?))
    }
}

/// Componentwise [`batch_estimate`] over the rows of a batch table.
pub fn column_estimates(rows: &[Vec<f64>]) -> Vec<BatchEstimate> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|c| batch_estimate(&rows.iter().map(|r| r[c]).collect::<Vec<_>>()))
        .collect()
}

/// Samples `n` paths from `x0` to time `t`.
pub fn simulate(spec: &SdeSpec, x0: &[f64], t: f64, n: usize, seed: u64, opts: SimOptions) -> Result<PathEnsemble> {
    opts.validate()?;
    let d = spec.dim();
    if x0.len() != d {
        return Err(Error::DimMismatch(x0.len(), d));
    }
    if !(t > 0.0) || n == 0 {
        return Err(Error::InvalidArgument("need t > 0 and at least one path".into()));
    }
    let h = t / opts.steps as f64;
    let fiber = spec.rep().size();
    let paths = (0..n)
        .into_par_iter()
        .map(|k| {
            let dw = path_increments(seed, k as u64, opts.steps, d, h);
            let mut state = PathState::start(x0, fiber, opts.with_functional);
            let ok = advance(spec, &mut state, &dw, h, opts.scale)?;
            let (w, levy) = levy_from_increments(&dw, d);
            let finite = state.x.iter().all(|v| v.is_finite())
                && state.e.iter().all(|v| v.is_finite())
                && state.m.as_ref().is_none_or(|m| m.iter().all(|v| v.is_finite()));
            let cond = if finite { condition_number(&state.e) } else { f64::INFINITY };
            Ok(PathRecord {
                x: state.x,
                e: state.e,
                m: state.m,
                w,
                levy,
                cond,
                excluded: !ok || !finite || cond > spec.cond_cap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let excluded = paths.iter().filter(|p| p.excluded).count();
    Ok(PathEnsemble {
        geometry: spec.geometry.name.clone(),
        x0: x0.to_vec(),
        t,
        seed,
        options: opts,
        paths,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::preset;

    #[test]
    fn flat_paths_are_exact() {
        let spec = SdeSpec::new(preset("flat-torus").unwrap()).unwrap();
        let opts = SimOptions { steps: 8, ..Default::default() };
        let ens = simulate(&spec, &[0.5, 1.0], 0.3, 40, 9, opts).unwrap();
        for (k, p) in ens.paths.iter().enumerate() {
            let dw = ens.increments(k);
            let mut x = [0.5, 1.0];
            for inc in dw.chunks(2) {
                x[0] += inc[0];
                x[1] += inc[1];
            }
            assert_eq!(p.x, x.to_vec());
            assert_eq!(p.e, DMatrix::identity(4, 4));
            assert_eq!(p.m.as_ref().unwrap(), &DMatrix::identity(4, 4));
        }
    }

    #[test]
    fn levy_diagonal_is_half_square() {
        let dw = path_increments(3, 0, 50, 2, 0.02);
        let (w, l) = levy_from_increments(&dw, 2);
        for k in 0..2 {
            assert!((l[(k, k)] - 0.5 * w[k] * w[k]).abs() < 1e-13);
        }
        assert!((l[(0, 1)] + l[(1, 0)] - w[0] * w[1]).abs() < 1e-13);
    }

    #[test]
    fn concatenated_noise_matches_one_run() {
        let spec = SdeSpec::new(preset("torsion-torus").unwrap()).unwrap();
        let h = 0.01;
        let dw = path_increments(5, 2, 20, 2, h);
        let x0 = [0.2, 0.4];
        let mut whole = PathState::start(&x0, 4, true);
        advance(&spec, &mut whole, &dw, h, 1.0).unwrap();
        let mut split = PathState::start(&x0, 4, true);
        advance(&spec, &mut split, &dw[..20], h, 1.0).unwrap();
        advance(&spec, &mut split, &dw[20..], h, 1.0).unwrap();
        assert_eq!(whole, split);
    }

    #[test]
    fn streams_do_not_depend_on_thread_count() {
        let spec = SdeSpec::new(preset("conformal-torus").unwrap()).unwrap();
        let opts = SimOptions { steps: 4, with_functional: false, ..Default::default() };
        let a = simulate(&spec, &[0.1, 0.2], 0.1, 64, 11, opts).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate(&spec, &[0.1, 0.2], 0.1, 64, 11, opts).unwrap());
        assert_eq!(a.paths, b.paths);
    }

    #[test]
    fn too_few_batches_is_an_error() {
        let opts = SimOptions { batches: 8, ..Default::default() };
        assert!(matches!(opts.validate(), Err(Error::TooFewBatches(8))));
    }
}
