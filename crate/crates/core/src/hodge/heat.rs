use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::krylov::{expmv, KrylovOptions, KrylovStats};
use super::operator::HeatOperator;
use crate::{Error, Result, C64};

fn check_times(ts: &[f64]) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::InvalidArgument("empty time list".into()));
    }
    if ts.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidArgument("times must be positive".into()));
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Evolves `v` through the increasing times `ts`, returning the state at
/// each one.
pub fn evolve(op: &HeatOperator, v: &[C64], ts: &[f64], opts: KrylovOptions) -> Result<(Vec<Vec<C64>>, KrylovStats)> {
    check_times(ts)?;
    let apply = |x: &[C64], y: &mut [C64]| op.apply_generator(x, y);
    let mut out = Vec::with_capacity(ts.len());
    let mut cur = v.to_vec();
    let mut prev = 0.0;
    let mut total = KrylovStats::default();
    for &t in ts {
        let (next, stats) = expmv(apply, t - prev, &cur, op.norm_estimate(), opts)?;
        total.steps += stats.steps;
        total.rejected += stats.rejected;
        total.matvecs += stats.matvecs;
        total.error += stats.error;
        out.push(next.clone());
        cur = next;
        prev = t;
    }
    Ok((out, total))
}

/// Kernel diagonal blocks `h(t, x, x)` at the increasing times `ts`, as
/// densities against the Riemannian volume.
pub fn heat_diag_series(op: &HeatOperator, ts: &[f64], node: usize, opts: KrylovOptions) -> Result<Vec<DMatrix<C64>>> {
    let fib = op.fiber();
    let scale = 1.0 / (op.weight(node) * op.grid().cell_volume());
    let mut blocks = vec![DMatrix::<C64>::zeros(fib, fib); ts.len()];
    for alpha in 0..fib {
        let mut v = vec![C64::new(0.0, 0.0); op.len()];
        v[node * fib + alpha] = C64::new(1.0, 0.0);
        let (states, _) = evolve(op, &v, ts, opts)?;
        for (b, s) in blocks.iter_mut().zip(&states) {
            for beta in 0..fib {
                b[(beta, alpha)] = s[node * fib + beta] * scale;
            }
        }
    }
    Ok(blocks)
}

pub fn heat_diag(op: &HeatOperator, t: f64, node: usize, opts: KrylovOptions) -> Result<DMatrix<C64>> {
    Ok(heat_diag_series(op, &[t], node, opts)?.remove(0))
}

/// `Str(h(t, x, x)) √det g`, the local supertrace as a coordinate density.
pub fn str_density(op: &HeatOperator, block: &DMatrix<C64>, node: usize) -> C64 {
    op.rep().supertrace_complex(block) * op.weight(node)
}

/// Two-point extrapolation to `t = 0` under `s(t) = c0 + c1 t`.
pub fn richardson(t1: f64, s1: f64, t2: f64, s2: f64) -> f64 {
    (t2 * s1 - t1 * s2) / (t2 - t1)
}

/// Local supertrace samples and their `t → 0` extrapolation.
#[derive(Debug, Clone)]
pub struct SupertraceProfile {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub nodes: Vec<usize>,
    /// `density[p][k]` at `points[p]`, `times[k]`.
    pub density: Vec<Vec<C64>>,
    pub extrapolated: Vec<f64>,
    /// Spread between the two lowest-order extrapolations, or the distance
    /// to the smallest-time sample when only two times are available.
    pub error_estimate: Vec<f64>,
}

impl SupertraceProfile {
    pub fn max_imaginary(&self) -> f64 {
        self.density
            .iter()
            .flatten()
            .fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// CSV with columns `t, x1..xd, str_density, extrapolated,
    /// reference_euler_form, abs_err`; `t = 0` rows carry the extrapolation.
    pub fn to_csv(&self, reference: Option<&[f64]>) -> String {
        let d = self.points.first().map_or(0, |p| p.len());
        let mut s = String::from("t");
        for i in 1..=d {
            let _ = write!(s, ",x{i}");
        }
        s.push_str(",str_density,extrapolated,reference_euler_form,abs_err\n");
        let coords = |p: &[f64]| p.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(",");
        for (p, x) in self.points.iter().enumerate() {
            let ext = self.extrapolated[p];
            let (r, e) = match reference {
                Some(r) => (format!("{:.12e}", r[p]), format!("{:.6e}", (ext - r[p]).abs())),
                None => (String::new(), String::new()),
            };
            for (k, t) in self.times.iter().enumerate() {
                let _ = writeln!(s, "{t:.6e},{},{:.12e},,{r},", coords(x), self.density[p][k].re);
            }
            let _ = writeln!(s, "0,{},,{ext:.12e},{r},{e}", coords(x));
        }
        s
    }
}

/// Local supertraces at the given points for increasing `times`, with
/// Richardson extrapolation from the two smallest times.
pub fn supertrace_profile(op: &HeatOperator, times: &[f64], points: &[Vec<f64>], opts: KrylovOptions) -> Result<SupertraceProfile> {
    check_times(times)?;
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty point list".into()));
    }
    if times.len() < 2 {
        return Err(Error::InvalidArgument("extrapolation needs at least two times".into()));
    }
    let h2 = (0..op.grid().dim()).map(|i| op.grid().spacing(i)).fold(0.0f64, f64::max).powi(2);
    if times[0] < h2 {
        return Err(Error::InvalidArgument(format!(
            "smallest time {} is below the grid resolution h^2 = {h2:.3e}",
            times[0]
        )));
    }
    let nodes: Vec<usize> = points.iter().map(|x| op.grid().nearest_node(x)).collect();
    let density = nodes
        .par_iter()
        .map(|&node| {
            let blocks = heat_diag_series(op, times, node, opts)?;
            Ok(blocks.iter().map(|b| str_density(op, b, node)).collect())
        })
        .collect::<Result<Vec<Vec<C64>>>>()?;
    let (t1, t2) = (times[0], times[1]);
    let extrapolated: Vec<f64> = density.iter().map(|s| richardson(t1, s[0].re, t2, s[1].re)).collect();
    let error_estimate = density
        .iter()
        .zip(&extrapolated)
        .map(|(s, e)| {
            if times.len() >= 3 {
                (richardson(t2, s[1].re, times[2], s[2].re) - e).abs()
            } else {
                (s[0].re - e).abs()
            }
        })
        .collect();
    Ok(SupertraceProfile {
        times: times.to_vec(),
        points: nodes.iter().map(|&n| op.grid().coords(n)).collect(),
        nodes,
        density,
        extrapolated,
        error_estimate,
    })
}

/// Global discrete supertrace `Σ_x Str(h(t,x,x)) dm` at each increasing
/// time, from the full grading-weighted trace of the heat semigroup.
pub fn mckean_singer_series(op: &HeatOperator, times: &[f64], opts: KrylovOptions) -> Result<Vec<C64>> {
    check_times(times)?;
    let fib = op.fiber();
    let grading = op.rep().grading().to_vec();
    let columns = (0..op.len())
        .into_par_iter()
        .map(|k| {
            let mut v = vec![C64::new(0.0, 0.0); op.len()];
            v[k] = C64::new(1.0, 0.0);
            let (states, _) = evolve(op, &v, times, opts)?;
            Ok(states.iter().map(|s| s[k] * grading[k % fib]).collect::<Vec<C64>>())
        })
        .collect::<Result<Vec<Vec<C64>>>>()?;
    let mut out = vec![C64::new(0.0, 0.0); times.len()];
    for col in &columns {
        for (o, v) in out.iter_mut().zip(col) {
            *o += v;
        }
    }
    Ok(out)
}

pub fn mckean_singer(op: &HeatOperator, t: f64, opts: KrylovOptions) -> Result<C64> {
    Ok(mckean_singer_series(op, &[t], opts)?.remove(0))
}

/// Largest operator size accepted by [`mckean_singer_spectral`].
pub const SPECTRAL_MAX_LEN: usize = 8192;

/// Relative anti-Hermitian part below which a block is treated as Hermitian.
const HERMITIAN_TOL: f64 = 1e-10;

/// Global supertrace from the spectra of the even and odd blocks of the
/// generator.
#[derive(Debug, Clone)]
pub struct SpectralSupertrace {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    /// `max |H - H*| / max |H|` of the weight-symmetrized blocks. Vector
    /// torsion makes `𝒟` non-self-adjoint and this is then of order one.
    pub asymmetry: f64,
    /// Eigenvalues of `-½ 𝒟²` on even and odd sections, sorted by real part.
    pub even: Vec<C64>,
    pub odd: Vec<C64>,
}

fn block_spectrum(h: DMatrix<C64>) -> Result<(Vec<C64>, f64)> {
    let skew = (&h - h.adjoint()).camax() / h.camax().max(f64::MIN_POSITIVE);
    let mut mu: Vec<C64> = if skew < HERMITIAN_TOL {
        let sym = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        sym.symmetric_eigenvalues().iter().map(|v| C64::new(*v, 0.0)).collect()
    } else {
        h.schur()
            .eigenvalues()
            .ok_or_else(|| Error::InvalidArgument("Schur form is not triangular".into()))?
            .iter()
            .copied()
            .collect()
    };
    mu.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok((mu, skew))
}

/// `Σ_even e^{tμ} - Σ_odd e^{tμ}` over the eigenvalues `μ` of `-½ 𝒟²`
/// restricted to each parity, from dense blocks in the basis orthonormal
/// for the weighted inner product.
pub fn mckean_singer_spectral(op: &HeatOperator, times: &[f64]) -> Result<SpectralSupertrace> {
    check_times(times)?;
    let n = op.len();
    if n > SPECTRAL_MAX_LEN {
        return Err(Error::MemoryCap { needed: n, cap: SPECTRAL_MAX_LEN });
    }
    let fib = op.fiber();
    let grading = op.rep().grading();
    let scale: Vec<f64> = (0..n).map(|k| op.weight(k / fib).sqrt()).collect();
    let zero = C64::new(0.0, 0.0);
    let mut asymmetry = 0.0f64;
    let mut spectra = Vec::with_capacity(2);
    for parity in [1.0, -1.0] {
        let idx: Vec<usize> = (0..n).filter(|k| grading[k % fib] == parity).collect();
        let cols: Vec<Vec<C64>> = idx
            .par_iter()
            .map(|&j| {
                let mut e = vec![zero; n];
                e[j] = C64::new(1.0, 0.0);
                let mut col = vec![zero; n];
                op.apply_generator(&e, &mut col);
                idx.iter().map(|&i| col[i] * (scale[i] / scale[j])).collect()
            })
            .collect();
        let m = idx.len();
        let (mu, skew) = block_spectrum(DMatrix::from_fn(m, m, |r, c| cols[c][r]))?;
        asymmetry = asymmetry.max(skew);
        spectra.push(mu);
    }
    let values = times
        .iter()
        .map(|t| {
            let sum = |mu: &[C64]| mu.iter().map(|m| (m * *t).exp()).sum::<C64>();
            sum(&spectra[0]) - sum(&spectra[1])
        })
        .collect();
    let odd = spectra.pop().unwrap_or_default();
    let even = spectra.pop().unwrap_or_default();
    Ok(SpectralSupertrace {
        times: times.to_vec(),
        values,
        asymmetry,
        even,
        odd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::preset;
    use crate::hodge::{assemble_dirac, Differentiation, Grid, DEFAULT_MEMORY_CAP};

    #[test]
    fn flat_diagonal_is_gaussian() {
        let spec = preset("flat-torus").unwrap();
        let grid = Grid::new(&spec.chart, 32).unwrap();
        let op = assemble_dirac(&spec, &grid, Differentiation::Spectral, DEFAULT_MEMORY_CAP).unwrap();
        let t = 0.1;
        let b = heat_diag(&op, t, 5, KrylovOptions::default()).unwrap();
        let expect = 1.0 / (2.0 * std::f64::consts::PI * t);
        for a in 0..4 {
            assert!((b[(a, a)].re - expect).abs() < 1e-5 * expect, "{} vs {expect}", b[(a, a)]);
        }
        assert!(str_density(&op, &b, 5).norm() < 1e-10);
    }

    #[test]
    fn semigroup_split_matches() {
        let spec = preset("torsion-torus").unwrap();
        let grid = Grid::new(&spec.chart, 16).unwrap();
        let op = assemble_dirac(&spec, &grid, Differentiation::Spectral, DEFAULT_MEMORY_CAP).unwrap();
        let opts = KrylovOptions::default();
        let one = heat_diag(&op, 0.2, 7, opts).unwrap();
        let two = heat_diag_series(&op, &[0.1, 0.2], 7, opts).unwrap();
        assert!((&one - &two[1]).camax() < 1e-8 * one.camax());
    }

    #[test]
    fn richardson_removes_linear_term() {
        assert!((richardson(0.05, 1.0 + 0.05 * 3.0, 0.1, 1.0 + 0.1 * 3.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_times() {
        let spec = preset("flat-torus").unwrap();
        let grid = Grid::new(&spec.chart, 8).unwrap();
        let op = assemble_dirac(&spec, &grid, Differentiation::Spectral, DEFAULT_MEMORY_CAP).unwrap();
        let pts = vec![vec![0.0, 0.0]];
        let o = KrylovOptions::default();
        assert!(supertrace_profile(&op, &[0.2, 0.1], &pts, o).is_err());
        assert!(supertrace_profile(&op, &[0.001, 0.1], &pts, o).is_err());
        assert!(supertrace_profile(&op, &[-1.0, 0.1], &pts, o).is_err());
    }

    #[test]
    fn spectral_supertrace_matches_krylov() {
        let times = [0.05, 0.3, 1.0];
        for name in ["conformal-torus", "torsion-torus"] {
            let spec = preset(name).unwrap();
            let grid = Grid::new(&spec.chart, 8).unwrap();
            let op = assemble_dirac(&spec, &grid, Differentiation::Spectral, DEFAULT_MEMORY_CAP).unwrap();
            let s = mckean_singer_spectral(&op, &times).unwrap();
            let k = mckean_singer_series(&op, &times, KrylovOptions::default()).unwrap();
            for (a, b) in s.values.iter().zip(&k) {
                assert!(a.norm() < 1e-9 && (a - b).norm() < 1e-9, "{name}: {a} {b}");
            }
            // spectra pair up between parities
            for a in &s.even {
                let gap = s.odd.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min);
                assert!(gap < 1e-7 * (1.0 + a.norm()), "{name}: {a}");
            }
            assert_eq!(s.asymmetry < 1e-10, name == "conformal-torus", "{}", s.asymmetry);
        }
    }
}
