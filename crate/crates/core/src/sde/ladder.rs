//! Sampled supertrace ladder from Lévy areas and curvature at a point.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::paths::{column_estimates, path_increments, MIN_BATCHES};
use crate::bundle::twist_curvature_operator;
use crate::cliff::{CurvatureArray, DoubleCliffordRep};
use crate::stats::{batch_ranges, BatchEstimate};
use crate::{Error, Result};

/// Curvature data entering the leading-order ladder.
#[derive(Debug, Clone)]
pub struct LadderInput {
    /// Curvature of the 3B connection, driving the spinor factor.
    pub r_three_b: CurvatureArray,
    /// Curvature of the full connection, driving the dual factor.
    pub r: CurvatureArray,
    /// Levi-Civita scalar curvature.
    pub scalar: f64,
}

impl LadderInput {
    /// Torsion-free data, `R^{3B} = R`.
    pub fn torsion_free(r: CurvatureArray, scalar: f64) -> Self {
        LadderInput {
            r_three_b: r.clone(),
            r,
            scalar,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LadderLevel {
    pub order: usize,
    /// `Str(A_m) / ε^{2m}`.
    pub normalized: BatchEstimate,
}

#[derive(Debug, Clone)]
pub struct LadderMcReport {
    pub eps: f64,
    pub n: usize,
    pub levels: Vec<LadderLevel>,
    pub pfaffian: f64,
}

impl LadderMcReport {
    /// Largest `|Str(A_m)| / ε^{2m}` below the top order.
    pub fn lower_max(&self) -> f64 {
        let l = self.levels.len();
        self.levels[..l - 1].iter().map(|v| v.normalized.mean.abs()).fold(0.0, f64::max)
    }

    pub fn top(&self) -> BatchEstimate {
        self.levels.last().expect("at least one level").normalized
    }
}

/// `⅛ Σ R_{mkij} L_{km} g_i g_j` with `R_{mkij} = r(m, k, j, i)`.
fn area_operator(r: &CurvatureArray, levy: &DMatrix<f64>, gens: &[DMatrix<f64>]) -> DMatrix<f64> {
    let d = r.dim();
    let n = gens[0].nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let mut coef = 0.0;
            for m in 0..d {
                for k in 0..d {
                    coef += r.get(m, k, j, i) * levy[(k, m)];
                }
            }
            if coef != 0.0 {
                out += &gens[i] * &gens[j] * (0.125 * coef);
            }
        }
    }
    out
}

/// Supertraces of the iterated integrals `A_m`, `m = 1..=d/2`, built from
/// `C̃(t) = C¹(t) + C²(t) - (t/2) C(0)` on sampled Brownian paths.
pub fn ladder_check_mc(input: &LadderInput, eps: f64, n: usize, steps: usize, seed: u64, batches: usize) -> Result<LadderMcReport> {
    let d = input.r.dim();
    if input.r_three_b.dim() != d {
        return Err(Error::DimMismatch(input.r_three_b.dim(), d));
    }
    if batches < MIN_BATCHES {
        return Err(Error::TooFewBatches(batches));
    }
    if steps == 0 || n == 0 {
        return Err(Error::InvalidArgument("need at least one step and one path".into()));
    }
    let rep = DoubleCliffordRep::new(d)?;
    let l = d / 2;
    let size = rep.size();
    let left: Vec<DMatrix<f64>> = (0..d).map(|i| rep.c(i).clone()).collect();
    // dual generators i c*_a; products pick up i² = -1
    let dual: Vec<DMatrix<f64>> = (0..d).map(|i| rep.c_star(i).clone()).collect();
    let c0 = twist_curvature_operator(&rep, &input.r) + DMatrix::identity(size, size) * (0.25 * input.scalar);
    let h = 1.0 / steps as f64;

    let rows = (0..n)
        .into_par_iter()
        .map(|k| {
            let dw = path_increments(seed, k as u64, steps, d, h);
            let mut w = vec![0.0; d];
            let mut levy = DMatrix::<f64>::zeros(d, d);
            let mut c_prev = DMatrix::<f64>::zeros(size, size);
            // iterated[m] = ∫ iterated[m-1] ∘ dC̃
            let mut iterated: Vec<DMatrix<f64>> = (0..=l)
                .map(|m| if m == 0 { DMatrix::identity(size, size) } else { DMatrix::zeros(size, size) })
                .collect();
            for (s, inc) in dw.chunks(d).enumerate() {
                for a in 0..d {
                    let mid = w[a] + 0.5 * inc[a];
                    for b in 0..d {
                        levy[(a, b)] += mid * inc[b];
                    }
                }
                for a in 0..d {
                    w[a] += inc[a];
                }
                let t = (s + 1) as f64 * h;
                let c_next = area_operator(&input.r_three_b, &levy, &left) - area_operator(&input.r, &levy, &dual)
                    - &c0 * (0.5 * t);
                let dc = &c_next - &c_prev;
                let mut prev_old = iterated[0].clone();
                for m in 1..=l {
                    let old = iterated[m].clone();
                    let avg = (&prev_old + &iterated[m - 1]) * 0.5;
                    iterated[m] += avg * &dc;
                    prev_old = old;
                }
                c_prev = c_next;
            }
            let scale = |m: usize| eps.powi(2 * m as i32);
            (1..=l)
                .map(|m| rep.supertrace(&(&iterated[m] * scale(m))) / scale(m))
                .collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>();
    let table: Vec<Vec<f64>> = batch_ranges(n, batches)
        .into_iter()
        .filter(|r| !r.is_empty())
        .map(|r| {
            let len = r.len() as f64;
            (0..l).map(|c| rows[r.clone()].iter().map(|row| row[c]).sum::<f64>() / len).collect()
        })
        .collect();
    if table.len() < MIN_BATCHES {
        return Err(Error::TooFewBatches(table.len()));
    }
    let levels = column_estimates(&table)
        .into_iter()
        .enumerate()
        .map(|(m, normalized)| LadderLevel { order: m + 1, normalized })
        .collect();
    Ok(LadderMcReport {
        eps,
        n,
        levels,
        pfaffian: input.r.pfaffian_neg()?,
    })
}
