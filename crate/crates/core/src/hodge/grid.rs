use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::geom::ChartDomain;
use crate::{Error, Result, C64};

/// First-derivative scheme along grid axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Differentiation {
    /// Fourier differentiation with the full-band symbol `ik`,
    /// `k ∈ [-N/2, N/2)`; keeps the Nyquist mode so `D` has no doublers.
    Spectral,
    /// 4th-order central differences.
    Central4,
}

/// Uniform periodic grid, axis 0 varying fastest.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    n: usize,
    sides: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("sides", &self.sides)
            .finish()
    }
}

impl Grid {
    pub fn new(chart: &ChartDomain, n: usize) -> Result<Self> {
        let sides = chart.sides().ok_or(Error::NotPeriodic)?.to_vec();
        if n < 4 {
            return Err(Error::GridTooSmall(n));
        }
        let mut planner = FftPlanner::new();
        Ok(Grid {
            dim: chart.dim,
            n,
            sides,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.sides[axis] / self.n as f64
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|i| self.spacing(i)).product()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow(axis as u32)
    }

    pub fn multi_index(&self, mut node: usize) -> Vec<usize> {
        (0..self.dim)
            .map(|_| {
                let k = node % self.n;
                node /= self.n;
                k
            })
            .collect()
    }

    pub fn node_index(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &k| acc * self.n + k % self.n)
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        self.multi_index(node)
            .iter()
            .enumerate()
            .map(|(i, &k)| k as f64 * self.spacing(i))
            .collect()
    }

    /// Node nearest to `x` (wrapped into the box).
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let idx: Vec<usize> = x
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let k = (v / self.spacing(i)).round() as i64;
                k.rem_euclid(self.n as i64) as usize
            })
            .collect();
        self.node_index(&idx)
    }

    /// Node shifted by `offset` along `axis`, periodically.
    #[inline]
    pub fn shift(&self, node: usize, axis: usize, offset: i64) -> usize {
        let s = self.stride(axis);
        let k = (node / s) % self.n;
        let nk = (k as i64 + offset).rem_euclid(self.n as i64) as usize;
        node + nk * s - k * s
    }

    /// `out = ∂_axis u` for a field with `fiber` components per node,
    /// node-major layout.
    pub fn derivative(&self, scheme: Differentiation, u: &[C64], fiber: usize, axis: usize, out: &mut [C64]) {
        match scheme {
            Differentiation::Central4 => self.central4(u, fiber, axis, out),
            Differentiation::Spectral => self.spectral(u, fiber, axis, out),
        }
    }

    fn central4(&self, u: &[C64], fiber: usize, axis: usize, out: &mut [C64]) {
        let n = self.n;
        let s = self.stride(axis);
        let inv = 1.0 / (12.0 * self.spacing(axis));
        for node in 0..self.nodes() {
            let k = (node / s) % n;
            let base = node - k * s;
            let at = |o: usize| base + ((k + o) % n) * s;
            let (p2, p1, m1, m2) = (at(2), at(1), at(n - 1), at(n - 2));
            for a in 0..fiber {
                out[node * fiber + a] =
                    (-u[p2 * fiber + a] + u[p1 * fiber + a] * 8.0 - u[m1 * fiber + a] * 8.0 + u[m2 * fiber + a]) * inv;
            }
        }
    }

    fn spectral(&self, u: &[C64], fiber: usize, axis: usize, out: &mut [C64]) {
        let n = self.n;
        let s = self.stride(axis);
        let scale = 2.0 * std::f64::consts::PI / self.sides[axis] / n as f64;
        let symbol: Vec<C64> = (0..n)
            .map(|j| {
                let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                C64::new(0.0, k * scale)
            })
            .collect();
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![C64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let lines = self.nodes() / n;
        for l in 0..lines {
            // base node of the l-th line: digits of l with a 0 inserted at `axis`
            let lo = l % s;
            let hi = l / s;
            let base = lo + hi * s * n;
            for a in 0..fiber {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = u[(base + j * s) * fiber + a];
                }
                self.fft.process_with_scratch(&mut line, &mut scratch);
                for (v, m) in line.iter_mut().zip(&symbol) {
                    *v *= m;
                }
                self.ifft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    out[(base + j * s) * fiber + a] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(grid: &Grid, k: &[f64]) -> Vec<C64> {
        (0..grid.nodes())
            .map(|node| {
                let x = grid.coords(node);
                let ph: f64 = x.iter().zip(k).map(|(a, b)| a * b).sum();
                C64::new(ph.cos(), ph.sin())
            })
            .collect()
    }

    #[test]
    fn indexing_round_trips() {
        let g = Grid::new(&ChartDomain::torus(2), 8).unwrap();
        for node in 0..g.nodes() {
            assert_eq!(g.node_index(&g.multi_index(node)), node);
        }
        assert_eq!(g.shift(0, 1, -1), 56);
        assert_eq!(g.nearest_node(&[2.0 * std::f64::consts::PI, 0.0]), 0);
        assert!(Grid::new(&ChartDomain::torus(2), 3).is_err());
        assert!(Grid::new(&ChartDomain::full_space(2, 1.0), 16).is_err());
    }

    #[test]
    fn spectral_is_exact_on_plane_waves_including_nyquist() {
        let g = Grid::new(&ChartDomain::torus(2), 16).unwrap();
        for k in [[3.0, -2.0], [-8.0, 5.0]] {
            let u = wave(&g, &k);
            let mut out = vec![C64::new(0.0, 0.0); u.len()];
            for axis in 0..2 {
                g.derivative(Differentiation::Spectral, &u, 1, axis, &mut out);
                for (o, v) in out.iter().zip(&u) {
                    assert!((o - v * C64::new(0.0, k[axis])).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn central_symbol_is_fourth_order() {
        let g = Grid::new(&ChartDomain::torus(2), 32).unwrap();
        let k = [2.0, 1.0];
        let u = wave(&g, &k);
        let mut out = vec![C64::new(0.0, 0.0); u.len()];
        g.derivative(Differentiation::Central4, &u, 1, 0, &mut out);
        let h = g.spacing(0);
        let th = k[0] * h;
        let symbol = (8.0 * th.sin() - (2.0 * th).sin()) / (6.0 * h);
        for (o, v) in out.iter().zip(&u) {
            assert!((o - v * C64::new(0.0, symbol)).norm() < 1e-12);
        }
        assert!((symbol - k[0]).abs() < 2e-3);
    }
}
