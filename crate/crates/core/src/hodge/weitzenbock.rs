//! Finite-difference check of the Weitzenböck identity
//! `𝒟² = -Δ' - 2 a^k ∇'_k + C` with the twisted connection `∇'`.
//!
//! Both sides are evaluated with 4th-order central differences at a few
//! nodes only, so grids far beyond the heat-operator memory cap stay cheap.

use std::cell::RefCell;
use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::Grid;
use super::operator::{GeneratorTable, NodeCoefficients};
use crate::bundle::{connection_endomorphisms, weitzenbock_potential, BundleConnection};
use crate::cliff::DoubleCliffordRep;
use crate::geom::{GeometrySpec, PointGeometry};
use crate::linalg::{log_log_slope, row_major};
use crate::{Error, Result, C64};

/// Trigonometric test section `Σ_m v_m exp(i k_m · x)`.
#[derive(Debug, Clone)]
pub struct TestSection {
    pub modes: Vec<(Vec<f64>, Vec<C64>)>,
}

impl TestSection {
    /// Random section with `count` modes of wavenumber at most `kmax` per axis.
    pub fn random(rng: &mut impl Rng, dim: usize, fiber: usize, count: usize, kmax: i64) -> Self {
        let modes = (0..count)
            .map(|_| {
                let k = (0..dim).map(|_| rng.random_range(-kmax..=kmax) as f64).collect();
                let v = (0..fiber)
                    .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                (k, v)
            })
            .collect();
        TestSection { modes }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<C64> {
        let fib = self.modes.first().map_or(0, |m| m.1.len());
        let mut out = vec![C64::new(0.0, 0.0); fib];
        for (k, v) in &self.modes {
            let ph: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            let e = C64::new(ph.cos(), ph.sin());
            for (o, c) in out.iter_mut().zip(v) {
                *o += c * e;
            }
        }
        out
    }
}

fn mat_vec(m: &[f64], v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|r| m[r * n..(r + 1) * n].iter().zip(v).map(|(a, b)| b * *a).sum())
        .collect()
}

fn axpy(out: &mut [C64], a: f64, x: &[C64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += v * a;
    }
}

/// Both sides of the identity at grid nodes, with per-node coefficients
/// computed on demand.
struct LocalEvaluator<'a> {
    spec: &'a GeometrySpec,
    grid: &'a Grid,
    rep: &'a DoubleCliffordRep,
    table: GeneratorTable,
    dirac: RefCell<HashMap<usize, NodeCoefficients>>,
    twisted: RefCell<HashMap<usize, Vec<Vec<f64>>>>,
}

const STENCIL: [(i64, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];

impl<'a> LocalEvaluator<'a> {
    fn new(spec: &'a GeometrySpec, grid: &'a Grid, rep: &'a DoubleCliffordRep) -> Self {
        LocalEvaluator {
            spec,
            grid,
            rep,
            table: GeneratorTable::new(rep),
            dirac: RefCell::new(HashMap::new()),
            twisted: RefCell::new(HashMap::new()),
        }
    }

    fn coefficients(&self, node: usize) -> Result<NodeCoefficients> {
        if let Some(c) = self.dirac.borrow().get(&node) {
            return Ok(c.clone());
        }
        let c = NodeCoefficients::new(self.rep, self.spec, &self.grid.coords(node))?;
        self.dirac.borrow_mut().insert(node, c.clone());
        Ok(c)
    }

    fn twisted_connection(&self, node: usize) -> Result<Vec<Vec<f64>>> {
        if let Some(c) = self.twisted.borrow().get(&node) {
            return Ok(c.clone());
        }
        let pt = PointGeometry::new(self.spec, &self.grid.coords(node))?;
        let c: Vec<Vec<f64>> = connection_endomorphisms(self.rep, &pt, BundleConnection::Twisted)?
            .iter()
            .map(row_major)
            .collect();
        self.twisted.borrow_mut().insert(node, c.clone());
        Ok(c)
    }

    /// Central difference `δ_axis u` at `node` for a nodal field `u`.
    fn diff<F>(&self, u: &F, node: usize, axis: usize) -> Result<Vec<C64>>
    where
        F: Fn(usize) -> Result<Vec<C64>>,
    {
        let inv = 1.0 / (12.0 * self.grid.spacing(axis));
        let mut out = vec![C64::new(0.0, 0.0); self.rep.size()];
        for (off, w) in STENCIL {
            axpy(&mut out, w * inv, &u(self.grid.shift(node, axis, off))?);
        }
        Ok(out)
    }

    /// `(𝒟 u)(node)` with the same discretization as the heat operator.
    fn dirac<F>(&self, u: &F, node: usize) -> Result<Vec<C64>>
    where
        F: Fn(usize) -> Result<Vec<C64>>,
    {
        let d = self.grid.dim();
        let fib = self.rep.size();
        let nc = self.coefficients(node)?;
        let mut out = mat_vec(&nc.zeroth, &u(node)?);
        for i in 0..d {
            let du = self.diff(u, node, i)?;
            self.table.apply_acc(&nc.frame[i * d..(i + 1) * d], &du, 0.5, &mut out);
            let weighted = |y: usize| -> Result<Vec<C64>> {
                let c = self.coefficients(y)?;
                let mut v = vec![C64::new(0.0, 0.0); fib];
                self.table.apply_acc(&c.frame[i * d..(i + 1) * d], &u(y)?, c.weight, &mut v);
                Ok(v)
            };
            let dw = self.diff(&weighted, node, i)?;
            axpy(&mut out, 0.5 / nc.weight, &dw);
        }
        Ok(out)
    }

    /// `∇'_j u = δ_j u + C_j u` at `node`.
    fn covariant<F>(&self, u: &F, node: usize, j: usize) -> Result<Vec<C64>>
    where
        F: Fn(usize) -> Result<Vec<C64>>,
    {
        let mut out = self.diff(u, node, j)?;
        let c = self.twisted_connection(node)?;
        let cu = mat_vec(&c[j], &u(node)?);
        axpy(&mut out, 1.0, &cu);
        Ok(out)
    }

    fn lhs<F>(&self, u: &F, node: usize) -> Result<Vec<C64>>
    where
        F: Fn(usize) -> Result<Vec<C64>>,
    {
        let first = |y: usize| self.dirac(u, y);
        self.dirac(&first, node)
    }

    fn rhs<F>(&self, u: &F, node: usize) -> Result<Vec<C64>>
    where
        F: Fn(usize) -> Result<Vec<C64>>,
    {
        let d = self.grid.dim();
        let x = self.grid.coords(node);
        let pt = PointGeometry::new(self.spec, &x)?;
        let pot = weitzenbock_potential(self.rep, self.spec, &x)?;
        let conn = self.twisted_connection(node)?;
        let grads: Vec<Vec<C64>> = (0..d).map(|k| self.covariant(u, node, k)).collect::<Result<_>>()?;
        let mut out = mat_vec(&row_major(&pot.total), &u(node)?);
        for (k, gk) in grads.iter().enumerate() {
            axpy(&mut out, -2.0 * pot.a_coordinate[k], gk);
        }
        for i in 0..d {
            for j in 0..d {
                let gij = pt.g_inv[(i, j)];
                if gij == 0.0 {
                    continue;
                }
                let field = |y: usize| self.covariant(u, y, j);
                let mut second = self.diff(&field, node, i)?;
                axpy(&mut second, 1.0, &mat_vec(&conn[i], &grads[j]));
                for (k, gk) in grads.iter().enumerate() {
                    axpy(&mut second, -pt.christoffel[(k * d + i) * d + j], gk);
                }
                axpy(&mut out, -gij, &second);
            }
        }
        Ok(out)
    }
}

/// Relative residual of the identity on one grid.
#[derive(Debug, Clone)]
pub struct WeitzenbockLevel {
    pub points: usize,
    pub spacing: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct WeitzenbockReport {
    pub geometry: String,
    pub levels: Vec<WeitzenbockLevel>,
    /// Log-log slope of residual against grid spacing.
    pub slope: Option<f64>,
}

impl WeitzenbockReport {
    pub fn max_residual(&self) -> f64 {
        self.levels.iter().map(|l| l.residual).fold(0.0, f64::max)
    }

    /// Slope at least `min`, or every residual at roundoff level.
    pub fn passes(&self, min: f64) -> bool {
        self.max_residual() < 1e-10 || self.slope.is_some_and(|s| s >= min)
    }
}

/// `max |𝒟²f - RHS f| / max |𝒟²f|` over the sections and nodes nearest to
/// `points` on an `n`-point grid.
pub fn weitzenbock_residual(spec: &GeometrySpec, n: usize, points: &[Vec<f64>], sections: &[TestSection]) -> Result<f64> {
    let grid = Grid::new(&spec.chart, n)?;
    let rep = DoubleCliffordRep::new(spec.dim())?;
    let eval = LocalEvaluator::new(spec, &grid, &rep);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for s in sections {
        let u = |y: usize| -> Result<Vec<C64>> { Ok(s.eval(&grid.coords(y))) };
        for x in points {
            let node = grid.nearest_node(x);
            let l = eval.lhs(&u, node)?;
            let r = eval.rhs(&u, node)?;
            for (a, b) in l.iter().zip(&r) {
                num = num.max((a - b).norm());
                den = den.max(a.norm());
            }
        }
    }
    Ok(if den > 0.0 { num / den } else { num })
}

/// Residuals over the grid sizes `ns` at `trials` random nodes shared by
/// every grid, with two random low-mode test sections.
pub fn weitzenbock_check(spec: &GeometrySpec, ns: &[usize], trials: usize, seed: u64) -> Result<WeitzenbockReport> {
    if ns.is_empty() || trials == 0 {
        return Err(Error::InvalidArgument("need at least one grid and one trial".into()));
    }
    let sides = spec.chart.sides().ok_or(Error::NotPeriodic)?.to_vec();
    let d = spec.dim();
    let common = ns.iter().fold(0, |g, &n| gcd(g, n));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..trials)
        .map(|_| {
            (0..d)
                .map(|i| rng.random_range(0..common) as f64 * sides[i] / common as f64)
                .collect()
        })
        .collect();
    let fiber = 1 << d;
    let sections: Vec<TestSection> = (0..2).map(|_| TestSection::random(&mut rng, d, fiber, 3, 1)).collect();
    let mut levels = Vec::with_capacity(ns.len());
    for &n in ns {
        let residual = weitzenbock_residual(spec, n, &points, &sections)?;
        levels.push(WeitzenbockLevel {
            points: n,
            spacing: sides[0] / n as f64,
            residual,
        });
    }
    let h: Vec<f64> = levels.iter().map(|l| l.spacing).collect();
    let r: Vec<f64> = levels.iter().map(|l| l.residual).collect();
    Ok(WeitzenbockReport {
        geometry: spec.name.clone(),
        slope: log_log_slope(&h, &r),
        levels,
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Dense `C` at a point, for inspection.
pub fn weitzenbock_constant(spec: &GeometrySpec, x: &[f64]) -> Result<DMatrix<f64>> {
    let rep = DoubleCliffordRep::new(spec.dim())?;
    Ok(weitzenbock_potential(&rep, spec, x)?.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::preset;

    #[test]
    fn flat_sides_agree_to_roundoff() {
        let spec = preset("flat-torus").unwrap();
        let r = weitzenbock_check(&spec, &[16], 3, 1).unwrap();
        assert!(r.max_residual() < 1e-10, "{r:?}");
    }

    #[test]
    fn conformal_residual_converges() {
        let spec = preset("conformal-torus").unwrap();
        let r = weitzenbock_check(&spec, &[16, 32, 64], 4, 2).unwrap();
        assert!(r.passes(2.0), "{r:?}");
    }

    #[test]
    fn torsion_residual_converges() {
        let spec = preset("torsion-torus").unwrap();
        let r = weitzenbock_check(&spec, &[16, 32, 64], 4, 3).unwrap();
        assert!(r.passes(2.0), "{r:?}");
    }

    #[test]
    fn four_torus_with_three_form_torsion_converges() {
        let spec = preset("conformal-4torus").unwrap();
        let r = weitzenbock_check(&spec, &[8, 12, 16], 2, 4).unwrap();
        assert!(r.passes(2.0), "{r:?}");
    }
}
