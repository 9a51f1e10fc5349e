use nalgebra::DMatrix;

use super::grid::{Differentiation, Grid};
use crate::bundle::dirac_connection_term;
use crate::cliff::DoubleCliffordRep;
use crate::geom::{GeometrySpec, PointGeometry};
use crate::linalg::row_major;
use crate::{Error, Result, C64};

/// Default bound on `fiber · nodes` for heat operators.
pub const DEFAULT_MEMORY_CAP: usize = 32_768;

/// Per-node coefficients of the discrete Dirac operator
/// `𝒟f = ½ A^i ∂_i f + ½ w⁻¹ ∂_i(w A^i f) + Z f`, `A^i = e^i_c c(e^c)`,
/// `Z = Σ_c c_c Der(ω(E_c)) - ½ Σ_c div(E_c) c_c`.
#[derive(Debug, Clone)]
pub struct NodeCoefficients {
    pub weight: f64,
    /// `e[(i, c)]`, row-major.
    pub frame: Vec<f64>,
    /// `Z`, row-major `F × F`.
    pub zeroth: Vec<f64>,
}

impl NodeCoefficients {
    pub fn new(rep: &DoubleCliffordRep, spec: &GeometrySpec, x: &[f64]) -> Result<Self> {
        let pt = PointGeometry::new(spec, x)?;
        let mut z = dirac_connection_term(rep, &pt);
        for (c, div) in pt.frame_divergence().into_iter().enumerate() {
            z -= rep.c(c) * (0.5 * div);
        }
        Ok(NodeCoefficients {
            weight: pt.sqrt_det,
            frame: row_major(&pt.frame),
            zeroth: row_major(&z),
        })
    }
}

/// Sparse form of the generators `c(e^c)`: `(c_c g)[r] = sign[c][r] g[r ^ bit]`.
#[derive(Debug, Clone)]
pub struct GeneratorTable {
    sign: Vec<Vec<f64>>,
}

impl GeneratorTable {
    pub fn new(rep: &DoubleCliffordRep) -> Self {
        let n = rep.size();
        let sign = (0..rep.dim())
            .map(|c| (0..n).map(|r| rep.c(c)[(r, r ^ (1 << c))]).collect())
            .collect();
        GeneratorTable { sign }
    }

    /// `out += s · Σ_c coef[c] c_c g`.
    #[inline]
    pub fn apply_acc(&self, coef: &[f64], g: &[C64], s: f64, out: &mut [C64]) {
        for (c, signs) in self.sign.iter().enumerate() {
            let k = coef[c] * s;
            if k == 0.0 {
                continue;
            }
            let bit = 1 << c;
            for (r, o) in out.iter_mut().enumerate() {
                *o += g[r ^ bit] * (signs[r] * k);
            }
        }
    }
}

/// Discrete Hodge-Dirac operator on a periodic grid, with its heat generator
/// `-½ 𝒟²`.
#[derive(Debug, Clone)]
pub struct HeatOperator {
    grid: Grid,
    rep: DoubleCliffordRep,
    table: GeneratorTable,
    scheme: Differentiation,
    nodes: Vec<NodeCoefficients>,
    norm_estimate: f64,
    name: String,
}

impl HeatOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rep(&self) -> &DoubleCliffordRep {
        &self.rep
    }

    pub fn fiber(&self) -> usize {
        self.rep.size()
    }

    pub fn len(&self) -> usize {
        self.grid.nodes() * self.fiber()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scheme(&self) -> Differentiation {
        self.scheme
    }

    pub fn geometry_name(&self) -> &str {
        &self.name
    }

    pub fn weight(&self, node: usize) -> f64 {
        self.nodes[node].weight
    }

    /// Estimate of `‖-½ 𝒟²‖`.
    pub fn norm_estimate(&self) -> f64 {
        self.norm_estimate
    }

    /// `out = 𝒟 f`.
    pub fn apply_dirac(&self, f: &[C64], out: &mut [C64]) {
        let d = self.grid.dim();
        let fib = self.fiber();
        let zero = C64::new(0.0, 0.0);
        let mut deriv = vec![zero; f.len()];
        let mut u = vec![zero; f.len()];
        for (node, nc) in self.nodes.iter().enumerate() {
            let g = &f[node * fib..(node + 1) * fib];
            let o = &mut out[node * fib..(node + 1) * fib];
            for (r, ov) in o.iter_mut().enumerate() {
                let row = &nc.zeroth[r * fib..(r + 1) * fib];
                *ov = row.iter().zip(g).map(|(a, b)| b * *a).sum();
            }
        }
        for i in 0..d {
            self.grid.derivative(self.scheme, f, fib, i, &mut deriv);
            for (node, nc) in self.nodes.iter().enumerate() {
                let coef = &nc.frame[i * d..(i + 1) * d];
                let range = node * fib..(node + 1) * fib;
                self.table.apply_acc(coef, &deriv[range.clone()], 0.5, &mut out[range.clone()]);
                let uu = &mut u[range.clone()];
                uu.iter_mut().for_each(|x| *x = zero);
                self.table.apply_acc(coef, &f[range], nc.weight, uu);
            }
            self.grid.derivative(self.scheme, &u, fib, i, &mut deriv);
            for (node, nc) in self.nodes.iter().enumerate() {
                let s = 0.5 / nc.weight;
                for k in node * fib..(node + 1) * fib {
                    out[k] += deriv[k] * s;
                }
            }
        }
    }

    /// `out = -½ 𝒟² f`.
    pub fn apply_generator(&self, f: &[C64], out: &mut [C64]) {
        let mut mid = vec![C64::new(0.0, 0.0); f.len()];
        self.apply_dirac(f, &mut mid);
        self.apply_dirac(&mid, out);
        for v in out.iter_mut() {
            *v *= -0.5;
        }
    }

    /// Weighted inner product `Σ_x w(x) <f(x), g(x)> h^d`.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        let fib = self.fiber();
        let cell = self.grid.cell_volume();
        self.nodes
            .iter()
            .enumerate()
            .map(|(node, nc)| {
                let s: C64 = (node * fib..(node + 1) * fib).map(|k| f[k].conj() * g[k]).sum();
                s * (nc.weight * cell)
            })
            .sum()
    }

    /// `(-1)^deg` applied nodewise.
    pub fn apply_grading(&self, f: &mut [C64]) {
        let fib = self.fiber();
        let gr = self.rep.grading();
        for (k, v) in f.iter_mut().enumerate() {
            *v *= gr[k % fib];
        }
    }

    fn estimate_norm(&mut self) {
        let n = self.len();
        let mut v: Vec<C64> = (0..n)
            .map(|k| C64::new(((k * 7919) % 1013) as f64 / 1013.0 - 0.5, ((k * 104_729) % 997) as f64 / 997.0 - 0.5))
            .collect();
        let mut w = vec![C64::new(0.0, 0.0); n];
        let mut est = 0.0;
        for _ in 0..25 {
            let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            self.apply_generator(&v, &mut w);
            est = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            std::mem::swap(&mut v, &mut w);
        }
        self.norm_estimate = 1.5 * est;
    }
}

/// Assembles the Dirac operator of `spec` on `grid`, refusing grids with
/// more than `memory_cap` fiber values.
pub fn assemble_dirac(spec: &GeometrySpec, grid: &Grid, scheme: Differentiation, memory_cap: usize) -> Result<HeatOperator> {
    if spec.chart.sides().is_none() {
        return Err(Error::NotPeriodic);
    }
    if grid.dim() != spec.dim() {
        return Err(Error::DimMismatch(grid.dim(), spec.dim()));
    }
    let rep = DoubleCliffordRep::new(spec.dim())?;
    let needed = grid.nodes() * rep.size();
    if needed > memory_cap {
        return Err(Error::MemoryCap { needed, cap: memory_cap });
    }
    let nodes = (0..grid.nodes())
        .map(|node| NodeCoefficients::new(&rep, spec, &grid.coords(node)))
        .collect::<Result<Vec<_>>>()?;
    let mut op = HeatOperator {
        grid: grid.clone(),
        table: GeneratorTable::new(&rep),
        rep,
        scheme,
        nodes,
        norm_estimate: 0.0,
        name: spec.name.clone(),
    };
    op.estimate_norm();
    Ok(op)
}

/// Dense matrix of a linear map on `C^n` given by `apply` (small grids only).
pub fn dense_matrix<F: Fn(&[C64], &mut [C64])>(n: usize, apply: F) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        apply(&e, &mut col);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
        e[j] = C64::new(0.0, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::preset;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    #[test]
    fn flat_square_is_minus_laplacian_on_plane_waves() {
        let spec = preset("flat-torus").unwrap();
        let grid = Grid::new(&spec.chart, 16).unwrap();
        let op = assemble_dirac(&spec, &grid, Differentiation::Spectral, DEFAULT_MEMORY_CAP).unwrap();
        let k = [3.0, -5.0];
        let fib = op.fiber();
        let f: Vec<C64> = (0..op.len())
            .map(|idx| {
                let x = grid.coords(idx / fib);
                let ph = k[0] * x[0] + k[1] * x[1];
                C64::new(ph.cos(), ph.sin()) * (idx % fib + 1) as f64
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); f.len()];
        op.apply_generator(&f, &mut out);
        let lam = -0.5 * (k[0] * k[0] + k[1] * k[1]);
        for (o, v) in out.iter().zip(&f) {
            assert!((o - v * lam).norm() < 1e-10);
        }
    }

    #[test]
    fn dirac_is_odd() {
        let spec = preset("torsion-torus").unwrap();
        let grid = Grid::new(&spec.chart, 8).unwrap();
        let op = assemble_dirac(&spec, &grid, Differentiation::Spectral, DEFAULT_MEMORY_CAP).unwrap();
        let f = random_field(op.len(), 1);
        let mut gf = f.clone();
        op.apply_grading(&mut gf);
        let mut a = vec![C64::new(0.0, 0.0); f.len()];
        let mut b = a.clone();
        op.apply_dirac(&gf, &mut a);
        op.apply_dirac(&f, &mut b);
        op.apply_grading(&mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x + y).norm() < 1e-12);
        }
    }

    #[test]
    fn conformal_is_weighted_self_adjoint() {
        let spec = preset("conformal-torus").unwrap();
        let grid = Grid::new(&spec.chart, 16).unwrap();
        for scheme in [Differentiation::Spectral, Differentiation::Central4] {
            let op = assemble_dirac(&spec, &grid, scheme, DEFAULT_MEMORY_CAP).unwrap();
            let u = random_field(op.len(), 2);
            let v = random_field(op.len(), 3);
            let mut du = vec![C64::new(0.0, 0.0); u.len()];
            let mut dv = du.clone();
            op.apply_dirac(&u, &mut du);
            op.apply_dirac(&v, &mut dv);
            let lhs = op.inner(&u, &dv);
            let rhs = op.inner(&du, &v);
            assert!((lhs - rhs).norm() < 1e-8 * lhs.norm().max(1.0), "{scheme:?}");
        }
    }

    #[test]
    fn memory_cap_is_enforced() {
        let spec = preset("flat-torus").unwrap();
        let grid = Grid::new(&spec.chart, 128).unwrap();
        assert!(matches!(
            assemble_dirac(&spec, &grid, Differentiation::Spectral, DEFAULT_MEMORY_CAP),
            Err(Error::MemoryCap { .. })
        ));
    }
}
