use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::linalg::central_diff;
use crate::{Error, Result};

/// Coordinate chart on which the fields live.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartKind {
    /// `[0, L_1) × … × [0, L_d)` with periodic identification.
    PeriodicBox { sides: Vec<f64> },
    /// All of `R^d`; fields are Euclidean outside `radius` (infinite when the
    /// chart covers a compact manifold minus a point).
    FullSpace { radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    pub dim: usize,
    pub kind: ChartKind,
}

impl ChartDomain {
    pub fn periodic(sides: Vec<f64>) -> Result<Self> {
        if sides.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("side lengths must be positive".into()));
        }
        Ok(ChartDomain {
            dim: sides.len(),
            kind: ChartKind::PeriodicBox { sides },
        })
    }

    pub fn torus(dim: usize) -> Self {
        ChartDomain {
            dim,
            kind: ChartKind::PeriodicBox {
                sides: vec![2.0 * std::f64::consts::PI; dim],
            },
        }
    }

    pub fn full_space(dim: usize, radius: f64) -> Self {
        ChartDomain {
            dim,
            kind: ChartKind::FullSpace { radius },
        }
    }

    pub fn sides(&self) -> Option<&[f64]> {
        match &self.kind {
            ChartKind::PeriodicBox { sides } => Some(sides),
            ChartKind::FullSpace { .. } => None,
        }
    }

    /// Representative sample points used for validation: a fixed lattice in
    /// the box, or in `[-2, 2]^d` for full-space charts.
    pub fn sample_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let (lo, span): (Vec<f64>, Vec<f64>) = match &self.kind {
            ChartKind::PeriodicBox { sides } => (vec![0.0; self.dim], sides.clone()),
            ChartKind::FullSpace { .. } => (vec![-2.0; self.dim], vec![4.0; self.dim]),
        };
        let total = per_axis.pow(self.dim as u32);
        (0..total)
            .map(|mut k| {
                (0..self.dim)
                    .map(|i| {
                        let j = k % per_axis;
                        k /= per_axis;
                        lo[i] + span[i] * (j as f64 + 0.37) / per_axis as f64
                    })
                    .collect()
            })
            .collect()
    }
}

/// Riemannian metric in chart coordinates.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;

    fn metric(&self, x: &[f64]) -> DMatrix<f64>;

    /// Step for finite-difference derivatives.
    fn fd_step(&self) -> f64 {
        1e-3
    }

    /// `g(x)` and `∂_k g(x)` for `k = 0..d`.
    fn metric_jet(&self, x: &[f64]) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
        let d = self.dim();
        let flat = |p: &[f64]| self.metric(p).as_slice().to_vec();
        let dg = (0..d)
            .map(|k| DMatrix::from_vec(d, d, central_diff(flat, x, k, self.fd_step())))
            .collect();
        (self.metric(x), dg)
    }
}

/// Contorsion `K_{cab}` of a metric-compatible connection, in the orthonormal
/// frame: 1-form index `c`, skew frame indices `(a, b)`, stored as
/// `k[(c * d + a) * d + b]`, with `ω^a_b(E_c) = ω̂^a_b(E_c) + K_{cab}`.
pub trait ContorsionField: Send + Sync {
    fn dim(&self) -> usize;

    fn contorsion(&self, x: &[f64]) -> Vec<f64>;

    fn is_zero(&self) -> bool {
        false
    }
}

/// Scalar field with gradient, `x ↦ (φ, ∇φ)`.
pub type ScalarJet = Arc<dyn Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync>;

/// Block-diagonal conformal metric `⊕_k e^{2φ_k} I` over consecutive index
/// blocks; covers the flat, conformal and stereographic presets with
/// closed-form derivatives.
#[derive(Clone)]
pub struct BlockConformalMetric {
    dim: usize,
    blocks: Vec<(std::ops::Range<usize>, ScalarJet)>,
}

impl BlockConformalMetric {
    pub fn flat(dim: usize) -> Self {
        BlockConformalMetric { dim, blocks: Vec::new() }
    }

    pub fn new(dim: usize, blocks: Vec<(std::ops::Range<usize>, ScalarJet)>) -> Result<Self> {
        for (r, _) in &blocks {
            if r.end > dim || r.is_empty() {
                return Err(Error::InvalidArgument(format!("block {r:?} outside 0..{dim}")));
            }
        }
        Ok(BlockConformalMetric { dim, blocks })
    }

    fn factors(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut phi = vec![0.0; self.dim];
        let mut grad = vec![vec![0.0; self.dim]; self.dim];
        for (r, f) in &self.blocks {
            let (p, gp) = f(x);
            for i in r.clone() {
                phi[i] = p;
                grad[i] = gp.clone();
            }
        }
        (phi, grad)
    }
}

impl fmt::Debug for BlockConformalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ranges: Vec<_> = self.blocks.iter().map(|(r, _)| r.clone()).collect();
        f.debug_struct("BlockConformalMetric")
            .field("dim", &self.dim)
            .field("blocks", &ranges)
            .finish()
    }
}

impl MetricField for BlockConformalMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let (phi, _) = self.factors(x);
        DMatrix::from_fn(self.dim, self.dim, |i, j| if i == j { (2.0 * phi[i]).exp() } else { 0.0 })
    }

    fn metric_jet(&self, x: &[f64]) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
        let d = self.dim;
        let (phi, grad) = self.factors(x);
        let g = DMatrix::from_fn(d, d, |i, j| if i == j { (2.0 * phi[i]).exp() } else { 0.0 });
        let dg = (0..d)
            .map(|k| DMatrix::from_fn(d, d, |i, j| if i == j { 2.0 * grad[i][k] * g[(i, i)] } else { 0.0 }))
            .collect();
        (g, dg)
    }
}

/// Metric given by an arbitrary closure; derivatives by finite differences.
#[derive(Clone)]
pub struct FnMetric {
    dim: usize,
    step: f64,
    f: Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>,
}

impl FnMetric {
    pub fn new(dim: usize, step: f64, f: Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>) -> Self {
        FnMetric { dim, step, f }
    }
}

impl fmt::Debug for FnMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMetric").field("dim", &self.dim).field("step", &self.step).finish()
    }
}

impl MetricField for FnMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        (self.f)(x)
    }

    fn fd_step(&self) -> f64 {
        self.step
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroContorsion(pub usize);

impl ContorsionField for ZeroContorsion {
    fn dim(&self) -> usize {
        self.0
    }

    fn contorsion(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.0.pow(3)]
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Contorsion from a closure returning the `d^3` frame components.
#[derive(Clone)]
pub struct FnContorsion {
    dim: usize,
    f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl FnContorsion {
    pub fn new(dim: usize, f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>) -> Self {
        FnContorsion { dim, f }
    }
}

impl fmt::Debug for FnContorsion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnContorsion").field("dim", &self.dim).finish()
    }
}

impl ContorsionField for FnContorsion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contorsion(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

/// Largest `|K_{cab} + K_{cba}|`.
pub fn contorsion_skew_residual(k: &[f64], d: usize) -> f64 {
    let mut r = 0.0f64;
    for c in 0..d {
        for a in 0..d {
            for b in 0..d {
                r = r.max((k[(c * d + a) * d + b] + k[(c * d + b) * d + a]).abs());
            }
        }
    }
    r
}

/// Chart, metric and contorsion together.
#[derive(Clone)]
pub struct GeometrySpec {
    pub name: String,
    pub chart: ChartDomain,
    pub metric: Arc<dyn MetricField>,
    pub contorsion: Arc<dyn ContorsionField>,
}

impl fmt::Debug for GeometrySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeometrySpec")
            .field("name", &self.name)
            .field("chart", &self.chart)
            .field("torsion_free", &self.contorsion.is_zero())
            .finish()
    }
}

impl GeometrySpec {
    pub fn new(
        name: impl Into<String>,
        chart: ChartDomain,
        metric: Arc<dyn MetricField>,
        contorsion: Arc<dyn ContorsionField>,
    ) -> Result<Self> {
        let d = chart.dim;
        if metric.dim() != d {
            return Err(Error::DimMismatch(metric.dim(), d));
        }
        if contorsion.dim() != d {
            return Err(Error::DimMismatch(contorsion.dim(), d));
        }
        crate::cliff::check_dim(d)?;
        Ok(GeometrySpec {
            name: name.into(),
            chart,
            metric,
            contorsion,
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim
    }

    /// Same metric with the contorsion switched off.
    pub fn levi_civita(&self) -> Self {
        GeometrySpec {
            name: format!("{} (levi-civita)", self.name),
            chart: self.chart.clone(),
            metric: self.metric.clone(),
            contorsion: Arc::new(ZeroContorsion(self.dim())),
        }
    }

    /// Checks symmetry, positive-definiteness and contorsion skewness on a
    /// sample lattice.
    pub fn validate(&self, per_axis: usize) -> Result<()> {
        let d = self.dim();
        for x in self.chart.sample_points(per_axis) {
            let g = self.metric.metric(&x);
            if g.nrows() != d || g.ncols() != d {
                return Err(Error::DimMismatch(g.nrows(), d));
            }
            let residual = (&g - g.transpose()).amax();
            if residual > 1e-12 * (1.0 + g.amax()) {
                return Err(Error::NotSymmetric { point: x, residual });
            }
            if g.clone().cholesky().is_none() {
                return Err(Error::NotPositiveDefinite(x));
            }
            let k = self.contorsion.contorsion(&x);
            if k.len() != d.pow(3) {
                return Err(Error::DimMismatch(k.len(), d.pow(3)));
            }
            let r = contorsion_skew_residual(&k, d);
            if r > 1e-12 {
                return Err(Error::NotSkew(r));
            }
        }
        Ok(())
    }
}
