//! Fixtures shared by the benchmarks.

use gbc_core::cliff::{CliffordElement, SkewMatrix};
use gbc_core::geom::preset;
use gbc_core::hodge::{assemble_dirac, Differentiation, Grid, HeatOperator, DEFAULT_MEMORY_CAP};
use gbc_core::sde::SdeSpec;
use gbc_core::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn clifford_pair(d: usize) -> (CliffordElement, CliffordElement) {
    let mut r = rng(1);
    (CliffordElement::random(&mut r, d).unwrap(), CliffordElement::random(&mut r, d).unwrap())
}

pub fn skew(d: usize) -> SkewMatrix {
    SkewMatrix::random(&mut rng(2), d)
}

/// Spectral operator on an `n`-point grid with a field to apply it to.
pub fn dirac(name: &str, n: usize) -> (HeatOperator, Vec<C64>) {
    let spec = preset(name).unwrap();
    let grid = Grid::new(&spec.chart, n).unwrap();
    let op = assemble_dirac(&spec, &grid, Differentiation::Spectral, DEFAULT_MEMORY_CAP).unwrap();
    let f = (0..op.len()).map(|k| C64::new((k as f64).sin(), (k as f64).cos())).collect();
    (op, f)
}

pub fn sde(name: &str) -> SdeSpec {
    SdeSpec::new(preset(name).unwrap()).unwrap()
}
