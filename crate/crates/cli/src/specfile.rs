//! Geometry spec files: TOML with the metric and contorsion as expression
//! strings.
//!
//! ```toml
//! name = "conformal-torus"
//! dim = 2
//!
//! [chart]
//! kind = "torus"          # "torus", "box" (with `sides`) or "plane"
//!
//! [metric]
//! g = [["exp(0.6*sin(x1)*cos(x2))", "0"],
//!      ["0", "exp(0.6*sin(x1)*cos(x2))"]]
//!
//! [contorsion]            # optional; K_{cab}, frame indices 1-based
//! "2 1 2" = "1.2*sin(x1)*cos(x2)"
//! "2 2 1" = "-1.2*sin(x1)*cos(x2)"
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use gbc_core::geom::{preset, ChartDomain, ContorsionField, GeometrySpec, MetricField, ZeroContorsion, PRESET_NAMES};
use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

use crate::expr::{parse_expression, Expr};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("validation failed: {0}")]
    Invalid(#[from] gbc_core::Error),
    #[error("`{0}` is neither a preset ({presets}) nor a readable file", presets = PRESET_NAMES.join(", "))]
    UnknownSource(String),
}

fn field_err(field: impl Into<String>, message: impl fmt::Display) -> SpecError {
    SpecError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: Option<String>,
    dim: usize,
    chart: RawChart,
    metric: RawMetric,
    #[serde(default)]
    contorsion: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    kind: String,
    sides: Option<Vec<f64>>,
    radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    g: Vec<Vec<String>>,
}

/// Metric with expression entries and exact symbolic first derivatives.
#[derive(Clone)]
pub struct ExprMetric {
    dim: usize,
    entries: Vec<Expr>,
    derivs: Vec<Vec<Expr>>,
}

impl fmt::Debug for ExprMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExprMetric").field("dim", &self.dim).finish()
    }
}

impl ExprMetric {
    /// `entries` in row-major order.
    pub fn new(dim: usize, entries: Vec<Expr>) -> Self {
        let derivs = (0..dim).map(|k| entries.iter().map(|e| e.diff(k)).collect()).collect();
        ExprMetric { dim, entries, derivs }
    }

    fn matrix(&self, exprs: &[Expr], x: &[f64]) -> DMatrix<f64> {
        // domain errors surface as NaN and are rejected by validation
        DMatrix::from_fn(self.dim, self.dim, |r, c| exprs[r * self.dim + c].eval(x).unwrap_or(f64::NAN))
    }
}

impl MetricField for ExprMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        self.matrix(&self.entries, x)
    }

    fn metric_jet(&self, x: &[f64]) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
        (self.metric(x), self.derivs.iter().map(|d| self.matrix(d, x)).collect())
    }
}

/// Sparse contorsion `K_{cab}` given by expressions.
#[derive(Clone)]
pub struct ExprContorsion {
    dim: usize,
    entries: Vec<(usize, Expr)>,
}

impl fmt::Debug for ExprContorsion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExprContorsion").field("dim", &self.dim).field("entries", &self.entries.len()).finish()
    }
}

impl ContorsionField for ExprContorsion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contorsion(&self, x: &[f64]) -> Vec<f64> {
        let mut k = vec![0.0; self.dim.pow(3)];
        for (idx, e) in &self.entries {
            k[*idx] = e.eval(x).unwrap_or(f64::NAN);
        }
        k
    }
}

fn parse_field(text: &str, dim: usize, field: &str) -> Result<Expr, SpecError> {
    parse_expression(text, dim).map_err(|e| field_err(field, e))
}

fn parse_index(key: &str, dim: usize) -> Result<usize, SpecError> {
    let field = format!("contorsion.\"{key}\"");
    let parts: Vec<usize> = key
        .split_whitespace()
        .map(|p| p.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| field_err(&field, "key must be three 1-based indices \"c a b\""))?;
    if parts.len() != 3 || parts.iter().any(|p| *p == 0 || *p > dim) {
        return Err(field_err(&field, format!("key must be three indices in 1..={dim}")));
    }
    Ok(((parts[0] - 1) * dim + parts[1] - 1) * dim + parts[2] - 1)
}

/// Parses and validates spec-file text.
pub fn parse_spec(text: &str, default_name: &str) -> Result<GeometrySpec, SpecError> {
    let raw: RawSpec = toml::from_str(text)?;
    let d = raw.dim;
    gbc_core::cliff::check_dim(d).map_err(|e| field_err("dim", e))?;
    let chart = match raw.chart.kind.as_str() {
        "torus" => ChartDomain::torus(d),
        "box" => {
            let sides = raw.chart.sides.ok_or_else(|| field_err("chart.sides", "required for kind = \"box\""))?;
            if sides.len() != d {
                return Err(field_err("chart.sides", format!("expected {d} entries, got {}", sides.len())));
            }
            ChartDomain::periodic(sides).map_err(|e| field_err("chart.sides", e))?
        }
        "plane" => ChartDomain::full_space(d, raw.chart.radius.unwrap_or(f64::INFINITY)),
        other => return Err(field_err("chart.kind", format!("unknown kind `{other}`"))),
    };
    if raw.metric.g.len() != d || raw.metric.g.iter().any(|r| r.len() != d) {
        return Err(field_err("metric.g", format!("must be a {d}×{d} array of strings")));
    }
    let mut entries = Vec::with_capacity(d * d);
    for (r, row) in raw.metric.g.iter().enumerate() {
        for (c, text) in row.iter().enumerate() {
            entries.push(parse_field(text, d, &format!("metric.g[{}][{}]", r + 1, c + 1))?);
        }
    }
    let metric = Arc::new(ExprMetric::new(d, entries));
    let contorsion: Arc<dyn ContorsionField> = if raw.contorsion.is_empty() {
        Arc::new(ZeroContorsion(d))
    } else {
        let mut list = Vec::new();
        for (key, text) in &raw.contorsion {
            let idx = parse_index(key, d)?;
            list.push((idx, parse_field(text, d, &format!("contorsion.\"{key}\""))?));
        }
        Arc::new(ExprContorsion { dim: d, entries: list })
    };
    let name = raw.name.unwrap_or_else(|| default_name.to_string());
    let spec = GeometrySpec::new(name, chart, metric, contorsion)?;
    validate_spec(&spec)?;
    Ok(spec)
}

/// Symmetry, positive-definiteness, finiteness and contorsion skewness on a
/// sample lattice.
pub fn validate_spec(spec: &GeometrySpec) -> Result<(), SpecError> {
    let d = spec.dim();
    let per_axis = if d <= 2 { 7 } else { 3 };
    for x in spec.chart.sample_points(per_axis) {
        let (g, dg) = spec.metric.metric_jet(&x);
        if g.iter().chain(dg.iter().flat_map(|m| m.iter())).any(|v| !v.is_finite()) {
            return Err(field_err("metric.g", format!("not finite or not differentiable at {x:?}")));
        }
        if spec.contorsion.contorsion(&x).iter().any(|v| !v.is_finite()) {
            return Err(field_err("contorsion", format!("not finite at {x:?}")));
        }
    }
    spec.validate(per_axis).map_err(|e| match e {
        gbc_core::Error::NotSymmetric { .. } | gbc_core::Error::NotPositiveDefinite(_) => field_err("metric.g", e),
        gbc_core::Error::NotSkew(_) => field_err("contorsion", format!("{e}; K_cab must equal -K_cba")),
        other => SpecError::Invalid(other),
    })
}

/// A preset name or a path to a spec file.
pub fn load_geometry(source: &str) -> Result<GeometrySpec, SpecError> {
    if PRESET_NAMES.contains(&source) {
        return Ok(preset(source)?);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(SpecError::UnknownSource(source.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| SpecError::Io {
        path: source.to_string(),
        source: e,
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("spec");
    parse_spec(&text, stem)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFORMAL: &str = r#"
        dim = 2
        [chart]
        kind = "torus"
        [metric]
        g = [["exp(0.6*sin(x1)*cos(x2))", "0"], ["0", "exp(0.6*sin(x1)*cos(x2))"]]
    "#;

    #[test]
    fn parses_minimal_spec() {
        let spec = parse_spec(CONFORMAL, "c").unwrap();
        assert_eq!(spec.name, "c");
        assert!(spec.contorsion.is_zero());
        let x = [0.4, 1.1];
        let (_, dg) = spec.metric.metric_jet(&x);
        let g = (0.6 * x[0].sin() * x[1].cos()).exp();
        assert!((dg[0][(0, 0)] - g * 0.6 * x[0].cos() * x[1].cos()).abs() < 1e-14);
        assert_eq!(dg[1][(0, 1)], 0.0);
    }

    #[test]
    fn field_level_errors() {
        let bad = CONFORMAL.replace("\"0\"], [\"0\"", "\"x1\"], [\"0\"");
        let e = parse_spec(&bad, "c").unwrap_err().to_string();
        assert!(e.starts_with("metric.g"), "{e}");
        let bad = CONFORMAL.replace("cos(x2))\", \"0\"]", "cos(x3))\", \"0\"]");
        let e = parse_spec(&bad, "c").unwrap_err().to_string();
        assert!(e.contains("metric.g[1][1]") && e.contains("x3"), "{e}");
        let bad = format!("{CONFORMAL}\n[contorsion]\n\"1 1 2\" = \"0.5\"\n");
        let e = parse_spec(&bad, "c").unwrap_err().to_string();
        assert!(e.starts_with("contorsion"), "{e}");
        let bad = format!("{CONFORMAL}\n[contorsion]\n\"1 1 3\" = \"0.5\"\n");
        assert!(parse_spec(&bad, "c").is_err());
        let bad = CONFORMAL.replace("\"torus\"", "\"klein\"");
        assert!(parse_spec(&bad, "c").unwrap_err().to_string().starts_with("chart.kind"));
        let bad = CONFORMAL.replace("exp(0.6*sin(x1)*cos(x2))\", \"0\"]", "-1\", \"0\"]");
        assert!(parse_spec(&bad, "c").is_err());
    }

    #[test]
    fn unknown_source() {
        assert!(matches!(load_geometry("no-such-thing"), Err(SpecError::UnknownSource(_))));
        assert_eq!(load_geometry("flat-torus").unwrap().name, "flat-torus");
    }
}
