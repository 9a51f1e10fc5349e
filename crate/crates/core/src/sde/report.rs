//! CSV rows for estimator and order-study output.

use std::fmt::Write as _;

use super::estimators::KernelEstimate;
use super::orders::EpsilonStudy;
use crate::C64;

/// `# key = value` lines echoing a run configuration.
pub fn config_header(config: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in config {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRow {
    pub name: String,
    pub t: f64,
    pub x: Vec<f64>,
    pub value: C64,
    pub stderr: f64,
    pub n: usize,
    pub bandwidth: f64,
    pub seed: u64,
}

pub const ESTIMATOR_HEADER: &str = "name,t,x,value_re,value_im,stderr,n,bandwidth,seed";

impl EstimatorRow {
    pub fn to_csv(&self) -> String {
        let x = self.x.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(" ");
        format!(
            "{},{:.6e},{x},{:.12e},{:.12e},{:.6e},{},{:.6e},{}",
            self.name, self.t, self.value.re, self.value.im, self.stderr, self.n, self.bandwidth, self.seed
        )
    }
}

impl KernelEstimate {
    /// Scalar part and local supertrace as estimator rows.
    pub fn rows(&self, seed: u64) -> Vec<EstimatorRow> {
        let bandwidth = self.bandwidths[0];
        let row = |name: &str, mean: f64, stderr: f64| EstimatorRow {
            name: name.into(),
            t: self.t,
            x: self.target.clone(),
            value: C64::new(mean, 0.0),
            stderr,
            n: self.n,
            bandwidth,
            seed,
        };
        let tag = if self.bandwidths.len() > 1 { "_extrapolated" } else { "" };
        vec![
            row(&format!("heat_diag_scalar{tag}"), self.scalar.mean, self.scalar.stderr),
            row(&format!("str_density{tag}"), self.supertrace.mean, self.supertrace.stderr),
        ]
    }
}

pub const STUDY_HEADER: &str = "quantity,eps,residual,stderr,slope";

impl EpsilonStudy {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let slope = |v: Option<f64>| v.map_or(String::from("nan"), |x| format!("{x:.6}"));
        for (name, est, sl) in [
            ("x", &self.x_residual, self.x_slope),
            ("e_gauge", &self.e_residual, self.e_slope),
            ("e_raw", &self.e_raw, self.e_raw_slope),
        ] {
            for (e, r) in self.eps.iter().zip(est) {
                let _ = writeln!(s, "{name},{e},{:.12e},{:.6e},{}", r.mean, r.stderr, slope(sl));
            }
        }
        s
    }
}
