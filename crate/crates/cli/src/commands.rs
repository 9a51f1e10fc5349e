//! Subcommand implementations. Each returns a [`Report`]: CSV text headed by
//! the configuration echo, plus the tolerance checks that decide the exit
//! status.

use std::fmt::Write as _;

use gbc_core::cliff::{
    chirality, ladder_supertrace, pfaffian, pfaffian_berezin, pfaffian_matchings, supertrace_berezin, supertrace_gamma,
    CliffordElement, CurvatureArray, SkewMatrix, SpinorRep,
};
use gbc_core::geom::{
    curvature, euler_characteristic, euler_density, euler_form, frame_curvature, metric_compatibility_residual,
    ConnectionKind, GeometrySpec, PointGeometry,
};
use gbc_core::hodge::{
    assemble_dirac, mckean_singer_spectral, supertrace_profile, weitzenbock_check, Differentiation, Grid, KrylovOptions,
};
use gbc_core::sde::{
    config_header, epsilon_order_study, heat_diag_mc, heat_diag_mc_extrapolated, ladder_check_mc, LadderInput, SdeSpec,
    SimOptions, ESTIMATOR_HEADER, STUDY_HEADER,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{sorted_times, Command, RunConfig};
use crate::specfile::{load_geometry, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Core(#[from] gbc_core::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Output(_) => EXIT_USAGE,
            CliError::Spec(_) | CliError::Core(_) => EXIT_INVALID,
        }
    }
}

/// One tolerance check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    /// `true` when `measured` must reach `limit` rather than stay below it.
    pub at_least: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            limit,
            at_least: false,
        }
    }

    pub fn above(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            limit,
            at_least: true,
        }
    }

    pub fn passed(&self) -> bool {
        if self.at_least {
            self.measured >= self.limit
        } else {
            self.measured < self.limit
        }
    }

    pub fn line(&self) -> String {
        let rel = if self.at_least { ">=" } else { "<" };
        let status = if self.passed() { "PASS" } else { "FAIL" };
        format!("{status} {}: {:.6e} (need {rel} {:.3e})", self.name, self.measured, self.limit)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub text: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Report text followed by `# check` lines.
    pub fn render(&self) -> String {
        let mut s = self.text.clone();
        for c in &self.checks {
            let _ = writeln!(s, "# check {}", c.line());
        }
        s
    }
}

fn list<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn coords(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(",")
}

fn coord_header(d: usize) -> String {
    (1..=d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
}

fn geometry(cfg: &RunConfig) -> Result<GeometrySpec, CliError> {
    let src = cfg
        .geometry
        .as_deref()
        .ok_or_else(|| CliError::Usage("one of --preset or --spec is required".into()))?;
    Ok(load_geometry(src)?)
}

fn point_or_default(spec: &GeometrySpec, x: &Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
    match x {
        Some(p) if p.len() != spec.dim() => Err(CliError::Usage(format!(
            "--x has {} coordinates, geometry has dimension {}",
            p.len(),
            spec.dim()
        ))),
        Some(p) => Ok(p.clone()),
        None => Ok(spec.chart.sample_points(2).remove(0)),
    }
}

/// Runs a validated configuration.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut echo: Vec<(&str, String)> = vec![
        ("command", cfg.command.name().to_string()),
        ("version", env!("CARGO_PKG_VERSION").to_string()),
    ];
    if let Some(g) = &cfg.geometry {
        echo.push(("geometry", g.clone()));
    }
    let mut report = match &cfg.command {
        Command::VerifyAlgebra { d, samples, seed, .. } => {
            echo.extend([("d", list(d)), ("samples", samples.to_string()), ("seed", seed.to_string())]);
            verify_algebra(d, *samples, *seed)?
        }
        Command::Curvature { points, .. } => {
            echo.push(("points", points.to_string()));
            curvature_table(&geometry(cfg)?, *points)?
        }
        Command::Euler { grid, tol, .. } => {
            echo.extend([("grid", grid.to_string()), ("tol", tol.to_string())]);
            euler_map(&geometry(cfg)?, *grid, *tol)?
        }
        Command::Heat {
            n,
            t,
            points,
            rtol,
            atol,
            curvature_threshold,
            global_n,
            global_tol,
            ..
        } => {
            let times = sorted_times(t);
            echo.extend([
                ("N", n.to_string()),
                ("t", list(&times)),
                ("points", points.to_string()),
                ("rtol", rtol.to_string()),
                ("atol", atol.to_string()),
                ("curvature_threshold", curvature_threshold.to_string()),
                ("global_n", global_n.map_or("none".into(), |v| v.to_string())),
                ("global_tol", global_tol.to_string()),
                ("memory_cap", cfg.memory_cap.to_string()),
            ]);
            let tol = LocalTolerance {
                rtol: *rtol,
                atol: *atol,
                threshold: *curvature_threshold,
            };
            heat(&geometry(cfg)?, *n, &times, *points, tol, *global_n, *global_tol, cfg.memory_cap)?
        }
        Command::Weitzenbock {
            n, trials, seed, min_slope, ..
        } => {
            echo.extend([
                ("N", list(n)),
                ("trials", trials.to_string()),
                ("seed", seed.to_string()),
                ("min_slope", min_slope.to_string()),
            ]);
            weitzenbock(&geometry(cfg)?, n, *trials, *seed, *min_slope)?
        }
        Command::Mc {
            t,
            x,
            bandwidth,
            n,
            steps,
            batches,
            seed,
            drift_sign,
            max_exclusion,
            ..
        } => {
            let spec = geometry(cfg)?;
            let x = point_or_default(&spec, x)?;
            echo.extend([
                ("t", t.to_string()),
                ("x", list(&x)),
                ("bandwidth", list(bandwidth)),
                ("n", n.to_string()),
                ("steps", steps.to_string()),
                ("batches", batches.to_string()),
                ("seed", seed.to_string()),
                ("drift_sign", drift_sign.to_string()),
                ("max_exclusion", max_exclusion.to_string()),
            ]);
            let opts = SimOptions {
                steps: *steps,
                batches: *batches,
                ..SimOptions::default()
            };
            mc(spec, *t, &x, bandwidth, *n, *seed, opts, *drift_sign, *max_exclusion)?
        }
        Command::Orders {
            eps,
            x,
            n,
            steps,
            batches,
            seed,
            min_slope,
            ..
        } => {
            let spec = geometry(cfg)?;
            let x = point_or_default(&spec, x)?;
            echo.extend([
                ("eps", list(eps)),
                ("x", list(&x)),
                ("n", n.to_string()),
                ("steps", steps.to_string()),
                ("batches", batches.to_string()),
                ("seed", seed.to_string()),
                ("min_slope", min_slope.to_string()),
            ]);
            let opts = SimOptions {
                steps: *steps,
                batches: *batches,
                ..SimOptions::default()
            };
            orders(spec, &x, eps, *n, *seed, opts, *min_slope)?
        }
        Command::Ladder {
            d,
            samples,
            x,
            kappa,
            eps,
            n,
            steps,
            batches,
            seed,
            ..
        } => {
            echo.extend([
                ("d", list(d)),
                ("samples", samples.to_string()),
                ("eps", eps.to_string()),
                ("n", n.to_string()),
                ("steps", steps.to_string()),
                ("batches", batches.to_string()),
                ("seed", seed.to_string()),
            ]);
            let input = match &cfg.geometry {
                Some(_) => {
                    let spec = geometry(cfg)?;
                    let x = point_or_default(&spec, x)?;
                    echo.push(("x", list(&x)));
                    ladder_input(&spec, &x)?
                }
                None => {
                    echo.push(("kappa", kappa.to_string()));
                    LadderInput::torsion_free(CurvatureArray::constant_block(2, *kappa)?, -2.0 * kappa)
                }
            };
            ladder(d, *samples, &input, *eps, *n, *steps, *seed, *batches)?
        }
        Command::All { only, seed, .. } => {
            echo.extend([
                ("only", only.as_ref().map_or("all".into(), |v| v.join(","))),
                ("seed", seed.to_string()),
            ]);
            crate::suite::suite_report(only.as_deref(), *seed)
        }
    };
    report.text = config_header(&echo) + &report.text;
    Ok(report)
}

/// Chirality square and the two supertrace routes on random elements.
pub fn clifford_checks(d: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let one = CliffordElement::one(d)?;
    let gamma = chirality(d)?;
    let sq = gamma
        .clifford_mul(&gamma)?
        .coeffs()
        .iter()
        .zip(one.coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let rep = SpinorRep::new(d)?;
    let mut st = 0.0f64;
    for _ in 0..samples {
        let a = CliffordElement::random(rng, d)?;
        st = st.max((supertrace_gamma(&rep, &a) - supertrace_berezin(&a)).norm());
    }
    Ok(vec![
        Check::below(format!("chirality squares to one, d={d}"), sq, 1e-10),
        Check::below(format!("supertrace gamma = berezin, d={d}"), st, 1e-10),
    ])
}

/// `Pf² = det` and the Berezin route against the matching sum.
pub fn pfaffian_checks(d: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let (mut det_err, mut route_err) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let a = SkewMatrix::random(rng, d);
        let pf = pfaffian(&a)?;
        let det = a.to_dense().determinant();
        det_err = det_err.max((pf * pf - det).abs() / det.abs().max(f64::MIN_POSITIVE));
        route_err = route_err.max((pfaffian_berezin(&a)? - pfaffian_matchings(&a)?).abs());
    }
    Ok(vec![
        Check::below(format!("pf^2 = det relative, d={d}"), det_err, 1e-8),
        Check::below(format!("berezin pf = matching sum, d={d}"), route_err, 1e-10),
    ])
}

fn verify_algebra(dims: &[usize], samples: usize, seed: u64) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for &d in dims {
        checks.extend(clifford_checks(d, samples, &mut rng)?);
        checks.extend(pfaffian_checks(d, samples, &mut rng)?);
        let (lower, top) = algebraic_ladder(d, samples, &mut rng)?;
        checks.push(Check::below(format!("ladder Str below top order, d={d}"), lower, 1e-10));
        checks.push(Check::below(format!("ladder top order vs Pf(-R) relative, d={d}"), top, 1e-8));
    }
    let mut rows = String::from("invariant,d,samples,measured,limit,status\n");
    for c in &checks {
        let (name, d) = c.name.rsplit_once(", d=").unwrap_or((&c.name, ""));
        let status = if c.passed() { "pass" } else { "fail" };
        let _ = writeln!(rows, "{name},{d},{samples},{:.6e},{:.1e},{status}", c.measured, c.limit);
    }
    Ok(Report { text: rows, checks })
}

fn curvature_table(spec: &GeometrySpec, points: usize) -> Result<Report, CliError> {
    let d = spec.dim();
    let mut s = format!(
        "{},sqrt_det,scalar_lc,pf_full,pf_lc,euler_form,euler_form_lc,compatibility_residual\n",
        coord_header(d)
    );
    let mut compat = 0.0f64;
    for x in spec.chart.sample_points(points) {
        let pt = PointGeometry::new(spec, &x)?;
        let c = curvature(spec, &x)?;
        let r = metric_compatibility_residual(spec, &x)?;
        compat = compat.max(r);
        let ef = euler_form(&c, pt.sqrt_det)?;
        let l = (d / 2) as i32;
        let ef_lc = c.levi_civita.pfaffian_neg()? * pt.sqrt_det / (2.0 * std::f64::consts::PI).powi(l);
        let _ = writeln!(
            s,
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{ef:.12e},{ef_lc:.12e},{r:.3e}",
            coords(&x),
            pt.sqrt_det,
            c.scalar,
            c.full.pfaffian_neg()?,
            c.levi_civita.pfaffian_neg()?
        );
    }
    Ok(Report {
        text: s,
        checks: vec![Check::below("metric compatibility residual", compat, 1e-7)],
    })
}

fn euler_map(spec: &GeometrySpec, grid: usize, tol: f64) -> Result<Report, CliError> {
    let d = spec.dim();
    let mut s = String::new();
    let mut checks = Vec::new();
    match spec.chart.sides() {
        Some(sides) => {
            let chi = euler_characteristic(spec, grid)?;
            let nearest = chi.round();
            let _ = writeln!(s, "# euler_characteristic = {chi:.12e}");
            let _ = writeln!(s, "# nearest_integer = {nearest}");
            checks.push(Check::below("distance of integral from an integer", (chi - nearest).abs(), tol));
            let _ = writeln!(s, "{},euler_form", coord_header(d));
            let total = grid.pow(d as u32);
            for mut k in 0..total {
                let x: Vec<f64> = (0..d)
                    .map(|i| {
                        let j = k % grid;
                        k /= grid;
                        sides[i] * j as f64 / grid as f64
                    })
                    .collect();
                let _ = writeln!(s, "{},{:.12e}", coords(&x), euler_density(spec, &x)?);
            }
        }
        None => {
            let _ = writeln!(s, "# euler_characteristic = n/a (chart is not a periodic box)");
            let _ = writeln!(s, "{},euler_form", coord_header(d));
            for x in spec.chart.sample_points(grid) {
                let _ = writeln!(s, "{},{:.12e}", coords(&x), euler_density(spec, &x)?);
            }
        }
    }
    Ok(Report { text: s, checks })
}

/// Pointwise acceptance rule for the extrapolated local supertrace.
#[derive(Debug, Clone, Copy)]
pub struct LocalTolerance {
    pub rtol: f64,
    pub atol: f64,
    /// `|Pf(-R)|` above which the relative tolerance applies.
    pub threshold: f64,
}

impl LocalTolerance {
    pub fn allowed(&self, curvature: f64, reference: f64) -> f64 {
        if curvature.abs() > self.threshold {
            self.rtol * reference.abs()
        } else {
            self.atol
        }
    }
}

/// Outcome of comparing a local supertrace profile with Euler forms.
#[derive(Debug, Clone)]
pub struct LocalComparison {
    pub csv: String,
    /// `max |ext - ref| / allowed`; at most 1 passes.
    pub worst_ratio: f64,
    /// Smallest `|ext - ref_lc| / allowed` over points whose contorsion
    /// curvature correction reaches 0.1; `None` when no point qualifies.
    pub contrast: Option<f64>,
    pub max_imaginary: f64,
}

/// Local supertrace profile against the Euler form of the full connection
/// and, for torsion, of the Levi-Civita connection.
pub fn local_comparison(
    spec: &GeometrySpec,
    n: usize,
    times: &[f64],
    points: usize,
    tol: LocalTolerance,
    memory_cap: usize,
) -> Result<LocalComparison, CliError> {
    let d = spec.dim();
    let per_axis = (points as f64).powf(1.0 / d as f64).round() as usize;
    if per_axis.pow(d as u32) != points {
        return Err(CliError::Usage(format!("--points {points} is not a perfect {d}-th power")));
    }
    let grid = Grid::new(&spec.chart, n)?;
    let op = assemble_dirac(spec, &grid, Differentiation::Spectral, memory_cap)?;
    let sample = spec.chart.sample_points(per_axis);
    let profile = supertrace_profile(&op, times, &sample, KrylovOptions::default())?;
    let l = (d / 2) as i32;
    let mut reference = Vec::new();
    let mut rows = String::from("point,");
    let _ = writeln!(
        rows,
        "{},curvature_full,curvature_lc,extrapolated,error_estimate,euler_form,euler_form_lc,allowed,status",
        coord_header(d)
    );
    let (mut worst, mut contrast) = (0.0f64, None::<f64>);
    for (p, x) in profile.points.iter().enumerate() {
        let c = curvature(spec, x)?;
        let sqrt_det = PointGeometry::new(spec, x)?.sqrt_det;
        let (pf, pf_lc) = (c.full.pfaffian_neg()?, c.levi_civita.pfaffian_neg()?);
        let ef = euler_form(&c, sqrt_det)?;
        let ef_lc = pf_lc * sqrt_det / (2.0 * std::f64::consts::PI).powi(l);
        reference.push(ef);
        let ext = profile.extrapolated[p];
        let allowed = tol.allowed(pf, ef);
        worst = worst.max((ext - ef).abs() / allowed);
        if !spec.contorsion.is_zero() && (pf - pf_lc).abs() >= 0.1 {
            let r = (ext - ef_lc).abs() / allowed;
            contrast = Some(contrast.map_or(r, |m| m.min(r)));
        }
        let status = if (ext - ef).abs() <= allowed { "pass" } else { "fail" };
        let _ = writeln!(
            rows,
            "{p},{},{pf:.12e},{pf_lc:.12e},{ext:.12e},{:.3e},{ef:.12e},{ef_lc:.12e},{allowed:.3e},{status}",
            coords(x),
            profile.error_estimate[p]
        );
    }
    let csv = profile.to_csv(Some(&reference)) + "\n" + &rows;
    Ok(LocalComparison {
        csv,
        worst_ratio: worst,
        contrast,
        max_imaginary: profile.max_imaginary(),
    })
}

/// Global discrete supertrace at each time, and its spread.
pub fn global_supertrace(spec: &GeometrySpec, n: usize, times: &[f64], memory_cap: usize) -> Result<(Vec<f64>, f64), CliError> {
    let grid = Grid::new(&spec.chart, n)?;
    let op = assemble_dirac(spec, &grid, Differentiation::Spectral, memory_cap)?;
    let s = mckean_singer_spectral(&op, times)?;
    let values: Vec<f64> = s.values.iter().map(|v| v.re).collect();
    let imag = s.values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((values, (hi - lo).max(imag)))
}

#[allow(clippy::too_many_arguments)]
fn heat(
    spec: &GeometrySpec,
    n: usize,
    times: &[f64],
    points: usize,
    tol: LocalTolerance,
    global_n: Option<usize>,
    global_tol: f64,
    memory_cap: usize,
) -> Result<Report, CliError> {
    let cmp = local_comparison(spec, n, times, points, tol, memory_cap)?;
    let mut text = cmp.csv;
    let mut checks = vec![Check::below("worst |extrapolated - euler form| / allowed", cmp.worst_ratio, 1.0 + 1e-12)];
    if let Some(c) = cmp.contrast {
        checks.push(Check::above("min |extrapolated - levi-civita form| / allowed", c, 10.0));
    }
    if let Some(gn) = global_n {
        let (values, spread) = global_supertrace(spec, gn, times, memory_cap)?;
        let _ = writeln!(text, "\nt,global_supertrace");
        for (t, v) in times.iter().zip(&values) {
            let _ = writeln!(text, "{t:.6e},{v:.12e}");
        }
        let worst = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        checks.push(Check::below("max |global supertrace|", worst, global_tol));
        checks.push(Check::below("global supertrace spread over t", spread, global_tol));
    }
    let _ = writeln!(text, "# max_imaginary = {:.3e}", cmp.max_imaginary);
    checks.push(Check::below("max imaginary part of the local supertrace", cmp.max_imaginary, 1e-9));
    Ok(Report { text, checks })
}

fn weitzenbock(spec: &GeometrySpec, ns: &[usize], trials: usize, seed: u64, min_slope: f64) -> Result<Report, CliError> {
    let rep = weitzenbock_check(spec, ns, trials, seed)?;
    let mut s = String::from("N,spacing,residual\n");
    for l in &rep.levels {
        let _ = writeln!(s, "{},{:.6e},{:.6e}", l.points, l.spacing, l.residual);
    }
    let _ = writeln!(s, "# slope = {}", rep.slope.map_or("nan".into(), |v| format!("{v:.4}")));
    let check = if rep.max_residual() < 1e-10 {
        Check::below("residual at rounding level", rep.max_residual(), 1e-10)
    } else {
        Check::above("convergence order", rep.slope.unwrap_or(f64::NAN), min_slope)
    };
    Ok(Report {
        text: s,
        checks: vec![check],
    })
}

#[allow(clippy::too_many_arguments)]
fn mc(
    spec: GeometrySpec,
    t: f64,
    x: &[f64],
    bandwidths: &[f64],
    n: usize,
    seed: u64,
    opts: SimOptions,
    drift_sign: f64,
    max_exclusion: f64,
) -> Result<Report, CliError> {
    let d = spec.dim();
    let flat = is_flat(&spec);
    let sde = SdeSpec::new(spec)?.with_drift_sign(drift_sign);
    let k = if bandwidths.len() == 2 {
        heat_diag_mc_extrapolated(&sde, t, x, (bandwidths[0], bandwidths[1]), n, seed, opts)?
    } else {
        heat_diag_mc(&sde, t, x, bandwidths[0], n, seed, opts)?
    };
    let mut s = format!("{ESTIMATOR_HEADER}\n");
    for r in k.rows(seed) {
        let _ = writeln!(s, "{}", r.to_csv());
    }
    let rate = k.excluded as f64 / n as f64;
    let _ = writeln!(s, "# excluded = {} ({rate:.3e})", k.excluded);
    let _ = writeln!(s, "# batches = {}", k.batches);
    let mut checks = vec![Check::below("excluded path fraction", rate, max_exclusion)];
    if flat {
        // mollified Gaussian (2π(t + b²))^{-d/2}; b → 0 for the extrapolation
        let b2 = if bandwidths.len() == 2 { 0.0 } else { bandwidths[0].powi(2) };
        let exact = (2.0 * std::f64::consts::PI * (t + b2)).powf(-0.5 * d as f64);
        let _ = writeln!(s, "# flat_reference = {exact:.12e}");
        checks.push(Check::below(
            "flat scalar part, stderrs from the Gaussian",
            (k.scalar.mean - exact).abs() / k.scalar.stderr,
            3.0,
        ));
        checks.push(Check::below(
            "flat |supertrace|",
            k.supertrace.mean.abs(),
            3.0 * k.supertrace.stderr + 1e-12,
        ));
    } else {
        let reference = euler_density(&sde.geometry, x)?;
        let _ = writeln!(s, "# euler_form = {reference:.12e}");
    }
    Ok(Report { text: s, checks })
}

/// Flat metric and no contorsion on the sampled lattice.
fn is_flat(spec: &GeometrySpec) -> bool {
    let d = spec.dim();
    spec.contorsion.is_zero()
        && spec.chart.sample_points(3).iter().all(|x| {
            let (g, dg) = spec.metric.metric_jet(x);
            (g - DMatrix::<f64>::identity(d, d)).amax() == 0.0 && dg.iter().all(|m| m.amax() == 0.0)
        })
}

fn orders(spec: GeometrySpec, x: &[f64], eps: &[f64], n: usize, seed: u64, opts: SimOptions, min_slope: f64) -> Result<Report, CliError> {
    let sde = SdeSpec::new(spec)?;
    let study = epsilon_order_study(&sde, x, eps, n, seed, opts)?;
    let mut s = format!("{STUDY_HEADER}\n{}", study.to_csv());
    let _ = writeln!(s, "# excluded = {}", study.excluded);
    let exact = study.x_residual.iter().all(|r| r.mean < 1e-12);
    let checks = if exact {
        vec![Check::below("position residual at rounding level", study.x_residual[0].mean, 1e-12)]
    } else {
        vec![
            Check::above("position residual order", study.x_slope.unwrap_or(f64::NAN), min_slope),
            Check::above("gauge-adjusted frame residual order", study.e_slope.unwrap_or(f64::NAN), min_slope),
        ]
    };
    Ok(Report { text: s, checks })
}

/// Curvature data for the sampled ladder at `x`.
pub fn ladder_input(spec: &GeometrySpec, x: &[f64]) -> Result<LadderInput, CliError> {
    let c = curvature(spec, x)?;
    Ok(LadderInput {
        r_three_b: frame_curvature(spec, x, ConnectionKind::ThreeB)?,
        r: c.full,
        scalar: c.scalar,
    })
}

/// Largest `Str` residual below the top order and largest relative error of
/// the top order against `Pf(-R)` over random arrays.
pub fn algebraic_ladder(d: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64), CliError> {
    let (mut lower, mut top) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let r = CurvatureArray::random(rng, d)?;
        let rep = ladder_supertrace(&r)?;
        lower = lower.max(rep.lower_residual());
        top = top.max((rep.top() - rep.pfaffian).abs() / rep.pfaffian.abs().max(1e-300));
    }
    Ok((lower, top))
}

/// Floor added to the three-stderr band of the sampled ladder: the leading
/// iterated integrals are pathwise exact, so the batch spread can vanish.
pub const LADDER_FLOOR: f64 = 1e-12;

#[allow(clippy::too_many_arguments)]
fn ladder(
    dims: &[usize],
    samples: usize,
    input: &LadderInput,
    eps: f64,
    n: usize,
    steps: usize,
    seed: u64,
    batches: usize,
) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = String::from("route,d,order,value,stderr,pfaffian\n");
    let mut checks = Vec::new();
    for &d in dims {
        let (lower, top) = algebraic_ladder(d, samples, &mut rng)?;
        let _ = writeln!(s, "algebraic_lower_max,{d},,{lower:.6e},,");
        let _ = writeln!(s, "algebraic_top_rel_err,{d},,{top:.6e},,");
        checks.push(Check::below(format!("algebraic Str below top order, d={d}"), lower, 1e-10));
        checks.push(Check::below(format!("algebraic top order vs Pf(-R) relative, d={d}"), top, 1e-8));
    }
    let rep = ladder_check_mc(input, eps, n, steps, seed, batches)?;
    let d = input.r.dim();
    for lvl in &rep.levels {
        let _ = writeln!(
            s,
            "sampled,{d},{},{:.12e},{:.6e},{:.12e}",
            lvl.order, lvl.normalized.mean, lvl.normalized.stderr, rep.pfaffian
        );
    }
    let top = rep.top();
    let band = 3.0 * top.stderr + LADDER_FLOOR * (1.0 + rep.pfaffian.abs());
    checks.push(Check::below(
        format!("sampled top order vs Pf(-R) in 3 stderr, d={d}"),
        (top.mean - rep.pfaffian).abs() / band,
        1.0,
    ));
    for lvl in &rep.levels[..rep.levels.len() - 1] {
        let band = 3.0 * lvl.normalized.stderr + LADDER_FLOOR;
        checks.push(Check::below(
            format!("sampled order {} supertrace vs 0 in 3 stderr, d={d}", lvl.order),
            lvl.normalized.mean.abs() / band,
            1.0,
        ));
    }
    Ok(Report { text: s, checks })
}
