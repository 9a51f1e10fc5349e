//! Command-line surface and run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Environment variable overriding the hodge memory cap, in fiber values.
pub const MEMORY_CAP_ENV: &str = "GBC_MEMORY_CAP";

#[derive(Debug, Clone, Parser)]
#[command(
    name = "gbc",
    version,
    about = "Local Gauss-Bonnet-Chern checks for metric connections with torsion",
    long_about = "Local Gauss-Bonnet-Chern checks for metric connections with torsion.\n\n\
        Every subcommand writes CSV (to --output or stdout) headed by a `# key = value` echo of its \
        configuration, and ends with `# check` lines.\n\n\
        Exit codes: 0 success, 2 usage error, 3 validation or computation error, 4 tolerance failure.\n\
        The hodge memory cap (fiber values) can be overridden with GBC_MEMORY_CAP."
)]
pub struct Cli {
    /// Worker threads; 1 gives the single-worker reproducibility contract.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    /// Built-in geometry: flat-torus, conformal-torus, stereographic-sphere,
    /// torsion-torus, conformal-4torus.
    #[arg(long, conflicts_with = "spec")]
    pub preset: Option<String>,
    /// TOML geometry spec file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

impl GeometryArgs {
    pub fn source(&self) -> Option<String> {
        self.preset
            .clone()
            .or_else(|| self.spec.as_ref().map(|p| p.display().to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Chirality, supertrace, Pfaffian and ladder invariants on random data.
    VerifyAlgebra {
        /// Dimensions to test.
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        d: Vec<usize>,
        /// Random samples per dimension.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Curvature table: Pf(-R) of the full and Levi-Civita connections,
    /// scalar curvature, Euler densities and compatibility residuals.
    Curvature {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Sample lattice points per axis.
        #[arg(long, default_value_t = 8)]
        points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Euler density map and its integral.
    Euler {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Quadrature and map points per axis.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Allowed distance of the integral from the nearest integer.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Local heat supertrace profile, extrapolated to t = 0 and compared
    /// with the Euler form; optional global McKean-Singer check.
    Heat {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Grid points per axis.
        #[arg(long = "N", default_value_t = 64)]
        n: usize,
        /// Times; the two smallest drive the extrapolation.
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
        t: Vec<f64>,
        /// Number of sample points (a perfect d-th power).
        #[arg(long, default_value_t = 16)]
        points: usize,
        /// Relative tolerance where |Pf(-R)| exceeds the threshold.
        #[arg(long, default_value_t = 0.05)]
        rtol: f64,
        /// Absolute tolerance elsewhere.
        #[arg(long, default_value_t = 0.01)]
        atol: f64,
        #[arg(long, default_value_t = 0.05)]
        curvature_threshold: f64,
        /// Grid for the global supertrace by dense spectra; skipped if absent.
        #[arg(long)]
        global_n: Option<usize>,
        #[arg(long, default_value_t = 1e-5)]
        global_tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Finite-difference residual of the Weitzenböck identity under refinement.
    Weitzenbock {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long = "N", value_delimiter = ',', default_value = "16,32,64")]
        n: Vec<usize>,
        /// Random sample nodes.
        #[arg(long, default_value_t = 6)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        min_slope: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo heat-kernel diagonal at one point.
    Mc {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, default_value_t = 0.1)]
        t: f64,
        /// Target point; defaults to the first chart sample point.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        /// One bandwidth, or two for the b → 0 extrapolation.
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1")]
        bandwidth: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 32)]
        steps: usize,
        #[arg(long, default_value_t = 32)]
        batches: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sign of the drift term, for the contrast experiment.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        drift_sign: f64,
        /// Largest acceptable excluded-path fraction.
        #[arg(long, default_value_t = 1e-3)]
        max_exclusion: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Small-noise orders of the ε-rescaled system with coupled noise.
    Orders {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 32)]
        steps: usize,
        #[arg(long, default_value_t = 32)]
        batches: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1.9)]
        min_slope: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Supertrace ladder: algebraic on random curvature, sampled from Lévy
    /// areas on given curvature data.
    Ladder {
        /// Dimensions for the algebraic check.
        #[arg(long, value_delimiter = ',', default_value = "2,4")]
        d: Vec<usize>,
        /// Random curvature arrays per dimension.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Curvature data for the sampled ladder; constant curvature
        /// `R_1212 = kappa` in d = 2 when absent.
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, default_value_t = 32)]
        batches: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Acceptance suite A1-A12, one pass/fail line per criterion.
    All {
        /// Run only these criteria, e.g. A1,A5.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyAlgebra { .. } => "verify-algebra",
            Command::Curvature { .. } => "curvature",
            Command::Euler { .. } => "euler",
            Command::Heat { .. } => "heat",
            Command::Weitzenbock { .. } => "weitzenbock",
            Command::Mc { .. } => "mc",
            Command::Orders { .. } => "orders",
            Command::Ladder { .. } => "ladder",
            Command::All { .. } => "all",
        }
    }

    pub fn output(&self) -> Option<&PathBuf> {
        match self {
            Command::VerifyAlgebra { out, .. }
            | Command::Curvature { out, .. }
            | Command::Euler { out, .. }
            | Command::Heat { out, .. }
            | Command::Weitzenbock { out, .. }
            | Command::Mc { out, .. }
            | Command::Orders { out, .. }
            | Command::Ladder { out, .. }
            | Command::All { out, .. } => out.output.as_ref(),
        }
    }
}

/// A parsed invocation: the command with its knobs, the geometry source and
/// the output path.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub geometry: Option<String>,
    pub output: Option<PathBuf>,
    pub memory_cap: usize,
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("--{name} must be positive, got {v}"))
    }
}

fn increasing_times(ts: &[f64]) -> Result<Vec<f64>, String> {
    let mut t = ts.to_vec();
    for v in &t {
        positive("t", *v)?;
    }
    t.sort_by(f64::total_cmp);
    if t.windows(2).any(|w| w[0] == w[1]) {
        return Err("--t values must be distinct".into());
    }
    Ok(t)
}

impl RunConfig {
    /// Checks every knob before any computation; errors are usage errors.
    pub fn from_command(command: Command) -> Result<Self, String> {
        let memory_cap = match std::env::var(MEMORY_CAP_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|c| *c > 0)
                .ok_or_else(|| format!("{MEMORY_CAP_ENV} must be a positive integer, got `{v}`"))?,
            Err(_) => gbc_core::hodge::DEFAULT_MEMORY_CAP,
        };
        let mut geometry = None;
        let require = |g: &GeometryArgs| g.source().ok_or_else(|| "one of --preset or --spec is required".to_string());
        match &command {
            Command::VerifyAlgebra { d, samples, .. } => {
                check_dims(d, &[2, 4, 6, 8])?;
                if *samples == 0 {
                    return Err("--samples must be at least 1".into());
                }
            }
            Command::Curvature { geometry: g, points, .. } => {
                geometry = Some(require(g)?);
                if *points == 0 {
                    return Err("--points must be at least 1".into());
                }
            }
            Command::Euler { geometry: g, grid, tol, .. } => {
                geometry = Some(require(g)?);
                if *grid < 2 {
                    return Err("--grid must be at least 2".into());
                }
                positive("tol", *tol)?;
            }
            Command::Heat {
                geometry: g,
                n,
                t,
                points,
                rtol,
                atol,
                global_n,
                global_tol,
                ..
            } => {
                geometry = Some(require(g)?);
                if *n < 4 {
                    return Err("--N must be at least 4".into());
                }
                if t.len() < 2 {
                    return Err("--t needs at least two times".into());
                }
                increasing_times(t)?;
                if *points == 0 {
                    return Err("--points must be at least 1".into());
                }
                positive("rtol", *rtol)?;
                positive("atol", *atol)?;
                positive("global-tol", *global_tol)?;
                if matches!(global_n, Some(m) if *m < 4) {
                    return Err("--global-n must be at least 4".into());
                }
            }
            Command::Weitzenbock { geometry: g, n, trials, .. } => {
                geometry = Some(require(g)?);
                if n.len() < 2 || n.iter().any(|v| *v < 8) {
                    return Err("--N needs at least two grid sizes, each at least 8".into());
                }
                if *trials == 0 {
                    return Err("--trials must be at least 1".into());
                }
            }
            Command::Mc {
                geometry: g,
                t,
                bandwidth,
                n,
                steps,
                batches,
                drift_sign,
                max_exclusion,
                ..
            } => {
                geometry = Some(require(g)?);
                positive("t", *t)?;
                if bandwidth.is_empty() || bandwidth.len() > 2 {
                    return Err("--bandwidth takes one or two values".into());
                }
                for b in bandwidth {
                    positive("bandwidth", *b)?;
                }
                if bandwidth.len() == 2 && bandwidth[0] == bandwidth[1] {
                    return Err("--bandwidth values must differ".into());
                }
                check_sampling(*n, *steps, *batches)?;
                if drift_sign.abs() != 1.0 {
                    return Err("--drift-sign must be 1 or -1".into());
                }
                positive("max-exclusion", *max_exclusion)?;
            }
            Command::Orders {
                geometry: g,
                eps,
                n,
                steps,
                batches,
                ..
            } => {
                geometry = Some(require(g)?);
                if eps.len() < 4 {
                    return Err("--eps needs at least four values".into());
                }
                if eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|e| *e <= 0.0) {
                    return Err("--eps must be positive and strictly decreasing".into());
                }
                check_sampling(*n, *steps, *batches)?;
            }
            Command::Ladder {
                d,
                samples,
                geometry: g,
                eps,
                n,
                steps,
                batches,
                ..
            } => {
                check_dims(d, &[2, 4, 6])?;
                if *samples == 0 {
                    return Err("--samples must be at least 1".into());
                }
                geometry = g.source();
                positive("eps", *eps)?;
                check_sampling(*n, *steps, *batches)?;
            }
            Command::All { only, .. } => {
                if let Some(ids) = only {
                    for id in ids {
                        if !crate::suite::CRITERIA.iter().any(|(c, _)| c == id) {
                            return Err(format!("unknown criterion `{id}`"));
                        }
                    }
                }
            }
        }
        Ok(RunConfig {
            output: command.output().cloned(),
            command,
            geometry,
            memory_cap,
        })
    }
}

fn check_dims(d: &[usize], allowed: &[usize]) -> Result<(), String> {
    if d.is_empty() {
        return Err("--d needs at least one dimension".into());
    }
    match d.iter().find(|v| !allowed.contains(v)) {
        Some(v) => Err(format!("--d value {v} not in {allowed:?}")),
        None => Ok(()),
    }
}

fn check_sampling(n: usize, steps: usize, batches: usize) -> Result<(), String> {
    if steps == 0 {
        return Err("--steps must be at least 1".into());
    }
    if batches < gbc_core::sde::MIN_BATCHES {
        return Err(format!("--batches must be at least {}", gbc_core::sde::MIN_BATCHES));
    }
    if n < batches {
        return Err(format!("--n must be at least --batches ({batches})"));
    }
    Ok(())
}

/// Parsed times in increasing order.
pub fn sorted_times(ts: &[f64]) -> Vec<f64> {
    increasing_times(ts).unwrap_or_default()
}
