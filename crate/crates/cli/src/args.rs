use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "akconj", version, about = "Certified finite-stage runs of the shear-conjugation construction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a schedule with certified intervals.
    Schedule(RunArgs),
    /// Re-check a schedule file against the structural inequalities.
    Verify(VerifyArgs),
    /// Simulate one orbit of a stage map and its Birkhoff averages.
    Orbit(OrbitArgs),
    /// Oscillation and orbit-coverage checks for a ladder of tolerances.
    Density(RunArgs),
    /// Means of an observable on the invariant curves of one stage.
    Measure(MeasureArgs),
    /// Dense invariant curves: the limit is not conjugate to a rotation.
    Theorem1(RunArgs),
    /// Harmonic amplitudes: invariant bands of positive measure.
    Theorem2(RunArgs),
    /// Uniform convergence of Birkhoff averages over a family of observables.
    Theorem3(RunArgs),
    /// Summarize a written report.
    Report(ReportArgs),
}

/// Settings shared by every pipeline; flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of stages; theorem3 defaults to 1 because its closing stage outgrows f64 beyond that.
    #[arg(long)]
    pub stages: Option<usize>,
    /// Growth base of the denominators.
    #[arg(long)]
    pub base: Option<u32>,
    /// Amplitude profile: constant:C, harmonic, geometric:FIRST:RATIO or driven:START.
    #[arg(long = "c")]
    pub amplitudes: Option<String>,
    #[arg(long)]
    pub eps_decay: Option<f64>,
    /// Fixed strip half-width; omit for 10^n.
    #[arg(long)]
    pub strip_r: Option<f64>,
    /// Allow denominators beyond the evaluable range.
    #[arg(long)]
    pub literal: bool,
    /// Subdivision constants: literal or profile.
    #[arg(long)]
    pub constants: Option<String>,
    /// Interval rule: direct or rigorous.
    #[arg(long)]
    pub rule: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub family_size: Option<usize>,
    /// Comma-separated density tolerances.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub quadrature_points: Option<u64>,
    #[arg(long)]
    pub orbit_iterates: Option<u64>,
    #[arg(long)]
    pub alpha_samples: Option<u32>,
    #[arg(long)]
    pub bisection_depth: Option<u32>,
    #[arg(long)]
    pub z_grid: Option<usize>,
    #[arg(long)]
    pub sample_points: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated outputs among json, csv, svg.
    #[arg(long, value_delimiter = ',')]
    pub emit: Option<Vec<String>>,
}

impl RunArgs {
    /// Whether any flag changes the growth policy.
    pub fn touches_policy(&self) -> bool {
        self.config.is_some()
            || self.base.is_some()
            || self.amplitudes.is_some()
            || self.eps_decay.is_some()
            || self.strip_r.is_some()
            || self.literal
            || self.constants.is_some()
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Schedule JSON, bare or as written by `schedule`.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Certificate family: theorem1, theorem2 or theorem3.
    #[arg(long)]
    pub variant: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    /// Observable: char:K:L, cos:K:L, sin:K:L or const:V.
    #[arg(long, default_value = "char:0:1")]
    pub observable: String,
    #[arg(long, default_value_t = 10_000)]
    pub iterates: u64,
    #[arg(long, default_value_t = 0.1)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.2)]
    pub y0: f64,
    /// Stage map to iterate; defaults to the last stage.
    #[arg(long)]
    pub stage: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long, default_value = "char:0:1")]
    pub observable: String,
    #[arg(long)]
    pub stage: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
}
