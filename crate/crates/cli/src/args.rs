use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use hcflow_core::flow::{FlowConfig, Integrator};
use hcflow_core::tensor::DEFAULT_REL_TOL;

#[derive(Parser, Debug)]
#[command(name = "hcflow", version, about = "Hermitian curvature flow on complex Lie brackets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate a bracket flow and write `trace.csv` and `summary.txt`.
    Flow(FlowArgs),
    /// Almost-abelian tools: matrix flow, soliton classification and the
    /// canonical nilpotent soliton of a Jordan type.
    Aa(AaArgs),
    /// Run a built-in verification suite.
    Verify(VerifyArgs),
    /// List the bundled examples, or print one in file format.
    Examples {
        /// Example to print; bracket names are tried before matrix names.
        name: Option<String>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Integration {
    /// Final time.
    #[arg(long, value_name = "R")]
    pub t_end: Option<f64>,
    /// Fixed RK4 step; output is then byte-reproducible.
    #[arg(long, value_name = "R", conflicts_with = "tol")]
    pub step: Option<f64>,
    /// Absolute and relative tolerance of the adaptive integrator.
    #[arg(long, value_name = "R")]
    pub tol: Option<f64>,
    /// Time between recorded samples.
    #[arg(long, value_name = "R")]
    pub record_stride: Option<f64>,
    /// Field-norm threshold for fixed-point detection.
    #[arg(long, value_name = "R", default_value_t = 1e-8)]
    pub eps_fix: f64,
    /// Time the field must stay below `--eps-fix`.
    #[arg(long, value_name = "R", default_value_t = 1.0)]
    pub dwell: f64,
    /// Keep integrating after a fixed point is detected.
    #[arg(long)]
    pub no_stop: bool,
    /// Rank tolerance for centre, nilpotency and classification decisions.
    #[arg(long, value_name = "R", default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
}

impl Integration {
    /// Builds a configuration, falling back to `t_end`/`stride` when the
    /// corresponding flag is absent.
    pub fn config(&self, t_end: f64, stride: f64) -> FlowConfig {
        let base = FlowConfig::default();
        let integrator = match (self.step, self.tol) {
            (Some(step), _) => Integrator::Rk4 { step },
            (None, Some(tol)) => Integrator::Adaptive { abs_tol: tol, rel_tol: tol },
            (None, None) => base.integrator,
        };
        FlowConfig {
            integrator,
            t_end: self.t_end.unwrap_or(t_end),
            record_stride: self.record_stride.unwrap_or(stride),
            eps_fix: self.eps_fix,
            dwell: self.dwell,
            stop_at_fixed_point: !self.no_stop,
            rel_tol: self.rel_tol,
            ..base
        }
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["bracket", "matrix", "example"])))]
pub struct FlowArgs {
    /// Bracket file (`dim n` then `i j k re im` lines).
    #[arg(long, value_name = "FILE")]
    pub bracket: Option<PathBuf>,
    /// Matrix file; the flow runs on the almost-abelian bracket it defines.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Named bracket from the example library.
    #[arg(long, value_name = "NAME")]
    pub example: Option<String>,
    /// Normalized flow on the unit sphere.
    #[arg(long)]
    pub normalized: bool,
    /// Gauged flow that keeps the centre fixed. Together with
    /// `--normalized` this selects the centre-split flow.
    #[arg(long)]
    pub gauged: bool,
    /// Normalized centre-split flow, with `phi` recorded.
    #[arg(long, conflicts_with_all = ["normalized", "gauged"])]
    pub split: bool,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub integration: Integration,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["matrix", "example", "jordan_type"])))]
#[command(group(ArgGroup::new("action").required(true).multiple(true).args(["classify", "construct", "flow"])))]
pub struct AaArgs {
    /// Matrix file (`dim n` then rows of `re,im` pairs).
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Named matrix from the example library.
    #[arg(long, value_name = "NAME")]
    pub example: Option<String>,
    /// Jordan type `d0,d1,...`; the input is its canonical soliton.
    #[arg(long, value_name = "d0,d1,...")]
    pub jordan_type: Option<String>,
    /// Decide whether a soliton exists and report a representative.
    #[arg(long)]
    pub classify: bool,
    /// Write the canonical nilpotent soliton to `canonical.txt`.
    #[arg(long)]
    pub construct: bool,
    /// Integrate the matrix flow and write `trace.csv`.
    #[arg(long)]
    pub flow: bool,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub integration: Integration,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    MomentMap,
    GaugeEquivalence,
    PhiMonotonicity,
    Isospectrality,
    Envelope,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").args(["bracket", "matrix", "example"])))]
pub struct VerifyArgs {
    pub suite: Suite,
    /// Check this bracket instead of the sampled ones.
    #[arg(long, value_name = "FILE")]
    pub bracket: Option<PathBuf>,
    /// Check this matrix (isospectrality suite).
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Named example; a matrix name for the isospectrality suite.
    #[arg(long, value_name = "NAME")]
    pub example: Option<String>,
    /// Seed for sampled cases.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    /// Number of sampled cases; each suite has its own default.
    #[arg(long, value_name = "N")]
    pub cases: Option<usize>,
    #[command(flatten)]
    pub integration: Integration,
}
