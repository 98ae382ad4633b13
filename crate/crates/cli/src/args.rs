use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use fsm_core::classifier::Thresholds;
use fsm_core::kernels::{KernelParams, OuParams};

#[derive(Parser, Debug)]
#[command(
    name = "fsm",
    version,
    about = "Classify, decompose, simulate and verify self-similar stable mixed moving averages",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Label every x-node as fixed, cyclic, conservative_nonperiodic or dissipative.
    Classify(ClassifyArgs),
    /// Split a kernel along a classification report and check CF-exponent additivity.
    Decompose(DecomposeArgs),
    /// Simulate sample paths.
    Simulate(SimulateArgs),
    /// Check flow axioms, the generation identity, self-similarity and support.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Plain `key = value` file; keys are long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every random quantity of the run.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct KernelArgs {
    /// Registered kernel name.
    #[arg(long)]
    pub kernel: String,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub hurst: f64,
    /// Coefficient of the positive half-line (mixed-lfsm).
    #[arg(long, default_value_t = 1.0)]
    pub f1: f64,
    /// Coefficient of the negative half-line (mixed-lfsm).
    #[arg(long, default_value_t = 2.0)]
    pub f2: f64,
    /// Use the logarithmic mixed-lfsm branch regardless of kappa.
    #[arg(long)]
    pub force_log: bool,
    /// Number of sampled paths (fourth-kind).
    #[arg(long, default_value_t = 200)]
    pub w_paths: usize,
    #[arg(long, default_value_t = 1.0)]
    pub ou_mean_reversion: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ou_std: f64,
    /// Table of `x u G` triples (kernel `table`).
    #[arg(long)]
    pub kernel_file: Option<PathBuf>,
}

impl KernelArgs {
    pub fn params(&self, seed: u64) -> KernelParams {
        KernelParams {
            alpha: self.alpha,
            hurst: self.hurst,
            f1: self.f1,
            f2: self.f2,
            force_log: self.force_log,
            seed,
            w_paths: self.w_paths,
            ou: OuParams {
                mean_reversion: self.ou_mean_reversion,
                std: self.ou_std,
                ..OuParams::default()
            },
            table: self.kernel_file.clone(),
        }
    }

    pub fn name(&self) -> &str {
        if self.kernel_file.is_some() && self.kernel == "table" {
            "table"
        } else {
            &self.kernel
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Number of x-nodes (path samples use one node per path) [default: 64, 8 for simulate].
    #[arg(long)]
    pub x_nodes: Option<usize>,
    /// Half-width U of the u-window.
    #[arg(long, default_value_t = 50.0)]
    pub u_window: f64,
    #[arg(long, default_value_t = 0.05)]
    pub u_step: f64,
    /// Maximum adaptive bisections per line integral.
    #[arg(long, default_value_t = fsm_core::quadrature::QuadOptions::default().max_refinements)]
    pub refinement_max: usize,
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = Thresholds::default().pfsm_tol)]
    pub pfsm_tol: f64,
    #[arg(long, default_value_t = Thresholds::default().cf_tol)]
    pub cf_tol: f64,
    #[arg(long, default_value_t = Thresholds::default().hopf_finite_ratio)]
    pub hopf_finite_ratio: f64,
    #[arg(long, default_value_t = Thresholds::default().hopf_divergent_ratio)]
    pub hopf_divergent_ratio: f64,
    #[arg(long, default_value_t = Thresholds::default().hopf_cap)]
    pub hopf_cap: f64,
    #[arg(long, default_value_t = Thresholds::default().octaves)]
    pub octaves: usize,
    #[arg(long, default_value_t = Thresholds::default().c_exclusion)]
    pub c_exclusion: f64,
    #[arg(long, default_value_t = Thresholds::default().limit_bands)]
    pub limit_bands: usize,
}

impl ThresholdArgs {
    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            pfsm_tol: self.pfsm_tol,
            cf_tol: self.cf_tol,
            hopf_finite_ratio: self.hopf_finite_ratio,
            hopf_divergent_ratio: self.hopf_divergent_ratio,
            hopf_cap: self.hopf_cap,
            octaves: self.octaves,
            c_exclusion: self.c_exclusion,
            limit_bands: self.limit_bands,
            ..Thresholds::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Report CSV; the summary goes next to it as `.summary.json`.
    #[arg(long, default_value = "report.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Classification report CSV produced by `classify` for the same kernel and grid.
    #[arg(long)]
    pub report: PathBuf,
    /// Number of random combinations for the additivity check (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub check_additivity: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub additivity_tol: f64,
    /// Component summary CSV.
    #[arg(long, default_value = "decomposition.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub paths: usize,
    /// `start:step:end` or a comma-separated list.
    #[arg(long, default_value = "0:0.1:2")]
    pub times: String,
    /// Outer edge of the geometric tail cells.
    #[arg(long, default_value_t = fsm_core::simulator::SimOptions::default().far_window)]
    pub far_window: f64,
    #[arg(long, default_value_t = fsm_core::simulator::SimOptions::default().growth)]
    pub growth: f64,
    /// Ensemble CSV; the CF targets go next to it as `.cf.csv`.
    #[arg(long, default_value = "paths.csv")]
    pub out: PathBuf,
    /// Optional binary dump of the ensemble.
    #[arg(long)]
    pub binary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Run every exact and quadrature check (the default when no check is named).
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub flow_axioms: bool,
    #[arg(long)]
    pub generation: bool,
    #[arg(long)]
    pub self_similarity: bool,
    #[arg(long)]
    pub support: bool,
    /// Replace the kernel's attached flow: identity, rotation or broken-demo.
    #[arg(long)]
    pub flow: Option<String>,
    /// Also run the empirical checks with this many paths.
    #[arg(long, default_value_t = 0)]
    pub monte_carlo: usize,
    /// Text report; deviations go next to it as `.csv`.
    #[arg(long, default_value = "verify.txt")]
    pub out: PathBuf,
}

impl GridArgs {
    pub fn grid(
        &self,
        kernel: &fsm_core::KernelSpec,
        default_nodes: usize,
    ) -> fsm_core::Result<fsm_core::GridSpec> {
        Ok(kernel
            .grid(
                self.x_nodes.unwrap_or(default_nodes),
                self.u_window,
                self.u_step,
            )?
            .with_refinement_max(self.refinement_max))
    }
}
