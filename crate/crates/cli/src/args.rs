use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "evfilt", version, about = "Event-camera background-activity filtering")]
pub struct Cli {
    /// `key = value` file with defaults for any long option (flags win).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Manifest location; defaults to `<primary output>.manifest.json`, or
    /// stderr when the command writes no file.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render the synthetic moving-bar scene.
    Synth(SynthArgs),
    /// Add generated background noise to a clean recording.
    AddNoise(AddNoiseArgs),
    /// Merge a clean recording with a separately recorded noise stream.
    Mix(MixArgs),
    /// Filter a stream and optionally write per-event scores.
    Filter(FilterArgs),
    /// ROC and PR curves from a scores file.
    Eval(EvalArgs),
    /// AUROC/AUPRC over a grid of algorithms, parameters, noise rates and seeds.
    Sweep(SweepArgs),
    /// Pipeline timing, optionally simulating a stream cycle by cycle.
    Pipeline(PipelineArgs),
    /// Single-threaded throughput of one filter.
    Bench(BenchArgs),
}

/// Geometry for CSV inputs (EVT64 files carry their own).
#[derive(Debug, Args, Clone, Default)]
pub struct GeometryArgs {
    #[arg(long)]
    pub width: Option<u16>,
    #[arg(long)]
    pub height: Option<u16>,
}

/// Mirrors the filter and datapath parameters one to one.
#[derive(Debug, Args, Clone, Default)]
pub struct FilterParams {
    /// dif, bif, dif-hw, nnb, stcf or stcfN.
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long)]
    pub scale: Option<u32>,
    #[arg(long)]
    pub update_shift: Option<u32>,
    /// Filter length F_L (also the NNb/STCF window).
    #[arg(long)]
    pub filter_len_us: Option<u64>,
    /// 0 disables the inactive-area update.
    #[arg(long)]
    pub global_update_us: Option<u64>,
    #[arg(long)]
    pub init_interval_us: Option<u64>,
    /// STCF support count.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trunc_bits: Option<u32>,
    #[arg(long)]
    pub sat_bits: Option<u32>,
    #[arg(long)]
    pub dt_bits: Option<u32>,
    #[arg(long)]
    pub dist_frac_bits: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub duration_us: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also mix in noise at this rate (Hz per pixel).
    #[arg(long)]
    pub noise_rate: Option<f64>,
    #[arg(long)]
    pub noise_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AddNoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Hz per pixel.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to the recording's last timestamp + 1.
    #[arg(long)]
    pub duration_us: Option<u64>,
    #[arg(long)]
    pub time_step_us: Option<u64>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    #[arg(long)]
    pub clean: PathBuf,
    #[arg(long)]
    pub noise: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Relabel the noise stream's polarities 0/1 to 2/3 first.
    #[arg(long)]
    pub relabel: bool,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Passed events.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV `t,x,y,p,score,decision`.
    #[arg(long)]
    pub emit_scores: Option<PathBuf>,
    #[command(flatten)]
    pub params: FilterParams,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub scores: PathBuf,
    /// ROC points CSV `fpr,tpr`.
    #[arg(long)]
    pub out: PathBuf,
    /// PR points CSV `recall,precision`.
    #[arg(long)]
    pub pr_out: Option<PathBuf>,
    /// Ignore events before this time.
    #[arg(long)]
    pub skip_us: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Clean recording; defaults to the synthetic scene.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub algos: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub shifts: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub rates: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub filter_len_us: Option<u64>,
    #[arg(long)]
    pub global_update_us: Option<u64>,
    #[arg(long)]
    pub skip_us: Option<u64>,
    /// Synthetic scene length.
    #[arg(long)]
    pub duration_us: Option<u64>,
    #[arg(long)]
    pub scene_seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub clock_mhz: Option<f64>,
    #[arg(long)]
    pub width: Option<u16>,
    #[arg(long)]
    pub height: Option<u16>,
    #[arg(long)]
    pub scale: Option<u32>,
    #[arg(long)]
    pub global_update_us: Option<u64>,
    #[arg(long)]
    pub overhead_cycles: Option<u64>,
    /// Stream to simulate; without it only the closed-form timing is reported.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Disable the forwarding cache (the raw read-after-write hazard).
    #[arg(long)]
    pub no_forwarding: bool,
    /// One-row CSV summary.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Passed-event bits, one per line.
    #[arg(long)]
    pub decisions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Stream to process; defaults to synthetic noise.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Size of the synthetic stream.
    #[arg(long)]
    pub events: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Passed events.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also run the fixed-point model and report decision agreement.
    #[arg(long)]
    pub compare_hw: bool,
    #[command(flatten)]
    pub params: FilterParams,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}
