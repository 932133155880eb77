use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use shardmatch_core::synth::ShapeKind;
use shardmatch_core::Material;

#[derive(Debug, Parser)]
#[command(name = "shardmatch", version, about = "Tactile reassembly of fractured transparent objects")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fracture an outline and write a scene directory with tactile presses.
    Gen(GenArgs),
    /// Reconstruct every press of a scene and report round-trip error.
    Reconstruct(ReconstructArgs),
    /// Rank candidate mates and transforms for every crack press.
    Match(SceneRunArgs),
    /// Plan a greedy reassembly from the pairwise match table.
    Assemble(SceneRunArgs),
    /// Align a fragment mask to a gap mask by rotation sweep.
    AlignGap(AlignGapArgs),
    /// Write a notched square, its gap and the rotated broken piece.
    GenNotch(GenNotchArgs),
    /// Add a scene's fragments to a fragment database.
    DbBuild(DbBuildArgs),
    /// Write a mixed-material database and its query set.
    GenMixed(GenMixedArgs),
    /// Query a database with a scene or query set and score the answers.
    Eval(EvalArgs),
}

/// Matching overrides shared by the scoring commands.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// JSON file with `matching` and `gap` parameter objects.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Fusion weights `we,wg,wh`; must sum to 1.
    #[arg(long, value_name = "WE,WG,WH", value_delimiter = ',', num_args = 3)]
    pub weights: Option<Vec<f64>>,
    /// Rotation step of the transform and gap sweeps, degrees.
    #[arg(long, value_name = "DEG")]
    pub sweep_step_deg: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value = "square")]
    pub shape: ShapeKind,
    /// Number of fracture sites.
    #[arg(long, default_value_t = 6)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub roughness: f64,
    /// Peak crack relief, px.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, default_value = "glass")]
    pub material: Material,
    /// Standard deviation of additive intensity noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Defaults to a value derived from `--seed`.
    #[arg(long)]
    pub noise_seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SceneRunArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct AlignGapArgs {
    /// Gap mask (P2/P5).
    #[arg(long)]
    pub gap: PathBuf,
    /// Fragment mask (P2/P5).
    #[arg(long)]
    pub fragment: PathBuf,
    /// Also sweep the mirrored fragment.
    #[arg(long)]
    pub mirror: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct GenNotchArgs {
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    #[arg(long, default_value_t = 30.0)]
    pub rotation_deg: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DbBuildArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub scene: PathBuf,
    /// Build report; defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenMixedArgs {
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Labelled presses per material for the classifier.
    #[arg(long, default_value_t = 10)]
    pub train_per_class: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub db: PathBuf,
    /// A scene directory, or a query set written by `gen-mixed`.
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
}
