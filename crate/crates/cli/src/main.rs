use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sortcell_core::cellsim::CameraId;

mod commands;
mod config;

use config::BackendFlags;

#[derive(Parser, Debug)]
#[command(name = "sortcell", version, about = "Garment sorting cell simulator and classifier benchmark")]
struct Cli {
    /// Config file (TOML, or JSON by extension); flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulated sorting cell
    #[command(subcommand)]
    Cell(CellCommand),
    /// Record a segmentation baseline from one or more empty-table frames
    Baseline(BaselineArgs),
    /// Segment frames against a baseline and export PLY point clouds
    Segment(SegmentArgs),
    /// Evaluate a classifier over a labeled image manifest
    Bench(BenchArgs),
}

#[derive(Subcommand, Debug)]
enum CellCommand {
    /// Sort a spawned basket until the cell shuts down
    Run(RunArgs),
    /// Render one camera frame of a spawned scene
    Render(RenderArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct SceneArgs {
    /// Seed for every random choice of the run
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scene spec JSON (item counts per class, entanglement)
    #[arg(long)]
    pub scene: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ThresholdArgs {
    /// Depth change that marks a pixel as foreground, mm (strictly greater)
    #[arg(long)]
    pub depth_mm: Option<f64>,
    /// Per-channel color change that marks a pixel as foreground (strictly greater)
    #[arg(long)]
    pub rgb: Option<u8>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub backend: BackendFlags,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Output directory for the run log, cycle reports, twin snapshots and bin summary
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CameraArg {
    Cam1,
    Cam2,
}

impl From<CameraArg> for CameraId {
    fn from(c: CameraArg) -> Self {
        match c {
            CameraArg::Cam1 => CameraId::Cam1,
            CameraArg::Cam2 => CameraId::Cam2,
        }
    }
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long, value_enum, default_value = "cam2")]
    pub camera: CameraArg,
    /// Move this many items from the basket onto the inspection table first
    #[arg(long, default_value_t = 0)]
    pub on_table: usize,
    /// Output stem; writes <stem>.png, <stem>.pgm and <stem>.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    /// Frame stems (as written by `cell render`)
    #[arg(long = "frame", required = true)]
    pub frames: Vec<PathBuf>,
    /// Directory receiving baseline.png, baseline.pgm and baseline.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    /// Directory holding a saved baseline
    #[arg(long)]
    pub baseline: PathBuf,
    /// Frame stems to segment
    #[arg(long = "frame", required = true)]
    pub frames: Vec<PathBuf>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Directory receiving one <frame>.ply per frame
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// JSON-lines manifest of {id, image, label}
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub backend: BackendFlags,
    /// Seed of the mock backend
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parallel classifier requests
    #[arg(long, default_value_t = 1)]
    pub concurrency: usize,
    /// Hardware tag stored with every response
    #[arg(long)]
    pub hardware: Option<String>,
    /// Also write accuracy tables, timing tables, confusion matrices and the audit
    #[arg(long)]
    pub report: bool,
    /// Report formats, comma separated (md, csv, json)
    #[arg(long, value_delimiter = ',', default_value = "md,csv,json")]
    pub format: Vec<String>,
    /// Weighted vote over member logs instead of querying a backend, e.g. "a=0.3,b=0.4,c=0.3"
    #[arg(long)]
    pub ensemble: Option<String>,
    /// Response log of an ensemble member (repeatable)
    #[arg(long = "member-log")]
    pub member_logs: Vec<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::FileConfig::load(cli.config.as_deref()).and_then(|file| match cli.command {
        Command::Cell(CellCommand::Run(a)) => commands::cell_run(&file, &a),
        Command::Cell(CellCommand::Render(a)) => commands::cell_render(&file, &a),
        Command::Baseline(a) => commands::baseline(&a),
        Command::Segment(a) => commands::segment(&file, &a),
        Command::Bench(a) => commands::bench(&file, &a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
