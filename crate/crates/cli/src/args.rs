use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(
    name = "obscura",
    version,
    about = "Face obfuscation and dataset evaluation toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML config file; explicit flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: one per core)
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Write full-precision numbers instead of 6 significant digits
    #[arg(long, global = true)]
    pub precise: bool,

    /// More diagnostics on stderr (repeat for more)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Feathered Gaussian blur over every face in a dataset
    Blur(BlurArgs),
    /// Paint every face box with a solid color
    Overlay(OverlayArgs),
    /// Dataset statistics
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Classifier evaluation
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Annotation quality control
    #[command(subcommand)]
    Qc(QcCommand),
    /// Run the embedded oracle suite
    Selfcheck(SelfcheckArgs),
}

#[derive(Args, Debug)]
pub struct DatasetArgs {
    /// Annotation file (JSON lines)
    #[arg(long, value_name = "FILE")]
    pub annotations: PathBuf,
    /// Root directory the annotation `file` paths are relative to
    #[arg(long, value_name = "DIR")]
    pub images: PathBuf,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Where to write the JSON run report (default: stdout)
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Always write lossless PNG
    #[arg(long)]
    pub png: bool,
    /// JPEG quality for JPEG outputs
    #[arg(long, value_name = "Q", value_parser = clap::value_parser!(u8).range(1..=100))]
    pub jpeg_quality: Option<u8>,
}

#[derive(Args, Debug)]
pub struct BlurArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    /// Which boxes' diagonals set the blur strength
    #[arg(long, value_enum, value_name = "BOXES")]
    pub sigma_from: Option<SigmaFrom>,
    /// Multiplier on σ = d_max / 10
    #[arg(long, value_name = "X")]
    pub sigma_scale: Option<f64>,
}

#[derive(Args, Debug)]
pub struct OverlayArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    /// mean, gray, red, green, blue or r,g,b in [0,1]
    #[arg(long, value_name = "COLOR")]
    pub color: Option<String>,
    /// Pad each box by a tenth of its diagonal before painting
    #[arg(long)]
    pub enlarge: bool,
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SigmaFrom {
    Original,
    Enlarged,
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Enlarged,
    Raw,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Top1,
    Top5,
    Ap,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Report file, JSON lines (default: stdout)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Plot-data table, tab separated
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum StatsCommand {
    /// Face prevalence per category and supercategory, faces-per-image histogram
    Faces {
        #[arg(long, value_name = "FILE")]
        annotations: PathBuf,
        /// category<TAB>supercategory table
        #[arg(long, value_name = "FILE")]
        hierarchy: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Mean blurred-area fraction per category
    Blurred {
        #[arg(long, value_name = "FILE")]
        annotations: PathBuf,
        /// Count the enlarged boxes that blurring modifies, or the raw boxes
        #[arg(long, value_enum)]
        region: Option<Region>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Mean fraction of object area covered by faces per category
    Overlap {
        #[arg(long, value_name = "FILE")]
        annotations: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum EvalCommand {
    /// Top-1/top-5 accuracy, optionally AP, averaged over runs
    Accuracy {
        /// Prediction file; repeat once per run
        #[arg(long, value_name = "FILE", required = true)]
        predictions: Vec<PathBuf>,
        /// Also compute per-category average precision
        #[arg(long)]
        ap: bool,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Per-category baseline minus treatment
    Delta {
        /// Baseline prediction file; repeat once per run
        #[arg(long, value_name = "FILE", required = true)]
        baseline: Vec<PathBuf>,
        /// Treatment prediction file; repeat once per run
        #[arg(long, value_name = "FILE", required = true)]
        treatment: Vec<PathBuf>,
        #[arg(long)]
        ap: bool,
        /// Column written to the plot table
        #[arg(long, value_enum, default_value = "top1")]
        metric: Metric,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Pearson correlation between two category tables
    Correlate {
        /// category<TAB>value table
        #[arg(long, value_name = "FILE")]
        x: PathBuf,
        /// category<TAB>value table
        #[arg(long, value_name = "FILE")]
        y: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Mean drop per blurred-fraction bin
    Bins {
        /// category<TAB>fraction table, fractions in [0,1]
        #[arg(long, value_name = "FILE")]
        fractions: PathBuf,
        /// category<TAB>drop table
        #[arg(long, value_name = "FILE")]
        drops: PathBuf,
        /// Ascending bin edges in percent
        #[arg(long, value_delimiter = ',', value_name = "E1,E2,...")]
        edges: Option<Vec<f64>>,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum QcCommand {
    /// False positives and negatives per category against ground truth
    Audit {
        #[arg(long, value_name = "FILE")]
        annotations: PathBuf,
        #[arg(long, value_name = "FILE")]
        ground_truth: PathBuf,
        /// IoU needed for a match
        #[arg(long)]
        tau: Option<f64>,
        /// Report file, JSON lines (default: stdout)
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Apply worker submissions on top of detector boxes
    Merge {
        #[arg(long, value_name = "FILE")]
        detector: PathBuf,
        /// Worker submission log (JSON lines)
        #[arg(long, value_name = "FILE")]
        submissions: PathBuf,
        /// Merged annotation file
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Replay worker sessions through the gold-standard state machine
    Simulate {
        /// HIT layout: 50 lines of {image_id, gold?}
        #[arg(
            long,
            value_name = "FILE",
            requires = "submissions",
            conflicts_with = "synthetic"
        )]
        hit: Option<PathBuf>,
        /// Worker submission log (JSON lines)
        #[arg(long, value_name = "FILE")]
        submissions: Option<PathBuf>,
        /// Simulate this many synthetic workers instead
        #[arg(long, value_name = "N", required_unless_present = "hit")]
        synthetic: Option<usize>,
        /// Chance a synthetic worker fails a gold image
        #[arg(long, default_value_t = 0.2, value_name = "P")]
        mistake_rate: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// IoU needed to pass a gold image
        #[arg(long)]
        tau_gold: Option<f64>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct SelfcheckArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
