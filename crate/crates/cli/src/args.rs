use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "photocensus", version, about = "Photographic mark-recapture census")]
pub struct Cli {
    /// Directory holding dataset.pcjl and decisions.jsonl.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,

    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for every random draw (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,

    /// Candidate similarity threshold in [-1, 1].
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub threshold: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Append JSON-lines photo records to the dataset.
    Ingest {
        /// JSON-lines or .pcjl files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Collection totals: cars, cameras, photographs, annotations.
    Stats,
    /// Scored candidate pairs in review order.
    Candidates {
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Apply a batch of verdicts in decision-log format.
    Review {
        #[arg(long)]
        decisions: PathBuf,
    },
    /// Population estimate per species.
    Census(CensusArgs),
    /// Evaluate an estimator over simulated rallies.
    Simulate {
        /// JSON scenario file.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        runs: usize,
    },
    /// Occasion counts consistent with a published census row.
    Feasibility {
        #[arg(long)]
        individuals: u64,
        #[arg(long)]
        estimate: f64,
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        listen: Option<SocketAddr>,
        /// JSON token table.
        #[arg(long)]
        tokens: Option<PathBuf>,
        /// JSON array of sensitive-species policies.
        #[arg(long)]
        sensitive: Option<PathBuf>,
    },
    /// Collection and census tables as CSV.
    Report(CensusArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CensusArgs {
    /// Species to report; all species when omitted.
    #[arg(long)]
    pub species: Option<String>,
    /// Occasion pair, e.g. 0,1.
    #[arg(long, default_value = "0,1")]
    pub occasions: String,
    /// lincoln-petersen or chapman.
    #[arg(long)]
    pub estimator: Option<String>,
    /// Accept candidates at or above this score as "same" before clustering.
    /// Not journaled.
    #[arg(long, allow_hyphen_values = true)]
    pub auto_accept: Option<f64>,
}
