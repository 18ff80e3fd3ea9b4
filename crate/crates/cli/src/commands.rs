use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::DateTime;
use photocensus::census::{census_csv, census_report, feasibility_search, round_for_display, CensusReport, Estimator};
use photocensus::journal::{
    ingest_journaled, open_dataset, read_decision_file, read_decision_log, replay_decisions, Journal, DATASET_FILE,
    DECISIONS_FILE,
};
use photocensus::matching::{cluster_individuals, detect_conflicts, generate_candidates, MatchGraph};
use photocensus::sighting::{
    assign_occasions, collection_stats, parse_photo_record, Dataset, DatasetHeader, IngestReport, OccasionRule,
};
use photocensus::sim::{run_scenario, ScenarioConfig, SimError};
use serde::Serialize;
use serde_json::json;

use crate::args::{CensusArgs, Cli, Command};
use crate::config::CliConfig;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn user(e: impl std::fmt::Display) -> CliError {
    CliError::User(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

struct Output<'a> {
    out: &'a mut dyn Write,
    json: bool,
}

impl Output<'_> {
    /// Writes `value` as JSON under `--json`, `text` otherwise.
    fn emit<T: Serialize>(&mut self, value: &T, text: &str) -> Result<()> {
        if self.json {
            let line = serde_json::to_string_pretty(value).map_err(internal)?;
            writeln!(self.out, "{line}").map_err(internal)
        } else {
            self.out.write_all(text.as_bytes()).map_err(internal)
        }
    }
}

fn settings(cli: &Cli) -> Result<CliConfig> {
    let mut cfg = match &cli.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    if let Some(d) = &cli.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threshold {
        cfg.threshold = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = settings(&cli)?;
    let mut output = Output { out, json: cli.json };
    match cli.command {
        Command::Ingest { files } => ingest(&cfg, &files, &mut output),
        Command::Stats => stats(&cfg, &mut output),
        Command::Candidates { top_k } => candidates(&cfg, top_k, &mut output),
        Command::Review { decisions } => review(&cfg, &decisions, &mut output),
        Command::Census(args) => census(&cfg, &args, &mut output),
        Command::Simulate { scenario, runs } => simulate(&cfg, &scenario, runs, &mut output, err),
        Command::Feasibility { individuals, estimate, tol } => feasibility(individuals, estimate, tol, &mut output),
        Command::Serve { listen, tokens, sensitive } => serve(cfg, listen, tokens, sensitive, err),
        Command::Report(args) => report(&cfg, &args, &mut output),
    }
}

/// Dataset and replayed match graph, without creating any files.
fn load(cfg: &CliConfig) -> Result<(Dataset, MatchGraph)> {
    let path = cfg.data_dir.join(DATASET_FILE);
    let dataset = match File::open(&path) {
        Ok(f) => Dataset::read_pcjl(BufReader::new(f)).map_err(user)?.0,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Dataset::new(cfg.embedding_dim),
        Err(e) => return Err(user(format!("cannot read {}: {e}", path.display()))),
    };
    let mut graph = MatchGraph::new(&dataset.annotations());
    let edges = read_decision_file(&cfg.data_dir.join(DECISIONS_FILE)).map_err(user)?;
    replay_decisions(&mut graph, edges).map_err(user)?;
    Ok((dataset, graph))
}

fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| user(format!("cannot read {}: {e}", path.display())))
}

/// Non-blank lines with 1-based line numbers, minus a leading dataset header.
fn record_lines(text: &str) -> (Option<DatasetHeader>, Vec<(usize, &str)>) {
    let mut lines: Vec<(usize, &str)> =
        text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l)).collect();
    let header = lines.first().and_then(|(_, l)| serde_json::from_str::<DatasetHeader>(l).ok());
    if header.is_some() {
        lines.remove(0);
    }
    (header, lines)
}

#[derive(Serialize)]
struct FileReport {
    file: PathBuf,
    #[serde(flatten)]
    report: IngestReport,
}

fn ingest(cfg: &CliConfig, files: &[PathBuf], output: &mut Output) -> Result<()> {
    let inputs: Vec<String> = files.iter().map(|f| read_input(f)).collect::<Result<_>>()?;
    let first_dim = inputs.first().and_then(|t| record_lines(t).0).map(|h| h.embedding_dim);
    std::fs::create_dir_all(&cfg.data_dir)
        .map_err(|e| user(format!("cannot create {}: {e}", cfg.data_dir.display())))?;
    let (mut dataset, _, mut journal) =
        open_dataset(&cfg.data_dir.join(DATASET_FILE), first_dim.unwrap_or(cfg.embedding_dim)).map_err(user)?;

    let mut reports = Vec::new();
    let mut text = String::new();
    for (file, input) in files.iter().zip(&inputs) {
        let (header, lines) = record_lines(input);
        if let Some(h) = header {
            if h.embedding_dim != dataset.embedding_dim() {
                return Err(user(format!(
                    "{}: embedding dimension {} does not match the dataset's {}",
                    file.display(),
                    h.embedding_dim,
                    dataset.embedding_dim()
                )));
            }
        }
        let mut report = ingest_journaled(&mut dataset, &mut journal, lines.iter().map(|(_, l)| parse_photo_record(l)))
            .map_err(internal)?;
        for r in &mut report.rejections {
            r.index = lines[r.index].0;
        }
        text += &format!(
            "{}: accepted {}, duplicates skipped {}, rejected {}\n",
            file.display(),
            report.accepted,
            report.duplicates_skipped,
            report.rejected
        );
        for r in &report.rejections {
            text += &format!("  line {}: {}\n", r.index, r.error);
        }
        reports.push(FileReport { file: file.clone(), report });
    }
    let stats = collection_stats(&dataset);
    text += &stats.to_csv();
    output.emit(&json!({ "files": reports, "stats": stats }), &text)
}

fn stats(cfg: &CliConfig, output: &mut Output) -> Result<()> {
    let (dataset, _) = load(cfg)?;
    let stats = collection_stats(&dataset);
    output.emit(&stats, &stats.to_csv())
}

fn candidates(cfg: &CliConfig, top_k: Option<usize>, output: &mut Output) -> Result<()> {
    let top_k = top_k.unwrap_or(cfg.top_k);
    if top_k == 0 {
        return Err(user("--top-k must be positive"));
    }
    let (dataset, _) = load(cfg)?;
    let list = generate_candidates(&dataset.annotations(), cfg.threshold, top_k).map_err(internal)?;
    let mut text = String::from("a,b,score\n");
    for c in &list {
        text += &format!("{},{},{:.6}\n", c.a, c.b, c.score);
    }
    output.emit(&list, &text)
}

fn review(cfg: &CliConfig, decisions: &Path, output: &mut Output) -> Result<()> {
    let file = File::open(decisions).map_err(|e| user(format!("cannot read {}: {e}", decisions.display())))?;
    let edges = read_decision_log(BufReader::new(file)).map_err(user)?;
    let (_, mut graph) = load(cfg)?;
    // validate the whole batch before anything is journaled
    let applied = replay_decisions(&mut graph, edges.clone()).map_err(user)?;
    let mut journal = Journal::open_append(cfg.data_dir.join(DECISIONS_FILE)).map_err(internal)?;
    for edge in &edges {
        journal.append(edge).map_err(internal)?;
    }
    let partition = cluster_individuals(&graph);
    let conflicts = detect_conflicts(&graph);
    let mut text = format!(
        "applied {applied} decisions; {} in log; {} individuals; {} conflicts\n",
        graph.log().len(),
        partition.individual_count(),
        conflicts.len()
    );
    for c in &conflicts {
        text += &format!("conflict: {} / {} different, joined by {}\n", c.edge.a, c.edge.b, c.witness.join(" > "));
    }
    let value = json!({
        "applied": applied,
        "decisions": graph.log().len(),
        "individuals": partition.individual_count(),
        "conflicts": conflicts,
    });
    output.emit(&value, &text)
}

fn parse_occasions(text: &str) -> Result<(u32, u32)> {
    let bad = || user(format!("--occasions must look like 0,1 (got {text:?})"));
    let (i, j) = text.split_once(',').ok_or_else(bad)?;
    Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

fn census_reports(cfg: &CliConfig, args: &CensusArgs) -> Result<(Dataset, Vec<CensusReport>)> {
    let estimator: Estimator = match &args.estimator {
        Some(name) => name.parse().map_err(user)?,
        None => cfg.estimator,
    };
    let pair = parse_occasions(&args.occasions)?;
    let (dataset, mut graph) = load(cfg)?;
    if let Some(t) = args.auto_accept {
        if !(-1.0..=1.0).contains(&t) {
            return Err(user(format!("--auto-accept must be in [-1, 1], got {t}")));
        }
        let annotations = dataset.annotations();
        graph.set_candidates(generate_candidates(&annotations, cfg.threshold.min(t), cfg.top_k).map_err(internal)?);
        graph.auto_accept(t, "auto-accept", DateTime::UNIX_EPOCH);
    }
    let occasions = assign_occasions(&dataset, &OccasionRule::from(cfg.occasions)).map_err(user)?;
    let partition = cluster_individuals(&graph);
    let species = match &args.species {
        Some(s) => vec![s.clone()],
        None => dataset.species(),
    };
    let reports = species
        .iter()
        .map(|s| {
            census_report(&dataset, &partition, &occasions, pair, s, estimator).map_err(|e| user(format!("{s}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((dataset, reports))
}

fn census(cfg: &CliConfig, args: &CensusArgs, output: &mut Output) -> Result<()> {
    let (_, reports) = census_reports(cfg, args)?;
    output.emit(&reports, &census_csv(&reports))
}

pub const CENSUS_TABLE_HEADER: &str = "species,annotations,individuals,estimate,ci_lo,ci_hi";

fn report(cfg: &CliConfig, args: &CensusArgs, output: &mut Output) -> Result<()> {
    let (dataset, reports) = census_reports(cfg, args)?;
    let stats = collection_stats(&dataset);
    let mut text = stats.to_csv();
    text += "\n";
    text += CENSUS_TABLE_HEADER;
    text += "\n";
    for r in &reports {
        let (lo, hi) = match r.estimate.ci95 {
            Some((lo, hi)) => (round_for_display(lo).to_string(), round_for_display(hi).to_string()),
            None => (String::new(), String::new()),
        };
        text += &format!(
            "{},{},{},{},{lo},{hi}\n",
            r.species,
            r.annotations,
            r.individuals,
            round_for_display(r.estimate.n_est)
        );
    }
    output.emit(&json!({ "collection": stats, "census": reports }), &text)
}

fn simulate(cfg: &CliConfig, scenario: &Path, runs: usize, output: &mut Output, err: &mut dyn Write) -> Result<()> {
    let config: ScenarioConfig =
        serde_json::from_str(&read_input(scenario)?).map_err(|e| user(format!("{}: {e}", scenario.display())))?;
    if runs == 0 {
        return Err(user("--runs must be at least 1"));
    }
    writeln!(err, "seed {}", cfg.seed).map_err(internal)?;
    let result = run_scenario(&config, runs, cfg.seed).map_err(|e| match e {
        SimError::InvalidPopulation(_) | SimError::InvalidProcess(_) | SimError::InvalidLayers(_) => user(e),
        SimError::NoSuccessfulRuns { .. } | SimError::Census(_) => user(e),
        SimError::Match(_) => internal(e),
    })?;
    output.emit(&json!({ "seed": cfg.seed, "result": result }), &result.to_csv())
}

fn feasibility(individuals: u64, estimate: f64, tol: f64, output: &mut Output) -> Result<()> {
    if !(tol >= 0.0 && tol.is_finite() && estimate.is_finite()) {
        return Err(user("--estimate and --tol must be finite, --tol non-negative"));
    }
    let found = feasibility_search(individuals, estimate, tol);
    let mut text = String::from("n,K,k,estimate\n");
    for f in &found {
        text += &format!("{},{},{},{:.4}\n", f.n, f.big_k, f.k, f.estimate);
    }
    output.emit(&found, &text)
}

fn serve(
    mut cfg: CliConfig,
    listen: Option<std::net::SocketAddr>,
    tokens: Option<PathBuf>,
    sensitive: Option<PathBuf>,
    err: &mut dyn Write,
) -> Result<()> {
    if let Some(l) = listen {
        cfg.listen = l;
    }
    if tokens.is_some() {
        cfg.token_file = tokens;
    }
    if sensitive.is_some() {
        cfg.sensitive_policy_file = sensitive;
    }
    let config = cfg.server();
    let state = photocensus_server::AppState::open(&config).map_err(server_error)?;
    writeln!(err, "serving {} on {}", config.data_dir.display(), config.listen).map_err(internal)?;
    let runtime = tokio::runtime::Runtime::new().map_err(internal)?;
    runtime.block_on(photocensus_server::serve_state(state, config.listen)).map_err(server_error)
}

fn server_error(e: photocensus_server::ServerError) -> CliError {
    match e {
        photocensus_server::ServerError::Config(_) | photocensus_server::ServerError::Journal(_) => user(e),
        _ => internal(e),
    }
}
