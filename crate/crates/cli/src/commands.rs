use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dea_core::linprog::DEFAULT_ITERATION_CAP;
use dea_core::{
    compare_models, correlation_matrix, descriptive_stats, efficiency_bands, evaluate_all_with, rank_scores,
    synthesize_matching, BandBasis, Bands, Comparison, CorrelationMethod, Dataset, EfficiencyResult, ModelKind,
    ModelSpec, ReturnsToScale, SolverConfig,
};

use crate::exit;
use crate::io::{load_csv_path, load_stats_spec_path, write_dataset_csv};
use crate::render::{Cell, Format, Table};

/// Peers are DMUs whose intensity exceeds this.
const PEER_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(
    name = "dea",
    version,
    about = "Efficiency evaluation with CCR and SBM-undesirable DEA models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; md by default, csv for synth.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Replace zeros in model columns with 1e-6 times the column maximum.
    #[arg(long, global = true)]
    pub epsilon_shift: bool,
    /// Write the simplex trace to stderr.
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Max, min, mean and sample sd of every non-meta indicator.
    Stats(Input),
    /// Correlation matrix of the non-meta indicators.
    Corr {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "pearson")]
        method: Method,
    },
    /// Scores, slacks and peers for one model.
    Evaluate {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long, value_enum, default_value = "crs")]
        rts: Rts,
    },
    /// Scores, ranks and efficiency levels for one model.
    Rank {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "sbm-u")]
        model: Model,
        #[arg(long, value_enum, default_value = "crs")]
        rts: Rts,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Synthetic dataset matching per-indicator summary statistics.
    Synth {
        /// CSV with header `name,role,min,max,mean,sd`.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Both models side by side with ranks, rates, levels and a mean row.
    Report {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "crs")]
        rts: Rts,
        #[command(flatten)]
        thresholds: Thresholds,
    },
}

#[derive(Debug, Args)]
pub struct Input {
    /// Dataset CSV: `dmu` then `<in|out+|out-|meta>:<name>` columns.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct Thresholds {
    /// Lower bound of the top level.
    #[arg(long, default_value_t = dea_core::analysis::DEFAULT_BAND_THRESHOLDS.0)]
    pub t1: f64,
    /// Lower bound of the middle level.
    #[arg(long, default_value_t = dea_core::analysis::DEFAULT_BAND_THRESHOLDS.1)]
    pub t2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ccr,
    #[value(name = "sbm-u")]
    SbmU,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rts {
    Crs,
    Vrs,
}

impl Rts {
    fn core(self) -> ReturnsToScale {
        match self {
            Rts::Crs => ReturnsToScale::Crs,
            Rts::Vrs => ReturnsToScale::Vrs,
        }
    }
}

impl Model {
    fn spec(self, rts: Rts) -> ModelSpec {
        match self {
            Model::Ccr => ModelSpec::ccr(rts.core()),
            Model::SbmU => ModelSpec::sbm(rts.core()),
        }
    }
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Rendered output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                exit::USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                exit::OK
            };
        }
    };
    match execute(&cli, err).and_then(|text| out.write_all(text.as_bytes()).map_err(|e| Failure::Data(e.into()))) {
        Ok(()) => exit::OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            exit::USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            exit::DATA
        }
    }
}

fn solver_config() -> Result<SolverConfig, Failure> {
    match std::env::var("DEA_ITER_CAP") {
        Err(_) => Ok(SolverConfig {
            iteration_cap: DEFAULT_ITERATION_CAP,
        }),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(cap) if cap > 0 => Ok(SolverConfig { iteration_cap: cap }),
            _ => Err(Failure::Usage(format!(
                "DEA_ITER_CAP must be a positive integer, got `{v}`"
            ))),
        },
    }
}

struct Session<'a> {
    cli: &'a Cli,
    config: SolverConfig,
    err: &'a mut dyn Write,
}

impl Session<'_> {
    fn load(&mut self, input: &Input) -> Result<Dataset, Failure> {
        let loaded = load_csv_path(&input.input, self.cli.epsilon_shift).map_err(|e| anyhow!(e))?;
        for w in &loaded.warnings {
            let _ = writeln!(self.err, "warning: {w}");
        }
        Ok(loaded.dataset)
    }

    fn evaluate(&mut self, d: &Dataset, spec: &ModelSpec) -> Result<Vec<EfficiencyResult>, Failure> {
        let mut trace = String::new();
        let sink: Option<&mut dyn std::fmt::Write> = if self.cli.verbose { Some(&mut trace) } else { None };
        let results = evaluate_all_with(d, spec, &self.config, sink);
        if self.cli.verbose {
            let _ = self.err.write_all(trace.as_bytes());
        }
        Ok(results.map_err(|e| anyhow!(e))?)
    }
}

fn check_thresholds(t: &Thresholds) -> Result<(f64, f64), Failure> {
    if !(t.t1.is_finite() && t.t2.is_finite() && t.t2 <= t.t1) {
        return Err(Failure::Usage(format!(
            "need --t2 <= --t1, got t1={} t2={}",
            t.t1, t.t2
        )));
    }
    Ok((t.t1, t.t2))
}

fn execute(cli: &Cli, err: &mut dyn Write) -> Result<String, Failure> {
    let mut s = Session {
        cli,
        config: solver_config()?,
        err,
    };
    let format = cli.format.unwrap_or(match cli.command {
        Command::Synth { .. } => Format::Csv,
        _ => Format::Md,
    });
    let table = match &cli.command {
        Command::Stats(input) => {
            let d = s.load(input)?;
            stats_table(&d)?
        }
        Command::Corr { input, method } => {
            let d = s.load(input)?;
            let method = match method {
                Method::Pearson => CorrelationMethod::Pearson,
                Method::Spearman => CorrelationMethod::Spearman,
            };
            let m = correlation_matrix(&d, method).map_err(|e| anyhow!(e))?;
            let mut t = Table::new(std::iter::once(String::new()).chain(m.labels.iter().cloned()));
            for (label, row) in m.labels.iter().zip(&m.values) {
                let mut cells = vec![Cell::Text(label.clone())];
                cells.extend(row.iter().map(|&v| Cell::Real(v, 3)));
                t.push(cells);
            }
            t
        }
        Command::Evaluate { input, model, rts } => {
            let d = s.load(input)?;
            let results = s.evaluate(&d, &model.spec(*rts))?;
            evaluate_table(&d, &results)
        }
        Command::Rank {
            input,
            model,
            rts,
            thresholds,
        } => {
            let bounds = check_thresholds(thresholds)?;
            let d = s.load(input)?;
            let results = s.evaluate(&d, &model.spec(*rts))?;
            let scores: Vec<f64> = results.iter().map(|r| r.score).collect();
            let ranks = rank_scores(&scores);
            let mut t = Table::new(["DMU", "Score", "Level"]);
            for ((r, rank), score) in results.iter().zip(ranks).zip(&scores) {
                let level = if *score >= bounds.0 {
                    1
                } else if *score >= bounds.1 {
                    2
                } else {
                    3
                };
                t.push(vec![
                    Cell::Text(r.dmu.clone()),
                    Cell::Scored(*score, rank),
                    Cell::Int(level),
                ]);
            }
            t
        }
        Command::Synth { spec, n, seed } => {
            let rows = load_stats_spec_path(spec).map_err(|e| anyhow!(e))?;
            let d = synthesize_matching(&rows, *n, *seed).map_err(|e| anyhow!(e))?;
            if format == Format::Csv {
                return Ok(write_dataset_csv(&d));
            }
            dataset_table(&d)
        }
        Command::Report { input, rts, thresholds } => {
            let bounds = check_thresholds(thresholds)?;
            let d = s.load(input)?;
            let ee = s.evaluate(&d, &ModelSpec::ccr(rts.core()))?;
            let epi = s.evaluate(&d, &ModelSpec::sbm(rts.core()))?;
            let cmp = compare_models(&ee, &epi, &d).map_err(|e| anyhow!(e))?;
            let bands = efficiency_bands(&cmp.records, bounds, BandBasis::Epi);
            report_table(&cmp, &bands)
        }
    };
    Ok(table.render(format))
}

pub fn stats_table(d: &Dataset) -> Result<Table, anyhow::Error> {
    let stats = descriptive_stats(d).context("descriptive statistics")?;
    let mut t = Table::new(["Indicator", "Role", "Max", "Min", "Mean", "SD"]);
    for r in stats {
        t.push(vec![
            Cell::Text(r.indicator),
            Cell::Text(r.role.tag().into()),
            Cell::Real(r.max, 2),
            Cell::Real(r.min, 2),
            Cell::Real(r.mean, 2),
            Cell::Real(r.sd, 2),
        ]);
    }
    Ok(t)
}

/// The dataset itself, headed like a dataset file.
pub fn dataset_table(d: &Dataset) -> Table {
    let mut t = Table::new(
        std::iter::once("dmu".to_string()).chain(d.indicators().iter().map(|i| format!("{}:{}", i.role.tag(), i.name))),
    );
    for (name, row) in d.dmu_names().iter().zip(d.rows()) {
        let mut cells = vec![Cell::Text(name.clone())];
        cells.extend(row.iter().map(|&v| Cell::Real(v, 2)));
        t.push(cells);
    }
    t
}

pub fn evaluate_table(d: &Dataset, results: &[EfficiencyResult]) -> Table {
    let ccr = results.first().is_some_and(|r| r.kind == ModelKind::CcrOutput);
    let model_names = |role| -> Vec<String> {
        d.columns_with_role(role)
            .into_iter()
            .map(|j| d.indicators()[j].name.clone())
            .collect()
    };
    let inputs = model_names(dea_core::Role::Input);
    let good = model_names(dea_core::Role::DesirableOutput);
    let bad = if ccr {
        Vec::new()
    } else {
        model_names(dea_core::Role::UndesirableOutput)
    };

    let mut headers = vec!["DMU".to_string(), "Score".to_string()];
    if ccr {
        headers.push("phi".into());
    }
    headers.extend(inputs.iter().map(|n| format!("s- {n}")));
    headers.extend(good.iter().map(|n| format!("s+ {n}")));
    headers.extend(bad.iter().map(|n| format!("s- {n}")));
    headers.push("Peers".into());
    let mut t = Table::new(headers);

    let ranks = rank_scores(&results.iter().map(|r| r.score).collect::<Vec<_>>());
    for (r, rank) in results.iter().zip(ranks) {
        let mut cells = vec![Cell::Text(r.dmu.clone()), Cell::Scored(r.score, rank)];
        if ccr {
            cells.push(Cell::Real(r.phi, 4));
        }
        let slacks = r.slack_in.iter().chain(&r.slack_good).chain(&r.slack_bad);
        cells.extend(slacks.map(|&v| Cell::Real(v, 4)));
        let peers: Vec<&str> = r
            .lambda
            .iter()
            .zip(d.dmu_names())
            .filter(|(l, _)| **l > PEER_THRESHOLD)
            .map(|(_, n)| n.as_str())
            .collect();
        cells.push(Cell::Text(peers.join(" ")));
        t.push(cells);
    }
    t
}

/// Joint CCR/SBM table: scores with ranks, percent reductions of inputs and
/// undesirable outputs, percent increases of desirable outputs, meta
/// columns, level, and a closing mean row.
pub fn report_table(cmp: &Comparison, bands: &Bands) -> Table {
    let mut headers = vec!["DMU".to_string(), "EE".into(), "EPI".into()];
    for n in &cmp.input_names {
        headers.push(format!("CCR -{n} %"));
        headers.push(format!("UOM -{n} %"));
    }
    for n in &cmp.bad_names {
        headers.push(format!("UOM -{n} %"));
    }
    for n in &cmp.good_names {
        headers.push(format!("CCR +{n} %"));
        headers.push(format!("UOM +{n} %"));
    }
    if let Some(first) = cmp.records.first() {
        headers.extend(first.meta.iter().map(|(n, _)| n.clone()));
    }
    headers.push("Level".into());
    let mut t = Table::new(headers);

    let rates = |ccr: &dea_core::RateReport, sbm: &dea_core::RateReport| -> Vec<Cell> {
        let mut cells = Vec::new();
        for (a, b) in ccr.input_reduction_pct.iter().zip(&sbm.input_reduction_pct) {
            cells.push(Cell::Rate(*a));
            cells.push(Cell::Rate(*b));
        }
        cells.extend(sbm.bad_reduction_pct.iter().map(|&v| Cell::Rate(v)));
        for (a, b) in ccr.good_increase_pct.iter().zip(&sbm.good_increase_pct) {
            cells.push(Cell::Rate(*a));
            cells.push(Cell::Rate(*b));
        }
        cells
    };
    for r in &cmp.records {
        let mut cells = vec![
            Cell::Text(r.dmu.clone()),
            Cell::Scored(r.ee, r.ee_rank),
            Cell::Scored(r.epi, r.epi_rank),
        ];
        cells.extend(rates(&r.ccr_rates, &r.sbm_rates));
        cells.extend(r.meta.iter().map(|&(_, v)| Cell::Real(v, 2)));
        cells.push(bands.level_of(&r.dmu).map_or(Cell::Empty, |l| Cell::Int(l.into())));
        t.push(cells);
    }
    let m = &cmp.mean;
    let mut cells = vec![Cell::Text("Mean".into()), Cell::Real(m.ee, 2), Cell::Real(m.epi, 2)];
    cells.extend(rates(&m.ccr_rates, &m.sbm_rates));
    cells.extend(m.meta.iter().map(|&(_, v)| Cell::Real(v, 2)));
    cells.push(Cell::Empty);
    t.push(cells);
    t
}
