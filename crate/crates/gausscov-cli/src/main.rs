//! Command-line interface to the covariate-selection toolkit.
//!
//! Every subcommand reads flags (with a flat key=value config file as
//! fallback), runs one library entry point, and emits a [`report::Report`]
//! as CSV or JSON. Exit codes: 0 success, 2 usage error, 3 data error,
//! 4 numeric failure.

mod config;
mod ingest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gausscov::extensions::{kl_stepwise, robust_stepwise, ExtSelectionConfig, ExtSelectionResult};
use gausscov::featuregen::{interactions, lag_matrix, trig_basis, trig_period};
use gausscov::graphs::{dependency_graph, GraphConfig};
use gausscov::montecarlo::{
    correlated_error_study, fsimords, random_graph_bench, tutorial1, CorrStudyConfig,
    GraphBenchConfig, SimConfig, SimReport,
};
use gausscov::selection::{
    all_subsets, repeated_stepwise, stepwise, SelectionConfig, SelectionResult,
};
use gausscov::{CovariateMatrix, Dataset, Prob};

use config::Config;
use ingest::{ingest_csv, ingest_matrix, IngestOptions, NaPolicy};
use report::{Cell, Report, Table};

/// Failure carrying the process exit code.
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<gausscov::Error> for CliError {
    fn from(e: gausscov::Error) -> Self {
        use gausscov::Error;
        let code = match &e {
            Error::Data(_) | Error::CapExceeded { .. } => 3,
            Error::Domain(_)
            | Error::Collinear { .. }
            | Error::NonConvergence { .. }
            | Error::Separation(_) => 4,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn usage_err(message: String) -> CliError {
    CliError { code: 2, message }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gausscov",
    version,
    about = "Covariate selection through exact Gaussian-covariate P-values"
)]
struct Cli {
    /// Flat key=value file supplying defaults for long flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads; GAUSSCOV_THREADS or every core when absent.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

/// Input-file flags shared by the dataset-driven subcommands.
#[derive(Args)]
struct DataArgs {
    /// Input CSV file.
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Response column: a name or a zero-based position.
    #[arg(long, value_name = "COLUMN")]
    target: Option<String>,
    /// Field delimiter of the input file.
    #[arg(long, value_name = "CHAR")]
    delimiter: Option<char>,
    /// Whether the first row holds column names.
    #[arg(long, value_name = "BOOL")]
    header: Option<bool>,
    /// Missing-value policy.
    #[arg(long, value_enum)]
    na: Option<NaPolicy>,
    /// Prepend a constant intercept column.
    #[arg(long, value_name = "BOOL")]
    intercept: Option<bool>,
}

impl DataArgs {
    fn options(&self, cfg: &Config) -> Result<IngestOptions, CliError> {
        let na = match self.na {
            Some(p) => p,
            None => match cfg.get::<String>("na")?.as_deref() {
                None => NaPolicy::Error,
                Some("error") => NaPolicy::Error,
                Some("drop") => NaPolicy::Drop,
                Some(other) => {
                    return Err(usage_err(format!("config key na: unknown policy {other:?}")))
                }
            },
        };
        Ok(IngestOptions {
            delimiter: cfg.resolve(self.delimiter, "delimiter", ',')?,
            header: cfg.resolve(self.header, "header", true)?,
            na,
            intercept: cfg.resolve(self.intercept, "intercept", true)?,
        })
    }

    fn dataset(&self, cfg: &Config) -> Result<Dataset, CliError> {
        let target = match &self.target {
            Some(t) => t.clone(),
            None => cfg
                .get::<String>("target")?
                .ok_or_else(|| usage_err("missing --target".into()))?,
        };
        ingest_csv(&self.data, &target, &self.options(cfg)?)
    }
}

/// Selection tuning flags shared by select and repeat.
#[derive(Args)]
struct SelectFlags {
    /// Acceptance threshold for candidate P-values.
    #[arg(long)]
    alpha: Option<f64>,
    /// Order-statistic rank: judge candidates against the nu-th best
    /// noise column.
    #[arg(long)]
    nu: Option<usize>,
    /// Covariates gathered per block; 1 is plain stepwise.
    #[arg(long)]
    kmax: Option<usize>,
    /// Stop after this many accepted covariates.
    #[arg(long, value_name = "N")]
    max_steps: Option<usize>,
}

impl SelectFlags {
    fn config(&self, cfg: &Config) -> Result<SelectionConfig, CliError> {
        let max_steps = match self.max_steps {
            Some(m) => Some(m),
            None => cfg.get("max-steps")?,
        };
        Ok(SelectionConfig {
            alpha: check_alpha(cfg.resolve(self.alpha, "alpha", 0.01)?)?,
            nu: check_nu(cfg.resolve(self.nu, "nu", 1)?)?,
            kmax: check_kmax(cfg.resolve(self.kmax, "kmax", 1)?)?,
            max_steps,
            pool_size_override: None,
        })
    }
}

/// Simulation size flags shared by the Monte-Carlo subcommands.
#[derive(Args)]
struct SimFlags {
    /// Observations per replication.
    #[arg(long)]
    n: Option<usize>,
    /// Covariate columns per replication.
    #[arg(long)]
    q: Option<usize>,
    /// Number of replications.
    #[arg(long)]
    nsim: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nu: Option<usize>,
    /// Seed fixing the whole run.
    #[arg(long)]
    seed: Option<u64>,
}

impl SimFlags {
    fn config(&self, cfg: &Config, base: SimConfig) -> Result<SimConfig, CliError> {
        Ok(SimConfig {
            n: cfg.resolve(self.n, "n", base.n)?,
            q: cfg.resolve(self.q, "q", base.q)?,
            nsim: cfg.resolve(self.nsim, "nsim", base.nsim)?,
            alpha: check_alpha(cfg.resolve(self.alpha, "alpha", base.alpha)?)?,
            nu: check_nu(cfg.resolve(self.nu, "nu", base.nu)?)?,
            seed: cfg.resolve(self.seed, "seed", base.seed)?,
            ..base
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Stepwise covariate selection on a dataset.
    Select {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        sel: SelectFlags,
    },
    /// All maximal significant subsets by exhaustive search.
    Subsets {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        nu: Option<usize>,
        /// Refuse to enumerate more than this many columns.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Repeated stepwise selection over a shrinking pool.
    Repeat {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        sel: SelectFlags,
        /// Stop after this many rounds.
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Dependency graph: each column regressed on all the others.
    Graph {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        nu: Option<usize>,
        /// Per-node threshold; alpha divided by the node count when absent.
        #[arg(long, value_name = "ALPHA")]
        per_node_alpha: Option<f64>,
        /// Keep edge directions instead of symmetrizing.
        #[arg(long)]
        directed: bool,
        /// Repeated selection per node.
        #[arg(long)]
        repeated: bool,
    },
    /// Equivalence region of the full least-squares fit.
    Equiv {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// False-positive calibration on pure-noise designs.
    Fpsim {
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Planted-support recovery benchmark with Toeplitz covariates.
    SimTutorial1 {
        #[command(flatten)]
        sim: SimFlags,
        /// Planted support size.
        #[arg(long)]
        p: Option<usize>,
        /// Signal amplitude; coefficients are amplitude divided by sqrt(n).
        #[arg(long)]
        amplitude: Option<f64>,
        /// Neighbor correlation of the Toeplitz design.
        #[arg(long)]
        rho: Option<f64>,
        /// Include an intercept in every replication.
        #[arg(long, value_name = "BOOL")]
        intercept: Option<bool>,
    },
    /// Edge recovery on a simulated random geometric graph.
    SimGraph {
        /// Samples drawn from the graphical model.
        #[arg(long)]
        n: Option<usize>,
        /// Nodes, placed uniformly on the unit square.
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        nu: Option<usize>,
        #[arg(long, value_name = "ALPHA")]
        per_node_alpha: Option<f64>,
        /// Edge probability at distance d is exp(-(scale*d)^2/2).
        #[arg(long)]
        kernel_scale: Option<f64>,
        /// Off-diagonal precision weight on edges.
        #[arg(long)]
        coupling: Option<f64>,
        /// Maximum node degree in the sampled graph.
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Frequency selection under moving-average errors.
    SimCorr {
        /// Series length per replication.
        #[arg(long)]
        n: Option<usize>,
        /// Highest trigonometric frequency offered.
        #[arg(long)]
        max_freq: Option<usize>,
        #[arg(long)]
        nsim: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        nu: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Error standard deviation.
        #[arg(long)]
        noise_scale: Option<f64>,
    },
    /// Stepwise selection under the Huber loss.
    RobustSelect {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        alpha: Option<f64>,
        /// Huber tuning constant.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_name = "N")]
        max_steps: Option<usize>,
    },
    /// Stepwise logistic selection by Kullback-Leibler discrepancy.
    KlSelect {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_name = "N")]
        max_steps: Option<usize>,
    },
    /// Feature generation: interaction, trigonometric, or lag designs.
    Features {
        /// Input CSV for interaction or lag designs.
        #[arg(long, value_name = "FILE")]
        data: Option<PathBuf>,
        #[arg(long, value_name = "COLUMN")]
        target: Option<String>,
        #[arg(long, value_name = "CHAR")]
        delimiter: Option<char>,
        #[arg(long, value_name = "BOOL")]
        header: Option<bool>,
        #[arg(long, value_enum)]
        na: Option<NaPolicy>,
        #[arg(long, value_name = "BOOL")]
        intercept: Option<bool>,
        /// Interaction order of the monomial design.
        #[arg(long)]
        order: Option<usize>,
        /// Refuse designs wider than this many columns.
        #[arg(long)]
        cap: Option<usize>,
        /// Emit a trigonometric basis with this many rows instead.
        #[arg(long, value_name = "ROWS")]
        trig_rows: Option<usize>,
        /// Highest frequency of the trigonometric basis.
        #[arg(long)]
        max_freq: Option<usize>,
        /// Build a lagged design up to this lag instead.
        #[arg(long)]
        lags: Option<usize>,
    },
}

fn check_alpha(alpha: f64) -> Result<f64, CliError> {
    if alpha.is_finite() && 0.0 < alpha && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(usage_err(format!("--alpha must be in (0, 1), got {alpha}")))
    }
}

fn check_nu(nu: usize) -> Result<usize, CliError> {
    if nu >= 1 {
        Ok(nu)
    } else {
        Err(usage_err("--nu must be at least 1".into()))
    }
}

fn check_kmax(kmax: usize) -> Result<usize, CliError> {
    if (1..=12).contains(&kmax) {
        Ok(kmax)
    } else {
        Err(usage_err(format!("--kmax must be in 1..=12, got {kmax}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn env_threads() -> Result<Option<usize>, CliError> {
    match std::env::var("GAUSSCOV_THREADS") {
        Err(_) => Ok(None),
        Ok(raw) => raw.parse().map(Some).map_err(|_| {
            usage_err(format!("GAUSSCOV_THREADS: cannot parse {raw:?}"))
        }),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::empty(),
    };
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match cfg.get::<usize>("threads")? {
            Some(t) => Some(t),
            None => env_threads()?,
        },
    };
    if let Some(t) = threads.filter(|&t| t > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .ok();
    }
    let format = match cli.format {
        Some(f) => f,
        None => cfg.get::<Format>("format")?.unwrap_or(Format::Csv),
    };

    let report = dispatch(&cli.command, &cfg)?;
    let text = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError {
            code: 3,
            message: format!("cannot write {}: {e}", path.display()),
        })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(command: &Command, cfg: &Config) -> Result<Report, CliError> {
    match command {
        Command::Select { data, sel } => {
            let d = data.dataset(cfg)?;
            let res = stepwise(&d, &sel.config(cfg)?)?;
            Ok(selection_report(&res))
        }
        Command::Subsets {
            data,
            alpha,
            nu,
            cap,
        } => {
            let d = data.dataset(cfg)?;
            let alpha = check_alpha(cfg.resolve(*alpha, "alpha", 0.01)?)?;
            let nu = check_nu(cfg.resolve(*nu, "nu", 1)?)?;
            let cap = cfg.resolve(*cap, "cap", 25)?;
            let records = all_subsets(&d, alpha, nu, cap)?;
            let mut subsets = Table::new("subsets", vec!["subset", "size", "rss", "members"]);
            let mut members = Table::new(
                "members",
                vec![
                    "subset",
                    "covariate",
                    "name",
                    "adjusted_pvalue",
                    "standard_pvalue",
                ],
            );
            for (s, rec) in records.iter().enumerate() {
                let ids: Vec<String> = rec.members.iter().map(|m| m.to_string()).collect();
                subsets.push(vec![
                    Cell::from(s),
                    Cell::from(rec.members.len()),
                    Cell::from(rec.rss),
                    Cell::from(ids.join(" ")),
                ]);
                for m in &rec.pvalues {
                    members.push(vec![
                        Cell::from(s),
                        Cell::from(m.index),
                        Cell::from(m.name.clone()),
                        Cell::from(m.adjusted.value()),
                        Cell::from(m.standard.value()),
                    ]);
                }
            }
            Ok(Report::new(vec![subsets, members]))
        }
        Command::Repeat { data, sel, rounds } => {
            let d = data.dataset(cfg)?;
            let max_rounds = match rounds {
                Some(r) => Some(*r),
                None => cfg.get("rounds")?,
            };
            let rounds = repeated_stepwise(&d, &sel.config(cfg)?, max_rounds)?;
            let mut table = Table::new(
                "rounds",
                vec!["round", "covariate", "name", "pvalue", "rss", "ratio"],
            );
            let mut members = Table::new(
                "members",
                vec![
                    "round",
                    "covariate",
                    "name",
                    "adjusted_pvalue",
                    "standard_pvalue",
                    "rss_without",
                ],
            );
            for round in &rounds {
                for row in &round.result.trace {
                    table.push(vec![
                        Cell::from(round.round),
                        Cell::from(row.index),
                        Cell::from(row.name.clone()),
                        Cell::from(row.pvalue.value()),
                        Cell::from(row.rss),
                        Cell::from(row.ratio),
                    ]);
                }
                for m in &round.result.members {
                    members.push(vec![
                        Cell::from(round.round),
                        Cell::from(m.index),
                        Cell::from(m.name.clone()),
                        Cell::from(m.adjusted.value()),
                        Cell::from(m.standard.value()),
                        Cell::from(m.rss_without),
                    ]);
                }
            }
            Ok(Report::new(vec![table, members]))
        }
        Command::Graph {
            data,
            alpha,
            nu,
            per_node_alpha,
            directed,
            repeated,
        } => {
            let x = ingest_matrix(&data.data, &data.options(cfg)?)?;
            let gcfg = GraphConfig {
                alpha: check_alpha(cfg.resolve(*alpha, "alpha", 0.01)?)?,
                per_node_alpha: *per_node_alpha,
                nu: check_nu(cfg.resolve(*nu, "nu", 1)?)?,
                repeated: *repeated,
                symmetrize: !directed,
                max_steps: None,
            };
            let graph = dependency_graph(&x, &gcfg)?;
            let mut summary = Table::new(
                "summary",
                vec!["nodes", "alpha_effective", "directed_edges", "pairs"],
            );
            summary.push(vec![
                Cell::from(graph.nodes),
                Cell::from(graph.alpha_effective),
                Cell::from(graph.edges.len()),
                Cell::from(graph.edge_pairs().len()),
            ]);
            let mut edges = Table::new(
                "edges",
                vec!["from", "from_name", "to", "to_name", "pvalue"],
            );
            for e in &graph.edges {
                edges.push(vec![
                    Cell::from(e.from),
                    Cell::from(graph.names[e.from].clone()),
                    Cell::from(e.to),
                    Cell::from(graph.names[e.to].clone()),
                    Cell::from(e.pvalue),
                ]);
            }
            let mut pairs = Table::new("pairs", vec!["a", "b"]);
            for (a, b) in graph.edge_pairs() {
                pairs.push(vec![Cell::from(a), Cell::from(b)]);
            }
            Ok(Report::new(vec![summary, edges, pairs]))
        }
        Command::Equiv { data, alpha } => {
            let d = data.dataset(cfg)?;
            let alpha = check_alpha(cfg.resolve(*alpha, "alpha", 0.05)?)?;
            let region = gausscov::equivalence::equivalence_region(
                &d,
                Prob::new(alpha).map_err(CliError::from)?,
            )?;
            let mut summary = Table::new(
                "region",
                vec!["n", "q", "alpha", "rss_full", "radius"],
            );
            summary.push(vec![
                Cell::from(region.n),
                Cell::from(region.q),
                Cell::from(region.alpha),
                Cell::from(region.rss_full),
                Cell::from(region.radius),
            ]);
            let mut coef = Table::new("coefficients", vec!["covariate", "name", "beta_ls"]);
            for (j, b) in region.beta_ls.iter().enumerate() {
                coef.push(vec![
                    Cell::from(j),
                    Cell::from(d.x().name(j).to_string()),
                    Cell::from(*b),
                ]);
            }
            Ok(Report::new(vec![summary, coef]))
        }
        Command::Fpsim { sim } => {
            let scfg = sim.config(cfg, SimConfig::default())?;
            let rep = fsimords(&scfg)?;
            Ok(sim_report(&rep, false))
        }
        Command::SimTutorial1 {
            sim,
            p,
            amplitude,
            rho,
            intercept,
        } => {
            let base = SimConfig::toeplitz_benchmark();
            let mut scfg = sim.config(cfg, base)?;
            scfg.p = cfg.resolve(*p, "p", scfg.p)?;
            scfg.amplitude = cfg.resolve(*amplitude, "amplitude", scfg.amplitude)?;
            scfg.rho = cfg.resolve(*rho, "rho", scfg.rho)?;
            scfg.intercept = cfg.resolve(*intercept, "intercept", scfg.intercept)?;
            let rep = tutorial1(&scfg)?;
            Ok(sim_report(&rep, true))
        }
        Command::SimGraph {
            n,
            q,
            alpha,
            nu,
            per_node_alpha,
            kernel_scale,
            coupling,
            max_degree,
            seed,
        } => {
            let base = GraphBenchConfig::default();
            let gcfg = GraphBenchConfig {
                n: cfg.resolve(*n, "n", base.n)?,
                q: cfg.resolve(*q, "q", base.q)?,
                alpha: check_alpha(cfg.resolve(*alpha, "alpha", base.alpha)?)?,
                nu: check_nu(cfg.resolve(*nu, "nu", base.nu)?)?,
                per_node_alpha: *per_node_alpha,
                kernel_scale: cfg.resolve(*kernel_scale, "kernel-scale", base.kernel_scale)?,
                coupling: cfg.resolve(*coupling, "coupling", base.coupling)?,
                max_degree: match max_degree {
                    Some(d) => Some(*d),
                    None => cfg.get("max-degree")?,
                },
                seed: cfg.resolve(*seed, "seed", base.seed)?,
            };
            let bench = random_graph_bench(&gcfg)?;
            let mut summary = Table::new(
                "summary",
                vec![
                    "true_edges",
                    "found_edges",
                    "false_positives",
                    "false_negatives",
                ],
            );
            summary.push(vec![
                Cell::from(bench.true_edges),
                Cell::from(bench.found_edges),
                Cell::from(bench.false_positives),
                Cell::from(bench.false_negatives),
            ]);
            Ok(Report::new(vec![summary]))
        }
        Command::SimCorr {
            n,
            max_freq,
            nsim,
            alpha,
            nu,
            seed,
            noise_scale,
        } => {
            let base = CorrStudyConfig::default();
            let ccfg = CorrStudyConfig {
                n: cfg.resolve(*n, "n", base.n)?,
                max_freq: cfg.resolve(*max_freq, "max-freq", base.max_freq)?,
                nsim: cfg.resolve(*nsim, "nsim", base.nsim)?,
                alpha: check_alpha(cfg.resolve(*alpha, "alpha", base.alpha)?)?,
                nu: check_nu(cfg.resolve(*nu, "nu", base.nu)?)?,
                seed: cfg.resolve(*seed, "seed", base.seed)?,
                noise_scale: cfg.resolve(*noise_scale, "noise-scale", base.noise_scale)?,
            };
            let cells = correlated_error_study(&ccfg)?;
            let mut table = Table::new(
                "cells",
                vec![
                    "signal",
                    "gamma",
                    "error_correlation",
                    "mean_selected",
                    "min",
                    "max",
                    "counts",
                ],
            );
            for cell in &cells {
                let counts: Vec<String> = cell.counts.iter().map(|c| c.to_string()).collect();
                table.push(vec![
                    Cell::from(cell.signal.clone()),
                    Cell::from(cell.gamma),
                    Cell::from(cell.error_corr),
                    Cell::from(cell.mean),
                    Cell::from(cell.min),
                    Cell::from(cell.max),
                    Cell::from(counts.join(" ")),
                ]);
            }
            Ok(Report::new(vec![table]))
        }
        Command::RobustSelect {
            data,
            alpha,
            c,
            max_steps,
        } => {
            let d = data.dataset(cfg)?;
            let ecfg = ExtSelectionConfig {
                alpha: check_alpha(cfg.resolve(*alpha, "alpha", 0.01)?)?,
                c: cfg.resolve(*c, "c", 1.0)?,
                max_steps: match max_steps {
                    Some(m) => Some(*m),
                    None => cfg.get("max-steps")?,
                },
            };
            let res = robust_stepwise(&d, &ecfg)?;
            Ok(ext_selection_report(&res, "mean_huber_loss"))
        }
        Command::KlSelect {
            data,
            alpha,
            max_steps,
        } => {
            let d = data.dataset(cfg)?;
            let ecfg = ExtSelectionConfig {
                alpha: check_alpha(cfg.resolve(*alpha, "alpha", 0.01)?)?,
                c: 1.0,
                max_steps: match max_steps {
                    Some(m) => Some(*m),
                    None => cfg.get("max-steps")?,
                },
            };
            let res = kl_stepwise(&d, &ecfg)?;
            Ok(ext_selection_report(&res, "kl_discrepancy"))
        }
        Command::Features {
            data,
            target,
            delimiter,
            header,
            na,
            intercept,
            order,
            cap,
            trig_rows,
            max_freq,
            lags,
        } => features_report(
            cfg,
            FeatureArgs {
                data,
                target,
                delimiter: *delimiter,
                header: *header,
                na: *na,
                intercept: *intercept,
                order: *order,
                cap: *cap,
                trig_rows: *trig_rows,
                max_freq: *max_freq,
                lags: *lags,
            },
        ),
    }
}

fn selection_report(res: &SelectionResult) -> Report {
    let mut summary = Table::new(
        "summary",
        vec!["rss0", "q_pool", "selected", "termination"],
    );
    let ids: Vec<String> = res.selected().iter().map(|i| i.to_string()).collect();
    summary.push(vec![
        Cell::from(res.rss0),
        Cell::from(res.q_pool),
        Cell::from(ids.join(" ")),
        Cell::from(format!("{:?}", res.termination)),
    ]);
    let mut trace = Table::new(
        "trace",
        vec!["covariate", "name", "pvalue", "rss", "ratio"],
    );
    for row in &res.trace {
        trace.push(vec![
            Cell::from(row.index),
            Cell::from(row.name.clone()),
            Cell::from(row.pvalue.value()),
            Cell::from(row.rss),
            Cell::from(row.ratio),
        ]);
    }
    let mut members = Table::new(
        "members",
        vec![
            "covariate",
            "name",
            "adjusted_pvalue",
            "standard_pvalue",
            "rss_without",
        ],
    );
    for m in &res.members {
        members.push(vec![
            Cell::from(m.index),
            Cell::from(m.name.clone()),
            Cell::from(m.adjusted.value()),
            Cell::from(m.standard.value()),
            Cell::from(m.rss_without),
        ]);
    }
    Report::new(vec![summary, trace, members])
}

fn ext_selection_report(res: &ExtSelectionResult, objective: &str) -> Report {
    let mut summary = Table::new(
        "summary",
        vec!["objective0", "q_pool", "scale", "selected", "termination"],
    );
    let ids: Vec<String> = res.selected().iter().map(|i| i.to_string()).collect();
    summary.push(vec![
        Cell::from(res.objective0),
        Cell::from(res.q_pool),
        res.scale.map_or(Cell::from(""), Cell::from),
        Cell::from(ids.join(" ")),
        Cell::from(format!("{:?}", res.termination)),
    ]);
    let mut trace = Table::new(
        "trace",
        vec!["covariate", "name", "pvalue", objective],
    );
    for row in &res.trace {
        trace.push(vec![
            Cell::from(row.index),
            Cell::from(row.name.clone()),
            Cell::from(row.pvalue.value()),
            Cell::from(row.objective),
        ]);
    }
    Report::new(vec![summary, trace])
}

fn sim_report(rep: &SimReport, planted: bool) -> Report {
    let mut summary = Table::new(
        "summary",
        vec!["nsim", "mean_fp", "sd_fp", "mean_fn", "sd_fn", "p_zero_fp"],
    );
    summary.push(vec![
        Cell::from(rep.nsim),
        Cell::from(rep.mean_fp),
        Cell::from(rep.sd_fp),
        Cell::from(rep.mean_fn),
        Cell::from(rep.sd_fn),
        Cell::from(rep.p_zero_fp),
    ]);
    let mut histogram = Table::new("histogram", vec!["false_positives", "replications"]);
    for (count, reps) in rep.histogram.iter().enumerate() {
        histogram.push(vec![Cell::from(count), Cell::from(*reps)]);
    }
    let mut tables = vec![summary, histogram];
    if planted {
        let mut reps = Table::new("replications", vec!["rep", "fp", "fn", "selected"]);
        for r in &rep.reps {
            reps.push(vec![
                Cell::from(r.rep),
                Cell::from(r.fp),
                Cell::from(r.false_negatives),
                Cell::from(r.selected),
            ]);
        }
        tables.push(reps);
    }
    Report::new(tables)
}

struct FeatureArgs<'a> {
    data: &'a Option<PathBuf>,
    target: &'a Option<String>,
    delimiter: Option<char>,
    header: Option<bool>,
    na: Option<NaPolicy>,
    intercept: Option<bool>,
    order: Option<usize>,
    cap: Option<usize>,
    trig_rows: Option<usize>,
    max_freq: Option<usize>,
    lags: Option<usize>,
}

fn matrix_table(x: &CovariateMatrix, y: Option<(&str, &[f64])>) -> Table {
    let mut columns: Vec<String> = x.names().to_vec();
    if let Some((name, _)) = y {
        columns.push(name.to_string());
    }
    let mut table = Table::new("design", columns);
    for t in 0..x.n() {
        let mut row: Vec<Cell> = (0..x.q()).map(|j| Cell::from(x.column(j)[t])).collect();
        if let Some((_, values)) = y {
            row.push(Cell::from(values[t]));
        }
        table.push(row);
    }
    table
}

fn features_report(cfg: &Config, args: FeatureArgs) -> Result<Report, CliError> {
    let modes = [
        args.trig_rows.is_some(),
        args.lags.is_some(),
        args.order.is_some(),
    ];
    if modes.iter().filter(|&&m| m).count() > 1 {
        return Err(usage_err(
            "--order, --trig-rows, and --lags are mutually exclusive".into(),
        ));
    }

    if let Some(rows) = args.trig_rows {
        let max_freq = cfg.resolve(args.max_freq, "max-freq", rows / 2)?;
        let intercept = cfg.resolve(args.intercept, "intercept", true)?;
        let x = trig_basis(rows, max_freq, intercept)?;
        let mut periods = Table::new("periods", vec!["column", "name", "period"]);
        for j in 0..x.q() {
            periods.push(vec![
                Cell::from(j),
                Cell::from(x.name(j).to_string()),
                Cell::from(trig_period(rows, j)),
            ]);
        }
        return Ok(Report::new(vec![matrix_table(&x, None), periods]));
    }

    let data_args = DataArgs {
        data: args
            .data
            .clone()
            .ok_or_else(|| usage_err("missing --data".into()))?,
        target: args.target.clone(),
        delimiter: args.delimiter,
        header: args.header,
        na: args.na,
        intercept: args.intercept,
    };
    let d = data_args.dataset(cfg)?;

    let expanded = if let Some(max_lag) = args.lags {
        let series: Vec<(String, Vec<f64>)> = (0..d.q())
            .filter(|&j| !(d.x().has_intercept() && j == 0))
            .map(|j| (d.x().name(j).to_string(), d.x().column(j).to_vec()))
            .chain(std::iter::once(("y".to_string(), d.y().to_vec())))
            .collect();
        lag_matrix(&series, max_lag, "y", d.x().has_intercept())?
    } else {
        let order = cfg.resolve(args.order, "order", 2)?;
        let cap = cfg.resolve(args.cap, "cap", 100_000)?;
        interactions(&d, order, cap)?
    };
    let table = matrix_table(expanded.x(), Some(("target", expanded.y())));
    Ok(Report::new(vec![table]))
}
