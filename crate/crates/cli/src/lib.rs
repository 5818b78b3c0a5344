//! Command-line front end: scenario validation, simulation runs, policy
//! comparison, and the standalone checkers.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rescon::analysis::{is_sarymsakov, StochasticMatrix};
use rescon::graph::{check_r_robust, check_rs_robust, Digraph};
use rescon::optimization::{check_redundancy, GridBox};
use rescon::scenario::{parse_override, read_config, Scenario, ValidationReport};
use rescon::simulator::{run_with_sink, CsvTraceWriter, RunOptions, RunSummary};
use rescon::Policy;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
/// A checker ran and the property does not hold.
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rescon::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot encode output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_runtime() => EXIT_RUNTIME,
            CliError::Core(rescon::Error::Io(_) | rescon::Error::Csv(_)) => EXIT_IO,
            CliError::Core(_) => EXIT_VALIDATION,
            CliError::Io { .. } | CliError::Json(_) => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "rescon", version, about = "Resilient consensus and distributed optimization under agent and DoS attacks")]
pub struct Cli {
    /// Directory for traces, summaries and certificates.
    #[arg(long, global = true, env = "RESCON_OUT", default_value = "rescon-out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario file, or builtin:<name> for a bundled scenario.
    pub scenario: PathBuf,

    /// Override a documented scenario key, e.g. --set policy=zero-substitute.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario against every assumption and print the report.
    Validate(ScenarioArgs),
    /// Run a scenario and write its trace and summary.
    Run(ScenarioArgs),
    /// Run a scenario under both DoS policies and summarize the difference.
    Compare(ScenarioArgs),
    /// Exhaustively check r-robustness, or (r,s)-robustness with --s.
    CheckRobustness {
        /// Graph text file ("nodes N", "adversarial ...", "i <- j k ...").
        #[arg(long, conflicts_with = "scenario")]
        graph: Option<PathBuf>,
        /// Take the graph from a scenario instead.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: Option<usize>,
    },
    /// Grid-oracle check that the scenario's benign costs are r-redundant.
    CheckRedundancy {
        scenario: PathBuf,
        #[arg(long)]
        r: usize,
        /// Grid spacing.
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
        /// Lower corner of the search cube.
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        lo: f64,
        /// Upper corner of the search cube.
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        hi: f64,
    },
    /// Exhaustively check whether a row-stochastic matrix is Sarymsakov.
    CheckSarymsakov {
        /// Dense matrix rows, one per line.
        matrix: PathBuf,
    },
}

/// Outcome of a command: exit status plus the lines printed to stdout.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(path)
}

fn overrides(args: &ScenarioArgs) -> CliResult<Vec<(String, String)>> {
    args.overrides
        .iter()
        .map(|s| parse_override(s).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn load(args: &ScenarioArgs) -> CliResult<Scenario> {
    let cfg = read_config(&args.scenario, &overrides(args)?)?;
    Ok(Scenario::from_config(cfg)?)
}

fn stem(s: &Scenario) -> String {
    if s.config.name.is_empty() {
        "scenario".into()
    } else {
        s.config.name.clone()
    }
}

#[derive(Serialize)]
struct RunDocument {
    scenario: String,
    digest: String,
    summary: RunSummary,
    validation: ValidationReport,
    diameter_series: Vec<Vec<f64>>,
    cost_series: Vec<Option<f64>>,
    trace: String,
}

fn run_to_files(s: &Scenario, out: &Path, tag: &str) -> CliResult<RunDocument> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let trace_path = out.join(format!("{tag}.trace.csv"));
    let file = File::create(&trace_path).map_err(io_err(&trace_path))?;
    let mut sink = CsvTraceWriter::new(BufWriter::new(file), s.dim())?;
    let outcome = run_with_sink(s, &RunOptions::default(), &mut sink)?;
    let summary = RunSummary::from_outcome(s.policy(), &outcome.metrics, &outcome.final_states, &outcome.digest);
    Ok(RunDocument {
        scenario: stem(s),
        digest: outcome.digest,
        summary,
        validation: s.report.clone(),
        diameter_series: outcome.metrics.iter().map(|m| m.diameter.clone()).collect(),
        cost_series: outcome.metrics.iter().map(|m| m.global_cost).collect(),
        trace: trace_path.display().to_string(),
    })
}

fn describe(summary: &RunSummary) -> String {
    format!(
        "{}: final diameter {:?}, validity {}, rounds to 1e-2 {}, agreement point {:?}",
        summary.policy.as_str(),
        summary.final_diameter,
        summary.validity,
        summary.rounds_to_tolerance.map_or("never".into(), |r| r.to_string()),
        summary.agreement_point
    )
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let mut stdout = String::new();
    let code = match &cli.command {
        Command::Validate(args) => {
            let cfg = read_config(&args.scenario, &overrides(args)?)?;
            let s = Scenario::build(cfg)?;
            stdout.push_str(&s.report.to_string());
            if s.report.passed() {
                stdout.push_str("scenario is valid\n");
                EXIT_OK
            } else {
                let ids: Vec<&str> = s.report.failures().map(|c| c.id.as_str()).collect();
                stdout.push_str(&format!("scenario rejected: {}\n", ids.join(", ")));
                EXIT_VALIDATION
            }
        }
        Command::Run(args) => {
            let s = load(args)?;
            let name = stem(&s);
            let doc = run_to_files(&s, &cli.out, &name)?;
            let path = write_json(&cli.out, &format!("{name}.summary.json"), &doc)?;
            stdout.push_str(&describe(&doc.summary));
            stdout.push('\n');
            stdout.push_str(&format!("trace: {}\nsummary: {}\n", doc.trace, path.display()));
            EXIT_OK
        }
        Command::Compare(args) => {
            let s = load(args)?;
            let name = stem(&s);
            let mut docs = Vec::new();
            for policy in [Policy::HoldLast, Policy::ZeroSubstitute] {
                let doc = run_to_files(&s.with_policy(policy), &cli.out, &format!("{name}.{}", policy.as_str()))?;
                stdout.push_str(&describe(&doc.summary));
                stdout.push('\n');
                docs.push(doc);
            }
            let path = write_json(&cli.out, &format!("{name}.compare.json"), &docs)?;
            stdout.push_str(&format!("report: {}\n", path.display()));
            EXIT_OK
        }
        Command::CheckRobustness { graph, scenario, r, s } => {
            let g = match (graph, scenario) {
                (Some(p), None) => {
                    let text = fs::read_to_string(p).map_err(io_err(p))?;
                    Digraph::parse_text(&text)?
                }
                (None, Some(p)) => Scenario::build(read_config(p, &[])?)?.graph,
                _ => return Err(CliError::Usage("give exactly one of --graph or --scenario".into())),
            };
            let cert = match s {
                Some(s) => check_rs_robust(&g, *r, *s)?,
                None => check_r_robust(&g, *r)?,
            };
            let path = write_json(&cli.out, "robustness.json", &cert)?;
            let what = match s {
                Some(s) => format!("({r}, {s})-robust"),
                None => format!("{r}-robust"),
            };
            if cert.holds {
                stdout.push_str(&format!("graph is {what}\n"));
            } else {
                let (a, b) = cert.witness.clone().unwrap_or_default();
                stdout.push_str(&format!("graph is not {what}; violating pair {a:?} / {b:?}\n"));
            }
            stdout.push_str(&format!("certificate: {}\n", path.display()));
            if cert.holds {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            }
        }
        Command::CheckRedundancy {
            scenario,
            r,
            resolution,
            lo,
            hi,
        } => {
            let s = Scenario::build(read_config(scenario, &[])?)?;
            let costs = s.benign_costs();
            if costs.is_empty() {
                return Err(CliError::Usage("scenario defines no benign cost functions".into()));
            }
            let bounds = GridBox::cube(s.dim(), *lo, *hi);
            let holds = check_redundancy(&costs, *r, &bounds, *resolution)?;
            #[derive(Serialize)]
            struct Cert {
                r: usize,
                functions: usize,
                resolution: f64,
                lo: f64,
                hi: f64,
                holds: bool,
            }
            let cert = Cert {
                r: *r,
                functions: costs.len(),
                resolution: *resolution,
                lo: *lo,
                hi: *hi,
                holds,
            };
            let path = write_json(&cli.out, "redundancy.json", &cert)?;
            stdout.push_str(&format!(
                "{} benign costs are {}{r}-redundant on [{lo}, {hi}]^{}\ncertificate: {}\n",
                costs.len(),
                if holds { "" } else { "not " },
                s.dim(),
                path.display()
            ));
            if holds {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            }
        }
        Command::CheckSarymsakov { matrix } => {
            let text = fs::read_to_string(matrix).map_err(io_err(matrix))?;
            let a = StochasticMatrix::parse_text(&text)?;
            let report = is_sarymsakov(&a)?;
            let path = write_json(&cli.out, "sarymsakov.json", &report)?;
            match &report.witness {
                None => stdout.push_str("matrix is Sarymsakov\n"),
                Some((v1, v2)) => stdout.push_str(&format!("matrix is not Sarymsakov; violating pair {v1:?} / {v2:?}\n")),
            }
            stdout.push_str(&format!("certificate: {}\n", path.display()));
            if report.holds {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            }
        }
    };
    Ok(Outcome { code, stdout })
}
