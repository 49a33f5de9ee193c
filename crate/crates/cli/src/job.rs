//! Command-line and config-file parsing into a validated [`JobSpec`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use aoi_core::{Scheme, ServiceDistribution};
use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::grid::parse_grid;

#[derive(Debug, Parser)]
#[command(
    name = "aoi-wait",
    version,
    about = "Average and peak Age of Information of M/GI/1/1 and M/GI/1/2* queues with waiting before service",
    after_help = "Distributions: gamma:k=<f>,mu=<f> | invgauss:alpha=<f>,mu=<f> | exp:mu=<f> | det:c=<f>\n\
                  Grids: <f> | <f>,<f>,... | start:stop:count | log:start:stop:count\n\
                  Exit codes: 0 success, 2 usage error, 3 numerical error, 4 I/O error"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Closed-form average AoI and average peak AoI at one point.
    Analytic(RawArgs),
    /// Discrete-event simulation at one point.
    Simulate(RawArgs),
    /// Optimal waiting times for each rate in --lambda.
    Optimize(RawArgs),
    /// Both metrics over the grid --lambda × --eps-i × --eps-b.
    Sweep(RawArgs),
    /// Average AoI against average peak AoI along waiting-time grids.
    Tradeoff(RawArgs),
}

/// Every flag is kept as text so values from a config file can fill in
/// whatever the command line leaves out.
#[derive(Debug, Clone, Default, Args)]
struct RawArgs {
    /// Packet management scheme: mg11 or mg12star.
    #[arg(long)]
    scheme: Option<String>,
    /// Service-time distribution.
    #[arg(long)]
    dist: Option<String>,
    /// Arrival rate, or a grid of rates.
    #[arg(long)]
    lambda: Option<String>,
    /// Wait after an idle period, or a grid.
    #[arg(long = "eps-i")]
    eps_i: Option<String>,
    /// Wait after a busy period (mg12star only), or a grid.
    #[arg(long = "eps-b")]
    eps_b: Option<String>,
    /// Simulated arrivals per run [default: 1000000]; with sweep, switches
    /// the rows from analytic to simulation.
    #[arg(long)]
    packets: Option<String>,
    /// Master seed [default: 1].
    #[arg(long)]
    seed: Option<String>,
    /// Batches for batch-means standard errors [default: 20].
    #[arg(long)]
    batches: Option<String>,
    /// Weight of average AoI in the objective [default: 1].
    #[arg(long)]
    w1: Option<String>,
    /// Weight of average peak AoI in the objective [default: 0].
    #[arg(long)]
    w2: Option<String>,
    /// Output CSV path [default: standard output].
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for sweep points [default: available cores].
    #[arg(long)]
    jobs: Option<String>,
    /// key=value file supplying defaults for any of the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write every simulation event to this CSV (simulate only).
    #[arg(long = "dump-trajectory")]
    dump_trajectory: Option<String>,
}

const KEYS: [&str; 13] = [
    "scheme",
    "dist",
    "lambda",
    "eps_i",
    "eps_b",
    "packets",
    "seed",
    "batches",
    "w1",
    "w2",
    "out",
    "jobs",
    "dump_trajectory",
];

impl RawArgs {
    fn get(&self, key: &str) -> Option<&String> {
        match key {
            "scheme" => self.scheme.as_ref(),
            "dist" => self.dist.as_ref(),
            "lambda" => self.lambda.as_ref(),
            "eps_i" => self.eps_i.as_ref(),
            "eps_b" => self.eps_b.as_ref(),
            "packets" => self.packets.as_ref(),
            "seed" => self.seed.as_ref(),
            "batches" => self.batches.as_ref(),
            "w1" => self.w1.as_ref(),
            "w2" => self.w2.as_ref(),
            "out" => self.out.as_ref(),
            "jobs" => self.jobs.as_ref(),
            "dump_trajectory" => self.dump_trajectory.as_ref(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analytic,
    Simulate,
    Optimize,
    Sweep,
    Tradeoff,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Simulate => "simulate",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::Tradeoff => "tradeoff",
        }
    }

    /// Keys a command reads; anything else on its command line is an error.
    fn accepts(self, key: &str) -> bool {
        let common = ["scheme", "dist", "lambda", "out"];
        if common.contains(&key) {
            return true;
        }
        let extra: &[&str] = match self {
            Command::Analytic => &["eps_i", "eps_b"],
            Command::Simulate => &[
                "eps_i",
                "eps_b",
                "packets",
                "seed",
                "batches",
                "dump_trajectory",
            ],
            Command::Optimize => &["w1", "w2"],
            Command::Sweep => &["eps_i", "eps_b", "packets", "seed", "batches", "jobs"],
            Command::Tradeoff => &["eps_i", "eps_b"],
        };
        extra.contains(&key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub scheme: Scheme,
    pub dist: ServiceDistribution,
    pub lambda: Vec<f64>,
    pub eps_i: Vec<f64>,
    /// `[0]` for mg11.
    pub eps_b: Vec<f64>,
    pub w1: f64,
    pub w2: f64,
    /// Set only when given; sweep uses it to select simulation.
    pub packets: Option<u64>,
    pub seed: u64,
    pub batches: usize,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub dump_trajectory: Option<PathBuf>,
}

impl JobSpec {
    pub fn packets_or_default(&self) -> u64 {
        self.packets.unwrap_or(1_000_000)
    }
}

/// Parses `argv` (program name first). Config-file values apply to any
/// flag not given on the command line.
pub fn parse_job<I, T>(argv: I) -> CliResult<JobSpec>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;
    let (command, raw) = match cli.command {
        CommandArgs::Analytic(a) => (Command::Analytic, a),
        CommandArgs::Simulate(a) => (Command::Simulate, a),
        CommandArgs::Optimize(a) => (Command::Optimize, a),
        CommandArgs::Sweep(a) => (Command::Sweep, a),
        CommandArgs::Tradeoff(a) => (Command::Tradeoff, a),
    };
    for key in KEYS {
        if raw.get(key).is_some() && !command.accepts(key) {
            return Err(CliError::Usage(format!(
                "--{} is not used by `{}`",
                key.replace('_', "-"),
                command.name()
            )));
        }
    }
    let config = match &raw.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    let lookup = |key: &str| -> Option<String> {
        raw.get(key).cloned().or_else(|| {
            if command.accepts(key) {
                config.get(key).cloned()
            } else {
                None
            }
        })
    };
    build(command, &lookup)
}

fn build(command: Command, lookup: &dyn Fn(&str) -> Option<String>) -> CliResult<JobSpec> {
    let require = |key: &str| {
        lookup(key).ok_or_else(|| {
            CliError::Usage(format!(
                "`{}` needs --{}",
                command.name(),
                key.replace('_', "-")
            ))
        })
    };
    let scheme_text = require("scheme")?;
    let scheme = Scheme::from_str(&scheme_text).map_err(|_| {
        CliError::Usage(format!(
            "--scheme `{scheme_text}`: expected mg11 or mg12star"
        ))
    })?;
    let dist_text = require("dist")?;
    let dist = ServiceDistribution::from_str(&dist_text)
        .map_err(|e| CliError::Usage(format!("--dist `{dist_text}`: {e}")))?;

    let single_point = matches!(command, Command::Analytic | Command::Simulate);
    let grid = |key: &str, default: Option<&str>| -> CliResult<Vec<f64>> {
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match (lookup(key), default) {
            (Some(t), _) => t,
            (None, Some(d)) => d.to_string(),
            (None, None) => {
                return Err(CliError::Usage(format!(
                    "`{}` needs {flag}",
                    command.name()
                )))
            }
        };
        let values = parse_grid(&flag, &text)?;
        if single_point && values.len() != 1 {
            return Err(CliError::Usage(format!(
                "{flag} `{text}`: `{}` takes a single value; use sweep for grids",
                command.name()
            )));
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(CliError::Usage(format!("{flag} `{text}`: {v} is negative")));
        }
        Ok(values)
    };

    let lambda = grid("lambda", None)?;
    if let Some(v) = lambda.iter().find(|v| **v <= 0.0) {
        return Err(CliError::Usage(format!("--lambda: {v} is not positive")));
    }
    if command == Command::Tradeoff && lambda.len() != 1 {
        return Err(CliError::Usage("`tradeoff` takes a single --lambda".into()));
    }

    let eps_i = match command {
        Command::Optimize => vec![0.0],
        Command::Tradeoff => grid("eps_i", None)?,
        _ => grid("eps_i", Some("0"))?,
    };
    let eps_b = match scheme {
        Scheme::Mg11 => {
            if let Some(text) = lookup("eps_b") {
                return Err(CliError::Usage(format!(
                    "--eps-b `{text}` cannot be used with --scheme mg11"
                )));
            }
            vec![0.0]
        }
        Scheme::Mg12Star if command == Command::Optimize => vec![0.0],
        Scheme::Mg12Star => grid("eps_b", Some("0"))?,
    };

    let parse_num = |key: &str, default: &str| -> CliResult<f64> {
        let text = lookup(key).unwrap_or_else(|| default.to_string());
        text.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| {
                CliError::Usage(format!("--{key} `{text}`: expected a non-negative number"))
            })
    };
    let w1 = parse_num("w1", "1")?;
    let w2 = parse_num("w2", "0")?;
    if w1 + w2 <= 0.0 {
        return Err(CliError::Usage("--w1 and --w2 cannot both be zero".into()));
    }

    let parse_int = |key: &str| -> CliResult<Option<u64>> {
        match lookup(key) {
            None => Ok(None),
            Some(text) => text.trim().parse::<u64>().map(Some).map_err(|_| {
                CliError::Usage(format!(
                    "--{} `{text}`: expected a non-negative integer",
                    key.replace('_', "-")
                ))
            }),
        }
    };
    let packets = parse_int("packets")?;
    let seed = parse_int("seed")?.unwrap_or(1);
    let batches = parse_int("batches")?.unwrap_or(20) as usize;
    let jobs = match parse_int("jobs")? {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => n as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };

    Ok(JobSpec {
        command,
        scheme,
        dist,
        lambda,
        eps_i,
        eps_b,
        w1,
        w2,
        packets,
        seed,
        batches,
        out: lookup("out").map(PathBuf::from),
        jobs,
        dump_trajectory: lookup("dump_trajectory").map(PathBuf::from),
    })
}

/// Reads `key = value` lines; `#` starts a comment. Keys may use `-` or
/// `_` (`eps-i` and `eps_i` are the same key).
pub fn read_config(path: &std::path::Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text).map_err(|msg| CliError::Usage(format!("{}: {msg}", path.display())))
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: `{line}` is not key=value", n + 1))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key `{}`", n + 1, key));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key `{key}`", n + 1));
        }
    }
    Ok(map)
}
