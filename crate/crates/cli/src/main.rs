use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Command, FromArgMatches, Parser};
use convfpp::engine::Caps;
use convfpp::model::{ClockMode, TopologyKind};

use convfpp_cli::config::Settings;
use convfpp_cli::experiments::EXPERIMENTS;
use convfpp_cli::schema::{schema_path, write_schema};
use convfpp_cli::simulate::{simulate, SimulateOptions};
use convfpp_cli::sweep::{columns, run_sweep, SweepSpec, CAP_KEYS};
use convfpp_cli::HarnessError;

/// Flags shared by `sweep` and every experiment subcommand.
#[derive(Debug, Args)]
struct Common {
    /// Config file of key=value lines; repeated keys form a grid.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter value, repeatable; repeating a key adds a grid point.
    #[arg(short = 'p', long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV; a schema file is written next to it. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    confidence: Option<f64>,
    /// Caps as max_sites=N, max_events=N or horizon=T; comma separated or repeated.
    #[arg(long, value_delimiter = ',', value_name = "KEY=VALUE")]
    caps: Vec<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value = "lattice", value_parser = ["lattice", "tree"])]
    topology: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    rho: f64,
    /// Target depth or radius.
    #[arg(long, default_value_t = 20)]
    target: u32,
    #[arg(long, default_value = "static", value_parser = ["static", "resample"])]
    mode: String,
    /// Skip type 2 inside dead tree subtrees.
    #[arg(long)]
    prune: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trial index within the seed.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, value_delimiter = ',', value_name = "KEY=VALUE")]
    caps: Vec<String>,
    /// Stop printing events after this many lines.
    #[arg(long, default_value_t = 10_000)]
    max_lines: u64,
}

#[derive(Debug, Parser)]
struct SchemaArgs {
    /// Experiment name; all experiments when omitted.
    experiment: Option<String>,
    /// Write `<experiment>.schema.csv` files here instead of printing.
    #[arg(long)]
    dir: Option<PathBuf>,
}

fn command() -> Command {
    let mut cmd = Command::new("convfpp")
        .about("Two-type first passage percolation with conversion: simulations and estimators")
        .subcommand_required(true)
        .arg_required_else_help(true);
    cmd = cmd.subcommand(SimulateArgs::augment_args(
        Command::new("simulate").about("Run one trial and print every event"),
    ));
    cmd = cmd
        .subcommand(Common::augment_args(Command::new("sweep").about(
            "Run the sweep described by a config file; it must set `experiment`",
        )));
    cmd = cmd.subcommand(SchemaArgs::augment_args(
        Command::new("schema").about("Print or write the CSV schema of an experiment"),
    ));
    for e in EXPERIMENTS {
        let mut help = String::from("Parameters (-p key=value):\n");
        for p in e.params {
            let default = p
                .default
                .map(|d| format!(" [default: {d}]"))
                .unwrap_or(" [required]".into());
            help.push_str(&format!("  {:<14} {}{default}\n", p.name, p.doc));
        }
        cmd = cmd.subcommand(Common::augment_args(
            Command::new(e.name).about(e.about).after_help(help),
        ));
    }
    cmd
}

fn caps_from(pairs: &[String]) -> Result<Settings, HarnessError> {
    let s = Settings::from_pairs(pairs)?;
    if let Some(k) = s.keys().find(|k| !CAP_KEYS.contains(k)) {
        return Err(HarnessError::Validation(format!("unknown cap {k:?}")));
    }
    Ok(s)
}

fn settings(common: &Common, experiment: Option<&str>) -> Result<Settings, HarnessError> {
    let mut s = match &common.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    if let Some(name) = experiment {
        match s.get("experiment")? {
            Some(other) if other != name => {
                return Err(HarnessError::Validation(format!(
                    "config is for {other}, not {name}"
                )))
            }
            _ => s.set("experiment", name),
        }
    }
    s.override_with(&Settings::from_pairs(&common.params)?);
    s.override_with(&caps_from(&common.caps)?);
    if let Some(v) = common.seed {
        s.set("seed", v);
    }
    if let Some(v) = common.trials {
        s.set("trials", v);
    }
    if let Some(v) = common.workers {
        s.set("workers", v);
    }
    if let Some(v) = &common.out {
        s.set("out", v.display());
    }
    if let Some(v) = common.confidence {
        s.set("confidence", v);
    }
    Ok(s)
}

enum Done {
    Ok,
    Partial,
}

fn run_spec(spec: &SweepSpec) -> Result<Done, HarnessError> {
    let summary = match &spec.out {
        Some(path) => {
            write_schema(File::create(schema_path(path))?, &spec.columns())?;
            run_sweep(spec, BufWriter::new(File::create(path)?))?
        }
        None => run_sweep(spec, io::stdout().lock())?,
    };
    eprintln!(
        "{}: {} cells, {} failed, {} trials",
        spec.experiment.name, summary.cells, summary.failed, summary.trials
    );
    Ok(if summary.failed > 0 {
        Done::Partial
    } else {
        Done::Ok
    })
}

fn run_simulate(a: &SimulateArgs) -> Result<Done, HarnessError> {
    let c = caps_from(&a.caps)?;
    let d = Caps::default();
    let opts = SimulateOptions {
        topology: if a.topology == "tree" {
            TopologyKind::Tree
        } else {
            TopologyKind::Lattice
        },
        d: a.d,
        lambda: a.lambda,
        rho: a.rho,
        target: a.target,
        mode: if a.mode == "resample" {
            ClockMode::Resample
        } else {
            ClockMode::Static
        },
        prune: a.prune,
        seed: a.seed,
        trial: a.trial,
        caps: Caps {
            max_sites: c.get_parsed("max_sites")?.unwrap_or(d.max_sites),
            max_events: c.get_parsed("max_events")?.unwrap_or(d.max_events),
            horizon: c.get_parsed("horizon")?.unwrap_or(d.horizon),
        },
        max_lines: a.max_lines,
    };
    let mut out = BufWriter::new(io::stdout().lock());
    simulate(&opts, &mut out)?;
    out.flush()?;
    Ok(Done::Ok)
}

fn run_schema(a: &SchemaArgs) -> Result<Done, HarnessError> {
    let chosen: Vec<_> = match &a.experiment {
        Some(name) => vec![convfpp_cli::experiments::find(name)?],
        None => EXPERIMENTS.iter().collect(),
    };
    for e in chosen {
        match &a.dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                write_schema(
                    File::create(dir.join(format!("{}.schema.csv", e.name)))?,
                    &columns(e),
                )?;
            }
            None => write_schema(io::stdout().lock(), &columns(e))?,
        }
    }
    Ok(Done::Ok)
}

fn dispatch() -> Result<Done, HarnessError> {
    let matches = command().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    match name {
        "simulate" => {
            run_simulate(&SimulateArgs::from_arg_matches(sub).unwrap_or_else(|e| e.exit()))
        }
        "schema" => run_schema(&SchemaArgs::from_arg_matches(sub).unwrap_or_else(|e| e.exit())),
        _ => {
            let common = Common::from_arg_matches(sub).unwrap_or_else(|e| e.exit());
            let experiment = (name != "sweep").then_some(name);
            let spec = SweepSpec::from_settings(&settings(&common, experiment)?)?;
            run_spec(&spec)
        }
    }
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::Partial) => ExitCode::from(3),
        Err(e @ HarnessError::Validation(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
