//! Parameter sweeps: grid expansion, validation, seeding, execution and
//! CSV rows.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use convfpp::engine::Caps;
use convfpp::rng::mix64;

use crate::config::Settings;
use crate::error::{invalid, HarnessResult};
use crate::experiments::{find, Cell, Experiment, Outputs, RunCtx};
use crate::schema::{col, parse_record, ColType, Column, Value};

/// Keys that configure the sweep itself rather than a parameter.
pub const SWEEP_KEYS: [&str; 9] = [
    "experiment",
    "trials",
    "seed",
    "workers",
    "out",
    "confidence",
    "max_sites",
    "max_events",
    "horizon",
];

pub const CAP_KEYS: [&str; 3] = ["max_sites", "max_events", "horizon"];

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub experiment: &'static Experiment,
    /// Grid cells in row order: the last parameter varies fastest.
    pub cells: Vec<Cell>,
    pub trials: u64,
    pub master_seed: u64,
    pub caps: Caps,
    pub confidence: f64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// `None` writes to stdout.
    pub out: Option<PathBuf>,
}

/// Seed of a cell; the trials of the cell use the fields
/// `(cell_seed, 0..trials)`.
pub fn cell_seed(master_seed: u64, cell: u64) -> u64 {
    mix64(
        mix64(master_seed ^ 0xa076_1d64_78bd_642f)
            .wrapping_add(mix64(cell ^ 0xe703_7ed1_a0b4_28db)),
    )
}

fn parse_or<T: std::str::FromStr>(s: &Settings, key: &str, default: T) -> HarnessResult<T> {
    Ok(s.get_parsed(key)?.unwrap_or(default))
}

impl SweepSpec {
    /// Expand and validate every cell before any work starts.
    pub fn from_settings(s: &Settings) -> HarnessResult<SweepSpec> {
        let Some(name) = s.get("experiment")? else {
            return invalid("no experiment given");
        };
        let experiment = find(name)?;
        for key in s.keys() {
            if !SWEEP_KEYS.contains(&key) && !experiment.params.iter().any(|p| p.name == key) {
                return invalid(format!("{}: unknown key {key:?}", experiment.name));
            }
        }
        let trials: u64 = parse_or(s, "trials", 1000)?;
        if trials == 0 {
            return invalid("trials must be at least 1");
        }
        let confidence: f64 = parse_or(s, "confidence", 0.95)?;
        convfpp::stats::z_value(confidence)?;
        let defaults = Caps::default();
        let caps = Caps {
            max_sites: parse_or(s, "max_sites", defaults.max_sites)?,
            max_events: parse_or(s, "max_events", defaults.max_events)?,
            horizon: parse_or(s, "horizon", defaults.horizon)?,
        };
        if !experiment.uses_caps && CAP_KEYS.iter().any(|k| s.get_all(k).is_some()) {
            return invalid(format!("{} takes no caps", experiment.name));
        }
        if caps.max_sites == 0 || caps.max_events == 0 || !(caps.horizon > 0.0) {
            return invalid("caps must be positive");
        }

        let axes: Vec<Vec<Option<String>>> = experiment
            .params
            .iter()
            .map(|p| match s.get_all(p.name) {
                Some(list) => list.iter().cloned().map(Some).collect(),
                None => vec![None],
            })
            .collect();
        let mut cells = Vec::new();
        let mut idx = vec![0usize; axes.len()];
        loop {
            let pick = |k: &str| {
                let i = experiment.params.iter().position(|p| p.name == k)?;
                axes[i][idx[i]].clone()
            };
            let cell = Cell::from_strings(experiment, pick)?;
            cell.validate().map_err(|e| {
                crate::HarnessError::Validation(format!("cell {}: {e}", cells.len()))
            })?;
            cells.push(cell);
            // Odometer with the last axis fastest.
            let mut a = axes.len();
            loop {
                if a == 0 {
                    break;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < axes[a].len() {
                    break;
                }
                idx[a] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }

        Ok(SweepSpec {
            experiment,
            cells,
            trials,
            master_seed: parse_or(s, "seed", 1)?,
            caps,
            confidence,
            workers: parse_or(s, "workers", 0)?,
            out: s.get("out")?.map(PathBuf::from),
        })
    }

    pub fn columns(&self) -> Vec<Column> {
        columns(self.experiment)
    }
}

/// Header of every sweep over `experiment`.
pub fn columns(experiment: &Experiment) -> Vec<Column> {
    let mut c = vec![col("cell", ColType::Int, "grid cell index, in row order")];
    c.extend(experiment.params.iter().map(|p| col(p.name, p.ty, p.doc)));
    c.push(col("trials", ColType::Int, "trials run in the cell"));
    c.push(col(
        "seed",
        ColType::Int,
        "cell seed; trial t uses the field (seed, t)",
    ));
    c.push(col(
        "confidence",
        ColType::Float,
        "confidence level of the intervals",
    ));
    if experiment.uses_caps {
        c.push(col("max_sites", ColType::Int, "cap on occupied sites"));
        c.push(col("max_events", ColType::Int, "cap on processed events"));
        c.push(col("horizon", ColType::Float, "cap on simulated time"));
    }
    c.extend(experiment.outputs.iter().copied());
    c.push(col("capped", ColType::Int, "trials stopped by a cap"));
    c.push(col("status", ColType::Text, "ok or failed"));
    c.push(col("error", ColType::Text, "failure message"));
    c.push(col(
        "wall_ms",
        ColType::Float,
        "wall-clock time of the cell",
    ));
    c
}

/// One output row.
#[derive(Debug, Clone)]
pub struct Row {
    pub experiment: &'static Experiment,
    pub cell: u64,
    pub params: Vec<Value>,
    pub trials: u64,
    pub seed: u64,
    pub confidence: f64,
    pub caps: Option<Caps>,
    /// Outputs, or the failure message.
    pub result: Result<Outputs, String>,
    pub wall_ms: f64,
}

impl Row {
    pub fn fields(&self) -> Vec<Option<Value>> {
        let mut f: Vec<Option<Value>> = vec![Some(self.cell.into())];
        f.extend(self.params.iter().cloned().map(Some));
        f.push(Some(self.trials.into()));
        f.push(Some(self.seed.into()));
        f.push(Some(self.confidence.into()));
        if let Some(c) = self.caps {
            f.push(Some(c.max_sites.into()));
            f.push(Some(c.max_events.into()));
            f.push(Some(c.horizon.into()));
        }
        match &self.result {
            Ok(o) => {
                f.extend(o.values.iter().cloned().map(Some));
                f.push(Some(o.capped.into()));
                f.push(Some("ok".into()));
                f.push(None);
            }
            Err(msg) => {
                f.resize(f.len() + self.experiment.outputs.len(), None);
                f.push(None);
                f.push(Some("failed".into()));
                f.push(Some(Value::Text(msg.clone())));
            }
        }
        f.push(Some(self.wall_ms.into()));
        f
    }

    /// Inverse of [`Row::fields`] through the text encoding.
    pub fn parse(
        experiment: &'static Experiment,
        record: &csv::StringRecord,
    ) -> HarnessResult<Row> {
        let cols = columns(experiment);
        let mut f = parse_record(&cols, record)?.into_iter();
        let mut next = || f.next().expect("width checked");
        let int = |v: Option<Value>| match v {
            Some(Value::Int(i)) => Ok(i),
            other => invalid(format!("expected an integer, got {other:?}")),
        };
        let float = |v: Option<Value>| match v {
            Some(Value::Float(x)) => Ok(x),
            other => invalid(format!("expected a float, got {other:?}")),
        };
        let cell = int(next())?;
        let mut params = Vec::new();
        for p in experiment.params {
            match next() {
                Some(v) => params.push(v),
                None => return invalid(format!("missing value for {}", p.name)),
            }
        }
        let trials = int(next())?;
        let seed = int(next())?;
        let confidence = float(next())?;
        let caps = if experiment.uses_caps {
            Some(Caps {
                max_sites: int(next())? as usize,
                max_events: int(next())?,
                horizon: float(next())?,
            })
        } else {
            None
        };
        let outs: Vec<Option<Value>> = (0..experiment.outputs.len()).map(|_| next()).collect();
        let capped = next();
        let status = next();
        let error = next();
        let wall_ms = float(next())?;
        let result = match status {
            Some(Value::Text(s)) if s == "ok" => {
                let values = outs
                    .into_iter()
                    .map(|v| {
                        v.ok_or_else(|| {
                            crate::HarnessError::Validation("empty output in an ok row".into())
                        })
                    })
                    .collect::<HarnessResult<Vec<_>>>()?;
                Ok(Outputs {
                    values,
                    capped: int(capped)?,
                })
            }
            Some(Value::Text(s)) if s == "failed" => Err(match error {
                Some(Value::Text(m)) => m,
                _ => String::new(),
            }),
            other => return invalid(format!("bad status {other:?}")),
        };
        Ok(Row {
            experiment,
            cell,
            params,
            trials,
            seed,
            confidence,
            caps,
            result,
            wall_ms,
        })
    }

    /// Field-by-field equality with floats compared bit for bit; wall time
    /// is ignored when `with_time` is false.
    pub fn same(&self, other: &Row, with_time: bool) -> bool {
        let (mut a, mut b) = (self.fields(), other.fields());
        if !with_time {
            a.pop();
            b.pop();
        }
        a.len() == b.len()
            && a.iter().zip(&b).all(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => x.same(y),
                (None, None) => true,
                _ => false,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepSummary {
    pub cells: usize,
    pub failed: usize,
    /// Trials in cells that completed.
    pub trials: u64,
}

/// Run every cell of `spec` with the experiment's own operation.
pub fn run_sweep<W: Write>(spec: &SweepSpec, out: W) -> HarnessResult<SweepSummary> {
    run_sweep_with(spec, out, spec.experiment.run)
}

/// Run every cell through `runner`, writing the header and then one row
/// per cell as soon as it is done. A runner error or panic marks the cell
/// failed and the sweep moves on.
pub fn run_sweep_with<W, R>(spec: &SweepSpec, out: W, runner: R) -> HarnessResult<SweepSummary>
where
    W: Write,
    R: Fn(&Cell, &RunCtx) -> HarnessResult<Outputs> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| crate::HarnessError::Validation(format!("worker pool: {e}")))?;
    let cols = spec.columns();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(cols.iter().map(|c| c.name))?;
    w.flush()?;
    let mut summary = SweepSummary::default();
    for (i, cell) in spec.cells.iter().enumerate() {
        let ctx = RunCtx {
            trials: spec.trials,
            seed: cell_seed(spec.master_seed, i as u64),
            caps: spec.caps,
            confidence: spec.confidence,
        };
        let start = Instant::now();
        let result = match catch_unwind(AssertUnwindSafe(|| pool.install(|| runner(cell, &ctx)))) {
            Ok(Ok(o)) if o.values.len() == spec.experiment.outputs.len() => Ok(o),
            Ok(Ok(o)) => Err(format!("runner returned {} outputs", o.values.len())),
            Ok(Err(e)) => Err(e.to_string()),
            Err(panic) => Err(panic_message(panic.as_ref())),
        };
        let row = Row {
            experiment: spec.experiment,
            cell: i as u64,
            params: cell.values.clone(),
            trials: spec.trials,
            seed: ctx.seed,
            confidence: spec.confidence,
            caps: spec.experiment.uses_caps.then_some(spec.caps),
            result,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        summary.cells += 1;
        match row.result {
            Ok(_) => summary.trials += spec.trials,
            Err(_) => summary.failed += 1,
        }
        w.write_record(
            row.fields()
                .iter()
                .map(|f| f.as_ref().map(|v| v.to_string()).unwrap_or_default()),
        )?;
        w.flush()?;
    }
    Ok(summary)
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    let msg = p
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown".into());
    format!("panic: {msg}")
}

/// Read a sweep CSV back into rows.
pub fn read_rows<R: std::io::Read>(
    experiment: &'static Experiment,
    input: R,
) -> HarnessResult<Vec<Row>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers()?.clone();
    let cols = columns(experiment);
    if header.len() != cols.len() || header.iter().zip(&cols).any(|(h, c)| h != c.name) {
        return invalid(format!(
            "header does not match the {} schema",
            experiment.name
        ));
    }
    r.records()
        .map(|rec| Row::parse(experiment, &rec?))
        .collect()
}
