//! A single trial with an event-by-event trace.

use std::io::Write;

use convfpp::engine::{init_trial, Caps, EventKind, TrialConfig, TrialOutcome};
use convfpp::model::{ClockMode, ModelParams, RandomField, TopologyKind};

use crate::error::HarnessResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateOptions {
    pub topology: TopologyKind,
    pub d: usize,
    pub lambda: f64,
    pub rho: f64,
    pub target: u32,
    pub mode: ClockMode,
    pub prune: bool,
    pub seed: u64,
    pub trial: u64,
    pub caps: Caps,
    /// Trace lines to print before going quiet; the trial still runs to the end.
    pub max_lines: u64,
}

/// Run the trial, writing one line per processed event and a summary.
pub fn simulate<W: Write>(opts: &SimulateOptions, mut out: W) -> HarnessResult<TrialOutcome> {
    let params = match opts.topology {
        TopologyKind::Tree => ModelParams::tree(opts.d, opts.lambda, opts.rho)?,
        TopologyKind::Lattice => ModelParams::lattice(opts.d, opts.lambda, opts.rho)?,
    }
    .with_mode(opts.mode)?;
    let field = RandomField::new(opts.seed, opts.trial);
    let cfg = TrialConfig::to_target(opts.target)
        .with_caps(opts.caps)
        .with_pruning(opts.prune);
    let mut state = init_trial(&params, &field, cfg)?;
    writeln!(out, "# time kind source -> target effect")?;
    let mut lines = 0u64;
    while let Some(step) = state.process_next_event()? {
        if lines < opts.max_lines {
            let ev = step.event;
            let target = state.site_id(ev.target);
            let kind = match ev.kind {
                EventKind::Convert => "convert",
                EventKind::Arrive1 => "arrive1",
                EventKind::Arrive2 => "arrive2",
            };
            let tag = if ev.resampled { " (resampled)" } else { "" };
            if ev.kind == EventKind::Convert {
                writeln!(out, "{:.9} {kind} {target} {:?}{tag}", ev.time, step.effect)?;
            } else {
                let source = state.site_id(ev.source);
                writeln!(
                    out,
                    "{:.9} {kind} {source} -> {target} {:?}{tag}",
                    ev.time, step.effect
                )?;
            }
        } else if lines == opts.max_lines {
            writeln!(out, "# trace truncated")?;
        }
        lines += 1;
    }
    let o = state.outcome().expect("trial finished");
    writeln!(
        out,
        "# verdict {:?} stop_time {} max_radius {} events {} conversions {} occupied {}",
        o.verdict,
        o.stop_time,
        o.max_radius,
        o.events_processed,
        o.conversions,
        state.occupied()
    )?;
    Ok(o)
}
